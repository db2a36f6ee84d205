//! The parameterized qudit neuron.
//!
//! A `d`-dimensional orthogonal operator is parameterized by `d−1` angles
//! through the Cayley transform of a skew-symmetric matrix whose non-zero
//! entries sit in its first row and column. Applied to the basis state
//! `|0⟩`, the operator admits a closed-form output state built from running
//! sine products and single cosines:
//!
//! ```text
//! amplitudes[ℓ] = s_{ℓ+1} · c_ℓ,   c_ℓ = cos θ_{d−ℓ},   s_ℓ = ∏_{k=1}^{d−ℓ} sin θ_k
//! ```
//!
//! The closed form is total and is the canonical evaluation path. The
//! explicit matrix route (skew matrix → Cayley transform → first column)
//! is singular where all angles sit at π/2 and exists as a verification
//! oracle for the closed form.

use crate::error::{Error, Result};
use crate::linalg::{Lu, Matrix};

/// Threshold on |s₁ − 1| below which the skew-matrix denominator is
/// treated as degenerate.
pub const DEGENERACY_THRESHOLD: f64 = 1e-9;

/// The d−1 real angles parameterizing the effective network unitary.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaVector {
    d: usize,
    angles: Vec<f64>,
}

impl ThetaVector {
    /// Builds a parameter vector for a `d`-dimensional qudit from the angles
    /// θ₁…θ_{d−1} (radians). Accepts any finite angles.
    pub fn new(d: usize, angles: Vec<f64>) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidConfig {
                reason: format!("qudit dimension must be at least 2, got {d}"),
            });
        }
        if angles.len() != d - 1 {
            return Err(Error::DimensionMismatch {
                context: "theta vector length",
                expected: d - 1,
                got: angles.len(),
            });
        }
        if !angles.iter().all(|a| a.is_finite()) {
            return Err(Error::NonFinite {
                context: "theta vector",
            });
        }
        Ok(ThetaVector { d, angles })
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    /// θ_k for k = 1…d−1.
    pub fn angle(&self, k: usize) -> f64 {
        self.angles[k - 1]
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }
}

/// Auxiliary cosine/sine products.
///
/// `c[ℓ]` holds c_ℓ for ℓ = 0…d−1 (c₀ = 1 by convention; the formal c_d is
/// never consumed and is not materialized). `s[i]` holds s_{i+1} for
/// i = 0…d−1, so `s[d−1]` is the empty product s_d = 1. With this layout the
/// output state is simply `s[ℓ]·c[ℓ]`.
#[derive(Debug, Clone)]
pub struct AuxProducts {
    pub c: Vec<f64>,
    pub s: Vec<f64>,
}

impl AuxProducts {
    /// s_ℓ for ℓ = 1…d.
    pub fn s_at(&self, ell: usize) -> f64 {
        self.s[ell - 1]
    }

    /// c_ℓ for ℓ = 0…d−1.
    pub fn c_at(&self, ell: usize) -> f64 {
        self.c[ell]
    }
}

/// Output state of the neuron; real because the operator is orthogonal.
#[derive(Debug, Clone, PartialEq)]
pub struct QuditState {
    pub amplitudes: Vec<f64>,
}

impl QuditState {
    pub fn dimension(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_squared(&self) -> f64 {
        self.amplitudes.iter().map(|a| a * a).sum()
    }
}

/// Measurement-outcome probabilities, index j = outcome / class slot.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeProbabilities {
    pub probs: Vec<f64>,
}

impl OutcomeProbabilities {
    pub fn dimension(&self) -> usize {
        self.probs.len()
    }

    /// Outcome index with the largest probability; ties break to the
    /// lowest index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (j, &p) in self.probs.iter().enumerate() {
            if p > self.probs[best] {
                best = j;
            }
        }
        best
    }
}

/// Evaluates the auxiliary products for `theta` with the conventions
/// c₀ = s_d = 1.
pub fn compute_aux(theta: &ThetaVector) -> AuxProducts {
    let d = theta.dimension();
    let mut c = vec![1.0; d];
    for (ell, slot) in c.iter_mut().enumerate().skip(1) {
        *slot = theta.angle(d - ell).cos();
    }
    // s_{i+1} = s_{i+2} · sin θ_{d−i−1}, accumulated from the empty product
    let mut s = vec![1.0; d];
    for i in (0..d - 1).rev() {
        s[i] = s[i + 1] * theta.angle(d - i - 1).sin();
    }
    AuxProducts { c, s }
}

/// Builds the skew-symmetric matrix whose Cayley transform realizes the
/// neuron. Fails at the degenerate point s₁ = 1 (all θ_k at π/2), where the
/// denominator of the first-row entries vanishes; the closed-form state
/// path has no such restriction.
pub fn build_skew_matrix(theta: &ThetaVector) -> Result<Matrix> {
    let d = theta.dimension();
    let aux = compute_aux(theta);
    let denom = aux.s[0] - 1.0;
    if denom.abs() <= DEGENERACY_THRESHOLD {
        return Err(Error::DegenerateParameter { gap: denom.abs() });
    }
    let mut a = Matrix::zeros(d, d);
    for j in 1..d {
        let v = aux.s[j] * aux.c[j] / denom;
        a[(0, j)] = v;
        a[(j, 0)] = -v;
    }
    Ok(a)
}

/// Cayley transform `U = (A−I)(A+I)⁻¹` of a skew-symmetric matrix,
/// computed as the dense linear solve `(I−A)·Uᵀ = −(A+I)` rather than an
/// explicit inversion. For skew-symmetric input, `A+I` is always invertible
/// and the result is orthogonal.
pub fn cayley_unitary(a: &Matrix) -> Result<Matrix> {
    let d = a.rows();
    // (A+I)ᵀ = I − A and (A−I)ᵀ = −(A+I) for skew-symmetric A.
    let mut lhs = Matrix::zeros(d, d);
    let mut rhs = Matrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            lhs[(i, j)] = -a[(i, j)];
            rhs[(i, j)] = -a[(i, j)];
        }
        lhs[(i, i)] += 1.0;
        rhs[(i, i)] -= 1.0;
    }
    let lu = Lu::factor(&lhs)?;
    Ok(lu.solve_matrix(&rhs).transpose())
}

/// Closed-form output state `U|0⟩`; total over all finite angles.
pub fn output_state_closed_form(theta: &ThetaVector) -> QuditState {
    let aux = compute_aux(theta);
    let amplitudes = aux.s.iter().zip(&aux.c).map(|(s, c)| s * c).collect();
    QuditState { amplitudes }
}

/// Measurement probabilities: elementwise squares of the closed-form
/// amplitudes. `probs[d−1]` reduces to cos²θ₁.
pub fn outcome_probabilities(theta: &ThetaVector) -> OutcomeProbabilities {
    let state = output_state_closed_form(theta);
    OutcomeProbabilities {
        probs: state.amplitudes.iter().map(|a| a * a).collect(),
    }
}

/// Closed form of the first column of `B = (A+I)⁻¹`:
/// `B₁₁ = (1−s₁)/2`, `B_ℓ1 = −s_ℓ c_{ℓ−1}/2`. Shares the skew-matrix
/// degeneracy restriction, since it is only checkable against a dense solve
/// away from that point.
pub fn b_column_closed_form(theta: &ThetaVector) -> Result<Vec<f64>> {
    let aux = compute_aux(theta);
    let denom = aux.s[0] - 1.0;
    if denom.abs() <= DEGENERACY_THRESHOLD {
        return Err(Error::DegenerateParameter { gap: denom.abs() });
    }
    let d = theta.dimension();
    let mut col = vec![0.0; d];
    col[0] = (1.0 - aux.s[0]) / 2.0;
    for (j, slot) in col.iter_mut().enumerate().skip(1) {
        *slot = -aux.s[j] * aux.c[j] / 2.0;
    }
    Ok(col)
}
