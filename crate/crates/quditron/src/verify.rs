//! Mathematical self-check battery behind `quditron verify`.
//!
//! Each check exercises one identity the implementation relies on, against
//! an independent evaluation route, and reports the worst deviation seen.

use crate::error::Result;
use crate::features::{FeatureMap, Variant, feature_count};
use crate::linalg::{Lu, Matrix};
use crate::qubit;
use crate::qudit::{
    ThetaVector, b_column_closed_form, build_skew_matrix, cayley_unitary, compute_aux,
    outcome_probabilities, output_state_closed_form,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn pass(name: &'static str, detail: String) -> Self {
        CheckResult {
            name,
            passed: true,
            detail,
        }
    }

    fn fail(name: &'static str, detail: String) -> Self {
        CheckResult {
            name,
            passed: false,
            detail,
        }
    }
}

fn random_theta(d: usize, rng: &mut ChaCha8Rng) -> ThetaVector {
    let angles: Vec<f64> = (0..d - 1)
        .map(|_| rng.random_range(0.01..PI - 0.01))
        .collect();
    ThetaVector::new(d, angles).expect("valid by construction")
}

/// Lemma-1 normalization: Σ s_ℓ² c_{ℓ−1}² = 1 within 1e−12 over 10,000
/// random parameter vectors with d cycling through 2…64.
pub fn check_lemma1_normalization() -> CheckResult {
    const NAME: &str = "lemma1-normalization";
    let mut rng = ChaCha8Rng::seed_from_u64(0x1e4a);
    let mut worst = 0.0f64;
    for trial in 0..10_000 {
        let d = 2 + trial % 63;
        let aux = compute_aux(&random_theta(d, &mut rng));
        let total: f64 = aux.s.iter().zip(&aux.c).map(|(s, c)| s * s * c * c).sum();
        worst = worst.max((total - 1.0).abs());
    }
    if worst <= 1e-12 {
        CheckResult::pass(
            NAME,
            format!("max |Σ s²c² − 1| = {worst:.3e} over 10000 draws"),
        )
    } else {
        CheckResult::fail(NAME, format!("normalization violated: {worst:.3e} > 1e-12"))
    }
}

/// Closed-form state vs column 0 of the dense Cayley route, plus
/// orthogonality of the dense unitary, within 1e−10.
pub fn check_cayley_equivalence() -> CheckResult {
    check_cayley_equivalence_with("cayley-closed-form-equivalence", &build_skew_matrix)
}

/// Same check with an injectable skew-matrix builder (used to prove the
/// check actually detects a perturbed construction).
pub fn check_cayley_equivalence_with(
    name: &'static str,
    build: &dyn Fn(&ThetaVector) -> Result<Matrix>,
) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(0xca11e4);
    let mut worst_state = 0.0f64;
    let mut worst_orth = 0.0f64;
    for trial in 0..500 {
        let d = 2 + trial % 63;
        let theta = random_theta(d, &mut rng);
        let a = match build(&theta) {
            Ok(a) => a,
            Err(e) => return CheckResult::fail(name, format!("builder failed: {e}")),
        };
        let u = match cayley_unitary(&a) {
            Ok(u) => u,
            Err(e) => return CheckResult::fail(name, format!("solve failed: {e}")),
        };
        let utu = u.transpose().matmul(&u);
        worst_orth = worst_orth.max(utu.max_abs_diff(&Matrix::identity(d)));
        let closed = output_state_closed_form(&theta);
        for (ell, amp) in closed.amplitudes.iter().enumerate() {
            worst_state = worst_state.max((u[(ell, 0)] - amp).abs());
        }
    }
    if worst_state < 1e-10 && worst_orth < 1e-10 {
        CheckResult::pass(
            name,
            format!("max state diff {worst_state:.3e}, max ‖UᵀU−I‖ {worst_orth:.3e}"),
        )
    } else {
        CheckResult::fail(
            name,
            format!("state diff {worst_state:.3e}, orthogonality {worst_orth:.3e} (limit 1e-10)"),
        )
    }
}

/// Closed-form first column of (A+I)⁻¹ vs a dense LU solve, within 1e−10.
pub fn check_b_column() -> CheckResult {
    const NAME: &str = "b-column-closed-form";
    let mut rng = ChaCha8Rng::seed_from_u64(0xbc01);
    let mut worst = 0.0f64;
    for trial in 0..500 {
        let d = 2 + trial % 63;
        let theta = random_theta(d, &mut rng);
        let a = match build_skew_matrix(&theta) {
            Ok(a) => a,
            Err(e) => return CheckResult::fail(NAME, format!("builder failed: {e}")),
        };
        let mut a_plus_i = a;
        for i in 0..d {
            a_plus_i[(i, i)] += 1.0;
        }
        let mut e0 = vec![0.0; d];
        e0[0] = 1.0;
        let dense = match Lu::factor(&a_plus_i).map(|lu| lu.solve_vec(&e0)) {
            Ok(v) => v,
            Err(e) => return CheckResult::fail(NAME, format!("solve failed: {e}")),
        };
        let closed = match b_column_closed_form(&theta) {
            Ok(v) => v,
            Err(e) => return CheckResult::fail(NAME, format!("closed form failed: {e}")),
        };
        for (x, y) in closed.iter().zip(&dense) {
            worst = worst.max((x - y).abs());
        }
    }
    if worst < 1e-10 {
        CheckResult::pass(NAME, format!("max |closed − solve| = {worst:.3e}"))
    } else {
        CheckResult::fail(NAME, format!("deviation {worst:.3e} exceeds 1e-10"))
    }
}

/// Qubit-circuit statevector vs qudit probabilities for d = 2…12, 100
/// random parameter vectors each, within 1e−12 and with invalid outcome
/// mass below 1e−12.
pub fn check_qubit_equivalence() -> CheckResult {
    const NAME: &str = "qubit-circuit-equivalence";
    let mut rng = ChaCha8Rng::seed_from_u64(0x9b17);
    let mut worst_prob = 0.0f64;
    let mut worst_invalid = 0.0f64;
    for d in 2..=12 {
        for _ in 0..100 {
            let theta = random_theta(d, &mut rng);
            let circuit = match qubit::compile(&theta) {
                Ok(c) => c,
                Err(e) => return CheckResult::fail(NAME, format!("compile failed: {e}")),
            };
            let sv = qubit::simulate(&circuit);
            let dist = qubit::measurement_distribution(&sv, d);
            let qudit_probs = outcome_probabilities(&theta);
            worst_invalid = worst_invalid.max(dist.invalid);
            for (a, b) in dist.entries.iter().zip(&qudit_probs.probs) {
                worst_prob = worst_prob.max((a - b).abs());
            }
        }
    }
    if worst_prob < 1e-12 && worst_invalid < 1e-12 {
        CheckResult::pass(
            NAME,
            format!("max prob diff {worst_prob:.3e}, max invalid mass {worst_invalid:.3e}"),
        )
    } else {
        CheckResult::fail(
            NAME,
            format!("prob diff {worst_prob:.3e}, invalid mass {worst_invalid:.3e} (limit 1e-12)"),
        )
    }
}

/// Weight counts against the published table values.
pub fn check_feature_counts() -> CheckResult {
    const NAME: &str = "feature-weight-counts";
    let cases = [
        (10usize, 2usize, 66usize),
        (10, 3, 286),
        (20, 3, 1771),
        (30, 3, 5456),
        (40, 3, 12341),
    ];
    let mut seen = Vec::new();
    for (p, l, want) in cases {
        let map = match FeatureMap::new(p, l, Variant::Multivariable) {
            Ok(m) => m,
            Err(e) => return CheckResult::fail(NAME, format!("bad map: {e}")),
        };
        match feature_count(&map) {
            Ok(got) if got == want => seen.push(format!("(p={p},L={l})={got}")),
            Ok(got) => {
                return CheckResult::fail(
                    NAME,
                    format!("(p={p},L={l}) gives {got}, table says {want}"),
                );
            }
            Err(e) => return CheckResult::fail(NAME, format!("count failed: {e}")),
        }
    }
    CheckResult::pass(NAME, seen.join(" "))
}

/// Runs the whole battery in order.
pub fn run_all() -> Vec<CheckResult> {
    vec![
        check_lemma1_normalization(),
        check_cayley_equivalence(),
        check_b_column(),
        check_qubit_equivalence(),
        check_feature_counts(),
    ]
}
