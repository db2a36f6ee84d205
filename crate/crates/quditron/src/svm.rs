//! Soft-margin linear SVM solved by dual coordinate descent.
//!
//! Minimizes `½‖w̄‖² + C·Σ max(0, 1 − yᵢ·w̄·x̄ᵢ)` over feature rows whose
//! column 0 is the constant term; the constant column doubles as the
//! intercept coordinate of `w̄` (liblinear-style augmented bias), and the
//! returned [`SvmSolution`] routes it to `b`. One coordinate is optimized
//! exactly per step, sweeping a fresh random permutation each epoch, with
//! liblinear's projected-gradient shrinking of bounded coordinates.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use rand::SeedableRng;
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Hinge flavor of the loss term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SvmLoss {
    /// max(0, 1 − y·ŷ): the plain soft-margin objective.
    #[default]
    Hinge,
    /// max(0, 1 − y·ŷ)²: ablation variant.
    SquaredHinge,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Regularization trade-off; larger C penalizes margin violations harder.
    pub c: f64,
    /// Stopping threshold on the projected-gradient spread across one epoch.
    pub tolerance: f64,
    pub max_epochs: usize,
    /// Seed for the per-epoch coordinate permutation.
    pub seed: u64,
    pub loss: SvmLoss,
    /// Optional per-class cost multipliers (negative class, positive class).
    pub class_weights: Option<(f64, f64)>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            c: 1.0,
            tolerance: 1e-4,
            max_epochs: 1000,
            seed: 0,
            loss: SvmLoss::Hinge,
            class_weights: None,
        }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<()> {
        let bad_float = |v: f64| v.is_nan() || v <= 0.0;
        if bad_float(self.c) || bad_float(self.tolerance) || self.max_epochs < 1 {
            return Err(Error::InvalidConfig {
                reason: format!(
                    "solver requires C > 0, tolerance > 0, max_epochs >= 1 (got C={}, tol={}, epochs={})",
                    self.c, self.tolerance, self.max_epochs
                ),
            });
        }
        Ok(())
    }
}

/// One binary subproblem: feature rows (column 0 constant) and ±1 labels.
pub struct SvmProblem<'a> {
    x: &'a Matrix,
    y: &'a [f64],
    config: SolverConfig,
}

impl<'a> SvmProblem<'a> {
    pub fn new(x: &'a Matrix, y: &'a [f64], config: SolverConfig) -> Result<Self> {
        config.validate()?;
        if x.rows() != y.len() {
            return Err(Error::DimensionMismatch {
                context: "svm labels",
                expected: x.rows(),
                got: y.len(),
            });
        }
        if x.cols() < 2 {
            return Err(Error::DimensionMismatch {
                context: "svm feature columns (constant + at least one feature)",
                expected: 2,
                got: x.cols(),
            });
        }
        if !x.is_finite() {
            return Err(Error::NonFinite {
                context: "svm feature matrix",
            });
        }
        let mut saw_pos = false;
        let mut saw_neg = false;
        for (i, &yi) in y.iter().enumerate() {
            if yi == 1.0 {
                saw_pos = true;
            } else if yi == -1.0 {
                saw_neg = true;
            } else {
                return Err(Error::InvalidConfig {
                    reason: format!("label {yi} at row {i} is not -1 or +1"),
                });
            }
            if x.row(i)[0] != 1.0 {
                return Err(Error::InvalidConfig {
                    reason: format!("feature row {i} does not start with the constant 1"),
                });
            }
        }
        if !(saw_pos && saw_neg) {
            return Err(Error::SingleClass);
        }
        Ok(SvmProblem { x, y, config })
    }

    pub fn n_samples(&self) -> usize {
        self.x.rows()
    }

    pub fn n_columns(&self) -> usize {
        self.x.cols()
    }
}

/// Weights over the non-constant monomials plus the separated bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmSolution {
    pub w: Vec<f64>,
    pub b: f64,
}

/// Convergence record of one solve.
#[derive(Debug, Clone)]
pub struct SolveInfo {
    pub epochs: usize,
    pub converged: bool,
    /// Dual objective ½αᵀQα − Σα after each epoch; non-increasing.
    pub objective_trace: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Trains the soft-margin SVM; deterministic for a fixed problem and seed.
pub fn train(problem: &SvmProblem) -> Result<SvmSolution> {
    train_with_info(problem).map(|(sol, _)| sol)
}

pub fn train_with_info(problem: &SvmProblem) -> Result<(SvmSolution, SolveInfo)> {
    let x = problem.x;
    let y = problem.y;
    let cfg = &problem.config;
    let n = x.rows();
    let m = x.cols();

    let (weight_neg, weight_pos) = cfg.class_weights.unwrap_or((1.0, 1.0));
    let cost = |yi: f64| cfg.c * if yi > 0.0 { weight_pos } else { weight_neg };
    // L2 loss moves the box bound to infinity and adds 1/(2C) to the diagonal.
    let (upper, diag): (Vec<f64>, Vec<f64>) = match cfg.loss {
        SvmLoss::Hinge => (y.iter().map(|&yi| cost(yi)).collect(), vec![0.0; n]),
        SvmLoss::SquaredHinge => (
            vec![f64::INFINITY; n],
            y.iter().map(|&yi| 0.5 / cost(yi)).collect(),
        ),
    };

    let qii: Vec<f64> = (0..n)
        .map(|i| {
            let r = x.row(i);
            dot(r, r) + diag[i]
        })
        .collect();

    let mut alpha = vec![0.0; n];
    let mut w = vec![0.0; m];
    let mut active: Vec<usize> = (0..n).collect();
    let mut active_size = n;
    let mut pgmax_old = f64::INFINITY;
    let mut pgmin_old = f64::NEG_INFINITY;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut trace = Vec::new();
    let mut converged = false;
    let mut epochs = 0;

    while epochs < cfg.max_epochs {
        active[..active_size].shuffle(&mut rng);
        let mut pgmax_new = f64::NEG_INFINITY;
        let mut pgmin_new = f64::INFINITY;

        let mut s = 0;
        while s < active_size {
            let i = active[s];
            let yi = y[i];
            let row = x.row(i);
            let g = yi * dot(&w, row) - 1.0 + diag[i] * alpha[i];

            let mut pg = 0.0;
            if alpha[i] == 0.0 {
                if g > pgmax_old {
                    active_size -= 1;
                    active.swap(s, active_size);
                    continue;
                }
                if g < 0.0 {
                    pg = g;
                }
            } else if alpha[i] == upper[i] {
                if g < pgmin_old {
                    active_size -= 1;
                    active.swap(s, active_size);
                    continue;
                }
                if g > 0.0 {
                    pg = g;
                }
            } else {
                pg = g;
            }

            pgmax_new = pgmax_new.max(pg);
            pgmin_new = pgmin_new.min(pg);

            if pg.abs() > 1e-12 {
                let old = alpha[i];
                alpha[i] = (old - g / qii[i]).clamp(0.0, upper[i]);
                let step = (alpha[i] - old) * yi;
                for (wj, &xj) in w.iter_mut().zip(row) {
                    *wj += step * xj;
                }
            }
            s += 1;
        }
        epochs += 1;

        // dual objective ½‖w‖² + ½Σ diag·α² − Σα
        let obj = 0.5 * dot(&w, &w)
            + 0.5 * alpha.iter().zip(&diag).map(|(a, d)| d * a * a).sum::<f64>()
            - alpha.iter().sum::<f64>();
        trace.push(obj);

        if pgmax_new - pgmin_new <= cfg.tolerance {
            if active_size == n {
                converged = true;
                break;
            }
            // optimum reached on the shrunk set; verify on the full set
            active_size = n;
            pgmax_old = f64::INFINITY;
            pgmin_old = f64::NEG_INFINITY;
            continue;
        }
        pgmax_old = if pgmax_new <= 0.0 {
            f64::INFINITY
        } else {
            pgmax_new
        };
        pgmin_old = if pgmin_new >= 0.0 {
            f64::NEG_INFINITY
        } else {
            pgmin_new
        };
    }

    if !w.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite {
            context: "svm weight vector",
        });
    }
    let solution = SvmSolution {
        b: w[0],
        w: w[1..].to_vec(),
    };
    Ok((
        solution,
        SolveInfo {
            epochs,
            converged,
            objective_trace: trace,
        },
    ))
}

/// ŷᵢ = w·xᵢ + b over rows of a feature matrix whose column 0 is the
/// constant (the constant contributes through `b`, not `w`).
pub fn decision_values(sol: &SvmSolution, x: &Matrix) -> Result<Vec<f64>> {
    if x.cols() != sol.w.len() + 1 {
        return Err(Error::DimensionMismatch {
            context: "decision_values feature columns",
            expected: sol.w.len() + 1,
            got: x.cols(),
        });
    }
    Ok((0..x.rows())
        .map(|i| dot(&x.row(i)[1..], &sol.w) + sol.b)
        .collect())
}

/// Σ max(0, 1 − yᵢ·ŷᵢ), accumulated in ascending index order.
pub fn hinge_loss(y: &[f64], yhat: &[f64]) -> Result<f64> {
    if y.len() != yhat.len() {
        return Err(Error::DimensionMismatch {
            context: "hinge_loss lengths",
            expected: y.len(),
            got: yhat.len(),
        });
    }
    let mut acc = 0.0;
    for (yi, yh) in y.iter().zip(yhat) {
        acc += (1.0 - yi * yh).max(0.0);
    }
    Ok(acc)
}

/// Primal objective ½‖w̄‖² + C·Σ loss at a given solution, with the
/// intercept inside the regularizer to match the solver's formulation.
pub fn primal_objective(sol: &SvmSolution, x: &Matrix, y: &[f64], cfg: &SolverConfig) -> f64 {
    let yhat = decision_values(sol, x).expect("dimension checked by caller");
    let reg = 0.5 * (dot(&sol.w, &sol.w) + sol.b * sol.b);
    let (wn, wp) = cfg.class_weights.unwrap_or((1.0, 1.0));
    let loss: f64 = y
        .iter()
        .zip(&yhat)
        .map(|(&yi, &yh)| {
            let margin = (1.0 - yi * yh).max(0.0);
            let ci = cfg.c * if yi > 0.0 { wp } else { wn };
            match cfg.loss {
                SvmLoss::Hinge => ci * margin,
                SvmLoss::SquaredHinge => ci * margin * margin,
            }
        })
        .sum();
    reg + loss
}
