//! Sequential training of the qudit classifier.
//!
//! One angle function θ_m is fixed per step. At step m every surviving
//! candidate class j gets a one-vs-rest SVM fit (−1 iff label = j); the
//! candidate with the smallest hinge loss wins the measurement outcome
//! d−m, its fitted affine function is rescaled to saturate the sigmoid,
//! its samples leave the pool, and the procedure recurses. The class left
//! standing after d−1 rounds takes outcome 0 with no weights. The search
//! costs d + (d−1) + … + 2 = (d²+d−2)/2 SVM fits; fixed-assignment mode
//! skips the search (the highest surviving label trains each step) and
//! costs d−1 fits.

use crate::data::pca::PcaModel;
use crate::error::{Error, Result};
use crate::features::{FeatureMap, MonomialTable, feature_count};
use crate::linalg::Matrix;
use crate::svm::{self, SolverConfig, SvmLoss, SvmProblem};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;

pub const MODEL_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AssignmentMode {
    /// Search all class-to-outcome assignments by hinge loss.
    #[default]
    Optimized,
    /// Highest surviving label trains each step, no search.
    Fixed,
}

impl std::str::FromStr for AssignmentMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "optimized" => Ok(AssignmentMode::Optimized),
            "fixed" => Ok(AssignmentMode::Fixed),
            other => Err(Error::InvalidConfig {
                reason: format!("unknown assignment mode `{other}`"),
            }),
        }
    }
}

/// Which samples score the candidate hinge losses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OrderingEval {
    /// Score on the same samples the candidate was fitted on.
    #[default]
    Train,
    /// Fit on 4/5 of the surviving samples, score on the held-out 1/5.
    Holdout,
}

impl std::str::FromStr for OrderingEval {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(OrderingEval::Train),
            "holdout" => Ok(OrderingEval::Holdout),
            other => Err(Error::InvalidConfig {
                reason: format!("unknown ordering eval `{other}`"),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TrainerConfig {
    pub svm: SolverConfig,
    /// Multiplier applied to each winning affine function (weights and
    /// bias together) so the sigmoid saturates.
    pub scale: f64,
    pub assignment: AssignmentMode,
    pub ordering_eval: OrderingEval,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        TrainerConfig {
            svm: SolverConfig::default(),
            scale: 100.0,
            assignment: AssignmentMode::Optimized,
            ordering_eval: OrderingEval::Train,
        }
    }
}

/// Bijection between measurement outcomes and original class labels.
/// θ_m controls outcome d−m by the probability structure; outcome 0 goes
/// to the class that survives every elimination round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassAssignment {
    pub outcome_to_label: Vec<i64>,
}

impl ClassAssignment {
    pub fn class_count(&self) -> usize {
        self.outcome_to_label.len()
    }

    pub fn label_of_outcome(&self, outcome: usize) -> i64 {
        self.outcome_to_label[outcome]
    }

    /// Outcome index trained by θ_m.
    pub fn outcome_of_theta(d: usize, m: usize) -> usize {
        d - m
    }

    fn validate(&self) -> Result<()> {
        let d = self.outcome_to_label.len();
        let mut seen = self.outcome_to_label.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != d {
            return Err(Error::CorruptFile {
                reason: "assignment is not a bijection".into(),
            });
        }
        Ok(())
    }
}

/// Per-step record of the assignment search.
#[derive(Debug, Clone)]
pub struct StepRecord {
    /// Candidate classes examined this step (dense labels).
    pub candidates: Vec<usize>,
    pub hinge_losses: Vec<f64>,
    pub svm_converged: Vec<bool>,
    /// Winning dense label.
    pub chosen: usize,
    pub survivors_after: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, Default)]
pub struct TrainReport {
    pub steps: Vec<StepRecord>,
    pub total_svm_fits: usize,
}

/// Result of the sequential procedure over dense labels 0…d−1.
#[derive(Debug, Clone)]
pub struct SequentialFit {
    /// Scaled affine functions; entry m−1 belongs to θ_m and has
    /// feature_count entries with the bias in slot 0.
    pub per_theta_weights: Vec<Vec<f64>>,
    /// outcome → dense label.
    pub outcome_to_dense: Vec<usize>,
}

fn mix_seed(seed: u64, step: usize, candidate: usize) -> u64 {
    let mut z = seed
        .wrapping_add((step as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add((candidate as u64).wrapping_mul(0xbf58_476d_1ce4_e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn gather_rows(x: &Matrix, rows: &[usize]) -> Matrix {
    let m = x.cols();
    let mut data = Vec::with_capacity(rows.len() * m);
    for &r in rows {
        data.extend_from_slice(x.row(r));
    }
    Matrix::from_vec(rows.len(), m, data)
}

/// Runs the sequential elimination over the expanded training set.
///
/// `x_expanded` is n×feature_count with the constant in column 0; `y` holds
/// dense labels 0…d−1, all of which must be present.
pub fn fit_sequential(
    x_expanded: &Matrix,
    y: &[usize],
    d: usize,
    config: &TrainerConfig,
) -> Result<(SequentialFit, TrainReport)> {
    if d < 2 {
        return Err(Error::InvalidConfig {
            reason: format!("need at least 2 classes, got {d}"),
        });
    }
    if x_expanded.rows() != y.len() {
        return Err(Error::DimensionMismatch {
            context: "training labels",
            expected: x_expanded.rows(),
            got: y.len(),
        });
    }
    if config.scale.is_nan() || config.scale <= 0.0 {
        return Err(Error::InvalidConfig {
            reason: format!("scale must be positive, got {}", config.scale),
        });
    }
    let mut class_counts = vec![0usize; d];
    for &label in y {
        if label >= d {
            return Err(Error::InvalidConfig {
                reason: format!("label {label} outside 0..{d}"),
            });
        }
        class_counts[label] += 1;
    }
    if let Some(missing) = class_counts.iter().position(|&c| c == 0) {
        return Err(Error::ClassMissing { label: missing });
    }

    let alive: Vec<usize> = (0..y.len()).collect();
    let candidates: Vec<usize> = (0..d).collect();
    run_steps(x_expanded, y, d, alive, candidates, config)
}

/// Elimination loop starting from an explicit survivor pool. Rows outside
/// `alive` are never read.
fn run_steps(
    x_expanded: &Matrix,
    y: &[usize],
    d: usize,
    mut alive: Vec<usize>,
    mut candidates: Vec<usize>,
    config: &TrainerConfig,
) -> Result<(SequentialFit, TrainReport)> {
    let mut weights: Vec<Vec<f64>> = Vec::with_capacity(d - 1);
    let mut outcome_to_dense = vec![usize::MAX; d];
    let mut report = TrainReport::default();
    let start_m = d - candidates.len() + 1;

    for m in start_m..d {
        let step_start = Instant::now();
        let mut seen = vec![false; d];
        let mut distinct = 0;
        for &i in &alive {
            if !seen[y[i]] {
                seen[y[i]] = true;
                distinct += 1;
            }
        }
        if distinct < 2 {
            return Err(Error::DegenerateStep { step: m });
        }
        let x_step = gather_rows(x_expanded, &alive);
        let step_candidates: Vec<usize> = match config.assignment {
            AssignmentMode::Optimized => candidates.clone(),
            // the paper's default correspondence: highest remaining label
            AssignmentMode::Fixed => vec![*candidates.last().expect("non-empty")],
        };

        let evals: Vec<(f64, svm::SvmSolution, bool)> = step_candidates
            .par_iter()
            .map(|&j| evaluate_candidate(&x_step, y, &alive, j, m, config))
            .collect::<Result<Vec<_>>>()?;

        let mut best = 0;
        for i in 1..evals.len() {
            let (li, lb) = (evals[i].0, evals[best].0);
            if li < lb || (li == lb && step_candidates[i] < step_candidates[best]) {
                best = i;
            }
        }
        let chosen = step_candidates[best];
        let sol = &evals[best].1;
        let mut affine = Vec::with_capacity(sol.w.len() + 1);
        affine.push(config.scale * sol.b);
        affine.extend(sol.w.iter().map(|v| config.scale * v));
        weights.push(affine);
        outcome_to_dense[ClassAssignment::outcome_of_theta(d, m)] = chosen;

        alive.retain(|&i| y[i] != chosen);
        candidates.retain(|&c| c != chosen);
        report.total_svm_fits += step_candidates.len();
        report.steps.push(StepRecord {
            candidates: step_candidates,
            hinge_losses: evals.iter().map(|e| e.0).collect(),
            svm_converged: evals.iter().map(|e| e.2).collect(),
            chosen,
            survivors_after: alive.len(),
            seconds: step_start.elapsed().as_secs_f64(),
        });
    }

    outcome_to_dense[0] = candidates[0];
    Ok((
        SequentialFit {
            per_theta_weights: weights,
            outcome_to_dense,
        },
        report,
    ))
}

/// Fits one candidate's one-vs-rest SVM and scores its hinge loss.
fn evaluate_candidate(
    x_step: &Matrix,
    y: &[usize],
    alive: &[usize],
    candidate: usize,
    step: usize,
    config: &TrainerConfig,
) -> Result<(f64, svm::SvmSolution, bool)> {
    let binary: Vec<f64> = alive
        .iter()
        .map(|&i| if y[i] == candidate { -1.0 } else { 1.0 })
        .collect();
    let mut svm_cfg = config.svm;
    svm_cfg.seed = mix_seed(config.svm.seed, step, candidate);

    match config.ordering_eval {
        OrderingEval::Train => {
            let problem = SvmProblem::new(x_step, &binary, svm_cfg)?;
            let (sol, info) = svm::train_with_info(&problem)?;
            let yhat = svm::decision_values(&sol, x_step)?;
            let loss = svm::hinge_loss(&binary, &yhat)?;
            Ok((loss, sol, info.converged))
        }
        OrderingEval::Holdout => {
            // deterministic 1-in-5 holdout, stratified by binary label
            let mut fit_rows = Vec::new();
            let mut held_rows = Vec::new();
            let (mut seen_neg, mut seen_pos) = (0usize, 0usize);
            for (r, &b) in binary.iter().enumerate() {
                let k = if b < 0.0 {
                    seen_neg += 1;
                    seen_neg
                } else {
                    seen_pos += 1;
                    seen_pos
                };
                if k % 5 == 0 {
                    held_rows.push(r);
                } else {
                    fit_rows.push(r);
                }
            }
            if held_rows.is_empty() {
                held_rows = fit_rows.clone();
            }
            let x_fit = gather_rows(x_step, &fit_rows);
            let y_fit: Vec<f64> = fit_rows.iter().map(|&r| binary[r]).collect();
            let problem = SvmProblem::new(&x_fit, &y_fit, svm_cfg)?;
            let (sol, info) = svm::train_with_info(&problem)?;
            let x_held = gather_rows(x_step, &held_rows);
            let y_held: Vec<f64> = held_rows.iter().map(|&r| binary[r]).collect();
            let yhat = svm::decision_values(&sol, &x_held)?;
            let loss = svm::hinge_loss(&y_held, &yhat)?;
            Ok((loss, sol, info.converged))
        }
    }
}

/// Training-run descriptors carried inside the model file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMetadata {
    pub dataset: String,
    pub fingerprint: String,
    /// IDX file pairs pooled into the training set (official train+test
    /// splits pool to 2).
    pub pooled_sources: usize,
    pub n_train: usize,
    pub seed: u64,
    pub c: f64,
    pub tolerance: f64,
    pub max_epochs: usize,
    pub loss: SvmLoss,
    pub assignment_mode: AssignmentMode,
    pub ordering_eval: OrderingEval,
    pub standardize_features: bool,
    pub max_samples: Option<usize>,
    pub solver: String,
}

impl Default for ModelMetadata {
    fn default() -> Self {
        let svm = SolverConfig::default();
        ModelMetadata {
            dataset: String::new(),
            fingerprint: String::new(),
            pooled_sources: 1,
            n_train: 0,
            seed: svm.seed,
            c: svm.c,
            tolerance: svm.tolerance,
            max_epochs: svm.max_epochs,
            loss: svm.loss,
            assignment_mode: AssignmentMode::default(),
            ordering_eval: OrderingEval::default(),
            standardize_features: false,
            max_samples: None,
            solver: "dual coordinate descent (liblinear-style, regularized intercept)".into(),
        }
    }
}

/// Trained artifact: PCA transform, per-θ scaled affine functions,
/// class↔outcome assignment, and hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuditClassifierModel {
    pub schema_version: u32,
    pub d: usize,
    pub scale: f64,
    pub feature_map: FeatureMap,
    pub pca: PcaModel,
    /// Entry m−1 is the scaled affine function for θ_m (bias in slot 0).
    pub thetas: Vec<Vec<f64>>,
    pub assignment: ClassAssignment,
    pub metadata: ModelMetadata,
}

impl QuditClassifierModel {
    /// Assembles a model from a sequential fit; `label_names[dense]` maps
    /// dense training labels back to original class labels.
    pub fn assemble(
        fit: SequentialFit,
        label_names: &[i64],
        feature_map: FeatureMap,
        pca: PcaModel,
        scale: f64,
        metadata: ModelMetadata,
    ) -> Result<Self> {
        let d = fit.outcome_to_dense.len();
        if label_names.len() != d {
            return Err(Error::DimensionMismatch {
                context: "label names",
                expected: d,
                got: label_names.len(),
            });
        }
        let assignment = ClassAssignment {
            outcome_to_label: fit
                .outcome_to_dense
                .iter()
                .map(|&dense| label_names[dense])
                .collect(),
        };
        let model = QuditClassifierModel {
            schema_version: MODEL_SCHEMA_VERSION,
            d,
            scale,
            feature_map,
            pca,
            thetas: fit.per_theta_weights,
            assignment,
            metadata,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        let expected = feature_count(&self.feature_map)?;
        if self.d < 2
            || self.thetas.len() != self.d - 1
            || self.assignment.outcome_to_label.len() != self.d
        {
            return Err(Error::CorruptFile {
                reason: format!("inconsistent class count d={}", self.d),
            });
        }
        if self.scale.is_nan() || self.scale <= 0.0 {
            return Err(Error::CorruptFile {
                reason: "scale must be positive".into(),
            });
        }
        for (i, w) in self.thetas.iter().enumerate() {
            if w.len() != expected {
                return Err(Error::CorruptFile {
                    reason: format!(
                        "theta {} has {} weights, feature map implies {expected}",
                        i + 1,
                        w.len()
                    ),
                });
            }
            if !w.iter().all(|v| v.is_finite()) {
                return Err(Error::CorruptFile {
                    reason: format!("theta {} contains non-finite weights", i + 1),
                });
            }
        }
        if self.pca.k() != self.feature_map.p {
            return Err(Error::CorruptFile {
                reason: format!(
                    "PCA retains {} components but the feature map expects {}",
                    self.pca.k(),
                    self.feature_map.p
                ),
            });
        }
        self.assignment.validate()?;
        Ok(())
    }

    /// Serializes to the model-file JSON document.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::CorruptFile {
                reason: format!("not valid JSON: {e}"),
            })?;
        let version = value
            .get("schema_version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| Error::CorruptFile {
                reason: "missing schema_version".into(),
            })?;
        if version != u64::from(MODEL_SCHEMA_VERSION) {
            return Err(Error::SchemaVersionMismatch {
                expected: MODEL_SCHEMA_VERSION,
                got: version as u32,
            });
        }
        let model: QuditClassifierModel =
            serde_json::from_value(value).map_err(|e| Error::CorruptFile {
                reason: e.to_string(),
            })?;
        model.validate()?;
        Ok(model)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    /// Builds the reusable prediction context.
    pub fn predictor(&self) -> Result<Predictor<'_>> {
        Ok(Predictor {
            model: self,
            table: MonomialTable::build(&self.feature_map)?,
        })
    }
}

/// Per-θ activation values at one input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaActivation {
    pub sin: f64,
    /// cos²θ computed cancellation-free as σ(−z)·(1+σ(z)).
    pub cos_sq: f64,
}

/// Outcome probabilities relabeled through the class assignment;
/// `labels[j]` owns `probs[j]` for outcome j.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassProbabilities {
    pub labels: Vec<i64>,
    pub probs: Vec<f64>,
}

impl ClassProbabilities {
    pub fn prob_of_label(&self, label: i64) -> Option<f64> {
        self.labels
            .iter()
            .position(|&l| l == label)
            .map(|j| self.probs[j])
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Prediction context: a model plus its precomputed monomial plan.
pub struct Predictor<'m> {
    model: &'m QuditClassifierModel,
    table: MonomialTable,
}

impl Predictor<'_> {
    pub fn model(&self) -> &QuditClassifierModel {
        self.model
    }

    /// (sin θ_m, cos²θ_m) for m = 1…d−1 at a raw input row.
    pub fn predict_thetas(&self, x: &[f64]) -> Result<Vec<ThetaActivation>> {
        if x.len() != self.model.pca.input_dim {
            return Err(Error::DimensionMismatch {
                context: "predict input length",
                expected: self.model.pca.input_dim,
                got: x.len(),
            });
        }
        let scores = self.model.pca.transform_row(x);
        let expanded = self.table.expand(&scores)?;
        Ok(self
            .model
            .thetas
            .iter()
            .map(|w| {
                let z: f64 = w.iter().zip(&expanded).map(|(a, b)| a * b).sum();
                let s = sigmoid(z);
                ThetaActivation {
                    sin: s,
                    cos_sq: sigmoid(-z) * (1.0 + s),
                }
            })
            .collect())
    }

    /// Outcome probabilities relabeled through the assignment; sums to 1.
    pub fn predict_proba(&self, x: &[f64]) -> Result<ClassProbabilities> {
        let activations = self.predict_thetas(x)?;
        let probs = outcome_probs_from_activations(&activations);
        Ok(ClassProbabilities {
            labels: self.model.assignment.outcome_to_label.clone(),
            probs,
        })
    }

    /// Class label with the largest outcome probability; probability ties
    /// break to the lowest outcome index.
    pub fn predict(&self, x: &[f64]) -> Result<i64> {
        let activations = self.predict_thetas(x)?;
        let probs = outcome_probs_from_activations(&activations);
        let mut best = 0;
        for (j, &p) in probs.iter().enumerate() {
            if p > probs[best] {
                best = j;
            }
        }
        Ok(self.model.assignment.outcome_to_label[best])
    }
}

/// p_{d−m} = (∏_{k<m} sin²θ_k)·cos²θ_m for m = 1…d−1, and
/// p_0 = ∏_{k=1}^{d−1} sin²θ_k.
fn outcome_probs_from_activations(activations: &[ThetaActivation]) -> Vec<f64> {
    let d = activations.len() + 1;
    let mut probs = vec![0.0; d];
    let mut running = 1.0;
    for (idx, act) in activations.iter().enumerate() {
        let m = idx + 1;
        probs[d - m] = running * act.cos_sq;
        running *= act.sin * act.sin;
    }
    probs[0] = running;
    probs
}
