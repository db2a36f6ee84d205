//! End-to-end runs: dataset resolution, per-fold training, cross-validation
//! sweeps, and metrics emission.
//!
//! PCA is fitted per training fold (never on held-out rows), features are
//! expanded over the PCA scores, and the sequential trainer produces one
//! model per fold. Fold work is independent and runs in parallel; outputs
//! are collected in fold order so results do not depend on the job count.

use crate::data::kfold::stratified_kfold;
use crate::data::metrics::{EvalMetrics, evaluate, mean_std};
use crate::data::pca::{pca_fit_rows, pca_transform_rows};
use crate::data::{Dataset, RawImageSet};
use crate::error::{Error, Result};
use crate::features::{FeatureMap, MonomialTable, Variant, feature_count};
use crate::linalg::Matrix;
use crate::svm::{SolverConfig, SvmLoss};
use crate::trainer::{
    AssignmentMode, ModelMetadata, OrderingEval, QuditClassifierModel, TrainReport, TrainerConfig,
    fit_sequential,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Environment variable naming the dataset cache directory.
pub const DATA_DIR_ENV: &str = "QUDITRON_DATA_DIR";

/// Full description of a run; every field maps to a CLI flag of the same
/// name and the whole struct round-trips through its JSON file form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Dataset name: `mnist`, `emnist-digits`, `emnist-letters`,
    /// `emnist-balanced`, `emnist-mnist`, or free-form when explicit image
    /// and label paths are given.
    pub dataset: String,
    /// Explicit IDX image files (pooled in order); overrides name lookup.
    pub images: Vec<PathBuf>,
    /// Label files parallel to `images`.
    pub labels: Vec<PathBuf>,
    pub data_dir: Option<PathBuf>,
    /// PCA component sweep.
    pub components: Vec<usize>,
    /// Neuron-count (polynomial degree) sweep.
    pub neurons: Vec<usize>,
    pub variant: Variant,
    pub c: f64,
    pub tolerance: f64,
    pub max_epochs: usize,
    pub loss: SvmLoss,
    pub scale: f64,
    pub folds: usize,
    pub seed: u64,
    pub assignment: AssignmentMode,
    pub ordering_eval: OrderingEval,
    pub standardize_features: bool,
    pub max_samples: Option<usize>,
    pub jobs: Option<usize>,
    pub out_csv: Option<PathBuf>,
    pub out_json: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let svm = SolverConfig::default();
        RunConfig {
            dataset: "mnist".into(),
            images: Vec::new(),
            labels: Vec::new(),
            data_dir: None,
            components: vec![10],
            neurons: vec![2],
            variant: Variant::Multivariable,
            c: svm.c,
            tolerance: svm.tolerance,
            max_epochs: svm.max_epochs,
            loss: SvmLoss::Hinge,
            scale: 100.0,
            folds: 10,
            seed: 42,
            assignment: AssignmentMode::Optimized,
            ordering_eval: OrderingEval::Train,
            standardize_features: false,
            max_samples: None,
            jobs: None,
            out_csv: None,
            out_json: None,
        }
    }
}

impl RunConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn trainer_config(&self) -> TrainerConfig {
        TrainerConfig {
            svm: SolverConfig {
                c: self.c,
                tolerance: self.tolerance,
                max_epochs: self.max_epochs,
                seed: self.seed,
                loss: self.loss,
                class_weights: None,
            },
            scale: self.scale,
            assignment: self.assignment,
            ordering_eval: self.ordering_eval,
        }
    }

    pub fn resolved_data_dir(&self) -> PathBuf {
        self.data_dir
            .clone()
            .or_else(|| std::env::var_os(DATA_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("data"))
    }
}

/// Standard IDX file stems for the named datasets; each pair is
/// (images, labels) and every stem is also tried with a `.gz` suffix.
pub fn standard_file_stems(dataset: &str) -> Option<Vec<(String, String)>> {
    let mnist_like = |prefix: &str| {
        vec![
            (
                format!("{prefix}train-images-idx3-ubyte"),
                format!("{prefix}train-labels-idx1-ubyte"),
            ),
            (
                format!("{prefix}t10k-images-idx3-ubyte"),
                format!("{prefix}t10k-labels-idx1-ubyte"),
            ),
        ]
    };
    match dataset {
        "mnist" => Some(mnist_like("")),
        name if name.starts_with("emnist-") => {
            let subset = &name["emnist-".len()..];
            Some(vec![
                (
                    format!("emnist-{subset}-train-images-idx3-ubyte"),
                    format!("emnist-{subset}-train-labels-idx1-ubyte"),
                ),
                (
                    format!("emnist-{subset}-test-images-idx3-ubyte"),
                    format!("emnist-{subset}-test-labels-idx1-ubyte"),
                ),
            ])
        }
        _ => None,
    }
}

fn find_with_gz(dir: &Path, stem: &str) -> Option<PathBuf> {
    for candidate in [format!("{stem}.gz"), stem.to_string()] {
        let path = dir.join(&candidate);
        if path.is_file() {
            return Some(path);
        }
    }
    None
}

/// Locates the IDX file pairs for a named dataset in the cache directory.
pub fn locate_dataset_files(dataset: &str, dir: &Path) -> Result<Vec<(PathBuf, PathBuf)>> {
    let stems = standard_file_stems(dataset).ok_or_else(|| Error::InvalidConfig {
        reason: format!(
            "unknown dataset `{dataset}`; pass explicit --images/--labels or use \
             mnist / emnist-<subset>"
        ),
    })?;
    let mut pairs = Vec::new();
    for (img, lab) in stems {
        let img_path = find_with_gz(dir, &img).ok_or_else(|| Error::InvalidConfig {
            reason: format!("missing dataset file {img}[.gz] under {}", dir.display()),
        })?;
        let lab_path = find_with_gz(dir, &lab).ok_or_else(|| Error::InvalidConfig {
            reason: format!("missing dataset file {lab}[.gz] under {}", dir.display()),
        })?;
        pairs.push((img_path, lab_path));
    }
    Ok(pairs)
}

/// Loads the configured dataset: explicit file pairs when given, otherwise
/// the official train+test pair pooled from the cache directory.
pub fn load_dataset(config: &RunConfig) -> Result<Dataset> {
    let pairs: Vec<(PathBuf, PathBuf)> = if !config.images.is_empty() {
        if config.images.len() != config.labels.len() {
            return Err(Error::InvalidConfig {
                reason: format!(
                    "{} image files but {} label files",
                    config.images.len(),
                    config.labels.len()
                ),
            });
        }
        config
            .images
            .iter()
            .cloned()
            .zip(config.labels.iter().cloned())
            .collect()
    } else {
        locate_dataset_files(&config.dataset, &config.resolved_data_dir())?
    };

    let mut pooled: Option<RawImageSet> = None;
    for (img, lab) in &pairs {
        let part = RawImageSet::from_files(img, lab)?;
        match pooled.as_mut() {
            None => pooled = Some(part),
            Some(base) => base.extend(part)?,
        }
    }
    let raw = pooled.ok_or_else(|| Error::InvalidConfig {
        reason: "no dataset files configured".into(),
    })?;
    let mut dataset = Dataset::from_raw(&raw, &config.dataset)?;
    dataset.pooled_sources = pairs.len();
    if let Some(max) = config.max_samples {
        dataset = dataset.subsample(max, config.seed);
    }
    Ok(dataset)
}

/// A fold's trained model plus its held-out evaluation.
pub struct FoldResult {
    pub fold: usize,
    pub metrics: EvalMetrics,
    pub seconds: f64,
}

/// Trains on a row subset and returns the assembled model.
pub fn fit_rows(
    dataset: &Dataset,
    rows: &[usize],
    k: usize,
    l: usize,
    config: &RunConfig,
) -> Result<(QuditClassifierModel, TrainReport)> {
    let d = dataset.class_count();
    let (pca, _) = pca_fit_rows(&dataset.x, rows, k)?;
    let scores = pca_transform_rows(&pca, &dataset.x, rows)?;
    let map = FeatureMap::new(k, l, config.variant)?;
    let table = MonomialTable::build(&map)?;
    let mut expanded = table.expand_batch(&scores)?;

    let standardization = if config.standardize_features {
        Some(standardize_columns(&mut expanded))
    } else {
        None
    };

    let y_rows: Vec<usize> = rows.iter().map(|&i| dataset.y[i]).collect();
    let trainer_cfg = config.trainer_config();
    let (mut fit, report) = fit_sequential(&expanded, &y_rows, d, &trainer_cfg)?;

    if let Some((mu, sigma)) = standardization {
        for theta in &mut fit.per_theta_weights {
            absorb_standardization(theta, &mu, &sigma);
        }
    }

    let metadata = ModelMetadata {
        dataset: dataset.name.clone(),
        fingerprint: dataset.fingerprint.clone(),
        pooled_sources: dataset.pooled_sources,
        n_train: rows.len(),
        seed: config.seed,
        c: config.c,
        tolerance: config.tolerance,
        max_epochs: config.max_epochs,
        loss: config.loss,
        assignment_mode: config.assignment,
        ordering_eval: config.ordering_eval,
        standardize_features: config.standardize_features,
        max_samples: config.max_samples,
        ..ModelMetadata::default()
    };
    let model = QuditClassifierModel::assemble(
        fit,
        &dataset.label_names,
        map,
        pca,
        config.scale,
        metadata,
    )?;
    Ok((model, report))
}

/// Column means and standard deviations of the expanded block (constant
/// column untouched), applied in place.
fn standardize_columns(x: &mut Matrix) -> (Vec<f64>, Vec<f64>) {
    let (n, m) = (x.rows(), x.cols());
    let mut mu = vec![0.0; m];
    let mut sigma = vec![1.0; m];
    for j in 1..m {
        let mut acc = 0.0;
        for i in 0..n {
            acc += x[(i, j)];
        }
        mu[j] = acc / n as f64;
    }
    for j in 1..m {
        let mut acc = 0.0;
        for i in 0..n {
            let dev = x[(i, j)] - mu[j];
            acc += dev * dev;
        }
        let sd = (acc / (n.max(2) - 1) as f64).sqrt();
        sigma[j] = if sd > 1e-12 { sd } else { 1.0 };
    }
    for i in 0..n {
        let row = x.row_mut(i);
        for j in 1..m {
            row[j] = (row[j] - mu[j]) / sigma[j];
        }
    }
    (mu, sigma)
}

/// Folds the standardization affine into a stored weight vector so models
/// always act on raw expanded features.
fn absorb_standardization(theta: &mut [f64], mu: &[f64], sigma: &[f64]) {
    let mut bias_shift = 0.0;
    for j in 1..theta.len() {
        theta[j] /= sigma[j];
        bias_shift += theta[j] * mu[j];
    }
    theta[0] -= bias_shift;
}

/// Predicts a raw-pixel row subset and scores it.
pub fn evaluate_rows(
    model: &QuditClassifierModel,
    dataset: &Dataset,
    rows: &[usize],
) -> Result<EvalMetrics> {
    if rows.is_empty() {
        return Err(Error::EmptySplit);
    }
    let predictor = model.predictor()?;
    let y_pred: Vec<i64> = rows
        .par_iter()
        .map(|&i| predictor.predict(dataset.x.row(i)))
        .collect::<Result<Vec<_>>>()?;
    let y_true: Vec<i64> = rows
        .iter()
        .map(|&i| dataset.label_names[dataset.y[i]])
        .collect();
    evaluate(&dataset.label_names, &y_true, &y_pred)
}

/// One sweep cell: K-fold cross-validation at a single (components,
/// neurons) setting.
pub fn run_cv_cell(
    dataset: &Dataset,
    k: usize,
    l: usize,
    config: &RunConfig,
) -> Result<Vec<FoldResult>> {
    let plan = stratified_kfold(&dataset.y, config.folds, config.seed)?;
    (0..config.folds)
        .into_par_iter()
        .map(|fold| {
            let started = Instant::now();
            let (train_rows, test_rows) = plan.split(fold);
            let (model, _) = fit_rows(dataset, &train_rows, k, l, config)?;
            let metrics = evaluate_rows(&model, dataset, &test_rows)?;
            Ok(FoldResult {
                fold,
                metrics,
                seconds: started.elapsed().as_secs_f64(),
            })
        })
        .collect()
}

/// Summary of one (components, neurons) setting across folds, in the
/// accuracy-percent convention of the result tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub components: usize,
    pub neurons: usize,
    pub weights: usize,
    pub mean_accuracy_pct: f64,
    pub std_accuracy_pct: f64,
    pub fold_accuracies_pct: Vec<f64>,
    pub total_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvSummary {
    pub dataset: String,
    pub n_samples: usize,
    pub classes: usize,
    pub folds: usize,
    pub seed: u64,
    pub variant: Variant,
    pub max_samples: Option<usize>,
    pub pooled_sources: usize,
    pub rows: Vec<SweepRow>,
}

/// Runs the full sweep over `components × neurons`.
pub fn run_cv(dataset: &Dataset, config: &RunConfig) -> Result<CvSummary> {
    if config.components.is_empty() || config.neurons.is_empty() {
        return Err(Error::InvalidConfig {
            reason: "components and neurons sweeps must be non-empty".into(),
        });
    }
    let mut rows = Vec::new();
    for &k in &config.components {
        for &l in &config.neurons {
            let map = FeatureMap::new(k, l, config.variant)?;
            let weights = feature_count(&map)?;
            let folds = run_cv_cell(dataset, k, l, config)?;
            let accs: Vec<f64> = folds.iter().map(|f| f.metrics.accuracy * 100.0).collect();
            let (mean, std) = mean_std(&accs);
            rows.push(SweepRow {
                components: k,
                neurons: l,
                weights,
                mean_accuracy_pct: mean,
                std_accuracy_pct: std,
                fold_accuracies_pct: accs,
                total_seconds: folds.iter().map(|f| f.seconds).sum(),
            });
        }
    }
    Ok(CvSummary {
        dataset: dataset.name.clone(),
        n_samples: dataset.n(),
        classes: dataset.class_count(),
        folds: config.folds,
        seed: config.seed,
        variant: config.variant,
        max_samples: config.max_samples,
        pooled_sources: dataset.pooled_sources,
        rows,
    })
}

/// Per-fold metrics CSV. The timing column is last so comparisons can
/// strip it; everything before it is deterministic for a fixed seed.
pub fn metrics_csv(summary: &CvSummary) -> String {
    let mut out = String::from("dataset,components,neurons,fold,accuracy,seconds\n");
    for row in &summary.rows {
        let per_fold_seconds = row.total_seconds / row.fold_accuracies_pct.len().max(1) as f64;
        for (fold, acc) in row.fold_accuracies_pct.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{},{:.3}\n",
                summary.dataset, row.components, row.neurons, fold, acc, per_fold_seconds
            ));
        }
    }
    out
}

/// Console table mirroring the published result rows.
pub fn format_summary_table(summary: &CvSummary) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "dataset {} — {} samples, {} classes, {}-fold CV, seed {}\n",
        summary.dataset, summary.n_samples, summary.classes, summary.folds, summary.seed
    ));
    out.push_str("components  neurons  weights   accuracy (%)      time (s)\n");
    for row in &summary.rows {
        out.push_str(&format!(
            "{:>10}  {:>7}  {:>7}   {:>6.2} ({:.2})     {:>9.2}\n",
            row.components,
            row.neurons,
            row.weights,
            row.mean_accuracy_pct,
            row.std_accuracy_pct,
            row.total_seconds
        ));
    }
    out
}

pub fn write_outputs(summary: &CvSummary, config: &RunConfig) -> Result<()> {
    if let Some(path) = &config.out_csv {
        std::fs::write(path, metrics_csv(summary))?;
    }
    if let Some(path) = &config.out_json {
        std::fs::write(path, serde_json::to_string_pretty(summary)?)?;
    }
    Ok(())
}
