//! Acceptance suite. Each test prints one PASS/FAIL (or SKIP) line per
//! criterion; run with `--nocapture` to see them as they execute.
//!
//! The two dataset-bound criteria (MNIST and EMNIST reproduction) run
//! whenever the official IDX files are present in the dataset cache
//! directory ($QUDITRON_DATA_DIR, then ./data) and report SKIP with fetch
//! instructions otherwise; their tolerances are pinned here either way.

use quditron::data::Dataset;
use quditron::data::idx::{write_idx_images, write_idx_labels};
use quditron::data::metrics::mean_std;
use quditron::features::{FeatureMap, MonomialTable, Variant, feature_count};
use quditron::linalg::Matrix;
use quditron::pipeline::{RunConfig, load_dataset, locate_dataset_files, metrics_csv, run_cv};
use quditron::svm::{self, SolverConfig, SvmProblem};
use quditron::trainer::{
    AssignmentMode, ModelMetadata, QuditClassifierModel, TrainerConfig, fit_sequential,
};
use quditron::verify;

fn pass(criterion: &str, detail: String) {
    println!("ACCEPTANCE PASS  {criterion}: {detail}");
}

fn skip(criterion: &str, detail: String) {
    println!("ACCEPTANCE SKIP  {criterion}: {detail}");
}

#[test]
fn criterion_1_mathematical_identities() {
    let started = std::time::Instant::now();
    let results = verify::run_all();
    for check in &results {
        assert!(
            check.passed,
            "criterion 1 FAILED at {}: {}",
            check.name, check.detail
        );
    }
    let elapsed = started.elapsed().as_secs_f64();
    assert!(
        elapsed < 60.0,
        "criterion 1 FAILED: battery took {elapsed:.1}s (limit 60s)"
    );
    pass(
        "criterion 1 (mathematical identities)",
        format!("{} checks in {elapsed:.1}s", results.len()),
    );
}

#[test]
fn criterion_2_weight_count_reproduction() {
    let table = [
        (10usize, 2usize, 66usize),
        (10, 3, 286),
        (20, 3, 1771),
        (30, 3, 5456),
        (40, 3, 12341),
    ];
    for (p, l, want) in table {
        let map = FeatureMap::new(p, l, Variant::Multivariable).unwrap();
        let got = feature_count(&map).unwrap();
        assert_eq!(
            got, want,
            "criterion 2 FAILED: (p={p}, L={l}) gives {got}, published table says {want}"
        );
    }
    pass(
        "criterion 2 (weight counts)",
        "66 / 286 / 1771 / 5456 / 12341 all exact".into(),
    );
}

fn dataset_available(name: &str) -> bool {
    let dir = RunConfig::default().resolved_data_dir();
    locate_dataset_files(name, &dir).is_ok()
}

#[test]
fn criterion_3_mnist_reproduction() {
    const CRITERION: &str = "criterion 3 (MNIST desk-scale reproduction)";
    if !dataset_available("mnist") {
        skip(
            CRITERION,
            format!(
                "MNIST IDX files not found under {} — place \
                 train/t10k images+labels there (see README, `quditron prepare`) \
                 and rerun",
                RunConfig::default().resolved_data_dir().display()
            ),
        );
        return;
    }
    // (k=10, L=2) within ±2.0 of 90.36; (k=20, L=1) within ±2.0 of 85.50
    for (k, l, published) in [(10usize, 2usize, 90.36f64), (20, 1, 85.50)] {
        let config = RunConfig {
            dataset: "mnist".into(),
            components: vec![k],
            neurons: vec![l],
            folds: 10,
            seed: 42,
            ..RunConfig::default()
        };
        let dataset = load_dataset(&config).expect("MNIST loads");
        assert_eq!(dataset.n(), 70_000, "pooled MNIST must hold 70k images");
        let summary = run_cv(&dataset, &config).expect("cv runs");
        let mean = summary.rows[0].mean_accuracy_pct;
        assert!(
            (mean - published).abs() <= 2.0,
            "criterion 3 FAILED: (k={k}, L={l}) mean accuracy {mean:.2}% \
             outside {published}±2.0"
        );
        pass(
            CRITERION,
            format!(
                "(k={k}, L={l}) mean {:.2}% (std {:.2}) vs published {published} ±2.0",
                mean, summary.rows[0].std_accuracy_pct
            ),
        );
    }
}

#[test]
fn criterion_4_emnist_digits_spot_check() {
    const CRITERION: &str = "criterion 4 (EMNIST Digits spot check)";
    if !dataset_available("emnist-digits") {
        skip(
            CRITERION,
            format!(
                "EMNIST Digits IDX files not found under {} — conditional \
                 criterion, runs when the files are present",
                RunConfig::default().resolved_data_dir().display()
            ),
        );
        return;
    }
    let config = RunConfig {
        dataset: "emnist-digits".into(),
        components: vec![10],
        neurons: vec![1],
        folds: 10,
        seed: 42,
        max_samples: Some(50_000),
        ..RunConfig::default()
    };
    let dataset = load_dataset(&config).expect("EMNIST Digits loads");
    let summary = run_cv(&dataset, &config).expect("cv runs");
    let mean = summary.rows[0].mean_accuracy_pct;
    assert!(
        (mean - 82.13).abs() <= 2.5,
        "criterion 4 FAILED: (k=10, L=1) mean accuracy {mean:.2}% outside 82.13±2.5"
    );
    assert_eq!(summary.max_samples, Some(50_000));
    pass(
        CRITERION,
        format!(
            "(k=10, L=1) mean {:.2}% (std {:.2}) vs published 82.13 ±2.5, \
             max_samples=50000 recorded",
            mean, summary.rows[0].std_accuracy_pct
        ),
    );
}

/// Five well-separated Gaussian-ish blobs in the plane, expanded at L=1.
fn five_class_fixture() -> (Matrix, Vec<usize>, FeatureMap) {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut state = 0xfeed_beefu64;
    let mut jitter = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state % 2000) as f64 / 1000.0 - 1.0
    };
    for c in 0..5usize {
        let angle = c as f64 * std::f64::consts::TAU / 5.0;
        for _ in 0..30 {
            rows.push(vec![
                12.0 * angle.cos() + 0.1 * jitter(),
                12.0 * angle.sin() + 0.1 * jitter(),
            ]);
            labels.push(c);
        }
    }
    let map = FeatureMap::new(2, 1, Variant::Multivariable).unwrap();
    let table = MonomialTable::build(&map).unwrap();
    let x = table.expand_batch(&Matrix::from_rows(&rows)).unwrap();
    (x, labels, map)
}

#[test]
fn criterion_5_trainer_structure() {
    let (x, labels, map) = five_class_fixture();

    let optimized = TrainerConfig::default();
    let (fit, report) = fit_sequential(&x, &labels, 5, &optimized).unwrap();
    assert_eq!(
        report.total_svm_fits, 14,
        "criterion 5 FAILED: optimized assignment made {} fits, expected 5+4+3+2 = 14",
        report.total_svm_fits
    );

    let label_names: Vec<i64> = (0..5).collect();
    let model = QuditClassifierModel::assemble(
        fit,
        &label_names,
        map,
        quditron::data::pca::PcaModel::identity(2),
        optimized.scale,
        ModelMetadata::default(),
    )
    .unwrap();
    let predictor = model.predictor().unwrap();
    // training accuracy over the raw (pre-expansion) inputs
    let raw: Vec<Vec<f64>> = (0..x.rows()).map(|i| x.row(i)[1..3].to_vec()).collect();
    let correct = raw
        .iter()
        .zip(&labels)
        .filter(|&(r, &l)| predictor.predict(r).unwrap() == l as i64)
        .count();
    assert_eq!(
        correct,
        labels.len(),
        "criterion 5 FAILED: training accuracy {}/{} below 100%",
        correct,
        labels.len()
    );

    let fixed = TrainerConfig {
        assignment: AssignmentMode::Fixed,
        ..TrainerConfig::default()
    };
    let (_, fixed_report) = fit_sequential(&x, &labels, 5, &fixed).unwrap();
    assert_eq!(
        fixed_report.total_svm_fits, 4,
        "criterion 5 FAILED: fixed assignment made {} fits, expected 4",
        fixed_report.total_svm_fits
    );
    pass(
        "criterion 5 (trainer structure)",
        "14 fits optimized, 4 fixed, 150/150 training accuracy".into(),
    );
}

fn fixture_dataset() -> Dataset {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let config = RunConfig {
        dataset: "digits8x8".into(),
        images: vec![dir.join("digits8x8-images-idx3-ubyte.gz")],
        labels: vec![dir.join("digits8x8-labels-idx1-ubyte.gz")],
        ..RunConfig::default()
    };
    load_dataset(&config).expect("bundled fixture loads")
}

fn strip_timing(csv: &str) -> String {
    csv.lines()
        .map(|line| {
            let cut = line.rfind(',').unwrap_or(line.len());
            &line[..cut]
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn criterion_6_determinism() {
    let dataset = fixture_dataset();
    let config = RunConfig {
        dataset: "digits8x8".into(),
        components: vec![6],
        neurons: vec![1],
        folds: 3,
        seed: 2024,
        ..RunConfig::default()
    };
    let a = run_cv(&dataset, &config).unwrap();
    let b = run_cv(&dataset, &config).unwrap();
    let csv_a = strip_timing(&metrics_csv(&a));
    let csv_b = strip_timing(&metrics_csv(&b));
    assert_eq!(
        csv_a, csv_b,
        "criterion 6 FAILED: metrics CSV differs between identical runs"
    );

    let rows: Vec<usize> = (0..dataset.n()).collect();
    let (model_a, _) = quditron::pipeline::fit_rows(&dataset, &rows, 6, 1, &config).unwrap();
    let (model_b, _) = quditron::pipeline::fit_rows(&dataset, &rows, 6, 1, &config).unwrap();
    let json_a = model_a.to_json().unwrap();
    let json_b = model_b.to_json().unwrap();
    assert_eq!(
        json_a.into_bytes(),
        json_b.into_bytes(),
        "criterion 6 FAILED: model files differ between identical runs"
    );
    pass(
        "criterion 6 (determinism)",
        "CSV (timing stripped) and model JSON byte-identical across reruns".into(),
    );
}

/// Accelerated projected gradient on the dual box QP; independent of the
/// coordinate-descent implementation path. Runs to numerical optimality
/// with a 10⁶ iteration cap.
fn dual_oracle(x: &Matrix, y: &[f64], c: f64) -> Vec<f64> {
    let n = x.rows();
    let q: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    y[i] * y[j]
                        * x.row(i)
                            .iter()
                            .zip(x.row(j))
                            .map(|(a, b)| a * b)
                            .sum::<f64>()
                })
                .collect()
        })
        .collect();
    // power iteration for the Lipschitz constant
    let mut v = vec![1.0; n];
    let mut lam = 1.0;
    for _ in 0..200 {
        let mut next = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                next[i] += q[i][j] * v[j];
            }
        }
        lam = next.iter().map(|a| a * a).sum::<f64>().sqrt();
        if lam == 0.0 {
            break;
        }
        for e in &mut next {
            *e /= lam;
        }
        v = next;
    }
    let step = 1.0 / (lam * 1.01 + 1e-12);

    let project = |a: f64| a.clamp(0.0, c);
    let grad_at = |point: &[f64]| -> Vec<f64> {
        let mut g = vec![-1.0; n];
        for i in 0..n {
            for j in 0..n {
                g[i] += q[i][j] * point[j];
            }
        }
        g
    };
    let mut alpha = vec![0.0; n];
    let mut momentum = alpha.clone();
    let mut t = 1.0f64;
    for iter in 0..1_000_000usize {
        let grad = grad_at(&momentum);
        let next: Vec<f64> = momentum
            .iter()
            .zip(&grad)
            .map(|(a, g)| project(a - step * g))
            .collect();
        // adaptive restart keeps the momentum from overshooting a face
        let uphill: f64 = grad
            .iter()
            .zip(next.iter().zip(&alpha))
            .map(|(g, (nw, old))| g * (nw - old))
            .sum();
        if uphill > 0.0 {
            t = 1.0;
            momentum = alpha.clone();
            continue;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let coef = (t - 1.0) / t_next;
        momentum = next
            .iter()
            .zip(&alpha)
            .map(|(nw, old)| nw + coef * (nw - old))
            .collect();
        alpha = next;
        t = t_next;
        if iter % 64 == 0 {
            let pg = grad_at(&alpha)
                .iter()
                .zip(&alpha)
                .map(|(g, a)| (a - project(a - step * g)).abs())
                .fold(0.0f64, f64::max);
            if pg < 1e-12 {
                break;
            }
        }
    }
    alpha
}

fn dual_primal_objective(x: &Matrix, y: &[f64], c: f64, alpha: &[f64]) -> f64 {
    let m = x.cols();
    let mut w = vec![0.0; m];
    for (i, &a) in alpha.iter().enumerate() {
        for (wj, &xj) in w.iter_mut().zip(x.row(i)) {
            *wj += a * y[i] * xj;
        }
    }
    let reg = 0.5 * w.iter().map(|v| v * v).sum::<f64>();
    let loss: f64 = (0..x.rows())
        .map(|i| {
            let margin: f64 = 1.0 - y[i] * w.iter().zip(x.row(i)).map(|(a, b)| a * b).sum::<f64>();
            c * margin.max(0.0)
        })
        .sum();
    reg + loss
}

#[test]
fn criterion_7_svm_solver_correctness() {
    // two-point KKT example first
    let x = Matrix::from_rows(&[vec![1.0, -1.0], vec![1.0, 1.0]]);
    let y = [-1.0, 1.0];
    let cfg = SolverConfig {
        c: 10.0,
        tolerance: 1e-8,
        max_epochs: 100_000,
        ..SolverConfig::default()
    };
    let sol = svm::train(&SvmProblem::new(&x, &y, cfg).unwrap()).unwrap();
    assert!(
        (sol.w[0] - 1.0).abs() < 1e-3 && sol.b.abs() < 1e-3,
        "criterion 7 FAILED: two-point solution w={:?} b={} not (1, 0)",
        sol.w,
        sol.b
    );

    let mut state = 0x5eedu64;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state % 100_000) as f64 / 50_000.0 - 1.0
    };
    let mut worst_rel = 0.0f64;
    for trial in 0..50 {
        let n = 30;
        let c = [0.25, 1.0, 4.0][trial % 3];
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let mut r = vec![1.0];
                r.extend((0..5).map(|_| next()));
                r
            })
            .collect();
        let x = Matrix::from_rows(&rows);
        // labels correlated with a random direction plus noise
        let dir: Vec<f64> = (0..5).map(|_| next()).collect();
        let y: Vec<f64> = rows
            .iter()
            .map(|r| {
                let score: f64 = r[1..].iter().zip(&dir).map(|(a, b)| a * b).sum();
                if score + 0.3 * next() >= 0.0 {
                    1.0
                } else {
                    -1.0
                }
            })
            .collect();
        if !y.contains(&1.0) || !y.contains(&-1.0) {
            continue;
        }
        let cfg = SolverConfig {
            c,
            tolerance: 1e-10,
            max_epochs: 200_000,
            seed: trial as u64,
            ..SolverConfig::default()
        };
        let sol = svm::train(&SvmProblem::new(&x, &y, cfg).unwrap()).unwrap();
        let solver_obj = svm::primal_objective(&sol, &x, &y, &cfg);
        let alpha = dual_oracle(&x, &y, c);
        let oracle_obj = dual_primal_objective(&x, &y, c, &alpha);
        let rel = (solver_obj - oracle_obj).abs() / oracle_obj.abs().max(1.0);
        worst_rel = worst_rel.max(rel);
        assert!(
            rel <= 1e-4,
            "criterion 7 FAILED at trial {trial}: solver {solver_obj:.8} vs oracle \
             {oracle_obj:.8} (relative {rel:.2e} > 1e-4)"
        );
    }
    pass(
        "criterion 7 (SVM solver correctness)",
        format!(
            "two-point KKT exact; worst relative objective gap {worst_rel:.2e} over 50 problems"
        ),
    );
}

#[test]
fn bundled_digits_pipeline_accuracy() {
    // real handwritten data exercising the identical pipeline end to end
    let dataset = fixture_dataset();
    assert_eq!(dataset.n(), 1797);
    assert_eq!(dataset.class_count(), 10);
    let config = RunConfig {
        dataset: "digits8x8".into(),
        components: vec![10],
        neurons: vec![2],
        folds: 10,
        seed: 42,
        ..RunConfig::default()
    };
    let summary = run_cv(&dataset, &config).unwrap();
    let (mean, _) = mean_std(&summary.rows[0].fold_accuracies_pct);
    assert!(
        mean >= 92.0,
        "bundled digits CV accuracy {mean:.2}% fell below the 92% floor"
    );
    pass(
        "bundled 8x8 digits end-to-end",
        format!("10-fold CV at (k=10, L=2): {mean:.2}%"),
    );
}

#[test]
fn idx_writer_roundtrip_means_fixture_is_wellformed() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let img = std::fs::read(dir.join("digits8x8-images-idx3-ubyte.gz")).unwrap();
    let lab = std::fs::read(dir.join("digits8x8-labels-idx1-ubyte.gz")).unwrap();
    let raw = quditron::data::RawImageSet::from_bytes(&img, &lab).unwrap();
    assert_eq!((raw.rows, raw.cols), (8, 8));
    let (img2, lab2) = raw.to_idx_bytes();
    let again = quditron::data::RawImageSet::from_bytes(&img2, &lab2).unwrap();
    assert_eq!(raw, again);
    let _ = write_idx_images(1, 1, 1, &[0]);
    let _ = write_idx_labels(&[0]);
}
