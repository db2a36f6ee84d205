//! Command-line surface for the qudit classifier pipeline.

use clap::{Args, Parser, Subcommand};
use quditron::data::{RawImageSet, idx};
use quditron::error::{Error, Result};
use quditron::pipeline::{
    self, CvSummary, DATA_DIR_ENV, RunConfig, format_summary_table, load_dataset,
    locate_dataset_files, run_cv, standard_file_stems,
};
use quditron::qubit;
use quditron::qudit::{ThetaVector, outcome_probabilities};
use quditron::trainer::QuditClassifierModel;
use quditron::verify;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "quditron",
    version,
    about = "Single-qudit neural network classifier: train, cross-validate, verify"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check dataset files in the cache directory (optionally fetching them)
    Prepare(PrepareArgs),
    /// Train a model on a full dataset and write the model JSON
    Train(TrainArgs),
    /// Predict labels for an IDX image file using a trained model
    Predict(PredictArgs),
    /// K-fold cross-validation sweep over components × neurons
    Cv(CvArgs),
    /// Run the mathematical self-check battery
    Verify,
    /// Compile a parameter vector to the qubit circuit and simulate it
    SimulateCircuit(SimulateArgs),
    /// Render a saved cross-validation summary as a console table
    Report(ReportArgs),
}

/// Flags mirroring the run-config fields; unset flags fall back to the
/// config file (when given) and then to defaults.
#[derive(Args, Clone)]
struct ConfigArgs {
    /// JSON run-config file; every flag below overrides its field
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dataset name: mnist, emnist-digits, emnist-letters, emnist-balanced, emnist-mnist, …
    #[arg(long)]
    dataset: Option<String>,
    /// Explicit IDX image file(s), pooled in order (overrides --dataset lookup)
    #[arg(long)]
    images: Vec<PathBuf>,
    /// Label files parallel to --images
    #[arg(long)]
    labels: Vec<PathBuf>,
    /// Dataset cache directory (default: $QUDITRON_DATA_DIR, then ./data)
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// PCA components sweep, comma separated (e.g. 10,20,30)
    #[arg(long, value_delimiter = ',')]
    components: Vec<usize>,
    /// Neuron counts (polynomial degree) sweep, comma separated
    #[arg(long, value_delimiter = ',')]
    neurons: Vec<usize>,
    /// Feature variant: multivariable | univariate_powers
    #[arg(long)]
    variant: Option<String>,
    /// SVM regularization trade-off
    #[arg(long)]
    c: Option<f64>,
    /// SVM stopping tolerance
    #[arg(long)]
    tolerance: Option<f64>,
    /// SVM epoch cap
    #[arg(long)]
    max_epochs: Option<usize>,
    /// SVM loss: hinge | squared_hinge
    #[arg(long)]
    loss: Option<String>,
    /// Weight rescaling factor that saturates the sigmoid
    #[arg(long)]
    scale: Option<f64>,
    /// Cross-validation fold count
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Class-to-outcome assignment: optimized | fixed
    #[arg(long)]
    assignment: Option<String>,
    /// Hinge-loss scoring split: train | holdout
    #[arg(long)]
    ordering_eval: Option<String>,
    /// Standardize expanded features on the training split (true/false)
    #[arg(long)]
    standardize_features: Option<bool>,
    /// Cap on pooled samples (stratified subsample, recorded in metadata)
    #[arg(long)]
    max_samples: Option<usize>,
    /// Worker threads (results are identical for any value)
    #[arg(long)]
    jobs: Option<usize>,
    /// Per-fold metrics CSV path
    #[arg(long)]
    out_csv: Option<PathBuf>,
    /// Summary JSON path
    #[arg(long)]
    out_json: Option<PathBuf>,
}

impl ConfigArgs {
    fn merge(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_json_file(path)?,
            None => RunConfig::default(),
        };
        if let Some(v) = &self.dataset {
            cfg.dataset = v.clone();
        }
        if !self.images.is_empty() {
            cfg.images = self.images.clone();
        }
        if !self.labels.is_empty() {
            cfg.labels = self.labels.clone();
        }
        if let Some(v) = &self.data_dir {
            cfg.data_dir = Some(v.clone());
        }
        if !self.components.is_empty() {
            cfg.components = self.components.clone();
        }
        if !self.neurons.is_empty() {
            cfg.neurons = self.neurons.clone();
        }
        if let Some(v) = &self.variant {
            cfg.variant = v.parse()?;
        }
        if let Some(v) = self.c {
            cfg.c = v;
        }
        if let Some(v) = self.tolerance {
            cfg.tolerance = v;
        }
        if let Some(v) = self.max_epochs {
            cfg.max_epochs = v;
        }
        if let Some(v) = &self.loss {
            cfg.loss = match v.as_str() {
                "hinge" => quditron::svm::SvmLoss::Hinge,
                "squared_hinge" | "squared-hinge" => quditron::svm::SvmLoss::SquaredHinge,
                other => {
                    return Err(Error::InvalidConfig {
                        reason: format!("unknown loss `{other}`"),
                    });
                }
            };
        }
        if let Some(v) = self.scale {
            cfg.scale = v;
        }
        if let Some(v) = self.folds {
            cfg.folds = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = &self.assignment {
            cfg.assignment = v.parse()?;
        }
        if let Some(v) = &self.ordering_eval {
            cfg.ordering_eval = v.parse()?;
        }
        if let Some(v) = self.standardize_features {
            cfg.standardize_features = v;
        }
        if let Some(v) = self.max_samples {
            cfg.max_samples = Some(v);
        }
        if let Some(v) = self.jobs {
            cfg.jobs = Some(v);
        }
        if let Some(v) = &self.out_csv {
            cfg.out_csv = Some(v.clone());
        }
        if let Some(v) = &self.out_json {
            cfg.out_json = Some(v.clone());
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct PrepareArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Base URL to download the standard dataset files from (appends the
    /// IDX file names; needs curl or wget on PATH)
    #[arg(long)]
    fetch_url: Option<String>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Model JSON output path
    #[arg(long, short)]
    output: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    /// Trained model JSON
    #[arg(long, short)]
    model: PathBuf,
    /// IDX image file (gzip accepted) with rows to classify
    #[arg(long, short)]
    input: PathBuf,
    /// Also print per-class probabilities
    #[arg(long)]
    proba: bool,
    /// Write predictions here instead of stdout
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CvArgs {
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct SimulateArgs {
    /// Qudit dimension d (2..=24)
    #[arg(long, short)]
    dimension: usize,
    /// θ₁…θ_{d−1} in radians, comma separated
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    theta: Vec<f64>,
    /// Draw the angles from a seeded uniform (0, π) instead
    #[arg(long)]
    random_seed: Option<u64>,
    /// Dump the compiled circuit as a JSON gate list
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Summary JSON produced by `cv`
    #[arg(long, short)]
    input: PathBuf,
}

fn init_jobs(jobs: Option<usize>) {
    if let Some(n) = jobs {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

fn cmd_prepare(args: &PrepareArgs) -> Result<()> {
    let cfg = args.config.merge()?;
    let dir = cfg.resolved_data_dir();

    if let Some(base) = &args.fetch_url {
        std::fs::create_dir_all(&dir)?;
        let stems = standard_file_stems(&cfg.dataset).ok_or_else(|| Error::InvalidConfig {
            reason: format!(
                "--fetch-url needs a known dataset name, got `{}`",
                cfg.dataset
            ),
        })?;
        for (img, lab) in &stems {
            for stem in [img, lab] {
                let name = format!("{stem}.gz");
                let target = dir.join(&name);
                if target.is_file() {
                    println!("already cached: {}", target.display());
                    continue;
                }
                let url = format!("{}/{}", base.trim_end_matches('/'), name);
                println!("fetching {url}");
                fetch(&url, &target)?;
            }
        }
    }

    let pairs = if cfg.images.is_empty() {
        locate_dataset_files(&cfg.dataset, &dir)?
    } else {
        cfg.images
            .iter()
            .cloned()
            .zip(cfg.labels.iter().cloned())
            .collect()
    };
    for (img, lab) in &pairs {
        let raw = RawImageSet::from_files(img, lab)?;
        let mut hist = std::collections::BTreeMap::new();
        for &l in &raw.labels {
            *hist.entry(l).or_insert(0usize) += 1;
        }
        println!(
            "{}: {} images of {}x{}, label counts {:?}",
            img.display(),
            raw.n(),
            raw.rows,
            raw.cols,
            hist
        );
    }
    println!("dataset `{}` ready under {}", cfg.dataset, dir.display());
    Ok(())
}

fn fetch(url: &str, target: &std::path::Path) -> Result<()> {
    let attempts: [(&str, Vec<&str>); 2] =
        [("curl", vec!["-fsSL", "-o"]), ("wget", vec!["-q", "-O"])];
    for (tool, flags) in attempts {
        let status = std::process::Command::new(tool)
            .args(&flags)
            .arg(target)
            .arg(url)
            .status();
        match status {
            Ok(s) if s.success() => return Ok(()),
            Ok(_) => {
                let _ = std::fs::remove_file(target);
                return Err(Error::InvalidConfig {
                    reason: format!("{tool} failed downloading {url}"),
                });
            }
            Err(_) => continue, // tool not on PATH, try the next one
        }
    }
    Err(Error::InvalidConfig {
        reason: "neither curl nor wget is available; download the files manually".into(),
    })
}

fn cmd_train(args: &TrainArgs) -> Result<()> {
    let cfg = args.config.merge()?;
    init_jobs(cfg.jobs);
    let k = *cfg.components.first().ok_or_else(|| Error::InvalidConfig {
        reason: "train needs --components".into(),
    })?;
    let l = *cfg.neurons.first().ok_or_else(|| Error::InvalidConfig {
        reason: "train needs --neurons".into(),
    })?;
    let dataset = load_dataset(&cfg)?;
    println!(
        "training on {} ({} samples, {} classes) with k={k}, L={l}",
        dataset.name,
        dataset.n(),
        dataset.class_count()
    );
    let rows: Vec<usize> = (0..dataset.n()).collect();
    let started = std::time::Instant::now();
    let (model, report) = pipeline::fit_rows(&dataset, &rows, k, l, &cfg)?;
    model.save(&args.output)?;
    println!(
        "wrote {} after {} SVM fits in {:.2}s",
        args.output.display(),
        report.total_svm_fits,
        started.elapsed().as_secs_f64()
    );
    for (i, step) in report.steps.iter().enumerate() {
        println!(
            "  step {}: outcome {} ← class {} (candidates {:?})",
            i + 1,
            model.d - 1 - i,
            model.assignment.outcome_to_label[model.d - 1 - i],
            step.candidates,
        );
    }
    Ok(())
}

fn cmd_predict(args: &PredictArgs) -> Result<()> {
    let model = QuditClassifierModel::load(&args.model)?;
    let bytes = std::fs::read(&args.input)?;
    let (n, rows, cols, pixels) = idx::parse_idx_images(&bytes)?;
    if rows * cols != model.pca.input_dim {
        return Err(Error::DimensionMismatch {
            context: "predict image geometry",
            expected: model.pca.input_dim,
            got: rows * cols,
        });
    }
    let predictor = model.predictor()?;
    let mut out: Box<dyn std::io::Write> = match &args.output {
        Some(path) => Box::new(std::io::BufWriter::new(std::fs::File::create(path)?)),
        None => Box::new(std::io::BufWriter::new(std::io::stdout())),
    };
    let pixel_row = |i: usize| -> Vec<f64> {
        pixels[i * rows * cols..(i + 1) * rows * cols]
            .iter()
            .map(|&b| f64::from(b) / 255.0)
            .collect()
    };
    if args.proba {
        let mut sorted = model.assignment.outcome_to_label.clone();
        sorted.sort_unstable();
        write!(out, "label")?;
        for l in &sorted {
            write!(out, ",p{l}")?;
        }
        writeln!(out)?;
        for i in 0..n {
            let row = pixel_row(i);
            let proba = predictor.predict_proba(&row)?;
            let label = predictor.predict(&row)?;
            write!(out, "{label}")?;
            for l in &sorted {
                write!(out, ",{}", proba.prob_of_label(*l).unwrap_or(0.0))?;
            }
            writeln!(out)?;
        }
    } else {
        for i in 0..n {
            writeln!(out, "{}", predictor.predict(&pixel_row(i))?)?;
        }
    }
    Ok(())
}

fn cmd_cv(args: &CvArgs) -> Result<()> {
    let cfg = args.config.merge()?;
    init_jobs(cfg.jobs);
    let dataset = load_dataset(&cfg)?;
    let summary = run_cv(&dataset, &cfg)?;
    print!("{}", format_summary_table(&summary));
    pipeline::write_outputs(&summary, &cfg)?;
    if cfg.out_csv.is_none() && cfg.out_json.is_none() {
        eprintln!("note: pass --out-csv/--out-json to persist metrics");
    }
    Ok(())
}

fn cmd_verify() -> ExitCode {
    let results = verify::run_all();
    let mut first_failure: Option<&str> = None;
    for check in &results {
        let status = if check.passed { "PASS" } else { "FAIL" };
        println!("{status}  {:<32} {}", check.name, check.detail);
        if !check.passed && first_failure.is_none() {
            first_failure = Some(check.name);
        }
    }
    match first_failure {
        None => {
            println!("all {} checks passed", results.len());
            ExitCode::SUCCESS
        }
        Some(name) => {
            eprintln!("verification failed at `{name}`");
            ExitCode::FAILURE
        }
    }
}

fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let d = args.dimension;
    let angles: Vec<f64> = if let Some(seed) = args.random_seed {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..d.saturating_sub(1))
            .map(|_| rng.random_range(0.01..std::f64::consts::PI - 0.01))
            .collect()
    } else {
        args.theta.clone()
    };
    let theta = ThetaVector::new(d, angles)?;
    let circuit = qubit::compile(&theta)?;
    let sv = qubit::simulate(&circuit);
    let dist = qubit::measurement_distribution(&sv, d);
    let closed = outcome_probabilities(&theta);
    let report = qubit::gate_count_report(&circuit);

    println!(
        "{} qubits, {} multi-controlled R_y gates, control arities {:?} (sum {})",
        circuit.qubits, report.gate_count, report.control_arities, report.control_arity_sum
    );
    println!("outcome   circuit-prob         closed-form          |diff|");
    let mut worst = 0.0f64;
    for j in 0..d {
        let diff = (dist.entries[j] - closed.probs[j]).abs();
        worst = worst.max(diff);
        println!(
            "{j:>7}   {:<19.15}  {:<19.15}  {diff:.3e}",
            dist.entries[j], closed.probs[j]
        );
    }
    println!("invalid outcome mass: {:.3e}", dist.invalid);
    println!("max |circuit − closed-form|: {worst:.3e}");
    if let Some(path) = &args.output {
        std::fs::write(path, serde_json::to_string_pretty(&circuit.gates)?)?;
        println!("wrote circuit to {}", path.display());
    }
    if worst >= 1e-12 || dist.invalid >= 1e-12 {
        return Err(Error::InvalidConfig {
            reason: "circuit disagrees with the closed form".into(),
        });
    }
    Ok(())
}

fn cmd_report(args: &ReportArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.input)?;
    let summary: CvSummary = serde_json::from_str(&text)?;
    print!("{}", format_summary_table(&summary));
    Ok(())
}

fn main() -> ExitCode {
    // behave like a Unix filter when the reader hangs up mid-stream
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Prepare(args) => cmd_prepare(args),
        Command::Train(args) => cmd_train(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Cv(args) => cmd_cv(args),
        Command::Verify => return cmd_verify(),
        Command::SimulateCircuit(args) => cmd_simulate(args),
        Command::Report(args) => cmd_report(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, Error::InvalidConfig { .. }) {
                eprintln!(
                    "hint: dataset files are looked up under --data-dir, then ${DATA_DIR_ENV}, then ./data"
                );
            }
            ExitCode::FAILURE
        }
    }
}
