use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use contingency_lab::exogenous::EquivalenceConfig;
use contingency_lab::features::DEFAULT_EPSILON;
use contingency_lab::learning::{Dataset, TrainedClassifier};
use contingency_lab::pipeline::{
    build_bank, detect, equivalence_csv, equivalence_suite, generate_dataset, rank_report, standard_faults,
    train_classifier, BuildConfig, ClassifierKind, DatasetPlan, ModelBank, TrainPlan,
};
use contingency_lab::sim::{Schedule, SimConfig};
use contingency_lab::spectral::{spectra_report, DEFAULT_TOLERANCE};
use contingency_lab::{Error, GridSpec, Result};

#[derive(Parser)]
#[command(name = "contingency-lab", version, about = "Grid contingency detection on a switched linear model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate scenarios and design gains; writes a model bank.
    Build {
        /// Grid TOML; the bundled desk grid when omitted.
        #[arg(long)]
        grid: Option<PathBuf>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value = "bank.json")]
        out: PathBuf,
    },
    /// Simulate a balanced feature dataset from a bank.
    GenDataset {
        #[arg(long)]
        bank: PathBuf,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Noise level; repeat for several. Defaults to 1e-4, 1e-3, 1e-2.
        #[arg(long)]
        sigma: Vec<f64>,
        #[arg(long, default_value_t = 240)]
        per_class: usize,
        /// Random switching intervals simulated before each window.
        #[arg(long, default_value_t = 3)]
        warmup: usize,
        /// Also export the raw error sequences.
        #[arg(long)]
        raw: bool,
        #[arg(long, default_value = "dataset.csv")]
        out: PathBuf,
    },
    /// Grid-search, fit and test a classifier; also writes `<out>.cv.csv`.
    Train {
        #[arg(long)]
        data: PathBuf,
        /// knn or svm.
        #[arg(long, default_value = "knn")]
        classifier: String,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        folds: usize,
        #[arg(long, default_value = "classifier.json")]
        out: PathBuf,
    },
    /// Classify every window of a switching schedule.
    Detect {
        #[arg(long)]
        bank: PathBuf,
        #[arg(long)]
        classifier: PathBuf,
        /// Schedule CSV, or `random:N` for N balanced random intervals.
        #[arg(long)]
        schedule: String,
        #[arg(long, default_value_t = 1e-3)]
        sigma: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-scenario eigenvalue sets and spectral classes.
    Spectra {
        #[arg(long)]
        bank: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Co-simulate signal faults against their matrix equivalents.
    Equiv {
        #[arg(long)]
        bank: PathBuf,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Controllability and observability ranks, with a per-sensor audit.
    Rank {
        #[arg(long)]
        bank: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io { path: p.to_path_buf(), source: e }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Build { grid, seed, out } => {
            let grid = match grid {
                Some(p) => GridSpec::from_file(&p)?,
                None => GridSpec::desk(),
            };
            let bank = build_bank(&grid, &BuildConfig::full(seed))?;
            bank.write(&out)?;
            let [n, p, c, m] = bank.registry.counts();
            eprintln!("{} scenarios (normal {n}, physical {p}, control {c}, measurement {m}) -> {}", bank.registry.len(), out.display());
        }
        Command::GenDataset { bank, seed, sigma, per_class, warmup, raw, out } => {
            let bank = ModelBank::read(&bank)?;
            let mut plan = DatasetPlan { per_class, warmup, raw, ..DatasetPlan::standard(seed) };
            if !sigma.is_empty() {
                plan.sigmas = sigma;
            }
            let generated = generate_dataset(&bank, &plan)?;
            for id in &generated.skipped {
                eprintln!("skipped islanded scenario {id}");
            }
            generated.dataset.write(&out)?;
            eprintln!("{} rows -> {}", generated.dataset.len(), out.display());
        }
        Command::Train { data, classifier, seed, folds, out } => {
            let data = Dataset::read(&data)?;
            let kind: ClassifierKind = classifier.parse()?;
            let plan = TrainPlan { folds, ..TrainPlan::standard(kind, seed) };
            let outcome = train_classifier(&data, &plan)?;
            outcome.classifier.write(&out)?;
            let cv = out.with_extension("cv.csv");
            emit(Some(&cv), &outcome.search.to_csv())?;
            eprintln!(
                "best {:?}: cv {:.4}, held-out {:.4} -> {}, {}",
                outcome.search.best,
                outcome.search.best_accuracy,
                outcome.test.accuracy,
                out.display(),
                cv.display()
            );
            eprint!("{}", outcome.test.to_text());
        }
        Command::Detect { bank, classifier, schedule, sigma, seed, out } => {
            let bank = ModelBank::read(&bank)?;
            let classifier = TrainedClassifier::read(&classifier)?;
            let cfg = SimConfig::default();
            let schedule = match schedule.strip_prefix("random:") {
                Some(n) => {
                    let n = n.parse().map_err(|_| Error::Parse(format!("bad schedule spec {schedule:?}")))?;
                    Schedule::random(&bank.registry, n, cfg.switching_interval, seed)?
                }
                None => {
                    let text = std::fs::read_to_string(&schedule).map_err(|e| Error::Io { path: schedule.clone().into(), source: e })?;
                    Schedule::from_csv(&text, cfg.switching_interval)?
                }
            };
            let report = detect(&bank, &classifier, &schedule, &cfg, sigma, DEFAULT_EPSILON, seed)?;
            eprintln!("accuracy {:.4}, mean classify {:.3} ms over {} windows", report.accuracy(), report.mean_classify_ms(), report.rows.len());
            emit(out.as_deref(), &report.to_csv())?;
        }
        Command::Spectra { bank, out } => {
            let bank = ModelBank::read(&bank)?;
            let report = spectra_report(&bank.registry, &bank.gains, DEFAULT_TOLERANCE)?;
            for r in report.disagreements() {
                eprintln!("scenario {} declared {} but spectra say {}", r.scenario_id, r.declared, r.spectral);
            }
            emit(out.as_deref(), &report.to_csv())?;
        }
        Command::Equiv { bank, trials, seed, out } => {
            let bank = ModelBank::read(&bank)?;
            let reports = equivalence_suite(&bank, &standard_faults(), trials, seed, &EquivalenceConfig::default())?;
            emit(out.as_deref(), &equivalence_csv(&reports))?;
        }
        Command::Rank { bank, out } => {
            let bank = ModelBank::read(&bank)?;
            emit(out.as_deref(), &rank_report(&bank)?.to_text())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{{\"error\":\"{}\",\"message\":{:?}}}", e.category(), e.to_string());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
