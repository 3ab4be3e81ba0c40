//! Offline stages (bank, dataset, training) and the online detection loop,
//! each writing a versioned text artifact.

mod audit;
mod bank;
mod detect;
mod generate;
mod train;

pub use audit::{equivalence_csv, equivalence_suite, rank_report, standard_faults, RankReport, ScenarioRank};
pub use bank::{build_bank, BuildConfig, ModelBank, BANK_FORMAT};
pub use detect::{detect, DetectionReport, DetectionRow, DETECTION_FORMAT};
pub use generate::{generate_dataset, DatasetPlan, GeneratedDataset};
pub use train::{train_classifier, ClassifierKind, TrainOutcome, TrainPlan};
