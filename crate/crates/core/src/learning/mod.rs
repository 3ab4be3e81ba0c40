//! Feature datasets and the classifiers trained on them.

mod classifier;
mod dataset;
mod knn;
mod svm;
mod tuning;

use crate::error::Result;
use crate::grid::ContingencyClass;

pub use classifier::{TrainedClassifier, TrainedModel, CLASSIFIER_FORMAT};
pub use dataset::{Dataset, Provenance, Sample, DATASET_FORMAT};
pub use knn::{KnnModel, Neighbor, NeighborReport};
pub use svm::{
    fit_sigmoid, gram, macro_accuracy, rbf, smo, svm_calibrate, svm_train, svm_train_with_kernel, BinarySolution,
    Calibration, Machine, Sigmoid, Standardizer, SvmModel, SvmParams, KKT_TOLERANCE, MAX_ITERATIONS,
};
pub use tuning::{
    evaluate, grid_search, stratified_folds, stratified_split, CvCell, Evaluation, GridSearchResult, ModelSpec,
    ParamGrid, CV_FORMAT,
};

/// Anything that maps a feature vector to a class. Implementors are
/// immutable after training and safe to share across threads.
pub trait Classifier: Sync {
    fn predict(&self, x: &[f64]) -> Result<ContingencyClass>;
    fn dim(&self) -> usize;
}
