use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learning::{
    evaluate, grid_search, stratified_split, svm_calibrate, svm_train, Dataset, Evaluation, GridSearchResult, KnnModel,
    ModelSpec, ParamGrid, TrainedClassifier, TrainedModel,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Knn,
    Svm,
}

impl std::str::FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "knn" => Ok(ClassifierKind::Knn),
            "svm" => Ok(ClassifierKind::Svm),
            _ => Err(Error::Parse(format!("unknown classifier {s:?} (expected knn or svm)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainPlan {
    pub grid: ParamGrid,
    pub folds: usize,
    /// Share of each class held out for the final test.
    pub test_fraction: f64,
    /// Share of the training rows used to calibrate an SVM.
    pub calibration_fraction: f64,
    pub seed: u64,
}

impl TrainPlan {
    pub fn standard(kind: ClassifierKind, seed: u64) -> Self {
        Self {
            grid: match kind {
                ClassifierKind::Knn => ParamGrid::knn_default(),
                ClassifierKind::Svm => ParamGrid::svm_default(),
            },
            folds: 5,
            test_fraction: 0.2,
            calibration_fraction: 0.2,
            seed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub classifier: TrainedClassifier,
    /// CV over the training rows.
    pub search: GridSearchResult,
    /// Held-out rows never seen by the search or the fit.
    pub test: Evaluation,
    pub train_rows: usize,
    pub test_rows: usize,
}

/// Held-out split, grid search on the rest, then a final fit with the
/// winning cell. An SVM is fitted on part of the training rows and
/// calibrated on the remainder.
pub fn train_classifier(data: &Dataset, plan: &TrainPlan) -> Result<TrainOutcome> {
    if data.is_empty() {
        return Err(Error::Empty("dataset".into()));
    }
    let (train_idx, test_idx) = stratified_split(&data.labels(), plan.test_fraction, plan.seed, 0)?;
    let train = data.subset(&train_idx);
    let test = data.subset(&test_idx);
    let search = grid_search(&train, &plan.grid, plan.folds, plan.seed)?;
    let model = match search.best {
        ModelSpec::Knn { k, p } => TrainedModel::Knn(KnnModel::fit(&train, k, p)?),
        ModelSpec::Svm { c, gamma } => {
            let (fit_idx, cal_idx) = stratified_split(&train.labels(), plan.calibration_fraction, plan.seed, 1)?;
            let fitted = svm_train(&train.subset(&fit_idx), c, gamma)?;
            TrainedModel::Svm(svm_calibrate(fitted, &train.subset(&cal_idx))?)
        }
    };
    let classifier = TrainedClassifier::new(model, data.digest());
    let evaluation = evaluate(&classifier, &test)?;
    Ok(TrainOutcome {
        classifier,
        search,
        test: evaluation,
        train_rows: train.len(),
        test_rows: test.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::ContingencyClass;
    use crate::learning::{Classifier, Provenance, Sample};

    fn data() -> Dataset {
        let rows = (0..80)
            .map(|i| {
                let c = i % 4;
                Sample {
                    window_id: i,
                    scenario_id: i,
                    label: ContingencyClass::ALL[c],
                    features: vec![c as f64 * 2.0 + (i as f64 * 0.37).sin() * 0.3, (i as f64 * 0.11).cos()],
                    raw: None,
                }
            })
            .collect();
        Dataset::new(rows, Provenance::default()).unwrap()
    }

    #[test]
    fn knn_training_is_reproducible() {
        let d = data();
        let plan = TrainPlan { grid: ParamGrid::Knn { ks: vec![1, 3], ps: vec![2.0] }, ..TrainPlan::standard(ClassifierKind::Knn, 4) };
        let a = train_classifier(&d, &plan).unwrap();
        let b = train_classifier(&d, &plan).unwrap();
        assert_eq!(a.classifier.to_json(), b.classifier.to_json());
        assert_eq!(a.test_rows, 16);
        assert_eq!(a.test.accuracy, 1.0);
        assert_eq!(a.classifier.dim(), 2);
    }

    #[test]
    fn svm_training_calibrates() {
        let d = data();
        let plan = TrainPlan { grid: ParamGrid::Svm { cs: vec![10.0], gammas: vec![1.0] }, ..TrainPlan::standard(ClassifierKind::Svm, 4) };
        let out = train_classifier(&d, &plan).unwrap();
        assert_eq!(out.classifier.name(), "svm");
        assert!(out.test.accuracy > 0.9);
        assert!("lstm".parse::<ClassifierKind>().is_err());
    }
}
