use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::ContingencyClass;
use crate::learning::{Classifier, KnnModel, SvmModel};

pub const CLASSIFIER_FORMAT: &str = "contingency-lab classifier v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum TrainedModel {
    Knn(KnnModel),
    Svm(SvmModel),
}

/// A fitted model plus what it was fitted on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedClassifier {
    pub format: String,
    /// Digest of the dataset the grid search and fit used.
    pub dataset_digest: String,
    pub feature_dim: usize,
    pub model: TrainedModel,
}

impl TrainedClassifier {
    pub fn new(model: TrainedModel, dataset_digest: String) -> Self {
        let feature_dim = match &model {
            TrainedModel::Knn(m) => m.dim(),
            TrainedModel::Svm(m) => m.dim(),
        };
        Self { format: CLASSIFIER_FORMAT.to_string(), dataset_digest, feature_dim, model }
    }

    pub fn name(&self) -> &'static str {
        match self.model {
            TrainedModel::Knn(_) => "knn",
            TrainedModel::Svm(_) => "svm",
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("classifier serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: TrainedClassifier = serde_json::from_str(text).map_err(|e| Error::Parse(format!("classifier: {e}")))?;
        if c.format != CLASSIFIER_FORMAT {
            return Err(Error::Parse(format!("unsupported classifier format {:?}", c.format)));
        }
        if c.dim() != c.feature_dim {
            return Err(Error::Parse("classifier feature dimension disagrees with its model".into()));
        }
        Ok(c)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}

impl Classifier for TrainedClassifier {
    fn predict(&self, x: &[f64]) -> Result<ContingencyClass> {
        match &self.model {
            TrainedModel::Knn(m) => m.predict(x),
            TrainedModel::Svm(m) => m.predict(x),
        }
    }

    fn dim(&self) -> usize {
        match &self.model {
            TrainedModel::Knn(m) => Classifier::dim(m),
            TrainedModel::Svm(m) => m.dim(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learning::{svm_train, Dataset, Provenance, Sample};

    fn data() -> Dataset {
        let rows = (0..8)
            .map(|i| Sample {
                window_id: i,
                scenario_id: i,
                label: ContingencyClass::ALL[i % 4],
                features: vec![(i % 4) as f64 + 0.1 * i as f64, 1.0 / (i + 1) as f64],
                raw: None,
            })
            .collect();
        Dataset::new(rows, Provenance::default()).unwrap()
    }

    #[test]
    fn json_round_trip_is_byte_stable() {
        let d = data();
        for model in [TrainedModel::Knn(KnnModel::fit(&d, 1, 2.0).unwrap()), TrainedModel::Svm(svm_train(&d, 10.0, 1.0).unwrap())] {
            let c = TrainedClassifier::new(model, d.digest());
            let text = c.to_json();
            let back = TrainedClassifier::from_json(&text).unwrap();
            assert_eq!(back.to_json(), text);
            for r in &d.rows {
                assert_eq!(back.predict(&r.features).unwrap(), c.predict(&r.features).unwrap());
            }
        }
    }

    #[test]
    fn rejects_foreign_documents() {
        let d = data();
        let mut c = TrainedClassifier::new(TrainedModel::Knn(KnnModel::fit(&d, 1, 2.0).unwrap()), d.digest());
        c.feature_dim = 7;
        assert!(TrainedClassifier::from_json(&c.to_json()).is_err());
        c.feature_dim = 2;
        c.format = "v0".into();
        assert!(TrainedClassifier::from_json(&c.to_json()).is_err());
    }
}
