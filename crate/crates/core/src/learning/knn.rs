use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::ContingencyClass;
use crate::learning::{Classifier, Dataset};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    /// Minkowski exponent.
    pub p: f64,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<ContingencyClass>,
    pub scenario_ids: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub row: usize,
    pub scenario_id: usize,
    pub label: ContingencyClass,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborReport {
    /// Nearest first.
    pub neighbors: Vec<Neighbor>,
    /// Votes per class, indexed by [`ContingencyClass::index`].
    pub votes: [usize; 4],
    pub label: ContingencyClass,
}

/// Σ|a−b|^p, the p-th power of the Minkowski distance.
pub(crate) fn minkowski_pow(a: &[f64], b: &[f64], p: f64) -> f64 {
    let it = a.iter().zip(b).map(|(x, y)| (x - y).abs());
    if p == 1.0 {
        it.sum()
    } else if p == 2.0 {
        it.map(|d| d * d).sum()
    } else if p == 3.0 {
        it.map(|d| d * d * d).sum()
    } else {
        it.map(|d| d.powf(p)).sum()
    }
}

/// Majority vote over `ranked` (nearest first). A tie between classes goes
/// to the tied class that appears first in the ranking.
pub(crate) fn vote<I: IntoIterator<Item = ContingencyClass>>(ranked: I) -> ([usize; 4], ContingencyClass) {
    let mut votes = [0usize; 4];
    let mut first_seen = [usize::MAX; 4];
    for (pos, label) in ranked.into_iter().enumerate() {
        let c = label.index();
        votes[c] += 1;
        first_seen[c] = first_seen[c].min(pos);
    }
    let best = (0..4)
        .filter(|&c| votes[c] > 0)
        .min_by_key(|&c| (std::cmp::Reverse(votes[c]), first_seen[c]))
        .expect("at least one neighbor");
    (votes, ContingencyClass::ALL[best])
}

impl KnnModel {
    pub fn fit(data: &Dataset, k: usize, p: f64) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::Empty("KNN training set".into()));
        }
        if k == 0 || k > data.len() {
            return Err(Error::InvalidArgument(format!("k must be in 1..={}, got {k}", data.len())));
        }
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::InvalidArgument(format!("Minkowski exponent must be >= 1, got {p}")));
        }
        Ok(Self {
            k,
            p,
            rows: data.features(),
            labels: data.labels(),
            scenario_ids: data.rows.iter().map(|r| r.scenario_id).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    /// Row indices sorted by (distance, scenario id, row), with p-th power
    /// distances.
    fn ranking(&self, x: &[f64]) -> Vec<(f64, usize)> {
        let mut d: Vec<(f64, usize)> = self.rows.iter().enumerate().map(|(i, r)| (minkowski_pow(r, x, self.p), i)).collect();
        let key = |&(dist, i): &(f64, usize)| (dist, self.scenario_ids[i], i);
        let k = self.k.min(d.len());
        if k < d.len() {
            d.select_nth_unstable_by(k - 1, |a, b| {
                let (ka, kb) = (key(a), key(b));
                ka.0.total_cmp(&kb.0).then(ka.1.cmp(&kb.1)).then(ka.2.cmp(&kb.2))
            });
            d.truncate(k);
        }
        d.sort_by(|a, b| {
            let (ka, kb) = (key(a), key(b));
            ka.0.total_cmp(&kb.0).then(ka.1.cmp(&kb.1)).then(ka.2.cmp(&kb.2))
        });
        d
    }

    pub fn knn_predict(&self, x: &[f64]) -> Result<(ContingencyClass, NeighborReport)> {
        if self.rows.is_empty() {
            return Err(Error::Empty("KNN model has no rows".into()));
        }
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!("query has {} features, model {}", x.len(), self.dim())));
        }
        let ranked = self.ranking(x);
        let (votes, label) = vote(ranked.iter().map(|&(_, i)| self.labels[i]));
        let neighbors = ranked
            .iter()
            .map(|&(d, i)| Neighbor {
                row: i,
                scenario_id: self.scenario_ids[i],
                label: self.labels[i],
                distance: d.powf(1.0 / self.p),
            })
            .collect();
        Ok((label, NeighborReport { neighbors, votes, label }))
    }
}

impl Classifier for KnnModel {
    fn predict(&self, x: &[f64]) -> Result<ContingencyClass> {
        self.knn_predict(x).map(|(label, _)| label)
    }

    fn dim(&self) -> usize {
        KnnModel::dim(self)
    }
}
