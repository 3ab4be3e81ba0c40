use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::ContingencyClass;
use crate::learning::knn::{minkowski_pow, vote};
use crate::learning::svm::{gram, svm_train_with_kernel, SvmParams, Standardizer};
use crate::learning::{Classifier, Dataset};
use crate::seed::{self, Stream};

pub const CV_FORMAT: &str = "contingency-lab cv v1";

/// Rows of each class, in dataset order.
fn by_class(labels: &[ContingencyClass]) -> [Vec<usize>; 4] {
    let mut out: [Vec<usize>; 4] = Default::default();
    for (i, l) in labels.iter().enumerate() {
        out[l.index()].push(i);
    }
    out
}

/// Fold index for every row. Each class is shuffled with its own seeded
/// stream and dealt round-robin, so fold sizes per class differ by at most
/// one.
pub fn stratified_folds(labels: &[ContingencyClass], folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 folds, got {folds}")));
    }
    let groups = by_class(labels);
    let smallest = groups.iter().map(Vec::len).filter(|&n| n > 0).min().unwrap_or(0);
    if folds > smallest {
        return Err(Error::InvalidArgument(format!("{folds} folds but the smallest class has {smallest} rows")));
    }
    let mut assign = vec![0; labels.len()];
    for (c, mut idx) in groups.into_iter().enumerate() {
        idx.shuffle(&mut seed::child_rng(seed, Stream::Folds, c as u64));
        for (pos, i) in idx.into_iter().enumerate() {
            assign[i] = pos % folds;
        }
    }
    Ok(assign)
}

/// Stratified (train, test) row indices with about `test_fraction` of each
/// class held out. `index` separates independent splits of one seed.
pub fn stratified_split(labels: &[ContingencyClass], test_fraction: f64, seed: u64, index: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!("test fraction must be in (0, 1), got {test_fraction}")));
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (c, mut idx) in by_class(labels).into_iter().enumerate() {
        if idx.is_empty() {
            continue;
        }
        idx.shuffle(&mut seed::child_rng(seed, Stream::Split, index * 4 + c as u64));
        let n_test = ((idx.len() as f64 * test_fraction).round() as usize).clamp(1, idx.len().saturating_sub(1).max(1));
        test.extend_from_slice(&idx[..n_test]);
        train.extend_from_slice(&idx[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum ModelSpec {
    Knn { k: usize, p: f64 },
    Svm { c: f64, gamma: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum ParamGrid {
    Knn { ks: Vec<usize>, ps: Vec<f64> },
    Svm { cs: Vec<f64>, gammas: Vec<f64> },
}

impl ParamGrid {
    /// k ∈ 1..=15, p ∈ {1, 2, 3}.
    pub fn knn_default() -> Self {
        ParamGrid::Knn { ks: (1..=15).collect(), ps: vec![1.0, 2.0, 3.0] }
    }

    /// C ∈ {0.1, 1, 10, 100, 1000}, γ ∈ {0.01, 0.1, 1, 10}.
    pub fn svm_default() -> Self {
        ParamGrid::Svm { cs: vec![0.1, 1.0, 10.0, 100.0, 1000.0], gammas: vec![0.01, 0.1, 1.0, 10.0] }
    }

    pub fn cells(&self) -> Vec<ModelSpec> {
        match self {
            ParamGrid::Knn { ks, ps } => ps.iter().flat_map(|&p| ks.iter().map(move |&k| ModelSpec::Knn { k, p })).collect(),
            ParamGrid::Svm { cs, gammas } => {
                cs.iter().flat_map(|&c| gammas.iter().map(move |&gamma| ModelSpec::Svm { c, gamma })).collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvCell {
    pub spec: ModelSpec,
    pub fold_accuracy: Vec<f64>,
    /// None when a fold failed to train.
    pub mean_accuracy: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearchResult {
    pub best: ModelSpec,
    pub best_accuracy: f64,
    pub folds: usize,
    pub seed: u64,
    pub table: Vec<CvCell>,
}

impl GridSearchResult {
    pub fn to_csv(&self) -> String {
        let mut out = format!("# {CV_FORMAT}\n# folds={}\n# seed={}\nmodel,k,p,C,gamma,mean_accuracy", self.folds, self.seed);
        for f in 1..=self.folds {
            let _ = write!(out, ",fold_{f}");
        }
        out.push_str(",error\n");
        for cell in &self.table {
            match cell.spec {
                ModelSpec::Knn { k, p } => {
                    let _ = write!(out, "knn,{k},{p},,");
                }
                ModelSpec::Svm { c, gamma } => {
                    let _ = write!(out, "svm,,,{c},{gamma}");
                }
            }
            match cell.mean_accuracy {
                Some(a) => {
                    let _ = write!(out, ",{a}");
                }
                None => out.push(','),
            }
            for f in 0..self.folds {
                match cell.fold_accuracy.get(f) {
                    Some(a) => {
                        let _ = write!(out, ",{a}");
                    }
                    None => out.push(','),
                }
            }
            let _ = writeln!(out, ",{}", cell.error.as_deref().unwrap_or("").replace(',', ";"));
        }
        out
    }
}

fn fold_parts(assign: &[usize], fold: usize) -> (Vec<usize>, Vec<usize>) {
    let train = (0..assign.len()).filter(|&i| assign[i] != fold).collect();
    let test = (0..assign.len()).filter(|&i| assign[i] == fold).collect();
    (train, test)
}

/// Accuracy of every k at once for one (p, fold): each test row ranks the
/// training rows a single time.
fn knn_fold(data: &Dataset, train: &[usize], test: &[usize], ks: &[usize], p: f64) -> Vec<f64> {
    let kmax = ks.iter().copied().max().unwrap_or(1).min(train.len());
    let mut correct = vec![0usize; ks.len()];
    for &t in test {
        let x = &data.rows[t].features;
        let mut d: Vec<(f64, usize, usize)> =
            train.iter().map(|&i| (minkowski_pow(&data.rows[i].features, x, p), data.rows[i].scenario_id, i)).collect();
        d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        d.truncate(kmax);
        for (slot, &k) in ks.iter().enumerate() {
            let (_, label) = vote(d[..k.min(d.len())].iter().map(|&(_, _, i)| data.rows[i].label));
            if label == data.rows[t].label {
                correct[slot] += 1;
            }
        }
    }
    correct.iter().map(|&c| c as f64 / test.len() as f64).collect()
}

fn accuracy_of(model: &dyn Classifier, data: &Dataset, rows: &[usize]) -> Result<f64> {
    let mut hit = 0;
    for &i in rows {
        if model.predict(&data.rows[i].features)? == data.rows[i].label {
            hit += 1;
        }
    }
    Ok(hit as f64 / rows.len() as f64)
}

fn cell_from(spec: ModelSpec, folds: Vec<Result<f64>>) -> CvCell {
    let mut acc = Vec::new();
    let mut error = None;
    for f in folds {
        match f {
            Ok(a) => acc.push(a),
            Err(e) => error = Some(e.to_string()),
        }
    }
    let mean = error.is_none().then(|| acc.iter().sum::<f64>() / acc.len() as f64);
    CvCell { spec, fold_accuracy: acc, mean_accuracy: mean, error }
}

/// Stratified k-fold CV of every grid cell; the best mean accuracy wins,
/// ties going to the earlier cell.
pub fn grid_search(data: &Dataset, grid: &ParamGrid, folds: usize, seed: u64) -> Result<GridSearchResult> {
    let cells = grid.cells();
    if cells.is_empty() {
        return Err(Error::Empty("parameter grid".into()));
    }
    let assign = stratified_folds(&data.labels(), folds, seed)?;
    let parts: Vec<(Vec<usize>, Vec<usize>)> = (0..folds).map(|f| fold_parts(&assign, f)).collect();

    let table: Vec<CvCell> = match grid {
        ParamGrid::Knn { ks, ps } => {
            if ks.contains(&0) || ps.iter().any(|&p| !(p.is_finite() && p >= 1.0)) {
                return Err(Error::InvalidArgument(format!("bad KNN grid {grid:?}")));
            }
            let per_p: Vec<Vec<Vec<f64>>> = ps
                .par_iter()
                .map(|&p| parts.par_iter().map(|(tr, te)| knn_fold(data, tr, te, ks, p)).collect())
                .collect();
            ps.iter()
                .enumerate()
                .flat_map(|(pi, &p)| {
                    let per_p = &per_p;
                    ks.iter().enumerate().map(move |(ki, &k)| {
                        cell_from(ModelSpec::Knn { k, p }, (0..folds).map(|f| Ok(per_p[pi][f][ki])).collect())
                    })
                })
                .collect()
        }
        ParamGrid::Svm { cs, gammas } => {
            // one Gram matrix per (fold, γ), shared by every C
            let jobs: Vec<(usize, usize)> = (0..folds).flat_map(|f| (0..gammas.len()).map(move |g| (f, g))).collect();
            let results: Vec<Vec<Result<f64>>> = jobs
                .par_iter()
                .map(|&(f, gi)| {
                    let (tr, te) = &parts[f];
                    let train = data.subset(tr);
                    let z: Vec<Vec<f64>> = {
                        let rows = train.features();
                        let s = Standardizer::fit(&rows);
                        rows.iter().map(|r| s.apply(r)).collect()
                    };
                    let k = gram(&z, gammas[gi]);
                    cs.par_iter()
                        .map(|&c| {
                            let m = svm_train_with_kernel(&train, &SvmParams::new(c, gammas[gi]), Some(&k))?;
                            accuracy_of(&m, data, te)
                        })
                        .collect()
                })
                .collect();
            cs.iter()
                .enumerate()
                .flat_map(|(ci, &c)| {
                    let (jobs, results) = (&jobs, &results);
                    gammas.iter().enumerate().map(move |(gi, &gamma)| {
                        let folds_acc = (0..folds)
                            .map(|f| {
                                let j = jobs.iter().position(|&x| x == (f, gi)).expect("job exists");
                                match &results[j][ci] {
                                    Ok(a) => Ok(*a),
                                    Err(e) => Err(Error::InvalidArgument(e.to_string())),
                                }
                            })
                            .collect();
                        cell_from(ModelSpec::Svm { c, gamma }, folds_acc)
                    })
                })
                .collect()
        }
    };

    let (best_idx, best_accuracy) = table
        .iter()
        .enumerate()
        .filter_map(|(i, c)| c.mean_accuracy.map(|a| (i, a)))
        .fold(None, |acc: Option<(usize, f64)>, (i, a)| match acc {
            Some((_, b)) if b >= a => acc,
            _ => Some((i, a)),
        })
        .ok_or_else(|| Error::InvalidArgument("no grid cell trained on every fold".into()))?;
    Ok(GridSearchResult { best: table[best_idx].spec.clone(), best_accuracy, folds, seed, table })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub n: usize,
    pub accuracy: f64,
    /// Rows are the true class, columns the prediction.
    pub confusion: [[usize; 4]; 4],
    /// None for classes absent from the test rows.
    pub recall: [Option<f64>; 4],
}

impl Evaluation {
    pub fn from_pairs(pairs: &[(ContingencyClass, ContingencyClass)]) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::Empty("evaluation rows".into()));
        }
        let mut confusion = [[0usize; 4]; 4];
        for (t, p) in pairs {
            confusion[t.index()][p.index()] += 1;
        }
        let correct: usize = (0..4).map(|c| confusion[c][c]).sum();
        let recall = std::array::from_fn(|c| {
            let total: usize = confusion[c].iter().sum();
            (total > 0).then(|| confusion[c][c] as f64 / total as f64)
        });
        Ok(Self { n: pairs.len(), accuracy: correct as f64 / pairs.len() as f64, confusion, recall })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("accuracy={:.4} n={}\ntrue\\pred", self.accuracy, self.n);
        for c in ContingencyClass::ALL {
            let _ = write!(out, ",{c}");
        }
        out.push_str(",recall\n");
        for c in ContingencyClass::ALL {
            let _ = write!(out, "{c}");
            for v in self.confusion[c.index()] {
                let _ = write!(out, ",{v}");
            }
            match self.recall[c.index()] {
                Some(r) => {
                    let _ = writeln!(out, ",{r:.4}");
                }
                None => out.push_str(",\n"),
            }
        }
        out
    }
}

pub fn evaluate(model: &dyn Classifier, test: &Dataset) -> Result<Evaluation> {
    let pairs: Vec<_> = test.rows.iter().map(|r| Ok((r.label, model.predict(&r.features)?))).collect::<Result<_>>()?;
    Evaluation::from_pairs(&pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learning::{KnnModel, Provenance, Sample};
    use rand::Rng;

    fn random_dataset(seed: u64, n: usize) -> Dataset {
        let mut rng = crate::seed::rng(seed);
        let rows = (0..n)
            .map(|i| {
                let label = ContingencyClass::ALL[i % 4];
                let center = label.index() as f64;
                Sample {
                    window_id: i,
                    scenario_id: i,
                    label,
                    features: (0..3).map(|_| center + rng.random_range(-1.5..1.5)).collect(),
                    raw: None,
                }
            })
            .collect();
        Dataset::new(rows, Provenance::default()).unwrap()
    }

    #[test]
    fn folds_are_stratified_and_seeded() {
        let d = random_dataset(1, 103);
        let a = stratified_folds(&d.labels(), 5, 9).unwrap();
        assert_eq!(a, stratified_folds(&d.labels(), 5, 9).unwrap());
        assert_ne!(a, stratified_folds(&d.labels(), 5, 10).unwrap());
        for c in ContingencyClass::ALL {
            let mut sizes = [0usize; 5];
            for (i, r) in d.rows.iter().enumerate() {
                if r.label == c {
                    sizes[a[i]] += 1;
                }
            }
            assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        }
        assert!(stratified_folds(&d.labels()[..8], 5, 1).is_err());
    }

    #[test]
    fn split_is_disjoint_and_balanced() {
        let d = random_dataset(2, 960);
        let (train, test) = stratified_split(&d.labels(), 0.2, 4, 0).unwrap();
        assert_eq!(train.len() + test.len(), 960);
        assert_eq!(test.len(), 192);
        assert!(train.iter().all(|i| !test.contains(i)));
        assert_eq!(d.subset(&test).class_counts().values().copied().collect::<Vec<_>>(), vec![48; 4]);
    }

    #[test]
    fn singleton_grid_returns_itself() {
        let d = random_dataset(3, 40);
        let grid = ParamGrid::Knn { ks: vec![3], ps: vec![2.0] };
        let r = grid_search(&d, &grid, 5, 1).unwrap();
        assert_eq!(r.best, ModelSpec::Knn { k: 3, p: 2.0 });
        assert_eq!(r.table.len(), 1);
        assert!(grid_search(&d, &ParamGrid::Knn { ks: vec![], ps: vec![2.0] }, 5, 1).is_err());
    }

    #[test]
    fn knn_grid_matches_cell_by_cell_evaluation() {
        let d = random_dataset(4, 120);
        let grid = ParamGrid::Knn { ks: (1..=15).collect(), ps: vec![1.0, 2.0, 3.0] };
        let r = grid_search(&d, &grid, 5, 7).unwrap();
        let assign = stratified_folds(&d.labels(), 5, 7).unwrap();
        let mut best = (ModelSpec::Knn { k: 0, p: 0.0 }, -1.0);
        for (cell, spec) in r.table.iter().zip(grid.cells()) {
            let ModelSpec::Knn { k, p } = spec else { unreachable!() };
            let mut accs = Vec::new();
            for f in 0..5 {
                let (tr, te) = fold_parts(&assign, f);
                let m = KnnModel::fit(&d.subset(&tr), k, p).unwrap();
                let e = evaluate(&m, &d.subset(&te)).unwrap();
                accs.push(e.accuracy);
            }
            let mean = accs.iter().sum::<f64>() / 5.0;
            assert_eq!(cell.fold_accuracy, accs);
            assert!((cell.mean_accuracy.unwrap() - mean).abs() < 1e-15);
            if mean > best.1 {
                best = (spec.clone(), mean);
            }
        }
        assert_eq!(r.best, best.0);
        assert_eq!(r.to_csv().lines().count(), 4 + 45);
    }

    #[test]
    fn svm_grid_table() {
        let d = random_dataset(5, 60);
        let r = grid_search(&d, &ParamGrid::svm_default(), 3, 2).unwrap();
        assert_eq!(r.table.len(), 20);
        assert!(r.best_accuracy > 0.5);
        assert_eq!(r, grid_search(&d, &ParamGrid::svm_default(), 3, 2).unwrap());
    }

    #[test]
    fn evaluation_counts() {
        let d = random_dataset(6, 40);
        struct Oracle<'a>(&'a Dataset);
        impl Classifier for Oracle<'_> {
            fn predict(&self, x: &[f64]) -> Result<ContingencyClass> {
                Ok(self.0.rows.iter().find(|r| r.features == x).unwrap().label)
            }
            fn dim(&self) -> usize {
                3
            }
        }
        let e = evaluate(&Oracle(&d), &d).unwrap();
        assert_eq!(e.accuracy, 1.0);
        for c in ContingencyClass::ALL {
            assert_eq!(e.confusion[c.index()].iter().sum::<usize>(), 10);
        }
        assert!(evaluate(&Oracle(&d), &d.subset(&[])).is_err());
    }

    #[test]
    fn random_guessing_scores_a_quarter() {
        let mut rng = crate::seed::rng(11);
        let truth: Vec<ContingencyClass> = (0..960).map(|i| ContingencyClass::ALL[i % 4]).collect();
        let pairs: Vec<_> = truth.iter().map(|&t| (t, ContingencyClass::ALL[rng.random_range(0..4)])).collect();
        let e = Evaluation::from_pairs(&pairs).unwrap();
        // 3.5 binomial standard deviations is about 0.049
        assert!((e.accuracy - 0.25).abs() <= 0.05, "{}", e.accuracy);
        assert_eq!(e.confusion.iter().flatten().sum::<usize>(), 960);
    }
}
