use serde::{Deserialize, Serialize};

use crate::control::controllability_matrix;
use crate::error::{Error, Result};
use crate::linalg::{self, Mat};

fn check(a: &Mat, other_rows: usize, what: &str) -> Result<()> {
    if !a.is_square() || other_rows != a.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "{what} with A {:?} and {other_rows} matching rows",
            a.shape()
        )));
    }
    Ok(())
}

/// `[B, AB, …, A^{n−1}B]` and its numerical rank.
pub fn controllability_rank(a: &Mat, b: &Mat) -> Result<(Mat, usize)> {
    check(a, b.nrows(), "controllability")?;
    let m = controllability_matrix(a, b);
    let r = linalg::rank(&m, a.nrows());
    Ok((m, r))
}

/// `[C; CA; …; CA^{n−1}]` and its numerical rank.
pub fn observability_rank(a: &Mat, c: &Mat) -> Result<(Mat, usize)> {
    check(a, c.ncols(), "observability")?;
    let m = controllability_matrix(&a.transpose(), &c.transpose()).transpose();
    let r = linalg::rank(&m, a.nrows());
    Ok((m, r))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorRank {
    pub output: usize,
    /// Rank with this sensor's row zeroed.
    pub rank_without: usize,
    /// Rank from this sensor alone.
    pub rank_alone: usize,
    pub drop: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankAudit {
    pub n: usize,
    pub controllability: usize,
    pub observability: usize,
    pub sensors: Vec<SensorRank>,
}

impl RankAudit {
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "# rank audit\nn={}\ncontrollability={}\nobservability={}\noutput,rank_without,rank_alone,drop\n",
            self.n, self.controllability, self.observability
        );
        for s in &self.sensors {
            out.push_str(&format!("{},{},{},{}\n", s.output + 1, s.rank_without, s.rank_alone, s.drop));
        }
        out
    }
}

/// Ranks of (A, B) and (A, C), then the observability rank with each sensor
/// removed and with each sensor on its own.
pub fn rank_audit(a: &Mat, b: &Mat, c: &Mat) -> Result<RankAudit> {
    let (_, controllability) = controllability_rank(a, b)?;
    let (_, observability) = observability_rank(a, c)?;
    let sensors = (0..c.nrows())
        .map(|i| {
            let mut without = c.clone();
            without.row_mut(i).fill(0.0);
            let rank_without = observability_rank(a, &without)?.1;
            let alone = c.rows(i, 1).into_owned();
            let rank_alone = observability_rank(a, &alone)?.1;
            Ok(SensorRank {
                output: i,
                rank_without,
                rank_alone,
                drop: observability - rank_without.min(observability),
            })
        })
        .collect::<Result<_>>()?;
    Ok(RankAudit {
        n: a.nrows(),
        controllability,
        observability,
        sensors,
    })
}
