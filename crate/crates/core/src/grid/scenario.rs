use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat};

/// Contingency taxonomy: which of (A, B, C) a scenario perturbs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContingencyClass {
    Normal,
    Physical,
    Control,
    Measurement,
}

impl ContingencyClass {
    pub const ALL: [ContingencyClass; 4] = [
        ContingencyClass::Normal,
        ContingencyClass::Physical,
        ContingencyClass::Control,
        ContingencyClass::Measurement,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn label(self) -> &'static str {
        match self {
            ContingencyClass::Normal => "normal",
            ContingencyClass::Physical => "physical",
            ContingencyClass::Control => "control",
            ContingencyClass::Measurement => "measurement",
        }
    }
}

impl fmt::Display for ContingencyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.label())
    }
}

impl FromStr for ContingencyClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.label() == s)
            .ok_or_else(|| Error::Parse(format!("unknown class label {s:?}")))
    }
}

/// One switching mode: a state-space triple with its class label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioModel {
    pub id: usize,
    pub class: ContingencyClass,
    #[serde(with = "linalg::rows")]
    pub a: Mat,
    #[serde(with = "linalg::rows")]
    pub b: Mat,
    #[serde(with = "linalg::rows")]
    pub c: Mat,
    pub description: String,
    #[serde(default)]
    pub islanded: bool,
}

impl ScenarioModel {
    pub fn n_states(&self) -> usize {
        self.a.nrows()
    }

    pub fn n_inputs(&self) -> usize {
        self.b.ncols()
    }

    pub fn n_outputs(&self) -> usize {
        self.c.nrows()
    }

    pub fn check_dimensions(&self) -> Result<()> {
        let n = self.a.nrows();
        if !self.a.is_square() || self.b.nrows() != n || self.c.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "scenario {}: A {:?}, B {:?}, C {:?}",
                self.id,
                self.a.shape(),
                self.b.shape(),
                self.c.shape()
            )));
        }
        Ok(())
    }

    pub fn same_shape(&self, other: &ScenarioModel) -> bool {
        self.a.shape() == other.a.shape()
            && self.b.shape() == other.b.shape()
            && self.c.shape() == other.c.shape()
    }
}

fn check_gain(gain: f64) -> Result<()> {
    if gain.is_finite() && gain >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("fault gain must be finite and >= 0, got {gain}")))
    }
}

/// Control-channel fault: scales column `input` of B. A gain of zero models
/// packet loss on that input.
pub fn apply_control_fault(nominal: &ScenarioModel, input: usize, gain: f64) -> Result<ScenarioModel> {
    if input >= nominal.n_inputs() {
        return Err(Error::IndexOutOfRange {
            what: "input",
            index: input,
            len: nominal.n_inputs(),
        });
    }
    check_gain(gain)?;
    let mut b = nominal.b.clone();
    b.column_mut(input).scale_mut(gain);
    Ok(ScenarioModel {
        id: nominal.id,
        class: ContingencyClass::Control,
        a: nominal.a.clone(),
        b,
        c: nominal.c.clone(),
        description: if gain == 0.0 {
            format!("u{} loss", input + 1)
        } else {
            format!("u{} gain {gain:.3}", input + 1)
        },
        islanded: nominal.islanded,
    })
}

/// Measurement-channel fault: scales row `output` of C. A gain of zero
/// models sensor loss.
pub fn apply_measurement_fault(
    nominal: &ScenarioModel,
    output: usize,
    gain: f64,
) -> Result<ScenarioModel> {
    if output >= nominal.n_outputs() {
        return Err(Error::IndexOutOfRange {
            what: "output",
            index: output,
            len: nominal.n_outputs(),
        });
    }
    check_gain(gain)?;
    let mut c = nominal.c.clone();
    c.row_mut(output).scale_mut(gain);
    Ok(ScenarioModel {
        id: nominal.id,
        class: ContingencyClass::Measurement,
        a: nominal.a.clone(),
        b: nominal.b.clone(),
        c,
        description: if gain == 0.0 {
            format!("y{} loss", output + 1)
        } else {
            format!("y{} gain {gain:.3}", output + 1)
        },
        islanded: nominal.islanded,
    })
}
