//! The ten weights of a forward or backward biased operator pair and the
//! on-disk weights file.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Forward => "forward",
            Direction::Backward => "backward",
        }
    }
}

/// Weights of a biased operator pair. The forward pair reads
///
/// ```text
/// DF_i  + beta_i DF_{i+1} + theta_i h D2F_{i+1}       = (a_i u_{i-1} + b_i u_i + c_i u_{i+1}) / h
/// D2F_i + beta_ii DF_{i+1} / h + theta_ii D2F_{i+1}   = (a_ii u_{i-1} + b_ii u_i + c_ii u_{i+1}) / h^2
/// ```
///
/// and the backward pair is the same with `i+1` replaced by `i-1` on the left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrefactoredWeights {
    pub direction: Direction,
    pub beta_i: f64,
    pub theta_i: f64,
    pub a_i: f64,
    pub b_i: f64,
    pub c_i: f64,
    pub beta_ii: f64,
    pub theta_ii: f64,
    pub a_ii: f64,
    pub b_ii: f64,
    pub c_ii: f64,
}

pub const WEIGHT_NAMES: [&str; 10] = ["betaI", "thetaI", "aI", "bI", "cI", "betaII", "thetaII", "aII", "bII", "cII"];

impl PrefactoredWeights {
    pub fn zeros(direction: Direction) -> Self {
        Self::from_array(direction, [0.0; 10])
    }

    /// Coordinates in the order `betaI, thetaI, aI, bI, cI, betaII, thetaII, aII, bII, cII`.
    pub fn from_array(direction: Direction, x: [f64; 10]) -> Self {
        Self {
            direction,
            beta_i: x[0],
            theta_i: x[1],
            a_i: x[2],
            b_i: x[3],
            c_i: x[4],
            beta_ii: x[5],
            theta_ii: x[6],
            a_ii: x[7],
            b_ii: x[8],
            c_ii: x[9],
        }
    }

    pub fn to_array(&self) -> [f64; 10] {
        [
            self.beta_i,
            self.theta_i,
            self.a_i,
            self.b_i,
            self.c_i,
            self.beta_ii,
            self.theta_ii,
            self.a_ii,
            self.b_ii,
            self.c_ii,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    pub fn expect(&self, direction: Direction) -> Result<()> {
        if self.direction == direction {
            Ok(())
        } else {
            Err(Error::WrongDirection { got: self.direction.as_str(), expected: direction.as_str() })
        }
    }

    /// Spectral radius of the sweep recursion on `(D, h D2)`, i.e. of
    /// `[[beta_i, theta_i], [beta_ii, theta_ii]]`. The sweep is stable iff it is below one.
    pub fn recursion_radius(&self) -> f64 {
        let tr = self.beta_i + self.theta_ii;
        let det = self.beta_i * self.theta_ii - self.theta_i * self.beta_ii;
        let disc = tr * tr - 4.0 * det;
        if disc >= 0.0 {
            let s = disc.sqrt();
            ((tr + s) / 2.0).abs().max(((tr - s) / 2.0).abs())
        } else {
            det.abs().sqrt()
        }
    }
}

/// Reflects forward weights through `x -> -x` to obtain the backward operator.
///
/// First derivatives are odd under reflection and second derivatives even, so
/// the cross-coupling weights `theta_i` and `beta_ii` change sign, the first-row
/// stencil is reversed and negated, and the second-row stencil is reversed.
/// Applying the map twice returns the input.
pub fn mirror_backward(fwd: &PrefactoredWeights) -> PrefactoredWeights {
    reflect(
        fwd,
        match fwd.direction {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        },
    )
}

fn reflect(w: &PrefactoredWeights, direction: Direction) -> PrefactoredWeights {
    PrefactoredWeights {
        direction,
        beta_i: w.beta_i,
        theta_i: -w.theta_i,
        a_i: -w.c_i,
        b_i: -w.b_i,
        c_i: -w.a_i,
        beta_ii: -w.beta_ii,
        theta_ii: w.theta_ii,
        a_ii: w.c_ii,
        b_ii: w.b_ii,
        c_ii: w.a_ii,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Ccd6,
    Ccd8,
}

impl Target {
    pub fn as_str(self) -> &'static str {
        match self {
            Target::Ccd6 => "ccd6",
            Target::Ccd8 => "ccd8",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemKind {
    Printed,
    Spectral,
}

pub const WEIGHTS_SCHEMA: &str = "prefactored-weights/1";

/// Serialized form of a weights file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsFile {
    pub schema: String,
    pub target: Target,
    pub direction: Direction,
    #[serde(rename = "betaI")]
    pub beta_i: f64,
    #[serde(rename = "thetaI")]
    pub theta_i: f64,
    #[serde(rename = "aI")]
    pub a_i: f64,
    #[serde(rename = "bI")]
    pub b_i: f64,
    #[serde(rename = "cI")]
    pub c_i: f64,
    #[serde(rename = "betaII")]
    pub beta_ii: f64,
    #[serde(rename = "thetaII")]
    pub theta_ii: f64,
    #[serde(rename = "aII")]
    pub a_ii: f64,
    #[serde(rename = "bII")]
    pub b_ii: f64,
    #[serde(rename = "cII")]
    pub c_ii: f64,
    pub residual_norm: f64,
    pub system: SystemKind,
}

impl WeightsFile {
    pub fn new(w: &PrefactoredWeights, target: Target, system: SystemKind, residual_norm: f64) -> Self {
        Self {
            schema: WEIGHTS_SCHEMA.to_string(),
            target,
            direction: w.direction,
            beta_i: w.beta_i,
            theta_i: w.theta_i,
            a_i: w.a_i,
            b_i: w.b_i,
            c_i: w.c_i,
            beta_ii: w.beta_ii,
            theta_ii: w.theta_ii,
            a_ii: w.a_ii,
            b_ii: w.b_ii,
            c_ii: w.c_ii,
            residual_norm,
            system,
        }
    }

    pub fn weights(&self) -> PrefactoredWeights {
        PrefactoredWeights {
            direction: self.direction,
            beta_i: self.beta_i,
            theta_i: self.theta_i,
            a_i: self.a_i,
            b_i: self.b_i,
            c_i: self.c_i,
            beta_ii: self.beta_ii,
            theta_ii: self.theta_ii,
            a_ii: self.a_ii,
            b_ii: self.b_ii,
            c_ii: self.c_ii,
        }
    }

    /// JSON text. `serde_json` emits the shortest decimal that round-trips
    /// exactly, which never needs more than 17 significant digits.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("weights serialize");
        s.push('\n');
        s
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: WeightsFile = serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))?;
        if file.schema != WEIGHTS_SCHEMA {
            return Err(Error::format(
                path,
                format!("unsupported schema `{}`, expected `{WEIGHTS_SCHEMA}`", file.schema),
            ));
        }
        if !file.weights().is_finite() {
            return Err(Error::format(path, "weights must be finite"));
        }
        Ok(file)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }
}
