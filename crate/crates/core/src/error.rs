use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A point handed to the library had the wrong length or a non-finite coordinate.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// The black box returned a non-finite value.
    #[error("oracle returned non-finite value {value} at a point of dimension {}", point.len())]
    OracleFailure { point: Vec<f64>, value: f64 },

    /// Re-evaluating a trial point gave a different answer than the batch did.
    #[error("oracle is not pure: trial point {index} gave {first} then {second}")]
    PurityViolation {
        index: usize,
        first: f64,
        second: f64,
    },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("invalid local model: {0}")]
    InvalidModel(String),

    /// The inner solver could not certify the requested model gap.
    #[error("inexact subproblem solve stopped after {iters} iterations with gap bound {best_gap:e} > {epsilon:e}")]
    InexactnessFailure {
        best_gap: f64,
        epsilon: f64,
        iters: usize,
        point: Vec<f64>,
    },

    /// A custom proximal operator failed the nonexpansiveness probe.
    #[error("custom proximal operator is expansive: ratio {ratio}")]
    ExpansiveProx { ratio: f64 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be positive and finite",
        })
    }
}

pub(crate) fn check_point(x: &[f64], dimension: usize) -> Result<()> {
    if x.len() != dimension {
        return Err(Error::InvalidInput(format!(
            "point has length {}, expected {}",
            x.len(),
            dimension
        )));
    }
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "coordinate {} is not finite ({})",
            i, x[i]
        )));
    }
    Ok(())
}
