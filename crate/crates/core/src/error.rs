use std::fmt;

use thiserror::Error;

/// Which edge of the dynamic-pressure window a state crossed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    /// `Pi <= -p`: the translational temperature scale `p + Pi` is no longer positive.
    Lower,
    /// `Pi >= (D - 3) p / 3`: the internal-energy scale is no longer positive.
    Upper,
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Lower => f.write_str("lower (Pi > -p)"),
            Bound::Upper => f.write_str("upper (Pi < (D-3)p/3)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Et6Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid gas specification: {0}")]
    InvalidGas(String),

    #[error("reconstruction error: {0}")]
    Reconstruction(String),

    #[error("inadmissible state: {bound} bound violated (Pi/p = {ratio:.6e}, margin {margin:.6e})")]
    Inadmissible { bound: Bound, ratio: f64, margin: f64 },

    #[error("multiplier {multiplier} loses positivity: {bound} bound violated (Pi/p = {ratio:.6e})")]
    MultiplierPositivity {
        multiplier: &'static str,
        bound: Bound,
        ratio: f64,
    },

    #[error("range error: {0}")]
    Range(String),

    #[error("oracle error: {0}")]
    Oracle(String),

    #[error("verification failure: {} offending entr{}: {}", offending.len(), if offending.len() == 1 { "y" } else { "ies" }, offending.join(", "))]
    Verification { offending: Vec<String> },

    #[error("hyperbolicity lost: complex eigenvalue pair with |Im| = {max_imag:.3e} (margin {margin:.3e})")]
    HyperbolicityLoss { max_imag: f64, margin: f64 },

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("solver aborted: {0}")]
    SolverAbort(String),
}

pub type Result<T> = std::result::Result<T, Et6Error>;
