use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("x = {0} is outside the open interval (0, 1)")]
    Domain(f64),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("interval [{a}, {b}] is not inside the grid range [{x_min}, 1]")]
    OutsideGrid { a: f64, b: f64, x_min: f64 },

    #[error("head of the integrand is not integrable at 0 (fitted exponent {exponent:.4} <= -1)")]
    DivergentHead { exponent: f64 },

    #[error("phi overflows at t = {0}")]
    Overflow(f64),

    #[error("modular is infinite for every lambda in the search range")]
    UnboundedNorm,

    #[error("Rayleigh quotient undefined: the test function has zero norm")]
    ZeroNorm,

    #[error("only {found} grid points fall in ({lo}, {hi}); at least {needed} are required")]
    Resolution { lo: f64, hi: f64, found: usize, needed: usize },

    #[error("config parse error: {0}")]
    ConfigParse(String),

    #[error("config validation failed:\n{}", .0.iter().map(|v| format!("  - {v}")).collect::<Vec<_>>().join("\n"))]
    ConfigInvalid(Vec<Violation>),

    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serialize(String),
}

/// A single validation failure, addressed by a dotted field path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
