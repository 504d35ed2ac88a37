//! Numerical toolkit for the Hardy averaging operator on variable-exponent
//! Lebesgue spaces over (0,1).
//!
//! The crate is organised bottom-up:
//!
//! * [`exponent`]: exponent functions `p(x)`, their conjugates and the kernel `phi`.
//! * [`grid`]: logarithmic grids, sampled functions and quadrature in `ln x`.
//! * [`lpnorm`]: the modular and the Luxemburg norm.
//! * [`hardy`]: the averaging operator, Rayleigh quotients and test families.
//! * [`criteria`]: boundedness criteria, trend verdicts and the equivalence audit.
//! * [`cli`]: scenario configs, the built-in catalog and report emission.

pub mod cli;
pub mod criteria;
pub mod error;
pub mod exponent;
mod float;
pub mod grid;
pub mod hardy;
pub mod lpnorm;

pub use error::{Error, Result};
pub use exponent::{ExponentFunction, MonotonicityClass, Side};
pub use grid::{Interp, LogGrid, Mesh, SampledFunction};
pub use lpnorm::{Domain, ModularValue, NormValue};
