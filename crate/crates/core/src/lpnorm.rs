//! The modular `I(f) = ∫ |f|^{p(x)} dx` and the Luxemburg norm.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent::ExponentFunction;
use crate::grid::{Interp, Mesh, SampledFunction};

pub const DEFAULT_TOL: f64 = 1e-10;

/// Exponents of `e` above this are treated as overflow.
const LN_OVERFLOW: f64 = 700.0;

/// Integration domain. `Unit` is `(0,1)` including the extrapolated head
/// below `x_min`; `Range` stays on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Domain {
    Unit,
    Range(f64, f64),
}

impl Domain {
    pub fn endpoints(&self) -> (f64, f64) {
        match *self {
            Domain::Unit => (0.0, 1.0),
            Domain::Range(a, b) => (a, b),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModularValue {
    /// `+inf` when `infinite` is set.
    #[serde(with = "crate::float")]
    pub value: f64,
    pub infinite: bool,
    /// Contribution of the extrapolated part below `x_min` (zero on a `Range`).
    #[serde(with = "crate::float")]
    pub truncation_bias: f64,
}

impl ModularValue {
    fn infinite() -> Self {
        Self { value: f64::INFINITY, infinite: true, truncation_bias: f64::INFINITY }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormValue {
    #[serde(with = "crate::float")]
    pub value: f64,
    /// Relative width of the final bracket.
    #[serde(with = "crate::float")]
    pub tol: f64,
    #[serde(with = "crate::float::pair")]
    pub bracket: (f64, f64),
}

impl NormValue {
    fn zero() -> Self {
        Self { value: 0.0, tol: 0.0, bracket: (0.0, 0.0) }
    }
}

/// `λ ↦ I(f/λ)` with `ln|f|` and `p` cached at the mesh nodes.
pub struct ModularFn {
    mesh: Arc<Mesh>,
    domain: Domain,
    ln_abs: Vec<f64>,
    ps: Vec<f64>,
    /// Node range `[i0, i1)` touched by the domain.
    span: (usize, usize),
    sup_abs: f64,
}

impl ModularFn {
    pub fn new(f: &SampledFunction, p: &ExponentFunction, domain: Domain) -> Result<Self> {
        let mesh = f.mesh().clone();
        let (a, b) = domain.endpoints();
        let x_min = mesh.x_min();
        if !((a == 0.0 || a >= x_min) && a < b && b <= 1.0) {
            return Err(Error::OutsideGrid { a, b, x_min });
        }
        let ln_abs = f.values().iter().map(|v| v.abs().ln()).collect();
        let ps = mesh.xs().iter().zip(mesh.sides()).map(|(&x, &s)| p.value(x, s)).collect();
        let lo = mesh.cell_of(a.max(x_min));
        let hi = (mesh.first_at_or_after(b) + 1).min(mesh.len());
        let sup_abs = f.values()[lo..hi].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(Self { mesh, domain, ln_abs, ps, span: (lo, hi), sup_abs })
    }

    /// Same function and exponent on another domain, reusing the cached samples.
    pub fn with_domain(&self, domain: Domain) -> Result<Self> {
        let (a, b) = domain.endpoints();
        let mesh = &self.mesh;
        let x_min = mesh.x_min();
        if !((a == 0.0 || a >= x_min) && a < b && b <= 1.0) {
            return Err(Error::OutsideGrid { a, b, x_min });
        }
        let lo = mesh.cell_of(a.max(x_min));
        let hi = (mesh.first_at_or_after(b) + 1).min(mesh.len());
        let sup_abs = self.ln_abs[lo..hi].iter().fold(0.0f64, |m, v| m.max(v.exp()));
        Ok(Self {
            mesh: mesh.clone(),
            domain,
            ln_abs: self.ln_abs.clone(),
            ps: self.ps.clone(),
            span: (lo, hi),
            sup_abs,
        })
    }

    pub fn sup_abs(&self) -> f64 {
        self.sup_abs
    }

    pub fn at(&self, lambda: f64) -> ModularValue {
        let ln_l = lambda.ln();
        let (i0, i1) = self.span;
        let mut h = vec![0.0; self.ps.len()];
        let nodes = self.ln_abs[i0..i1].iter().zip(&self.ps[i0..i1]);
        for (slot, (&lf, &p)) in h[i0..i1].iter_mut().zip(nodes) {
            if lf == f64::NEG_INFINITY {
                continue;
            }
            let e = p * (lf - ln_l);
            if e > LN_OVERFLOW {
                return ModularValue::infinite();
            }
            *slot = e.exp();
        }
        let h =
            SampledFunction::new(self.mesh.clone(), h, Interp::PowerLaw).expect("nonnegative finite samples");
        let (a, b) = self.domain.endpoints();
        let head = if a == 0.0 {
            match self.head(ln_l) {
                Some(v) => v,
                None => return ModularValue::infinite(),
            }
        } else {
            0.0
        };
        let body = h.integrate(a.max(self.mesh.x_min()), b).expect("range checked");
        let value = head + body;
        if !value.is_finite() {
            return ModularValue::infinite();
        }
        ModularValue { value, infinite: false, truncation_bias: head }
    }

    /// Power-law head below `x_min`, fitted in log space so that underflow
    /// cannot hide a divergent exponent. `None` when not integrable.
    fn head(&self, ln_l: f64) -> Option<f64> {
        let xs = self.mesh.xs();
        let j = (1..xs.len()).find(|&j| xs[j] > xs[0])?;
        let (l0, l1) = (self.ln_abs[0], self.ln_abs[j]);
        if l0 == f64::NEG_INFINITY || l1 == f64::NEG_INFINITY {
            return Some(0.0);
        }
        let e0 = self.ps[0] * (l0 - ln_l);
        let e1 = self.ps[j] * (l1 - ln_l);
        let s = (e1 - e0) / (xs[j] / xs[0]).ln();
        if s <= -1.0 {
            return None;
        }
        Some(e0.exp() * xs[0] / (1.0 + s))
    }

    /// Bisection in `ln λ` for `inf { λ : I(f/λ) <= 1 }`.
    pub fn norm(&self, tol: f64) -> Result<NormValue> {
        if tol.is_nan() || tol <= 0.0 {
            return Err(Error::Parameter(format!("tol = {tol} must be positive")));
        }
        if self.sup_abs == 0.0 {
            return Ok(NormValue::zero());
        }
        let below = |l: f64| {
            let m = self.at(l);
            !m.infinite && m.value <= 1.0
        };
        let mut hi = self.sup_abs.max(1.0);
        while !below(hi) {
            hi *= 256.0;
            if hi > 1e250 {
                return Err(Error::UnboundedNorm);
            }
        }
        let mut lo = hi * 2f64.powi(-60);
        while below(lo) {
            hi = lo;
            lo *= 2f64.powi(-60);
            if lo < 1e-290 {
                return Ok(NormValue::zero());
            }
        }
        while (hi - lo) > tol * hi {
            let mid = (0.5 * (lo.ln() + hi.ln())).exp();
            if mid <= lo || mid >= hi {
                break;
            }
            if below(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(NormValue { value: hi, tol: (hi - lo) / hi, bracket: (lo, hi) })
    }
}

pub fn modular(f: &SampledFunction, p: &ExponentFunction, domain: Domain) -> Result<ModularValue> {
    Ok(ModularFn::new(f, p, domain)?.at(1.0))
}

pub fn luxemburg_norm(
    f: &SampledFunction,
    p: &ExponentFunction,
    domain: Domain,
    tol: f64,
) -> Result<NormValue> {
    ModularFn::new(f, p, domain)?.norm(tol)
}

/// Luxemburg norm of `x ↦ 1/x` on `(a, delta)`.
pub fn norm_of_inverse_x(
    p: &ExponentFunction,
    mesh: &Arc<Mesh>,
    a: f64,
    delta: f64,
    tol: f64,
) -> Result<NormValue> {
    let f = inverse_x(mesh)?;
    luxemburg_norm(&f, p, Domain::Range(a, delta), tol)
}

pub(crate) fn inverse_x(mesh: &Arc<Mesh>) -> Result<SampledFunction> {
    SampledFunction::from_fn(mesh.clone(), Interp::PowerLaw, |x, _| 1.0 / x)
}

/// Outcome of checking the modular against powers of the norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BracketReport {
    #[serde(with = "crate::float")]
    pub norm: f64,
    #[serde(with = "crate::float")]
    pub modular: f64,
    #[serde(with = "crate::float")]
    pub p_minus: f64,
    #[serde(with = "crate::float")]
    pub p_plus: f64,
    /// Lower and upper bound for the modular implied by the norm.
    #[serde(with = "crate::float")]
    pub lower: f64,
    #[serde(with = "crate::float")]
    pub upper: f64,
    #[serde(with = "crate::float")]
    pub slack: f64,
    pub pass: bool,
}

/// `‖f‖^{p+} <= I <= ‖f‖^{p-}` when `‖f‖ <= 1`, reversed otherwise.
pub fn bracket_check(
    f: &SampledFunction,
    p: &ExponentFunction,
    domain: Domain,
    tol: f64,
) -> Result<BracketReport> {
    let m = ModularFn::new(f, p, domain)?;
    let norm = m.norm(tol)?.value;
    let modular = m.at(1.0).value;
    let (a, b) = domain.endpoints();
    let bounds = p.bounds(a, b, f.mesh().grid())?;
    let (p_minus, p_plus) = (bounds.lower, bounds.upper);
    let (lower, upper) = if norm <= 1.0 {
        (norm.powf(p_plus), norm.powf(p_minus))
    } else {
        (norm.powf(p_minus), norm.powf(p_plus))
    };
    // Norm error `tol` becomes `p+ tol` in the powers; quadrature adds a little.
    let slack = 1e-8 + 10.0 * p_plus * tol;
    let pass = modular >= lower * (1.0 - slack) && modular <= upper * (1.0 + slack);
    Ok(BracketReport { norm, modular, p_minus, p_plus, lower, upper, slack, pass })
}
