//! Exponent functions `p : (0,1) -> [1, inf)` with bounded supremum.
//!
//! Every family is validated at construction, so an [`ExponentFunction`]
//! always satisfies `1 <= p(x) <= p+ < inf`. Families with jumps are
//! right-continuous; [`Side::Left`] asks for the limit from the left.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::LogGrid;

/// Which one-sided value to take at a point where a function may jump.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// The parametric families an exponent can be drawn from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    Constant {
        p0: f64,
    },
    /// `p0 ± c / ln(1/x)^alpha` for `x < 1/e`, clamped to `p0 ± c` above.
    LogPerturbed {
        p0: f64,
        c: f64,
        alpha: f64,
        sign: Sign,
    },
    /// `p0 + c ln ln(1/x) / ln(1/x)` for `x < e^-e`, clamped to `p0 + c/e` above.
    LogLogPerturbed {
        p0: f64,
        c: f64,
    },
    /// `values[i]` on `[breakpoints[i-1], breakpoints[i])`.
    PiecewiseConstant {
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    },
    /// Linear in `x` between breakpoints, constant outside them.
    PiecewiseLinear {
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    },
    /// `p0 + sum of jumps[k] over scales[k] <= x`.
    DyadicJump {
        p0: f64,
        scales: Vec<f64>,
        jumps: Vec<f64>,
    },
    /// Linear in `(ln x, p)` between samples, constant outside them.
    Tabulated {
        xs: Vec<f64>,
        ps: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFunction {
    family: Family,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Monotonicity {
    Nonincreasing,
    Nondecreasing,
    Nonmonotone,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityClass {
    pub class: Monotonicity,
    /// Right end `eps` of the interval `(0, eps)` the class is certified on.
    #[serde(with = "crate::float")]
    pub certified_on: f64,
    /// Both orders hold.
    pub constant: bool,
    /// Derived from parameters rather than from a sample scan.
    pub exact: bool,
    /// Points inspected when the class is grid-certified.
    pub certification_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    #[serde(with = "crate::float")]
    pub lower: f64,
    #[serde(with = "crate::float")]
    pub upper: f64,
    pub approximate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OriginLimit {
    #[serde(with = "crate::float")]
    pub value: f64,
    pub approximate: bool,
}

const E_INV: f64 = 0.367_879_441_171_442_33; // e^-1

fn loglog_clamp() -> f64 {
    (-std::f64::consts::E).exp()
}

fn check_real(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() {
        return Err(Error::Parameter(format!("{name} must be finite, got {v}")));
    }
    Ok(())
}

fn check_exponent_value(name: &str, v: f64) -> Result<()> {
    check_real(name, v)?;
    if v < 1.0 {
        return Err(Error::Parameter(format!("{name} < 1 (got {v})")));
    }
    Ok(())
}

fn check_increasing_in_unit(name: &str, xs: &[f64]) -> Result<()> {
    for (i, &x) in xs.iter().enumerate() {
        check_real(name, x)?;
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::Parameter(format!("{name}[{i}] = {x} is outside (0,1)")));
        }
        if i > 0 && xs[i - 1] >= x {
            return Err(Error::Parameter(format!("{name} must be strictly increasing")));
        }
    }
    Ok(())
}

impl ExponentFunction {
    pub fn new(family: Family) -> Result<Self> {
        match &family {
            Family::Constant { p0 } => check_exponent_value("p0", *p0)?,
            Family::LogPerturbed { p0, c, alpha, sign } => {
                check_exponent_value("p0", *p0)?;
                check_real("c", *c)?;
                check_real("alpha", *alpha)?;
                if *c < 0.0 {
                    return Err(Error::Parameter("c must be nonnegative; use sign".into()));
                }
                if *alpha <= 0.0 {
                    return Err(Error::Parameter(format!("alpha must be positive (got {alpha})")));
                }
                if *sign == Sign::Minus {
                    check_exponent_value("p0 - c", p0 - c)?;
                }
            }
            Family::LogLogPerturbed { p0, c } => {
                check_exponent_value("p0", *p0)?;
                check_real("c", *c)?;
                // ln L / L ranges over (0, 1/e] for L >= e.
                check_exponent_value("p0 + min(0, c)/e", p0 + c.min(0.0) * E_INV)?;
            }
            Family::PiecewiseConstant { breakpoints, values } => {
                check_increasing_in_unit("breakpoints", breakpoints)?;
                if values.len() != breakpoints.len() + 1 {
                    return Err(Error::Parameter(format!(
                        "piecewise-constant needs {} values for {} breakpoints, got {}",
                        breakpoints.len() + 1,
                        breakpoints.len(),
                        values.len()
                    )));
                }
                for v in values {
                    check_exponent_value("values", *v)?;
                }
            }
            Family::PiecewiseLinear { breakpoints, values } => {
                check_increasing_in_unit("breakpoints", breakpoints)?;
                if breakpoints.is_empty() || values.len() != breakpoints.len() {
                    return Err(Error::Parameter(
                        "piecewise-linear needs one value per breakpoint (at least one)".into(),
                    ));
                }
                for v in values {
                    check_exponent_value("values", *v)?;
                }
            }
            Family::DyadicJump { p0, scales, jumps } => {
                check_exponent_value("p0", *p0)?;
                if scales.len() != jumps.len() {
                    return Err(Error::Parameter("scales and jumps differ in length".into()));
                }
                let mut rev = scales.clone();
                rev.reverse();
                check_increasing_in_unit("scales (reversed)", &rev)
                    .map_err(|_| Error::Parameter("scales must be strictly decreasing in (0,1)".into()))?;
                let mut level = *p0;
                // Jumps are crossed from the smallest scale upward.
                for (k, g) in jumps.iter().enumerate().rev() {
                    check_real("jumps", *g)?;
                    level += g;
                    check_exponent_value(&format!("p after jump {k}"), level)?;
                }
            }
            Family::Tabulated { xs, ps } => {
                check_increasing_in_unit("xs", xs)?;
                if xs.len() < 2 || xs.len() != ps.len() {
                    return Err(Error::Parameter(
                        "tabulated exponent needs at least two (x, p) samples".into(),
                    ));
                }
                for v in ps {
                    check_exponent_value("ps", *v)?;
                }
            }
        }
        Ok(Self { family })
    }

    pub fn constant(p0: f64) -> Result<Self> {
        Self::new(Family::Constant { p0 })
    }

    pub fn log_perturbed(p0: f64, c: f64, alpha: f64, sign: Sign) -> Result<Self> {
        Self::new(Family::LogPerturbed { p0, c, alpha, sign })
    }

    pub fn loglog_perturbed(p0: f64, c: f64) -> Result<Self> {
        Self::new(Family::LogLogPerturbed { p0, c })
    }

    pub fn piecewise_constant(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::new(Family::PiecewiseConstant { breakpoints, values })
    }

    pub fn piecewise_linear(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::new(Family::PiecewiseLinear { breakpoints, values })
    }

    pub fn dyadic_jump(p0: f64, scales: Vec<f64>, jumps: Vec<f64>) -> Result<Self> {
        Self::new(Family::DyadicJump { p0, scales, jumps })
    }

    /// The built-in divergence witness: `p0 = 1.5`, jumps `2^{-k/2}` at
    /// `x_k = 2^{-2^k}`, `k = 1..5`.
    pub fn dyadic_jump_default() -> Self {
        let ks = 1..=5;
        let scales = ks.clone().map(|k| 2f64.powi(-(1 << k))).collect();
        let jumps = ks.map(|k| 2f64.powf(-(k as f64) / 2.0)).collect();
        Self::dyadic_jump(1.5, scales, jumps).expect("default dyadic jump is admissible")
    }

    pub fn tabulated(xs: Vec<f64>, ps: Vec<f64>) -> Result<Self> {
        Self::new(Family::Tabulated { xs, ps })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// `p(x)` for `x` in the open unit interval.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::Domain(x));
        }
        Ok(self.value(x, Side::Right))
    }

    /// One-sided value of `p` at any `x` in `[0, 1]`; `x = 0` gives the limit at the origin.
    pub fn value(&self, x: f64, side: Side) -> f64 {
        match &self.family {
            Family::Constant { p0 } => *p0,
            Family::LogPerturbed { p0, c, alpha, sign } => {
                if x <= 0.0 {
                    return *p0;
                }
                let l = -x.ln();
                let pert = if l <= 1.0 { *c } else { c / l.powf(*alpha) };
                p0 + sign.factor() * pert
            }
            Family::LogLogPerturbed { p0, c } => {
                if x <= 0.0 {
                    return *p0;
                }
                let l = -x.ln();
                let l = l.max(std::f64::consts::E);
                p0 + c * l.ln() / l
            }
            Family::PiecewiseConstant { breakpoints, values } => {
                let idx = match side {
                    Side::Right => breakpoints.partition_point(|&b| b <= x),
                    Side::Left => breakpoints.partition_point(|&b| b < x),
                };
                values[idx]
            }
            Family::PiecewiseLinear { breakpoints, values } => {
                let n = breakpoints.len();
                if x <= breakpoints[0] {
                    return values[0];
                }
                if x >= breakpoints[n - 1] {
                    return values[n - 1];
                }
                let i = breakpoints.partition_point(|&b| b <= x);
                let (x0, x1) = (breakpoints[i - 1], breakpoints[i]);
                let w = (x - x0) / (x1 - x0);
                values[i - 1] + w * (values[i] - values[i - 1])
            }
            Family::DyadicJump { p0, scales, jumps } => {
                let crossed = |s: f64| match side {
                    Side::Right => x >= s,
                    Side::Left => x > s,
                };
                p0 + scales.iter().zip(jumps).filter(|(s, _)| crossed(**s)).map(|(_, g)| g).sum::<f64>()
            }
            Family::Tabulated { xs, ps } => {
                let n = xs.len();
                if x <= xs[0] {
                    return ps[0];
                }
                if x >= xs[n - 1] {
                    return ps[n - 1];
                }
                let i = xs.partition_point(|&b| b <= x);
                let (u0, u1) = (xs[i - 1].ln(), xs[i].ln());
                let w = (x.ln() - u0) / (u1 - u0);
                ps[i - 1] + w * (ps[i] - ps[i - 1])
            }
        }
    }

    /// Points in (0,1) where `p` jumps.
    pub fn jumps(&self) -> Vec<f64> {
        match &self.family {
            Family::PiecewiseConstant { breakpoints, values } => breakpoints
                .iter()
                .zip(values.windows(2))
                .filter(|(_, w)| w[0] != w[1])
                .map(|(b, _)| *b)
                .collect(),
            Family::DyadicJump { scales, jumps, .. } => {
                let mut v: Vec<f64> =
                    scales.iter().zip(jumps).filter(|(_, g)| **g != 0.0).map(|(s, _)| *s).collect();
                v.sort_by(f64::total_cmp);
                v
            }
            _ => Vec::new(),
        }
    }

    /// Points where `p` is continuous but not smooth (clamps, linear breakpoints, samples).
    pub fn kinks(&self) -> Vec<f64> {
        match &self.family {
            Family::LogPerturbed { .. } => vec![E_INV],
            Family::LogLogPerturbed { .. } => vec![loglog_clamp()],
            Family::PiecewiseLinear { breakpoints, .. } => breakpoints.clone(),
            Family::Tabulated { xs, .. } => xs.clone(),
            _ => Vec::new(),
        }
    }

    /// `1/p'(x) = 1 - 1/p(x)`; zero exactly when `p(x) = 1`.
    pub fn conjugate_reciprocal(&self, x: f64) -> Result<f64> {
        Ok(conj_recip(self.eval(x)?))
    }

    pub(crate) fn conjugate_reciprocal_at(&self, x: f64, side: Side) -> f64 {
        conj_recip(self.value(x, side))
    }

    /// `phi(t) = t^{-1/p'(t)}`, assembled in log space.
    pub fn phi(&self, t: f64) -> Result<f64> {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::Domain(t));
        }
        let v = self.ln_phi(t, Side::Right).exp();
        if !v.is_finite() {
            return Err(Error::Overflow(t));
        }
        Ok(v)
    }

    /// `ln phi(t) = (1 - 1/p(t)) ln(1/t)`.
    pub fn ln_phi(&self, t: f64, side: Side) -> f64 {
        self.conjugate_reciprocal_at(t, side) * (-t.ln())
    }

    /// Infimum and supremum of `p` over the open interval `(a, b)`.
    ///
    /// Symbolic families are monotone between their jumps and kinks, so the
    /// extremes are found among the one-sided values at those points and at
    /// the interval ends. Tabulated exponents use the grid and are flagged.
    pub fn bounds(&self, a: f64, b: f64, grid: &LogGrid) -> Result<Bounds> {
        if !(0.0 <= a && a < b && b <= 1.0) {
            return Err(Error::Parameter(format!("bounds interval ({a}, {b}) is not inside (0,1)")));
        }
        let mut vals = vec![self.value(a, Side::Right), self.value(b, Side::Left)];
        let approximate = matches!(self.family, Family::Tabulated { .. });
        let mut inner: Vec<f64> = self.jumps();
        inner.extend(self.kinks());
        if approximate {
            inner.extend(grid.points().iter().copied());
        }
        for x in inner.into_iter().filter(|&x| x > a && x < b) {
            vals.push(self.value(x, Side::Left));
            vals.push(self.value(x, Side::Right));
        }
        let lower = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let upper = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Bounds { lower, upper, approximate })
    }

    /// `p+` over the whole unit interval.
    pub fn sup(&self) -> f64 {
        self.bounds_unit().upper
    }

    /// `p-` over the whole unit interval.
    pub fn inf(&self) -> f64 {
        self.bounds_unit().lower
    }

    fn bounds_unit(&self) -> Bounds {
        // Tabulated values are attained at samples, so a tiny grid suffices.
        let grid = LogGrid::new(1e-3, 16).expect("static grid");
        self.bounds(0.0, 1.0, &grid).expect("unit interval")
    }

    /// `p(0)`, the limit at the origin.
    pub fn limit_at_origin(&self) -> OriginLimit {
        OriginLimit {
            value: self.value(0.0, Side::Right),
            approximate: matches!(self.family, Family::Tabulated { .. }),
        }
    }

    /// Monotonicity class of `p` on `(0, eps)`.
    pub fn classify_monotonicity(&self, eps: f64) -> Result<MonotonicityClass> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::Parameter(format!("eps = {eps} must lie in (0,1]")));
        }
        let exact = |class, constant| MonotonicityClass {
            class,
            certified_on: eps,
            constant,
            exact: true,
            certification_points: 0,
        };
        let by_sign = |s: f64| {
            if s > 0.0 {
                exact(Monotonicity::Nondecreasing, false)
            } else if s < 0.0 {
                exact(Monotonicity::Nonincreasing, false)
            } else {
                exact(Monotonicity::Nondecreasing, true)
            }
        };
        let class = match &self.family {
            Family::Constant { .. } => exact(Monotonicity::Nondecreasing, true),
            Family::LogPerturbed { c, sign, .. } => by_sign(c * sign.factor()),
            // ln L / L decreases for L > e and the clamp is constant, so the sign of c decides.
            Family::LogLogPerturbed { c, .. } => by_sign(*c),
            Family::PiecewiseConstant { breakpoints, values } => {
                let k = breakpoints.partition_point(|&b| b < eps);
                let (class, constant) = order_of(&values[..=k]);
                exact(class, constant)
            }
            Family::PiecewiseLinear { breakpoints, .. } => {
                let mut seq: Vec<f64> =
                    breakpoints.iter().filter(|&&b| b < eps).map(|&b| self.value(b, Side::Right)).collect();
                seq.insert(0, self.value(0.0, Side::Right));
                seq.push(self.value(eps, Side::Left));
                let (class, constant) = order_of(&seq);
                exact(class, constant)
            }
            Family::DyadicJump { scales, jumps, .. } => {
                let active: Vec<f64> = scales
                    .iter()
                    .zip(jumps)
                    .filter(|(s, g)| **s < eps && **g != 0.0)
                    .map(|(_, g)| *g)
                    .collect();
                if active.is_empty() {
                    exact(Monotonicity::Nondecreasing, true)
                } else if active.iter().all(|g| *g > 0.0) {
                    exact(Monotonicity::Nondecreasing, false)
                } else if active.iter().all(|g| *g < 0.0) {
                    exact(Monotonicity::Nonincreasing, false)
                } else {
                    exact(Monotonicity::Nonmonotone, false)
                }
            }
            Family::Tabulated { xs, .. } => {
                let mut seq: Vec<f64> =
                    xs.iter().filter(|&&x| x < eps).map(|&x| self.value(x, Side::Right)).collect();
                seq.push(self.value(eps, Side::Left));
                let (class, constant) = order_of(&seq);
                MonotonicityClass {
                    class,
                    certified_on: eps,
                    constant,
                    exact: false,
                    certification_points: seq.len(),
                }
            }
        };
        Ok(class)
    }

    /// The class of `p` near the origin together with the largest `delta`
    /// (among the family's jump and kink points, or 1) such that the class
    /// still holds on `(0, delta)`.
    pub fn monotone_prefix(&self) -> MonotonicityClass {
        let mut cands: Vec<f64> = self.jumps();
        cands.extend(self.kinks());
        cands.retain(|&x| x > 0.0 && x < 1.0);
        cands.sort_by(f64::total_cmp);
        cands.dedup();
        cands.push(1.0);
        // Classes over nested prefixes (0, d): once the prefix stops being
        // monotone it stays so.
        let mut best = self.classify_monotonicity(cands[0]).expect("eps in (0,1]");
        for &d in &cands[1..] {
            let c = self.classify_monotonicity(d).expect("eps in (0,1]");
            if c.class == Monotonicity::Nonmonotone {
                break;
            }
            best = c;
        }
        best
    }
}

fn conj_recip(p: f64) -> f64 {
    if p == 1.0 {
        0.0
    } else {
        1.0 - 1.0 / p
    }
}

fn order_of(seq: &[f64]) -> (Monotonicity, bool) {
    let up = seq.windows(2).all(|w| w[1] >= w[0]);
    let down = seq.windows(2).all(|w| w[1] <= w[0]);
    match (up, down) {
        (true, true) => (Monotonicity::Nondecreasing, true),
        (true, false) => (Monotonicity::Nondecreasing, false),
        (false, true) => (Monotonicity::Nonincreasing, false),
        (false, false) => (Monotonicity::Nonmonotone, false),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn eval_examples() {
        assert_eq!(ExponentFunction::constant(2.0).unwrap().eval(0.5).unwrap(), 2.0);
        let lp = ExponentFunction::log_perturbed(2.0, 1.0, 1.0, Sign::Plus).unwrap();
        assert!(close(lp.eval((-4f64).exp()).unwrap(), 2.25, 1e-15));
        let pc = ExponentFunction::piecewise_constant(vec![0.3], vec![2.0, 3.0]).unwrap();
        assert_eq!(pc.eval(0.2).unwrap(), 2.0);
        assert_eq!(pc.eval(0.5).unwrap(), 3.0);
        assert_eq!(pc.value(0.3, Side::Left), 2.0);
        assert_eq!(pc.value(0.3, Side::Right), 3.0);
    }

    #[test]
    fn eval_rejects_endpoints() {
        let p = ExponentFunction::constant(2.0).unwrap();
        for x in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(p.eval(x), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn admissibility() {
        assert!(ExponentFunction::constant(0.5).is_err());
        assert!(ExponentFunction::log_perturbed(1.5, 1.0, 0.5, Sign::Minus).is_err());
        assert!(ExponentFunction::piecewise_constant(vec![0.5, 0.3], vec![2.0, 2.0, 2.0]).is_err());
        assert!(ExponentFunction::piecewise_constant(vec![0.3], vec![2.0]).is_err());
        assert!(ExponentFunction::dyadic_jump(1.5, vec![0.1, 0.2], vec![0.1, 0.1]).is_err());
        assert!(ExponentFunction::dyadic_jump(1.2, vec![0.2, 0.1], vec![0.1, -0.5]).is_err());
        assert!(ExponentFunction::tabulated(vec![0.5], vec![2.0]).is_err());
    }

    #[test]
    fn conjugate_examples() {
        let c = |p0: f64| ExponentFunction::constant(p0).unwrap().conjugate_reciprocal(0.3).unwrap();
        assert_eq!(c(2.0), 0.5);
        assert_eq!(c(1.0), 0.0);
        assert_eq!(c(4.0), 0.75);
    }

    #[test]
    fn phi_examples() {
        let p2 = ExponentFunction::constant(2.0).unwrap();
        assert!(close(p2.phi(0.25).unwrap(), 2.0, 1e-14));
        let p1 = ExponentFunction::constant(1.0).unwrap();
        for t in [1e-9, 0.1, 0.9] {
            assert_eq!(p1.phi(t).unwrap(), 1.0);
        }
        let p3 = ExponentFunction::constant(3.0).unwrap();
        assert!(close(p3.phi(0.125).unwrap(), 4.0, 1e-14));
    }

    #[test]
    fn phi_matches_direct_power() {
        let p = ExponentFunction::log_perturbed(2.0, 1.0, 0.5, Sign::Plus).unwrap();
        for i in 1..200 {
            let t = 10f64.powf(-(i as f64) * 0.05);
            let direct = t.powf(-(1.0 - 1.0 / p.eval(t).unwrap()));
            let logspace = p.phi(t).unwrap();
            assert!((direct - logspace).abs() <= 1e-12 * direct, "t = {t}");
        }
    }

    #[test]
    fn bounds_examples() {
        let grid = LogGrid::new(1e-12, 1201).unwrap();
        let b = ExponentFunction::constant(2.0).unwrap().bounds(0.1, 0.7, &grid).unwrap();
        assert_eq!((b.lower, b.upper), (2.0, 2.0));
        let lp = ExponentFunction::log_perturbed(2.0, 1.0, 1.0, Sign::Plus).unwrap();
        let b = lp.bounds(0.0, E_INV, &grid).unwrap();
        assert!(close(b.lower, 2.0, 1e-15) && close(b.upper, 3.0, 1e-12));
        let b = lp.bounds(0.0, 1.0, &grid).unwrap();
        assert_eq!((b.lower, b.upper), (2.0, 3.0));
        let pc = ExponentFunction::piecewise_constant(vec![0.3], vec![2.0, 3.0]).unwrap();
        let b = pc.bounds(0.0, 1.0, &grid).unwrap();
        assert_eq!((b.lower, b.upper, b.approximate), (2.0, 3.0, false));
        let tab = ExponentFunction::tabulated(vec![0.01, 0.1, 0.5], vec![2.0, 1.5, 2.5]).unwrap();
        let b = tab.bounds(0.0, 1.0, &grid).unwrap();
        assert_eq!((b.lower, b.upper, b.approximate), (1.5, 2.5, true));
    }

    #[test]
    fn monotonicity_examples() {
        let up = ExponentFunction::log_perturbed(2.0, 1.0, 0.5, Sign::Plus).unwrap();
        let c = up.classify_monotonicity(0.999).unwrap();
        assert_eq!((c.class, c.constant, c.exact), (Monotonicity::Nondecreasing, false, true));
        let down = ExponentFunction::log_perturbed(3.0, 1.0, 0.5, Sign::Minus).unwrap();
        assert_eq!(down.classify_monotonicity(0.5).unwrap().class, Monotonicity::Nonincreasing);
        let c = ExponentFunction::constant(2.0).unwrap().classify_monotonicity(0.5).unwrap();
        assert_eq!((c.class, c.constant), (Monotonicity::Nondecreasing, true));
    }

    #[test]
    fn monotone_prefix_of_hump() {
        let hump = ExponentFunction::piecewise_linear(vec![0.1, 0.5, 0.9], vec![2.0, 2.5, 2.0]).unwrap();
        let m = hump.monotone_prefix();
        assert_eq!(m.class, Monotonicity::Nondecreasing);
        assert_eq!(m.certified_on, 0.5);
        let dj = ExponentFunction::dyadic_jump_default();
        let m = dj.monotone_prefix();
        assert_eq!((m.class, m.certified_on), (Monotonicity::Nondecreasing, 1.0));
    }

    #[test]
    fn origin_limits() {
        let lp = ExponentFunction::log_perturbed(2.0, 0.7, 0.3, Sign::Plus).unwrap();
        assert_eq!(lp.limit_at_origin().value, 2.0);
        assert_eq!(ExponentFunction::constant(1.7).unwrap().limit_at_origin().value, 1.7);
        let dj = ExponentFunction::dyadic_jump_default();
        assert_eq!(dj.limit_at_origin().value, 1.5);
        // Refining toward 0 converges to p0: below the last scale the value is exactly p0.
        let vals: Vec<f64> = (1..=40).map(|j| dj.eval(2f64.powi(-j)).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(*vals.last().unwrap(), 1.5);
        let tab = ExponentFunction::tabulated(vec![0.01, 0.5], vec![1.2, 2.0]).unwrap();
        assert_eq!(tab.limit_at_origin(), OriginLimit { value: 1.2, approximate: true });
    }

    #[test]
    fn dyadic_default_shape() {
        let dj = ExponentFunction::dyadic_jump_default();
        assert_eq!(dj.jumps(), vec![2f64.powi(-32), 2f64.powi(-16), 2f64.powi(-8), 2f64.powi(-4), 0.25]);
        // B-type quantity at the jumps grows by sqrt(2) per level.
        let b: Vec<f64> = (1..=5)
            .map(|k| {
                let xk = 2f64.powi(-(1 << k));
                (dj.eval(xk).unwrap() - dj.eval(xk / 2.0).unwrap()) * (-xk.ln())
            })
            .collect();
        for w in b.windows(2) {
            assert!(close(w[0] / w[1], std::f64::consts::FRAC_1_SQRT_2, 1e-12));
        }
    }
}
