//! Logarithmic grids on `[x_min, 1]`, sampled functions and quadrature.
//!
//! All integrals are computed in `u = ln x`. Each cell is integrated
//! exactly for the interpolant the function declares: linear-in-`u`
//! cells by the trapezoid rule, power-law cells by the logarithmic mean
//! (exact for `x^beta`). Jumps are represented by two nodes at the same
//! abscissa carrying the left and right limits.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent::{ExponentFunction, Side};

pub const MIN_POINTS: usize = 16;

/// Geometric grid `x_i = x_min^{1 - i/(n-1)}`, `i = 0..n-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogGrid {
    x_min: f64,
    points: Vec<f64>,
}

impl LogGrid {
    pub fn new(x_min: f64, n: usize) -> Result<Self> {
        if !(x_min > 0.0 && x_min < 1.0) {
            return Err(Error::Parameter(format!("x_min = {x_min} must lie in (0,1)")));
        }
        if n < MIN_POINTS {
            return Err(Error::Parameter(format!("grid needs n >= {MIN_POINTS} points, got {n}")));
        }
        let l = x_min.ln();
        let last = (n - 1) as f64;
        let mut points: Vec<f64> = (0..n).map(|i| (l * (1.0 - i as f64 / last)).exp()).collect();
        points[0] = x_min;
        points[n - 1] = 1.0;
        Ok(Self { x_min, points })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Spacing in `ln x`.
    pub fn step(&self) -> f64 {
        -self.x_min.ln() / (self.len() - 1) as f64
    }

    /// `ln(1/x_min)`, the depth of the grid in log scale.
    pub fn depth(&self) -> f64 {
        -self.x_min.ln()
    }
}

/// A log grid with extra nodes at breakpoints.
///
/// Jump points appear twice (left limit first); kinks once.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    grid: LogGrid,
    xs: Vec<f64>,
    sides: Vec<Side>,
}

impl Mesh {
    pub fn new(grid: &LogGrid, jumps: &[f64], kinks: &[f64]) -> Self {
        let x_min = grid.x_min();
        let inside = |x: f64| x > x_min && x < 1.0;
        let mut extra: Vec<(f64, bool)> = jumps
            .iter()
            .filter(|&&x| inside(x))
            .map(|&x| (x, true))
            .chain(kinks.iter().filter(|&&x| inside(x)).map(|&x| (x, false)))
            .collect();
        extra.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
        extra.dedup_by(|b, a| a.0 == b.0);

        // Grid nodes that coincide with a breakpoint (to ~1e-12 in ln x) are replaced by it.
        let near = |x: f64, b: f64| (x / b).ln().abs() < 1e-12;
        let mut nodes: Vec<(f64, bool)> = grid
            .points()
            .iter()
            .filter(|&&x| !extra.iter().any(|&(b, _)| near(x, b)))
            .map(|&x| (x, false))
            .collect();
        nodes.extend(extra);
        nodes.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut xs = Vec::with_capacity(nodes.len() + jumps.len());
        let mut sides = Vec::with_capacity(nodes.len() + jumps.len());
        for (x, is_jump) in nodes {
            if is_jump {
                xs.push(x);
                sides.push(Side::Left);
            }
            xs.push(x);
            sides.push(Side::Right);
        }
        Self { grid: grid.clone(), xs, sides }
    }

    /// Mesh carrying the jumps and kinks of `p` plus any extra breakpoints.
    pub fn for_exponent(grid: &LogGrid, p: &ExponentFunction, jumps: &[f64], kinks: &[f64]) -> Self {
        let mut j = p.jumps();
        j.extend_from_slice(jumps);
        let mut k = p.kinks();
        k.extend_from_slice(kinks);
        Self::new(grid, &j, &k)
    }

    pub fn grid(&self) -> &LogGrid {
        &self.grid
    }

    pub fn x_min(&self) -> f64 {
        self.grid.x_min()
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn sides(&self) -> &[Side] {
        &self.sides
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// Index of the last node with abscissa `<= x` (the right copy at a jump).
    pub fn cell_of(&self, x: f64) -> usize {
        self.xs.partition_point(|&v| v <= x).saturating_sub(1)
    }

    /// Index of the first node with abscissa `>= x` (the left copy at a jump).
    pub fn first_at_or_after(&self, x: f64) -> usize {
        self.xs.partition_point(|&v| v < x)
    }

    /// Number of mesh nodes strictly inside `(lo, hi)`.
    pub fn count_inside(&self, lo: f64, hi: f64) -> usize {
        self.xs.iter().filter(|&&x| x > lo && x < hi).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interp {
    /// Value linear in `ln x`.
    LogLinear,
    /// `ln value` linear in `ln x`; cells with a nonpositive end fall back to linear.
    PowerLaw,
}

#[derive(Debug, Clone)]
pub struct SampledFunction {
    mesh: Arc<Mesh>,
    values: Vec<f64>,
    interp: Interp,
}

impl SampledFunction {
    pub fn new(mesh: Arc<Mesh>, values: Vec<f64>, interp: Interp) -> Result<Self> {
        if values.len() != mesh.len() {
            return Err(Error::Parameter(format!(
                "{} values for a mesh of {} nodes",
                values.len(),
                mesh.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Parameter(format!("sampled values must be finite, got {v}")));
        }
        if interp == Interp::PowerLaw && values.iter().any(|&v| v < 0.0) {
            return Err(Error::Parameter("power-law interpolation needs nonnegative values".into()));
        }
        Ok(Self { mesh, values, interp })
    }

    /// Samples `f(x, side)` at every mesh node.
    pub fn from_fn(mesh: Arc<Mesh>, interp: Interp, f: impl Fn(f64, Side) -> f64) -> Result<Self> {
        let values = mesh.xs().iter().zip(mesh.sides()).map(|(&x, &s)| f(x, s)).collect();
        Self::new(mesh, values, interp)
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn xs(&self) -> &[f64] {
        self.mesh.xs()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn interp(&self) -> Interp {
        self.interp
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn map(&self, interp: Interp, f: impl Fn(f64, Side, f64) -> f64) -> Result<Self> {
        let values = self
            .xs()
            .iter()
            .zip(self.mesh.sides())
            .zip(&self.values)
            .map(|((&x, &s), &v)| f(x, s, v))
            .collect();
        Self::new(self.mesh.clone(), values, interp)
    }

    pub fn scaled(&self, c: f64) -> Self {
        let interp = if c < 0.0 { Interp::LogLinear } else { self.interp };
        Self { mesh: self.mesh.clone(), values: self.values.iter().map(|v| v * c).collect(), interp }
    }

    /// Interpolated value at `x` in `[x_min, 1]` (right limit at jumps).
    pub fn eval(&self, x: f64) -> f64 {
        let i = self.mesh.cell_of(x);
        let xs = self.xs();
        if i + 1 >= xs.len() || x <= xs[i] {
            return self.values[i.min(xs.len() - 1)];
        }
        self.interp_in_cell(i, x)
    }

    fn interp_in_cell(&self, i: usize, x: f64) -> f64 {
        let xs = self.xs();
        let (x0, x1) = (xs[i], xs[i + 1]);
        let (g0, g1) = (self.values[i], self.values[i + 1]);
        let w = (x / x0).ln() / (x1 / x0).ln();
        interp_value(self.interp, g0, g1, w)
    }

    fn power_cell(&self, g0: f64, g1: f64) -> bool {
        self.interp == Interp::PowerLaw && g0 > 0.0 && g1 > 0.0
    }

    /// Walks the cells overlapping `[a, b]` and sums `rule` over the clipped pieces.
    fn sum_cells(&self, a: f64, b: f64, rule: impl Fn(bool, f64, f64, f64, f64) -> f64) -> f64 {
        let xs = self.xs();
        let mut total = 0.0;
        let start = self.mesh.cell_of(a);
        for i in start..xs.len() - 1 {
            let (x0, x1) = (xs[i], xs[i + 1]);
            if x0 >= b {
                break;
            }
            let lo = x0.max(a);
            let hi = x1.min(b);
            if hi <= lo {
                continue;
            }
            let g_lo = if lo == x0 { self.values[i] } else { self.interp_in_cell(i, lo) };
            let g_hi = if hi == x1 { self.values[i + 1] } else { self.interp_in_cell(i, hi) };
            let power = self.power_cell(self.values[i], self.values[i + 1]);
            total += rule(power, lo, (hi / lo).ln(), g_lo, g_hi);
        }
        total
    }

    fn check_range(&self, a: f64, b: f64) -> Result<()> {
        let x_min = self.mesh.x_min();
        let a_ok = a == 0.0 || a >= x_min;
        if !(a_ok && a < b && b <= 1.0) {
            return Err(Error::OutsideGrid { a, b, x_min });
        }
        Ok(())
    }

    /// Power-law fit through the first two distinct nodes: `(g0, exponent)`.
    fn head_fit(&self) -> Option<(f64, f64)> {
        let xs = self.xs();
        let j = (1..xs.len()).find(|&j| xs[j] > xs[0])?;
        let (g0, g1) = (self.values[0], self.values[j]);
        if g0 <= 0.0 || g1 <= 0.0 {
            return None;
        }
        Some((g0, (g1 / g0).ln() / (xs[j] / xs[0]).ln()))
    }

    /// `∫_0^{x_min} g dx/x` under the two-point power-law extrapolation.
    pub fn head_dlog(&self) -> Result<f64> {
        match self.head_fit() {
            None => Ok(0.0),
            Some((g0, s)) if s > 0.0 => Ok(g0 / s),
            Some((_, s)) => Err(Error::DivergentHead { exponent: s - 1.0 }),
        }
    }

    /// `∫_0^{x_min} g dx` under the two-point power-law extrapolation.
    pub fn head_dx(&self) -> Result<f64> {
        match self.head_fit() {
            None => Ok(0.0),
            Some((g0, s)) if s > -1.0 => Ok(g0 * self.mesh.x_min() / (1.0 + s)),
            Some((_, s)) => Err(Error::DivergentHead { exponent: s }),
        }
    }

    /// `∫_a^b g dx/x`. `a = 0` adds the extrapolated head below `x_min`.
    pub fn integrate_dlog(&self, a: f64, b: f64) -> Result<f64> {
        self.check_range(a, b)?;
        let head = if a == 0.0 { self.head_dlog()? } else { 0.0 };
        let lo = a.max(self.mesh.x_min());
        Ok(head + self.sum_cells(lo, b, |power, _, du, g0, g1| cell_dlog(power, g0, g1, du)))
    }

    /// `∫_a^b g dx`. `a = 0` adds the extrapolated head below `x_min`.
    pub fn integrate(&self, a: f64, b: f64) -> Result<f64> {
        self.check_range(a, b)?;
        let head = if a == 0.0 { self.head_dx()? } else { 0.0 };
        let lo = a.max(self.mesh.x_min());
        Ok(head + self.sum_cells(lo, b, |power, x0, du, g0, g1| cell_dx(power, x0, g0, g1, du)))
    }

    /// `x -> ∫_0^x g dt` at every node, head included.
    pub fn cumulative_integral(&self) -> Result<SampledFunction> {
        if self.values.iter().any(|&v| v < 0.0) {
            return Err(Error::Parameter("cumulative integral expects a nonnegative integrand".into()));
        }
        let xs = self.xs();
        let mut acc = self.head_dx()?;
        let mut out = Vec::with_capacity(xs.len());
        out.push(acc);
        for i in 0..xs.len() - 1 {
            let (x0, x1) = (xs[i], xs[i + 1]);
            if x1 > x0 {
                let (g0, g1) = (self.values[i], self.values[i + 1]);
                acc += cell_dx(self.power_cell(g0, g1), x0, g0, g1, (x1 / x0).ln());
            }
            out.push(acc);
        }
        let interp = if out.iter().all(|&v| v > 0.0) { Interp::PowerLaw } else { Interp::LogLinear };
        SampledFunction::new(self.mesh.clone(), out, interp)
    }
}

pub(crate) fn interp_value(interp: Interp, g0: f64, g1: f64, w: f64) -> f64 {
    if interp == Interp::PowerLaw && g0 > 0.0 && g1 > 0.0 {
        (g0.ln() + w * (g1 / g0).ln()).exp()
    } else {
        g0 + w * (g1 - g0)
    }
}

/// `(e^r - 1) / r`, stable at `r -> 0`.
fn expm1_over(r: f64) -> f64 {
    if r.abs() < 1e-8 {
        1.0 + 0.5 * r
    } else {
        r.exp_m1() / r
    }
}

/// `∫ g du` over a cell of width `du`.
pub(crate) fn cell_dlog(power: bool, g0: f64, g1: f64, du: f64) -> f64 {
    if power {
        g0 * du * expm1_over((g1 / g0).ln())
    } else {
        0.5 * du * (g0 + g1)
    }
}

/// `∫ g e^u du` over a cell starting at `x0 = e^{u0}` of width `du`.
pub(crate) fn cell_dx(power: bool, x0: f64, g0: f64, g1: f64, du: f64) -> f64 {
    if power {
        g0 * x0 * du * expm1_over((g1 / g0).ln() + du)
    } else {
        // Exact for g linear in u: x0 (g1 B(du) + g0 A(du)).
        let (a, b) = linear_weights(du);
        x0 * (g1 * b + g0 * a)
    }
}

/// `A = (e^d - 1)/d - 1`, `B = e^d - (e^d - 1)/d`.
fn linear_weights(d: f64) -> (f64, f64) {
    if d < 1e-3 {
        let (d2, d3, d4) = (d * d, d * d * d, d * d * d * d);
        let a = d / 2.0 + d2 / 6.0 + d3 / 24.0 + d4 / 120.0;
        let b = d / 2.0 + d2 / 3.0 + d3 / 8.0 + d4 / 30.0;
        (a, b)
    } else {
        let q = d.exp_m1() / d;
        (q - 1.0, d.exp() - q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mesh(x_min: f64, n: usize) -> Arc<Mesh> {
        Arc::new(Mesh::new(&LogGrid::new(x_min, n).unwrap(), &[], &[]))
    }

    fn power(m: &Arc<Mesh>, beta: f64) -> SampledFunction {
        SampledFunction::from_fn(m.clone(), Interp::PowerLaw, |x, _| x.powf(beta)).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn grid_examples() {
        assert!(LogGrid::new(0.25, 3).is_err());
        let g = LogGrid::new(0.25, 17).unwrap();
        assert_eq!(g.points()[0], 0.25);
        assert!((g.points()[8] - 0.5).abs() < 1e-15);
        assert_eq!(g.points()[16], 1.0);

        let g = LogGrid::new(1e-12, 1201).unwrap();
        assert_eq!(g.len(), 1201);
        // 100 points per decade.
        assert!((g.points()[100] - 1e-11).abs() < 1e-24);
        assert!((g.points()[1100] - 0.1).abs() < 1e-14);

        let g = LogGrid::new(0.5, 16).unwrap();
        let ratio = 2f64.powf(1.0 / 15.0);
        for w in g.points().windows(2) {
            assert!(rel(w[1] / w[0], ratio) < 1e-13);
        }
        assert!(LogGrid::new(1.0, 100).is_err());
        assert!(LogGrid::new(0.0, 100).is_err());
    }

    #[test]
    fn integrate_dlog_examples() {
        let m = mesh(1e-12, 1201);
        let one = power(&m, 0.0);
        let e1 = (-1f64).exp();
        assert!(rel(one.integrate_dlog(e1, 1.0).unwrap(), 1.0) < 1e-13);
        let x = power(&m, 1.0);
        assert!(rel(x.integrate_dlog(e1, 1.0).unwrap(), 1.0 - e1) < 1e-13);
        let inv_sqrt = power(&m, -0.5);
        assert!(rel(inv_sqrt.integrate_dlog(0.25, 1.0).unwrap(), 2.0) < 1e-13);
        // The linear rule on the same samples is the plain trapezoid: O(h^2).
        let lin = SampledFunction::new(m.clone(), x.values().to_vec(), Interp::LogLinear).unwrap();
        assert!(rel(lin.integrate_dlog(e1, 1.0).unwrap(), 1.0 - e1) < 1e-4);
    }

    #[test]
    fn integrate_examples() {
        let m = mesh(1e-12, 1201);
        assert!(rel(power(&m, 0.0).integrate(0.0, 1.0).unwrap(), 1.0) < 1e-13);
        assert!(rel(power(&m, -0.5).integrate(0.0, 1.0).unwrap(), 2.0) < 1e-13);
        assert!(rel(power(&m, 1.0).integrate(0.0, 1.0).unwrap(), 0.5) < 1e-13);
        // Linear interpolation of a constant is exact in dx too.
        let c = SampledFunction::from_fn(m.clone(), Interp::LogLinear, |_, _| 3.0).unwrap();
        assert!(rel(c.integrate(0.1, 0.7).unwrap(), 1.8) < 1e-13);
    }

    #[test]
    fn outside_grid_is_an_error() {
        let m = mesh(1e-6, 100);
        let f = power(&m, 0.0);
        assert!(matches!(f.integrate_dlog(1e-8, 0.5), Err(Error::OutsideGrid { .. })));
        assert!(f.integrate_dlog(0.5, 1.5).is_err());
        assert!(f.integrate(0.5, 0.5).is_err());
    }

    #[test]
    fn cumulative_examples() {
        let m = mesh(1e-12, 1201);
        let id = power(&m, 0.0).cumulative_integral().unwrap();
        for (&x, &v) in id.xs().iter().zip(id.values()) {
            assert!(rel(v, x) < 1e-12);
        }
        let h = power(&m, -0.5).cumulative_integral().unwrap();
        for (&x, &v) in h.xs().iter().zip(h.values()) {
            assert!(rel(v, 2.0 * x.sqrt()) < 1e-12);
        }
        assert!(matches!(power(&m, -1.5).cumulative_integral(), Err(Error::DivergentHead { .. })));
    }

    #[test]
    fn jumps_are_exact() {
        let grid = LogGrid::new(1e-6, 200).unwrap();
        let m = Arc::new(Mesh::new(&grid, &[0.3], &[]));
        let step = SampledFunction::from_fn(m, Interp::LogLinear, |x, s| {
            if x > 0.3 || (x == 0.3 && s == Side::Right) {
                2.0
            } else {
                1.0
            }
        })
        .unwrap();
        assert!(rel(step.integrate(0.0, 1.0).unwrap(), 0.3 + 1.4) < 1e-13);
        assert_eq!(step.eval(0.3), 2.0);
        let cum = step.cumulative_integral().unwrap();
        assert!(rel(*cum.values().last().unwrap(), 1.7) < 1e-12);
        assert!(rel(cum.eval(0.5), 0.3 + 0.4) < 1e-3);
    }

    #[test]
    fn refinement_halves_trapezoid_error() {
        let exact = 2.0;
        let mut prev = f64::INFINITY;
        for n in [16, 32, 64, 128, 256] {
            let m = mesh(0.25, n);
            let f = SampledFunction::from_fn(m, Interp::LogLinear, |x, _| x.powf(-0.5)).unwrap();
            let err = (f.integrate_dlog(0.25, 1.0).unwrap() - exact).abs();
            if prev > 1e-10 {
                assert!(err <= prev / 2.0, "n = {n}: {err} vs {prev}");
            }
            prev = err;
        }
    }

    #[test]
    fn eval_interpolates() {
        let m = mesh(1e-4, 50);
        let f = power(&m, -0.3);
        for x in [1e-4, 3.3e-3, 0.123, 0.999, 1.0] {
            assert!(rel(f.eval(x), x.powf(-0.3)) < 1e-12);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn dlog_is_additive(beta in -0.9f64..2.0, a in 1e-9f64..0.3, t in 0.0f64..1.0, c in 0.5f64..1.0) {
                let m = mesh(1e-10, 400);
                let f = SampledFunction::from_fn(m, Interp::LogLinear, |x, _| x.powf(beta) + 0.5).unwrap();
                let b = a + t * (c - a);
                prop_assume!(b > a && c > b);
                let whole = f.integrate_dlog(a, c).unwrap();
                let split = f.integrate_dlog(a, b).unwrap() + f.integrate_dlog(b, c).unwrap();
                prop_assert!((whole - split).abs() <= 1e-12 * whole.abs());
            }

            #[test]
            fn power_law_rule_is_exact(beta in -0.95f64..3.0, a in 1e-10f64..0.5) {
                let m = mesh(1e-10, 300);
                let f = power(&m, beta);
                let exact = if beta.abs() < 1e-12 { -a.ln() } else { (1.0 - a.powf(beta)) / beta };
                let got = f.integrate_dlog(a, 1.0).unwrap();
                prop_assert!((got - exact).abs() <= 1e-11 * exact.abs().max(1e-300));
            }

            #[test]
            fn cumulative_is_monotone(seed in 0u64..1000) {
                let m = mesh(1e-8, 200);
                let f = SampledFunction::from_fn(m, Interp::LogLinear, |x, _| {
                    ((x * 1e3 + seed as f64).sin()).abs()
                }).unwrap();
                let c = f.cumulative_integral().unwrap();
                prop_assert!(c.values().windows(2).all(|w| w[1] >= w[0]));
            }
        }
    }
}
