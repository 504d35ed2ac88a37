//! The averaging operator `f ↦ (1/x)∫_0^x f`, Rayleigh quotients and the
//! test families used to bound the operator norm from below.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponent::{ExponentFunction, Side};
use crate::grid::{interp_value, Interp, LogGrid, Mesh, SampledFunction};
use crate::lpnorm::{luxemburg_norm, modular, Domain, NormValue};

/// Minimum number of grid points a test function's support must contain.
pub const MIN_SUPPORT_POINTS: usize = 8;

/// `x ↦ (1/x)∫_0^x f`, from the exact cumulative integral of the interpolant.
pub fn hardy_average(f: &SampledFunction) -> Result<SampledFunction> {
    let cum = f.cumulative_integral()?;
    average_from_cumulative(f, cum.values())
}

/// `x ↦ ∫_0^1 f(tx) dt`, evaluated independently of [`hardy_average`]:
/// 4-point Gauss-Legendre in `ln t` on the panels `t = x_k / x` given by
/// the nodes of `f`, plus the power-law head below `x_min`.
pub fn hardy_average_scaled(f: &SampledFunction) -> Result<SampledFunction> {
    if f.values().iter().any(|&v| v < 0.0) {
        return Err(Error::Parameter("averaging expects a nonnegative function".into()));
    }
    let xs = f.xs();
    let vals = f.values();
    let interp = f.interp();
    // Panel contributions to ∫_0^1 f(t x_i) dt scale as x_k / x_i, so the
    // panels are evaluated once at x = 1 and rescaled per node.
    let mut acc = f.head_dx()?;
    let mut panels = Vec::with_capacity(xs.len());
    panels.push(acc);
    for k in 0..xs.len() - 1 {
        let (t0, t1) = (xs[k], xs[k + 1]);
        if t1 > t0 {
            let (u0, du) = (t0.ln(), (t1 / t0).ln());
            acc += GAUSS4
                .iter()
                .map(|&(node, weight)| {
                    let w = 0.5 * (node + 1.0);
                    let u = u0 + w * du;
                    0.5 * du * weight * interp_value(interp, vals[k], vals[k + 1], w) * u.exp()
                })
                .sum::<f64>();
        }
        panels.push(acc);
    }
    average_from_cumulative(f, &panels)
}

const GAUSS4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
    (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
];

fn average_from_cumulative(f: &SampledFunction, cum: &[f64]) -> Result<SampledFunction> {
    let values: Vec<f64> = cum.iter().zip(f.xs()).map(|(c, x)| c / x).collect();
    let interp = if values.iter().all(|&v| v > 0.0) { Interp::PowerLaw } else { Interp::LogLinear };
    SampledFunction::new(f.mesh().clone(), values, interp)
}

/// `‖Hf/x‖ / ‖f‖` on `(0,1)` with both bisection brackets kept.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quotient {
    #[serde(with = "crate::float")]
    pub value: f64,
    /// Interval implied by the two norm brackets.
    #[serde(with = "crate::float")]
    pub lo: f64,
    #[serde(with = "crate::float")]
    pub hi: f64,
    pub numerator: NormValue,
    pub denominator: NormValue,
}

pub fn rayleigh_quotient(f: &SampledFunction, p: &ExponentFunction, tol: f64) -> Result<Quotient> {
    let den = luxemburg_norm(f, p, Domain::Unit, tol)?;
    if den.value == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let num = luxemburg_norm(&hardy_average(f)?, p, Domain::Unit, tol)?;
    Ok(Quotient {
        value: num.value / den.value,
        lo: num.bracket.0 / den.bracket.1,
        hi: num.bracket.1 / den.bracket.0.max(f64::MIN_POSITIVE),
        numerator: num,
        denominator: den,
    })
}

/// `f₀(x) = x^{-1/p(x)}` on `(a/2, a)`, zero elsewhere. Its modular is `ln 2`.
pub fn necessity_test_function(p: &ExponentFunction, grid: &LogGrid, a: f64) -> Result<SampledFunction> {
    let lo = a / 2.0;
    if !(lo > grid.x_min() && a <= 1.0) {
        return Err(Error::Parameter(format!(
            "necessity support ({lo}, {a}) must lie inside ({}, 1]",
            grid.x_min()
        )));
    }
    check_support(grid, lo, a)?;
    let mesh = Arc::new(Mesh::for_exponent(grid, p, &[lo, a], &[]));
    SampledFunction::from_fn(mesh, Interp::PowerLaw, |x, s| {
        if inside(x, s, lo, a) {
            (-p.value(x, s).recip() * x.ln()).exp()
        } else {
            0.0
        }
    })
}

fn check_support(grid: &LogGrid, lo: f64, hi: f64) -> Result<()> {
    let found = grid.points().iter().filter(|&&x| x > lo && x < hi).count();
    if found < MIN_SUPPORT_POINTS {
        return Err(Error::Resolution { lo, hi, found, needed: MIN_SUPPORT_POINTS });
    }
    Ok(())
}

/// Membership of a mesh node in the open interval `(lo, hi)`, using the
/// one-sided copies at the endpoints.
fn inside(x: f64, s: Side, lo: f64, hi: f64) -> bool {
    (x > lo || (x == lo && s == Side::Right)) && (x < hi || (x == hi && s == Side::Left))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TestFamily {
    /// `x^{-beta}`.
    Power { betas: Vec<f64> },
    /// Indicator of `(2^{-k-1}, 2^{-k})`.
    DyadicIndicator { levels: Vec<u32> },
    /// `x^{-1/p(x)}` on `(a/2, a)`.
    Necessity { scales: Vec<f64> },
    /// Nonnegative step functions with breakpoints uniform in `ln x`.
    RandomStep { seed: u64, pieces: usize, count: usize },
}

/// One member of a family, sampled on its own mesh.
#[derive(Debug, Clone)]
pub struct Member {
    pub label: String,
    /// The scale or exponent that indexes the member.
    pub param: f64,
    pub f: SampledFunction,
}

impl TestFamily {
    /// `beta = 0.05, 0.10, ...` up to `1/p- - 0.01`, endpoint included.
    pub fn default_power(p: &ExponentFunction) -> Self {
        let top = 1.0 / p.inf() - 0.01;
        let mut betas: Vec<f64> = (1..).map(|k| 0.05 * k as f64).take_while(|&b| b < top - 1e-9).collect();
        if top > 0.0 {
            betas.push(top);
        }
        TestFamily::Power { betas }
    }

    /// `a = 2^{-j}` for every `j` whose support `(a/2, a)` sits on the grid.
    pub fn default_necessity(grid: &LogGrid) -> Self {
        let jmax = (-grid.x_min().log2()).floor() as i32 - 1;
        let scales =
            (1..=jmax).map(|j| 2f64.powi(-j)).filter(|&a| check_support(grid, a / 2.0, a).is_ok()).collect();
        TestFamily::Necessity { scales }
    }

    /// Levels `k = 0, 1, ...` whose intervals are resolved by the grid.
    pub fn default_dyadic(grid: &LogGrid) -> Self {
        let levels = (0..)
            .take_while(|&k: &u32| 2f64.powi(-(k as i32) - 1) > grid.x_min())
            .filter(|&k| {
                let hi = 2f64.powi(-(k as i32));
                check_support(grid, hi / 2.0, hi).is_ok()
            })
            .collect();
        TestFamily::DyadicIndicator { levels }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TestFamily::Power { .. } => "power",
            TestFamily::DyadicIndicator { .. } => "dyadic-indicator",
            TestFamily::Necessity { .. } => "necessity",
            TestFamily::RandomStep { .. } => "random-step",
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            TestFamily::Power { betas } => betas.is_empty(),
            TestFamily::DyadicIndicator { levels } => levels.is_empty(),
            TestFamily::Necessity { scales } => scales.is_empty(),
            TestFamily::RandomStep { count, .. } => *count == 0,
        }
    }

    /// Samples every member on `grid`, with breakpoints of `p` and of the member in the mesh.
    pub fn members(&self, p: &ExponentFunction, grid: &LogGrid) -> Result<Vec<Member>> {
        match self {
            TestFamily::Power { betas } => {
                let mesh = Arc::new(Mesh::for_exponent(grid, p, &[], &[]));
                betas
                    .iter()
                    .map(|&b| {
                        let f = SampledFunction::from_fn(mesh.clone(), Interp::PowerLaw, |x, _| x.powf(-b))?;
                        Ok(Member { label: format!("power(beta={b:.4})"), param: b, f })
                    })
                    .collect()
            }
            TestFamily::DyadicIndicator { levels } => levels
                .iter()
                .map(|&k| {
                    let hi = 2f64.powi(-(k as i32));
                    let lo = hi / 2.0;
                    check_support(grid, lo, hi)?;
                    let mesh = Arc::new(Mesh::for_exponent(grid, p, &[lo, hi], &[]));
                    let f = SampledFunction::from_fn(mesh, Interp::LogLinear, |x, s| {
                        if inside(x, s, lo, hi) {
                            1.0
                        } else {
                            0.0
                        }
                    })?;
                    Ok(Member { label: format!("dyadic(k={k})"), param: hi, f })
                })
                .collect(),
            TestFamily::Necessity { scales } => scales
                .iter()
                .map(|&a| {
                    let f = necessity_test_function(p, grid, a)?;
                    Ok(Member { label: format!("necessity(a={a:e})"), param: a, f })
                })
                .collect(),
            TestFamily::RandomStep { seed, pieces, count } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let depth = -grid.x_min().ln();
                (0..*count)
                    .map(|i| {
                        let mut cuts: Vec<f64> = (0..pieces.saturating_sub(1))
                            .map(|_| (-rng.gen::<f64>() * depth).exp())
                            .collect();
                        cuts.sort_by(f64::total_cmp);
                        let heights: Vec<f64> = (0..*pieces).map(|_| rng.gen_range(0.0..2.0)).collect();
                        let mesh = Arc::new(Mesh::for_exponent(grid, p, &cuts, &[]));
                        let f = SampledFunction::from_fn(mesh, Interp::LogLinear, |x, s| {
                            let k = match s {
                                Side::Right => cuts.partition_point(|&c| c <= x),
                                Side::Left => cuts.partition_point(|&c| c < x),
                            };
                            heights[k]
                        })?;
                        Ok(Member { label: format!("random-step(seed={seed},#{i})"), param: i as f64, f })
                    })
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberQuotient {
    pub label: String,
    #[serde(with = "crate::float")]
    pub param: f64,
    /// `None` for skipped members.
    pub quotient: Option<Quotient>,
    /// Head contribution below `x_min` to the member's modular.
    #[serde(with = "crate::float")]
    pub truncation_bias: f64,
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBound {
    pub family: String,
    #[serde(with = "crate::float")]
    pub sup: f64,
    pub argmax: Option<usize>,
    pub members: Vec<MemberQuotient>,
}

impl LowerBound {
    pub fn argmax_label(&self) -> Option<&str> {
        self.argmax.map(|i| self.members[i].label.as_str())
    }
}

/// Largest Rayleigh quotient over the family. Members with infinite modular
/// are skipped and reported; ties go to the lowest index.
pub fn operator_norm_lower_bound(
    p: &ExponentFunction,
    family: &TestFamily,
    grid: &LogGrid,
    tol: f64,
) -> Result<LowerBound> {
    if family.is_empty() {
        return Err(Error::Parameter(format!("{} family has no members", family.name())));
    }
    let members = family.members(p, grid)?;
    let results: Vec<MemberQuotient> = members
        .par_iter()
        .map(|m| {
            let skip = |why: String| MemberQuotient {
                label: m.label.clone(),
                param: m.param,
                quotient: None,
                truncation_bias: 0.0,
                skipped: Some(why),
            };
            let bias = match modular(&m.f, p, Domain::Unit) {
                Ok(v) if v.infinite => return skip("infinite modular".into()),
                Err(e) => return skip(e.to_string()),
                Ok(v) => v.truncation_bias,
            };
            match rayleigh_quotient(&m.f, p, tol) {
                Ok(q) => MemberQuotient {
                    label: m.label.clone(),
                    param: m.param,
                    quotient: Some(q),
                    truncation_bias: bias,
                    skipped: None,
                },
                Err(e) => skip(e.to_string()),
            }
        })
        .collect();
    let mut argmax: Option<usize> = None;
    for (i, r) in results.iter().enumerate() {
        if let Some(q) = r.quotient {
            let best = argmax.and_then(|j| results[j].quotient).map(|b| b.value);
            if best.is_none_or(|b| q.value > b) {
                argmax = Some(i);
            }
        }
    }
    let sup = argmax.and_then(|i| results[i].quotient).map_or(0.0, |q| q.value);
    Ok(LowerBound { family: family.name().to_string(), sup, argmax, members: results })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::Sign;
    use crate::lpnorm::DEFAULT_TOL;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn grid() -> LogGrid {
        LogGrid::new(1e-12, 1201).unwrap()
    }

    fn power(p: &ExponentFunction, beta: f64) -> SampledFunction {
        let m = TestFamily::Power { betas: vec![beta] }.members(p, &grid()).unwrap();
        m.into_iter().next().unwrap().f
    }

    #[test]
    fn average_examples() {
        let p = ExponentFunction::constant(2.0).unwrap();
        for avg in [hardy_average, hardy_average_scaled] {
            let one = avg(&power(&p, 0.0)).unwrap();
            assert!(one.values().iter().all(|&v| rel(v, 1.0) < 1e-12));
            let h = avg(&power(&p, 0.5)).unwrap();
            for (&x, &v) in h.xs().iter().zip(h.values()) {
                assert!(rel(v, 2.0 / x.sqrt()) < 1e-10);
            }
        }
        let chi = TestFamily::DyadicIndicator { levels: vec![1] }.members(&p, &grid()).unwrap();
        let h = hardy_average(&chi[0].f).unwrap();
        for (&x, &v) in h.xs().iter().zip(h.values()) {
            let want = if x <= 0.25 {
                0.0
            } else if x < 0.5 {
                (x - 0.25) / x
            } else {
                0.25 / x
            };
            assert!((v - want).abs() < 1e-12, "x = {x}: {v} vs {want}");
        }
    }

    #[test]
    fn quotient_examples() {
        let p = ExponentFunction::constant(2.0).unwrap();
        let q = rayleigh_quotient(&power(&p, 0.25), &p, DEFAULT_TOL).unwrap();
        assert!(rel(q.value, 4.0 / 3.0) < 1e-8);
        assert!(q.lo <= q.value && q.value <= q.hi);
        let q = rayleigh_quotient(&power(&p, 0.49), &p, DEFAULT_TOL).unwrap();
        assert!(rel(q.value, 1.0 / 0.51) < 1e-8);
        let lp = ExponentFunction::log_perturbed(2.0, 1.0, 1.0, Sign::Plus).unwrap();
        let q = rayleigh_quotient(&power(&lp, 0.0), &lp, DEFAULT_TOL).unwrap();
        assert!(rel(q.value, 1.0) < 1e-9);
        let zero = power(&p, 0.0).scaled(0.0);
        assert!(matches!(rayleigh_quotient(&zero, &p, DEFAULT_TOL), Err(Error::ZeroNorm)));
    }

    #[test]
    fn power_family_lower_bound() {
        let p = ExponentFunction::constant(2.0).unwrap();
        let fam = TestFamily::default_power(&p);
        let lb = operator_norm_lower_bound(&p, &fam, &grid(), DEFAULT_TOL).unwrap();
        assert!(rel(lb.sup, 1.0 / 0.51) < 1e-8);
        assert_eq!(lb.argmax_label(), Some("power(beta=0.4900)"));
        let nec = TestFamily::default_necessity(&grid());
        let lb = operator_norm_lower_bound(&p, &nec, &grid(), DEFAULT_TOL).unwrap();
        assert!(lb.sup <= 2.0);
        assert_eq!(lb.members.len(), 38);
    }

    #[test]
    fn power_members_are_clipped() {
        let p = ExponentFunction::constant(2.0).unwrap();
        let fam = TestFamily::Power { betas: vec![0.3, 0.6] };
        let lb = operator_norm_lower_bound(&p, &fam, &grid(), DEFAULT_TOL).unwrap();
        assert!(lb.members[0].quotient.is_some());
        assert!(lb.members[1].skipped.is_some());
        assert_eq!(lb.argmax, Some(0));
    }

    #[test]
    fn necessity_examples() {
        let p = ExponentFunction::constant(2.0).unwrap();
        let f = necessity_test_function(&p, &grid(), 0.5).unwrap();
        assert!(rel(modular(&f, &p, Domain::Unit).unwrap().value, 2f64.ln()) < 1e-9);
        let n = luxemburg_norm(&f, &p, Domain::Unit, DEFAULT_TOL).unwrap();
        assert!(rel(n.value, 2f64.ln().sqrt()) < 1e-8);
        assert!(f.eval(0.2) == 0.0 && f.eval(0.3) > 0.0 && f.eval(0.6) == 0.0);
        let coarse = LogGrid::new(1e-3, 20).unwrap();
        assert!(matches!(necessity_test_function(&p, &coarse, 0.5), Err(Error::Resolution { .. })));
        assert!(necessity_test_function(&p, &grid(), 1e-12).is_err());
    }

    #[test]
    fn dual_paths_agree_on_random_steps() {
        let p = ExponentFunction::piecewise_constant(vec![0.3], vec![2.0, 3.0]).unwrap();
        let fam = TestFamily::RandomStep { seed: 7, pieces: 6, count: 10 };
        for m in fam.members(&p, &grid()).unwrap() {
            let a = hardy_average(&m.f).unwrap();
            let b = hardy_average_scaled(&m.f).unwrap();
            for (x, y) in a.values().iter().zip(b.values()) {
                assert!((x - y).abs() <= 1e-6 * x.abs().max(1e-300), "{x} vs {y}");
            }
        }
    }

    #[test]
    fn constant_exponent_quotients_are_bounded() {
        for p0 in [1.5, 2.0, 3.0] {
            let p = ExponentFunction::constant(p0).unwrap();
            let g = grid();
            for fam in [TestFamily::default_power(&p), TestFamily::default_dyadic(&g)] {
                let lb = operator_norm_lower_bound(&p, &fam, &g, DEFAULT_TOL).unwrap();
                assert!(lb.sup <= p0 / (p0 - 1.0) + 1e-3, "{}: {}", fam.name(), lb.sup);
            }
        }
    }

    #[test]
    fn averaging_is_bounded_by_running_sup() {
        let p = ExponentFunction::constant(2.0).unwrap();
        let fam = TestFamily::RandomStep { seed: 3, pieces: 8, count: 5 };
        for m in fam.members(&p, &grid()).unwrap() {
            let h = hardy_average(&m.f).unwrap();
            let mut run = 0.0f64;
            for (v, hv) in m.f.values().iter().zip(h.values()) {
                run = run.max(*v);
                assert!(*hv <= run * (1.0 + 1e-12) + 1e-300);
            }
        }
    }
}
