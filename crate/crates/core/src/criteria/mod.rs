//! Boundedness criteria for the averaging operator and the regularity
//! quantities that go with them.
//!
//! Scale-indexed criteria are evaluated at every mesh node `a` in
//! `[x_min, min(1/2, delta/2)]`, including the left copies at jumps, and
//! their series are classified by [`verdict::classify`].

pub mod audit;
pub mod verdict;

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exponent::{ExponentFunction, Side};
use crate::grid::{Interp, Mesh, SampledFunction};
use crate::lpnorm::{inverse_x, Domain, ModularFn};

pub use verdict::{classify, BoundednessVerdict, SeriesPoint, VerdictClass};

const LN_OVERFLOW: f64 = 700.0;

/// Largest almost-decreasing constant still counted as "finite" by the cross-checks.
pub const ALMOST_DECREASING_LIMIT: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Criterion {
    A,
    B,
    C1,
    C2,
    C3,
    C4,
    C5,
    Oscillation,
    Doubling,
}

impl Criterion {
    pub const ALL: [Criterion; 9] = [
        Criterion::A,
        Criterion::B,
        Criterion::C1,
        Criterion::C2,
        Criterion::C3,
        Criterion::C4,
        Criterion::C5,
        Criterion::Oscillation,
        Criterion::Doubling,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Criterion::A => "A",
            Criterion::B => "B",
            Criterion::C1 => "C1",
            Criterion::C2 => "C2",
            Criterion::C3 => "C3",
            Criterion::C4 => "C4",
            Criterion::C5 => "C5",
            Criterion::Oscillation => "Oscillation",
            Criterion::Doubling => "Doubling",
        }
    }

    /// Series of pointwise quantities are indexed by `x`, scale scans by `a`.
    pub fn param_name(self) -> &'static str {
        match self {
            Criterion::A | Criterion::B | Criterion::Oscillation | Criterion::Doubling => "x",
            _ => "a",
        }
    }
}

/// A scan point: mesh index, abscissa and side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    pub index: usize,
    pub x: f64,
    pub side: Side,
}

fn nodes_upto(mesh: &Mesh, top: f64) -> Vec<ScanPoint> {
    mesh.xs()
        .iter()
        .zip(mesh.sides())
        .enumerate()
        .take_while(|(_, (&x, _))| x <= top)
        .map(|(index, (&x, &side))| ScanPoint { index, x, side })
        .collect()
}

/// Scale parameters `a` in `[x_min, min(1/2, delta/2)]`.
pub fn scan_points(mesh: &Mesh, delta: f64) -> Vec<ScanPoint> {
    nodes_upto(mesh, 0.5f64.min(delta / 2.0))
}

/// `|p(x) - p(0)| ln(1/x)` for `x <= 1/2`.
pub fn condition_a(p: &ExponentFunction, mesh: &Mesh) -> BoundednessVerdict {
    let p0 = p.limit_at_origin().value;
    let series = nodes_upto(mesh, 0.5)
        .into_iter()
        .map(|s| SeriesPoint::exact(s.x, (p.value(s.x, s.side) - p0).abs() * -s.x.ln()))
        .collect();
    classify(series, mesh.x_min())
}

/// Points `x <= 1/2` on the mesh plus the halves of the jumps of `p`, so that
/// both `x` and `2x` (or `x/2`) meet every jump.
fn pointwise_scan(p: &ExponentFunction, mesh: &Mesh, top: f64, lo: f64) -> Vec<(f64, Side)> {
    let mut pts: Vec<(f64, Side)> =
        nodes_upto(mesh, top).into_iter().filter(|s| s.x >= lo).map(|s| (s.x, s.side)).collect();
    for j in p.jumps() {
        for y in [j / 2.0, j * 2.0] {
            if y >= lo && y <= top {
                pts.push((y, Side::Left));
                pts.push((y, Side::Right));
            }
        }
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionB {
    pub verdict: BoundednessVerdict,
    /// `p(0)(p(0) - 1)`.
    #[serde(with = "crate::float")]
    pub threshold: f64,
    /// `threshold - sup B`; positive when the sufficient condition holds.
    #[serde(with = "crate::float")]
    pub margin: f64,
    /// `sup B < p(0)(p(0) - 1)`.
    pub within_margin: bool,
}

/// `[p(x) - p(x/2)] ln(1/x)` for `2 x_min <= x <= 1/2`.
pub fn condition_b(p: &ExponentFunction, mesh: &Mesh) -> ConditionB {
    let series = pointwise_scan(p, mesh, 0.5, 2.0 * mesh.x_min())
        .into_iter()
        .map(|(x, s)| SeriesPoint::exact(x, (p.value(x, s) - p.value(x / 2.0, s)) * -x.ln()))
        .collect();
    let verdict = classify(series, mesh.x_min());
    let p0 = p.limit_at_origin().value;
    let threshold = p0 * (p0 - 1.0);
    let margin = threshold - verdict.sup_value;
    let within_margin = margin > 0.0;
    ConditionB { verdict, threshold, margin, within_margin }
}

/// `|1/p'(2x) - 1/p'(x)| ln(1/x)` for `x <= 1/2`.
pub fn dyadic_oscillation(p: &ExponentFunction, mesh: &Mesh) -> BoundednessVerdict {
    let series = pointwise_scan(p, mesh, 0.5, mesh.x_min())
        .into_iter()
        .map(|(x, s)| {
            let d = p.conjugate_reciprocal_at(2.0 * x, s) - p.conjugate_reciprocal_at(x, s);
            SeriesPoint::exact(x, d.abs() * -x.ln())
        })
        .collect();
    classify(series, mesh.x_min())
}

/// `sup phi(y)/phi(x)` over `y` in `[x/2, 2x]`, `x < 1/4`. The series holds
/// the local supremum at every `x`; its sup is the doubling constant.
pub fn phi_doubling(p: &ExponentFunction, mesh: &Mesh) -> BoundednessVerdict {
    let xs = mesh.xs();
    let ln_phi: Vec<f64> = xs.iter().zip(mesh.sides()).map(|(&x, &s)| p.ln_phi(x, s)).collect();
    let series = pointwise_scan(p, mesh, 0.25 * (1.0 - 1e-12), mesh.x_min())
        .into_iter()
        .map(|(x, s)| {
            let base = p.ln_phi(x, s);
            let lo = mesh.first_at_or_after(x / 2.0);
            let hi = mesh.cell_of(2.0 * x);
            let mut best = [x / 2.0, 2.0 * x]
                .iter()
                .flat_map(|&y| [p.ln_phi(y, Side::Left), p.ln_phi(y, Side::Right)])
                .fold(f64::NEG_INFINITY, f64::max);
            if lo <= hi {
                best = ln_phi[lo..=hi].iter().copied().fold(best, f64::max);
            }
            SeriesPoint::exact(x, (best - base).exp())
        })
        .collect();
    classify(series, mesh.x_min())
}

/// `sup_{i <= j} v_j / v_i`, one reverse sweep over suffix maxima.
pub fn almost_decreasing_constant(v: &[f64]) -> f64 {
    let mut suffix_max = f64::NEG_INFINITY;
    let mut best = 1.0f64;
    for &x in v.iter().rev() {
        suffix_max = suffix_max.max(x);
        best = best.max(suffix_max / x);
    }
    best
}

/// Log-space variant returning the running constant `K_i = sup_{i <= j1 <= j2} v_{j2}/v_{j1}`
/// for every start index.
fn running_almost_decreasing(ln_v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; ln_v.len()];
    let mut suffix_max = f64::NEG_INFINITY;
    let mut best = 0.0f64;
    for i in (0..ln_v.len()).rev() {
        suffix_max = suffix_max.max(ln_v[i]);
        best = best.max(suffix_max - ln_v[i]);
        out[i] = best;
    }
    out
}

fn phi_samples(p: &ExponentFunction, mesh: &Arc<Mesh>) -> Result<SampledFunction> {
    SampledFunction::from_fn(mesh.clone(), Interp::PowerLaw, |x, s| p.ln_phi(x, s).exp())
}

/// `r(a) = ∫_a^delta phi dx/x / phi(a)`.
pub fn criterion_c2(p: &ExponentFunction, mesh: &Arc<Mesh>, delta: f64) -> Result<BoundednessVerdict> {
    let phi = phi_samples(p, mesh)?;
    let scan = scan_points(mesh, delta);
    let tails = tail_integrals(&phi, delta)?;
    let series =
        scan.iter().map(|s| SeriesPoint::exact(s.x, tails[s.index] / p.ln_phi(s.x, s.side).exp())).collect();
    Ok(classify(series, mesh.x_min()))
}

/// `∫_{x_i}^b g dx/x` for every node `x_i <= b`, accumulated from the top.
fn tail_integrals(g: &SampledFunction, b: f64) -> Result<Vec<f64>> {
    let xs = g.xs();
    let top = xs.partition_point(|&x| x <= b);
    let mut out = vec![0.0; xs.len()];
    let mut acc = 0.0;
    for i in (0..top).rev() {
        if i + 1 < top && xs[i + 1] > xs[i] {
            acc += g.integrate_dlog(xs[i], xs[i + 1])?;
        } else if i + 1 == top && xs[i] < b {
            acc += g.integrate_dlog(xs[i], b)?;
        }
        out[i] = acc;
    }
    Ok(out)
}

/// Result of the almost-decreasing scan for one `eps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsResult {
    #[serde(with = "crate::float")]
    pub eps: f64,
    #[serde(with = "crate::float")]
    pub constant: f64,
    pub class: VerdictClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionC3 {
    #[serde(with = "crate::float")]
    pub best_eps: f64,
    #[serde(with = "crate::float")]
    pub constant: f64,
    pub verdict: BoundednessVerdict,
    pub per_eps: Vec<EpsResult>,
}

/// `eps_k = base 2^{-k}`, `base = 1 - 1/p+` (1/2 when `p+ = 1`), dropping
/// members too small to show on a grid of depth `ln(1/x_min)`.
pub fn c3_eps_list(p: &ExponentFunction, x_min: f64, depth: u32) -> Vec<f64> {
    let p_plus = p.sup();
    let base = if p_plus > 1.0 { 1.0 - 1.0 / p_plus } else { 0.5 };
    let l_max = -x_min.ln();
    (0..=depth).map(|k| base * 2f64.powi(-(k as i32))).filter(|&e| e * l_max >= 2.0).collect()
}

/// Almost-decreasing constant of `t^eps phi(t)` on `[a, delta]` as a series in `a`.
pub fn criterion_c3(p: &ExponentFunction, mesh: &Arc<Mesh>, delta: f64, eps_list: &[f64]) -> CriterionC3 {
    let nodes = nodes_upto(mesh, delta);
    let scan = scan_points(mesh, delta);
    let runs: Vec<(f64, BoundednessVerdict)> = eps_list
        .iter()
        .map(|&eps| {
            let ln_v: Vec<f64> = nodes.iter().map(|s| eps * s.x.ln() + p.ln_phi(s.x, s.side)).collect();
            let k = running_almost_decreasing(&ln_v);
            let series = scan.iter().map(|s| SeriesPoint::exact(s.x, k[s.index].exp())).collect();
            (eps, classify(series, mesh.x_min()))
        })
        .collect();
    let per_eps: Vec<EpsResult> =
        runs.iter().map(|(eps, v)| EpsResult { eps: *eps, constant: v.sup_value, class: v.class }).collect();
    let any_bounded = per_eps.iter().any(|e| e.class == VerdictClass::Bounded);
    let all_divergent = !per_eps.is_empty() && per_eps.iter().all(|e| e.class == VerdictClass::Divergent);
    let class = if any_bounded {
        VerdictClass::Bounded
    } else if all_divergent {
        VerdictClass::Divergent
    } else {
        VerdictClass::Inconclusive
    };
    // Smallest constant among the members that carry the class; first on ties.
    let best = runs
        .iter()
        .enumerate()
        .filter(|(_, (_, v))| !any_bounded || v.class == VerdictClass::Bounded)
        .fold(None::<(usize, f64)>, |acc, (i, (_, v))| match acc {
            Some((_, c)) if c <= v.sup_value => acc,
            _ => Some((i, v.sup_value)),
        });
    match best {
        Some((i, constant)) => {
            let mut verdict = runs[i].1.clone();
            verdict.class = class;
            CriterionC3 { best_eps: runs[i].0, constant, verdict, per_eps }
        }
        None => CriterionC3 {
            best_eps: f64::NAN,
            constant: f64::INFINITY,
            verdict: classify(Vec::new(), mesh.x_min()),
            per_eps,
        },
    }
}

/// `s(a) = ∫_a^delta (a^{1/p'(a)} x^{-1/p'(x)})^{p(x)} dx/x`, assembled in log space.
pub fn c4_value(p: &ExponentFunction, mesh: &Arc<Mesh>, a: f64, side: Side, delta: f64) -> Result<f64> {
    C4Integrand::new(p, mesh).value(p.ln_phi(a, side), a, delta)
}

/// `p` and `ln phi` cached at the mesh nodes.
struct C4Integrand {
    mesh: Arc<Mesh>,
    ps: Vec<f64>,
    ln_phi: Vec<f64>,
}

impl C4Integrand {
    fn new(p: &ExponentFunction, mesh: &Arc<Mesh>) -> Self {
        let nodes = mesh.xs().iter().zip(mesh.sides());
        Self {
            mesh: mesh.clone(),
            ps: nodes.clone().map(|(&x, &s)| p.value(x, s)).collect(),
            ln_phi: nodes.map(|(&x, &s)| p.ln_phi(x, s)).collect(),
        }
    }

    fn value(&self, ln_phi_a: f64, a: f64, delta: f64) -> Result<f64> {
        let i0 = self.mesh.cell_of(a);
        let i1 = (self.mesh.first_at_or_after(delta) + 1).min(self.mesh.len());
        let mut vals = vec![0.0; self.mesh.len()];
        let nodes = self.ps[i0..i1].iter().zip(&self.ln_phi[i0..i1]);
        for (slot, (&p, &lp)) in vals[i0..i1].iter_mut().zip(nodes) {
            let e = p * (lp - ln_phi_a);
            if e > LN_OVERFLOW {
                return Ok(f64::INFINITY);
            }
            *slot = e.exp();
        }
        let g = SampledFunction::new(self.mesh.clone(), vals, Interp::PowerLaw)?;
        g.integrate_dlog(a, delta)
    }
}

pub fn criterion_c4(p: &ExponentFunction, mesh: &Arc<Mesh>, delta: f64) -> Result<BoundednessVerdict> {
    let integrand = C4Integrand::new(p, mesh);
    let series = scan_points(mesh, delta)
        .par_iter()
        .map(|s| {
            let v = integrand.value(integrand.ln_phi[s.index], s.x, delta)?;
            Ok(SeriesPoint::exact(s.x, v))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(classify(series, mesh.x_min()))
}

/// `‖x^{-1}‖_{(a,delta)} a^{1/p'(a)}` with the norm bracket carried into `lo`/`hi`.
pub fn criterion_c5(
    p: &ExponentFunction,
    mesh: &Arc<Mesh>,
    delta: f64,
    tol: f64,
) -> Result<BoundednessVerdict> {
    let base = ModularFn::new(&inverse_x(mesh)?, p, Domain::Range(mesh.x_min(), delta))?;
    let series = scan_points(mesh, delta)
        .par_iter()
        .map(|s| {
            let n = base.with_domain(Domain::Range(s.x, delta))?.norm(tol)?;
            let scale = (-p.ln_phi(s.x, s.side)).exp();
            Ok(SeriesPoint {
                param: s.x,
                value: n.value * scale,
                lo: n.bracket.0 * scale,
                hi: n.bracket.1 * scale,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(classify(series, mesh.x_min()))
}
