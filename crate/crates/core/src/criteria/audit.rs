//! Runs every criterion on one exponent and checks that the verdicts are
//! consistent with the known equivalences and implications.

use std::collections::BTreeSet;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::verdict::tail_len;
use super::*;
use crate::exponent::{Monotonicity, MonotonicityClass};
use crate::grid::LogGrid;
use crate::hardy::{operator_norm_lower_bound, LowerBound, TestFamily};
use crate::lpnorm::DEFAULT_TOL;

/// Relative slack for inequalities that hold exactly on the shared nodes.
const EXACT_SLACK: f64 = 1e-9;
/// Relative slack for inequalities that compare different quadratures.
const CHAIN_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    Power,
    Necessity,
    Dyadic,
    RandomStep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditConfig {
    #[serde(with = "crate::float")]
    pub x_min: f64,
    pub n: usize,
    /// Upper end of the scans; `None` picks 1 or the monotone prefix.
    #[serde(with = "crate::float::opt")]
    pub delta: Option<f64>,
    #[serde(with = "crate::float")]
    pub tol: f64,
    pub eps_depth: u32,
    /// Necessity scales `a = 2^{-j}`, `j = 1..=depth`; `None` reaches the bottom of the grid.
    pub necessity_depth: Option<u32>,
    pub criteria: BTreeSet<Criterion>,
    pub families: BTreeSet<FamilyKind>,
    pub random_seed: u64,
    pub random_pieces: usize,
    pub random_count: usize,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self {
            x_min: 1e-12,
            n: 1201,
            delta: None,
            tol: DEFAULT_TOL,
            eps_depth: 12,
            necessity_depth: None,
            criteria: Criterion::ALL.into_iter().collect(),
            families: [FamilyKind::Power, FamilyKind::Necessity, FamilyKind::Dyadic].into_iter().collect(),
            random_seed: 1,
            random_pieces: 6,
            random_count: 8,
        }
    }
}

/// Empirical operator-norm lower bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct C1Report {
    /// Trend of the scale-indexed families (necessity and dyadic indicators) in `a`.
    pub verdict: BoundednessVerdict,
    /// Scale envelope with the power-family supremum as a floor.
    #[serde(with = "crate::float::vec")]
    pub combined_levels: Vec<f64>,
    /// `(max - min) / max` over the last levels of `combined_levels`.
    #[serde(with = "crate::float")]
    pub combined_variation: f64,
    #[serde(with = "crate::float")]
    pub sup: f64,
    pub argmax: Option<String>,
    /// Largest head contribution below `x_min` among the members' modulars.
    #[serde(with = "crate::float")]
    pub truncation_bias: f64,
    pub families: Vec<LowerBound>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub pass: bool,
    /// Number of inequalities evaluated.
    pub checked: usize,
    /// Smallest relative margin `(rhs - lhs) / rhs` seen (negative on failure).
    #[serde(with = "crate::float")]
    pub worst_margin: f64,
    pub note: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CrossChecks {
    /// C2 bounded if and only if C3 bounded.
    pub c2_iff_c3: Option<Check>,
    /// C4 bounded implies phi almost decreasing and C2 bounded.
    pub c4_implies_c2: Option<Check>,
    /// `s(a) <= max(R^{p+}, R^{p-}) K` with `R` the C5 ratio.
    pub c5_implies_c4: Option<Check>,
    /// `max(Q^{p-}, Q^{p+}) >= 2^{-p+} s(a)` for the necessity functions.
    pub necessity_chain: Option<Check>,
}

impl CrossChecks {
    pub fn all_pass(&self) -> bool {
        [&self.c2_iff_c3, &self.c4_implies_c2, &self.c5_implies_c4, &self.necessity_chain]
            .iter()
            .all(|c| c.as_ref().is_none_or(|c| c.pass))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    /// `p` nonincreasing near 0: the inequality holds without further conditions.
    Nonincreasing,
    /// `p` nondecreasing near 0: the scale criteria are equivalent.
    Nondecreasing,
    /// No monotonicity near 0: nothing to compare.
    Unconstrained,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agreement {
    pub rule: Rule,
    pub expected: Option<VerdictClass>,
    pub flag: bool,
    /// Set when `p(0) = 1` forces divergence.
    pub expected_divergent: bool,
    /// Set for nonincreasing `p` with `p- = 1`, where the bounded conclusion is not covered.
    pub degenerate: bool,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub exponent: String,
    pub monotonicity: MonotonicityClass,
    #[serde(with = "crate::float")]
    pub p0: f64,
    #[serde(with = "crate::float")]
    pub p_minus: f64,
    #[serde(with = "crate::float")]
    pub p_plus: f64,
    #[serde(with = "crate::float")]
    pub delta: f64,
    pub a: Option<BoundednessVerdict>,
    pub b: Option<ConditionB>,
    pub c1: Option<C1Report>,
    pub c2: Option<BoundednessVerdict>,
    pub c3: Option<CriterionC3>,
    pub c4: Option<BoundednessVerdict>,
    pub c5: Option<BoundednessVerdict>,
    pub oscillation: Option<BoundednessVerdict>,
    pub doubling: Option<BoundednessVerdict>,
    pub cross_checks: CrossChecks,
    pub agreement: Agreement,
}

impl CriterionReport {
    /// Agreement holds and every cross-check passes.
    pub fn consistent(&self) -> bool {
        self.agreement.flag && self.cross_checks.all_pass()
    }

    /// Classes of the computed scale criteria C2..C5, in order.
    pub fn scale_classes(&self) -> Vec<(Criterion, VerdictClass)> {
        let mut out = Vec::new();
        if let Some(v) = &self.c2 {
            out.push((Criterion::C2, v.class));
        }
        if let Some(v) = &self.c3 {
            out.push((Criterion::C3, v.verdict.class));
        }
        if let Some(v) = &self.c4 {
            out.push((Criterion::C4, v.class));
        }
        if let Some(v) = &self.c5 {
            out.push((Criterion::C5, v.class));
        }
        out
    }

    pub fn class_of(&self, c: Criterion) -> Option<VerdictClass> {
        self.verdict(c).map(|v| v.class)
    }

    /// The verdict behind a criterion; C1, B and C3 expose their headline verdict.
    pub fn verdict(&self, c: Criterion) -> Option<&BoundednessVerdict> {
        match c {
            Criterion::A => self.a.as_ref(),
            Criterion::B => self.b.as_ref().map(|v| &v.verdict),
            Criterion::C1 => self.c1.as_ref().map(|v| &v.verdict),
            Criterion::C2 => self.c2.as_ref(),
            Criterion::C3 => self.c3.as_ref().map(|v| &v.verdict),
            Criterion::C4 => self.c4.as_ref(),
            Criterion::C5 => self.c5.as_ref(),
            Criterion::Oscillation => self.oscillation.as_ref(),
            Criterion::Doubling => self.doubling.as_ref(),
        }
    }
}

/// Upper end of the scans: the override, or the monotone prefix when `p`
/// is nondecreasing only near the origin.
pub fn choose_delta(mono: &MonotonicityClass, over: Option<f64>) -> f64 {
    match over {
        Some(d) => d,
        None if mono.class == Monotonicity::Nondecreasing || mono.constant => mono.certified_on,
        None => 1.0,
    }
}

pub fn equivalence_audit(name: &str, p: &ExponentFunction, cfg: &AuditConfig) -> Result<CriterionReport> {
    let grid = LogGrid::new(cfg.x_min, cfg.n)?;
    let mono = p.monotone_prefix();
    let delta = choose_delta(&mono, cfg.delta);
    if !(delta > 4.0 * cfg.x_min && delta <= 1.0) {
        return Err(crate::Error::Parameter(format!("delta = {delta} must lie in (4 x_min, 1]")));
    }
    let kinks: Vec<f64> = if delta < 1.0 { vec![delta] } else { Vec::new() };
    let mesh = Arc::new(Mesh::for_exponent(&grid, p, &[], &kinks));
    let want = |c| cfg.criteria.contains(&c);
    let bounds = p.bounds(0.0, 1.0, &grid)?;

    let a = want(Criterion::A).then(|| condition_a(p, &mesh));
    let b = want(Criterion::B).then(|| condition_b(p, &mesh));
    let oscillation = want(Criterion::Oscillation).then(|| dyadic_oscillation(p, &mesh));
    let doubling = want(Criterion::Doubling).then(|| phi_doubling(p, &mesh));
    let c2 = want(Criterion::C2).then(|| criterion_c2(p, &mesh, delta)).transpose()?;
    let c3 =
        want(Criterion::C3).then(|| criterion_c3(p, &mesh, delta, &c3_eps_list(p, cfg.x_min, cfg.eps_depth)));
    let need_c4 = want(Criterion::C4) || want(Criterion::C5) || want(Criterion::C1);
    let c4_full = need_c4.then(|| criterion_c4(p, &mesh, delta)).transpose()?;
    let c5 = want(Criterion::C5).then(|| criterion_c5(p, &mesh, delta, cfg.tol)).transpose()?;
    let c1 = want(Criterion::C1).then(|| empirical_c1(p, &grid, cfg)).transpose()?;

    let mut checks = CrossChecks::default();
    if let (Some(v2), Some(v3)) = (&c2, &c3) {
        let pass = (v2.class == VerdictClass::Bounded) == (v3.verdict.class == VerdictClass::Bounded);
        checks.c2_iff_c3 = Some(Check {
            pass,
            checked: 1,
            worst_margin: 0.0,
            note: format!("C2 {}, C3 {}", v2.class, v3.verdict.class),
        });
    }
    if let (Some(v4), Some(v2)) = (&c4_full, &c2) {
        checks.c4_implies_c2 = Some(c4_implies_c2(p, &mesh, delta, v4, v2));
    }
    if let (Some(v4), Some(v5)) = (&c4_full, &c5) {
        checks.c5_implies_c4 = Some(c5_implies_c4(p, &mesh, delta, v4, v5)?);
    }
    let globally_nondecreasing =
        (mono.class == Monotonicity::Nondecreasing || mono.constant) && mono.certified_on >= 1.0;
    if let (Some(r1), true) = (&c1, globally_nondecreasing) {
        checks.necessity_chain = Some(necessity_chain(p, &mesh, r1)?);
    }

    let c4 = if want(Criterion::C4) { c4_full } else { None };
    let mut report = CriterionReport {
        exponent: name.to_string(),
        p0: p.limit_at_origin().value,
        p_minus: bounds.lower,
        p_plus: bounds.upper,
        delta,
        monotonicity: mono,
        a,
        b,
        c1,
        c2,
        c3,
        c4,
        c5,
        oscillation,
        doubling,
        cross_checks: checks,
        agreement: Agreement {
            rule: Rule::Unconstrained,
            expected: None,
            flag: true,
            expected_divergent: false,
            degenerate: false,
            notes: Vec::new(),
        },
    };
    report.agreement = agreement(&report);
    Ok(report)
}

fn empirical_c1(p: &ExponentFunction, grid: &LogGrid, cfg: &AuditConfig) -> Result<C1Report> {
    let mut families = Vec::new();
    for kind in &cfg.families {
        let fam = match kind {
            FamilyKind::Power => TestFamily::default_power(p),
            FamilyKind::Necessity => match cfg.necessity_depth {
                Some(j) => TestFamily::Necessity { scales: (1..=j as i32).map(|j| 2f64.powi(-j)).collect() },
                None => TestFamily::default_necessity(grid),
            },
            FamilyKind::Dyadic => TestFamily::default_dyadic(grid),
            FamilyKind::RandomStep => TestFamily::RandomStep {
                seed: cfg.random_seed,
                pieces: cfg.random_pieces,
                count: cfg.random_count,
            },
        };
        if fam.is_empty() {
            continue;
        }
        families.push(operator_norm_lower_bound(p, &fam, grid, cfg.tol)?);
    }
    let scale_series: Vec<SeriesPoint> = families
        .iter()
        .filter(|f| f.family == "necessity" || f.family == "dyadic-indicator")
        .flat_map(|f| f.members.iter())
        .filter_map(|m| {
            m.quotient.map(|q| SeriesPoint { param: m.param, value: q.value, lo: q.lo, hi: q.hi })
        })
        .collect();
    let mut scale_series = scale_series;
    scale_series.sort_by(|a, b| a.param.total_cmp(&b.param));
    let verdict = classify(scale_series, grid.x_min());
    let power_sup = families.iter().filter(|f| f.family == "power").map(|f| f.sup).fold(0.0, f64::max);
    let combined_levels: Vec<f64> = verdict.levels.iter().map(|v| v.max(power_sup)).collect();
    let combined_variation = variation(&combined_levels);
    // Deterministic reduction: family order, then member order.
    let mut best: Option<(f64, String)> = None;
    for f in &families {
        if let Some(i) = f.argmax {
            let q = f.members[i].quotient.map_or(0.0, |q| q.value);
            if best.as_ref().is_none_or(|(b, _)| q > *b) {
                best = Some((q, f.members[i].label.clone()));
            }
        }
    }
    let truncation_bias = families
        .iter()
        .flat_map(|f| f.members.iter())
        .map(|m| m.truncation_bias)
        .filter(|b| b.is_finite())
        .fold(0.0, f64::max);
    Ok(C1Report {
        verdict,
        combined_levels,
        combined_variation,
        sup: best.as_ref().map_or(0.0, |b| b.0),
        argmax: best.map(|b| b.1),
        truncation_bias,
        families,
    })
}

/// `(max - min) / max` over the levels the verdict looks at.
pub fn variation(levels: &[f64]) -> f64 {
    let k = tail_len(levels.len()).min(levels.len());
    let tail = &levels[levels.len() - k..];
    let max = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = tail.iter().copied().fold(f64::INFINITY, f64::min);
    if max > 0.0 {
        (max - min) / max
    } else {
        0.0
    }
}

fn c4_implies_c2(
    p: &ExponentFunction,
    mesh: &Mesh,
    delta: f64,
    c4: &BoundednessVerdict,
    c2: &BoundednessVerdict,
) -> Check {
    let phi: Vec<f64> = mesh
        .xs()
        .iter()
        .zip(mesh.sides())
        .take_while(|(&x, _)| x <= delta)
        .map(|(&x, &s)| p.ln_phi(x, s).exp())
        .collect();
    let k = almost_decreasing_constant(&phi);
    let applies = c4.class == VerdictClass::Bounded;
    let pass = !applies || (k < ALMOST_DECREASING_LIMIT && c2.class == VerdictClass::Bounded);
    Check {
        pass,
        checked: usize::from(applies),
        worst_margin: (ALMOST_DECREASING_LIMIT - k) / ALMOST_DECREASING_LIMIT,
        note: format!("C4 {}, phi almost-decreasing constant {k:.4}, C2 {}", c4.class, c2.class),
    }
}

fn c5_implies_c4(
    p: &ExponentFunction,
    mesh: &Arc<Mesh>,
    delta: f64,
    c4: &BoundednessVerdict,
    c5: &BoundednessVerdict,
) -> Result<Check> {
    let (p_lo, p_hi) = (p.inf(), p.sup());
    let base = ModularFn::new(&inverse_x(mesh)?, p, Domain::Range(mesh.x_min(), delta))?;
    let scan = scan_points(mesh, delta);
    let margins = scan
        .par_iter()
        .zip(c4.series.par_iter().zip(c5.series.par_iter()))
        .map(|(s, (s4, s5))| {
            // R = lambda_hi / phi(a); K = I(x^{-1} / lambda_hi) <= 1.
            let r = s5.hi;
            let lambda_hi = r * p.ln_phi(s.x, s.side).exp();
            let k = base.with_domain(Domain::Range(s.x, delta))?.at(lambda_hi).value;
            let rhs = r.powf(p_hi).max(r.powf(p_lo)) * k;
            Ok(if rhs > 0.0 { (rhs - s4.value) / rhs } else { f64::NEG_INFINITY })
        })
        .collect::<Result<Vec<f64>>>()?;
    let worst = margins.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(Check {
        pass: worst >= -EXACT_SLACK,
        checked: margins.len(),
        worst_margin: worst,
        note: "s(a) <= max(R^p+, R^p-) K".into(),
    })
}

fn necessity_chain(p: &ExponentFunction, mesh: &Arc<Mesh>, c1: &C1Report) -> Result<Check> {
    let (p_lo, p_hi) = (p.inf(), p.sup());
    let mut worst = f64::INFINITY;
    let mut checked = 0;
    for fam in c1.families.iter().filter(|f| f.family == "necessity") {
        for m in &fam.members {
            let Some(q) = m.quotient else { continue };
            let s = c4_value(p, mesh, m.param, Side::Right, 1.0)?;
            let rhs = 2f64.powf(-p_hi) * s;
            let lhs = q.value.powf(p_lo).max(q.value.powf(p_hi));
            worst = worst.min((lhs - rhs) / rhs);
            checked += 1;
        }
    }
    Ok(Check {
        pass: worst >= -CHAIN_SLACK,
        checked,
        worst_margin: worst,
        note: "max(Q^p-, Q^p+) >= 2^-p+ s(a)".into(),
    })
}

fn agreement(r: &CriterionReport) -> Agreement {
    let mono = &r.monotonicity;
    let mut notes = Vec::new();
    let p0_is_one = (r.p0 - 1.0).abs() < 1e-12;
    let c1 = r.c1.as_ref().map(|c| c.verdict.class);
    if mono.constant || mono.class == Monotonicity::Nondecreasing {
        let classes = r.scale_classes();
        let first = classes.first().map(|c| c.1).or(c1);
        let mut flag = true;
        for (c, class) in &classes {
            if Some(*class) != first {
                flag = false;
                notes.push(format!("{} is {class}, expected {}", c.name(), first.unwrap()));
            }
        }
        if first == Some(VerdictClass::Inconclusive) {
            flag = false;
            notes.push("scale criteria are inconclusive".into());
        }
        if let (Some(c1), Some(first)) = (c1, first) {
            if c1 != first {
                flag = false;
                notes.push(format!("C1 trend is {c1}, scale criteria are {first}"));
            }
        }
        let expected = if p0_is_one { Some(VerdictClass::Divergent) } else { first };
        if p0_is_one && first != Some(VerdictClass::Divergent) {
            flag = false;
            notes.push("p(0) = 1 forces divergence".into());
        }
        if mono.certified_on < 1.0 {
            notes.push(format!("criteria localized to (0, {})", r.delta));
        }
        return Agreement {
            rule: Rule::Nondecreasing,
            expected,
            flag,
            expected_divergent: p0_is_one,
            degenerate: false,
            notes,
        };
    }
    if mono.class == Monotonicity::Nonincreasing {
        let degenerate = (r.p_minus - 1.0).abs() < 1e-12;
        let mut flag = true;
        if degenerate {
            notes.push("p- = 1: boundedness is not covered".into());
        } else if let Some(c1) = c1 {
            if c1 != VerdictClass::Bounded {
                flag = false;
                notes.push(format!("C1 trend is {c1}, expected bounded"));
            }
        }
        return Agreement {
            rule: Rule::Nonincreasing,
            expected: Some(VerdictClass::Bounded),
            flag,
            expected_divergent: false,
            degenerate,
            notes,
        };
    }
    notes.push("p is not monotone near 0".into());
    Agreement {
        rule: Rule::Unconstrained,
        expected: None,
        flag: true,
        expected_divergent: false,
        degenerate: false,
        notes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::Sign;

    #[test]
    fn constant_two_agrees() {
        let p = ExponentFunction::constant(2.0).unwrap();
        let r = equivalence_audit("constant-2", &p, &AuditConfig::default()).unwrap();
        for c in Criterion::ALL {
            assert_eq!(r.class_of(c), Some(VerdictClass::Bounded), "{}", c.name());
        }
        assert!(r.consistent(), "{:?} {:?}", r.agreement, r.cross_checks);
    }

    #[test]
    fn log_perturbed_half() {
        let p = ExponentFunction::log_perturbed(2.0, 1.0, 0.5, Sign::Plus).unwrap();
        let r = equivalence_audit("log-perturbed-a05", &p, &AuditConfig::default()).unwrap();
        assert_eq!(r.class_of(Criterion::A), Some(VerdictClass::Divergent));
        assert_eq!(r.class_of(Criterion::B), Some(VerdictClass::Bounded));
        for (c, class) in r.scale_classes() {
            assert_eq!(class, VerdictClass::Bounded, "{}", c.name());
        }
        assert!(r.consistent(), "{:?} {:?}", r.agreement, r.cross_checks);
    }
}
