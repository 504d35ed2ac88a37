//! Trend classification of criterion series on a finite grid.
//!
//! A series `(a, value)` is grouped into dyadic levels of `L = ln(1/a)`:
//! level `m` is the block `(L_max/2^{m+1}, L_max/2^m]` with `L_max = ln(1/x_min)`.
//! Each level contributes its block supremum and the levels are read from
//! coarse to fine through a running maximum, so the envelope is the
//! supremum of the series over `[a_m, 1/2]`. The verdict looks at the
//! finest levels only.

use serde::{Deserialize, Serialize};

/// Relative spread of the last levels below which a series counts as bounded.
pub const PLATEAU: f64 = 0.20;
/// Ratio of the last levels above which a strictly increasing series diverges.
pub const GROWTH: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerdictClass {
    Bounded,
    Divergent,
    Inconclusive,
}

impl std::fmt::Display for VerdictClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            VerdictClass::Bounded => "bounded",
            VerdictClass::Divergent => "divergent",
            VerdictClass::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    #[serde(with = "crate::float")]
    pub param: f64,
    #[serde(with = "crate::float")]
    pub value: f64,
    #[serde(with = "crate::float")]
    pub lo: f64,
    #[serde(with = "crate::float")]
    pub hi: f64,
}

impl SeriesPoint {
    pub fn exact(param: f64, value: f64) -> Self {
        Self { param, value, lo: value, hi: value }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundednessVerdict {
    pub class: VerdictClass,
    #[serde(with = "crate::float")]
    pub sup_value: f64,
    /// Where the supremum is attained.
    #[serde(with = "crate::float")]
    pub sup_param: f64,
    /// Level envelope, coarse to fine.
    #[serde(with = "crate::float::vec")]
    pub levels: Vec<f64>,
    /// Least-squares slope of the envelope against level index over the last levels.
    #[serde(with = "crate::float")]
    pub trend_slope: f64,
    pub series: Vec<SeriesPoint>,
}

/// Number of dyadic levels for a grid reaching down to `x_min`: the
/// coarsest block still lies below `a = 1/2`.
pub fn level_count(x_min: f64) -> usize {
    let l_max = -x_min.ln();
    (l_max / std::f64::consts::LN_2).log2().floor().max(1.0) as usize
}

/// Levels used for the verdict.
pub fn tail_len(levels: usize) -> usize {
    3.max(levels.div_ceil(3))
}

/// Envelope of the block suprema, coarse to fine. Empty blocks repeat the previous level.
pub fn level_envelope(series: &[SeriesPoint], x_min: f64) -> Vec<f64> {
    let l_max = -x_min.ln();
    let m_count = level_count(x_min);
    let mut block = vec![f64::NEG_INFINITY; m_count];
    for pt in series {
        let l = -pt.param.ln();
        if l.is_nan() || l <= 0.0 {
            continue;
        }
        // Block m holds L in (L_max/2^{m+1}, L_max/2^m].
        let m = (l_max / l).log2().floor();
        if m < 0.0 {
            // Below x_min only by rounding.
            block[0] = block[0].max(pt.value);
            continue;
        }
        let m = m as usize;
        if m < m_count {
            block[m] = block[m].max(pt.value);
        }
    }
    let mut env = Vec::with_capacity(m_count);
    let mut run = f64::NEG_INFINITY;
    for &b in block.iter().rev() {
        run = run.max(b);
        if run > f64::NEG_INFINITY {
            env.push(run);
        }
    }
    env
}

/// Classifies the finest levels of an envelope.
pub fn classify_levels(levels: &[f64]) -> (VerdictClass, f64) {
    let m = levels.len();
    if levels.iter().any(|v| v.is_infinite() && *v > 0.0) {
        return (VerdictClass::Divergent, f64::INFINITY);
    }
    let k = tail_len(m);
    if m < k {
        return (VerdictClass::Inconclusive, 0.0);
    }
    let tail = &levels[m - k..];
    let slope = lsq_slope(tail);
    let max = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = tail.iter().copied().fold(f64::INFINITY, f64::min);
    if max <= 0.0 || (max - min) / max < PLATEAU {
        return (VerdictClass::Bounded, slope);
    }
    let increasing = tail.windows(2).all(|w| w[1] > w[0]);
    if increasing && min > 0.0 && max / min > GROWTH {
        return (VerdictClass::Divergent, slope);
    }
    (VerdictClass::Inconclusive, slope)
}

fn lsq_slope(ys: &[f64]) -> f64 {
    let n = ys.len() as f64;
    let mx = (n - 1.0) / 2.0;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, &y) in ys.iter().enumerate() {
        let dx = i as f64 - mx;
        sxy += dx * (y - my);
        sxx += dx * dx;
    }
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Builds the verdict for a series over `a` (or `x`) in `[x_min, 1/2]`.
pub fn classify(series: Vec<SeriesPoint>, x_min: f64) -> BoundednessVerdict {
    let levels = level_envelope(&series, x_min);
    let (mut class, trend_slope) = classify_levels(&levels);
    if series.iter().any(|p| p.value.is_nan() || (p.value.is_infinite() && p.value > 0.0)) {
        class = VerdictClass::Divergent;
    }
    let (sup_param, sup_value) = series.iter().fold((f64::NAN, f64::NEG_INFINITY), |(pa, pv), p| {
        if p.value > pv {
            (p.param, p.value)
        } else {
            (pa, pv)
        }
    });
    BoundednessVerdict {
        class,
        sup_value: if series.is_empty() { 0.0 } else { sup_value },
        sup_param,
        levels,
        trend_slope,
        series,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(f: impl Fn(f64) -> f64) -> Vec<SeriesPoint> {
        (1..=1200)
            .map(|i| (-(i as f64) * 27.631 / 1200.0).exp())
            .filter(|&a| a <= 0.5)
            .map(|a| SeriesPoint::exact(a, f(a)))
            .collect()
    }

    #[test]
    fn level_counts() {
        assert_eq!(level_count(1e-12), 5);
        assert_eq!(level_count(1e-10), 5);
        assert_eq!(tail_len(5), 3);
        assert_eq!(tail_len(12), 4);
    }

    #[test]
    fn classes() {
        let v = classify(series(|_| 2.0), 1e-12);
        assert_eq!(v.class, VerdictClass::Bounded);
        assert_eq!(v.levels.len(), 5);
        assert_eq!(v.trend_slope, 0.0);
        let v = classify(series(|a| -a.ln()), 1e-12);
        assert_eq!(v.class, VerdictClass::Divergent);
        assert!(v.trend_slope > 0.0);
        // Decays to zero: the envelope is flat.
        let v = classify(series(|a| 1.0 / (-a.ln()).sqrt()), 1e-12);
        assert_eq!(v.class, VerdictClass::Bounded);
        let v = classify(series(|_| 0.0), 1e-12);
        assert_eq!(v.class, VerdictClass::Bounded);
        // sqrt(L) grows only 1.41x per level pair; over three levels the ratio is 2.
        let v = classify(series(|a| (-a.ln()).sqrt()), 1e-12);
        assert_eq!(v.class, VerdictClass::Divergent);
        let v = classify(series(|a| if a < 1e-6 { f64::INFINITY } else { 1.0 }), 1e-12);
        assert_eq!(v.class, VerdictClass::Divergent);
        // Slow growth that is neither flat nor clearly divergent.
        let v = classify(series(|a| 1.0 + 0.5 * (-a.ln()).ln()), 1e-12);
        assert_eq!(v.class, VerdictClass::Inconclusive);
    }

    #[test]
    fn sup_is_reported() {
        let s = series(|a| a);
        let top = s.iter().map(|p| p.param).fold(0.0, f64::max);
        let v = classify(s, 1e-12);
        assert_eq!(v.sup_value, top);
        assert_eq!(v.sup_param, top);
    }
}
