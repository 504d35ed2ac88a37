//! The serialized result of one scenario run.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cli::config::ScenarioConfig;
use crate::criteria::audit::CriterionReport;
use crate::criteria::verdict::SeriesPoint;
use crate::criteria::Criterion;
use crate::error::{Error, Result};
use crate::exponent::Family;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Contributions of the extrapolated head below `x_min`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TruncationBias {
    /// Largest bias over all test-function quotients.
    #[serde(with = "crate::float")]
    pub max: f64,
    /// Largest bias per test family.
    pub per_family: BTreeMap<String, BiasValue>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BiasValue(#[serde(with = "crate::float")] pub f64);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub config: ScenarioConfig,
    /// The exponent after catalog lookup.
    pub exponent: Family,
    pub report: CriterionReport,
    pub truncation_bias: TruncationBias,
    pub consistent: bool,
    /// Excluded from the comparison canon; see [`RunReport::canonical_json`].
    #[serde(with = "crate::float")]
    pub wall_clock_seconds: f64,
}

/// A plottable series: one CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    /// File stem, e.g. `c2` or `c1-power`.
    pub name: String,
    /// Header of the parameter column.
    pub param: &'static str,
    pub points: Vec<SeriesPoint>,
}

impl RunReport {
    pub fn new(config: ScenarioConfig, report: CriterionReport, wall_clock_seconds: f64) -> Self {
        let exponent = config.exponent_function().family().clone();
        let mut bias = TruncationBias::default();
        if let Some(c1) = &report.c1 {
            for fam in &c1.families {
                let b =
                    fam.members.iter().map(|m| m.truncation_bias).filter(|b| !b.is_nan()).fold(0.0, f64::max);
                bias.max = bias.max.max(b);
                bias.per_family.insert(fam.family.clone(), BiasValue(b));
            }
        }
        let consistent = report.consistent();
        Self {
            version: VERSION.to_string(),
            config,
            exponent,
            report,
            truncation_bias: bias,
            consistent,
            wall_clock_seconds,
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.consistent {
            0
        } else {
            2
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serialize(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Serialize(e.to_string()))
    }

    /// JSON with the timing field zeroed: identical configs give identical text.
    pub fn canonical_json(&self) -> Result<String> {
        let mut r = self.clone();
        r.wall_clock_seconds = 0.0;
        r.to_json()
    }

    /// Every series in the report, in criterion order.
    pub fn series(&self) -> Vec<Series> {
        let r = &self.report;
        let mut out = Vec::new();
        for c in Criterion::ALL {
            let stem = c.name().to_lowercase();
            match c {
                Criterion::C1 => {
                    if let Some(c1) = &r.c1 {
                        for fam in &c1.families {
                            let points = fam
                                .members
                                .iter()
                                .filter_map(|m| {
                                    m.quotient.map(|q| SeriesPoint {
                                        param: m.param,
                                        value: q.value,
                                        lo: q.lo,
                                        hi: q.hi,
                                    })
                                })
                                .collect();
                            out.push(Series {
                                name: format!("{stem}-{}", fam.family),
                                param: "param",
                                points,
                            });
                        }
                    }
                }
                _ => {
                    if let Some(v) = r.verdict(c) {
                        out.push(Series { name: stem, param: c.param_name(), points: v.series.clone() });
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::config::parse_config;
    use crate::criteria::audit::equivalence_audit;

    fn small(criteria: &str) -> RunReport {
        let text = format!(
            r#"{{"exponent":{{"catalog":"p-one"}},"grid":{{"x_min":1e-8,"n":241}},"criteria":{criteria}}}"#
        );
        let cfg = parse_config(&text).unwrap();
        let rep = equivalence_audit(&cfg.label(), cfg.exponent_function(), &cfg.audit_config()).unwrap();
        RunReport::new(cfg, rep, 1.25)
    }

    #[test]
    fn json_round_trip_is_lossless() {
        let r = small(r#"["A","B","C1","C2","C3","C4","C5","Oscillation","Doubling"]"#);
        let text = r.to_json().unwrap();
        let back = RunReport::from_json(&text).unwrap();
        assert_eq!(back.to_json().unwrap(), text);
        assert_eq!(back.wall_clock_seconds, 1.25);
        assert_eq!(back.series().len(), r.series().len());
    }

    #[test]
    fn canonical_form_ignores_timing() {
        let a = small(r#"["C2"]"#);
        let mut b = a.clone();
        b.wall_clock_seconds = 99.0;
        assert_ne!(a.to_json().unwrap(), b.to_json().unwrap());
        assert_eq!(a.canonical_json().unwrap(), b.canonical_json().unwrap());
    }

    #[test]
    fn series_follow_selection() {
        let r = small(r#"["C2","Doubling"]"#);
        let names: Vec<_> = r.series().into_iter().map(|s| (s.name, s.param)).collect();
        assert_eq!(names, [("c2".to_string(), "a"), ("doubling".to_string(), "x")]);
        assert!(small("[]").series().is_empty());
    }
}
