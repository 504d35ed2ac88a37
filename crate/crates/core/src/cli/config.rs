//! Scenario configuration: JSON in, validated [`ScenarioConfig`] out.
//!
//! Omitted fields take the defaults of [`AuditConfig`]. Syntax and type
//! errors abort parsing; range violations are collected and reported
//! together, each with a dotted field path.

use std::collections::BTreeSet;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::cli::catalog;
use crate::criteria::audit::{AuditConfig, FamilyKind};
use crate::criteria::Criterion;
use crate::error::{Error, Result, Violation};
use crate::exponent::{ExponentFunction, Family};
use crate::grid::MIN_POINTS;

/// Where the exponent comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExponentSpec {
    Catalog { catalog: String },
    Family(Family),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(with = "crate::float")]
    pub x_min: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    /// Necessity scales `2^{-j}`, `j = 1..=depth`. Omitted: down to the grid floor.
    pub necessity_depth: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomStepSpec {
    pub seed: u64,
    pub pieces: usize,
    pub count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

/// A validated scenario. Serializes back into the input schema.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub exponent: ExponentSpec,
    pub grid: GridSpec,
    pub scan: ScanSpec,
    #[serde(with = "crate::float::opt")]
    pub delta: Option<f64>,
    pub eps_depth: u32,
    #[serde(with = "crate::float")]
    pub tol: f64,
    pub criteria: BTreeSet<Criterion>,
    pub families: BTreeSet<FamilyKind>,
    pub random_step: RandomStepSpec,
    pub output: OutputSpec,
    #[serde(skip)]
    resolved: Option<ExponentFunction>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    exponent: Value,
    grid: Option<GridSpec>,
    #[serde(default)]
    scan: ScanSpec,
    #[serde(default, with = "crate::float::opt")]
    delta: Option<f64>,
    eps_depth: Option<u32>,
    #[serde(default, with = "crate::float::opt")]
    tol: Option<f64>,
    criteria: Option<BTreeSet<Criterion>>,
    families: Option<BTreeSet<FamilyKind>>,
    random_step: Option<RandomStepSpec>,
    #[serde(default)]
    output: OutputSpec,
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))?;
    let d = AuditConfig::default();
    let mut errs = Vec::new();
    let mut bad = |path: &str, message: String| {
        errs.push(Violation { path: path.to_string(), message });
    };

    let (exponent, resolved) = match resolve_exponent(&raw.exponent) {
        Ok(pair) => (Some(pair.0), Some(pair.1)),
        Err(v) => {
            bad(&v.path, v.message);
            (None, None)
        }
    };

    let grid = raw.grid.unwrap_or(GridSpec { x_min: d.x_min, n: d.n });
    if !(grid.x_min > 0.0 && grid.x_min <= 1e-3) {
        bad("grid.x_min", format!("must lie in (0, 1e-3], got {}", grid.x_min));
    }
    if grid.n < MIN_POINTS {
        bad("grid.n", format!("n < {MIN_POINTS} (got {})", grid.n));
    }
    if let Some(j) = raw.scan.necessity_depth {
        if j == 0 {
            bad("scan.necessity_depth", "must be at least 1".into());
        } else if grid.x_min > 0.0 && (-(j as f64 + 1.0)).exp2() <= grid.x_min {
            bad("scan.necessity_depth", format!("2^-{} lies below grid.x_min", j + 1));
        }
    }
    if let Some(delta) = raw.delta {
        if !(delta > 4.0 * grid.x_min && delta <= 1.0) {
            bad("delta", format!("must lie in (4 x_min, 1], got {delta}"));
        }
    }
    let eps_depth = raw.eps_depth.unwrap_or(d.eps_depth);
    if !(1..=60).contains(&eps_depth) {
        bad("eps_depth", format!("must lie in 1..=60, got {eps_depth}"));
    }
    let tol = raw.tol.unwrap_or(d.tol);
    if !(tol > 0.0 && tol <= 1e-3) {
        bad("tol", format!("must lie in (0, 1e-3], got {tol}"));
    }
    let families = raw.families.unwrap_or(d.families);
    let random_step = raw.random_step.unwrap_or(RandomStepSpec {
        seed: d.random_seed,
        pieces: d.random_pieces,
        count: d.random_count,
    });
    if families.contains(&FamilyKind::RandomStep) {
        if random_step.pieces == 0 {
            bad("random_step.pieces", "must be at least 1".into());
        }
        if random_step.count == 0 {
            bad("random_step.count", "must be at least 1".into());
        }
    }

    if !errs.is_empty() {
        return Err(Error::ConfigInvalid(errs));
    }
    Ok(ScenarioConfig {
        exponent: exponent.expect("checked above"),
        grid,
        scan: raw.scan,
        delta: raw.delta,
        eps_depth,
        tol,
        criteria: raw.criteria.unwrap_or(d.criteria),
        families,
        random_step,
        output: raw.output,
        resolved,
    })
}

fn resolve_exponent(v: &Value) -> std::result::Result<(ExponentSpec, ExponentFunction), Violation> {
    let violation = |path: String, message: String| Violation { path, message };
    if let Some(name) = v.get("catalog") {
        let name =
            name.as_str().ok_or_else(|| violation("exponent.catalog".into(), "must be a string".into()))?;
        if v.as_object().is_some_and(|o| o.len() > 1) {
            return Err(violation("exponent".into(), "a catalog reference takes no other fields".into()));
        }
        let entry = catalog::lookup(name).ok_or_else(|| {
            let known = catalog::names().join(", ");
            violation("exponent.catalog".into(), format!("unknown entry {name:?}; known: {known}"))
        })?;
        return Ok((ExponentSpec::Catalog { catalog: name.to_string() }, entry.exponent()));
    }
    let family: Family =
        serde_json::from_value(v.clone()).map_err(|e| violation("exponent".into(), e.to_string()))?;
    match ExponentFunction::new(family.clone()) {
        Ok(p) => Ok((ExponentSpec::Family(family), p)),
        Err(Error::Parameter(msg)) => {
            // Parameter messages lead with the offending field name.
            let field: String = msg.chars().take_while(|c| c.is_ascii_alphanumeric() || *c == '_').collect();
            let path = if field.is_empty() { "exponent".to_string() } else { format!("exponent.{field}") };
            Err(violation(path, msg))
        }
        Err(e) => Err(violation("exponent".into(), e.to_string())),
    }
}

impl ScenarioConfig {
    pub fn exponent_function(&self) -> &ExponentFunction {
        self.resolved.as_ref().expect("validated config carries its exponent")
    }

    /// Catalog name, or the family tag for inline exponents.
    pub fn label(&self) -> String {
        match &self.exponent {
            ExponentSpec::Catalog { catalog } => catalog.clone(),
            ExponentSpec::Family(f) => serde_json::to_value(f)
                .ok()
                .and_then(|v| v.get("family").and_then(Value::as_str).map(str::to_string))
                .unwrap_or_else(|| "custom".into()),
        }
    }

    pub fn audit_config(&self) -> AuditConfig {
        AuditConfig {
            x_min: self.grid.x_min,
            n: self.grid.n,
            delta: self.delta,
            tol: self.tol,
            eps_depth: self.eps_depth,
            necessity_depth: self.scan.necessity_depth,
            criteria: self.criteria.clone(),
            families: self.families.clone(),
            random_seed: self.random_step.seed,
            random_pieces: self.random_step.pieces,
            random_count: self.random_step.count,
        }
    }
}

impl<'de> Deserialize<'de> for ScenarioConfig {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        parse_config(&v.to_string()).map_err(serde::de::Error::custom)
    }
}
