//! Scenario execution and the text summaries printed by the binary.

use std::fmt::Write as _;
use std::time::Instant;

use crate::cli::catalog::CATALOG;
use crate::cli::config::ScenarioConfig;
use crate::cli::report::RunReport;
use crate::criteria::audit::{equivalence_audit, AuditConfig, CriterionReport};
use crate::criteria::Criterion;
use crate::error::Result;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_INCONSISTENT: i32 = 2;

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunReport> {
    let start = Instant::now();
    let report = equivalence_audit(&cfg.label(), cfg.exponent_function(), &cfg.audit_config())?;
    Ok(RunReport::new(cfg.clone(), report, start.elapsed().as_secs_f64()))
}

/// Audits every catalog entry in catalog order.
pub fn audit_all(cfg: &AuditConfig) -> Result<Vec<CriterionReport>> {
    CATALOG.iter().map(|e| equivalence_audit(e.name, &e.exponent(), cfg)).collect()
}

pub fn catalog_listing() -> String {
    let width = CATALOG.iter().map(|e| e.name.len()).max().unwrap_or(0);
    CATALOG.iter().map(|e| format!("{:width$}  {}\n", e.name, e.description)).collect()
}

/// One line per computed criterion, then the agreement outcome.
pub fn summary(r: &CriterionReport) -> String {
    let mut s = format!(
        "{}: {:?} on (0, {}), p(0) = {}, p in [{}, {}], delta = {}\n",
        r.exponent, r.monotonicity.class, r.monotonicity.certified_on, r.p0, r.p_minus, r.p_plus, r.delta
    );
    for c in Criterion::ALL {
        let Some(v) = r.verdict(c) else { continue };
        let _ = write!(s, "  {:<12} {:<12} ", c.name(), v.class.to_string());
        match (&r.c1, c) {
            // The C1 trend is read from the scale families; the headline is the overall lower bound.
            (Some(c1), Criterion::C1) => {
                let _ = writeln!(s, "sup {:<12.6e} ({})", c1.sup, c1.argmax.as_deref().unwrap_or("-"));
            }
            _ => {
                let _ = writeln!(s, "sup {:<12.6e} at {} = {:.3e}", v.sup_value, c.param_name(), v.sup_param);
            }
        }
    }
    let g = &r.agreement;
    let _ = writeln!(
        s,
        "  agreement: rule {:?}, {}{}{}",
        g.rule,
        if r.consistent() { "consistent" } else { "INCONSISTENT" },
        if g.expected_divergent { ", expected divergent" } else { "" },
        if g.degenerate { ", degenerate constant" } else { "" },
    );
    for n in &g.notes {
        let _ = writeln!(s, "    {n}");
    }
    s
}

/// One row per entry for `audit-all`.
pub fn audit_table(reports: &[CriterionReport]) -> String {
    let cols = [
        Criterion::A,
        Criterion::B,
        Criterion::C1,
        Criterion::C2,
        Criterion::C3,
        Criterion::C4,
        Criterion::C5,
    ];
    let mut s = format!("{:<20}", "exponent");
    for c in cols {
        let _ = write!(s, " {:<12}", c.name());
    }
    s.push_str(" agreement\n");
    for r in reports {
        let _ = write!(s, "{:<20}", r.exponent);
        for c in cols {
            let class = r.class_of(c).map_or("-".to_string(), |v| v.to_string());
            let _ = write!(s, " {class:<12}");
        }
        s.push_str(if r.consistent() { " ok\n" } else { " FAIL\n" });
    }
    s
}
