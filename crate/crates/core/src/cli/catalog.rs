//! Built-in exponents.

use crate::exponent::{ExponentFunction, Sign};

pub struct CatalogEntry {
    pub name: &'static str,
    pub description: &'static str,
    build: fn() -> ExponentFunction,
}

impl CatalogEntry {
    pub fn exponent(&self) -> ExponentFunction {
        (self.build)()
    }
}

fn ok(r: crate::Result<ExponentFunction>) -> ExponentFunction {
    r.expect("catalog parameters are admissible")
}

pub const CATALOG: &[CatalogEntry] = &[
    CatalogEntry { name: "constant-2", description: "p = 2", build: || ok(ExponentFunction::constant(2.0)) },
    CatalogEntry { name: "constant-3", description: "p = 3", build: || ok(ExponentFunction::constant(3.0)) },
    CatalogEntry { name: "p-one", description: "p = 1", build: || ok(ExponentFunction::constant(1.0)) },
    CatalogEntry {
        name: "log-perturbed-a1",
        description: "p = 2 + 1/ln(1/x)",
        build: || ok(ExponentFunction::log_perturbed(2.0, 1.0, 1.0, Sign::Plus)),
    },
    CatalogEntry {
        name: "log-perturbed-a05",
        description: "p = 2 + 1/ln(1/x)^(1/2)",
        build: || ok(ExponentFunction::log_perturbed(2.0, 1.0, 0.5, Sign::Plus)),
    },
    CatalogEntry {
        name: "loglog-perturbed",
        description: "p = 2 + ln ln(1/x) / ln(1/x)",
        build: || ok(ExponentFunction::loglog_perturbed(2.0, 1.0)),
    },
    CatalogEntry {
        name: "step-interior",
        description: "p = 2 on (0, 0.3), 3 on [0.3, 1)",
        build: || ok(ExponentFunction::piecewise_constant(vec![0.3], vec![2.0, 3.0])),
    },
    CatalogEntry {
        name: "piecewise-linear",
        description: "p through (0.05, 1.8), (0.2, 2.2), (0.6, 2.4), constant outside",
        build: || ok(ExponentFunction::piecewise_linear(vec![0.05, 0.2, 0.6], vec![1.8, 2.2, 2.4])),
    },
    CatalogEntry {
        name: "dyadic-jump-default",
        description: "p = 1.5 + sum of 2^(-k/2) [x >= 2^(-2^k)], k = 1..5",
        build: ExponentFunction::dyadic_jump_default,
    },
    CatalogEntry {
        name: "nonincreasing-log",
        description: "p = 3 - 1/ln(1/x)^(1/2)",
        build: || ok(ExponentFunction::log_perturbed(3.0, 1.0, 0.5, Sign::Minus)),
    },
    CatalogEntry {
        name: "hump-local",
        description: "p through (0.1, 2), (0.5, 2.5), (0.9, 2); nondecreasing on (0, 0.5) only",
        build: || ok(ExponentFunction::piecewise_linear(vec![0.1, 0.5, 0.9], vec![2.0, 2.5, 2.0])),
    },
];

pub fn lookup(name: &str) -> Option<&'static CatalogEntry> {
    CATALOG.iter().find(|e| e.name == name)
}

pub fn names() -> Vec<&'static str> {
    CATALOG.iter().map(|e| e.name).collect()
}
