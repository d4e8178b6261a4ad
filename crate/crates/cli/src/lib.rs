//! Scenario runner for `hilbund-core`.
//!
//! A scenario is a TOML file naming a model manifold, a partition, a bundle
//! generator, a projection field generator and the check suites to run. The
//! runner executes the suites in a fixed order with per-suite seeded RNG
//! streams and produces a JSON report plus optional CSV tables. The formats
//! are described by the schema files under `schemas/`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod output;
pub mod suites;

use std::path::Path;

use config::{Overrides, ScenarioConfig};
use error::ConfigError;
use output::Report;
use suites::{run_suite, Tables};

/// Report and plot data for one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: Report,
    pub tables: Tables,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.report.passed {
            0
        } else {
            1
        }
    }
}

/// Validates `config` and runs its suites in order.
pub fn run_config(mut config: ScenarioConfig, overrides: &Overrides, timings: bool) -> Result<Outcome, ConfigError> {
    config.apply(overrides);
    let model = config.validate()?;
    let mut tables = Tables::default();
    let results: Vec<_> = config
        .ordered_suites()
        .into_iter()
        .map(|s| run_suite(&config, &model, s, &mut tables))
        .collect();
    Ok(Outcome {
        report: Report::new(config, &results, timings),
        tables,
    })
}

pub fn run_path(path: &Path, overrides: &Overrides, timings: bool) -> Result<Outcome, ConfigError> {
    run_config(ScenarioConfig::load(path)?, overrides, timings)
}
