use std::time::Instant;

use rayon::prelude::*;

use crate::config::ValidConfig;
use crate::report::{CheckReport, Report, SuiteReport, SCHEMA_VERSION};
use crate::sampling::{draw, sample_rng, suite_seed};
use crate::suites::{evaluate, Direction, Measurement, SuiteContext, SuiteId};

/// Runs every configured suite. Suites and samples run in parallel; the
/// report is assembled in configuration and sample order.
pub fn run(cfg: &ValidConfig) -> Report {
    let start = Instant::now();
    let suites: Vec<SuiteReport> = cfg.suites.par_iter().map(|&id| run_suite(cfg, id)).collect();
    Report {
        schema: SCHEMA_VERSION,
        config: cfg.raw.clone(),
        pass: suites.iter().all(|s| s.pass),
        suites,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    }
}

pub fn run_suite(cfg: &ValidConfig, id: SuiteId) -> SuiteReport {
    let start = Instant::now();
    let seed = suite_seed(cfg.raw.seed, id.name());
    let tolerance = cfg.tolerance(id);
    let mut report = SuiteReport {
        suite: id.name().to_string(),
        anchor: id.anchor().to_string(),
        tolerance,
        pass: false,
        max_residual: None,
        seed,
        sample_indices: Vec::new(),
        checks: Vec::new(),
        errors: Vec::new(),
        wall_time_seconds: 0.0,
    };
    let samples = match draw(cfg.raw.samples, seed, &cfg.raw.sampling, &cfg.base, &cfg.weights) {
        Ok(s) => s,
        Err(e) => {
            report.errors.push(format!("sampling: {e}"));
            report.wall_time_seconds = start.elapsed().as_secs_f64();
            return report;
        }
    };
    let ctx = SuiteContext::new(cfg.base.clone(), cfg.weights.clone(), cfg.raw.h, tolerance);
    let results: Vec<_> = samples
        .par_iter()
        .map(|s| evaluate(id, &ctx, s, &mut sample_rng(seed, s.index)))
        .collect();

    let mut checks: Vec<(Measurement, Vec<f64>)> = Vec::new();
    for (s, result) in samples.iter().zip(results) {
        match result {
            Ok(measurements) => {
                report.sample_indices.push(s.index);
                for m in measurements {
                    match checks.iter_mut().find(|(first, _)| first.check == m.check) {
                        Some((_, values)) => values.push(m.residual),
                        None => {
                            let values = vec![m.residual];
                            checks.push((m, values));
                        }
                    }
                }
            }
            Err(e) => report.errors.push(format!("sample {}: {e}", s.index)),
        }
    }
    report.checks = checks
        .into_iter()
        .map(|(m, values)| CheckReport::new(m.check.to_string(), m.direction, m.tolerance, values))
        .collect();
    let consistent = report
        .checks
        .iter()
        .all(|c| c.residuals.len() == report.sample_indices.len());
    if !consistent {
        report.errors.push("checks were not evaluated at every sample".into());
    }
    report.max_residual = report
        .checks
        .iter()
        .filter(|c| c.direction == Direction::AtMost)
        .map(|c| c.max_residual)
        .reduce(f64::max);
    report.pass = report.errors.is_empty() && !report.checks.is_empty() && report.checks.iter().all(|c| c.pass);
    report.wall_time_seconds = start.elapsed().as_secs_f64();
    report
}
