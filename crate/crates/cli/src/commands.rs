use std::fmt::Write as _;
use std::path::Path;

use qcycle_core::{build_cycle, efficiency_table, run_cycle_sampled, CycleReport};
use rayon::prelude::*;

use crate::config::{validate_cycle, RunConfig};
use crate::error::{exit, CliError, CliResult};
use crate::output::{diagram_csv, fmt_float, table_csv, write_atomic, RunReport};

/// Environment variable capping sweep parallelism.
pub const THREADS_ENV: &str = "QCYCLE_NUM_THREADS";

/// Builds and integrates the configured cycle.
pub fn simulate(config: &RunConfig) -> CliResult<CycleReport> {
    let model = config.model()?;
    let spec = build_cycle(&model, &config.cycle, &config.numerics)?;
    Ok(run_cycle_sampled(
        &spec,
        config.output.samples_per_segment,
        &config.numerics,
    )?)
}

/// Runs the cycle, writes the diagram if requested and returns the report
/// JSON. The report goes to `output.report` when set.
pub fn cmd_run(config: &RunConfig) -> CliResult<String> {
    let report = simulate(config)?;
    let json = RunReport::new(config, &report).to_json();
    if let Some(path) = &config.output.diagram {
        write_atomic(path, &diagram_csv(&report))?;
    }
    if let Some(path) = &config.output.report {
        write_atomic(path, &json)?;
    }
    Ok(json)
}

pub fn cmd_table(out: Option<&Path>) -> CliResult<String> {
    let csv = table_csv(&efficiency_table());
    if let Some(path) = out {
        write_atomic(path, &csv)?;
    }
    Ok(csv)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRequest {
    pub param: String,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    /// `(eta_numeric, eta_closed)` on success.
    pub eta: Option<(f64, f64)>,
    /// Exit status the point would have produced under `run`.
    pub status: u8,
}

impl SweepRequest {
    pub fn validate(&self, config: &RunConfig) -> CliResult<()> {
        if config.cycle.field(&self.param).is_none() {
            return Err(CliError::Config(format!(
                "--param: `{}` is not a field of the {} cycle (expected one of {})",
                self.param,
                config.cycle.kind().name(),
                config.cycle.field_names().join(", ")
            )));
        }
        if self.steps == 0 {
            return Err(CliError::Config("--steps: need at least one point".into()));
        }
        if !(self.from.is_finite() && self.to.is_finite()) {
            return Err(CliError::Config("--from/--to: must be finite".into()));
        }
        if self.steps > 1 && !(self.to > self.from) {
            return Err(CliError::Config(format!(
                "--from/--to: need a positive range, got [{}, {}]",
                self.from, self.to
            )));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.from];
        }
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    self.to
                } else {
                    self.from + (self.to - self.from) * (i as f64 / last)
                }
            })
            .collect()
    }
}

fn sweep_point(config: &RunConfig, param: &str, value: f64) -> SweepPoint {
    let mut point = config.clone();
    point.cycle = config
        .cycle
        .with_field(param, value)
        .expect("validated field");
    let result = validate_cycle(&point.cycle).and_then(|_| simulate(&point));
    match result {
        Ok(r) => SweepPoint {
            value,
            eta: Some((r.eta_numeric, r.eta_closed)),
            status: exit::OK,
        },
        Err(e) => SweepPoint {
            value,
            eta: None,
            status: e.exit_code(),
        },
    }
}

/// Thread count from [`THREADS_ENV`], if set to a positive integer.
pub fn threads_from_env() -> CliResult<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Config(format!(
                "{THREADS_ENV}: expected a positive integer, got `{v}`"
            ))),
        },
    }
}

/// Evaluates every grid point; the order of the result follows the grid.
pub fn sweep(
    config: &RunConfig,
    request: &SweepRequest,
    threads: Option<usize>,
) -> CliResult<Vec<SweepPoint>> {
    request.validate(config)?;
    let values = request.values();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(|| {
        values
            .par_iter()
            .map(|&v| sweep_point(config, &request.param, v))
            .collect()
    }))
}

pub fn sweep_csv(param: &str, points: &[SweepPoint]) -> String {
    let mut out = format!("{param},eta_numeric,eta_closed,status\n");
    for p in points {
        let (num, closed) = match p.eta {
            Some((n, c)) => (fmt_float(n), fmt_float(c)),
            None => (String::new(), String::new()),
        };
        writeln!(out, "{},{num},{closed},{}", fmt_float(p.value), p.status).unwrap();
    }
    out
}

pub fn cmd_sweep(
    config: &RunConfig,
    request: &SweepRequest,
    out: Option<&Path>,
) -> CliResult<String> {
    let points = sweep(config, request, threads_from_env()?)?;
    let csv = sweep_csv(&request.param, &points);
    if let Some(path) = out {
        write_atomic(path, &csv)?;
    }
    Ok(csv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_hits_both_ends() {
        let r = SweepRequest {
            param: "F0".into(),
            from: 0.1,
            to: 0.9,
            steps: 9,
        };
        let v = r.values();
        assert_eq!(v.len(), 9);
        assert_eq!(v[0], 0.1);
        assert_eq!(v[8], 0.9);
        assert!((v[4] - 0.5).abs() < 1e-15);
    }
}
