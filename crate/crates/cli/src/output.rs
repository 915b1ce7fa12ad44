//! Report JSON, diagram CSV and atomic file writes.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use qcycle_core::cycles::{CornerRow, TableEntry};
use qcycle_core::{CycleKind, CycleParameters, CycleReport, NumericsPolicy, SubstanceKind};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub const UNITS: &str = "hbar=m=k=1";

/// Box corners count as classical when `beta E_1` stays below this.
pub const CLASSICAL_REGIME: f64 = 1e-6;

pub const DIAGRAM_HEADER: &str = "segment_index,t,L,beta,T,F,U,S,Q_cum,W_cum";

/// Fixed 17-significant-digit formatting used in every CSV.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, Serialize)]
pub struct SubstanceInfo {
    pub kind: SubstanceKind,
    pub mass: f64,
    pub mode_constant: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SegmentSummary {
    pub index: usize,
    pub process: &'static str,
    /// Symbol of the quantity held fixed: `T`, `L`, `F` or `S`.
    pub held: &'static str,
    pub held_value: f64,
    #[serde(rename = "Q")]
    pub heat: f64,
    #[serde(rename = "W_on")]
    pub work_on: f64,
    #[serde(rename = "dU")]
    pub delta_u: f64,
    #[serde(rename = "dS")]
    pub delta_s: f64,
    #[serde(rename = "Q_direct")]
    pub heat_direct: f64,
    #[serde(rename = "W_levels")]
    pub work_levels: f64,
    pub first_law_residual: f64,
    pub work_duality_residual: f64,
    pub held_drift: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    pub closed: bool,
    pub closure_gap: f64,
    pub first_law_gap: f64,
    pub loop_entropy: f64,
    pub max_segment_first_law_residual: f64,
    pub min_regime_parameter: f64,
    pub max_regime_parameter: f64,
    /// Box kinds only: every corner has `beta E_1 <= 1e-6`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classical_regime: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub units: &'static str,
    pub substance: SubstanceInfo,
    pub cycle: CycleParameters,
    #[serde(rename = "Q_in")]
    pub q_in: f64,
    #[serde(rename = "Q_out")]
    pub q_out: f64,
    #[serde(rename = "W_net")]
    pub w_net: f64,
    pub eta_numeric: f64,
    pub eta_closed: f64,
    pub gamma: f64,
    pub degenerate: bool,
    pub corners: Vec<CornerRow>,
    pub segments: Vec<SegmentSummary>,
    pub diagnostics: Diagnostics,
    pub numerics: NumericsPolicy,
}

impl RunReport {
    pub fn new(config: &RunConfig, report: &CycleReport) -> Self {
        let segments = report
            .segments
            .iter()
            .enumerate()
            .map(|(index, s)| SegmentSummary {
                index,
                process: s.kind.name(),
                held: s.kind.held_symbol(),
                held_value: s.held_value,
                heat: s.heat,
                work_on: s.work_on,
                delta_u: s.delta_u,
                delta_s: s.delta_s,
                heat_direct: s.heat_direct,
                work_levels: s.work_levels,
                first_law_residual: s.first_law_residual(),
                work_duality_residual: s.work_duality_residual(),
                held_drift: s.held_drift,
            })
            .collect();
        let max_regime = report.max_regime_parameter();
        let classical_regime = report
            .substance
            .is_box()
            .then_some(max_regime <= CLASSICAL_REGIME);
        RunReport {
            units: UNITS,
            substance: SubstanceInfo {
                kind: config.substance.kind,
                mass: config.substance.mass,
                mode_constant: config.substance.mode_constant,
                gamma: report.gamma_used,
            },
            cycle: config.cycle,
            q_in: report.q_in,
            q_out: report.q_out,
            w_net: report.w_net,
            eta_numeric: report.eta_numeric,
            eta_closed: report.eta_closed,
            gamma: report.gamma_used,
            degenerate: report.degenerate,
            corners: report.corners.clone(),
            segments,
            diagnostics: Diagnostics {
                closed: report.closed,
                closure_gap: report.closure_gap,
                first_law_gap: report.first_law_gap,
                loop_entropy: report.loop_entropy,
                max_segment_first_law_residual: report.max_first_law_residual(),
                min_regime_parameter: report.min_regime_parameter(),
                max_regime_parameter: max_regime,
                classical_regime,
            },
            numerics: config.numerics,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Diagram rows of every segment, in loop order.
pub fn diagram_csv(report: &CycleReport) -> String {
    let mut out = String::from(DIAGRAM_HEADER);
    out.push('\n');
    for (index, segment) in report.segments.iter().enumerate() {
        for s in &segment.samples {
            let cols = [
                s.t,
                s.length,
                s.beta,
                s.temperature,
                s.force,
                s.energy,
                s.entropy,
                s.heat_cumulative,
                s.work_cumulative,
            ];
            write!(out, "{index}").unwrap();
            for v in cols {
                write!(out, ",{}", fmt_float(v)).unwrap();
            }
            out.push('\n');
        }
    }
    out
}

pub const TABLE_HEADER: &str = "row,substance,gamma,cycle,formula,parameters,efficiency";

fn formula_id(kind: CycleKind) -> &'static str {
    match kind {
        CycleKind::Carnot => "1-T_C/T_H",
        CycleKind::Otto => "1-(V0/V1)^(gamma-1)",
        CycleKind::Brayton => "1-(P0/P1)^(1-1/gamma)",
        CycleKind::Diesel => "1-(r_E^gamma-r_C^gamma)/(gamma(r_E-r_C))",
    }
}

fn parameter_label(kind: CycleKind) -> &'static str {
    match kind {
        CycleKind::Carnot => "T_C/T_H=0.5",
        CycleKind::Otto => "V0/V1=0.5",
        CycleKind::Brayton => "P0/P1=0.25",
        CycleKind::Diesel => "r_C=0.5;r_E=0.8",
    }
}

/// Efficiency table, one line per (row, cycle) cell.
pub fn table_csv(entries: &[TableEntry]) -> String {
    let mut out = String::from(TABLE_HEADER);
    out.push('\n');
    for entry in entries {
        let substance = entry.row.substance.map_or("-", |k| k.name());
        for (kind, eta) in CycleKind::ALL.into_iter().zip(entry.efficiencies) {
            writeln!(
                out,
                "\"{}\",{},{},{},\"{}\",{},{}",
                entry.row.label,
                substance,
                fmt_float(entry.row.gamma),
                kind.name(),
                formula_id(kind),
                parameter_label(kind),
                fmt_float(eta)
            )
            .unwrap();
        }
    }
    out
}

/// Writes `contents` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(contents.as_bytes())
        .and_then(|_| tmp.as_file().sync_all())
        .map_err(|e| CliError::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}
