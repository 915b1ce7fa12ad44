//! Four-stroke cycles assembled from process segments.
//!
//! Corner labels follow the A, B, C, D order of the segments: each segment
//! runs from its corner to the next one, and the last returns to A.
//!
//! Diesel ratios use the convention where `L1` is the largest coordinate:
//! `L_A = r_C L1`, `L_B = r_E L1`, `0 < r_C < r_E < 1`.

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::numerics::NumericsPolicy;
use crate::processes::{
    isobaric_schedule, segment_heat_work_sampled, ProcessKind, ProcessSegment, SegmentResult,
    StatePoint, DEFAULT_SAMPLES,
};
use crate::substances::{equilibrium_point, gibbs_state, GibbsState, SpectrumModel, SubstanceKind};

/// Loop closure tolerance on corner coordinates and inverse temperatures.
pub const CLOSURE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CycleKind {
    Carnot,
    Otto,
    Brayton,
    Diesel,
}

impl CycleKind {
    pub const ALL: [CycleKind; 4] = [
        CycleKind::Carnot,
        CycleKind::Otto,
        CycleKind::Brayton,
        CycleKind::Diesel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CycleKind::Carnot => "carnot",
            CycleKind::Otto => "otto",
            CycleKind::Brayton => "brayton",
            CycleKind::Diesel => "diesel",
        }
    }

    /// Segment kinds in loop order.
    pub fn segment_kinds(self) -> [ProcessKind; 4] {
        use ProcessKind::*;
        match self {
            CycleKind::Carnot => [Isothermal, Adiabatic, Isothermal, Adiabatic],
            CycleKind::Otto => [Isochoric, Adiabatic, Isochoric, Adiabatic],
            CycleKind::Brayton => [Isobaric, Adiabatic, Isobaric, Adiabatic],
            CycleKind::Diesel => [Isobaric, Adiabatic, Isochoric, Adiabatic],
        }
    }
}

/// User-facing cycle parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CycleParameters {
    Brayton {
        #[serde(rename = "F1")]
        f1: f64,
        #[serde(rename = "F0")]
        f0: f64,
        #[serde(rename = "L_A")]
        l_a: f64,
        #[serde(rename = "L_B")]
        l_b: f64,
    },
    Diesel {
        #[serde(rename = "F1")]
        f1: f64,
        #[serde(rename = "L1")]
        l1: f64,
        #[serde(rename = "r_C")]
        r_c: f64,
        #[serde(rename = "r_E")]
        r_e: f64,
    },
    Otto {
        #[serde(rename = "L0")]
        l0: f64,
        #[serde(rename = "L1")]
        l1: f64,
        beta_hot: f64,
        beta_cold: f64,
    },
    Carnot {
        #[serde(rename = "T_H")]
        t_hot: f64,
        #[serde(rename = "T_C")]
        t_cold: f64,
        #[serde(rename = "L_A")]
        l_a: f64,
        #[serde(rename = "L_B")]
        l_b: f64,
    },
}

impl CycleParameters {
    pub fn kind(&self) -> CycleKind {
        match self {
            CycleParameters::Brayton { .. } => CycleKind::Brayton,
            CycleParameters::Diesel { .. } => CycleKind::Diesel,
            CycleParameters::Otto { .. } => CycleKind::Otto,
            CycleParameters::Carnot { .. } => CycleKind::Carnot,
        }
    }

    /// Names of the numeric fields as they appear in configuration files.
    pub fn field_names(&self) -> &'static [&'static str] {
        match self {
            CycleParameters::Brayton { .. } => &["F1", "F0", "L_A", "L_B"],
            CycleParameters::Diesel { .. } => &["F1", "L1", "r_C", "r_E"],
            CycleParameters::Otto { .. } => &["L0", "L1", "beta_hot", "beta_cold"],
            CycleParameters::Carnot { .. } => &["T_H", "T_C", "L_A", "L_B"],
        }
    }

    fn field_mut(&mut self, name: &str) -> Option<&mut f64> {
        match (self, name) {
            (CycleParameters::Brayton { f1, .. }, "F1") => Some(f1),
            (CycleParameters::Brayton { f0, .. }, "F0") => Some(f0),
            (CycleParameters::Brayton { l_a, .. }, "L_A") => Some(l_a),
            (CycleParameters::Brayton { l_b, .. }, "L_B") => Some(l_b),
            (CycleParameters::Diesel { f1, .. }, "F1") => Some(f1),
            (CycleParameters::Diesel { l1, .. }, "L1") => Some(l1),
            (CycleParameters::Diesel { r_c, .. }, "r_C") => Some(r_c),
            (CycleParameters::Diesel { r_e, .. }, "r_E") => Some(r_e),
            (CycleParameters::Otto { l0, .. }, "L0") => Some(l0),
            (CycleParameters::Otto { l1, .. }, "L1") => Some(l1),
            (CycleParameters::Otto { beta_hot, .. }, "beta_hot") => Some(beta_hot),
            (CycleParameters::Otto { beta_cold, .. }, "beta_cold") => Some(beta_cold),
            (CycleParameters::Carnot { t_hot, .. }, "T_H") => Some(t_hot),
            (CycleParameters::Carnot { t_cold, .. }, "T_C") => Some(t_cold),
            (CycleParameters::Carnot { l_a, .. }, "L_A") => Some(l_a),
            (CycleParameters::Carnot { l_b, .. }, "L_B") => Some(l_b),
            _ => None,
        }
    }

    /// Copy with one named field replaced; `None` if the cycle has no such field.
    pub fn with_field(&self, name: &str, value: f64) -> Option<CycleParameters> {
        let mut copy = *self;
        *copy.field_mut(name)? = value;
        Some(copy)
    }

    pub fn field(&self, name: &str) -> Option<f64> {
        let mut copy = *self;
        copy.field_mut(name).map(|v| *v)
    }

    /// Dimensionless ratios that fix the closed-form efficiency for a
    /// `dimension`-dimensional substance.
    pub fn efficiency_parameters(&self, dimension: u32) -> EfficiencyParameters {
        match *self {
            CycleParameters::Brayton { f1, f0, .. } => EfficiencyParameters::Brayton {
                pressure_ratio: f0 / f1,
            },
            CycleParameters::Diesel { r_c, r_e, .. } => EfficiencyParameters::Diesel { r_c, r_e },
            CycleParameters::Otto { l0, l1, .. } => EfficiencyParameters::Otto {
                volume_ratio: (l0 / l1).powi(dimension as i32),
            },
            CycleParameters::Carnot { t_hot, t_cold, .. } => EfficiencyParameters::Carnot {
                temperature_ratio: t_cold / t_hot,
            },
        }
    }
}

/// Inputs of the generic-gamma efficiency formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EfficiencyParameters {
    /// `T_C / T_H`.
    Carnot {
        temperature_ratio: f64,
    },
    /// `V0 / V1`.
    Otto {
        volume_ratio: f64,
    },
    /// `P0 / P1`.
    Brayton {
        pressure_ratio: f64,
    },
    Diesel {
        r_c: f64,
        r_e: f64,
    },
}

impl EfficiencyParameters {
    pub fn kind(&self) -> CycleKind {
        match self {
            EfficiencyParameters::Carnot { .. } => CycleKind::Carnot,
            EfficiencyParameters::Otto { .. } => CycleKind::Otto,
            EfficiencyParameters::Brayton { .. } => CycleKind::Brayton,
            EfficiencyParameters::Diesel { .. } => CycleKind::Diesel,
        }
    }
}

/// Carnot `1 - T_C/T_H`, Otto `1 - (V0/V1)^(gamma-1)`, Brayton
/// `1 - (P0/P1)^(1-1/gamma)`, Diesel
/// `1 - (r_E^gamma - r_C^gamma) / (gamma (r_E - r_C))`.
pub fn closed_form_efficiency(gamma: f64, parameters: &EfficiencyParameters) -> Result<f64> {
    if !(gamma.is_finite() && gamma > 1.0) {
        return Err(Error::InvalidParameter {
            name: "gamma",
            requirement: "finite and greater than 1",
            value: gamma,
        });
    }
    match *parameters {
        EfficiencyParameters::Carnot { temperature_ratio } => {
            Ok(1.0 - require_positive("temperature_ratio", temperature_ratio)?)
        }
        EfficiencyParameters::Otto { volume_ratio } => {
            Ok(1.0 - require_positive("volume_ratio", volume_ratio)?.powf(gamma - 1.0))
        }
        EfficiencyParameters::Brayton { pressure_ratio } => {
            Ok(1.0 - require_positive("pressure_ratio", pressure_ratio)?.powf(1.0 - 1.0 / gamma))
        }
        EfficiencyParameters::Diesel { r_c, r_e } => {
            require_positive("r_C", r_c)?;
            require_positive("r_E", r_e)?;
            if r_c == r_e {
                return Err(Error::Ordering(
                    "Diesel efficiency is undefined for r_C = r_E".into(),
                ));
            }
            Ok(1.0 - (r_e.powf(gamma) - r_c.powf(gamma)) / (gamma * (r_e - r_c)))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Corner {
    pub label: char,
    pub point: StatePoint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CycleSpec {
    model: SpectrumModel,
    parameters: CycleParameters,
    segments: Vec<ProcessSegment>,
    corners: Vec<Corner>,
    degenerate: bool,
}

fn ordering(message: String) -> Error {
    Error::Ordering(message)
}

fn corners_from(points: [StatePoint; 4]) -> Vec<Corner> {
    points
        .into_iter()
        .zip(['A', 'B', 'C', 'D'])
        .map(|(point, label)| Corner { label, point })
        .collect()
}

/// Brayton and Diesel need the force to be the pressure conjugate to the
/// volume, which holds only for one-dimensional substances.
fn require_one_dimensional(model: &SpectrumModel, operation: &'static str) -> Result<()> {
    if model.kind().dimension() == 1 {
        Ok(())
    } else {
        Err(Error::UnsupportedKind {
            operation,
            kind: model.kind(),
        })
    }
}

/// Isobaric expansion at `F1` from `L_A` to `L_B`, adiabatic expansion to
/// `L_C = L_B (F1/F0)^(1/gamma)`, isobaric compression at `F0` to
/// `L_D = L_A (F1/F0)^(1/gamma)`, adiabatic compression back to A.
pub fn build_brayton(
    model: &SpectrumModel,
    f1: f64,
    f0: f64,
    l_a: f64,
    l_b: f64,
    policy: &NumericsPolicy,
) -> Result<CycleSpec> {
    require_one_dimensional(model, "Brayton cycle")?;
    for (name, v) in [("F1", f1), ("F0", f0), ("L_A", l_a), ("L_B", l_b)] {
        if !v.is_finite() {
            return Err(Error::InvalidParameter {
                name,
                requirement: "finite",
                value: v,
            });
        }
    }
    require_positive("L_A", l_a)?;
    if !(f1 >= f0 && f0 > 0.0) {
        return Err(ordering(format!(
            "Brayton needs F1 >= F0 > 0, got F1 = {f1}, F0 = {f0}"
        )));
    }
    if !(l_b > l_a) {
        return Err(ordering(format!(
            "Brayton needs L_B > L_A, got L_A = {l_a}, L_B = {l_b}"
        )));
    }
    let stretch = (f1 / f0).powf(1.0 / model.gamma());
    let l_c = l_b * stretch;
    let l_d = l_a * stretch;
    let a = StatePoint::new(isobaric_schedule(model, f1, l_a, policy)?, l_a)?;
    let b = StatePoint::new(isobaric_schedule(model, f1, l_b, policy)?, l_b)?;
    let c = StatePoint::new(isobaric_schedule(model, f0, l_c, policy)?, l_c)?;
    let d = StatePoint::new(isobaric_schedule(model, f0, l_d, policy)?, l_d)?;
    let segments = vec![
        ProcessSegment::isobaric(model, f1, l_a, l_b, policy)?,
        ProcessSegment::adiabatic(model, b.beta, l_b, l_c, policy)?,
        ProcessSegment::isobaric(model, f0, l_c, l_d, policy)?,
        ProcessSegment::adiabatic(model, d.beta, l_d, l_a, policy)?,
    ];
    Ok(CycleSpec {
        model: *model,
        parameters: CycleParameters::Brayton { f1, f0, l_a, l_b },
        segments,
        corners: corners_from([a, b, c, d]),
        degenerate: f1 == f0,
    })
}

/// Isobaric expansion at `F1` from `r_C L1` to `r_E L1`, adiabatic expansion
/// to `L1`, isochoric cooling at `L1`, adiabatic compression back to A.
pub fn build_diesel(
    model: &SpectrumModel,
    f1: f64,
    l1: f64,
    r_c: f64,
    r_e: f64,
    policy: &NumericsPolicy,
) -> Result<CycleSpec> {
    require_one_dimensional(model, "Diesel cycle")?;
    if !f1.is_finite() {
        return Err(Error::InvalidParameter {
            name: "F1",
            requirement: "finite",
            value: f1,
        });
    }
    require_positive("L1", l1)?;
    if !(r_c > 0.0 && r_c <= r_e && r_e < 1.0) {
        return Err(ordering(format!(
            "Diesel needs 0 < r_C <= r_E < 1, got r_C = {r_c}, r_E = {r_e}"
        )));
    }
    let l_a = r_c * l1;
    let l_b = r_e * l1;
    let a = StatePoint::new(isobaric_schedule(model, f1, l_a, policy)?, l_a)?;
    let b = StatePoint::new(isobaric_schedule(model, f1, l_b, policy)?, l_b)?;
    let c = StatePoint::new(model.adiabatic_beta(b.beta, l_b, l1), l1)?;
    let d = StatePoint::new(model.adiabatic_beta(a.beta, l_a, l1), l1)?;
    let segments = vec![
        ProcessSegment::isobaric(model, f1, l_a, l_b, policy)?,
        ProcessSegment::adiabatic(model, b.beta, l_b, l1, policy)?,
        ProcessSegment::isochoric(model, l1, c.beta, d.beta, policy)?,
        ProcessSegment::adiabatic(model, d.beta, l1, l_a, policy)?,
    ];
    Ok(CycleSpec {
        model: *model,
        parameters: CycleParameters::Diesel { f1, l1, r_c, r_e },
        segments,
        corners: corners_from([a, b, c, d]),
        degenerate: r_c == r_e,
    })
}

/// Isochoric heating at `L0` up to `beta_hot`, adiabatic expansion to `L1`,
/// isochoric cooling at `L1` down to `beta_cold`, adiabatic compression.
/// Heat flows in on the first leg only if `beta_hot < beta_cold (L0/L1)^p`.
pub fn build_otto(
    model: &SpectrumModel,
    l0: f64,
    l1: f64,
    beta_hot: f64,
    beta_cold: f64,
    policy: &NumericsPolicy,
) -> Result<CycleSpec> {
    require_positive("L0", l0)?;
    require_positive("L1", l1)?;
    require_positive("beta_hot", beta_hot)?;
    require_positive("beta_cold", beta_cold)?;
    if !(l1 > l0) {
        return Err(ordering(format!(
            "Otto needs L1 > L0, got L0 = {l0}, L1 = {l1}"
        )));
    }
    let beta_a = model.adiabatic_beta(beta_cold, l1, l0);
    if !(beta_hot < beta_a) {
        return Err(ordering(format!(
            "Otto needs beta_hot < beta_cold (L0/L1)^p = {beta_a} to run as an engine, got beta_hot = {beta_hot}"
        )));
    }
    let a = StatePoint::new(beta_a, l0)?;
    let b = StatePoint::new(beta_hot, l0)?;
    let c = StatePoint::new(model.adiabatic_beta(beta_hot, l0, l1), l1)?;
    let d = StatePoint::new(beta_cold, l1)?;
    let segments = vec![
        ProcessSegment::isochoric(model, l0, a.beta, b.beta, policy)?,
        ProcessSegment::adiabatic(model, b.beta, l0, l1, policy)?,
        ProcessSegment::isochoric(model, l1, c.beta, d.beta, policy)?,
        ProcessSegment::adiabatic(model, d.beta, l1, l0, policy)?,
    ];
    Ok(CycleSpec {
        model: *model,
        parameters: CycleParameters::Otto {
            l0,
            l1,
            beta_hot,
            beta_cold,
        },
        segments,
        corners: corners_from([a, b, c, d]),
        degenerate: false,
    })
}

/// Isothermal expansion at `T_H` from `L_A` to `L_B`, adiabatic expansion to
/// `L_C = L_B (T_H/T_C)^(1/p)`, isothermal compression at `T_C` to
/// `L_D = L_A (T_H/T_C)^(1/p)`, adiabatic compression back to A.
pub fn build_carnot(
    model: &SpectrumModel,
    t_hot: f64,
    t_cold: f64,
    l_a: f64,
    l_b: f64,
    policy: &NumericsPolicy,
) -> Result<CycleSpec> {
    require_positive("T_H", t_hot)?;
    require_positive("T_C", t_cold)?;
    require_positive("L_A", l_a)?;
    require_positive("L_B", l_b)?;
    if !(t_hot > t_cold) {
        return Err(ordering(format!(
            "Carnot needs T_H > T_C, got T_H = {t_hot}, T_C = {t_cold}"
        )));
    }
    if !(l_b > l_a) {
        return Err(ordering(format!(
            "Carnot needs L_B > L_A, got L_A = {l_a}, L_B = {l_b}"
        )));
    }
    let stretch = (t_hot / t_cold).powf(1.0 / model.scale_exponent() as f64);
    let l_c = l_b * stretch;
    let l_d = l_a * stretch;
    let (beta_h, beta_c) = (1.0 / t_hot, 1.0 / t_cold);
    let points = [
        StatePoint::new(beta_h, l_a)?,
        StatePoint::new(beta_h, l_b)?,
        StatePoint::new(beta_c, l_c)?,
        StatePoint::new(beta_c, l_d)?,
    ];
    let segments = vec![
        ProcessSegment::isothermal(model, t_hot, l_a, l_b, policy)?,
        ProcessSegment::adiabatic(model, beta_h, l_b, l_c, policy)?,
        ProcessSegment::isothermal(model, t_cold, l_c, l_d, policy)?,
        ProcessSegment::adiabatic(model, beta_c, l_d, l_a, policy)?,
    ];
    Ok(CycleSpec {
        model: *model,
        parameters: CycleParameters::Carnot {
            t_hot,
            t_cold,
            l_a,
            l_b,
        },
        segments,
        corners: corners_from(points),
        degenerate: false,
    })
}

pub fn build_cycle(
    model: &SpectrumModel,
    parameters: &CycleParameters,
    policy: &NumericsPolicy,
) -> Result<CycleSpec> {
    match *parameters {
        CycleParameters::Brayton { f1, f0, l_a, l_b } => {
            build_brayton(model, f1, f0, l_a, l_b, policy)
        }
        CycleParameters::Diesel { f1, l1, r_c, r_e } => {
            build_diesel(model, f1, l1, r_c, r_e, policy)
        }
        CycleParameters::Otto {
            l0,
            l1,
            beta_hot,
            beta_cold,
        } => build_otto(model, l0, l1, beta_hot, beta_cold, policy),
        CycleParameters::Carnot {
            t_hot,
            t_cold,
            l_a,
            l_b,
        } => build_carnot(model, t_hot, t_cold, l_a, l_b, policy),
    }
}

fn relative_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

impl CycleSpec {
    pub fn kind(&self) -> CycleKind {
        self.parameters.kind()
    }

    pub fn model(&self) -> &SpectrumModel {
        &self.model
    }

    pub fn parameters(&self) -> &CycleParameters {
        &self.parameters
    }

    pub fn segments(&self) -> &[ProcessSegment] {
        &self.segments
    }

    pub fn corners(&self) -> &[Corner] {
        &self.corners
    }

    /// Zero-area loop (`F1 = F0` or `r_C = r_E`).
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// Canonical states at the corners.
    pub fn corner_states(&self, policy: &NumericsPolicy) -> Result<Vec<(char, GibbsState)>> {
        self.corners
            .iter()
            .map(|c| {
                Ok((
                    c.label,
                    gibbs_state(&self.model, c.point.beta, c.point.length, policy)?,
                ))
            })
            .collect()
    }

    /// Largest relative mismatch in `(beta, L)` between the end of each segment
    /// and the start of the next, and between segment ends and corners.
    pub fn closure_gap(&self) -> f64 {
        let n = self.segments.len();
        let mut gap = 0.0f64;
        for i in 0..n {
            let end = self.segments[i].end();
            let next = self.segments[(i + 1) % n].start();
            let corner = self.corners[(i + 1) % n].point;
            for other in [next, corner] {
                gap = gap
                    .max(relative_gap(end.beta, other.beta))
                    .max(relative_gap(end.length, other.length));
            }
        }
        gap
    }

    pub fn efficiency_parameters(&self) -> EfficiencyParameters {
        self.parameters
            .efficiency_parameters(self.model.kind().dimension())
    }
}

/// One row of the corner table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CornerRow {
    pub label: char,
    #[serde(rename = "L")]
    pub length: f64,
    pub beta: f64,
    #[serde(rename = "T")]
    pub temperature: f64,
    #[serde(rename = "F")]
    pub force: f64,
    #[serde(rename = "U")]
    pub energy: f64,
    #[serde(rename = "S")]
    pub entropy: f64,
    /// `beta * s(L)`, `beta * E_1` for the 1D box.
    pub regime_parameter: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleReport {
    pub kind: CycleKind,
    pub substance: SubstanceKind,
    #[serde(rename = "Q_in")]
    pub q_in: f64,
    #[serde(rename = "Q_out")]
    pub q_out: f64,
    #[serde(rename = "W_net")]
    pub w_net: f64,
    pub eta_numeric: f64,
    pub eta_closed: f64,
    pub gamma_used: f64,
    pub degenerate: bool,
    /// False when [`CycleSpec::closure_gap`] exceeds [`CLOSURE_TOL`].
    pub closed: bool,
    pub closure_gap: f64,
    /// `|W_net - (Q_in - Q_out)| / Q_in`.
    pub first_law_gap: f64,
    /// Sum of the entropy changes of the segments.
    pub loop_entropy: f64,
    pub corners: Vec<CornerRow>,
    pub segments: Vec<SegmentResult>,
}

impl CycleReport {
    /// Largest segment first-law residual against the direct heat integral.
    pub fn max_first_law_residual(&self) -> f64 {
        self.segments
            .iter()
            .map(SegmentResult::first_law_residual)
            .fold(0.0, f64::max)
    }

    /// Smallest `beta * s(L)` over the corners.
    pub fn min_regime_parameter(&self) -> f64 {
        self.corners
            .iter()
            .map(|c| c.regime_parameter)
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest `beta * s(L)` over the corners.
    pub fn max_regime_parameter(&self) -> f64 {
        self.corners
            .iter()
            .map(|c| c.regime_parameter)
            .fold(0.0, f64::max)
    }
}

pub fn run_cycle(spec: &CycleSpec, policy: &NumericsPolicy) -> Result<CycleReport> {
    run_cycle_sampled(spec, DEFAULT_SAMPLES, policy)
}

/// Integrates each segment with `samples` diagram points.
pub fn run_cycle_sampled(
    spec: &CycleSpec,
    samples: usize,
    policy: &NumericsPolicy,
) -> Result<CycleReport> {
    let segments = spec
        .segments
        .iter()
        .map(|s| segment_heat_work_sampled(s, samples, policy))
        .collect::<Result<Vec<_>>>()?;

    let mut q_in = 0.0;
    let mut q_out = 0.0;
    let mut w_net = 0.0;
    let mut loop_entropy = 0.0;
    for r in &segments {
        if r.heat > 0.0 {
            q_in += r.heat;
        } else {
            q_out -= r.heat;
        }
        w_net += r.work_by;
        loop_entropy += r.delta_s;
    }

    let corners = spec
        .corners
        .iter()
        .map(|c| {
            let eq = equilibrium_point(&spec.model, c.point.beta, c.point.length, policy)?;
            Ok(CornerRow {
                label: c.label,
                length: eq.length,
                beta: eq.beta,
                temperature: eq.temperature,
                force: eq.force,
                energy: eq.energy,
                entropy: eq.entropy,
                regime_parameter: eq.regime_parameter,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let gamma = spec.model.gamma();
    let (eta_numeric, eta_closed) = if spec.degenerate {
        (0.0, 0.0)
    } else {
        (
            w_net / q_in,
            closed_form_efficiency(gamma, &spec.efficiency_parameters())?,
        )
    };
    let first_law_gap = if q_in > 0.0 {
        (w_net - (q_in - q_out)).abs() / q_in
    } else {
        (w_net - (q_in - q_out)).abs()
    };
    let closure_gap = spec.closure_gap();

    Ok(CycleReport {
        kind: spec.kind(),
        substance: spec.model.kind(),
        q_in,
        q_out,
        w_net,
        eta_numeric,
        eta_closed,
        gamma_used: gamma,
        degenerate: spec.degenerate,
        closed: closure_gap <= CLOSURE_TOL,
        closure_gap,
        first_law_gap,
        loop_entropy,
        corners,
        segments,
    })
}

/// A row of the efficiency table: a working substance and its adiabatic
/// exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TableRow {
    pub label: &'static str,
    pub gamma: f64,
    /// Quantum substance backing the row, if any.
    pub substance: Option<SubstanceKind>,
}

pub const TABLE_ROWS: [TableRow; 12] = [
    TableRow {
        label: "classical monatomic gas",
        gamma: 5.0 / 3.0,
        substance: None,
    },
    TableRow {
        label: "classical diatomic gas",
        gamma: 7.0 / 5.0,
        substance: None,
    },
    TableRow {
        label: "classical polyatomic gas",
        gamma: 4.0 / 3.0,
        substance: None,
    },
    TableRow {
        label: "particle in 1D box",
        gamma: 3.0,
        substance: Some(SubstanceKind::Box1D),
    },
    TableRow {
        label: "particle in 2D box",
        gamma: 2.0,
        substance: Some(SubstanceKind::Box2D),
    },
    TableRow {
        label: "particle in 3D box",
        gamma: 5.0 / 3.0,
        substance: Some(SubstanceKind::Box3D),
    },
    TableRow {
        label: "1D single-mode photon field",
        gamma: 2.0,
        substance: Some(SubstanceKind::CavityMode),
    },
    TableRow {
        label: "3D blackbody radiation",
        gamma: 4.0 / 3.0,
        substance: None,
    },
    TableRow {
        label: "1D harmonic oscillator",
        gamma: 2.0,
        substance: Some(SubstanceKind::Harmonic1D),
    },
    TableRow {
        label: "2D harmonic oscillator",
        gamma: 1.5,
        substance: Some(SubstanceKind::Harmonic2D),
    },
    TableRow {
        label: "3D harmonic oscillator",
        gamma: 4.0 / 3.0,
        substance: Some(SubstanceKind::Harmonic3D),
    },
    TableRow {
        label: "spin-1/2 in magnetic field",
        gamma: 2.0,
        substance: Some(SubstanceKind::SpinHalf),
    },
];

/// Ratios used for every row of the efficiency table.
pub const TABLE_PARAMETERS: [EfficiencyParameters; 4] = [
    EfficiencyParameters::Carnot {
        temperature_ratio: 0.5,
    },
    EfficiencyParameters::Otto { volume_ratio: 0.5 },
    EfficiencyParameters::Brayton {
        pressure_ratio: 0.25,
    },
    EfficiencyParameters::Diesel { r_c: 0.5, r_e: 0.8 },
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TableEntry {
    pub row: TableRow,
    /// Carnot, Otto, Brayton, Diesel, in that order.
    pub efficiencies: [f64; 4],
}

/// Closed-form efficiencies for every table row at [`TABLE_PARAMETERS`].
pub fn efficiency_table() -> Vec<TableEntry> {
    TABLE_ROWS
        .iter()
        .map(|row| {
            let mut efficiencies = [0.0; 4];
            for (slot, params) in efficiencies.iter_mut().zip(&TABLE_PARAMETERS) {
                *slot =
                    closed_form_efficiency(row.gamma, params).expect("table parameters are valid");
            }
            TableEntry {
                row: *row,
                efficiencies,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn policy() -> NumericsPolicy {
        NumericsPolicy::default()
    }

    #[test]
    fn diesel_closed_form_examples() {
        let p = EfficiencyParameters::Diesel { r_c: 0.5, r_e: 0.8 };
        // 1 - (1/3)(r_E^2 + r_E r_C + r_C^2)
        assert!((closed_form_efficiency(3.0, &p).unwrap() - 0.57).abs() < 1e-12);
        // 1 - (1/2)(r_E + r_C)
        assert!((closed_form_efficiency(2.0, &p).unwrap() - 0.35).abs() < 1e-12);
        let equal = EfficiencyParameters::Diesel { r_c: 0.5, r_e: 0.5 };
        assert!(closed_form_efficiency(3.0, &equal).is_err());
    }

    #[test]
    fn closed_form_basics() {
        let b = EfficiencyParameters::Brayton {
            pressure_ratio: 1.0,
        };
        assert_eq!(closed_form_efficiency(5.0 / 3.0, &b).unwrap(), 0.0);
        let b = EfficiencyParameters::Brayton {
            pressure_ratio: 0.125,
        };
        assert!((closed_form_efficiency(3.0, &b).unwrap() - 0.75).abs() < 1e-15);
        let b = EfficiencyParameters::Brayton {
            pressure_ratio: 0.25,
        };
        assert!((closed_form_efficiency(2.0, &b).unwrap() - 0.5).abs() < 1e-15);
        let c = EfficiencyParameters::Carnot {
            temperature_ratio: 0.25,
        };
        assert_eq!(closed_form_efficiency(1.4, &c).unwrap(), 0.75);
        assert!(closed_form_efficiency(1.0, &c).is_err());
        assert!(
            closed_form_efficiency(2.0, &EfficiencyParameters::Otto { volume_ratio: 0.0 }).is_err()
        );
    }

    #[test]
    fn otto_closed_form_by_substance() {
        let p = policy();
        let box1d = build_otto(&SpectrumModel::box_1d(), 1.0, 2.0, 0.1, 10.0, &p).unwrap();
        let eta = closed_form_efficiency(3.0, &box1d.efficiency_parameters()).unwrap();
        assert!((eta - 0.75).abs() < 1e-15);
        let cavity = SpectrumModel::cavity(1.0).unwrap();
        let spec = build_otto(&cavity, 1.0, 2.0, 0.1, 10.0, &p).unwrap();
        let eta = closed_form_efficiency(2.0, &spec.efficiency_parameters()).unwrap();
        assert!((eta - 0.5).abs() < 1e-15);
        // (V0/V1)^(gamma-1) = (L0/L1)^(d (gamma - 1)) = (L0/L1)^p
        let box3d = SpectrumModel::new(SubstanceKind::Box3D);
        let spec = build_otto(&box3d, 1.0, 2.0, 0.1, 10.0, &p).unwrap();
        let eta = closed_form_efficiency(box3d.gamma(), &spec.efficiency_parameters()).unwrap();
        assert!((eta - 0.75).abs() < 1e-14);
    }

    #[test]
    fn brayton_corner_ratios() {
        let p = policy();
        let model = SpectrumModel::box_1d();
        let spec = build_brayton(&model, 8.0, 1.0, 100.0, 200.0, &p).unwrap();
        let l = |i: usize| spec.corners()[i].point.length;
        assert!((l(2) / l(1) - 2.0).abs() < 1e-14);
        assert!((l(3) / l(0) - 2.0).abs() < 1e-14);
        assert!(spec.closure_gap() <= CLOSURE_TOL);

        let cavity = SpectrumModel::cavity(1.0).unwrap();
        let spec = build_brayton(&cavity, 1.0, 0.25, 1.0, 2.0, &p).unwrap();
        let l = |i: usize| spec.corners()[i].point.length;
        assert!((l(2) / l(1) - 2.0).abs() < 1e-14);
        assert!(spec.closure_gap() <= CLOSURE_TOL);
    }

    #[test]
    fn cavity_brayton_efficiency() {
        let p = policy();
        let cavity = SpectrumModel::cavity(1.0).unwrap();
        let spec = build_brayton(&cavity, 1.0, 0.25, 1.0, 2.0, &p).unwrap();
        let report = run_cycle_sampled(&spec, 8, &p).unwrap();
        assert!((report.eta_closed - 0.5).abs() < 1e-15);
        assert!(
            (report.eta_numeric - 0.5).abs() <= 1e-8,
            "{}",
            report.eta_numeric
        );
        assert!(report.first_law_gap <= 1e-8);
        assert!(report.loop_entropy.abs() <= 1e-9);
        assert!(report.closed);
    }

    #[test]
    fn diesel_corner_forces() {
        let p = policy();
        let model = SpectrumModel::box_1d();
        let spec = build_diesel(&model, 1.0, 400.0, 0.5, 0.8, &p).unwrap();
        let report = run_cycle_sampled(&spec, 4, &p).unwrap();
        let f = |i: usize| report.corners[i].force;
        assert!((f(2) / f(0) - 0.512).abs() <= 1e-9);
        assert!((f(3) / f(0) - 0.125).abs() <= 1e-9);
        assert!((report.eta_numeric - 0.57).abs() <= 1e-3);
    }

    #[test]
    fn degenerate_cycles() {
        let p = policy();
        let cavity = SpectrumModel::cavity(1.0).unwrap();
        let spec = build_brayton(&cavity, 1.0, 1.0, 1.0, 2.0, &p).unwrap();
        let r = run_cycle_sampled(&spec, 4, &p).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.eta_numeric, 0.0);
        assert!(r.w_net.abs() <= 1e-9 * r.q_in);
        let spec = build_diesel(&cavity, 1.0, 2.0, 0.6, 0.6, &p).unwrap();
        let r = run_cycle_sampled(&spec, 4, &p).unwrap();
        assert!(r.degenerate);
        assert!(r.w_net.abs() <= 1e-12);
        assert_eq!(r.eta_numeric, 0.0);
    }

    #[test]
    fn parameter_validation() {
        let p = policy();
        let m = SpectrumModel::box_1d();
        assert!(matches!(
            build_brayton(&m, 1.0, 2.0, 1.0, 2.0, &p),
            Err(Error::Ordering(_))
        ));
        assert!(matches!(
            build_brayton(&m, 2.0, 1.0, 2.0, 1.0, &p),
            Err(Error::Ordering(_))
        ));
        assert!(matches!(
            build_diesel(&m, 1.0, 1.0, 0.8, 0.5, &p),
            Err(Error::Ordering(_))
        ));
        assert!(matches!(
            build_otto(&m, 2.0, 1.0, 1.0, 2.0, &p),
            Err(Error::Ordering(_))
        ));
        // not an engine: hot bath colder than the compressed working substance
        assert!(matches!(
            build_otto(&m, 1.0, 2.0, 1.0, 2.0, &p),
            Err(Error::Ordering(_))
        ));
        assert!(matches!(
            build_carnot(&m, 1.0, 2.0, 1.0, 2.0, &p),
            Err(Error::Ordering(_))
        ));
        let box2d = SpectrumModel::new(SubstanceKind::Box2D);
        assert!(matches!(
            build_brayton(&box2d, 2.0, 1.0, 1.0, 2.0, &p),
            Err(Error::UnsupportedKind { .. })
        ));
        // the spin force is negative, so no positive isobar exists
        let spin = SpectrumModel::spin_half();
        assert!(matches!(
            build_brayton(&spin, 0.2, 0.1, 1.0, 2.0, &p),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn parameter_fields() {
        let params = CycleParameters::Diesel {
            f1: 1.0,
            l1: 2.0,
            r_c: 0.5,
            r_e: 0.8,
        };
        assert_eq!(params.field("r_E"), Some(0.8));
        let swept = params.with_field("r_C", 0.3).unwrap();
        assert_eq!(swept.field("r_C"), Some(0.3));
        assert!(params.with_field("F0", 1.0).is_none());
        for name in params.field_names() {
            assert!(params.field(name).is_some());
        }
    }

    #[test]
    fn table_has_twelve_rows() {
        let table = efficiency_table();
        assert_eq!(table.len(), 12);
        for entry in &table {
            assert_eq!(entry.efficiencies[0], 0.5);
        }
        let box1d = table.iter().find(|e| e.row.gamma == 3.0).unwrap();
        assert!((box1d.efficiencies[3] - 0.57).abs() < 1e-12);
    }
}
