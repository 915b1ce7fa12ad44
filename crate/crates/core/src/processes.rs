//! Quasi-static process segments and their heat and work.
//!
//! Every segment is parameterized by `t` in `[0, 1]`, linear in `L` (or in
//! `beta` for an isochoric segment). Work done on the system is
//! `W_on = -∫ F dL`, and heat is the first-law balance `Q = ΔU - W_on`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::numerics::{
    find_root_bracketed, integrate_adaptive, integrate_adaptive_from_ends, NumericsPolicy,
};
use crate::substances::{
    equilibrium_force, equilibrium_point, EquilibriumPoint, GibbsState, SpectrumModel,
    SubstanceKind,
};

/// Diagram samples per segment when none are requested.
pub const DEFAULT_SAMPLES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProcessKind {
    /// Constant `T`.
    Isothermal,
    /// Constant `L`.
    Isochoric,
    /// Constant `F`.
    Isobaric,
    /// Constant `S`, occupations frozen.
    Adiabatic,
}

impl ProcessKind {
    pub fn name(self) -> &'static str {
        match self {
            ProcessKind::Isothermal => "isothermal",
            ProcessKind::Isochoric => "isochoric",
            ProcessKind::Isobaric => "isobaric",
            ProcessKind::Adiabatic => "adiabatic",
        }
    }

    /// Symbol of the held quantity.
    pub fn held_symbol(self) -> &'static str {
        match self {
            ProcessKind::Isothermal => "T",
            ProcessKind::Isochoric => "L",
            ProcessKind::Isobaric => "F",
            ProcessKind::Adiabatic => "S",
        }
    }
}

/// An equilibrium point `(beta, L)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatePoint {
    pub beta: f64,
    #[serde(rename = "L")]
    pub length: f64,
}

impl StatePoint {
    pub fn new(beta: f64, length: f64) -> Result<Self> {
        Ok(StatePoint {
            beta: require_positive("beta", beta)?,
            length: require_positive("length", length)?,
        })
    }

    pub fn temperature(&self) -> f64 {
        1.0 / self.beta
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessSegment {
    kind: ProcessKind,
    model: SpectrumModel,
    start: StatePoint,
    end: StatePoint,
    held_value: f64,
}

fn lerp(a: f64, b: f64, t: f64) -> f64 {
    if t <= 0.0 {
        a
    } else if t >= 1.0 {
        b
    } else {
        a + (b - a) * t
    }
}

/// Inverse temperature at which the equilibrium force at `length` equals
/// `force`.
///
/// The oscillator family and the spin invert in closed form; the other kinds
/// are root-solved on the summed force, which decreases monotonically in
/// `beta` towards the ground-level force.
pub fn isobaric_schedule(
    model: &SpectrumModel,
    force: f64,
    length: f64,
    policy: &NumericsPolicy,
) -> Result<f64> {
    require_positive("length", length)?;
    if !force.is_finite() {
        return Err(Error::InvalidParameter {
            name: "force",
            requirement: "finite",
            value: force,
        });
    }
    let kind = model.kind();
    let p = model.scale_exponent() as f64;
    let ground_force = p * model.energy_scale(length) * model.ground_reduced() / length;
    match kind {
        SubstanceKind::SpinHalf => {
            // F = -tanh(beta / 2L) / (2 L^2)
            let y = -2.0 * length * length * force;
            if !(y > 0.0 && y < 1.0) {
                return Err(Error::Domain(format!(
                    "spin force must lie in ({ground_force}, 0) at L = {length}, got {force}"
                )));
            }
            Ok(2.0 * length * y.atanh())
        }
        SubstanceKind::CavityMode | SubstanceKind::Harmonic1D => {
            let kappa = model.mode_constant();
            let excess = 2.0 * force * length * length - kappa;
            if !(excess > 0.0) {
                return Err(Error::Domain(format!(
                    "force {force} does not exceed the vacuum force {ground_force} at L = {length}"
                )));
            }
            // (L/kappa) ln((2FL^2 + kappa) / (2FL^2 - kappa))
            Ok(length / kappa * (2.0 * kappa / excess).ln_1p())
        }
        _ => {
            if !(force > ground_force) {
                return Err(Error::Domain(format!(
                    "force {force} does not exceed the ground-level force {ground_force} at L = {length}"
                )));
            }
            // classical equation of state F L beta = d as the starting guess
            let guess = kind.dimension() as f64 / (force * length);
            if let Some(beta) = newton_schedule(model, force, length, guess, policy) {
                return Ok(beta);
            }
            let residual = |beta: f64| Ok(equilibrium_force(model, beta, length, policy)? - force);
            let (lo, hi) = expand_bracket(residual, guess)?;
            find_root_bracketed(residual, lo, hi, policy)
        }
    }
}

/// Newton iteration in `ln beta` using `dF/d ln beta = -p s x Var(eps) / L`;
/// `None` if it fails to settle, leaving the bracketed solver to decide.
fn newton_schedule(
    model: &SpectrumModel,
    force: f64,
    length: f64,
    guess: f64,
    policy: &NumericsPolicy,
) -> Option<f64> {
    let p = model.scale_exponent() as f64;
    let scale = model.energy_scale(length);
    let mut u = guess.ln();
    for _ in 0..policy.root_max_iter.min(50) {
        let eq = equilibrium_point(model, u.exp(), length, policy).ok()?;
        let slope = -p * scale * eq.regime_parameter * eq.reduced_variance / length;
        if !(slope < 0.0) {
            return None;
        }
        let step = ((eq.force - force) / slope).clamp(-2.0, 2.0);
        u -= step;
        if step.abs() <= policy.root_tol {
            return Some(u.exp());
        }
    }
    None
}

/// Brackets the root of a decreasing function of `beta` by doubling / halving.
fn expand_bracket<F>(mut f: F, guess: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut lo = guess;
    let mut hi = guess;
    let f0 = f(guess)?;
    if f0 == 0.0 {
        return Ok((guess, guess));
    }
    for _ in 0..200 {
        if f0 > 0.0 {
            hi *= 2.0;
            if f(hi)? <= 0.0 {
                return Ok((hi / 2.0, hi));
            }
        } else {
            lo /= 2.0;
            if f(lo)? >= 0.0 {
                return Ok((lo, lo * 2.0));
            }
        }
    }
    Err(Error::RootIterations { iterations: 200 })
}

/// Moves a state to `length` with its occupations unchanged; `beta` is
/// rescaled so that every `beta * E_n` is invariant.
pub fn adiabatic_advance(
    model: &SpectrumModel,
    from: &GibbsState,
    length: f64,
) -> Result<GibbsState> {
    require_positive("length", length)?;
    let beta = model.adiabatic_beta(from.beta(), from.length(), length);
    Ok(from.with_coordinate(beta, length))
}

/// Builds a segment from `start`. The endpoint is the final `L` for isothermal,
/// isobaric and adiabatic segments and the final `beta` for isochoric ones.
pub fn build_segment(
    kind: ProcessKind,
    model: &SpectrumModel,
    start: StatePoint,
    endpoint: f64,
    policy: &NumericsPolicy,
) -> Result<ProcessSegment> {
    let start = StatePoint::new(start.beta, start.length)?;
    let endpoint = require_positive("endpoint", endpoint)?;
    let (end, held_value) = match kind {
        ProcessKind::Isothermal => (
            StatePoint {
                beta: start.beta,
                length: endpoint,
            },
            start.temperature(),
        ),
        ProcessKind::Isochoric => (
            StatePoint {
                beta: endpoint,
                length: start.length,
            },
            start.length,
        ),
        ProcessKind::Isobaric => {
            let force = equilibrium_force(model, start.beta, start.length, policy)?;
            let beta = isobaric_schedule(model, force, endpoint, policy)?;
            (
                StatePoint {
                    beta,
                    length: endpoint,
                },
                force,
            )
        }
        ProcessKind::Adiabatic => {
            let s = equilibrium_point(model, start.beta, start.length, policy)?.entropy;
            (
                StatePoint {
                    beta: model.adiabatic_beta(start.beta, start.length, endpoint),
                    length: endpoint,
                },
                s,
            )
        }
    };
    Ok(ProcessSegment {
        kind,
        model: *model,
        start,
        end,
        held_value,
    })
}

impl ProcessSegment {
    pub fn isothermal(
        model: &SpectrumModel,
        temperature: f64,
        from: f64,
        to: f64,
        policy: &NumericsPolicy,
    ) -> Result<Self> {
        let beta = 1.0 / require_positive("temperature", temperature)?;
        build_segment(
            ProcessKind::Isothermal,
            model,
            StatePoint::new(beta, from)?,
            to,
            policy,
        )
    }

    pub fn isochoric(
        model: &SpectrumModel,
        length: f64,
        beta_from: f64,
        beta_to: f64,
        policy: &NumericsPolicy,
    ) -> Result<Self> {
        build_segment(
            ProcessKind::Isochoric,
            model,
            StatePoint::new(beta_from, length)?,
            beta_to,
            policy,
        )
    }

    /// Isobaric segment at `force` from `L = from` to `L = to`; the held value
    /// is `force` itself rather than the force re-evaluated at the start.
    pub fn isobaric(
        model: &SpectrumModel,
        force: f64,
        from: f64,
        to: f64,
        policy: &NumericsPolicy,
    ) -> Result<Self> {
        let beta_from = isobaric_schedule(model, force, from, policy)?;
        let beta_to = isobaric_schedule(model, force, to, policy)?;
        Ok(ProcessSegment {
            kind: ProcessKind::Isobaric,
            model: *model,
            start: StatePoint::new(beta_from, from)?,
            end: StatePoint::new(beta_to, to)?,
            held_value: force,
        })
    }

    pub fn adiabatic(
        model: &SpectrumModel,
        beta: f64,
        from: f64,
        to: f64,
        policy: &NumericsPolicy,
    ) -> Result<Self> {
        build_segment(
            ProcessKind::Adiabatic,
            model,
            StatePoint::new(beta, from)?,
            to,
            policy,
        )
    }

    pub fn kind(&self) -> ProcessKind {
        self.kind
    }

    pub fn model(&self) -> &SpectrumModel {
        &self.model
    }

    pub fn start(&self) -> StatePoint {
        self.start
    }

    pub fn end(&self) -> StatePoint {
        self.end
    }

    /// Final `L`, or final `beta` for an isochoric segment.
    pub fn free_endpoint(&self) -> f64 {
        match self.kind {
            ProcessKind::Isochoric => self.end.beta,
            _ => self.end.length,
        }
    }

    /// Value of the conserved quantity (`T`, `L`, `F` or `S`).
    pub fn held_value(&self) -> f64 {
        self.held_value
    }

    /// The same path traversed end to start.
    pub fn reversed(&self) -> ProcessSegment {
        ProcessSegment {
            start: self.end,
            end: self.start,
            ..*self
        }
    }

    /// Coordinate along the path; exact endpoints at `t = 0` and `t = 1`.
    pub fn length_at(&self, t: f64) -> f64 {
        lerp(self.start.length, self.end.length, t)
    }

    /// Point on the path at parameter `t`.
    pub fn state_at(&self, t: f64, policy: &NumericsPolicy) -> Result<StatePoint> {
        if t <= 0.0 {
            return Ok(self.start);
        }
        if t >= 1.0 {
            return Ok(self.end);
        }
        let length = self.length_at(t);
        let beta = match self.kind {
            ProcessKind::Isothermal => self.start.beta,
            ProcessKind::Isochoric => lerp(self.start.beta, self.end.beta, t),
            ProcessKind::Isobaric => {
                isobaric_schedule(&self.model, self.held_value, length, policy)?
            }
            ProcessKind::Adiabatic => {
                self.model
                    .adiabatic_beta(self.start.beta, self.start.length, length)
            }
        };
        Ok(StatePoint { beta, length })
    }

    /// Point on the path where the energy scale `s(L)` takes the value `scale`.
    fn state_at_scale(&self, scale: f64, policy: &NumericsPolicy) -> Result<StatePoint> {
        let p = self.model.scale_exponent();
        // s = s(1) L^(-p)
        let length = (self.model.energy_scale(1.0) / scale).powf(1.0 / p as f64);
        let beta = match self.kind {
            ProcessKind::Isothermal => self.start.beta,
            ProcessKind::Isobaric => {
                isobaric_schedule(&self.model, self.held_value, length, policy)?
            }
            ProcessKind::Adiabatic => {
                self.model
                    .adiabatic_beta(self.start.beta, self.start.length, length)
            }
            ProcessKind::Isochoric => unreachable!("isochoric segments do not move in s"),
        };
        Ok(StatePoint { beta, length })
    }

    fn equilibrium_at(&self, t: f64, policy: &NumericsPolicy) -> Result<EquilibriumPoint> {
        let point = self.state_at(t, policy)?;
        equilibrium_point(&self.model, point.beta, point.length, policy)
    }

    /// Held quantity evaluated at an equilibrium point of the path.
    fn held_at(&self, eq: &EquilibriumPoint) -> f64 {
        match self.kind {
            ProcessKind::Isothermal => eq.temperature,
            ProcessKind::Isochoric => eq.length,
            ProcessKind::Isobaric => eq.force,
            ProcessKind::Adiabatic => eq.entropy,
        }
    }

    /// `dW_on/dt = -F dL/dt`.
    fn work_rate(&self, eq: &EquilibriumPoint) -> f64 {
        -eq.force * (self.end.length - self.start.length)
    }

    /// `dQ/dt = sum_n E_n dP_n/dt = -s Var(eps) dx/dt` with `x = beta s(L)`.
    fn heat_rate(&self, eq: &EquilibriumPoint) -> f64 {
        let p = self.model.scale_exponent() as f64;
        let scale = self.model.energy_scale(eq.length);
        let dl = self.end.length - self.start.length;
        match self.kind {
            ProcessKind::Adiabatic => 0.0,
            ProcessKind::Isochoric => {
                let dx = scale * (self.end.beta - self.start.beta);
                -scale * eq.reduced_variance * dx
            }
            ProcessKind::Isothermal => {
                let dx = -p * eq.regime_parameter / eq.length * dl;
                -scale * eq.reduced_variance * dx
            }
            // holding F = p s <eps> / L gives dx/dL = -(p+1) <eps> / (L Var)
            ProcessKind::Isobaric => (p + 1.0) * scale * eq.reduced_mean / eq.length * dl,
        }
    }
}

/// One diagram sample along a segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathSample {
    pub t: f64,
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
    /// Heat absorbed since the start, from the direct `sum E dP` integral.
    #[serde(rename = "Q_cum")]
    pub heat_cumulative: f64,
    /// Work done on the system since the start.
    #[serde(rename = "W_cum")]
    pub work_cumulative: f64,
}

/// Heat and work along one segment together with the cross-check routes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentResult {
    pub kind: ProcessKind,
    pub start: EquilibriumPoint,
    pub end: EquilibriumPoint,
    /// Heat absorbed, `ΔU - W_on`.
    pub heat: f64,
    /// Work done on the system, `-∫ F dL`.
    pub work_on: f64,
    /// Work done by the system, `-W_on`.
    pub work_by: f64,
    pub delta_u: f64,
    pub delta_s: f64,
    /// Direct `∫ sum_n E_n dP_n`.
    pub heat_direct: f64,
    /// `∫ sum_n P_n dE_n` integrated over the energy scale `s` instead of `t`.
    pub work_levels: f64,
    pub held_value: f64,
    /// Largest relative deviation of the held quantity over the samples.
    pub held_drift: f64,
    pub samples: Vec<PathSample>,
}

impl SegmentResult {
    /// `|ΔU - Q_direct - W_on|` relative to the largest of the three magnitudes.
    pub fn first_law_residual(&self) -> f64 {
        let scale = self
            .heat_direct
            .abs()
            .max(self.work_on.abs())
            .max(self.delta_u.abs());
        if scale == 0.0 {
            0.0
        } else {
            (self.delta_u - self.heat_direct - self.work_on).abs() / scale
        }
    }

    /// `|W_on - W_levels|` relative to `|W_on|`.
    pub fn work_duality_residual(&self) -> f64 {
        relative_gap(self.work_on, self.work_levels)
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

fn drift(held: f64, value: f64) -> f64 {
    if held == 0.0 {
        value.abs()
    } else {
        ((value - held) / held).abs()
    }
}

pub fn segment_heat_work(
    segment: &ProcessSegment,
    policy: &NumericsPolicy,
) -> Result<SegmentResult> {
    segment_heat_work_sampled(segment, DEFAULT_SAMPLES, policy)
}

/// Integrates a segment piecewise between `samples` equally spaced values of
/// `t` (at least two), recording a [`PathSample`] at each.
pub fn segment_heat_work_sampled(
    segment: &ProcessSegment,
    samples: usize,
    policy: &NumericsPolicy,
) -> Result<SegmentResult> {
    let samples = samples.max(2);
    // the work and heat integrands share their abscissae
    let mut cache: HashMap<u64, EquilibriumPoint> = HashMap::new();
    let mut eval = |t: f64| -> Result<EquilibriumPoint> {
        if let Some(eq) = cache.get(&t.to_bits()) {
            return Ok(*eq);
        }
        let eq = segment.equilibrium_at(t, policy)?;
        cache.insert(t.to_bits(), eq);
        Ok(eq)
    };
    let mut points = Vec::with_capacity(samples);
    for i in 0..samples {
        let t = i as f64 / (samples - 1) as f64;
        points.push((t, eval(t)?));
    }

    let frozen_levels = segment.kind == ProcessKind::Isochoric;
    let frozen_occupations = segment.kind == ProcessKind::Adiabatic;

    let mut path = Vec::with_capacity(samples);
    let mut work = 0.0;
    let mut heat = 0.0;
    let mut held_drift = 0.0f64;
    for (i, (t, eq)) in points.iter().enumerate() {
        if i > 0 {
            let (t0, eq0) = &points[i - 1];
            if !frozen_levels {
                work += integrate_adaptive_from_ends(
                    |s| Ok(segment.work_rate(&eval(s)?)),
                    *t0,
                    *t,
                    segment.work_rate(eq0),
                    segment.work_rate(eq),
                    policy,
                )?;
            }
            if !frozen_occupations {
                heat += integrate_adaptive_from_ends(
                    |s| Ok(segment.heat_rate(&eval(s)?)),
                    *t0,
                    *t,
                    segment.heat_rate(eq0),
                    segment.heat_rate(eq),
                    policy,
                )?;
            }
        }
        held_drift = held_drift.max(drift(segment.held_value, segment.held_at(eq)));
        path.push(PathSample {
            t: *t,
            length: eq.length,
            beta: eq.beta,
            temperature: eq.temperature,
            force: eq.force,
            energy: eq.energy,
            entropy: eq.entropy,
            heat_cumulative: heat,
            work_cumulative: work,
        });
    }

    let start = points[0].1;
    let end = points[samples - 1].1;
    let delta_u = end.energy - start.energy;
    let work_levels = if frozen_levels {
        0.0
    } else {
        // W = ∫ <eps> ds along the path
        let s0 = segment.model.energy_scale(start.length);
        let s1 = segment.model.energy_scale(end.length);
        integrate_adaptive(
            |s| {
                let point = segment.state_at_scale(s, policy)?;
                let eq = equilibrium_point(&segment.model, point.beta, point.length, policy)?;
                Ok(eq.reduced_mean)
            },
            s0,
            s1,
            policy,
        )?
    };
    let work_on = if frozen_levels { 0.0 } else { work };
    let heat_bookkeeping = if frozen_occupations {
        0.0
    } else {
        delta_u - work_on
    };

    Ok(SegmentResult {
        kind: segment.kind,
        start,
        end,
        heat: heat_bookkeeping,
        work_on,
        work_by: -work_on,
        delta_u,
        delta_s: end.entropy - start.entropy,
        heat_direct: heat,
        work_levels,
        held_value: segment.held_value,
        held_drift,
        samples: path,
    })
}
