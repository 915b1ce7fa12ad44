use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::numerics::{derivative_with_step, CompensatedSum, NumericsPolicy};

use super::levels::{self, LevelTable};
use super::{SpectrumModel, SubstanceKind};

/// Truncated partition function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionFunction {
    /// `ln Z`, kept in log form so that low temperatures do not overflow.
    pub ln_value: f64,
    pub levels_used: usize,
    /// Bound on the omitted tail relative to the partial sum.
    pub tail_bound: f64,
}

impl PartitionFunction {
    pub fn value(&self) -> f64 {
        self.ln_value.exp()
    }
}

/// Canonical state at inverse temperature `beta` and coordinate `length`,
/// truncated to the levels that carry all but `truncation_error_bound` of the
/// weight. After an adiabatic change the occupations are those of the initial
/// state and `beta` is the rescaled temperature that reproduces them.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsState {
    beta: f64,
    length: f64,
    levels: LevelTable,
    /// Probability of each single state of a level (not of the whole multiplet).
    probabilities: Vec<f64>,
    ln_partition: f64,
    truncation_error_bound: f64,
}

impl GibbsState {
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn temperature(&self) -> f64 {
        1.0 / self.beta
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn levels(&self) -> &LevelTable {
        &self.levels
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn ln_partition(&self) -> f64 {
        self.ln_partition
    }

    pub fn partition_value(&self) -> f64 {
        self.ln_partition.exp()
    }

    pub fn truncation_error_bound(&self) -> f64 {
        self.truncation_error_bound
    }

    /// `sum_n g_n P_n`.
    pub fn total_probability(&self) -> f64 {
        let mut acc = CompensatedSum::default();
        for (p, g) in self.probabilities.iter().zip(self.levels.degeneracy()) {
            acc.add(p * *g as f64);
        }
        acc.value()
    }

    /// Same occupations at a new coordinate and inverse temperature.
    pub(crate) fn with_coordinate(&self, beta: f64, length: f64) -> GibbsState {
        GibbsState {
            beta,
            length,
            ..self.clone()
        }
    }
}

fn check_inputs(beta: f64, length: f64) -> Result<()> {
    require_positive("beta", beta)?;
    require_positive("length", length)?;
    Ok(())
}

pub fn partition_function(
    model: &SpectrumModel,
    beta: f64,
    length: f64,
    policy: &NumericsPolicy,
) -> Result<PartitionFunction> {
    check_inputs(beta, length)?;
    let x = model.regime_parameter(beta, length);
    let moments = levels::scan_moments(model, x, policy)?;
    let ln_value = moments.weight_sum.ln() - x * model.ground_reduced();
    // the omitted tail moves ln Z by at most ln(1 + bound)
    debug_assert!(
        closed_ln_partition(model, x).is_none_or(|exact| {
            (exact - ln_value).abs()
                <= moments.relative_bound.ln_1p() + 1e-12 * exact.abs().max(1.0)
        }),
        "truncated ln Z disagrees with the closed form"
    );
    Ok(PartitionFunction {
        ln_value,
        levels_used: moments.levels,
        tail_bound: moments.relative_bound,
    })
}

/// Geometric series for the oscillator family, two-term sum for the spin.
fn closed_ln_partition(model: &SpectrumModel, x: f64) -> Option<f64> {
    match model.kind() {
        SubstanceKind::CavityMode | SubstanceKind::Harmonic1D => {
            Some(-0.5 * x - (-(-x).exp_m1()).ln())
        }
        SubstanceKind::SpinHalf => Some((2.0 * (0.5 * x).cosh()).ln()),
        _ => None,
    }
}

pub fn gibbs_state(
    model: &SpectrumModel,
    beta: f64,
    length: f64,
    policy: &NumericsPolicy,
) -> Result<GibbsState> {
    check_inputs(beta, length)?;
    let x = model.regime_parameter(beta, length);
    let truncated = levels::truncate(model, x, policy)?;
    let norm = truncated.weight_sum;
    let probabilities = truncated.weights.iter().map(|w| w / norm).collect();
    Ok(GibbsState {
        beta,
        length,
        ln_partition: norm.ln() - x * model.ground_reduced(),
        truncation_error_bound: truncated.relative_bound,
        levels: truncated.table,
        probabilities,
    })
}

/// `F = -sum_n g_n P_n dE_n/dL` for an arbitrary occupation vector, using the
/// analytic derivative `dE_n/dL = -p E_n / L`.
pub fn force_of(
    model: &SpectrumModel,
    length: f64,
    levels: &LevelTable,
    probabilities: &[f64],
) -> Result<f64> {
    require_positive("length", length)?;
    if probabilities.len() != levels.len() {
        return Err(Error::Ordering(format!(
            "{} probabilities for {} levels",
            probabilities.len(),
            levels.len()
        )));
    }
    let scale = model.energy_scale(length);
    let p = model.scale_exponent() as f64;
    let mut acc = CompensatedSum::default();
    for ((eps, g), prob) in levels
        .reduced()
        .iter()
        .zip(levels.degeneracy())
        .zip(probabilities)
    {
        let energy = eps * scale;
        let slope = -p * energy / length;
        acc.add(-(*g as f64) * prob * slope);
    }
    Ok(acc.value())
}

pub fn force(state: &GibbsState, model: &SpectrumModel) -> f64 {
    force_of(model, state.length, &state.levels, &state.probabilities)
        .expect("a GibbsState always has a positive coordinate and matching columns")
}

/// `U = sum_n g_n P_n E_n`.
pub fn internal_energy(state: &GibbsState, model: &SpectrumModel) -> f64 {
    let scale = model.energy_scale(state.length);
    let mut acc = CompensatedSum::default();
    for ((eps, g), prob) in state
        .levels
        .reduced()
        .iter()
        .zip(state.levels.degeneracy())
        .zip(&state.probabilities)
    {
        acc.add(*g as f64 * prob * eps * scale);
    }
    acc.value()
}

/// Gibbs-Shannon entropy `-sum_n g_n P_n ln P_n` (k = 1).
pub fn entropy(state: &GibbsState) -> f64 {
    let mut acc = CompensatedSum::default();
    for (prob, g) in state.probabilities.iter().zip(state.levels.degeneracy()) {
        if *prob > 0.0 {
            acc.add(-(*g as f64) * prob * prob.ln());
        }
    }
    acc.value()
}

/// Helmholtz free energy `-(1/beta) ln Z`.
pub fn free_energy(
    model: &SpectrumModel,
    beta: f64,
    length: f64,
    policy: &NumericsPolicy,
) -> Result<f64> {
    Ok(-partition_function(model, beta, length, policy)?.ln_value / beta)
}

/// Equilibrium force without materializing the state. For every supported
/// spectrum this is `p U / L`.
pub fn equilibrium_force(
    model: &SpectrumModel,
    beta: f64,
    length: f64,
    policy: &NumericsPolicy,
) -> Result<f64> {
    let energy = equilibrium_internal_energy(model, beta, length, policy)?;
    Ok(model.scale_exponent() as f64 * energy / length)
}

pub fn equilibrium_internal_energy(
    model: &SpectrumModel,
    beta: f64,
    length: f64,
    policy: &NumericsPolicy,
) -> Result<f64> {
    check_inputs(beta, length)?;
    let x = model.regime_parameter(beta, length);
    let moments = levels::scan_moments(model, x, policy)?;
    Ok(moments.mean * model.energy_scale(length))
}

/// Equilibrium state functions at one `(beta, L)` point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquilibriumPoint {
    pub beta: f64,
    pub length: f64,
    pub temperature: f64,
    pub force: f64,
    pub energy: f64,
    pub entropy: f64,
    /// `beta * s(L)`; equals `beta * E_1` for the 1D box.
    pub regime_parameter: f64,
    /// Variance of the reduced level `eps` under the Gibbs weights.
    #[serde(skip)]
    pub reduced_variance: f64,
    #[serde(skip)]
    pub reduced_mean: f64,
}

/// Streams the spectrum once and returns `F`, `U`, `S = ln Z + beta U` and the
/// reduced moments.
pub fn equilibrium_point(
    model: &SpectrumModel,
    beta: f64,
    length: f64,
    policy: &NumericsPolicy,
) -> Result<EquilibriumPoint> {
    check_inputs(beta, length)?;
    let x = model.regime_parameter(beta, length);
    let m = levels::scan_moments(model, x, policy)?;
    let scale = model.energy_scale(length);
    let energy = m.mean * scale;
    Ok(EquilibriumPoint {
        beta,
        length,
        temperature: 1.0 / beta,
        force: model.scale_exponent() as f64 * energy / length,
        energy,
        entropy: m.weight_sum.ln() + x * (m.mean - model.ground_reduced()),
        regime_parameter: x,
        reduced_variance: m.variance,
        reduced_mean: m.mean,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeatCapacityMode {
    ConstantCoordinate,
    ConstantForce,
}

/// Heat capacity by centered differences with `dT = max(fd_step_rel * T, 1e-9)`.
///
/// At constant force, `C_F = C_L + ((dU/dL)_T + F) (dL/dT)_F` with
/// `(dL/dT)_F = -(dF/dT)_L / (dF/dL)_T`.
pub fn heat_capacity(
    model: &SpectrumModel,
    beta: f64,
    length: f64,
    mode: HeatCapacityMode,
    policy: &NumericsPolicy,
) -> Result<f64> {
    check_inputs(beta, length)?;
    let temperature = 1.0 / beta;
    let dt = (policy.fd_step_rel * temperature).max(1e-9);
    if temperature - dt <= 0.0 {
        return Err(Error::StepUnderflow { at: temperature });
    }
    let energy_at = |t: f64, l: f64| equilibrium_internal_energy(model, 1.0 / t, l, policy);
    let force_at = |t: f64, l: f64| equilibrium_force(model, 1.0 / t, l, policy);

    let c_coordinate = derivative_with_step(|t| energy_at(t, length), temperature, dt)?;
    match mode {
        HeatCapacityMode::ConstantCoordinate => Ok(c_coordinate),
        HeatCapacityMode::ConstantForce => {
            let dl = policy.fd_step_rel * length;
            let du_dl = derivative_with_step(|l| energy_at(temperature, l), length, dl)?;
            let df_dt = derivative_with_step(|t| force_at(t, length), temperature, dt)?;
            let df_dl = derivative_with_step(|l| force_at(temperature, l), length, dl)?;
            if df_dl == 0.0 {
                return Err(Error::StepUnderflow { at: length });
            }
            let dl_dt = -df_dt / df_dl;
            let f = force_at(temperature, length)?;
            Ok(c_coordinate + (du_dl + f) * dl_dt)
        }
    }
}
