//! Invariant suites behind `qcycle check`.
//!
//! Tolerances are fixed here; the numerics policy only steers the kernels, so
//! a loosened policy shows up as failing rows rather than looser checks.

use std::fmt::Write as _;

use qcycle_core::numerics::derivative_with_step;
use qcycle_core::substances::{
    entropy, equilibrium_force, force, force_equilibrium_closed, free_energy, internal_energy,
};
use qcycle_core::{
    adiabatic_advance, build_cycle, build_segment, gibbs_state, isobaric_schedule,
    run_cycle_sampled, segment_heat_work_sampled, CycleParameters, CycleReport, NumericsPolicy,
    ProcessKind, ProcessSegment, Result, SpectrumModel, StatePoint, SubstanceKind,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Scope {
    Substance,
    Process,
    Cycle,
    All,
}

impl Scope {
    fn includes(self, other: Scope) -> bool {
        self == Scope::All || self == other
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub scope: &'static str,
    pub name: &'static str,
    /// Largest measured deviation, `NaN` when the check errored.
    pub deviation: f64,
    pub tolerance: f64,
    pub error: Option<String>,
}

impl CheckRow {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.deviation <= self.tolerance
    }
}

const SAMPLES: usize = 8;
const SCHEDULE_SEED: u64 = 0x5eed_0fca_71d0;

const ONE_DIMENSIONAL: [SubstanceKind; 4] = [
    SubstanceKind::Box1D,
    SubstanceKind::Harmonic1D,
    SubstanceKind::CavityMode,
    SubstanceKind::SpinHalf,
];

const PROCESS_KINDS: [ProcessKind; 4] = [
    ProcessKind::Isothermal,
    ProcessKind::Isochoric,
    ProcessKind::Isobaric,
    ProcessKind::Adiabatic,
];

fn beta_for(model: &SpectrumModel, x: f64, length: f64) -> f64 {
    x / model.energy_scale(length)
}

fn rel(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Runs `f` over `grid` and keeps the largest deviation.
fn worst<T>(grid: impl IntoIterator<Item = T>, mut f: impl FnMut(T) -> Result<f64>) -> Result<f64> {
    let mut max = 0.0f64;
    for item in grid {
        let d = f(item)?;
        // NaN must fail the row, so it wins over any number
        if d.is_nan() || d > max {
            max = d;
        }
    }
    Ok(max)
}

fn grid() -> Vec<(SubstanceKind, f64, f64)> {
    let mut g = Vec::new();
    for kind in SubstanceKind::ALL {
        for x in [0.05, 0.5, 3.0] {
            for length in [0.7, 1.0, 2.5] {
                g.push((kind, x, length));
            }
        }
    }
    g
}

pub fn force_matches_free_energy_slope(p: &NumericsPolicy) -> Result<f64> {
    worst(grid(), |(kind, x, length)| {
        let model = SpectrumModel::new(kind);
        let beta = beta_for(&model, x, length);
        let summed = force(&gibbs_state(&model, beta, length, p)?, &model);
        let h = p.fd_step_rel * length;
        let slope = derivative_with_step(|l| free_energy(&model, beta, l, p), length, h)?;
        Ok(rel(summed, -slope))
    })
}

pub fn entropy_identity(p: &NumericsPolicy) -> Result<f64> {
    worst(grid(), |(kind, x, length)| {
        let model = SpectrumModel::new(kind);
        let beta = beta_for(&model, x, length);
        let state = gibbs_state(&model, beta, length, p)?;
        let s = entropy(&state);
        Ok(rel(
            s,
            state.ln_partition() + beta * internal_energy(&state, &model),
        ))
    })
}

pub fn normalization(p: &NumericsPolicy) -> Result<f64> {
    worst(grid(), |(kind, x, length)| {
        let model = SpectrumModel::new(kind);
        let state = gibbs_state(&model, beta_for(&model, x, length), length, p)?;
        Ok((state.total_probability() - 1.0).abs())
    })
}

/// Largest `|F L beta - 1| / (3 sqrt(beta E_1 / pi))` over the classical grid;
/// infinite if the deviation does not fall monotonically.
pub fn box_equation_of_state(p: &NumericsPolicy) -> Result<f64> {
    let model = SpectrumModel::box_1d();
    let mut previous = f64::INFINITY;
    worst([1e-4, 1e-6, 1e-8], |x| {
        let beta = beta_for(&model, x, 1.0);
        let state = gibbs_state(&model, beta, 1.0, p)?;
        let deviation = (force(&state, &model) * beta - 1.0).abs();
        let monotone = deviation < previous;
        previous = deviation;
        let bound = 3.0 * (x / std::f64::consts::PI).sqrt();
        Ok(if monotone {
            deviation / bound
        } else {
            f64::INFINITY
        })
    })
}

pub fn cavity_closed_force(p: &NumericsPolicy) -> Result<f64> {
    let model = SpectrumModel::cavity(1.0)?;
    let points = [(0.1, 1.0), (1.0, 1.0), (2.0, 3.0), (10.0, 0.5)];
    worst(points, |(beta, length)| {
        let state = gibbs_state(&model, beta, length, p)?;
        Ok(rel(
            force(&state, &model),
            force_equilibrium_closed(&model, beta, length)?,
        ))
    })
}

/// Segment of `kind` from regime parameter `x` at `L = 1`; isobars that cannot
/// reach `stretch` are run the other way.
fn segment(
    kind: ProcessKind,
    substance: SubstanceKind,
    x: f64,
    stretch: f64,
    p: &NumericsPolicy,
) -> Result<ProcessSegment> {
    let model = SpectrumModel::new(substance);
    let beta = beta_for(&model, x, 1.0);
    let start = StatePoint::new(beta, 1.0)?;
    let endpoint = match kind {
        ProcessKind::Isochoric => beta * stretch,
        _ => stretch,
    };
    build_segment(kind, &model, start, endpoint, p)
        .or_else(|_| build_segment(kind, &model, start, 1.0 / endpoint, p))
}

fn segment_grid() -> Vec<(ProcessKind, SubstanceKind, f64, f64)> {
    let mut g = Vec::new();
    for kind in PROCESS_KINDS {
        for substance in ONE_DIMENSIONAL {
            for (x, stretch) in [(0.3, 1.6), (2.0, 0.7)] {
                g.push((kind, substance, x, stretch));
            }
        }
    }
    g
}

pub fn adiabatic_entropy_invariance(p: &NumericsPolicy) -> Result<f64> {
    let mut cases = Vec::new();
    for kind in SubstanceKind::ALL {
        for (x, stretch) in [(0.1, 2.0), (2.0, 0.6)] {
            cases.push((kind, x, stretch));
        }
    }
    worst(cases, |(kind, x, stretch)| {
        let model = SpectrumModel::new(kind);
        let state = gibbs_state(&model, beta_for(&model, x, 1.0), 1.0, p)?;
        let moved = adiabatic_advance(&model, &state, stretch)?;
        Ok(rel(entropy(&moved), entropy(&state)))
    })
}

pub fn segment_first_law(p: &NumericsPolicy) -> Result<f64> {
    worst(segment_grid(), |(kind, substance, x, stretch)| {
        let r = segment_heat_work_sampled(&segment(kind, substance, x, stretch, p)?, SAMPLES, p)?;
        Ok(r.first_law_residual())
    })
}

pub fn work_duality(p: &NumericsPolicy) -> Result<f64> {
    let grid = segment_grid()
        .into_iter()
        .filter(|(kind, ..)| *kind != ProcessKind::Isochoric);
    worst(grid, |(kind, substance, x, stretch)| {
        let r = segment_heat_work_sampled(&segment(kind, substance, x, stretch, p)?, SAMPLES, p)?;
        Ok(r.work_duality_residual())
    })
}

pub fn reversal_antisymmetry(p: &NumericsPolicy) -> Result<f64> {
    worst(segment_grid(), |(kind, substance, x, stretch)| {
        let seg = segment(kind, substance, x, stretch, p)?;
        let fwd = segment_heat_work_sampled(&seg, SAMPLES, p)?;
        let rev = segment_heat_work_sampled(&seg.reversed(), SAMPLES, p)?;
        let scale = fwd.heat.abs().max(fwd.work_on.abs());
        if scale == 0.0 {
            return Ok(0.0);
        }
        Ok(((fwd.heat + rev.heat)
            .abs()
            .max((fwd.work_on + rev.work_on).abs()))
            / scale)
    })
}

pub fn held_quantity_drift(p: &NumericsPolicy) -> Result<f64> {
    worst(segment_grid(), |(kind, substance, x, stretch)| {
        let r = segment_heat_work_sampled(&segment(kind, substance, x, stretch, p)?, SAMPLES, p)?;
        Ok(r.held_drift)
    })
}

/// `count` seeded `(F0, L)` pairs with `F0` in `[0.1, 10]`, `L` in `[0.5, 3]`
/// and `2 F0 L^2 > kappa (1 + 1e-3)`.
pub fn cavity_schedule_pairs(count: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(count);
    while pairs.len() < count {
        let f0: f64 = rng.gen_range(0.1..10.0);
        let length: f64 = rng.gen_range(0.5..3.0);
        if 2.0 * f0 * length * length > 1.0 + 1e-3 {
            pairs.push((f0, length));
        }
    }
    pairs
}

pub fn cavity_schedule_exactness(p: &NumericsPolicy) -> Result<f64> {
    let model = SpectrumModel::cavity(1.0)?;
    worst(cavity_schedule_pairs(50, SCHEDULE_SEED), |(f0, length)| {
        let beta = isobaric_schedule(&model, f0, length, p)?;
        Ok((equilibrium_force(&model, beta, length, p)? - f0).abs() / f0)
    })
}

fn run(kind: SubstanceKind, params: CycleParameters, p: &NumericsPolicy) -> Result<CycleReport> {
    let model = SpectrumModel::new(kind);
    run_cycle_sampled(&build_cycle(&model, &params, p)?, SAMPLES, p)
}

/// Carnot at `T_H = 2 T_C` with corner A at regime parameter 0.5.
fn carnot(kind: SubstanceKind, p: &NumericsPolicy) -> Result<CycleReport> {
    let model = SpectrumModel::new(kind);
    let t_hot = 2.0;
    let l_a = match kind {
        SubstanceKind::SpinHalf => 2.0,
        _ => (0.5 * t_hot / model.energy_scale(1.0)).powf(-1.0 / model.scale_exponent() as f64),
    };
    run(
        kind,
        CycleParameters::Carnot {
            t_hot,
            t_cold: 1.0,
            l_a,
            l_b: 1.5 * l_a,
        },
        p,
    )
}

fn otto(kind: SubstanceKind, p: &NumericsPolicy) -> Result<CycleReport> {
    let model = SpectrumModel::new(kind);
    let beta_cold = 1.0 / model.energy_scale(1.5);
    run(
        kind,
        CycleParameters::Otto {
            l0: 1.0,
            l1: 1.5,
            beta_hot: 0.3 * beta_cold,
            beta_cold,
        },
        p,
    )
}

/// Exact-spectrum isobaric cycles with their closed efficiencies.
fn isobaric_cycles() -> Vec<(SubstanceKind, CycleParameters)> {
    let mut cases = Vec::new();
    for kind in [SubstanceKind::CavityMode, SubstanceKind::Harmonic1D] {
        cases.push((
            kind,
            CycleParameters::Brayton {
                f1: 4.0,
                f0: 1.0,
                l_a: 1.0,
                l_b: 2.0,
            },
        ));
        cases.push((
            kind,
            CycleParameters::Diesel {
                f1: 1.0,
                l1: 2.0,
                r_c: 0.5,
                r_e: 0.8,
            },
        ));
    }
    // U = F L / 2 keeps the 1D box exact at any temperature
    cases.push((
        SubstanceKind::Box1D,
        CycleParameters::Brayton {
            f1: 80.0,
            f0: 10.0,
            l_a: 1.0,
            l_b: 1.5,
        },
    ));
    cases.push((
        SubstanceKind::Box1D,
        CycleParameters::Diesel {
            f1: 30.0,
            l1: 2.0,
            r_c: 0.5,
            r_e: 0.8,
        },
    ));
    cases
}

pub fn carnot_universality(p: &NumericsPolicy) -> Result<f64> {
    worst(SubstanceKind::ALL, |kind| {
        Ok((carnot(kind, p)?.eta_numeric - 0.5).abs())
    })
}

pub fn otto_agreement(p: &NumericsPolicy) -> Result<f64> {
    worst(SubstanceKind::ALL, |kind| {
        let r = otto(kind, p)?;
        Ok((r.eta_numeric - r.eta_closed).abs())
    })
}

pub fn isobaric_cycle_agreement(p: &NumericsPolicy) -> Result<f64> {
    worst(isobaric_cycles(), |(kind, params)| {
        let r = run(kind, params, p)?;
        Ok((r.eta_numeric - r.eta_closed).abs())
    })
}

pub fn cavity_brayton_sweep(p: &NumericsPolicy) -> Result<f64> {
    let ratios = (1..=9).map(|i| i as f64 / 10.0);
    worst(ratios, |ratio| {
        let params = CycleParameters::Brayton {
            f1: 4.0,
            f0: 4.0 * ratio,
            l_a: 1.0,
            l_b: 2.0,
        };
        let r = run(SubstanceKind::CavityMode, params, p)?;
        Ok((r.eta_numeric - (1.0 - ratio.sqrt())).abs())
    })
}

fn all_cycles(p: &NumericsPolicy) -> Result<Vec<CycleReport>> {
    let mut out = Vec::new();
    for kind in SubstanceKind::ALL {
        out.push(carnot(kind, p)?);
        out.push(otto(kind, p)?);
    }
    for (kind, params) in isobaric_cycles() {
        out.push(run(kind, params, p)?);
    }
    Ok(out)
}

pub fn loop_entropy(p: &NumericsPolicy) -> Result<f64> {
    worst(all_cycles(p)?, |r| {
        let scale = r
            .corners
            .iter()
            .map(|c| c.entropy.abs())
            .fold(1.0, f64::max);
        Ok(r.loop_entropy.abs() / scale)
    })
}

pub fn loop_first_law(p: &NumericsPolicy) -> Result<f64> {
    worst(all_cycles(p)?, |r| Ok(r.first_law_gap))
}

pub fn loop_closure(p: &NumericsPolicy) -> Result<f64> {
    worst(all_cycles(p)?, |r| Ok(r.closure_gap))
}

type Check = (&'static str, f64, fn(&NumericsPolicy) -> Result<f64>);

const SUBSTANCE_CHECKS: [Check; 5] = [
    (
        "force = -dF/dL (finite difference)",
        1e-6,
        force_matches_free_energy_slope,
    ),
    ("entropy = ln Z + beta U", 1e-10, entropy_identity),
    ("probabilities sum to one", 1e-10, normalization),
    (
        "box F L beta -> 1 (ratio to bound)",
        1.0,
        box_equation_of_state,
    ),
    ("cavity force closed form", 1e-10, cavity_closed_force),
];

const PROCESS_CHECKS: [Check; 6] = [
    (
        "adiabat entropy invariance",
        1e-12,
        adiabatic_entropy_invariance,
    ),
    ("segment first law", 1e-8, segment_first_law),
    ("work route agreement", 1e-8, work_duality),
    ("segment reversal antisymmetry", 1e-8, reversal_antisymmetry),
    ("held quantity drift", 1e-8, held_quantity_drift),
    (
        "cavity isobaric schedule residual",
        1e-10,
        cavity_schedule_exactness,
    ),
];

const CYCLE_CHECKS: [Check; 7] = [
    ("Carnot universality, all kinds", 1e-6, carnot_universality),
    ("Otto numeric vs closed, all kinds", 1e-8, otto_agreement),
    (
        "Brayton/Diesel numeric vs closed",
        1e-8,
        isobaric_cycle_agreement,
    ),
    ("cavity Brayton F0/F1 sweep", 1e-8, cavity_brayton_sweep),
    ("loop entropy", 1e-9, loop_entropy),
    ("loop first law", 1e-8, loop_first_law),
    ("loop closure", 1e-10, loop_closure),
];

fn evaluate(scope: &'static str, checks: &[Check], p: &NumericsPolicy, rows: &mut Vec<CheckRow>) {
    for &(name, tolerance, f) in checks {
        let (deviation, error) = match f(p) {
            Ok(d) => (d, None),
            Err(e) => (f64::NAN, Some(e.to_string())),
        };
        rows.push(CheckRow {
            scope,
            name,
            deviation,
            tolerance,
            error,
        });
    }
}

pub fn run_checks(scope: Scope, policy: &NumericsPolicy) -> Vec<CheckRow> {
    let mut rows = Vec::new();
    if scope.includes(Scope::Substance) {
        evaluate("substance", &SUBSTANCE_CHECKS, policy, &mut rows);
    }
    if scope.includes(Scope::Process) {
        evaluate("process", &PROCESS_CHECKS, policy, &mut rows);
    }
    if scope.includes(Scope::Cycle) {
        evaluate("cycle", &CYCLE_CHECKS, policy, &mut rows);
    }
    rows
}

pub fn format_rows(rows: &[CheckRow]) -> String {
    let mut out = format!(
        "{:<10} {:<38} {:>11} {:>9}  result\n",
        "scope", "property", "deviation", "tolerance"
    );
    for r in rows {
        let verdict = if r.passed() { "PASS" } else { "FAIL" };
        writeln!(
            out,
            "{:<10} {:<38} {:>11.3e} {:>9.1e}  {verdict}",
            r.scope, r.name, r.deviation, r.tolerance
        )
        .unwrap();
        if let Some(e) = &r.error {
            writeln!(out, "           error: {e}").unwrap();
        }
    }
    let failed = rows.iter().filter(|r| !r.passed()).count();
    writeln!(out, "{} checks, {failed} failed", rows.len()).unwrap();
    out
}
