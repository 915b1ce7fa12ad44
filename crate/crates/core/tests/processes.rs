use proptest::prelude::*;
use qcycle_core::processes::{
    adiabatic_advance, build_segment, isobaric_schedule, segment_heat_work_sampled, ProcessKind,
    ProcessSegment, StatePoint,
};
use qcycle_core::substances::{entropy, equilibrium_force, gibbs_state};
use qcycle_core::{NumericsPolicy, SpectrumModel, SubstanceKind};

fn policy() -> NumericsPolicy {
    NumericsPolicy::default()
}

const ONE_DIMENSIONAL: [SubstanceKind; 4] = [
    SubstanceKind::Box1D,
    SubstanceKind::Harmonic1D,
    SubstanceKind::CavityMode,
    SubstanceKind::SpinHalf,
];

/// Segment of the given kind starting at regime parameter `x` and `L = 1`,
/// ending at `L = stretch` (or at `beta * stretch` for an isochoric one).
fn segment(kind: ProcessKind, substance: SubstanceKind, x: f64, stretch: f64) -> ProcessSegment {
    let model = SpectrumModel::new(substance);
    let beta = x / model.energy_scale(1.0);
    let start = StatePoint::new(beta, 1.0).unwrap();
    let endpoint = match kind {
        ProcessKind::Isochoric => beta * stretch,
        _ => stretch,
    };
    // an isobar ends where F meets the ground-level force: box and oscillator
    // isobars cannot be compressed arbitrarily, spin isobars cannot expand
    build_segment(kind, &model, start, endpoint, &policy())
        .or_else(|_| build_segment(kind, &model, start, 1.0 / endpoint, &policy()))
        .unwrap()
}

fn process_kinds() -> impl Strategy<Value = ProcessKind> {
    prop::sample::select(vec![
        ProcessKind::Isothermal,
        ProcessKind::Isochoric,
        ProcessKind::Isobaric,
        ProcessKind::Adiabatic,
    ])
}

fn substances() -> impl Strategy<Value = SubstanceKind> {
    prop::sample::select(ONE_DIMENSIONAL.to_vec())
}

#[test]
fn cavity_schedule_examples() {
    let p = policy();
    let cavity = SpectrumModel::cavity(1.0).unwrap();
    let beta = isobaric_schedule(&cavity, 1.0, 1.0, &p).unwrap();
    assert!((beta - 1.098_612_288_668_11).abs() < 1e-12);
    assert!(isobaric_schedule(&cavity, 0.5, 1.0, &p).is_err());
}

#[test]
fn adiabatic_advance_is_identity_at_same_length() {
    let p = policy();
    for kind in SubstanceKind::ALL {
        let model = SpectrumModel::new(kind);
        let state = gibbs_state(&model, 0.8 / model.energy_scale(1.3), 1.3, &p).unwrap();
        assert_eq!(adiabatic_advance(&model, &state, 1.3).unwrap(), state);
    }
}

#[test]
fn held_quantity_drift_for_every_kind() {
    for substance in ONE_DIMENSIONAL {
        for kind in [
            ProcessKind::Isothermal,
            ProcessKind::Isochoric,
            ProcessKind::Isobaric,
            ProcessKind::Adiabatic,
        ] {
            let seg = segment(kind, substance, 0.7, 1.6);
            let r = segment_heat_work_sampled(&seg, 12, &policy()).unwrap();
            assert!(
                r.held_drift <= 1e-8,
                "{substance:?} {kind:?}: {}",
                r.held_drift
            );
        }
    }
}

#[test]
fn box_isobaric_heat_is_three_halves_force_displacement() {
    // U = F L / 2 holds exactly for the 1D box, so the heat is exact in any regime
    let p = policy();
    let model = SpectrumModel::box_1d();
    for (force, from, to) in [(8.0, 100.0, 200.0), (20.0, 1.0, 1.5)] {
        let seg = ProcessSegment::isobaric(&model, force, from, to, &p).unwrap();
        let r = segment_heat_work_sampled(&seg, 8, &p).unwrap();
        let expected = 1.5 * force * (to - from);
        assert!(
            (r.heat / expected - 1.0).abs() <= 1e-9,
            "{} vs {expected}",
            r.heat
        );
    }
}

#[test]
fn cavity_isobaric_heat_is_twice_force_displacement() {
    // U = F L for the cavity, so Q = dU + F dL = 2 F dL at every temperature
    let p = policy();
    let model = SpectrumModel::cavity(1.0).unwrap();
    for (force, from, to) in [(4.0, 1.0, 2.0), (0.6, 1.5, 4.0)] {
        let seg = ProcessSegment::isobaric(&model, force, from, to, &p).unwrap();
        let r = segment_heat_work_sampled(&seg, 8, &p).unwrap();
        let expected = 2.0 * force * (to - from);
        assert!(
            (r.heat / expected - 1.0).abs() <= 1e-10,
            "{} vs {expected}",
            r.heat
        );
    }
}

#[test]
fn spin_isothermal_heat_is_temperature_times_entropy_change() {
    let p = policy();
    let model = SpectrumModel::spin_half();
    let seg = ProcessSegment::isothermal(&model, 0.5, 1.0, 3.0, &p).unwrap();
    let r = segment_heat_work_sampled(&seg, 16, &p).unwrap();
    assert!((r.heat - 0.5 * r.delta_s).abs() <= 1e-9 * r.heat.abs());
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn first_law_closure(
        kind in process_kinds(),
        substance in substances(),
        x in 0.05f64..5.0,
        stretch in 0.5f64..2.0,
    ) {
        let r = segment_heat_work_sampled(&segment(kind, substance, x, stretch), 8, &policy()).unwrap();
        prop_assert!(r.first_law_residual() <= 1e-8, "{:?}", r);
        let scale = r.heat.abs().max(r.work_on.abs()).max(r.delta_u.abs());
        prop_assert!((r.delta_u - r.heat - r.work_on).abs() <= 1e-8 * scale);
        for s in &r.samples {
            let du = s.energy - r.samples[0].energy;
            prop_assert!((du - s.heat_cumulative - s.work_cumulative).abs() <= 1e-8 * scale.max(1e-300));
        }
    }

    #[test]
    fn adiabatic_invariance(substance in substances(), x in 0.05f64..5.0, stretch in 0.3f64..3.0) {
        let p = policy();
        let model = SpectrumModel::new(substance);
        let state = gibbs_state(&model, x / model.energy_scale(1.0), 1.0, &p).unwrap();
        let moved = adiabatic_advance(&model, &state, stretch).unwrap();
        prop_assert_eq!(moved.probabilities(), state.probabilities());
        prop_assert!((entropy(&moved) - entropy(&state)).abs() <= 1e-12 * entropy(&state).max(1e-300));
        let r = segment_heat_work_sampled(&segment(ProcessKind::Adiabatic, substance, x, stretch), 6, &p).unwrap();
        prop_assert_eq!(r.heat, 0.0);
        prop_assert!(r.delta_s.abs() <= 1e-12 * r.start.entropy.max(1e-300));
    }

    #[test]
    fn work_force_duality(
        kind in prop::sample::select(vec![ProcessKind::Isothermal, ProcessKind::Isobaric, ProcessKind::Adiabatic]),
        substance in substances(),
        x in 0.05f64..5.0,
        stretch in 0.5f64..2.0,
    ) {
        let r = segment_heat_work_sampled(&segment(kind, substance, x, stretch), 8, &policy()).unwrap();
        prop_assert!(r.work_duality_residual() <= 1e-8, "{} vs {}", r.work_on, r.work_levels);
    }

    #[test]
    fn reversal_antisymmetry(
        kind in process_kinds(),
        substance in substances(),
        x in 0.05f64..5.0,
        stretch in 0.5f64..2.0,
    ) {
        let p = policy();
        let seg = segment(kind, substance, x, stretch);
        let fwd = segment_heat_work_sampled(&seg, 8, &p).unwrap();
        let rev = segment_heat_work_sampled(&seg.reversed(), 8, &p).unwrap();
        let scale = fwd.heat.abs().max(fwd.work_on.abs());
        prop_assert!((fwd.heat + rev.heat).abs() <= 1e-8 * scale);
        prop_assert!((fwd.work_on + rev.work_on).abs() <= 1e-8 * scale);
    }

    #[test]
    fn schedule_residual(
        substance in prop::sample::select(vec![SubstanceKind::Box1D, SubstanceKind::Box2D, SubstanceKind::Harmonic3D]),
        excess in 1.05f64..50.0,
        length in 0.5f64..3.0,
    ) {
        let p = policy();
        let model = SpectrumModel::new(substance);
        let ground = model.scale_exponent() as f64 * model.energy_scale(length) * model.ground_reduced() / length;
        let force = ground * excess;
        let beta = isobaric_schedule(&model, force, length, &p).unwrap();
        let f = equilibrium_force(&model, beta, length, &p).unwrap();
        prop_assert!((f - force).abs() <= 1e-10 * force);
    }
}
