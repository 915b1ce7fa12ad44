//! Quantum thermodynamic processes and cycles for exactly solvable working
//! substances.
//!
//! Natural units `hbar = m = k = 1` throughout. Every substance has a
//! spectrum `E_n(L) = eps_n s(L)` that scales uniformly with the generalized
//! coordinate `L`, and the conjugate force is `F = -sum_n P_n dE_n/dL`.

// `!(a < b)` is used on purpose so that NaN inputs take the error branch
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cycles;
pub mod error;
pub mod numerics;
pub mod processes;
pub mod substances;

pub use cycles::{
    build_brayton, build_carnot, build_cycle, build_diesel, build_otto, closed_form_efficiency,
    efficiency_table, run_cycle, run_cycle_sampled, CycleKind, CycleParameters, CycleReport,
    CycleSpec, EfficiencyParameters,
};
pub use error::{Error, ErrorClass, Result};
pub use numerics::NumericsPolicy;
pub use processes::{
    adiabatic_advance, build_segment, isobaric_schedule, segment_heat_work,
    segment_heat_work_sampled, PathSample, ProcessKind, ProcessSegment, SegmentResult, StatePoint,
};
pub use substances::{
    energy_level, equilibrium_point, gibbs_state, partition_function, EquilibriumPoint, GibbsState,
    SpectrumModel, SubstanceKind,
};
