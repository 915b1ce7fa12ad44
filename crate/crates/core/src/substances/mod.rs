//! Working substances and their equilibrium state functions.
//!
//! Every supported spectrum scales uniformly with the generalized coordinate:
//! `E_n(L) = eps_n * s(L)` with `s(L) = c * L^(-p)`, `p = 2` for particles in a
//! box and `p = 1` for oscillators, the cavity mode and the spin. Natural units
//! `hbar = m = k = 1` are used throughout.
//!
//! | kind          | reduced levels `eps`          | `s(L)`           | gamma |
//! |---------------|-------------------------------|------------------|-------|
//! | `Box1D`       | `n^2`, n >= 1                 | `pi^2/(2 m L^2)` | 3     |
//! | `Box2D/3D`    | `sum n_i^2`, n_i >= 1         | `pi^2/(2 m L^2)` | 2, 5/3|
//! | `Harmonic1D`  | `n + 1/2`, n >= 0             | `kappa / L`      | 2     |
//! | `Harmonic2D/3D`| `sum n_i + d/2`              | `kappa / L`      | 3/2, 4/3 |
//! | `CavityMode`  | `n + 1/2`, n >= 0             | `kappa / L`      | 2     |
//! | `SpinHalf`    | `-1/2, +1/2` (L = 1/B)        | `1 / L`          | 2     |

mod closed;
mod levels;
mod state;

pub use closed::{
    entropy_closed, force_equilibrium_closed, internal_energy_closed, mean_occupation,
};
pub use levels::LevelTable;
pub use state::{
    entropy, equilibrium_force, equilibrium_internal_energy, equilibrium_point, force, force_of,
    free_energy, gibbs_state, heat_capacity, internal_energy, partition_function, EquilibriumPoint,
    GibbsState, HeatCapacityMode, PartitionFunction,
};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SubstanceKind {
    #[serde(rename = "box1d")]
    Box1D,
    #[serde(rename = "box2d")]
    Box2D,
    #[serde(rename = "box3d")]
    Box3D,
    #[serde(rename = "harmonic1d")]
    Harmonic1D,
    #[serde(rename = "harmonic2d")]
    Harmonic2D,
    #[serde(rename = "harmonic3d")]
    Harmonic3D,
    #[serde(rename = "cavity")]
    CavityMode,
    #[serde(rename = "spin_half")]
    SpinHalf,
}

impl SubstanceKind {
    pub const ALL: [SubstanceKind; 8] = [
        SubstanceKind::Box1D,
        SubstanceKind::Box2D,
        SubstanceKind::Box3D,
        SubstanceKind::Harmonic1D,
        SubstanceKind::Harmonic2D,
        SubstanceKind::Harmonic3D,
        SubstanceKind::CavityMode,
        SubstanceKind::SpinHalf,
    ];

    /// Spatial dimension `d`; the "volume" conjugate to the pressure is `L^d`.
    pub fn dimension(self) -> u32 {
        match self {
            SubstanceKind::Box2D | SubstanceKind::Harmonic2D => 2,
            SubstanceKind::Box3D | SubstanceKind::Harmonic3D => 3,
            _ => 1,
        }
    }

    /// Exponent `p` in `E_n ∝ L^(-p)`.
    pub fn scale_exponent(self) -> i32 {
        if self.is_box() {
            2
        } else {
            1
        }
    }

    pub fn is_box(self) -> bool {
        matches!(
            self,
            SubstanceKind::Box1D | SubstanceKind::Box2D | SubstanceKind::Box3D
        )
    }

    /// Adiabatic exponent, `1 + p/d`.
    pub fn gamma(self) -> f64 {
        1.0 + self.scale_exponent() as f64 / self.dimension() as f64
    }

    pub fn name(self) -> &'static str {
        match self {
            SubstanceKind::Box1D => "box1d",
            SubstanceKind::Box2D => "box2d",
            SubstanceKind::Box3D => "box3d",
            SubstanceKind::Harmonic1D => "harmonic1d",
            SubstanceKind::Harmonic2D => "harmonic2d",
            SubstanceKind::Harmonic3D => "harmonic3d",
            SubstanceKind::CavityMode => "cavity",
            SubstanceKind::SpinHalf => "spin_half",
        }
    }
}

/// A working substance: a uniformly scaling spectrum plus its adiabatic exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumModel {
    kind: SubstanceKind,
    mass: f64,
    mode_constant: f64,
    gamma: f64,
}

impl SpectrumModel {
    /// Model with unit mass and unit mode constant.
    pub fn new(kind: SubstanceKind) -> Self {
        SpectrumModel {
            kind,
            mass: 1.0,
            mode_constant: 1.0,
            gamma: kind.gamma(),
        }
    }

    pub fn with_parameters(kind: SubstanceKind, mass: f64, mode_constant: f64) -> Result<Self> {
        Ok(SpectrumModel {
            kind,
            mass: require_positive("mass", mass)?,
            mode_constant: require_positive("mode_constant", mode_constant)?,
            gamma: kind.gamma(),
        })
    }

    pub fn box_1d() -> Self {
        Self::new(SubstanceKind::Box1D)
    }

    pub fn cavity(mode_constant: f64) -> Result<Self> {
        Self::with_parameters(SubstanceKind::CavityMode, 1.0, mode_constant)
    }

    pub fn spin_half() -> Self {
        Self::new(SubstanceKind::SpinHalf)
    }

    pub fn kind(&self) -> SubstanceKind {
        self.kind
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// `kappa = hbar * s * pi * c` for the cavity, `hbar * omega * L` for oscillators.
    pub fn mode_constant(&self) -> f64 {
        self.mode_constant
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn scale_exponent(&self) -> i32 {
        self.kind.scale_exponent()
    }

    /// Energy scale `s(L)` multiplying the reduced levels.
    pub fn energy_scale(&self, length: f64) -> f64 {
        let p = self.scale_exponent();
        let prefactor = match self.kind {
            SubstanceKind::Box1D | SubstanceKind::Box2D | SubstanceKind::Box3D => {
                PI * PI / (2.0 * self.mass)
            }
            SubstanceKind::Harmonic1D
            | SubstanceKind::Harmonic2D
            | SubstanceKind::Harmonic3D
            | SubstanceKind::CavityMode => self.mode_constant,
            SubstanceKind::SpinHalf => 1.0,
        };
        prefactor * length.powi(-p)
    }

    /// Lowest reduced level.
    pub fn ground_reduced(&self) -> f64 {
        let d = self.kind.dimension() as f64;
        match self.kind {
            SubstanceKind::Box1D | SubstanceKind::Box2D | SubstanceKind::Box3D => d,
            SubstanceKind::SpinHalf => -0.5,
            _ => 0.5 * d,
        }
    }

    /// Dimensionless regime parameter `beta * s(L)`; equals `beta * E_1` for
    /// the 1D box and `beta * hbar * omega` for oscillators.
    pub fn regime_parameter(&self, beta: f64, length: f64) -> f64 {
        beta * self.energy_scale(length)
    }

    /// Inverse temperature after an adiabatic change `from -> to` that keeps
    /// `beta * E_n` fixed.
    pub fn adiabatic_beta(&self, beta: f64, from: f64, to: f64) -> f64 {
        beta * (to / from).powi(self.scale_exponent())
    }
}

/// Energy of level `n` at coordinate `length`.
///
/// Indexing: `Box1D` uses the quantum number `n >= 1`; oscillators and the
/// cavity use `n >= 0`; `SpinHalf` uses 0 for the lower and 1 for the upper
/// level. Multi-dimensional kinds use a flat state index `n >= 0` ordered by
/// non-decreasing energy, each degenerate state counted separately.
pub fn energy_level(model: &SpectrumModel, n: usize, length: f64) -> Result<f64> {
    require_positive("length", length)?;
    let invalid = Error::InvalidLevel {
        kind: model.kind,
        index: n,
    };
    let reduced = match model.kind {
        SubstanceKind::Box1D => {
            if n == 0 {
                return Err(invalid);
            }
            (n * n) as f64
        }
        SubstanceKind::Harmonic1D | SubstanceKind::CavityMode => n as f64 + 0.5,
        SubstanceKind::SpinHalf => match n {
            0 => -0.5,
            1 => 0.5,
            _ => return Err(invalid),
        },
        SubstanceKind::Box2D
        | SubstanceKind::Box3D
        | SubstanceKind::Harmonic2D
        | SubstanceKind::Harmonic3D => levels::flat_state_energy(model.kind, n),
    };
    Ok(reduced * model.energy_scale(length))
}
