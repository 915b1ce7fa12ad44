//! Closed-form reference expressions. The box formulas are classical-limit
//! results, valid only when `beta * E_1(L) << 1`; the oscillator and spin
//! formulas are exact.

use crate::error::{require_positive, Error, Result};

use super::{SpectrumModel, SubstanceKind};

fn inputs(beta: f64, length: f64) -> Result<()> {
    require_positive("beta", beta)?;
    require_positive("length", length)?;
    Ok(())
}

fn unsupported(operation: &'static str, model: &SpectrumModel) -> Error {
    Error::UnsupportedKind {
        operation,
        kind: model.kind(),
    }
}

fn bose(x: f64) -> f64 {
    1.0 / x.exp_m1()
}

/// `F = 1/(L beta)` for the box, `(kappa/L^2)(<n> + 1/2)` for the oscillator
/// family and `-tanh(beta/(2L)) / (2 L^2)` for the spin.
pub fn force_equilibrium_closed(model: &SpectrumModel, beta: f64, length: f64) -> Result<f64> {
    inputs(beta, length)?;
    match model.kind() {
        SubstanceKind::Box1D => Ok(1.0 / (length * beta)),
        SubstanceKind::CavityMode | SubstanceKind::Harmonic1D => {
            let x = model.regime_parameter(beta, length);
            Ok(model.mode_constant() / (length * length) * (bose(x) + 0.5))
        }
        SubstanceKind::SpinHalf => Ok(-(beta / (2.0 * length)).tanh() / (2.0 * length * length)),
        _ => Err(unsupported("closed-form force", model)),
    }
}

pub fn internal_energy_closed(model: &SpectrumModel, beta: f64, length: f64) -> Result<f64> {
    inputs(beta, length)?;
    match model.kind() {
        SubstanceKind::Box1D => Ok(0.5 / beta),
        SubstanceKind::CavityMode | SubstanceKind::Harmonic1D => {
            let x = model.regime_parameter(beta, length);
            Ok((bose(x) + 0.5) * model.energy_scale(length))
        }
        SubstanceKind::SpinHalf => Ok(-0.5 * (beta / (2.0 * length)).tanh() / length),
        _ => Err(unsupported("closed-form internal energy", model)),
    }
}

/// Box: `1/2 + ln(sqrt(2 m L^2 / (pi beta)) / 2)`; oscillator:
/// `<n> x + ln(<n> + 1)`; spin: `ln(2 cosh y) - y tanh y` with `y = beta/(2L)`.
pub fn entropy_closed(model: &SpectrumModel, beta: f64, length: f64) -> Result<f64> {
    inputs(beta, length)?;
    match model.kind() {
        SubstanceKind::Box1D => {
            let half_width =
                0.5 * (2.0 * model.mass() * length * length / (std::f64::consts::PI * beta)).sqrt();
            Ok(0.5 + half_width.ln())
        }
        SubstanceKind::CavityMode | SubstanceKind::Harmonic1D => {
            let x = model.regime_parameter(beta, length);
            let n = bose(x);
            Ok(n * x + n.ln_1p())
        }
        SubstanceKind::SpinHalf => {
            let y = beta / (2.0 * length);
            Ok((2.0 * y.cosh()).ln() - y * y.tanh())
        }
        _ => Err(unsupported("closed-form entropy", model)),
    }
}

/// Bose factor `1 / (e^{beta omega} - 1)` with `omega = kappa / L`.
pub fn mean_occupation(model: &SpectrumModel, beta: f64, length: f64) -> Result<f64> {
    inputs(beta, length)?;
    if model.kind() != SubstanceKind::CavityMode {
        return Err(unsupported("mean occupation", model));
    }
    Ok(bose(model.regime_parameter(beta, length)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    #[test]
    fn force_examples() {
        let f = force_equilibrium_closed(&SpectrumModel::box_1d(), 0.5, 2.0).unwrap();
        assert!((f - 1.0).abs() < 1e-15);
        let cavity = SpectrumModel::cavity(1.0).unwrap();
        let f = force_equilibrium_closed(&cavity, 3f64.ln(), 1.0).unwrap();
        assert!((f - 1.0).abs() < 1e-15);
        let f = force_equilibrium_closed(&cavity, 1e4, 2.0).unwrap();
        assert_eq!(f, 1.0 / 8.0);
        let err = force_equilibrium_closed(&SpectrumModel::new(SubstanceKind::Box2D), 1.0, 1.0);
        assert!(matches!(err, Err(Error::UnsupportedKind { .. })));
    }

    #[test]
    fn energy_and_entropy_examples() {
        let cavity = SpectrumModel::cavity(1.0).unwrap();
        let u = internal_energy_closed(&cavity, LN_2, 1.0).unwrap();
        assert!((u - 1.5).abs() < 1e-15);
        let s = entropy_closed(&cavity, LN_2, 1.0).unwrap();
        assert!((s - 2.0 * LN_2).abs() < 1e-15);
        let u = internal_energy_closed(&SpectrumModel::spin_half(), 1e4, 1.0).unwrap();
        assert_eq!(u, -0.5);
        assert!(entropy_closed(&SpectrumModel::new(SubstanceKind::Harmonic3D), 1.0, 1.0).is_err());
    }

    #[test]
    fn occupation_examples() {
        let cavity = SpectrumModel::cavity(1.0).unwrap();
        assert!((mean_occupation(&cavity, LN_2, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(mean_occupation(&cavity, 1e4, 1.0).unwrap(), 0.0);
        let x = 4.0f64;
        let n = mean_occupation(&cavity, (1.0 + 1.0 / x).ln(), 1.0).unwrap();
        assert!((n - x).abs() < 1e-13);
        assert!(mean_occupation(&SpectrumModel::box_1d(), 1.0, 1.0).is_err());
    }
}
