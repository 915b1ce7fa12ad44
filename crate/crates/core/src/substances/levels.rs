use crate::error::{Error, Result};
use crate::numerics::{
    gaussian_tail, geometric_tail, sum_with_tail_bound, CompensatedSum, NumericsPolicy, SeriesSum,
};

use super::{SpectrumModel, SubstanceKind};

/// Distinct reduced energies in increasing order with their degeneracies.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelTable {
    reduced: Vec<f64>,
    degeneracy: Vec<u64>,
}

impl LevelTable {
    pub fn new(reduced: Vec<f64>, degeneracy: Vec<u64>) -> Result<Self> {
        if reduced.len() != degeneracy.len() || reduced.is_empty() {
            return Err(Error::Ordering(format!(
                "level table needs matching non-empty columns, got {} energies and {} degeneracies",
                reduced.len(),
                degeneracy.len()
            )));
        }
        if reduced.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Ordering(
                "reduced energies must be strictly increasing".into(),
            ));
        }
        Ok(LevelTable {
            reduced,
            degeneracy,
        })
    }

    fn non_degenerate(reduced: Vec<f64>) -> Self {
        let degeneracy = vec![1; reduced.len()];
        LevelTable {
            reduced,
            degeneracy,
        }
    }

    pub fn len(&self) -> usize {
        self.reduced.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reduced.is_empty()
    }

    pub fn reduced(&self) -> &[f64] {
        &self.reduced
    }

    pub fn degeneracy(&self) -> &[u64] {
        &self.degeneracy
    }

    /// Total number of states (levels weighted by degeneracy).
    pub fn states(&self) -> u64 {
        self.degeneracy.iter().sum()
    }
}

/// Truncated Boltzmann weights at regime parameter `x = beta * s(L)`.
///
/// Weights are shifted by the ground level, `w_k = exp(-x (eps_k - eps_0))`, so
/// `ln Z = ln(weight_sum) - x * eps_0`.
#[derive(Debug, Clone)]
pub(crate) struct Truncated {
    pub table: LevelTable,
    pub weights: Vec<f64>,
    pub weight_sum: f64,
    pub relative_bound: f64,
}

/// Normalized moments of the reduced energy under the truncated distribution.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Moments {
    pub weight_sum: f64,
    pub mean: f64,
    pub variance: f64,
    pub levels: usize,
    pub relative_bound: f64,
}

#[derive(Clone, Copy)]
enum Base {
    /// `eps_n = n^2`, `n >= 1`.
    Quadratic,
    /// `eps_n = n + 1/2`, `n >= 0`.
    Linear,
}

fn base_of(kind: SubstanceKind) -> Option<Base> {
    match kind {
        SubstanceKind::Box1D | SubstanceKind::Box2D | SubstanceKind::Box3D => Some(Base::Quadratic),
        SubstanceKind::Harmonic1D
        | SubstanceKind::Harmonic2D
        | SubstanceKind::Harmonic3D
        | SubstanceKind::CavityMode => Some(Base::Linear),
        SubstanceKind::SpinHalf => None,
    }
}

/// Reduced level, its excitation above the ground level and its shifted
/// weight `e^{-x (eps_n - eps_0)}` for the `n`-th state of a 1D spectrum.
fn level(base: Base, x: f64, n: usize) -> (f64, f64, f64) {
    match base {
        Base::Quadratic => {
            let q = (n + 1) as f64;
            let excitation = (n as f64) * (q + 1.0);
            (q * q, excitation, (-x * excitation).exp())
        }
        Base::Linear => {
            let excitation = n as f64;
            (excitation + 0.5, excitation, (-x * excitation).exp())
        }
    }
}

/// Sums a 1D spectrum until the certified tail bound on the weights meets
/// `series_tol`, then keeps going until the next term of the second
/// excitation moment is negligible by the ratio test. Without the second
/// stage the variance would jump by far more than `series_tol` whenever the
/// term count changes at low temperature.
fn scan_1d<V>(base: Base, x: f64, policy: &NumericsPolicy, mut visit: V) -> Result<SeriesSum>
where
    V: FnMut(f64, f64),
{
    let mut second = CompensatedSum::default();
    let mut last_second = 0.0;
    let mut term = |n: usize| {
        let (eps, excitation, w) = level(base, x, n);
        visit(eps, w);
        last_second = w * excitation * excitation;
        second.add(last_second);
        w
    };
    let mut series = match base {
        Base::Quadratic => sum_with_tail_bound(&mut term, gaussian_tail(x, 1.0), policy)?,
        Base::Linear => sum_with_tail_bound(&mut term, geometric_tail((-x).exp()), policy)?,
    };
    let mut sum = CompensatedSum::default();
    sum.add(series.sum);
    loop {
        let previous = last_second;
        let n = series.terms;
        if n >= policy.level_cap {
            return Err(Error::LevelCapExceeded {
                cap: policy.level_cap,
                bound: series.relative_bound,
            });
        }
        let (eps, excitation, w) = level(base, x, n);
        let next = w * excitation * excitation;
        let ratio = if previous > 0.0 { next / previous } else { 0.0 };
        if ratio < 1.0 && next <= policy.series_tol * (1.0 - ratio) * second.value() {
            break;
        }
        visit(eps, w);
        sum.add(w);
        second.add(next);
        last_second = next;
        series.terms += 1;
    }
    series.sum = sum.value();
    Ok(series)
}

fn check_regime(x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "beta * s(L)",
            requirement: "finite and strictly positive",
            value: x,
        })
    }
}

pub(crate) fn truncate(
    model: &SpectrumModel,
    x: f64,
    policy: &NumericsPolicy,
) -> Result<Truncated> {
    check_regime(x)?;
    let kind = model.kind();
    let Some(base) = base_of(kind) else {
        let weights = vec![1.0, (-x).exp()];
        return Ok(Truncated {
            table: LevelTable::non_degenerate(vec![-0.5, 0.5]),
            weight_sum: weights[0] + weights[1],
            weights,
            relative_bound: 0.0,
        });
    };

    let d = kind.dimension();
    if d == 1 {
        let mut reduced = Vec::new();
        let mut weights = Vec::new();
        let series = scan_1d(base, x, policy, |eps, w| {
            reduced.push(eps);
            weights.push(w);
        })?;
        return Ok(Truncated {
            table: LevelTable::non_degenerate(reduced),
            weights,
            weight_sum: series.sum,
            relative_bound: series.relative_bound,
        });
    }

    // Separable product: truncating each factor at N and keeping every state with
    // key <= d * (largest 1D key) contains the cube, so the omitted weight is at
    // most d * tau * (1 + tau)^(d-1) of the truncated sum.
    let per_axis = NumericsPolicy {
        series_tol: policy.series_tol / (2.0 * d as f64),
        ..*policy
    };
    let axis = scan_1d(base, x, &per_axis, |_, _| {})?;
    let tau = axis.relative_bound;
    let relative_bound = d as f64 * tau * (1.0 + tau).powi(d as i32 - 1);

    let (keys, degeneracy) = match base {
        Base::Quadratic => {
            let n = axis.terms as u64;
            let kmax = d as u64 * n * n;
            box_degeneracies(d, kmax, policy.level_cap)?
        }
        Base::Linear => {
            let kmax = d as u64 * (axis.terms as u64 - 1);
            if kmax as usize >= policy.level_cap {
                return Err(Error::LevelCapExceeded {
                    cap: policy.level_cap,
                    bound: relative_bound,
                });
            }
            let keys: Vec<u64> = (0..=kmax).collect();
            let degeneracy = keys.iter().map(|&k| oscillator_degeneracy(d, k)).collect();
            (keys, degeneracy)
        }
    };
    let offset = match base {
        Base::Quadratic => 0.0,
        Base::Linear => 0.5 * d as f64,
    };
    let reduced: Vec<f64> = keys.iter().map(|&k| k as f64 + offset).collect();
    let ground = reduced[0];
    let weights: Vec<f64> = reduced.iter().map(|&e| (-x * (e - ground)).exp()).collect();
    let mut sum = CompensatedSum::default();
    for (w, g) in weights.iter().zip(&degeneracy) {
        sum.add(w * *g as f64);
    }
    Ok(Truncated {
        table: LevelTable {
            reduced,
            degeneracy,
        },
        weights,
        weight_sum: sum.value(),
        relative_bound,
    })
}

/// Moments of the reduced energy without materializing the level table (1D and
/// spin kinds); multi-dimensional kinds go through [`truncate`].
pub(crate) fn scan_moments(
    model: &SpectrumModel,
    x: f64,
    policy: &NumericsPolicy,
) -> Result<Moments> {
    check_regime(x)?;
    let kind = model.kind();
    match base_of(kind) {
        Some(base) if kind.dimension() == 1 => {
            // moments of eps - eps_0 keep the variance accurate at low temperature
            let ground = model.ground_reduced();
            let mut first = CompensatedSum::default();
            let mut second = CompensatedSum::default();
            let series = scan_1d(base, x, policy, |eps, w| {
                let excitation = eps - ground;
                first.add(w * excitation);
                second.add(w * excitation * excitation);
            })?;
            let mean_excitation = first.value() / series.sum;
            let variance =
                (second.value() / series.sum - mean_excitation * mean_excitation).max(0.0);
            Ok(Moments {
                weight_sum: series.sum,
                mean: ground + mean_excitation,
                variance,
                levels: series.terms,
                relative_bound: series.relative_bound,
            })
        }
        _ => {
            let t = truncate(model, x, policy)?;
            let mut first = CompensatedSum::default();
            let mut second = CompensatedSum::default();
            for ((eps, g), w) in t
                .table
                .reduced
                .iter()
                .zip(&t.table.degeneracy)
                .zip(&t.weights)
            {
                let gw = *g as f64 * w;
                first.add(gw * eps);
                second.add(gw * eps * eps);
            }
            let mean = first.value() / t.weight_sum;
            let centered: f64 = t
                .table
                .reduced
                .iter()
                .zip(&t.table.degeneracy)
                .zip(&t.weights)
                .map(|((eps, g), w)| *g as f64 * w * (eps - mean) * (eps - mean))
                .sum();
            Ok(Moments {
                weight_sum: t.weight_sum,
                mean,
                variance: centered / t.weight_sum,
                levels: t.table.len(),
                relative_bound: t.relative_bound,
            })
        }
    }
}

fn oscillator_degeneracy(d: u32, k: u64) -> u64 {
    match d {
        1 => 1,
        2 => k + 1,
        3 => (k + 1) * (k + 2) / 2,
        _ => unreachable!("oscillators have dimension 1 to 3"),
    }
}

/// Number of ways to write each `k <= kmax` as a sum of `d` squares of positive
/// integers; returns the keys with non-zero count.
fn box_degeneracies(d: u32, kmax: u64, cap: usize) -> Result<(Vec<u64>, Vec<u64>)> {
    let mut counts = vec![0u64; kmax as usize + 1];
    let mut visited = 0usize;
    let mut bump = |k: u64, visited: &mut usize| -> Result<()> {
        counts[k as usize] += 1;
        *visited += 1;
        if *visited > cap {
            Err(Error::LevelCapExceeded {
                cap,
                bound: f64::INFINITY,
            })
        } else {
            Ok(())
        }
    };
    match d {
        2 => {
            let mut a = 1u64;
            while a * a < kmax {
                let mut b = 1u64;
                while a * a + b * b <= kmax {
                    bump(a * a + b * b, &mut visited)?;
                    b += 1;
                }
                a += 1;
            }
        }
        3 => {
            let mut a = 1u64;
            while a * a + 2 <= kmax {
                let mut b = 1u64;
                while a * a + b * b < kmax {
                    let mut c = 1u64;
                    while a * a + b * b + c * c <= kmax {
                        bump(a * a + b * b + c * c, &mut visited)?;
                        c += 1;
                    }
                    b += 1;
                }
                a += 1;
            }
        }
        _ => unreachable!("boxes of dimension 2 or 3 only"),
    }
    let mut keys = Vec::new();
    let mut degeneracy = Vec::new();
    for (k, &g) in counts.iter().enumerate() {
        if g > 0 {
            keys.push(k as u64);
            degeneracy.push(g);
        }
    }
    Ok((keys, degeneracy))
}

/// Reduced energy of the `n`-th state (0-based, degenerate states counted
/// separately) of a multi-dimensional box or oscillator.
pub(crate) fn flat_state_energy(kind: SubstanceKind, n: usize) -> f64 {
    let d = kind.dimension();
    if kind.is_box() {
        let mut kmax = 16u64;
        loop {
            let (keys, degeneracy) =
                box_degeneracies(d, kmax, usize::MAX).expect("uncapped enumeration");
            let mut seen = 0u64;
            // every key <= kmax is complete
            for (k, g) in keys.iter().zip(&degeneracy) {
                seen += g;
                if seen > n as u64 {
                    return *k as f64;
                }
            }
            kmax *= 2;
        }
    } else {
        let mut seen = 0u64;
        let mut k = 0u64;
        loop {
            seen += oscillator_degeneracy(d, k);
            if seen > n as u64 {
                return k as f64 + 0.5 * d as f64;
            }
            k += 1;
        }
    }
}
