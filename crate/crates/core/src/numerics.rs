//! Numerical kernels shared by the thermodynamics code: certified series
//! truncation, bracketed root finding, adaptive quadrature and centered
//! finite differences.
//!
//! Every kernel takes its tolerances from an explicit [`NumericsPolicy`]; there is
//! no global configuration. All routines are deterministic: identical inputs and
//! policy give bit-identical outputs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerances and caps threaded through every numerical routine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NumericsPolicy {
    /// Relative bound on the omitted tail of a truncated series.
    pub series_tol: f64,
    /// Maximum number of terms (energy levels) a series may use.
    pub level_cap: usize,
    /// Relative tolerance of adaptive quadrature.
    pub quad_tol: f64,
    /// Maximum bisection depth of adaptive quadrature.
    pub quad_max_depth: usize,
    /// Relative tolerance on the root location.
    pub root_tol: f64,
    pub root_max_iter: usize,
    /// Relative finite-difference step.
    pub fd_step_rel: f64,
}

impl Default for NumericsPolicy {
    fn default() -> Self {
        NumericsPolicy {
            series_tol: 1e-12,
            level_cap: 10_000_000,
            quad_tol: 1e-10,
            quad_max_depth: 40,
            root_tol: 1e-12,
            root_max_iter: 200,
            fd_step_rel: 1e-6,
        }
    }
}

impl NumericsPolicy {
    /// Checks that every tolerance lies in (0, 1) and every cap is positive.
    pub fn validate(&self) -> Result<()> {
        let tolerances = [
            ("series_tol", self.series_tol),
            ("quad_tol", self.quad_tol),
            ("root_tol", self.root_tol),
            ("fd_step_rel", self.fd_step_rel),
        ];
        for (name, value) in tolerances {
            if !(value > 0.0 && value < 1.0) {
                return Err(Error::InvalidParameter {
                    name,
                    requirement: "inside the open interval (0, 1)",
                    value,
                });
            }
        }
        let caps = [
            ("level_cap", self.level_cap),
            ("quad_max_depth", self.quad_max_depth),
            ("root_max_iter", self.root_max_iter),
        ];
        for (name, value) in caps {
            if value == 0 {
                return Err(Error::InvalidParameter {
                    name,
                    requirement: "a positive count",
                    value: 0.0,
                });
            }
        }
        Ok(())
    }

    pub fn with_series_tol(mut self, tol: f64) -> Self {
        self.series_tol = tol;
        self
    }

    pub fn with_quad_tol(mut self, tol: f64) -> Self {
        self.quad_tol = tol;
        self
    }
}

/// Result of a truncated series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSum {
    pub sum: f64,
    /// Number of terms included (indices `0..terms`).
    pub terms: usize,
    /// Certified bound on the omitted tail, relative to `sum`.
    pub relative_bound: f64,
}

/// Sums `term(0) + term(1) + ...` until the tail bound drops below
/// `series_tol * partial_sum`.
///
/// `tail(n, term_n)` must return an upper bound on `sum_{k > n} term(k)`; the
/// terms must be non-negative. Summation is compensated (Neumaier).
pub fn sum_with_tail_bound<T, B>(
    mut term: T,
    mut tail: B,
    policy: &NumericsPolicy,
) -> Result<SeriesSum>
where
    T: FnMut(usize) -> f64,
    B: FnMut(usize, f64) -> f64,
{
    let mut acc = CompensatedSum::default();
    let mut n = 0usize;
    loop {
        let t = term(n);
        if !t.is_finite() || t < 0.0 {
            return Err(Error::NonFinite {
                at: n as f64,
                value: t,
            });
        }
        acc.add(t);
        let partial = acc.value();
        let bound = tail(n, t);
        if bound <= policy.series_tol * partial {
            let relative_bound = if partial > 0.0 { bound / partial } else { 0.0 };
            return Ok(SeriesSum {
                sum: partial,
                terms: n + 1,
                relative_bound,
            });
        }
        n += 1;
        if n >= policy.level_cap {
            return Err(Error::LevelCapExceeded {
                cap: policy.level_cap,
                bound: if partial > 0.0 {
                    bound / partial
                } else {
                    f64::INFINITY
                },
            });
        }
    }
}

/// Tail bound for terms with a fixed ratio `r < 1`: `term_n * r / (1 - r)`.
pub fn geometric_tail(ratio: f64) -> impl Fn(usize, f64) -> f64 {
    move |_, t| {
        if ratio >= 1.0 {
            f64::INFINITY
        } else {
            t * ratio / (1.0 - ratio)
        }
    }
}

/// Tail bound for terms `c * exp(-a * (n + offset)^2)`, compared against the
/// Gaussian integral: `sum_{k > N} exp(-a k^2) <= exp(-a N^2) / (2 a N)`.
pub fn gaussian_tail(a: f64, offset: f64) -> impl Fn(usize, f64) -> f64 {
    move |n, t| {
        let index = n as f64 + offset;
        if index <= 0.0 {
            f64::INFINITY
        } else {
            t / (2.0 * a * index)
        }
    }
}

#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Brent's method (inverse quadratic interpolation, secant and bisection) on a
/// bracket with `f(lo) * f(hi) <= 0`.
pub fn find_root_bracketed<F>(mut f: F, lo: f64, hi: f64, policy: &NumericsPolicy) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut a = lo;
    let mut b = hi;
    let mut fa = finite(a, f(a)?)?;
    let mut fb = finite(b, f(b)?)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoSignChange {
            lo,
            hi,
            f_lo: fa,
            f_hi: fb,
        });
    }

    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..policy.root_max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * policy.root_tol * b.abs() + 1e-300;
        let half = 0.5 * (c - b);
        if half.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * half * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * half * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let bound_interp = 3.0 * half * q - (tol * q).abs();
            let bound_step = (e * q).abs();
            if 2.0 * p < bound_interp.min(bound_step) {
                e = d;
                d = p / q;
            } else {
                d = half;
                e = d;
            }
        } else {
            d = half;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(half) };
        fb = finite(b, f(b)?)?;
    }
    Err(Error::RootIterations {
        iterations: policy.root_max_iter,
    })
}

/// Adaptive Simpson quadrature with the interval-halving (Richardson) error
/// estimate, refined until the estimate is below `quad_tol` relative to the
/// magnitude of the integral.
pub fn integrate_adaptive<F>(mut f: F, a: f64, b: f64, policy: &NumericsPolicy) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if a == b {
        return Ok(0.0);
    }
    let fa = finite(a, f(a)?)?;
    let fb = finite(b, f(b)?)?;
    integrate_adaptive_from_ends(f, a, b, fa, fb, policy)
}

/// Same as [`integrate_adaptive`] with the endpoint values already known.
pub fn integrate_adaptive_from_ends<F>(
    mut f: F,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    policy: &NumericsPolicy,
) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return integrate_adaptive_from_ends(f, b, a, fb, fa, policy).map(|v| -v);
    }
    let m = 0.5 * (a + b);
    let fm = finite(m, f(m)?)?;
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = finite(lm, f(lm)?)?;
    let frm = finite(rm, f(rm)?)?;

    let h = b - a;
    let whole = h / 6.0 * (fa + 4.0 * fm + fb);
    let left = h / 12.0 * (fa + 4.0 * flm + fm);
    let right = h / 12.0 * (fm + 4.0 * frm + fb);
    let magnitude = (h / 12.0
        * (fa.abs() + 4.0 * flm.abs() + 2.0 * fm.abs() + 4.0 * frm.abs() + fb.abs()))
    .abs();
    let scale = (left + right).abs().max(magnitude).max(f64::MIN_POSITIVE);
    let eps = policy.quad_tol * scale;

    let delta = left + right - whole;
    if delta.abs() <= 15.0 * eps {
        return Ok(left + right + delta / 15.0);
    }
    let depth = policy.quad_max_depth;
    let with_limit = |e: Error| match e {
        Error::QuadratureDepth { a, b, .. } => Error::QuadratureDepth { depth, a, b },
        other => other,
    };
    let l = simpson_step(&mut f, a, m, fa, flm, fm, left, 0.5 * eps, depth).map_err(with_limit)?;
    let r = simpson_step(&mut f, m, b, fm, frm, fb, right, 0.5 * eps, depth).map_err(with_limit)?;
    Ok(l + r)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F>(
    f: &mut F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: usize,
) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = finite(lm, f(lm)?)?;
    let frm = finite(rm, f(rm)?)?;
    let h = b - a;
    let left = h / 12.0 * (fa + 4.0 * flm + fm);
    let right = h / 12.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * eps {
        return Ok(left + right + delta / 15.0);
    }
    if depth <= 1 || m <= a || m >= b {
        return Err(Error::QuadratureDepth { depth, a, b });
    }
    let l = simpson_step(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1)?;
    let r = simpson_step(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1)?;
    Ok(l + r)
}

/// Centered difference with step `fd_step_rel * max(|x|, 1)`.
pub fn derivative_centered<F>(f: F, x: f64, policy: &NumericsPolicy) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    derivative_with_step(f, x, policy.fd_step_rel * x.abs().max(1.0))
}

/// Centered difference with an explicit step. The step is adjusted so that
/// `x + h` and `x - h` are exactly representable offsets.
pub fn derivative_with_step<F>(mut f: F, x: f64, h: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let up = x + h;
    let down = x - h;
    let span = up - down;
    if !(span > 0.0) || !span.is_finite() {
        return Err(Error::StepUnderflow { at: x });
    }
    let f_up = finite(up, f(up)?)?;
    let f_down = finite(down, f(down)?)?;
    Ok((f_up - f_down) / span)
}

fn finite(at: f64, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { at, value })
    }
}
