//! The half-Laplacian on the unit circle: Dirichlet-to-Neumann map of the
//! disk, its principal-value form, and the matching energies.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::energy::seminorm_sq_fourier;
use crate::error::{Error, Result};
use crate::operator::{PvEvaluation, PvOptions, SymbolTable};
use crate::periodic::{PeriodicFunction, PeriodicGrid};
use crate::quad::{integrate, QuadOptions};

/// A function on `S¹` sampled at `θ_j = −π + 2πj/N`.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleFunction(PeriodicFunction);

impl CircleFunction {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        let grid = PeriodicGrid::new(PI, samples.len())?;
        Ok(Self(PeriodicFunction::new(grid, samples)?))
    }

    pub fn from_fn<F: Fn(f64) -> f64>(n: usize, f: F) -> Result<Self> {
        Ok(Self(PeriodicFunction::from_fn(PeriodicGrid::new(PI, n)?, f)))
    }

    /// Views a function of period `2π` as a circle function.
    pub fn from_periodic(u: PeriodicFunction) -> Result<Self> {
        if u.grid().half_period() != PI {
            return Err(Error::InvalidParameter(format!(
                "circle functions need L = π, got {}",
                u.grid().half_period()
            )));
        }
        Ok(Self(u))
    }

    pub fn as_periodic(&self) -> &PeriodicFunction {
        &self.0
    }

    pub fn samples(&self) -> &[f64] {
        self.0.samples()
    }

    pub fn len(&self) -> usize {
        self.0.samples().len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.samples().is_empty()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        self.0.coeffs()
    }

    pub fn eval(&self, theta: f64) -> f64 {
        self.0.eval(theta)
    }
}

/// `Σ_k |k| u_k e^{ikθ}`.
pub fn dtn_multiplier(u: &CircleFunction) -> CircleFunction {
    CircleFunction(u.0.map_coeffs(|k, c| c * k as f64))
}

/// Neville extrapolation of `(x_i, y_i)` to `x = 0`.
fn neville_at_zero(xs: &[f64], ys: &[f64]) -> f64 {
    let mut p = ys.to_vec();
    let n = xs.len();
    for m in 1..n {
        for i in 0..n - m {
            p[i] = (xs[i + m] * p[i] - xs[i] * p[i + 1]) / (xs[i + m] - xs[i]);
        }
    }
    p[0]
}

/// Radii `1 − δ` used by [`dtn_poisson`] unless overridden.
pub const DEFAULT_DELTAS: [f64; 3] = [1e-2, 5e-3, 2.5e-3];

/// Radial derivative of the harmonic extension at the boundary, from
/// `(u(θ) − u_D((1 − δ)e^{iθ}))/δ` extrapolated to `δ = 0`.
///
/// The Poisson integral is a trapezoid sum on a refined grid of `M` nodes,
/// with `M` large enough that `(1 − δ)^M` is below round-off; `u` is
/// carried there by its trigonometric interpolant.
pub fn dtn_poisson(u: &CircleFunction, deltas: &[f64]) -> Result<CircleFunction> {
    if deltas.is_empty() {
        return Err(Error::InvalidParameter("empty delta sequence".into()));
    }
    if deltas.iter().any(|&d| !(d > 0.0 && d < 0.5)) || deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter(
            "deltas must be strictly decreasing in (0, 0.5)".into(),
        ));
    }
    let n = u.len();
    let smallest = *deltas.last().expect("nonempty");
    let needed = (40.0 / smallest).ceil() as usize;
    if needed > 1 << 22 {
        return Err(Error::StepSize(format!(
            "delta = {smallest:e} needs more than 2^22 quadrature nodes"
        )));
    }
    let m = needed.next_power_of_two().max(n);
    let fine_grid = PeriodicGrid::new(PI, m)?;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); m / 2 + 1];
    let src = u.coeffs();
    let nyq = n / 2;
    for (k, c) in src.iter().enumerate() {
        // The coarse Nyquist mode is the cosine part only; on the fine grid
        // it becomes an ordinary mode holding half of it on each side.
        coeffs[k] = if k == nyq { Complex64::new(0.5 * c.re, 0.0) } else { *c };
    }
    let fine = PeriodicFunction::from_coeffs(fine_grid, &coeffs)?;
    let fs = fine.samples();
    let stride = m / n;
    let h = 2.0 * PI / m as f64;

    let mut per_delta = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let rho = 1.0 - delta;
        let kernel: Vec<f64> = (0..m)
            .map(|j| {
                // 1 − 2ρ cos t + ρ² written without cancellation near t = 0.
                let half = (0.5 * h * j as f64).sin();
                delta * (2.0 - delta) / (2.0 * PI * (delta * delta + 4.0 * rho * half * half))
            })
            .collect();
        let quotient: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|i| {
                let target = i * stride;
                let ext: f64 = (0..m).map(|j| kernel[(target + m - j) % m] * fs[j]).sum::<f64>() * h;
                (u.samples()[i] - ext) / delta
            })
            .collect();
        per_delta.push(quotient);
    }
    let values = (0..n)
        .map(|i| {
            let ys: Vec<f64> = per_delta.iter().map(|q| q[i]).collect();
            neville_at_zero(deltas, &ys)
        })
        .collect();
    Ok(CircleFunction(PeriodicFunction::new(*u.0.grid(), values)?))
}

/// `(1/π) P.V. ∫_{S¹} (u(p) − u(q)) / |p − q|² dq` at `p = e^{ix}`.
///
/// Folding `±t` gives `(1/π) ∫_0^π (2u(x) − u(x+t) − u(x−t)) / (2 − 2cos t) dt`;
/// the window `(0, ε)` is replaced by its leading term `−u''(x) ε`.
pub fn half_lap_pv_circle(u: &CircleFunction, x: f64, opts: &PvOptions) -> Result<PvEvaluation> {
    if opts.eps_seq.is_empty() || opts.eps_seq.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter(
            "exclusion radii must be nonempty and strictly decreasing".into(),
        ));
    }
    let ux = u.eval(x);
    let d2 = u.0.second_derivative().eval(x);
    let integrand = |t: f64| (2.0 * ux - u.eval(x + t) - u.eval(x - t)) / (2.0 - 2.0 * t.cos());
    let q = QuadOptions::with_rel_tol(opts.tol).with_abs_tol(1e-14);
    let mut eps_values = Vec::with_capacity(opts.eps_seq.len());
    for &eps in &opts.eps_seq {
        let outer = integrate(integrand, eps, PI, &q)?;
        eps_values.push((outer.value - d2 * eps) / PI);
    }
    let value = *eps_values.last().expect("nonempty");
    let stable = eps_values
        .windows(2)
        .all(|w| (w[1] - w[0]).abs() < 1e-6 * value.abs().max(1.0));
    if !stable {
        return Err(Error::Integration(format!(
            "principal value not stable across exclusion radii: {eps_values:?}"
        )));
    }
    Ok(PvEvaluation {
        value,
        eps_values,
        stable,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct WrappedIdentity {
    pub t: f64,
    /// `Σ_k |t + 2kπ|^{−2}`: `|k| ≤ k_max` summed, the rest in closed form.
    pub lhs: f64,
    /// `1/(2 − 2cos t)`.
    pub rhs: f64,
    pub gap: f64,
    pub k_max: usize,
    /// Size of the closed-form tail added to the truncated sum.
    pub tail: f64,
}

/// `ψ'(z)` for `z ≥ 10` by its asymptotic series.
fn trigamma_large(z: f64) -> f64 {
    let z2 = z * z;
    1.0 / z + 1.0 / (2.0 * z2) + 1.0 / (6.0 * z2 * z) - 1.0 / (30.0 * z2 * z2 * z)
        + 1.0 / (42.0 * z2 * z2 * z2 * z)
        - 1.0 / (30.0 * z2 * z2 * z2 * z2 * z)
}

/// Compares the periodized inverse-square kernel with the chord form.
pub fn wrapped_identity_check(t: f64, k_max: usize) -> Result<WrappedIdentity> {
    let reduced = t.rem_euclid(2.0 * PI);
    if !t.is_finite() || reduced == 0.0 || reduced == 2.0 * PI {
        return Err(Error::Domain(format!("t = {t} is a multiple of 2π")));
    }
    if k_max < 10 {
        return Err(Error::InvalidParameter("k_max must be at least 10".into()));
    }
    let a = reduced / (2.0 * PI);
    let mut sum = 0.0;
    for k in (1..=k_max).rev() {
        let k = k as f64;
        sum += 1.0 / (reduced + 2.0 * PI * k).powi(2) + 1.0 / (reduced - 2.0 * PI * k).powi(2);
    }
    sum += 1.0 / (reduced * reduced);
    // Σ_{k>K} 1/(k ± a)² = ψ'(K + 1 ± a).
    let kk = k_max as f64 + 1.0;
    let tail = (trigamma_large(kk + a) + trigamma_large(kk - a)) / (4.0 * PI * PI);
    let lhs = sum + tail;
    let rhs = 1.0 / (2.0 - 2.0 * reduced.cos());
    Ok(WrappedIdentity {
        t,
        lhs,
        rhs,
        gap: (lhs - rhs).abs(),
        k_max,
        tail,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EnergyIdentity {
    /// `½ [u]²` with the multiplier `|k|`.
    pub e_line: f64,
    /// `½ ∫_D |∇u_D|² = π Σ_k |k| |u_k|²`.
    pub e_disk: f64,
    /// `(1/4π) ∬ |u(x) − u(y)|² / |e^{ix} − e^{iy}|²` by the trapezoid rule.
    pub e_circle: f64,
}

/// Three evaluations of the half-Laplacian energy on `S¹`.
///
/// For band-limited `u` the circle integrand is itself a trigonometric
/// polynomial (its diagonal value is `u'(x)²`), so the double trapezoid sum
/// is exact once `N` exceeds twice the band limit.
pub fn energy_identity_check(u: &CircleFunction) -> Result<EnergyIdentity> {
    let grid = *u.0.grid();
    let sym = SymbolTable::fractional(grid, 0.5);
    let e_line = 0.5 * seminorm_sq_fourier(&sym, &u.0)?;
    let c = u.coeffs();
    let nyq = grid.nyquist();
    let e_disk = PI
        * c.iter()
            .enumerate()
            .skip(1)
            .map(|(k, ck)| {
                let w = if k == nyq { 1.0 } else { 2.0 };
                w * k as f64 * ck.norm_sqr()
            })
            .sum::<f64>();
    let n = grid.len();
    let h = grid.spacing();
    let v = u.samples();
    let du = u.0.derivative();
    let dv = du.samples();
    let total: f64 = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row = dv[i] * dv[i];
            for m in 1..n {
                let d = v[i] - v[(i + m) % n];
                row += d * d / (2.0 - 2.0 * (h * m as f64).cos());
            }
            row
        })
        .sum();
    let e_circle = total * h * h / (4.0 * PI);
    Ok(EnergyIdentity {
        e_line,
        e_disk,
        e_circle,
    })
}
