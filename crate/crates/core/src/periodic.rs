//! Periodic functions sampled on a uniform grid, with a Fourier view.
//!
//! A function of period `2L` is stored by its values at
//! `x_j = −L + 2Lj/N`. Its coefficients follow
//! `u_k = (1/2L) ∫_{−L}^{L} u(x) e^{−iπkx/L} dx`, approximated by the
//! trapezoid rule, so that `u(x) = Σ_k u_k e^{iπkx/L}`.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::ops::RangeInclusive;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid on one period `[-L, L)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodicGrid {
    half_period: f64,
    n: usize,
}

impl PeriodicGrid {
    /// `n` must be a power of two, at least 8.
    pub fn new(half_period: f64, n: usize) -> Result<Self> {
        if !(half_period > 0.0 && half_period.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "half period must be positive and finite, got {half_period}"
            )));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "sample count must be a power of two >= 8, got {n}"
            )));
        }
        Ok(Self { half_period, n })
    }

    pub fn half_period(&self) -> f64 {
        self.half_period
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_period / self.n as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        -self.half_period + self.spacing() * j as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }

    /// Index of the node at `x = 0`.
    pub fn origin_index(&self) -> usize {
        self.n / 2
    }

    /// Largest resolved wavenumber index, `N/2`.
    pub fn nyquist(&self) -> usize {
        self.n / 2
    }

    /// Angular frequency `πk/L` of mode `k`.
    pub fn frequency(&self, k: usize) -> f64 {
        PI * k as f64 / self.half_period
    }

    fn same_as(&self, other: &PeriodicGrid) -> bool {
        self.n == other.n
            && (self.half_period - other.half_period).abs() <= 1e-12 * self.half_period
    }

    pub fn check_same(&self, other: &PeriodicGrid) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if forward {
            p.plan_fft_forward(n)
        } else {
            p.plan_fft_inverse(n)
        }
    })
}

fn sign(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Coefficients `u_k`, `0 ≤ k ≤ N/2`, of real samples on the standard grid.
pub(crate) fn forward_coeffs(samples: &[f64]) -> Vec<Complex64> {
    let n = samples.len();
    let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    plan(n, true).process(&mut buf);
    let scale = 1.0 / n as f64;
    let mut out: Vec<Complex64> = (0..=n / 2).map(|k| buf[k] * (sign(k) * scale)).collect();
    out[0].im = 0.0;
    out[n / 2].im = 0.0;
    out
}

/// Samples of the real trigonometric interpolant with coefficients
/// `u_k`, `0 ≤ k ≤ N/2`.
pub(crate) fn inverse_coeffs(coeffs: &[Complex64], n: usize) -> Vec<f64> {
    let half = n / 2;
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    buf[0] = Complex64::new(coeffs[0].re, 0.0);
    for k in 1..half {
        let c = coeffs[k] * sign(k);
        buf[k] = c;
        buf[n - k] = c.conj();
    }
    buf[half] = Complex64::new(coeffs[half].re * sign(half), 0.0);
    plan(n, false).process(&mut buf);
    buf.into_iter().map(|c| c.re).collect()
}

/// A real `2L`-periodic function on a [`PeriodicGrid`].
#[derive(Debug, Clone)]
pub struct PeriodicFunction {
    grid: PeriodicGrid,
    samples: Vec<f64>,
    coeffs: OnceLock<Vec<Complex64>>,
}

impl PartialEq for PeriodicFunction {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.samples == other.samples
    }
}

impl PeriodicFunction {
    pub fn new(grid: PeriodicGrid, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} samples, got {}",
                grid.len(),
                samples.len()
            )));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("samples must be finite".into()));
        }
        Ok(Self {
            grid,
            samples,
            coeffs: OnceLock::new(),
        })
    }

    pub fn from_fn<F: Fn(f64) -> f64>(grid: PeriodicGrid, f: F) -> Self {
        let samples = grid.nodes().into_iter().map(f).collect();
        Self {
            grid,
            samples,
            coeffs: OnceLock::new(),
        }
    }

    pub fn constant(grid: PeriodicGrid, value: f64) -> Self {
        Self::from_fn(grid, |_| value)
    }

    /// Builds a function from `u_k`, `0 ≤ k ≤ N/2`. The imaginary parts of
    /// `u_0` and of the Nyquist coefficient are discarded.
    pub fn from_coeffs(grid: PeriodicGrid, coeffs: &[Complex64]) -> Result<Self> {
        if coeffs.len() != grid.nyquist() + 1 {
            return Err(Error::InvalidParameter(format!(
                "expected {} coefficients, got {}",
                grid.nyquist() + 1,
                coeffs.len()
            )));
        }
        let mut stored = coeffs.to_vec();
        stored[0].im = 0.0;
        stored[grid.nyquist()].im = 0.0;
        let samples = inverse_coeffs(&stored, grid.len());
        let cell = OnceLock::new();
        let _ = cell.set(stored);
        Ok(Self {
            grid,
            samples,
            coeffs: cell,
        })
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    /// Coefficients `u_k` for `0 ≤ k ≤ N/2`; `u_{−k}` is the conjugate.
    pub fn coeffs(&self) -> &[Complex64] {
        self.coeffs.get_or_init(|| forward_coeffs(&self.samples))
    }

    /// Coefficient for any integer `k`, zero beyond the Nyquist index.
    pub fn coeff(&self, k: i64) -> Complex64 {
        let c = self.coeffs();
        let idx = k.unsigned_abs() as usize;
        if idx >= c.len() {
            return Complex64::new(0.0, 0.0);
        }
        if k < 0 {
            c[idx].conj()
        } else {
            c[idx]
        }
    }

    /// Applies a real multiplier `m(k)`, `0 ≤ k ≤ N/2`, to the coefficients.
    pub fn map_coeffs<F: Fn(usize, Complex64) -> Complex64>(&self, f: F) -> Self {
        let c: Vec<Complex64> = self
            .coeffs()
            .iter()
            .enumerate()
            .map(|(k, &v)| f(k, v))
            .collect();
        Self::from_coeffs(self.grid, &c).expect("coefficient count preserved")
    }

    /// Pointwise map of the samples.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        Self {
            grid: self.grid,
            samples: self.samples.iter().map(|&v| f(v)).collect(),
            coeffs: OnceLock::new(),
        }
    }

    pub fn zip_with<F: Fn(f64, f64) -> f64>(&self, other: &Self, f: F) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Ok(Self {
            grid: self.grid,
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            coeffs: OnceLock::new(),
        })
    }

    pub fn scale(&self, factor: f64) -> Self {
        self.map(|v| v * factor)
    }

    /// Value of the trigonometric interpolant at any `x`.
    pub fn eval(&self, x: f64) -> f64 {
        let c = self.coeffs();
        let half = self.grid.nyquist();
        let theta = PI * x / self.grid.half_period;
        let step = Complex64::from_polar(1.0, theta);
        let mut phase = step;
        let mut sum = c[0].re;
        for ck in c.iter().take(half).skip(1) {
            sum += 2.0 * (ck * phase).re;
            phase *= step;
        }
        sum + c[half].re * (half as f64 * theta).cos()
    }

    /// Interpolant values `b_k(x)` of each real mode at `x`, so that
    /// `u(x) = Σ_k b_k(x)` and mode `k` oscillates with frequency `πk/L`.
    pub(crate) fn mode_values(&self, x: f64) -> Vec<f64> {
        let c = self.coeffs();
        let half = self.grid.nyquist();
        let theta = PI * x / self.grid.half_period;
        let mut out = Vec::with_capacity(half + 1);
        out.push(c[0].re);
        for (k, ck) in c.iter().enumerate().take(half).skip(1) {
            out.push(2.0 * (ck * Complex64::from_polar(1.0, theta * k as f64)).re);
        }
        out.push(c[half].re * (half as f64 * theta).cos());
        out
    }

    /// `x ↦ u(x + z)`. Shifts by whole grid steps rotate the samples;
    /// other shifts multiply `u_k` by `e^{iπkz/L}`.
    pub fn shift(&self, z: f64) -> Self {
        let h = self.grid.spacing();
        let steps = z / h;
        let rounded = steps.round();
        if (steps - rounded).abs() <= 1e-12 * rounded.abs().max(1.0) {
            let n = self.grid.len() as i64;
            let m = (rounded as i64).rem_euclid(n) as usize;
            let mut samples = self.samples.clone();
            samples.rotate_left(m);
            return Self {
                grid: self.grid,
                samples,
                coeffs: OnceLock::new(),
            };
        }
        let l = self.grid.half_period;
        let half = self.grid.nyquist();
        self.map_coeffs(|k, c| {
            let angle = PI * k as f64 * z / l;
            if k == half {
                Complex64::new(c.re * angle.cos(), 0.0)
            } else {
                c * Complex64::from_polar(1.0, angle)
            }
        })
    }

    /// Spectral derivative; the Nyquist mode is dropped.
    pub fn derivative(&self) -> Self {
        let half = self.grid.nyquist();
        let l = self.grid.half_period;
        self.map_coeffs(|k, c| {
            if k == half {
                Complex64::new(0.0, 0.0)
            } else {
                c * Complex64::new(0.0, PI * k as f64 / l)
            }
        })
    }

    /// Spectral second derivative (keeps the Nyquist mode).
    pub fn second_derivative(&self) -> Self {
        let l = self.grid.half_period;
        self.map_coeffs(|k, c| {
            let w = PI * k as f64 / l;
            c * (-w * w)
        })
    }

    /// Trapezoid integral over one period.
    pub fn integral(&self) -> f64 {
        self.grid.spacing() * self.samples.iter().sum::<f64>()
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    /// Trapezoid `∫ u v` over one period.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.grid.check_same(&other.grid)?;
        Ok(self.grid.spacing()
            * self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(a, b)| a * b)
                .sum::<f64>())
    }

    pub fn l2_norm(&self) -> f64 {
        (self.grid.spacing() * self.samples.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// True when all samples agree exactly.
    pub fn is_constant(&self) -> bool {
        self.samples.iter().all(|&v| v == self.samples[0])
    }

    /// Least-squares slope `r̂` of `log|u_k| ≈ c − r̂ log k` over `k_range`.
    ///
    /// Coefficients at or below `1e-13` are treated as noise and skipped;
    /// at least eight must remain.
    pub fn decay_exponent(&self, k_range: RangeInclusive<usize>) -> Result<f64> {
        let (lo, hi) = (*k_range.start(), *k_range.end());
        if lo < 2 || hi > self.grid.nyquist() || lo > hi {
            return Err(Error::InvalidParameter(format!(
                "mode range {lo}..={hi} must lie within 2..={}",
                self.grid.nyquist()
            )));
        }
        let c = self.coeffs();
        let pts: Vec<(f64, f64)> = (lo..=hi)
            .filter(|&k| c[k].norm() > 1e-13)
            .map(|k| ((k as f64).ln(), c[k].norm().ln()))
            .collect();
        if pts.len() < 8 {
            return Err(Error::DegenerateFit(format!(
                "only {} modes above the noise floor in {lo}..={hi}",
                pts.len()
            )));
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        Ok(-sxy / sxx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> PeriodicGrid {
        PeriodicGrid::new(PI, n).unwrap()
    }

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-14
    }

    #[test]
    fn grid_validation() {
        assert!(PeriodicGrid::new(1.0, 4).is_err());
        assert!(PeriodicGrid::new(1.0, 24).is_err());
        assert!(PeriodicGrid::new(-1.0, 16).is_err());
        let g = PeriodicGrid::new(2.0, 16).unwrap();
        assert_eq!(g.node(0), -2.0);
        assert_eq!(g.node(g.origin_index()), 0.0);
    }

    #[test]
    fn coefficients_of_simple_functions() {
        let g = PeriodicGrid::new(2.5, 32).unwrap();
        let l = g.half_period();
        let u = PeriodicFunction::from_fn(g, |x| (PI * x / l).cos());
        assert!(close(u.coeff(1), Complex64::new(0.5, 0.0)));
        assert!(close(u.coeff(-1), Complex64::new(0.5, 0.0)));
        for k in [0, 2, 3, 16] {
            assert!(u.coeff(k).norm() < 1e-15);
        }
        let c = PeriodicFunction::constant(g, 3.0);
        assert!(close(c.coeff(0), Complex64::new(3.0, 0.0)));
        let s = PeriodicFunction::from_fn(g, |x| (2.0 * PI * x / l).sin());
        assert!(close(s.coeff(2), Complex64::new(0.0, -0.5)));
        assert!(close(s.coeff(-2), Complex64::new(0.0, 0.5)));
    }

    #[test]
    fn shifts() {
        let g = grid(64);
        let u = PeriodicFunction::from_fn(g, |x| (x.sin() + 0.3 * (3.0 * x).cos()).exp());
        let full = u.shift(2.0 * PI);
        for (a, b) in u.samples().iter().zip(full.samples()) {
            assert!((a - b).abs() < 1e-12);
        }
        let back = u.shift(0.37).shift(-0.37);
        for (a, b) in u.samples().iter().zip(back.samples()) {
            assert!((a - b).abs() < 1e-12);
        }
        let c = PeriodicFunction::from_fn(g, |x| x.cos());
        let flipped = c.shift(PI);
        for (a, b) in c.samples().iter().zip(flipped.samples()) {
            assert!((a + b).abs() < 1e-12);
        }
        let off = c.shift(0.3);
        for (x, v) in g.nodes().iter().zip(off.samples()) {
            assert!((v - (x + 0.3).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn interpolation_and_derivatives() {
        let g = grid(32);
        let u = PeriodicFunction::from_fn(g, |x| (2.0 * x).sin() + 0.5 * x.cos());
        assert!((u.eval(0.123) - ((0.246f64).sin() + 0.5 * 0.123f64.cos())).abs() < 1e-13);
        let d = u.derivative();
        for (x, v) in g.nodes().iter().zip(d.samples()) {
            assert!((v - (2.0 * (2.0 * x).cos() - 0.5 * x.sin())).abs() < 1e-12);
        }
        let modes = u.mode_values(0.7);
        assert!((modes.iter().sum::<f64>() - u.eval(0.7)).abs() < 1e-13);
    }

    #[test]
    fn decay_of_abs_sine_and_square_wave() {
        let g = grid(1024);
        let u = PeriodicFunction::from_fn(g, |x| x.sin().abs());
        let r = u.decay_exponent(2..=64).unwrap();
        assert!((r - 2.0).abs() < 0.1, "{r}");
        let sq = PeriodicFunction::from_fn(g, |x| x.sin().signum());
        let r = sq.decay_exponent(2..=64).unwrap();
        assert!((r - 1.0).abs() < 0.1, "{r}");
        let c = PeriodicFunction::from_fn(g, |x| x.cos());
        assert!(matches!(c.decay_exponent(2..=64), Err(Error::DegenerateFit(_))));
    }
}
