//! Grid-based tests of the kernel classes: convexity, monotonicity of the
//! wrapped kernel, and complete monotonicity of `τ ↦ K(τ^{1/2})`.
//!
//! Every verdict is a numerical check at a stated resolution, never a
//! proof; each report carries the worst margin found.

use std::f64::consts::PI;

use serde::Serialize;

use super::oscillatory::oscillatory_profile_third_derivative;
use super::wrap::wrapped_value;
use super::{Kernel, KernelFamily, LaplaceMeasure};
use crate::error::{Error, Result};

/// Outcome of the complete-monotonicity check.
#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityCheck {
    pub consistent: bool,
    pub method: String,
    /// Reconstruction error, or the most positive forbidden-sign value found.
    pub worst: f64,
    /// Points `τ` where a derivative changes sign.
    pub sign_changes: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassReport {
    pub family: String,
    pub convex: bool,
    /// Smallest second divided difference scaled by the local kernel size.
    pub convex_margin: f64,
    pub wrapped_monotone: bool,
    /// Largest relative increase of `K̄` between consecutive points of `(0, L]`.
    pub wrapped_margin: f64,
    pub wrapped_points: usize,
    pub completely_monotone: MonotonicityCheck,
}

const WRAP_POINTS: usize = 256;

/// Runs the three class checks on the sample points `t_grid`.
pub fn classify_kernel(kernel: &Kernel, t_grid: &[f64], half_period: f64) -> Result<ClassReport> {
    if t_grid.len() < 3 || t_grid[0] <= 0.0 || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "classification grid must be positive, strictly increasing, with >= 3 points".into(),
        ));
    }
    let values: Vec<f64> = t_grid.iter().map(|&t| kernel.eval(t)).collect::<Result<_>>()?;
    let (convex, convex_margin) = convexity(t_grid, &values);

    let mut wrapped_margin = f64::NEG_INFINITY;
    let mut prev = f64::NAN;
    for j in 1..=WRAP_POINTS {
        let t = half_period * j as f64 / WRAP_POINTS as f64;
        let v = wrapped_value(kernel, half_period, t, 1e-12)?.value;
        if j > 1 {
            let rel = (v - prev) / prev.abs().max(f64::MIN_POSITIVE);
            wrapped_margin = wrapped_margin.max(rel);
        }
        prev = v;
    }
    let wrapped_monotone = wrapped_margin <= 1e-10;

    let completely_monotone = complete_monotonicity(kernel, t_grid, &values)?;
    Ok(ClassReport {
        family: kernel.family_name().to_string(),
        convex,
        convex_margin,
        wrapped_monotone,
        wrapped_margin,
        wrapped_points: WRAP_POINTS,
        completely_monotone,
    })
}

/// Divided difference of order `k` at `x[i..=i+k]`.
fn divided(x: &[f64], y: &[f64], i: usize, k: usize) -> f64 {
    if k == 0 {
        return y[i];
    }
    (divided(x, y, i + 1, k - 1) - divided(x, y, i, k - 1)) / (x[i + k] - x[i])
}

fn convexity(t: &[f64], k: &[f64]) -> (bool, f64) {
    let mut margin = f64::INFINITY;
    for i in 0..t.len() - 2 {
        let d2 = divided(t, k, i, 2);
        let width = t[i + 2] - t[i];
        let scale = k[i].abs() + k[i + 1].abs() + k[i + 2].abs();
        if scale == 0.0 {
            continue;
        }
        margin = margin.min(d2 * width * width / scale);
    }
    (margin >= -1e-8, margin)
}

/// Sign test `(−1)^k Δ^k J ≥ 0`, `k = 1, 2, 3`, for `J(τ) = K(τ^{1/2})`.
fn difference_signs(tau: &[f64], j: &[f64]) -> (bool, f64) {
    let mut worst: f64 = f64::NEG_INFINITY;
    for order in 1..=3usize {
        let sign = if order % 2 == 0 { 1.0 } else { -1.0 };
        for i in 0..tau.len() - order {
            let d = divided(tau, j, i, order) * sign;
            let width = tau[i + order] - tau[i];
            let scale: f64 = j[i..=i + order].iter().map(|v| v.abs()).sum();
            if scale == 0.0 {
                continue;
            }
            worst = worst.max(-d * width.powi(order as i32) / scale);
        }
    }
    (worst <= 1e-9, worst)
}

fn complete_monotonicity(kernel: &Kernel, t_grid: &[f64], values: &[f64]) -> Result<MonotonicityCheck> {
    let s = kernel.s();
    match kernel.family() {
        KernelFamily::FracLap | KernelFamily::Delaunay { .. } => {
            let measure = laplace_measure_of(kernel, None)?;
            let mut worst: f64 = 0.0;
            for (&t, &v) in t_grid.iter().zip(values) {
                let rec = measure.transform(t)?;
                worst = worst.max((rec - v).abs() / v.abs());
            }
            Ok(MonotonicityCheck {
                consistent: worst < 1e-6,
                method: "Laplace-measure reconstruction".into(),
                worst,
                sign_changes: Vec::new(),
            })
        }
        KernelFamily::LaplaceMeasure(_) => Ok(MonotonicityCheck {
            consistent: true,
            method: "nonnegative measure".into(),
            worst: 0.0,
            sign_changes: Vec::new(),
        }),
        KernelFamily::OscillatoryConvex => {
            let lo = (t_grid[0] * t_grid[0]).min(1.0);
            let hi = (t_grid[t_grid.len() - 1].powi(2)).max(100.0);
            // log spacing fine enough that steps near `hi` stay below π/4
            let count = ((4.0 * hi * (hi / lo).ln() / PI).ceil() as usize).clamp(8000, 5_000_000);
            let taus: Vec<f64> = (0..=count)
                .map(|i| lo * (hi / lo).powf(i as f64 / count as f64))
                .collect();
            let d3 = |tau: f64| oscillatory_profile_third_derivative(s, tau);
            let mut worst = f64::NEG_INFINITY;
            let mut changes = Vec::new();
            for w in taus.windows(2) {
                let (a, b) = (d3(w[0]), d3(w[1]));
                worst = worst.max(a * w[0].powf(s + 2.5));
                if a.signum() != b.signum() {
                    changes.push(bisect(d3, w[0], w[1]));
                }
            }
            Ok(MonotonicityCheck {
                consistent: worst <= 0.0,
                method: "sign of the third derivative of K(τ^{1/2})".into(),
                worst,
                sign_changes: changes,
            })
        }
        _ => {
            let tau: Vec<f64> = t_grid.iter().map(|t| t * t).collect();
            let (consistent, worst) = difference_signs(&tau, values);
            Ok(MonotonicityCheck {
                consistent,
                method: "signs of divided differences of K(τ^{1/2}) up to order 3".into(),
                worst,
                sign_changes: Vec::new(),
            })
        }
    }
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let fa = f(a);
    for _ in 0..60 {
        let m = 0.5 * (a + b);
        if f(m).signum() == fa.signum() {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Closed-form Laplace measure of a fractional or Delaunay kernel on the
/// given `r`-grid (default `[1e−6, 1e6]`, 20 points per decade).
pub fn laplace_measure_of(kernel: &Kernel, r_grid: Option<Vec<f64>>) -> Result<LaplaceMeasure> {
    let grid = r_grid.unwrap_or_else(LaplaceMeasure::default_grid);
    match kernel.family() {
        KernelFamily::FracLap => LaplaceMeasure::fractional(kernel.s(), kernel.lambda_hi(), grid),
        KernelFamily::Delaunay { n, a } => LaplaceMeasure::delaunay(*n, kernel.s(), *a, grid),
        KernelFamily::LaplaceMeasure(m) => Ok(m.clone()),
        _ => Err(Error::Unsupported(format!(
            "no closed-form Laplace measure for the {} kernel",
            kernel.family_name()
        ))),
    }
}
