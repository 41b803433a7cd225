//! Periodization `K̄(t) = Σ_k K(|t + 2kL|)` and the periodic heat kernel.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use super::Kernel;
use crate::error::{Error, Result};
use crate::periodic::PeriodicGrid;

/// One value of `K̄` with the truncation data used to obtain it.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WrappedValue {
    pub value: f64,
    /// Number of explicitly summed images on each side.
    pub k_max: usize,
    /// Estimated error of the Euler–Maclaurin tail (zero for compact kernels).
    pub tail_error: f64,
}

/// Reduces `t` to `[0, L]` using evenness and `2L`-periodicity.
fn reduce(t: f64, half_period: f64) -> f64 {
    let p = 2.0 * half_period;
    let r = t.abs().rem_euclid(p);
    if r > half_period {
        p - r
    } else {
        r
    }
}

/// Euler–Maclaurin estimate of `Σ_{j≥m} K(2Lj + offset)` and of its error.
fn series_tail(kernel: &Kernel, half_period: f64, offset: f64, m: usize) -> Result<(f64, f64)> {
    let p = 2.0 * half_period;
    let f = |j: f64| kernel.raw(p * j + offset);
    let mf = m as f64;
    let d = |i: f64| f(mf + i) - f(mf - i);
    let (d1, d2, d3) = (d(1.0), d(2.0), d(3.0));
    let first = (45.0 * d1 - 9.0 * d2 + d3) / 60.0;
    let third = (-d3 + 8.0 * d2 - 13.0 * d1) / 8.0;
    let integral = kernel.tail_integral(p * mf + offset)? / p;
    let sum = integral + 0.5 * f(mf) - first / 12.0 + third / 720.0;
    if !sum.is_finite() {
        return Err(Error::Integration(format!(
            "wrapped-kernel tail is not finite at offset {offset}"
        )));
    }
    Ok((sum, (third / 720.0).abs()))
}

/// `K̄(t)` to absolute tolerance `tol`; `+∞` at `t ≡ 0` for singular kernels.
pub fn wrapped_value(kernel: &Kernel, half_period: f64, t: f64, tol: f64) -> Result<WrappedValue> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    if !(half_period > 0.0) {
        return Err(Error::InvalidParameter("half period must be positive".into()));
    }
    let tau = reduce(t, half_period);
    let p = 2.0 * half_period;
    let center = if tau == 0.0 {
        match kernel.value_at_zero() {
            Some(v) => v,
            None => {
                return Ok(WrappedValue {
                    value: f64::INFINITY,
                    k_max: 0,
                    tail_error: 0.0,
                })
            }
        }
    } else {
        kernel.eval(tau)?
    };
    if let Some(end) = kernel.support_end() {
        let mut sum = center;
        let mut j = 1usize;
        loop {
            let plus = p * j as f64 + tau;
            let minus = p * j as f64 - tau;
            if minus > end && plus > end {
                break;
            }
            sum += kernel.raw(plus) + kernel.raw(minus);
            j += 1;
        }
        return Ok(WrappedValue {
            value: sum,
            k_max: j - 1,
            tail_error: 0.0,
        });
    }
    if !kernel.lambda_hi().is_finite() {
        return Err(Error::UnboundedTail(format!(
            "{} kernel has no finite growth constant",
            kernel.family_name()
        )));
    }
    let mut m = 16usize;
    loop {
        let head: f64 = (1..m)
            .map(|j| kernel.raw(p * j as f64 + tau) + kernel.raw(p * j as f64 - tau))
            .sum();
        let (up, up_err) = series_tail(kernel, half_period, tau, m)?;
        let (down, down_err) = series_tail(kernel, half_period, -tau, m)?;
        let err = up_err + down_err;
        if err <= tol || m >= 1 << 14 {
            if err > tol {
                return Err(Error::UnboundedTail(format!(
                    "tail estimate {err:e} above tolerance {tol:e} after {m} images"
                )));
            }
            let value = center + head + up + down;
            if !value.is_finite() {
                return Err(Error::Integration(format!("wrapped kernel at t = {t} is {value}")));
            }
            return Ok(WrappedValue {
                value,
                k_max: m - 1,
                tail_error: err,
            });
        }
        m *= 2;
    }
}

/// `K̄` tabulated at the pairwise distances `mh` of a grid.
#[derive(Debug, Clone, Serialize)]
pub struct WrappedKernel {
    grid: PeriodicGrid,
    values: Vec<f64>,
    tail_tol: f64,
    k_max: usize,
    s: f64,
    singular_coefficient: f64,
}

impl WrappedKernel {
    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn half_period(&self) -> f64 {
        self.grid.half_period()
    }

    /// `values[m] = K̄(m h)`, `0 ≤ m < N`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `K̄(m h)` for any integer `m`.
    pub fn at(&self, m: i64) -> f64 {
        self.values[m.rem_euclid(self.values.len() as i64) as usize]
    }

    pub fn tail_tol(&self) -> f64 {
        self.tail_tol
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// `lim t^{1+2s} K(t)` of the underlying kernel.
    pub fn singular_coefficient(&self) -> f64 {
        self.singular_coefficient
    }
}

/// Tabulates `K̄` on the grid distances; evenness and periodicity are exact
/// because only `0 ≤ m ≤ N/2` is computed and the rest mirrored.
pub fn wrap_kernel(kernel: &Kernel, grid: &PeriodicGrid, tol: f64) -> Result<WrappedKernel> {
    let n = grid.len();
    let h = grid.spacing();
    let l = grid.half_period();
    let half: Vec<WrappedValue> = (0..=n / 2)
        .into_par_iter()
        .map(|m| wrapped_value(kernel, l, m as f64 * h, tol))
        .collect::<Result<_>>()?;
    let mut values = vec![0.0; n];
    for (m, v) in half.iter().enumerate() {
        values[m] = v.value;
        if m > 0 {
            values[n - m] = v.value;
        }
    }
    Ok(WrappedKernel {
        grid: *grid,
        values,
        tail_tol: tol,
        k_max: half.iter().map(|v| v.k_max).max().unwrap_or(0),
        s: kernel.s(),
        singular_coefficient: kernel.singular_coefficient(),
    })
}

/// `Φ(t, r) = Σ_k e^{−(t + 2kL)² r}` by direct summation.
pub fn heat_kernel_phi(half_period: f64, r: f64, t: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("heat kernel rate must be positive, got {r}")));
    }
    let p = 2.0 * half_period;
    let t0 = (t - p * (t / p).round()).abs();
    // e^{−40} < 1e−17 bounds every dropped term; the tail is geometric.
    let reach = ((40.0 / r).sqrt() + half_period) / p;
    if reach > 1e6 {
        return heat_kernel_phi_dual(half_period, r, t);
    }
    let kmax = reach.ceil() as i64 + 1;
    let mut sum = 0.0;
    for k in -kmax..=kmax {
        let y = t0 + p * k as f64;
        sum += (-(y * y) * r).exp();
    }
    Ok(sum)
}

/// `Φ(t, r)` from its Poisson-summation dual
/// `(1/2L) √(π/r) Σ_m e^{−π²m²/(4L²r)} cos(πmt/L)`.
pub fn heat_kernel_phi_dual(half_period: f64, r: f64, t: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("heat kernel rate must be positive, got {r}")));
    }
    let decay = PI * PI / (4.0 * half_period * half_period * r);
    let mmax = (40.0 / decay).sqrt().ceil() as i64 + 1;
    let mut sum = 1.0;
    for m in 1..=mmax {
        let mf = m as f64;
        sum += 2.0 * (-decay * mf * mf).exp() * (PI * mf * t / half_period).cos();
    }
    Ok(sum * (PI / r).sqrt() / (2.0 * half_period))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indicator_wrap_values() {
        let l = 1.0;
        let eps = 0.3;
        let k = Kernel::indicator(l + eps, 0.5).unwrap();
        assert_eq!(wrapped_value(&k, l, 0.0, 1e-12).unwrap().value, 1.0);
        assert_eq!(wrapped_value(&k, l, l, 1e-12).unwrap().value, 2.0);
        assert_eq!(wrapped_value(&k, l, l - 0.5 * eps, 1e-12).unwrap().value, 2.0);
        assert_eq!(wrapped_value(&k, l, l - 1.5 * eps, 1e-12).unwrap().value, 1.0);
        assert_eq!(wrapped_value(&k, l, 0.5, 1e-12).unwrap().value, 1.0);
    }

    #[test]
    fn compact_kernel_inside_period_is_unchanged() {
        let k = Kernel::compact_monotone(vec![(0.0, 1.0), (0.5, 0.2)], 0.8, 0.5).unwrap();
        for t in [0.1, 0.4, 0.7, -0.3] {
            let w = wrapped_value(&k, 1.0, t, 1e-12).unwrap().value;
            assert_eq!(w, k.eval(t.abs()).unwrap());
        }
    }

    #[test]
    fn half_laplacian_wrap_matches_chord_formula_and_brute_force() {
        let k = Kernel::frac_lap(0.5).unwrap();
        let t = PI / 2.0;
        let w = wrapped_value(&k, PI, t, 1e-13).unwrap();
        let closed = 1.0 / (PI * (2.0 - 2.0 * t.cos()));
        assert!((w.value - closed).abs() < 1e-12, "{} vs {closed}", w.value);
        // brute-force image sum up to |k| = 10^6 plus the explicit k^{-2} tail
        let mut brute = 0.0;
        for j in (1..=1_000_000i64).rev() {
            let jf = j as f64;
            brute += 1.0 / (t + 2.0 * PI * jf).powi(2) + 1.0 / (t - 2.0 * PI * jf).powi(2);
        }
        brute = (brute + 1.0 / (t * t)) / PI;
        let dropped = 2.0 / (PI * 4.0 * PI * PI * 1e6);
        assert!((w.value - brute - dropped).abs() < 1e-10);
    }

    #[test]
    fn table_is_even_and_periodic() {
        let k = Kernel::delaunay(2, 0.5, 1.0).unwrap();
        let g = PeriodicGrid::new(2.0, 32).unwrap();
        let wk = wrap_kernel(&k, &g, 1e-12).unwrap();
        for m in 0..32i64 {
            assert_eq!(wk.at(m), wk.at(-m));
            assert_eq!(wk.at(m), wk.at(m + 32));
        }
        let direct = wrapped_value(&k, 2.0, 3.0 * g.spacing(), 1e-12).unwrap().value;
        assert!((wk.at(3) - direct).abs() < 1e-15);
    }

    #[test]
    fn unbounded_growth_constant_rejected() {
        let k = Kernel::delaunay(1, 0.5, 1.0).unwrap();
        assert!(matches!(wrapped_value(&k, 1.0, 0.5, 1e-10), Err(Error::UnboundedTail(_))));
    }

    #[test]
    fn heat_kernel_properties() {
        let l = PI;
        assert!(heat_kernel_phi(l, 1.0, 0.1).unwrap() > heat_kernel_phi(l, 1.0, 0.5).unwrap());
        for r in [0.01, 0.1, 1.0, 10.0] {
            for t in [0.2, 1.1, 2.9] {
                let a = heat_kernel_phi(l, r, t).unwrap();
                assert_eq!(a, heat_kernel_phi(l, r, -t).unwrap());
                assert!((a - heat_kernel_phi(l, r, t + 2.0 * l).unwrap()).abs() < 1e-14);
                assert!((a - heat_kernel_phi_dual(l, r, t).unwrap()).abs() < 1e-12);
            }
        }
        for i in 1..100 {
            let t = i as f64 * PI / 200.0;
            let phi = heat_kernel_phi(l, 100.0, t).unwrap();
            assert!((phi - (-100.0 * t * t).exp()).abs() < 1e-10);
        }
        assert!(matches!(heat_kernel_phi(l, 0.0, 1.0), Err(Error::Domain(_))));
    }
}
