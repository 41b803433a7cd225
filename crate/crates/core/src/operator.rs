//! Fourier symbols of `ℒ_K` and two independent ways of applying it:
//! spectrally, and by principal-value quadrature in real space.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{wrapped_value, Kernel, KernelFamily};
use crate::periodic::{PeriodicFunction, PeriodicGrid};
use crate::quad::{integrate_points, integrate_power_left, oscillatory_tail, QuadOptions, Trig};

/// Where the values of a [`SymbolTable`] came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Exact,
    Quadrature,
    User,
}

/// Multiplier values `ℓ(πk/L)`, `0 ≤ k ≤ N/2`; `ℓ(−ξ) = ℓ(ξ)`.
#[derive(Debug, Clone, Serialize)]
pub struct SymbolTable {
    grid: PeriodicGrid,
    values: Vec<f64>,
    provenance: Provenance,
}

impl SymbolTable {
    pub fn from_values(grid: PeriodicGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.nyquist() + 1 {
            return Err(Error::InvalidParameter(format!(
                "symbol table needs {} values, got {}",
                grid.nyquist() + 1,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("symbol values must be finite".into()));
        }
        Ok(Self {
            grid,
            values,
            provenance: Provenance::User,
        })
    }

    /// User symbol `ξ ↦ ℓ(ξ)` sampled at `ξ = πk/L`.
    pub fn from_fn<F: Fn(f64) -> f64>(grid: PeriodicGrid, f: F) -> Result<Self> {
        let values = (0..=grid.nyquist()).map(|k| f(grid.frequency(k))).collect();
        Self::from_values(grid, values)
    }

    /// `|ξ|^{2s}`, the symbol of the fractional Laplacian.
    pub fn fractional(grid: PeriodicGrid, s: f64) -> Self {
        let values = (0..=grid.nyquist())
            .map(|k| grid.frequency(k).powf(2.0 * s))
            .collect();
        Self {
            grid,
            values,
            provenance: Provenance::Exact,
        }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// `ℓ(πk/L)` for any integer `k` with `|k| ≤ N/2`.
    pub fn value(&self, k: i64) -> f64 {
        self.values[k.unsigned_abs() as usize]
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|&v| v >= 0.0)
    }

    /// Rows `(k, ξ, ℓ)`.
    pub fn rows(&self) -> Vec<(usize, f64, f64)> {
        self.values
            .iter()
            .enumerate()
            .map(|(k, &v)| (k, self.grid.frequency(k), v))
            .collect()
    }
}

/// `ℓ_K(ξ) = 2 ∫_0^∞ (1 − cos ξt) K(t) dt` by quadrature, to relative
/// tolerance `tol`, for every kernel family (including the fractional one).
///
/// The integral is split at `ξt = 1`: the inner part uses a power
/// substitution for the `t^{1−2s}` behaviour at the origin; the outer part
/// is integrated up to a whole number of periods `T`, after which
/// `∫_T^∞ K` is taken in closed form and `∫_T^∞ cos(ξt) K` by an
/// accelerated alternating series.
pub fn symbol_value(kernel: &Kernel, xi: f64, tol: f64) -> Result<f64> {
    let xi = xi.abs();
    if xi == 0.0 {
        return Ok(0.0);
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    let s = kernel.s();
    let integrand = |t: f64| {
        let half = (0.5 * xi * t).sin();
        2.0 * half * half * kernel.raw(t)
    };
    let opts = QuadOptions {
        abs_tol: 1e-300,
        rel_tol: tol,
        max_panels: 20000,
    };
    let period = 2.0 * PI / xi;
    let support = kernel.support_end();
    let t1 = support.map_or(1.0 / xi, |e| e.min(1.0 / xi));
    let inner = integrate_power_left(integrand, 0.0, t1, 1.0 / (1.0 - s), &opts)?.value;
    let end = match support {
        Some(e) => e,
        None => period * (t1.max(1.0) / period).ceil(),
    };
    let mut pts = vec![t1];
    let mut p = (t1 / (0.5 * period)).floor() * 0.5 * period + 0.5 * period;
    while p < end {
        if p > t1 {
            pts.push(p);
        }
        p += 0.5 * period;
    }
    pts.extend(kernel.breakpoints().into_iter().filter(|&b| b > t1 && b < end));
    pts.push(end);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let middle = if end > t1 {
        integrate_points(integrand, &pts, &opts)?.value
    } else {
        0.0
    };
    let mut total = inner + middle;
    if support.is_none() {
        let flat = kernel.tail_integral(end)?;
        let tail_opts = QuadOptions {
            abs_tol: tol * 1e-2 * (total + flat).abs(),
            rel_tol: tol,
            max_panels: 20000,
        };
        let wave = oscillatory_tail(|t| kernel.raw(t), xi, end, Trig::Cos, &tail_opts)?.value;
        total += flat - wave;
    }
    Ok(2.0 * total)
}

/// Symbol table of `ℒ_K` on `grid`: closed form `|ξ|^{2s}` for the
/// fractional kernel, quadrature otherwise (frequencies in parallel).
pub fn symbol_of_kernel(kernel: &Kernel, grid: &PeriodicGrid, tol: f64) -> Result<SymbolTable> {
    if matches!(kernel.family(), KernelFamily::FracLap) {
        return Ok(SymbolTable::fractional(*grid, kernel.s()));
    }
    let results: Vec<Result<f64>> = (0..=grid.nyquist())
        .into_par_iter()
        .map(|k| symbol_value(kernel, grid.frequency(k), tol))
        .collect();
    let mut values = Vec::with_capacity(results.len());
    for (k, r) in results.into_iter().enumerate() {
        match r {
            Ok(v) => values.push(v),
            Err(e) => {
                return Err(Error::Integration(format!(
                    "symbol quadrature failed at k = {k} (xi = {}): {e}",
                    grid.frequency(k)
                )))
            }
        }
    }
    Ok(SymbolTable {
        grid: *grid,
        values,
        provenance: Provenance::Quadrature,
    })
}

/// `Σ_k ℓ(πk/L) u_k e^{iπkx/L}`.
pub fn apply_spectral(sym: &SymbolTable, u: &PeriodicFunction) -> Result<PeriodicFunction> {
    sym.grid.check_same(u.grid())?;
    Ok(u.map_coeffs(|k, c| {
        if k == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            c * sym.values[k]
        }
    }))
}

/// Options for [`apply_pv`].
#[derive(Debug, Clone, PartialEq)]
pub struct PvOptions {
    /// Strictly decreasing exclusion radii for the stability check.
    pub eps_seq: Vec<f64>,
    /// Relative quadrature tolerance.
    pub tol: f64,
}

impl Default for PvOptions {
    fn default() -> Self {
        Self {
            eps_seq: vec![1e-2, 1e-3, 1e-4],
            tol: 1e-10,
        }
    }
}

/// Result of a principal-value evaluation.
#[derive(Debug, Clone, Serialize)]
pub struct PvEvaluation {
    pub value: f64,
    /// Values with `|z| < ε` excluded and replaced by the leading Taylor term.
    pub eps_values: Vec<f64>,
    /// Consecutive `eps_values` differ by less than `1e-6` (relative to `max(1, |value|)`).
    pub stable: bool,
}

/// Breakpoints of `K̄` inside `(0, L)`.
fn wrapped_breakpoints(kernel: &Kernel, half_period: f64) -> Vec<f64> {
    let p = 2.0 * half_period;
    let mut out = Vec::new();
    for b in kernel.breakpoints() {
        let mut j = 0.0;
        while p * j - half_period <= b {
            for c in [b - p * j, p * j - b] {
                if c > 0.0 && c < half_period {
                    out.push(c);
                }
            }
            j += 1.0;
        }
    }
    out
}

/// `∫_a^L g` with the power substitution on the first panel when `a = 0`.
fn integrate_half_period<G: Fn(f64) -> f64>(
    g: G,
    a: f64,
    half_period: f64,
    breaks: &[f64],
    s: f64,
    opts: &QuadOptions,
) -> Result<f64> {
    let mut pts: Vec<f64> = (0..=16).map(|i| half_period * i as f64 / 16.0).collect();
    pts.extend(breaks.iter().copied());
    pts.retain(|&p| p >= a);
    pts.push(a);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut total = 0.0;
    let mut rest = &pts[..];
    if a == 0.0 {
        total += integrate_power_left(&g, pts[0], pts[1], 1.0 / (1.0 - s), opts)?.value;
        rest = &pts[1..];
    }
    if rest.len() >= 2 {
        total += integrate_points(&g, rest, opts)?.value;
    }
    Ok(total)
}

/// `ℒ_K u(x) = ∫_0^∞ (2u(x) − u(x−z) − u(x+z)) K(z) dz`, reduced to one
/// half period with the wrapped kernel, `∫_0^L D(z) K̄(z) dz`.
///
/// The second difference `D` is formed mode by mode as
/// `Σ_k b_k(x) 4 sin²(πkz/2L)`, which is free of cancellation near `z = 0`.
pub fn apply_pv(kernel: &Kernel, u: &PeriodicFunction, x: f64, opts: &PvOptions) -> Result<PvEvaluation> {
    if opts.eps_seq.windows(2).any(|w| w[1] >= w[0]) || opts.eps_seq.iter().any(|&e| e <= 0.0) {
        return Err(Error::InvalidParameter(
            "eps_seq must be positive and strictly decreasing".into(),
        ));
    }
    let grid = u.grid();
    let l = grid.half_period();
    let s = kernel.s();
    let modes = u.mode_values(x);
    let freqs: Vec<f64> = (0..modes.len()).map(|k| 0.5 * grid.frequency(k)).collect();
    let second_difference = |z: f64| -> f64 {
        modes
            .iter()
            .zip(&freqs)
            .skip(1)
            .map(|(b, w)| {
                let h = (w * z).sin();
                4.0 * b * h * h
            })
            .sum()
    };
    if modes.iter().skip(1).all(|&b| b == 0.0) {
        return Ok(PvEvaluation {
            value: 0.0,
            eps_values: vec![0.0; opts.eps_seq.len()],
            stable: true,
        });
    }
    let wrap_tol = 1e-13;
    let kbar = |z: f64| {
        wrapped_value(kernel, l, z, wrap_tol)
            .map(|w| w.value)
            .unwrap_or(f64::NAN)
    };
    // Surface tail-bound problems as errors rather than NaN.
    wrapped_value(kernel, l, 0.5 * l, wrap_tol)?;
    let qopts = QuadOptions {
        abs_tol: 1e-13,
        rel_tol: opts.tol,
        max_panels: 20000,
    };
    let breaks = wrapped_breakpoints(kernel, l);
    let integrand = |z: f64| second_difference(z) * kbar(z);
    let value = integrate_half_period(integrand, 0.0, l, &breaks, s, &qopts)?;
    // u''(x) = −Σ_k b_k (πk/L)²
    let u2: f64 = -modes
        .iter()
        .zip(&freqs)
        .map(|(b, w)| 4.0 * b * w * w)
        .sum::<f64>();
    let mut eps_values = Vec::with_capacity(opts.eps_seq.len());
    for &eps in &opts.eps_seq {
        if eps >= l {
            return Err(Error::InvalidParameter(format!(
                "exclusion radius {eps} must be smaller than the half period"
            )));
        }
        let outer = integrate_half_period(integrand, eps, l, &breaks, s, &qopts)?;
        let moment = integrate_power_left(|z| z * z * kbar(z), 0.0, eps, 1.0 / (1.0 - s), &qopts)?.value;
        eps_values.push(outer - u2 * moment);
    }
    let scale = value.abs().max(1.0);
    let stable = eps_values.windows(2).all(|w| (w[1] - w[0]).abs() < 1e-6 * scale);
    Ok(PvEvaluation {
        value,
        eps_values,
        stable,
    })
}

/// Both sides of `∫ u ℒ_K ψ = ⟨u, ψ⟩_K`.
#[derive(Debug, Clone, Serialize)]
pub struct IbpReport {
    /// Trapezoid rule of `u · ℒ_K ψ`, with `ℒ_K ψ` from [`apply_pv`].
    pub lhs: f64,
    /// `½ ∬ (u(x) − u(y))(ψ(x) − ψ(y)) K(|x − y|)` reduced to `∫_0^L Q(z) K̄(z) dz`.
    pub rhs: f64,
    pub defect: f64,
}

/// Integration-by-parts identity with independent quadratures on each side.
pub fn integrate_by_parts_check(kernel: &Kernel, u: &PeriodicFunction, psi: &PeriodicFunction) -> Result<IbpReport> {
    u.grid().check_same(psi.grid())?;
    let grid = *u.grid();
    let l = grid.half_period();
    let opts = PvOptions {
        eps_seq: Vec::new(),
        tol: 1e-11,
    };
    let pv: Vec<f64> = grid
        .nodes()
        .into_par_iter()
        .map(|x| apply_pv(kernel, psi, x, &opts).map(|e| e.value))
        .collect::<Result<_>>()?;
    let lhs = grid.spacing() * u.samples().iter().zip(&pv).map(|(a, b)| a * b).sum::<f64>();

    let half = grid.nyquist();
    let weights: Vec<f64> = (0..=half)
        .map(|k| {
            let w = (u.coeffs()[k] * psi.coeffs()[k].conj()).re;
            match k {
                0 => 0.0,
                k if k == half => 0.5 * w,
                _ => 2.0 * w,
            }
        })
        .collect();
    let q = |z: f64| -> f64 {
        2.0 * l
            * weights
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, w)| {
                    let h = (0.5 * grid.frequency(k) * z).sin();
                    4.0 * w * h * h
                })
                .sum::<f64>()
    };
    let rhs = if weights.iter().all(|&w| w == 0.0) {
        0.0
    } else {
        let kbar = |z: f64| {
            wrapped_value(kernel, l, z, 1e-13)
                .map(|w| w.value)
                .unwrap_or(f64::NAN)
        };
        let qopts = QuadOptions {
            abs_tol: 1e-13,
            rel_tol: 1e-11,
            max_panels: 20000,
        };
        integrate_half_period(
            |z| q(z) * kbar(z),
            0.0,
            l,
            &wrapped_breakpoints(kernel, l),
            kernel.s(),
            &qopts,
        )?
    };
    Ok(IbpReport {
        lhs,
        rhs,
        defect: (lhs - rhs).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::CustomProfile;
    use crate::special::frac_lap_constant;

    #[test]
    fn fractional_symbol_by_quadrature() {
        let k = Kernel::frac_lap(0.5).unwrap();
        assert!((symbol_value(&k, 2.0, 1e-10).unwrap() - 2.0).abs() < 1e-8);
        assert_eq!(symbol_value(&k, 0.0, 1e-10).unwrap(), 0.0);
        for s in [0.2, 0.8] {
            let k = Kernel::frac_lap(s).unwrap();
            for xi in [0.3, 1.0, 7.5, 80.0] {
                let v = symbol_value(&k, xi, 1e-10).unwrap();
                let exact = xi.powf(2.0 * s);
                assert!((v - exact).abs() < 1e-8 * exact, "s={s} xi={xi}: {v} vs {exact}");
            }
        }
    }

    #[test]
    fn normalization_integral() {
        for s in [0.2, 0.5, 0.8] {
            let k = Kernel::custom(
                CustomProfile::new("power", 1.0, move |t: f64| t.powf(-1.0 - 2.0 * s)),
                s,
                1.0,
                1.0,
            )
            .unwrap();
            let v = symbol_value(&k, 1.0, 1e-11).unwrap();
            let exact = 1.0 / frac_lap_constant(s);
            assert!((v - exact).abs() < 1e-9 * exact, "s={s}: {v} vs {exact}");
        }
    }

    #[test]
    fn compact_symbol_closed_form() {
        // K = 1 on [0, c]: ℓ(ξ) = 2 (c − sin(ξc)/ξ)
        let c = 0.8;
        let k = Kernel::indicator(c, 0.5).unwrap();
        for xi in [0.5, 3.0, 40.0] {
            let v = symbol_value(&k, xi, 1e-12).unwrap();
            let exact = 2.0 * (c - (xi * c).sin() / xi);
            assert!((v - exact).abs() < 1e-11, "{v} vs {exact}");
        }
    }

    #[test]
    fn spectral_application() {
        let g = PeriodicGrid::new(PI, 32).unwrap();
        let sym = SymbolTable::fractional(g, 0.5);
        let u = PeriodicFunction::from_fn(g, |x| x.cos() + (2.0 * x).sin() + 3.0);
        let lu = apply_spectral(&sym, &u).unwrap();
        for (x, v) in g.nodes().iter().zip(lu.samples()) {
            assert!((v - (x.cos() + 2.0 * (2.0 * x).sin())).abs() < 1e-13);
        }
        assert_eq!(lu.coeffs()[0].re, 0.0);
        let other = PeriodicGrid::new(PI, 64).unwrap();
        assert!(matches!(
            apply_spectral(&SymbolTable::fractional(other, 0.5), &u),
            Err(Error::GridMismatch)
        ));
    }

    #[test]
    fn pv_matches_eigenvalue_for_half_laplacian() {
        let g = PeriodicGrid::new(PI, 32).unwrap();
        let k = Kernel::frac_lap(0.5).unwrap();
        let u = PeriodicFunction::from_fn(g, |x| x.cos());
        let e = apply_pv(&k, &u, 0.0, &PvOptions::default()).unwrap();
        assert!((e.value - 1.0).abs() < 1e-8, "{}", e.value);
        assert!(e.stable, "{:?}", e.eps_values);
        let c = PeriodicFunction::constant(g, 2.0);
        assert_eq!(apply_pv(&k, &c, 0.3, &PvOptions::default()).unwrap().value, 0.0);
        let bad = PvOptions {
            eps_seq: vec![1e-3, 1e-2],
            tol: 1e-8,
        };
        assert!(apply_pv(&k, &u, 0.0, &bad).is_err());
    }

    #[test]
    fn pv_matches_spectral_for_bounded_and_compact_kernels() {
        let g = PeriodicGrid::new(2.0, 32).unwrap();
        let l = g.half_period();
        let u = PeriodicFunction::from_fn(g, |x| (2.0 * PI * x / l).cos() + 0.3 * (3.0 * PI * x / l).cos());
        for k in [
            Kernel::delaunay(2, 0.5, 1.0).unwrap(),
            Kernel::compact_monotone(vec![(0.0, 1.0), (0.5, 0.4), (1.0, 0.1)], 1.5, 0.5).unwrap(),
        ] {
            let sym = symbol_of_kernel(&k, &g, 1e-11).unwrap();
            let lu = apply_spectral(&sym, &u).unwrap();
            for x in [-1.3, 0.0, 0.41, 1.7] {
                let pv = apply_pv(&k, &u, x, &PvOptions::default()).unwrap();
                assert!((pv.value - lu.eval(x)).abs() < 1e-8, "{} vs {}", pv.value, lu.eval(x));
            }
        }
    }

    #[test]
    fn integration_by_parts_for_cosine() {
        let g = PeriodicGrid::new(PI, 16).unwrap();
        let k = Kernel::frac_lap(0.5).unwrap();
        let u = PeriodicFunction::from_fn(g, |x| x.cos());
        let r = integrate_by_parts_check(&k, &u, &u).unwrap();
        // both sides equal [cos]² = 2π (1/4 + 1/4) = π
        assert!((r.lhs - PI).abs() < 1e-7 && (r.rhs - PI).abs() < 1e-7, "{r:?}");
    }
}
