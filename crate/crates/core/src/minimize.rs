//! Constrained minimization of `E(u) = ½[u]_K² − ∫ G(u)` subject to
//! `∫ G̃(u) = c`, and symmetry diagnostics of the result.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::energy::{energy, EnergyReport, Nonlinearity, Primitive};
use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::operator::{apply_pv, PvOptions, SymbolTable};
use crate::periodic::{PeriodicFunction, PeriodicGrid};

/// Scales `u` by the `σ > 0` solving `∫ G̃(σu) = c`.
///
/// Newton steps are kept inside a bracket found by doubling and fall back
/// to bisection; the returned function meets the constraint to `1e−12`
/// relative to `max(1, |c|)`.
pub fn project_constraint(u: &PeriodicFunction, g: &Primitive, c: f64) -> Result<(PeriodicFunction, f64)> {
    let (sigma, _) = projection_factor(u, g, c)?;
    Ok((if sigma == 1.0 { u.clone() } else { u.scale(sigma) }, sigma))
}

fn projection_factor(u: &PeriodicFunction, g: &Primitive, c: f64) -> Result<(f64, f64)> {
    let h = u.grid().spacing();
    let v = u.samples();
    let f = |sigma: f64| h * v.iter().map(|&x| g.value(sigma * x)).sum::<f64>() - c;
    let df = |sigma: f64| h * v.iter().map(|&x| g.derivative(sigma * x) * x).sum::<f64>();
    let tol = 1e-12 * c.abs().max(1.0);
    let f1 = f(1.0);
    if f1.abs() <= tol {
        return Ok((1.0, f1));
    }
    let f0 = f(0.0);
    let (mut lo, mut hi) = if f0.signum() != f1.signum() {
        (0.0, 1.0)
    } else {
        let mut hi = 2.0;
        let mut found = false;
        for _ in 0..200 {
            if f(hi).signum() != f0.signum() {
                found = true;
                break;
            }
            hi *= 2.0;
        }
        if !found {
            return Err(Error::Projection(format!(
                "no scaling reaches the constraint level {c}"
            )));
        }
        (hi / 2.0, hi)
    };
    let flo_sign = f(lo).signum();
    let mut sigma = 1.0f64.clamp(lo, hi);
    for _ in 0..200 {
        let fs = f(sigma);
        if fs.abs() <= tol {
            return Ok((sigma, fs));
        }
        if fs.signum() == flo_sign {
            lo = sigma;
        } else {
            hi = sigma;
        }
        let d = df(sigma);
        let newton = sigma - fs / d;
        sigma = if d != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    let fs = f(sigma);
    if fs.abs() <= tol {
        Ok((sigma, fs))
    } else {
        Err(Error::Projection(format!(
            "constraint defect {fs:e} remains after bracketing"
        )))
    }
}

/// Starting point of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialGuess {
    /// `1 + cos(πx/L)`.
    Default,
    /// `1 + Σ_{k=1}^{8} (a_k cos(πkx/L) + b_k sin(πkx/L)) / k` with
    /// `a_k, b_k ~ U(−1, 1)` from a ChaCha8 stream.
    Random { seed: u64 },
    /// Explicit samples on the symbol grid.
    Samples { values: Vec<f64> },
}

impl InitialGuess {
    pub fn build(&self, grid: PeriodicGrid) -> Result<PeriodicFunction> {
        let l = grid.half_period();
        match self {
            Self::Default => Ok(PeriodicFunction::from_fn(grid, |x| 1.0 + (PI * x / l).cos())),
            Self::Random { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let modes: Vec<(f64, f64)> = (0..8)
                    .map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                    .collect();
                Ok(PeriodicFunction::from_fn(grid, |x| {
                    1.0 + modes
                        .iter()
                        .enumerate()
                        .map(|(i, (a, b))| {
                            let k = (i + 1) as f64;
                            (a * (PI * k * x / l).cos() + b * (PI * k * x / l).sin()) / k
                        })
                        .sum::<f64>()
                }))
            }
            Self::Samples { values } => PeriodicFunction::new(grid, values.clone()),
        }
    }
}

/// Armijo backtracking parameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Armijo {
    /// Sufficient-decrease constant.
    pub c1: f64,
    /// Step reduction on rejection.
    pub shrink: f64,
    /// First trial step.
    pub initial_step: f64,
    /// Upper bound on trial steps.
    pub max_step: f64,
    pub max_backtracks: usize,
}

impl Default for Armijo {
    fn default() -> Self {
        Self {
            c1: 1e-4,
            shrink: 0.5,
            initial_step: 1.0,
            max_step: 1e3,
            max_backtracks: 60,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MinimizeConfig {
    pub sym: SymbolTable,
    pub nl: Nonlinearity,
    /// Constraint level; required exactly when `nl.constraint` is present.
    pub c: Option<f64>,
    pub initial: InitialGuess,
    pub armijo: Armijo,
    pub grad_tol: f64,
    pub max_iters: usize,
}

impl MinimizeConfig {
    pub fn new(sym: SymbolTable, nl: Nonlinearity, c: Option<f64>) -> Self {
        Self {
            sym,
            nl,
            c,
            initial: InitialGuess::Default,
            armijo: Armijo::default(),
            grad_tol: 1e-8,
            max_iters: 50_000,
        }
    }
}

/// Symmetry and monotonicity of a profile about its maximum.
#[derive(Debug, Clone, Serialize)]
pub struct SymmetryDiagnostics {
    /// Location of the maximum.
    pub center: f64,
    /// `max_x |u(z + x) − u(z − x)|` on the grid.
    pub evenness_defect: f64,
    /// Largest rise of `u(z + ·)` along `(0, L)`.
    pub monotonicity_defect: f64,
    /// Zeros of `u'` on `[z, z + L]`, both ends included; `None` for
    /// numerically constant profiles.
    pub critical_points: Option<usize>,
    /// Location of the minimum, the centering of `−u`.
    pub min_center: f64,
    pub min_evenness_defect: f64,
    pub min_monotonicity_defect: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MinimizeResult {
    #[serde(skip)]
    pub u: PeriodicFunction,
    pub converged: bool,
    /// Least-squares multiplier; `None` for unconstrained runs.
    pub multiplier: Option<f64>,
    /// `‖ℒ_K u − g(u) − λ g̃(u)‖_{L²}`.
    pub residual_norm: f64,
    pub constraint_defect: Option<f64>,
    pub energy: f64,
    pub iterations: usize,
    /// Energy after every accepted step, starting with the projected seed.
    pub energy_trace: Vec<f64>,
    pub diagnostics: SymmetryDiagnostics,
    pub warnings: Vec<String>,
}

struct State {
    u: PeriodicFunction,
    report: EnergyReport,
    gtilde: Option<PeriodicFunction>,
}

impl State {
    fn new(u: PeriodicFunction, cfg: &MinimizeConfig) -> Result<Self> {
        let report = energy(&u, &cfg.sym, &cfg.nl)?;
        let gtilde = cfg.nl.constraint.as_ref().map(|g| u.map(|v| g.derivative(v)));
        Ok(Self { u, report, gtilde })
    }

    /// Least-squares multiplier and the residual it leaves.
    fn residual(&self) -> (Option<f64>, f64) {
        let grad = &self.report.gradient;
        match &self.gtilde {
            Some(gt) => {
                let gg = gt.inner(gt).expect("same grid");
                if gg <= 0.0 {
                    return (None, grad.l2_norm());
                }
                let lambda = grad.inner(gt).expect("same grid") / gg;
                let r = grad.zip_with(gt, |a, b| a - lambda * b).expect("same grid");
                (Some(lambda), r.l2_norm())
            }
            None => (None, grad.l2_norm()),
        }
    }
}

fn precondition(sym: &SymbolTable, f: &PeriodicFunction) -> PeriodicFunction {
    let values = sym.values();
    f.map_coeffs(|k, c| c / (1.0 + values[k].abs()))
}

/// Preconditioned projected gradient descent with Armijo backtracking.
///
/// The search direction is `P⁻¹(∇E − μ g̃(u))` with `P = 1 + |ℓ(πk/L)|`
/// and `μ` chosen so the direction is tangent to the constraint set; the
/// trial point is then rescaled back onto it. Trial steps start from a
/// Barzilai–Borwein estimate. The run stops when the least-squares
/// Euler–Lagrange residual drops below `grad_tol`.
pub fn minimize(cfg: &MinimizeConfig) -> Result<MinimizeResult> {
    if !(cfg.grad_tol > 0.0) {
        return Err(Error::InvalidParameter("grad_tol must be positive".into()));
    }
    let grid = *cfg.sym.grid();
    let mut warnings = Vec::new();
    if !cfg.sym.is_nonnegative() {
        warnings.push("sign-changing symbol: no convergence guarantee".to_string());
    }
    let constraint = match (&cfg.nl.constraint, cfg.c) {
        (Some(g), Some(c)) => Some((g.clone(), c)),
        (None, None) => None,
        (Some(_), None) => {
            return Err(Error::InvalidParameter("constraint primitive given without a level".into()))
        }
        (None, Some(_)) => {
            return Err(Error::InvalidParameter("constraint level given without a primitive".into()))
        }
    };
    let mut u0 = cfg.initial.build(grid)?;
    if let Some((g, c)) = &constraint {
        u0 = project_constraint(&u0, g, *c)?.0;
    }
    let mut state = State::new(u0, cfg)?;
    let mut trace = vec![state.report.total];
    let mut step = cfg.armijo.initial_step;
    let mut prev: Option<(PeriodicFunction, PeriodicFunction)> = None;
    let mut degenerate_warned = false;
    let mut iterations = 0;
    let mut converged = false;
    loop {
        let (_, res) = state.residual();
        if res < cfg.grad_tol {
            converged = true;
            break;
        }
        if iterations >= cfg.max_iters {
            break;
        }
        iterations += 1;

        let grad = &state.report.gradient;
        let pgrad = precondition(&cfg.sym, grad);
        // Tangent part of the gradient, r = ∇E − μ g̃, and d = P⁻¹ r.
        let (tangent, direction) = match &state.gtilde {
            Some(gt) => {
                let pgt = precondition(&cfg.sym, gt);
                let denom = gt.inner(&pgt)?;
                if denom > 1e-300 {
                    let mu = gt.inner(&pgrad)? / denom;
                    (
                        grad.zip_with(gt, |a, b| a - mu * b)?,
                        pgrad.zip_with(&pgt, |a, b| a - mu * b)?,
                    )
                } else {
                    if !degenerate_warned {
                        warnings.push("g̃(u) vanished along the iterate; took unconstrained steps".into());
                        degenerate_warned = true;
                    }
                    (grad.clone(), pgrad)
                }
            }
            None => (grad.clone(), pgrad),
        };
        // Equals ⟨∇E, d⟩ since ⟨g̃, d⟩ = 0, without the cancellation.
        let slope = tangent.inner(&direction)?;
        if !(slope > 0.0) {
            break;
        }

        if let Some((du_prev, dir_prev)) = &prev {
            // Barzilai–Borwein length from the last accepted step.
            let y = dir_prev.zip_with(&direction, |a, b| b - a)?;
            let sy = du_prev.inner(&y)?;
            let ss = du_prev.inner(du_prev)?;
            if sy > 0.0 && ss > 0.0 {
                step = ss / sy;
            }
        }
        step = step.min(cfg.armijo.max_step);

        let e0 = state.report.total;
        let mut accepted = None;
        let mut trial_step = step;
        for _ in 0..=cfg.armijo.max_backtracks {
            let mut trial = state.u.zip_with(&direction, |a, d| a - trial_step * d)?;
            if let Some((g, c)) = &constraint {
                match project_constraint(&trial, g, *c) {
                    Ok((p, _)) => trial = p,
                    Err(_) => {
                        trial_step *= cfg.armijo.shrink;
                        continue;
                    }
                }
            }
            let next = State::new(trial, cfg)?;
            let e1 = next.report.total;
            if !e1.is_finite() {
                trial_step *= cfg.armijo.shrink;
                continue;
            }
            let roundoff = 64.0 * f64::EPSILON * (e0.abs() + state.report.kinetic.abs() + state.report.potential.abs());
            if e1 <= e0 - cfg.armijo.c1 * trial_step * slope + roundoff {
                accepted = Some((next, trial_step));
                break;
            }
            trial_step *= cfg.armijo.shrink;
        }
        let Some((next, taken)) = accepted else {
            return Err(Error::StepSize(format!(
                "no Armijo step after {} backtracks at iteration {iterations}, residual {res:e}",
                cfg.armijo.max_backtracks
            )));
        };
        let du = next.u.zip_with(&state.u, |a, b| a - b)?;
        prev = Some((du, direction));
        step = taken;
        state = next;
        trace.push(state.report.total);
        if state.u.max_abs() > 1e12 || state.report.total < -1e300 {
            return Err(Error::Divergence {
                iterations,
                reason: "iterate left every bounded set".into(),
                energy_trace: trace,
            });
        }
    }

    let (multiplier, residual_norm) = state.residual();
    let constraint_defect = constraint
        .as_ref()
        .map(|(g, c)| state.u.map(|v| g.value(v)).integral() - c);
    let diagnostics = symmetry_diagnostics(&state.u);
    Ok(MinimizeResult {
        energy: state.report.total,
        u: state.u,
        converged,
        multiplier,
        residual_norm,
        constraint_defect,
        iterations,
        energy_trace: trace,
        diagnostics,
        warnings,
    })
}

/// Location of the extremum of `sign · u` nearest to the peak of the
/// reflection correlation.
fn locate_center(u: &PeriodicFunction, sign: f64) -> f64 {
    let grid = u.grid();
    let l = grid.half_period();
    let n = grid.len();
    let h = grid.spacing();
    // R(y) = ∫ u(x) u(y − x) dx has coefficients 2L u_k²; if u is even
    // about z its maximum sits at y = 2z.
    let corr = u.map_coeffs(|_, c| c * c * (2.0 * l));
    let r = corr.samples();
    let m = (0..n).max_by(|&a, &b| r[a].total_cmp(&r[b])).unwrap_or(0);
    let (rm, r0, rp) = (r[(m + n - 1) % n], r[m], r[(m + 1) % n]);
    let denom = rm - 2.0 * r0 + rp;
    let offset = if denom < 0.0 { 0.5 * (rm - rp) / denom } else { 0.0 };
    let y = grid.node(m) + offset.clamp(-0.5, 0.5) * h;
    let candidates = [0.5 * y, 0.5 * y + l];
    let mut z = candidates
        .into_iter()
        .max_by(|a, b| (sign * u.eval(*a)).total_cmp(&(sign * u.eval(*b))))
        .unwrap_or(0.0);
    // Move to the nearest grid extremum, then polish u'(z) = 0.
    let j = (((z + l) / h).round() as i64).rem_euclid(n as i64) as usize;
    let mut best = j;
    for _ in 0..n {
        let up = (best + 1) % n;
        let down = (best + n - 1) % n;
        let v = |i: usize| sign * u.samples()[i];
        if v(up) > v(best) {
            best = up;
        } else if v(down) > v(best) {
            best = down;
        } else {
            break;
        }
    }
    z = grid.node(best);
    let du = u.derivative();
    let d2u = u.second_derivative();
    for _ in 0..20 {
        let d2 = d2u.eval(z);
        if d2 == 0.0 {
            break;
        }
        let dz = du.eval(z) / d2;
        if !dz.is_finite() || dz.abs() > h {
            break;
        }
        z -= dz;
        if dz.abs() < 1e-15 * l {
            break;
        }
    }
    (z + l).rem_euclid(2.0 * l) - l
}

/// Evenness and monotonicity defects of `sign · u(z + ·)` on the grid.
fn defects_about(u: &PeriodicFunction, z: f64, sign: f64) -> (f64, f64, PeriodicFunction) {
    let v = u.shift(z).scale(sign);
    let n = v.grid().len();
    let c = v.grid().origin_index();
    let s = v.samples();
    let evenness = (1..n).map(|j| (s[j] - s[n - j]).abs()).fold(0.0, f64::max);
    let mut running_min = s[c];
    let mut monotone = 0.0f64;
    for j in c + 1..=n {
        let value = s[j % n];
        monotone = monotone.max(value - running_min);
        running_min = running_min.min(value);
    }
    (evenness, monotone, v)
}

/// Centre, evenness and monotonicity defects, and critical-point count.
///
/// Profiles whose oscillation is below `1e−8 · max(1, ‖u‖_∞)`, the default
/// gradient tolerance, count as constant: their derivative is solver noise
/// and has no meaningful zeros.
pub fn symmetry_diagnostics(u: &PeriodicFunction) -> SymmetryDiagnostics {
    let (lo, hi) = u
        .samples()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if hi - lo <= 1e-8 * u.max_abs().max(1.0) {
        return SymmetryDiagnostics {
            center: 0.0,
            evenness_defect: 0.0,
            monotonicity_defect: 0.0,
            critical_points: None,
            min_center: 0.0,
            min_evenness_defect: 0.0,
            min_monotonicity_defect: 0.0,
        };
    }
    let center = locate_center(u, 1.0);
    let (evenness_defect, monotonicity_defect, v) = defects_about(u, center, 1.0);
    let min_center = locate_center(u, -1.0);
    let (min_evenness_defect, min_monotonicity_defect, _) = defects_about(u, min_center, -1.0);
    SymmetryDiagnostics {
        center,
        evenness_defect,
        monotonicity_defect,
        critical_points: Some(critical_points_on_half(&v)),
        min_center,
        min_evenness_defect,
        min_monotonicity_defect,
    }
}

/// `2 +` sign changes of `v'` strictly inside `(0, L)`. Values below
/// `1e−9 · max|v'|` are treated as zero and do not start a new sign.
fn critical_points_on_half(v: &PeriodicFunction) -> usize {
    let dv = v.derivative();
    let s = dv.samples();
    let n = s.len();
    let c = v.grid().origin_index();
    let floor = 1e-9 * dv.max_abs();
    let mut last = 0.0f64;
    let mut changes = 0;
    for &d in &s[c + 1..n] {
        if d.abs() <= floor {
            continue;
        }
        if last != 0.0 && d.signum() != last {
            changes += 1;
        }
        last = d.signum();
    }
    2 + changes
}

/// Result of a maximum-principle probe.
#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub x0: f64,
    /// `ℒ_K v(x0)`.
    pub value: f64,
    pub stable: bool,
}

/// `ℒ_K v(x0)` for odd `v ≤ 0` on `(0, L)` with `v(x0) = 0`; for nonzero
/// `v` the value should be strictly positive.
pub fn max_principle_probe(
    kernel: &Kernel,
    v: &PeriodicFunction,
    x0: f64,
    opts: &PvOptions,
) -> Result<ProbeReport> {
    let grid = v.grid();
    let l = grid.half_period();
    let n = grid.len();
    let c = grid.origin_index();
    let s = v.samples();
    if !(x0 > 0.0 && x0 < l) {
        return Err(Error::Precondition(format!("x0 = {x0} must lie in (0, {l})")));
    }
    let odd = (0..n).map(|j| (s[j] + s[(n - j) % n]).abs()).fold(0.0, f64::max);
    if odd > 1e-10 {
        return Err(Error::Precondition(format!("v is not odd (defect {odd:e})")));
    }
    if let Some(j) = (c + 1..n).find(|&j| s[j] > 1e-12) {
        return Err(Error::Precondition(format!(
            "v is positive at x = {}",
            grid.node(j)
        )));
    }
    let at = v.eval(x0);
    if at.abs() > 1e-10 {
        return Err(Error::Precondition(format!("v(x0) = {at:e} is not zero")));
    }
    if v.is_constant() {
        return Ok(ProbeReport {
            x0,
            value: 0.0,
            stable: true,
        });
    }
    let pv = apply_pv(kernel, v, x0, opts)?;
    Ok(ProbeReport {
        x0,
        value: pv.value,
        stable: pv.stable,
    })
}

/// `−sin²(mπx/L) sin(πx/L)`: odd, nonpositive on `(0, L)`, vanishing at
/// `x = jL/m`.
pub fn probe_family(grid: PeriodicGrid, m: usize) -> PeriodicFunction {
    let l = grid.half_period();
    let m = m as f64;
    PeriodicFunction::from_fn(grid, |x| {
        let a = (m * PI * x / l).sin();
        -a * a * (PI * x / l).sin()
    })
}

/// Keeps only `0 ≤ k ≤ k_max`.
pub fn band_limit(u: &PeriodicFunction, k_max: usize) -> PeriodicFunction {
    u.map_coeffs(|k, c| if k <= k_max { c } else { Complex64::new(0.0, 0.0) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(l: f64, n: usize) -> PeriodicGrid {
        PeriodicGrid::new(l, n).unwrap()
    }

    #[test]
    fn projection_hand_value() {
        let g = grid(PI, 64);
        let u = PeriodicFunction::from_fn(g, |x| x.cos());
        let (p, sigma) = project_constraint(&u, &Primitive::quadratic(1.0), PI).unwrap();
        assert!((sigma - 2f64.sqrt()).abs() < 1e-12);
        let again = project_constraint(&p, &Primitive::quadratic(1.0), PI).unwrap();
        assert_eq!(again.1, 1.0);
        let zero = PeriodicFunction::constant(g, 0.0);
        assert!(matches!(
            project_constraint(&zero, &Primitive::quadratic(1.0), 1.0),
            Err(Error::Projection(_))
        ));
    }

    #[test]
    fn diagnostics_of_shifted_cosine() {
        let l = PI;
        let g = grid(l, 128);
        let u = PeriodicFunction::from_fn(g, |x| (PI * (x - 0.7) / l).cos());
        let d = symmetry_diagnostics(&u);
        assert!((d.center - 0.7).abs() < 1e-12, "{d:?}");
        assert!(d.evenness_defect < 1e-10);
        assert!(d.monotonicity_defect < 1e-10);
        assert_eq!(d.critical_points, Some(2));
        let c = symmetry_diagnostics(&PeriodicFunction::constant(g, 3.0));
        assert_eq!(c.critical_points, None);
        assert_eq!(c.evenness_defect, 0.0);
    }

    #[test]
    fn diagnostics_with_third_harmonic() {
        let g = grid(PI, 128);
        let u = PeriodicFunction::from_fn(g, |x| x.cos() + 0.2 * (3.0 * x).cos());
        let d = symmetry_diagnostics(&u);
        assert!(d.center.abs() < 1e-12);
        assert!(d.evenness_defect < 1e-10);
        // u' = −sin x − 0.6 sin 3x keeps one sign on (0, π).
        assert!(d.monotonicity_defect < 1e-10);
        assert_eq!(d.critical_points, Some(2));
        let w = PeriodicFunction::from_fn(g, |x| x.cos() + 0.5 * (3.0 * x).cos());
        let dw = symmetry_diagnostics(&w);
        assert!(dw.monotonicity_defect > 1e-3);
        assert_eq!(dw.critical_points, Some(4));
    }

    #[test]
    fn quadratic_constraint_goes_constant() {
        let g = grid(PI, 64);
        let nl = Nonlinearity::new(Primitive::zero(), Some(Primitive::quadratic(1.0))).unwrap();
        let mut cfg = MinimizeConfig::new(SymbolTable::fractional(g, 0.5), nl, Some(PI));
        cfg.initial = InitialGuess::Random { seed: 3 };
        let r = minimize(&cfg).unwrap();
        assert!(r.converged);
        assert!(r.energy < 1e-14);
        let m = r.u.mean();
        assert!((m.abs() - 1.0).abs() < 1e-8);
        assert!(r.u.samples().iter().all(|v| (v - m).abs() < 1e-8));
    }

    #[test]
    fn energy_trace_decreases() {
        let g = grid(10.0, 128);
        let nl = Nonlinearity::benjamin_ono(2.0).unwrap();
        let mut cfg = MinimizeConfig::new(SymbolTable::fractional(g, 0.5), nl, Some(PI));
        cfg.initial = InitialGuess::Random { seed: 11 };
        let r = minimize(&cfg).unwrap();
        assert!(r.converged, "{} {} {:?}", r.residual_norm, r.iterations, &r.energy_trace[r.energy_trace.len().saturating_sub(5)..]);
        for w in r.energy_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0));
        }
        assert!(r.constraint_defect.unwrap().abs() < 1e-10);
    }

    #[test]
    fn probe_preconditions() {
        let g = grid(PI, 64);
        let k = Kernel::frac_lap(0.5).unwrap();
        let opts = PvOptions::default();
        let even = PeriodicFunction::from_fn(g, |x| x.cos());
        assert!(matches!(
            max_principle_probe(&k, &even, 1.0, &opts),
            Err(Error::Precondition(_))
        ));
        let zero = PeriodicFunction::constant(g, 0.0);
        assert_eq!(max_principle_probe(&k, &zero, 1.0, &opts).unwrap().value, 0.0);
        let v = probe_family(g, 2);
        let r = max_principle_probe(&k, &v, PI / 2.0, &opts).unwrap();
        assert!(r.value > 0.0);
    }
}
