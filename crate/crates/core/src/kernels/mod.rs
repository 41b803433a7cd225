//! Radial kernels `K(t)`, `t > 0`, of nonlocal operators
//! `ℒ_K u(x) = PV ∫ (u(x) − u(y)) K(|x − y|) dy`.

mod classify;
mod laplace;
mod oscillatory;
mod spec;
mod wrap;

use std::fmt;
use std::sync::Arc;

pub use classify::{classify_kernel, laplace_measure_of, ClassReport, MonotonicityCheck};
pub use laplace::LaplaceMeasure;
pub use oscillatory::{oscillatory_profile, oscillatory_profile_third_derivative};
pub use spec::KernelSpec;
pub use wrap::{heat_kernel_phi, heat_kernel_phi_dual, wrap_kernel, wrapped_value, WrappedKernel, WrappedValue};

use crate::error::{Error, Result};
use crate::quad::{integrate_power_left, integrate_to_infinity, QuadOptions};
use crate::special::frac_lap_constant;

/// Shared profile closure for [`KernelFamily::Custom`].
#[derive(Clone)]
pub struct CustomProfile {
    name: String,
    profile: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    singular_coefficient: f64,
}

impl CustomProfile {
    /// `singular_coefficient` is `lim t^{1+2s} K(t)` as `t → 0`
    /// (zero for kernels bounded near the origin).
    pub fn new<F>(name: impl Into<String>, singular_coefficient: f64, profile: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            profile: Arc::new(profile),
            singular_coefficient,
        }
    }
}

impl fmt::Debug for CustomProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomProfile")
            .field("name", &self.name)
            .field("singular_coefficient", &self.singular_coefficient)
            .finish()
    }
}

#[derive(Debug, Clone)]
pub enum KernelFamily {
    /// `c_s t^{−1−2s}`.
    FracLap,
    /// `(t² + a²)^{−(n+s)/2}`.
    Delaunay { n: u32, a: f64 },
    /// Piecewise-linear nonincreasing profile, zero on `[cutoff, ∞)`.
    CompactMonotone { profile: Vec<(f64, f64)>, cutoff: f64 },
    /// `1` on `(0, cutoff]`, zero beyond.
    Indicator { cutoff: f64 },
    /// `∫ e^{−t² r} dμ(r)` for a tabulated measure.
    LaplaceMeasure(LaplaceMeasure),
    /// `f(t²)` with `f(τ) = ∫_τ^∞ dr ∫_r^∞ (2 + sin x) x^{−s−5/2} dx`:
    /// convex, comparable to `t^{−1−2s}`, not completely monotone.
    OscillatoryConvex,
    Custom(CustomProfile),
}

/// A kernel together with its order `s` and growth constants
/// `λ t^{−1−2s} ≤ K(t) ≤ Λ t^{−1−2s}`.
#[derive(Debug, Clone)]
pub struct Kernel {
    family: KernelFamily,
    s: f64,
    lambda_lo: f64,
    lambda_hi: f64,
}

fn check_order(s: f64) -> Result<()> {
    if s > 0.0 && s < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("order s must lie in (0, 1), got {s}")))
    }
}

impl Kernel {
    pub fn frac_lap(s: f64) -> Result<Self> {
        check_order(s)?;
        let c = frac_lap_constant(s);
        Ok(Self {
            family: KernelFamily::FracLap,
            s,
            lambda_lo: c,
            lambda_hi: c,
        })
    }

    pub fn delaunay(n: u32, s: f64, a: f64) -> Result<Self> {
        check_order(s)?;
        if n == 0 || !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "Delaunay kernel needs n >= 1 and a > 0, got n = {n}, a = {a}"
            )));
        }
        let nf = n as f64;
        let lambda_hi = if nf > 1.0 + s {
            let t2 = (1.0 + 2.0 * s) * a * a / (nf - 1.0 - s);
            t2.powf(0.5 + s) * (t2 + a * a).powf(-(nf + s) / 2.0)
        } else {
            f64::INFINITY
        };
        Ok(Self {
            family: KernelFamily::Delaunay { n, a },
            s,
            lambda_lo: 0.0,
            lambda_hi,
        })
    }

    /// `profile` holds `(t, K(t))` nodes with increasing `t ≥ 0` and
    /// nonincreasing nonnegative values; the kernel is constant before the
    /// first node, linear between nodes, and zero from `cutoff` on.
    pub fn compact_monotone(profile: Vec<(f64, f64)>, cutoff: f64, s: f64) -> Result<Self> {
        check_order(s)?;
        if profile.is_empty() || !(cutoff > 0.0 && cutoff.is_finite()) {
            return Err(Error::InvalidParameter(
                "compact kernel needs a nonempty profile and a positive cutoff".into(),
            ));
        }
        if profile[0].0 < 0.0 || profile.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidParameter(
                "profile nodes must be nonnegative and strictly increasing".into(),
            ));
        }
        if profile.iter().any(|p| !(p.1 >= 0.0 && p.1.is_finite()))
            || profile.windows(2).any(|w| w[1].1 > w[0].1)
        {
            return Err(Error::InvalidParameter(
                "profile values must be finite, nonnegative and nonincreasing".into(),
            ));
        }
        let mut lambda_hi: f64 = 0.0;
        let mut knots: Vec<f64> = profile.iter().map(|p| p.0).filter(|&t| t < cutoff).collect();
        knots.push(cutoff);
        for w in knots.windows(2) {
            let value = profile_value(&profile, w[0]);
            lambda_hi = lambda_hi.max(value * w[1].powf(1.0 + 2.0 * s));
        }
        if knots.len() == 1 {
            lambda_hi = profile[0].1 * cutoff.powf(1.0 + 2.0 * s);
        }
        Ok(Self {
            family: KernelFamily::CompactMonotone { profile, cutoff },
            s,
            lambda_lo: 0.0,
            lambda_hi,
        })
    }

    /// Characteristic function of `[0, cutoff]`.
    pub fn indicator(cutoff: f64, s: f64) -> Result<Self> {
        check_order(s)?;
        if !(cutoff > 0.0 && cutoff.is_finite()) {
            return Err(Error::InvalidParameter("cutoff must be positive".into()));
        }
        Ok(Self {
            family: KernelFamily::Indicator { cutoff },
            s,
            lambda_lo: 0.0,
            lambda_hi: cutoff.powf(1.0 + 2.0 * s),
        })
    }

    pub fn laplace(measure: LaplaceMeasure, s: f64, lambda_lo: f64, lambda_hi: f64) -> Result<Self> {
        check_order(s)?;
        check_constants(lambda_lo, lambda_hi)?;
        Ok(Self {
            family: KernelFamily::LaplaceMeasure(measure),
            s,
            lambda_lo,
            lambda_hi,
        })
    }

    pub fn oscillatory_convex(s: f64) -> Result<Self> {
        check_order(s)?;
        let base = 1.0 / ((s + 1.5) * (s + 0.5));
        Ok(Self {
            family: KernelFamily::OscillatoryConvex,
            s,
            lambda_lo: base,
            lambda_hi: 3.0 * base,
        })
    }

    pub fn custom(profile: CustomProfile, s: f64, lambda_lo: f64, lambda_hi: f64) -> Result<Self> {
        check_order(s)?;
        check_constants(lambda_lo, lambda_hi)?;
        Ok(Self {
            family: KernelFamily::Custom(profile),
            s,
            lambda_lo,
            lambda_hi,
        })
    }

    pub fn family(&self) -> &KernelFamily {
        &self.family
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn lambda_lo(&self) -> f64 {
        self.lambda_lo
    }

    pub fn lambda_hi(&self) -> f64 {
        self.lambda_hi
    }

    /// Short family tag used in reports.
    pub fn family_name(&self) -> &str {
        match &self.family {
            KernelFamily::FracLap => "fraclap",
            KernelFamily::Delaunay { .. } => "delaunay",
            KernelFamily::CompactMonotone { .. } => "compact",
            KernelFamily::Indicator { .. } => "indicator",
            KernelFamily::LaplaceMeasure(_) => "laplace",
            KernelFamily::OscillatoryConvex => "oscillatory_convex",
            KernelFamily::Custom(p) => &p.name,
        }
    }

    /// `K(t)` for `t > 0`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Domain(format!("kernel argument must be positive, got {t}")));
        }
        let v = match &self.family {
            KernelFamily::LaplaceMeasure(m) => m.transform(t)?,
            _ => self.raw(t),
        };
        if v.is_finite() && v >= 0.0 {
            Ok(v)
        } else {
            Err(Error::Integration(format!("kernel value at t = {t} is {v}")))
        }
    }

    /// Unchecked evaluation for use inside integrands; NaN on failure.
    pub(crate) fn raw(&self, t: f64) -> f64 {
        let s = self.s;
        match &self.family {
            KernelFamily::FracLap => self.lambda_hi * t.powf(-1.0 - 2.0 * s),
            KernelFamily::Delaunay { n, a } => (t * t + a * a).powf(-(*n as f64 + s) / 2.0),
            KernelFamily::CompactMonotone { profile, cutoff } => {
                if t >= *cutoff {
                    0.0
                } else {
                    profile_value(profile, t)
                }
            }
            KernelFamily::Indicator { cutoff } => {
                if t <= *cutoff {
                    1.0
                } else {
                    0.0
                }
            }
            KernelFamily::LaplaceMeasure(m) => m.transform(t).unwrap_or(f64::NAN),
            KernelFamily::OscillatoryConvex => oscillatory_profile(s, t * t),
            KernelFamily::Custom(p) => (p.profile)(t),
        }
    }

    /// `K(0)` when the kernel is bounded at the origin.
    pub fn value_at_zero(&self) -> Option<f64> {
        let s = self.s;
        match &self.family {
            KernelFamily::FracLap | KernelFamily::OscillatoryConvex => None,
            KernelFamily::Delaunay { n, a } => Some(a.powf(-(*n as f64 + s))),
            KernelFamily::CompactMonotone { profile, .. } => Some(profile[0].1),
            KernelFamily::Indicator { .. } => Some(1.0),
            KernelFamily::LaplaceMeasure(m) => m.total_mass().ok().filter(|v| v.is_finite()),
            KernelFamily::Custom(p) => {
                if p.singular_coefficient == 0.0 {
                    Some((p.profile)(0.0)).filter(|v| v.is_finite())
                } else {
                    None
                }
            }
        }
    }

    /// `lim_{t→0} t^{1+2s} K(t)`; zero for bounded kernels.
    pub fn singular_coefficient(&self) -> f64 {
        let s = self.s;
        match &self.family {
            KernelFamily::FracLap => self.lambda_hi,
            KernelFamily::OscillatoryConvex => 2.0 / ((s + 0.5) * (s + 1.5)),
            KernelFamily::LaplaceMeasure(m) => m.singular_coefficient(s),
            KernelFamily::Custom(p) => p.singular_coefficient,
            _ => 0.0,
        }
    }

    /// End of the support for compactly supported kernels.
    pub fn support_end(&self) -> Option<f64> {
        match &self.family {
            KernelFamily::CompactMonotone { cutoff, .. } | KernelFamily::Indicator { cutoff } => {
                Some(*cutoff)
            }
            _ => None,
        }
    }

    /// Points where the kernel or its derivative may jump.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.family {
            KernelFamily::CompactMonotone { profile, cutoff } => {
                let mut pts: Vec<f64> = profile
                    .iter()
                    .map(|p| p.0)
                    .filter(|&t| t > 0.0 && t < *cutoff)
                    .collect();
                pts.push(*cutoff);
                pts
            }
            KernelFamily::Indicator { cutoff } => vec![*cutoff],
            _ => Vec::new(),
        }
    }

    /// `∫_a^∞ K(t) dt` for `a > 0`.
    pub fn tail_integral(&self, a: f64) -> Result<f64> {
        if !(a > 0.0) {
            return Err(Error::Domain(format!("tail integral needs a > 0, got {a}")));
        }
        let s = self.s;
        match &self.family {
            KernelFamily::FracLap => Ok(self.lambda_hi * a.powf(-2.0 * s) / (2.0 * s)),
            KernelFamily::Indicator { cutoff } => Ok((cutoff - a).max(0.0)),
            KernelFamily::CompactMonotone { profile, cutoff } => {
                Ok(compact_integral(profile, *cutoff, a))
            }
            KernelFamily::OscillatoryConvex => Ok(oscillatory::tail_integral(s, a)),
            _ => {
                if let Some(end) = self.support_end() {
                    if a >= end {
                        return Ok(0.0);
                    }
                }
                let opts = QuadOptions::with_rel_tol(1e-11).with_abs_tol(1e-300);
                // t = a w^{−1/s} turns a t^{−1−2s} tail into a linear integrand.
                let q = 1.0 / s;
                let g = |w: f64| {
                    if w <= 0.0 {
                        return 0.0;
                    }
                    let t = a * w.powf(-q);
                    self.raw(t) * a * q * w.powf(-q - 1.0)
                };
                match integrate_power_left(g, 0.0, 1.0, 1.0, &opts) {
                    Ok(e) => Ok(e.value),
                    Err(_) => Ok(integrate_to_infinity(|t| self.raw(t), a, &opts)?.value),
                }
            }
        }
    }
}

fn check_constants(lo: f64, hi: f64) -> Result<()> {
    if lo >= 0.0 && hi >= lo && !hi.is_nan() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "growth constants must satisfy 0 <= lambda <= Lambda, got {lo}, {hi}"
        )))
    }
}

fn profile_value(profile: &[(f64, f64)], t: f64) -> f64 {
    let first = profile[0];
    if t <= first.0 {
        return first.1;
    }
    let idx = profile.partition_point(|p| p.0 <= t);
    if idx >= profile.len() {
        return profile[profile.len() - 1].1;
    }
    let (t0, k0) = profile[idx - 1];
    let (t1, k1) = profile[idx];
    k0 + (k1 - k0) * (t - t0) / (t1 - t0)
}

/// Exact `∫_a^{cutoff}` of the piecewise-linear profile.
fn compact_integral(profile: &[(f64, f64)], cutoff: f64, a: f64) -> f64 {
    if a >= cutoff {
        return 0.0;
    }
    let mut knots: Vec<f64> = vec![a];
    knots.extend(profile.iter().map(|p| p.0).filter(|&t| t > a && t < cutoff));
    knots.push(cutoff);
    knots
        .windows(2)
        .map(|w| 0.5 * (w[1] - w[0]) * (profile_value(profile, w[0]) + profile_value(profile, w[1])))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn fractional_values() {
        let k = Kernel::frac_lap(0.5).unwrap();
        assert!((k.eval(1.0).unwrap() - 1.0 / PI).abs() < 1e-15);
        // c_{1/4} = (1/4) √2 Γ(3/4) / (√π Γ(3/4)) = √2 / (4√π)
        let k = Kernel::frac_lap(0.25).unwrap();
        let c = 2f64.sqrt() / (4.0 * PI.sqrt());
        assert!((k.eval(2.0).unwrap() - c * 2f64.powf(-1.5)).abs() < 1e-14);
        assert!(matches!(k.eval(0.0), Err(Error::Domain(_))));
        assert!(matches!(k.eval(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn delaunay_limit_at_origin() {
        let k = Kernel::delaunay(2, 0.5, 1.0).unwrap();
        assert!((k.eval(1e-9).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(k.value_at_zero(), Some(1.0));
        assert!((k.eval(1.0).unwrap() - 2f64.powf(-1.25)).abs() < 1e-15);
    }

    #[test]
    fn delaunay_growth_constant_is_the_supremum() {
        let k = Kernel::delaunay(2, 0.5, 1.0).unwrap();
        let best = (1..20000)
            .map(|i| {
                let t = i as f64 * 1e-3;
                t * t * k.eval(t).unwrap()
            })
            .fold(0.0, f64::max);
        assert!(k.lambda_hi() >= best && k.lambda_hi() - best < 1e-6);
    }

    #[test]
    fn compact_profile_and_tail() {
        let k = Kernel::compact_monotone(vec![(0.0, 2.0), (1.0, 1.0), (2.0, 0.5)], 2.5, 0.5).unwrap();
        assert_eq!(k.eval(0.5).unwrap(), 1.5);
        assert_eq!(k.eval(2.2).unwrap(), 0.5);
        assert_eq!(k.eval(2.5).unwrap(), 0.0);
        assert!((k.tail_integral(0.5).unwrap() - (0.625 + 0.75 + 0.25)).abs() < 1e-15);
        assert!(Kernel::compact_monotone(vec![(0.0, 1.0), (1.0, 2.0)], 2.0, 0.5).is_err());
    }

    #[test]
    fn numeric_tail_matches_closed_form() {
        let k = Kernel::delaunay(3, 0.4, 1.0).unwrap();
        // ∫_1^∞ (t² + 1)^{−1.7} dt against composite Simpson on a mapped grid
        let numeric = k.tail_integral(1.0).unwrap();
        let n = 200_000;
        let g = |w: f64| {
            let t = 1.0 / w;
            (t * t + 1.0).powf(-1.7) / (w * w)
        };
        let h = 1.0 / n as f64;
        let mut simpson = g(1.0);
        for i in 1..n {
            simpson += if i % 2 == 1 { 4.0 } else { 2.0 } * g(i as f64 * h);
        }
        simpson *= h / 3.0;
        assert!((numeric - simpson).abs() < 1e-10, "{numeric} vs {simpson}");
        let f = Kernel::frac_lap(0.3).unwrap();
        let closed = f.tail_integral(2.0).unwrap();
        let custom = Kernel::custom(
            CustomProfile::new("power", f.lambda_hi(), {
                let f = f.clone();
                move |t| f.raw(t)
            }),
            0.3,
            f.lambda_lo(),
            f.lambda_hi(),
        )
        .unwrap();
        assert!((custom.tail_integral(2.0).unwrap() - closed).abs() < 1e-11 * closed);
    }

    #[test]
    fn invalid_orders_rejected() {
        assert!(Kernel::frac_lap(0.0).is_err());
        assert!(Kernel::frac_lap(1.0).is_err());
        assert!(Kernel::delaunay(0, 0.5, 1.0).is_err());
    }
}
