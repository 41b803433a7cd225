//! The profile `f(τ) = ∫_τ^∞ dr ∫_r^∞ (2 + sin x) x^{−s−5/2} dx`.
//!
//! Exchanging the order of integration gives
//! `f(τ) = ∫_τ^∞ (x − τ)(2 + sin x) x^{−s−5/2} dx`, whose non-oscillatory
//! part is `2 τ^{−s−1/2} / ((s + 1/2)(s + 3/2))`. The remaining sine
//! integrals are computed by adaptive quadrature up to `x = 40` and an
//! asymptotic expansion beyond.

use num_complex::Complex64;

use crate::quad::{integrate_points, QuadOptions};

const SPLIT: f64 = 40.0;

/// `∫_A^∞ e^{ix} x^{−μ} dx` for `A ≥ 40` from the series
/// `i e^{iA} A^{−μ} Σ_k (−i)^k (μ)_k A^{−k}`.
fn exp_power_tail(mu: f64, a: f64) -> Complex64 {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut prev_norm = f64::INFINITY;
    for k in 0..200 {
        term *= Complex64::new(0.0, -(mu + k as f64) / a);
        let norm = term.norm();
        if norm > prev_norm || norm < 1e-18 {
            break;
        }
        sum += term;
        prev_norm = norm;
    }
    Complex64::new(0.0, 1.0) * Complex64::from_polar(a.powf(-mu), a) * sum
}

/// `∫_τ^∞ sin(x) x^{−μ} dx` for `τ > 0`, `μ > 1`.
pub(crate) fn sine_power_tail(mu: f64, tau: f64) -> f64 {
    let far = exp_power_tail(mu, tau.max(SPLIT)).im;
    if tau >= SPLIT {
        return far;
    }
    // Geometric breakpoints resolve the x^{1−μ} growth near small τ.
    let mut pts = vec![tau];
    let mut p = tau;
    while p < 1.0 {
        p *= 2.0;
        if p < 1.0 {
            pts.push(p);
        }
    }
    let mut q = 1.0f64.max(tau);
    while q < SPLIT {
        q = (q + 2.0).min(SPLIT);
        pts.push(q);
    }
    let opts = QuadOptions {
        abs_tol: 1e-300,
        rel_tol: 1e-13,
        max_panels: 2000,
    };
    let near = integrate_points(|x: f64| x.sin() * x.powf(-mu), &pts, &opts)
        .map(|e| e.value)
        .unwrap_or(f64::NAN);
    near + far
}

/// `f(τ)` for `τ > 0`.
pub fn oscillatory_profile(s: f64, tau: f64) -> f64 {
    let main = 2.0 * tau.powf(-s - 0.5) / ((s + 0.5) * (s + 1.5));
    main + sine_power_tail(s + 1.5, tau) - tau * sine_power_tail(s + 2.5, tau)
}

/// `∫_a^∞ f(t²) dt`, from
/// `∫_{a²}^∞ (2 + sin x) x^{−s−5/2} ((2/3) x^{3/2} − a x + a³/3) dx`.
pub(crate) fn tail_integral(s: f64, a: f64) -> f64 {
    let a2 = a * a;
    let main = 2.0
        * a.powf(-2.0 * s)
        * (2.0 / (3.0 * s) - 1.0 / (s + 0.5) + 1.0 / (3.0 * (s + 1.5)));
    main + 2.0 / 3.0 * sine_power_tail(s + 1.0, a2) - a * sine_power_tail(s + 1.5, a2)
        + a * a2 / 3.0 * sine_power_tail(s + 2.5, a2)
}

/// `f'''(τ) = τ^{−s−5/2} (cos τ − (s + 5/2)(2 + sin τ)/τ)`.
pub fn oscillatory_profile_third_derivative(s: f64, tau: f64) -> f64 {
    tau.powf(-s - 2.5) * (tau.cos() - (s + 2.5) * (2.0 + tau.sin()) / tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate;

    #[test]
    fn asymptotic_tail_matches_direct_integration() {
        // Direct quadrature on [40, 4000] plus the series from 4000.
        let mu = 2.3;
        let direct = integrate(|x: f64| x.sin() * x.powf(-mu), 40.0, 4000.0, &QuadOptions {
            abs_tol: 1e-300,
            rel_tol: 1e-13,
            max_panels: 20000,
        })
        .unwrap()
        .value
            + exp_power_tail(mu, 4000.0).im;
        let series = exp_power_tail(mu, 40.0).im;
        assert!((direct - series).abs() < 1e-15, "{direct} {series}");
    }

    #[test]
    fn profile_matches_fubini_form_by_brute_force() {
        // f(τ) = ∫_τ^∞ (x − τ)(2 + sin x) x^{−s−5/2} dx, summed over [τ, 2000]
        // with the tail beyond bounded by its non-oscillatory part.
        let s = 0.5;
        let tau = 0.7;
        let g = |x: f64| (x - tau) * (2.0 + x.sin()) * x.powf(-s - 2.5);
        let opts = QuadOptions {
            abs_tol: 1e-300,
            rel_tol: 1e-12,
            max_panels: 20000,
        };
        let pts: Vec<f64> = std::iter::once(tau)
            .chain((1..=1000).map(|i| 2.0 * i as f64))
            .collect();
        let body = integrate_points(g, &pts, &opts).unwrap().value;
        let end: f64 = 2000.0;
        let tail = 2.0 * (end.powf(-s - 0.5) / (s + 0.5) - tau * end.powf(-s - 1.5) / (s + 1.5))
            + exp_power_tail(s + 1.5, end).im
            - tau * exp_power_tail(s + 2.5, end).im;
        let expected = body + tail;
        let got = oscillatory_profile(s, tau);
        assert!((got - expected).abs() < 1e-10 * expected, "{got} vs {expected}");
    }

    #[test]
    fn tail_integral_matches_quadrature_of_profile() {
        let s = 0.3;
        let a = 1.5;
        let opts = QuadOptions {
            abs_tol: 1e-300,
            rel_tol: 1e-11,
            max_panels: 20000,
        };
        // t = a w^{−1/s}
        let q = 1.0 / s;
        let g = |w: f64| {
            if w <= 0.0 {
                return 0.0;
            }
            let t = a * w.powf(-q);
            oscillatory_profile(s, t * t) * a * q * w.powf(-q - 1.0)
        };
        let numeric = integrate(g, 0.0, 1.0, &opts).unwrap().value;
        let closed = tail_integral(s, a);
        assert!((numeric - closed).abs() < 1e-8 * closed, "{numeric} vs {closed}");
    }

    #[test]
    fn third_derivative_matches_finite_differences() {
        let s = 0.5;
        let tau = 5.0;
        let h = 0.01;
        let f = |t: f64| oscillatory_profile(s, t);
        let fd = (f(tau + 2.0 * h) - 2.0 * f(tau + h) + 2.0 * f(tau - h) - f(tau - 2.0 * h))
            / (2.0 * h * h * h);
        let exact = oscillatory_profile_third_derivative(s, tau);
        assert!((fd - exact).abs() < 1e-3 * exact.abs().max(1e-3), "{fd} vs {exact}");
    }
}
