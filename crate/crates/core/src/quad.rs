//! Adaptive Gauss–Legendre quadrature and series acceleration.
//!
//! Each panel is integrated by a 15-point Gauss–Legendre rule on the whole
//! panel and on its two halves; the difference is the panel error estimate
//! and the refined value is kept. Panels with the largest estimate are
//! bisected until the global tolerance is met.

use std::sync::LazyLock;

use crate::error::{Error, Result};

/// Tolerances and limits for the adaptive integrators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-11,
            max_panels: 4000,
        }
    }
}

impl QuadOptions {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }
}

/// Integral value together with its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Computes the `n`-point rule by Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (c + h * x, h * w))
    }

    /// Applies the rule on `[a, b]`, returning the integral of `f` and of `|f|`.
    pub fn apply<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64) -> (f64, f64) {
        let mut sum = 0.0;
        let mut abs = 0.0;
        for (x, w) in self.mapped(a, b) {
            let v = f(x) * w;
            sum += v;
            abs += v.abs();
        }
        (sum, abs)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

static RULE: LazyLock<GaussLegendre> = LazyLock::new(|| GaussLegendre::new(15));

struct Panel {
    a: f64,
    b: f64,
    left: f64,
    right: f64,
    abs: f64,
    error: f64,
}

impl Panel {
    fn build<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64) -> Self {
        let m = 0.5 * (a + b);
        let (left, la) = RULE.apply(f, a, m);
        let (right, ra) = RULE.apply(f, m, b);
        Self {
            a,
            b,
            left,
            right,
            abs: la + ra,
            error: (left + right - whole).abs(),
        }
    }

    fn value(&self) -> f64 {
        self.left + self.right
    }
}

/// Adaptive integral of `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<Estimate> {
    integrate_points(f, &[a, b], opts)
}

/// Adaptive integral over `[points[0], points[last]]` with the given
/// breakpoints used as initial panel boundaries.
pub fn integrate_points<F: Fn(f64) -> f64>(
    f: F,
    points: &[f64],
    opts: &QuadOptions,
) -> Result<Estimate> {
    if points.len() < 2 {
        return Err(Error::InvalidParameter(
            "integration needs at least two points".into(),
        ));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidParameter(
            "integration limits must be finite".into(),
        ));
    }
    let mut panels: Vec<Panel> = Vec::new();
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b == a {
            continue;
        }
        if b < a {
            return Err(Error::InvalidParameter(
                "integration points must be nondecreasing".into(),
            ));
        }
        let (whole, _) = RULE.apply(&f, a, b);
        panels.push(Panel::build(&f, a, b, whole));
    }
    if panels.is_empty() {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
        });
    }
    loop {
        let value: f64 = panels.iter().map(Panel::value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        let abs: f64 = panels.iter().map(|p| p.abs).sum();
        if !value.is_finite() {
            return Err(Error::Integration("integrand produced a non-finite value".into()));
        }
        let target = opts.abs_tol.max(opts.rel_tol * value.abs());
        let rounding = 50.0 * f64::EPSILON * abs;
        if error <= target || error <= rounding {
            return Ok(Estimate { value, error });
        }
        if panels.len() >= opts.max_panels {
            return Err(Error::Integration(format!(
                "no convergence after {} panels: value {value:e}, error estimate {error:e}",
                panels.len()
            )));
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("nonempty panel list");
        let p = panels.swap_remove(worst);
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b {
            // Panel cannot be split further in floating point.
            return Err(Error::Integration(format!(
                "panel [{:e}, {:e}] collapsed with error estimate {:e}",
                p.a, p.b, p.error
            )));
        }
        panels.push(Panel::build(&f, p.a, m, p.left));
        panels.push(Panel::build(&f, m, p.b, p.right));
    }
}

/// `∫_a^b f` after substituting `t = a + (b − a) w^q`, which removes an
/// integrable power singularity of `f` at `a` when `q` is large enough.
pub fn integrate_power_left<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    q: f64,
    opts: &QuadOptions,
) -> Result<Estimate> {
    let len = b - a;
    let g = |w: f64| {
        if w <= 0.0 {
            return 0.0;
        }
        f(a + len * w.powf(q)) * q * len * w.powf(q - 1.0)
    };
    integrate(g, 0.0, 1.0, opts)
}

/// `∫_a^∞ f` through the map `t = a + w / (1 − w)`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    opts: &QuadOptions,
) -> Result<Estimate> {
    let g = |w: f64| {
        let one_minus = 1.0 - w;
        if one_minus <= 0.0 {
            return 0.0;
        }
        f(a + w / one_minus) / (one_minus * one_minus)
    };
    integrate(g, 0.0, 1.0, opts)
}

/// Trigonometric weight of an oscillatory integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trig {
    Cos,
    Sin,
}

/// `∫_a^∞ f(t) cos(ωt) dt` (or `sin`) for `f` decaying monotonically to zero.
///
/// The integral is split at the zeros of the weight; the partial sums of the
/// resulting alternating series are accelerated with Wynn's epsilon
/// algorithm.
pub fn oscillatory_tail<F: Fn(f64) -> f64>(
    f: F,
    omega: f64,
    a: f64,
    trig: Trig,
    opts: &QuadOptions,
) -> Result<Estimate> {
    if !(omega > 0.0) {
        return Err(Error::InvalidParameter("frequency must be positive".into()));
    }
    let half = std::f64::consts::PI / omega;
    let offset = match trig {
        Trig::Cos => 0.5,
        Trig::Sin => 0.0,
    };
    let weight = |t: f64| match trig {
        Trig::Cos => (omega * t).cos(),
        Trig::Sin => (omega * t).sin(),
    };
    let g = |t: f64| f(t) * weight(t);
    let mut j = ((a / half) - offset).floor() + 1.0;
    let mut zero = (j + offset) * half;
    if zero <= a {
        j += 1.0;
        zero = (j + offset) * half;
    }
    let panel_opts = QuadOptions {
        abs_tol: opts.abs_tol * 0.01,
        ..*opts
    };
    let first = integrate(g, a, zero, &panel_opts)?;
    let mut sums = vec![first.value];
    let mut quad_error = first.error;
    let mut last_estimate = f64::NAN;
    let mut prev_diff = f64::INFINITY;
    let max_terms = 200;
    for _ in 0..max_terms {
        let next = zero + half;
        let piece = integrate(g, zero, next, &panel_opts)?;
        quad_error += piece.error;
        sums.push(sums.last().copied().unwrap_or(0.0) + piece.value);
        zero = next;
        if sums.len() < 8 {
            continue;
        }
        // Limit the table to the most recent terms to contain rounding growth.
        let window = &sums[sums.len().saturating_sub(24)..];
        let estimate = wynn_epsilon(window);
        let diff = (estimate - last_estimate).abs();
        let target = opts.abs_tol.max(opts.rel_tol * estimate.abs());
        if diff.max(prev_diff) <= target {
            return Ok(Estimate {
                value: estimate,
                error: diff.max(prev_diff) + quad_error,
            });
        }
        prev_diff = diff;
        last_estimate = estimate;
    }
    Err(Error::Integration(format!(
        "oscillatory tail from {a:e} at frequency {omega:e} did not converge"
    )))
}

/// Wynn's epsilon extrapolation of a sequence of partial sums.
///
/// Returns the deepest even-column entry of the epsilon table.
pub fn wynn_epsilon(partial_sums: &[f64]) -> f64 {
    let Some(&last) = partial_sums.last() else {
        return f64::NAN;
    };
    let mut best = last;
    let mut prev = vec![0.0; partial_sums.len() + 1];
    let mut cur = partial_sums.to_vec();
    let mut column = 0usize;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for j in 0..cur.len() - 1 {
            let d = cur[j + 1] - cur[j];
            if d == 0.0 || !d.is_finite() {
                return best;
            }
            next.push(prev[j + 1] + 1.0 / d);
        }
        column += 1;
        prev = cur;
        cur = next;
        if column.is_multiple_of(2) {
            let candidate = *cur.last().expect("nonempty column");
            if !candidate.is_finite() {
                return best;
            }
            best = candidate;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn legendre_rule_integrates_polynomials_exactly() {
        let rule = GaussLegendre::new(7);
        let (v, _) = rule.apply(&|x: f64| x.powi(12) + 3.0 * x.powi(5), -1.0, 1.0);
        assert!((v - 2.0 / 13.0).abs() < 1e-15);
        let wsum: f64 = rule.mapped(0.0, 3.0).map(|(_, w)| w).sum();
        assert!((wsum - 3.0).abs() < 1e-14);
    }

    #[test]
    fn smooth_integral() {
        let e = integrate(|x: f64| x.sin(), 0.0, PI, &QuadOptions::default()).unwrap();
        assert!((e.value - 2.0).abs() < 1e-13);
    }

    #[test]
    fn endpoint_singularity_with_power_map() {
        // ∫_0^1 x^{-0.6} dx = 2.5
        let e = integrate_power_left(|x: f64| x.powf(-0.6), 0.0, 1.0, 2.5, &QuadOptions::default())
            .unwrap();
        assert!((e.value - 2.5).abs() < 1e-12);
    }

    #[test]
    fn semi_infinite_integral() {
        let e = integrate_to_infinity(|x: f64| 1.0 / (1.0 + x * x), 0.0, &QuadOptions::default())
            .unwrap();
        assert!((e.value - PI / 2.0).abs() < 1e-11);
    }

    #[test]
    fn oscillatory_dirichlet_integral() {
        // ∫_1^∞ sin t / t dt = π/2 − Si(1)
        let si1 = 0.946_083_070_367_183_0;
        let e = oscillatory_tail(|t: f64| 1.0 / t, 1.0, 1.0, Trig::Sin, &QuadOptions::default())
            .unwrap();
        assert!((e.value - (PI / 2.0 - si1)).abs() < 1e-10, "{}", e.value);
        // ∫_0^∞ cos(2t) / (1 + t²) dt = π e^{-2} / 2
        let e = oscillatory_tail(
            |t: f64| 1.0 / (1.0 + t * t),
            2.0,
            0.0,
            Trig::Cos,
            &QuadOptions::default(),
        )
        .unwrap();
        assert!((e.value - PI * (-2f64).exp() / 2.0).abs() < 1e-10, "{}", e.value);
    }

    #[test]
    fn wynn_accelerates_alternating_series() {
        let mut s = 0.0;
        let sums: Vec<f64> = (0..16)
            .map(|k| {
                s += (-1f64).powi(k) / (k as f64 + 1.0);
                s
            })
            .collect();
        assert!((wynn_epsilon(&sums) - 2f64.ln()).abs() < 1e-12);
    }
}
