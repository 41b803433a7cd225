//! Kernels written as Laplace transforms `K(t) = ∫ e^{−t² r} dμ(r)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::special::{gamma, gamma_ur};

/// Density of a nonnegative measure sampled on an increasing `r`-grid.
///
/// The integral is the trapezoid rule in `ln r`. Outside the grid the
/// density is continued as a power law fitted to the two outermost samples,
/// and those pieces are integrated in closed form.
#[derive(Debug, Clone, Serialize)]
pub struct LaplaceMeasure {
    r: Vec<f64>,
    density: Vec<f64>,
    #[serde(skip)]
    weights: Vec<f64>,
    lower_exponent: f64,
    upper_exponent: f64,
}

impl LaplaceMeasure {
    pub fn new(r: Vec<f64>, density: Vec<f64>) -> Result<Self> {
        if r.len() < 3 || r.len() != density.len() {
            return Err(Error::InvalidParameter(
                "measure needs at least three (r, density) samples of equal length".into(),
            ));
        }
        if r[0] <= 0.0 || r.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "measure grid must be positive and strictly increasing".into(),
            ));
        }
        if density.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(Error::InvalidParameter(
                "measure density must be finite and nonnegative".into(),
            ));
        }
        let m = r.len();
        let logs: Vec<f64> = r.iter().map(|v| v.ln()).collect();
        let weights = (0..m)
            .map(|i| {
                let left = if i > 0 { logs[i] - logs[i - 1] } else { 0.0 };
                let right = if i + 1 < m { logs[i + 1] - logs[i] } else { 0.0 };
                0.5 * (left + right) * density[i] * r[i]
            })
            .collect();
        let fit = |i: usize, j: usize| {
            if density[i] > 0.0 && density[j] > 0.0 {
                (density[j] / density[i]).ln() / (r[j] / r[i]).ln()
            } else {
                f64::NEG_INFINITY
            }
        };
        let lower_exponent = fit(0, 1);
        let upper_exponent = fit(m - 2, m - 1);
        Ok(Self {
            r,
            density,
            weights,
            lower_exponent,
            upper_exponent,
        })
    }

    /// Logarithmic grid with `per_decade` points per factor of ten.
    pub fn log_grid(r_min: f64, r_max: f64, per_decade: usize) -> Vec<f64> {
        let decades = (r_max / r_min).log10();
        let count = (decades * per_decade as f64).round() as usize;
        (0..=count)
            .map(|i| r_min * 10f64.powf(decades * i as f64 / count as f64))
            .collect()
    }

    /// Default grid `r ∈ [1e−6, 1e6]`.
    pub fn default_grid() -> Vec<f64> {
        Self::log_grid(1e-6, 1e6, 20)
    }

    /// Measure of the fractional kernel `c_s t^{−1−2s}`:
    /// `c_s r^{s−1/2} / Γ(s + 1/2)`.
    pub fn fractional(s: f64, c_s: f64, grid: Vec<f64>) -> Result<Self> {
        let norm = c_s / gamma(s + 0.5);
        let density = grid.iter().map(|r| norm * r.powf(s - 0.5)).collect();
        Self::new(grid, density)
    }

    /// Measure of `(t² + a²)^{−(n+s)/2}`:
    /// `r^{(n+s)/2−1} e^{−a² r} / Γ((n+s)/2)`.
    pub fn delaunay(n: u32, s: f64, a: f64, grid: Vec<f64>) -> Result<Self> {
        let beta = (n as f64 + s) / 2.0;
        let norm = 1.0 / gamma(beta);
        let density = grid
            .iter()
            .map(|r| norm * r.powf(beta - 1.0) * (-a * a * r).exp())
            .collect();
        Self::new(grid, density)
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    fn lower_piece(&self, tau: f64) -> Result<f64> {
        let (r0, d0, alpha) = (self.r[0], self.density[0], self.lower_exponent);
        if d0 == 0.0 {
            return Ok(0.0);
        }
        if alpha <= -1.0 {
            return Err(Error::Integration(format!(
                "measure density behaves like r^{alpha:.3} near r = 0 and is not integrable"
            )));
        }
        // ∫_0^{r0} d0 (r/r0)^α e^{−τr} dr as a power series in τ r0.
        let x = tau * r0;
        let mut term = 1.0;
        let mut sum = 0.0;
        for j in 0..200 {
            let contrib = term / (alpha + 1.0 + j as f64);
            sum += contrib;
            if contrib.abs() < 1e-17 * sum.abs() {
                break;
            }
            term *= -x / (j as f64 + 1.0);
        }
        Ok(d0 * r0 * sum)
    }

    fn upper_piece(&self, tau: f64) -> f64 {
        let m = self.r.len();
        let (rn, dn, alpha) = (self.r[m - 1], self.density[m - 1], self.upper_exponent);
        if dn == 0.0 || !alpha.is_finite() {
            return 0.0;
        }
        let a = alpha + 1.0;
        if tau == 0.0 {
            return if a < 0.0 {
                dn * rn / -a
            } else {
                f64::INFINITY
            };
        }
        let x = tau * rn;
        if x > 700.0 {
            return 0.0;
        }
        // ∫_{rn}^∞ dn (r/rn)^α e^{−τr} dr = dn rn x^{−a} Γ(a, x)
        dn * rn * x.powf(-a) * upper_incomplete_gamma(a, x)
    }

    /// `∫ e^{−t² r} dμ(r)`.
    pub fn transform(&self, t: f64) -> Result<f64> {
        let tau = t * t;
        let main: f64 = self
            .r
            .iter()
            .zip(&self.weights)
            .map(|(r, w)| w * (-tau * r).exp())
            .sum();
        // First Euler–Maclaurin endpoint corrections of the log-trapezoid rule.
        let m = self.r.len();
        let h0 = (self.r[1] / self.r[0]).ln();
        let h1 = (self.r[m - 1] / self.r[m - 2]).ln();
        let slope = |r: f64, d: f64, alpha: f64| {
            if d == 0.0 || !alpha.is_finite() {
                0.0
            } else {
                d * r * (-tau * r).exp() * (alpha + 1.0 - tau * r)
            }
        };
        let ends = h0 * h0 / 12.0 * slope(self.r[0], self.density[0], self.lower_exponent)
            - h1 * h1 / 12.0 * slope(self.r[m - 1], self.density[m - 1], self.upper_exponent);
        Ok(main + ends + self.lower_piece(tau)? + self.upper_piece(tau))
    }

    /// Total mass `∫ dμ`, i.e. the kernel value at `t = 0` (may be infinite).
    pub fn total_mass(&self) -> Result<f64> {
        self.transform(0.0)
    }

    /// `lim t^{1+2s} K(t)` as `t → 0`, read from the power law of the
    /// density at large `r`; zero when the kernel is bounded.
    pub fn singular_coefficient(&self, s: f64) -> f64 {
        let m = self.r.len();
        let (rn, dn, alpha) = (self.r[m - 1], self.density[m - 1], self.upper_exponent);
        if dn == 0.0 || !alpha.is_finite() || alpha <= -1.0 {
            return 0.0;
        }
        if (alpha - (s - 0.5)).abs() > 1e-6 {
            return 0.0;
        }
        dn * rn.powf(-alpha) * gamma(alpha + 1.0)
    }
}

/// `Γ(a, x)` for `x > 0`: regularized series for `a > 0`, continued
/// fraction otherwise.
fn upper_incomplete_gamma(a: f64, x: f64) -> f64 {
    if a > 0.0 {
        return gamma_ur(a, x) * gamma(a);
    }
    // Lentz evaluation of e^{−x} x^a / (x + 1 − a − 1(1−a)/(x + 3 − a − …)).
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..1000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-15 {
            break;
        }
    }
    (-x + a * x.ln()).exp() * h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn incomplete_gamma_branches_agree_with_closed_forms() {
        // Γ(1, x) = e^{−x}; Γ(0, x) = E1(x), E1(1) = 0.21938393439552
        assert!((upper_incomplete_gamma(1.0, 2.0) - (-2f64).exp()).abs() < 1e-14);
        assert!((upper_incomplete_gamma(0.0, 1.0) - 0.219_383_934_395_520_3).abs() < 1e-12);
    }

    #[test]
    fn delaunay_measure_has_unit_mass_at_a_one() {
        let m = LaplaceMeasure::delaunay(2, 0.5, 1.0, LaplaceMeasure::default_grid()).unwrap();
        assert!((m.total_mass().unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn divergent_lower_end_is_an_error() {
        let r = LaplaceMeasure::default_grid();
        let d = r.iter().map(|v| v.powf(-1.5)).collect();
        let m = LaplaceMeasure::new(r, d).unwrap();
        assert!(matches!(m.transform(1.0), Err(Error::Integration(_))));
    }
}
