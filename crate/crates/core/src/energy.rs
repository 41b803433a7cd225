//! The periodic semi-norm `[u]_K`, the bilinear form `⟨u, v⟩_K`, and the
//! Lagrangian `E(u) = ½[u]_K² − ∫ G(u)` with its gradient.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::WrappedKernel;
use crate::operator::{apply_spectral, SymbolTable};
use crate::periodic::PeriodicFunction;
use crate::special::zeta;

/// Term `coef · |u|^{p+1} / (p + 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbsPower {
    pub coef: f64,
    pub p: f64,
}

/// A primitive `G(u) = Σ_j poly[j] u^j + Σ coef |u|^{p+1}/(p+1)`, with its
/// derivatives taken analytically.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Primitive {
    #[serde(default)]
    pub poly: Vec<f64>,
    #[serde(default)]
    pub abs_power: Vec<AbsPower>,
}

impl Primitive {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn polynomial(poly: Vec<f64>) -> Self {
        Self {
            poly,
            abs_power: Vec::new(),
        }
    }

    /// `coef · u² / 2`.
    pub fn quadratic(coef: f64) -> Self {
        Self::polynomial(vec![0.0, 0.0, 0.5 * coef])
    }

    /// `|u|^{p+1}/(p+1)`; `p ≥ 1` keeps `g` Lipschitz at the origin.
    pub fn abs_power(p: f64) -> Result<Self> {
        let out = Self {
            poly: Vec::new(),
            abs_power: vec![AbsPower { coef: 1.0, p }],
        };
        out.validate()?;
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        if self.poly.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("polynomial coefficients must be finite".into()));
        }
        for t in &self.abs_power {
            if !(t.p >= 1.0 && t.p.is_finite() && t.coef.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "|u|^(p+1) terms need finite coefficients and p >= 1, got p = {}",
                    t.p
                )));
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.poly.iter().all(|&c| c == 0.0) && self.abs_power.iter().all(|t| t.coef == 0.0)
    }

    pub fn value(&self, u: f64) -> f64 {
        let poly = self.poly.iter().rev().fold(0.0, |acc, c| acc * u + c);
        let abs: f64 = self
            .abs_power
            .iter()
            .map(|t| t.coef * u.abs().powf(t.p + 1.0) / (t.p + 1.0))
            .sum();
        poly + abs
    }

    /// `G'(u)`.
    pub fn derivative(&self, u: f64) -> f64 {
        let poly = self
            .poly
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (j, c)| acc * u + j as f64 * c);
        let abs: f64 = self
            .abs_power
            .iter()
            .map(|t| t.coef * u.signum() * u.abs().powf(t.p))
            .sum();
        poly + abs
    }

    /// `G''(u)`.
    pub fn second_derivative(&self, u: f64) -> f64 {
        let poly = self
            .poly
            .iter()
            .enumerate()
            .skip(2)
            .rev()
            .fold(0.0, |acc, (j, c)| acc * u + (j * (j - 1)) as f64 * c);
        let abs: f64 = self
            .abs_power
            .iter()
            .map(|t| t.coef * t.p * u.abs().powf(t.p - 1.0))
            .sum();
        poly + abs
    }
}

/// Potential `G` and optional constraint primitive `G̃`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Nonlinearity {
    pub potential: Primitive,
    #[serde(default)]
    pub constraint: Option<Primitive>,
}

impl Nonlinearity {
    pub fn new(potential: Primitive, constraint: Option<Primitive>) -> Result<Self> {
        potential.validate()?;
        if let Some(c) = &constraint {
            c.validate()?;
        }
        Ok(Self {
            potential,
            constraint,
        })
    }

    /// `G(u) = −u²/2`, `G̃(u) = |u|^{p+1}/(p+1)`.
    pub fn benjamin_ono(p: f64) -> Result<Self> {
        Self::new(Primitive::quadratic(-1.0), Some(Primitive::abs_power(p)?))
    }
}

/// Terms of the Lagrangian at one function.
#[derive(Debug, Clone, Serialize)]
pub struct EnergyReport {
    /// `½ [u]_K²`.
    pub kinetic: f64,
    /// `∫ G(u)`.
    pub potential: f64,
    pub total: f64,
    /// `∫ G̃(u)` when a constraint primitive is present.
    pub constraint: Option<f64>,
    /// `L²` norm of the gradient.
    pub grad_norm: f64,
    /// `ℒ_K u − g(u)`.
    #[serde(skip)]
    pub gradient: PeriodicFunction,
}

/// Per-mode weights of `Σ_{k=−N/2+1}^{N/2}` folded onto `0 ≤ k ≤ N/2`.
fn fold_weight(k: usize, nyquist: usize) -> f64 {
    if k == 0 || k == nyquist {
        1.0
    } else {
        2.0
    }
}

/// `⟨u, v⟩_K = 2L Σ_k ℓ(πk/L) Re(u_k conj(v_k))`.
pub fn bilinear_fourier(sym: &SymbolTable, u: &PeriodicFunction, v: &PeriodicFunction) -> Result<f64> {
    sym.grid().check_same(u.grid())?;
    sym.grid().check_same(v.grid())?;
    let half = sym.grid().nyquist();
    let l = sym.grid().half_period();
    let (cu, cv) = (u.coeffs(), v.coeffs());
    Ok(2.0
        * l
        * (0..=half)
            .map(|k| fold_weight(k, half) * sym.values()[k] * (cu[k] * cv[k].conj()).re)
            .sum::<f64>())
}

/// `[u]_K² = 2L Σ_k ℓ(πk/L) |u_k|²`.
pub fn seminorm_sq_fourier(sym: &SymbolTable, u: &PeriodicFunction) -> Result<f64> {
    bilinear_fourier(sym, u, u)
}

/// `[u]_K² = ½ ∬_{(−L,L)²} |u(x) − u(y)|² K̄(x − y)` by the double
/// trapezoid rule.
///
/// For singular kernels the diagonal is omitted and replaced by the
/// punctured-trapezoid correction `−ζ(2s−1) A h^{3−2s} Σ_i u'(x_i)²`, where
/// `A = lim t^{1+2s} K(t)`; the integrand behaves like
/// `A u'(x)² |x − y|^{1−2s}` near the diagonal.
pub fn seminorm_sq_realspace(wk: &WrappedKernel, u: &PeriodicFunction) -> Result<f64> {
    wk.grid().check_same(u.grid())?;
    if u.is_constant() {
        return Ok(0.0);
    }
    let n = u.samples().len();
    let h = u.grid().spacing();
    let v = u.samples();
    let kbar = wk.values();
    let mut sum = 0.0;
    for i in 0..n {
        for m in 1..n {
            let d = v[i] - v[(i + m) % n];
            sum += d * d * kbar[m];
        }
    }
    let mut total = 0.5 * h * h * sum;
    let a = wk.singular_coefficient();
    if a > 0.0 {
        let s = wk.s();
        let du = u.derivative();
        let sq: f64 = du.samples().iter().map(|d| d * d).sum();
        total += -zeta(2.0 * s - 1.0) * a * h.powf(3.0 - 2.0 * s) * sq;
    }
    Ok(total)
}

/// `∫ G̃(u)` by the trapezoid rule, together with `g̃(u)`.
pub fn constraint_value(u: &PeriodicFunction, g: &Primitive) -> (f64, PeriodicFunction) {
    let value = u.map(|v| g.value(v)).integral();
    (value, u.map(|v| g.derivative(v)))
}

/// `E(u) = ½[u]_K² − ∫ G(u)` and its gradient `ℒ_K u − g(u)`.
pub fn energy(u: &PeriodicFunction, sym: &SymbolTable, nl: &Nonlinearity) -> Result<EnergyReport> {
    let kinetic = 0.5 * seminorm_sq_fourier(sym, u)?;
    let potential = u.map(|v| nl.potential.value(v)).integral();
    let lu = apply_spectral(sym, u)?;
    let gradient = lu.zip_with(u, |a, v| a - nl.potential.derivative(v))?;
    let constraint = nl.constraint.as_ref().map(|g| u.map(|v| g.value(v)).integral());
    Ok(EnergyReport {
        kinetic,
        potential,
        total: kinetic - potential,
        constraint,
        grad_norm: gradient.l2_norm(),
        gradient,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{wrap_kernel, Kernel};
    use crate::periodic::PeriodicGrid;
    use std::f64::consts::PI;

    fn grid(n: usize) -> PeriodicGrid {
        PeriodicGrid::new(PI, n).unwrap()
    }

    #[test]
    fn primitive_derivatives() {
        let g = Primitive {
            poly: vec![1.0, -2.0, 0.5, 0.25],
            abs_power: vec![AbsPower { coef: 2.0, p: 2.5 }],
        };
        for u in [-1.7, -0.2, 0.3, 2.1] {
            let h = 1e-6;
            let fd = (g.value(u + h) - g.value(u - h)) / (2.0 * h);
            assert!((fd - g.derivative(u)).abs() < 1e-7 * fd.abs().max(1.0));
            let fd2 = (g.derivative(u + h) - g.derivative(u - h)) / (2.0 * h);
            assert!((fd2 - g.second_derivative(u)).abs() < 1e-6 * fd2.abs().max(1.0));
        }
        assert!(Primitive::abs_power(0.5).is_err());
    }

    #[test]
    fn fourier_seminorm_hand_values() {
        let g = grid(32);
        let sym = SymbolTable::fractional(g, 0.5);
        let u = PeriodicFunction::from_fn(g, |x| x.cos());
        assert!((seminorm_sq_fourier(&sym, &u).unwrap() - PI).abs() < 1e-13);
        let v = PeriodicFunction::from_fn(g, |x| x.cos() + (2.0 * x).sin());
        assert!((seminorm_sq_fourier(&sym, &v).unwrap() - 3.0 * PI).abs() < 1e-12);
        let c = PeriodicFunction::constant(g, 4.0);
        assert_eq!(seminorm_sq_fourier(&sym, &c).unwrap(), 0.0);
    }

    #[test]
    fn realspace_seminorm_of_cosine() {
        let g = grid(1024);
        let k = Kernel::frac_lap(0.5).unwrap();
        let wk = wrap_kernel(&k, &g, 1e-12).unwrap();
        let u = PeriodicFunction::from_fn(g, |x| x.cos());
        let v = seminorm_sq_realspace(&wk, &u).unwrap();
        assert!((v - PI).abs() < 1e-2 * PI, "{v}");
        let c = PeriodicFunction::constant(g, 1.5);
        assert_eq!(seminorm_sq_realspace(&wk, &c).unwrap(), 0.0);
    }

    #[test]
    fn energy_examples() {
        let g = grid(32);
        let sym = SymbolTable::fractional(g, 0.5);
        let free = Nonlinearity::new(Primitive::zero(), None).unwrap();
        let u = PeriodicFunction::from_fn(g, |x| x.cos());
        let r = energy(&u, &sym, &free).unwrap();
        assert!((r.total - PI / 2.0).abs() < 1e-13);
        for (x, v) in g.nodes().iter().zip(r.gradient.samples()) {
            assert!((v - x.cos()).abs() < 1e-13);
        }
        let well = Nonlinearity::new(Primitive::quadratic(-1.0), None).unwrap();
        let c = PeriodicFunction::constant(g, 1.5);
        let r = energy(&c, &sym, &well).unwrap();
        assert!((r.total - PI * 2.25).abs() < 1e-12);
        assert!(r.gradient.samples().iter().all(|&v| (v - 1.5).abs() < 1e-14));
        let z = PeriodicFunction::constant(g, 0.0);
        let shifted = Nonlinearity::new(Primitive::polynomial(vec![0.0, 0.7]), None).unwrap();
        let r = energy(&z, &sym, &shifted).unwrap();
        assert_eq!(r.total, 0.0);
        assert!(r.gradient.samples().iter().all(|&v| v == -0.7));
    }

    #[test]
    fn constraint_examples() {
        let g = grid(64);
        let one = PeriodicFunction::constant(g, 1.0);
        let (v, _) = constraint_value(&one, &Primitive::quadratic(1.0));
        assert!((v - PI).abs() < 1e-13);
        let c = PeriodicFunction::from_fn(g, |x| x.cos());
        let (v, _) = constraint_value(&c, &Primitive::quadratic(1.0));
        assert!((v - PI / 2.0).abs() < 1e-13);
        let (v, gt) = constraint_value(&c, &Primitive::abs_power(2.0).unwrap());
        assert!((v - 8.0 / 9.0).abs() < 1e-3, "{v}");
        assert!((gt.samples()[0] + 1.0).abs() < 1e-15);
    }
}
