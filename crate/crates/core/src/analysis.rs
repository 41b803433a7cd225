//! Hölder-exponent calculus for solutions of `ℒ_K u = f(u)` with
//! `f ∈ C^β`, the scalar inequality behind the Moser iteration, and a
//! sup-norm sanity check.

use serde::Serialize;

use crate::energy::seminorm_sq_fourier;
use crate::error::{Error, Result};
use crate::operator::SymbolTable;
use crate::periodic::PeriodicFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RegularityCase {
    /// `β < 1` and `2s < 1 − β`: the bootstrap saturates below one.
    SubcriticalI,
    /// `2s ≥ 1 − β` (in particular any `β ≥ 1`).
    SupercriticalIi,
}

/// Exponents `γ − ε` for every `ε > 0`; `ε` is never fixed.
#[derive(Debug, Clone, Serialize)]
pub struct ExponentFamily {
    /// `γ`.
    pub value: f64,
    /// Human-readable form, e.g. `2s/(1-beta) - eps`.
    pub expression: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RegularityVerdict {
    pub s: f64,
    pub beta: f64,
    pub case: RegularityCase,
    pub guaranteed_family: ExponentFamily,
    /// Partial sums `β_k = Σ_{j=0}^{k} β^j`.
    pub bootstrap_sums: Vec<f64>,
    /// Exponents `2s β_k` reached by the bootstrap, stopped once one is at
    /// least 1 or the sums have converged.
    pub bootstrap_trace: Vec<f64>,
    /// `1/(1 − β)` for `β < 1`.
    pub sum_limit: Option<f64>,
    /// Whether the `ε` loss can be removed is not known in the first case.
    pub sharpness_open: bool,
}

const MAX_BOOTSTRAP: usize = 100_000;

/// Case split and bootstrap for `0 < s < 1`, `β > 0`.
pub fn regularity_verdict(s: f64, beta: f64) -> Result<RegularityVerdict> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidParameter(format!("s = {s} must lie in (0, 1)")));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter(format!("beta = {beta} must be positive")));
    }
    let two_s = 2.0 * s;
    let subcritical = beta < 1.0 && two_s < 1.0 - beta;
    let (case, guaranteed_family) = if subcritical {
        (
            RegularityCase::SubcriticalI,
            ExponentFamily {
                value: two_s / (1.0 - beta),
                expression: "2s/(1-beta) - eps".into(),
            },
        )
    } else {
        (
            RegularityCase::SupercriticalIi,
            ExponentFamily {
                value: beta + two_s,
                expression: "beta + 2s - eps".into(),
            },
        )
    };

    let mut sums = Vec::new();
    let mut trace = Vec::new();
    let mut partial = 0.0;
    let mut power = 1.0;
    for _ in 0..MAX_BOOTSTRAP {
        let next = partial + power;
        if !sums.is_empty() && next == partial {
            break;
        }
        partial = next;
        power *= beta;
        sums.push(partial);
        trace.push(two_s * partial);
        if two_s * partial >= 1.0 {
            break;
        }
    }
    Ok(RegularityVerdict {
        s,
        beta,
        case,
        guaranteed_family,
        bootstrap_sums: sums,
        bootstrap_trace: trace,
        sum_limit: (beta < 1.0).then(|| 1.0 / (1.0 - beta)),
        sharpness_open: subcritical,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MoserReport {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `(a m_a^r − b m_b^r)² ≤ 2(r + 2)(a − b)(a m_a^{2r} − b m_b^{2r})` with
/// `m_x = min(|x|, M)`.
pub fn moser_scalar_check(a: f64, b: f64, m: f64, r: f64) -> Result<MoserReport> {
    if !(m >= 0.0) || !(r >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need M >= 0 and r >= 0, got M = {m}, r = {r}"
        )));
    }
    let ma = a.abs().min(m);
    let mb = b.abs().min(m);
    let d = a * ma.powf(r) - b * mb.powf(r);
    let lhs = d * d;
    let rhs = 2.0 * (r + 2.0) * (a - b) * (a * ma.powf(2.0 * r) - b * mb.powf(2.0 * r));
    Ok(MoserReport {
        lhs,
        rhs,
        holds: lhs <= rhs,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LinfReport {
    pub sup_norm: f64,
    pub l2_norm: f64,
    /// `[u]_K`.
    pub seminorm: f64,
    /// `‖u‖_{L²} + [u]_K`; the unknown constant is not estimated.
    pub bound_rhs: f64,
    /// Both sides are finite.
    pub holds: bool,
}

/// Reports `‖u‖_∞` next to `‖u‖_{L²} + [u]_K` for `1/2 < s < 1`.
pub fn linf_sanity(u: &PeriodicFunction, sym: &SymbolTable, s: f64) -> Result<LinfReport> {
    if !(s > 0.5 && s < 1.0) {
        return Err(Error::OutOfScope(format!(
            "the sup-norm bound by the energy alone needs 1/2 < s < 1, got s = {s}"
        )));
    }
    let sup_norm = u.max_abs();
    let l2_norm = u.l2_norm();
    let seminorm = seminorm_sq_fourier(sym, u)?.max(0.0).sqrt();
    let bound_rhs = l2_norm + seminorm;
    Ok(LinfReport {
        sup_norm,
        l2_norm,
        seminorm,
        bound_rhs,
        holds: sup_norm.is_finite() && bound_rhs.is_finite(),
    })
}
