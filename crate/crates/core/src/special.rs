//! Scalar special functions used by the kernels.

use std::f64::consts::PI;

pub use statrs::function::erf::erfc;
pub use statrs::function::gamma::{gamma, gamma_ur, ln_gamma};

/// Normalization constant of the fractional Laplacian,
/// `s 4^s Γ(1/2 + s) / (√π Γ(1 − s))`.
///
/// With this constant the operator with kernel `c_s |z|^{-1-2s}` has
/// Fourier symbol `|ξ|^{2s}`.
pub fn frac_lap_constant(s: f64) -> f64 {
    s * 4f64.powf(s) * gamma(0.5 + s) / (PI.sqrt() * gamma(1.0 - s))
}

// B_{2j} / (2j)! for j = 1..7
const BERNOULLI_OVER_FACTORIAL: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 1307674368000.0,
    1.0 / 74724249600.0,
];

/// Riemann zeta function for real `x != 1` by Euler–Maclaurin summation.
///
/// Accurate to roughly 1e-14 relative for `x > -6`, which covers every
/// use in this crate (exponents in `(-2, 2)`).
pub fn zeta(x: f64) -> f64 {
    if x == 1.0 {
        return f64::INFINITY;
    }
    let n = 20usize;
    let nf = n as f64;
    let mut sum: f64 = (1..n).map(|k| (k as f64).powf(-x)).sum();
    sum += nf.powf(1.0 - x) / (x - 1.0) + 0.5 * nf.powf(-x);
    // rising factorial x (x+1) ... (x+2j-2)
    let mut rising = x;
    let mut power = nf.powf(-x - 1.0);
    for (j, c) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        if j > 0 {
            let m = (2 * j) as f64;
            rising *= (x + m - 1.0) * (x + m);
            power /= nf * nf;
        }
        sum += c * rising * power;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_at_one_half_is_one_over_pi() {
        assert!((frac_lap_constant(0.5) - 1.0 / PI).abs() < 1e-14);
    }

    #[test]
    fn constant_at_quarter_matches_gamma_table() {
        // Γ(3/4) = 1.2254167024651776, Γ(3/4) again in the denominator
        let g34 = 1.225_416_702_465_177_6;
        let expected = 0.25 * 2f64.sqrt() * g34 / (PI.sqrt() * g34);
        assert!((frac_lap_constant(0.25) - expected).abs() < 1e-13);
    }

    #[test]
    fn zeta_known_values() {
        assert!((zeta(2.0) - PI * PI / 6.0).abs() < 1e-13);
        assert!((zeta(0.0) + 0.5).abs() < 1e-13);
        assert!((zeta(-1.0) + 1.0 / 12.0).abs() < 1e-13);
        assert!((zeta(0.5) + 1.460_354_508_809_586_8).abs() < 1e-12);
        assert!((zeta(-0.5) + 0.207_886_224_977_354_57).abs() < 1e-12);
    }
}
