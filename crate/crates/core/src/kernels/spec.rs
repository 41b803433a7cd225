//! JSON description of a kernel.

use serde::{Deserialize, Serialize};

use super::{CustomProfile, Kernel, LaplaceMeasure};
use crate::error::{Error, Result};

/// Kernel configuration, e.g. `{"family": "delaunay", "s": 0.5, "n": 2, "a": 1}`.
///
/// Families: `fraclap`, `delaunay`, `compact` (profile + cutoff, default
/// cutoff `L`), `laplace` (`r` and `density` arrays), `custom` (tabulated
/// profile, log-log interpolated with `t^{−1−2s}` ends), `indicator`
/// (`cutoff`) and `counterexample` (indicator of `[0, L + eps]`), and
/// `oscillatory_convex`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, rename = "L", skip_serializing_if = "Option::is_none")]
    pub half_period: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, rename = "Lambda", skip_serializing_if = "Option::is_none")]
    pub lambda_hi: Option<f64>,
}

fn need<T: Copy>(v: Option<T>, name: &str, family: &str) -> Result<T> {
    v.ok_or_else(|| Error::InvalidParameter(format!("{family} kernel needs field \"{name}\"")))
}

impl KernelSpec {
    /// Builds the kernel; `default_half_period` fills a missing `L`.
    pub fn build(&self, default_half_period: Option<f64>) -> Result<Kernel> {
        let family = self.family.as_str();
        let s = self.s.unwrap_or(0.5);
        let half_period = self.half_period.or(default_half_period);
        match family {
            "fraclap" => Kernel::frac_lap(need(self.s, "s", family)?),
            "delaunay" => Kernel::delaunay(self.n.unwrap_or(2), s, self.a.unwrap_or(1.0)),
            "compact" => {
                let profile = self
                    .profile
                    .as_ref()
                    .ok_or_else(|| Error::InvalidParameter("compact kernel needs a profile".into()))?;
                let cutoff = match self.cutoff.or(half_period) {
                    Some(c) => c,
                    None => need(None, "cutoff", family)?,
                };
                Kernel::compact_monotone(profile.iter().map(|p| (p[0], p[1])).collect(), cutoff, s)
            }
            "indicator" => Kernel::indicator(need(self.cutoff, "cutoff", family)?, s),
            "counterexample" => {
                let l = match half_period {
                    Some(l) => l,
                    None => need(None, "L", family)?,
                };
                let eps = need(self.eps, "eps", family)?;
                if !(eps > 0.0 && eps < l) {
                    return Err(Error::InvalidParameter(format!(
                        "counterexample needs 0 < eps < L, got eps = {eps}, L = {l}"
                    )));
                }
                Kernel::indicator(l + eps, s)
            }
            "laplace" => {
                let r = self.r.clone().ok_or_else(|| {
                    Error::InvalidParameter("laplace kernel needs an \"r\" grid".into())
                })?;
                let d = self.density.clone().ok_or_else(|| {
                    Error::InvalidParameter("laplace kernel needs a \"density\" array".into())
                })?;
                let measure = LaplaceMeasure::new(r, d)?;
                Kernel::laplace(
                    measure,
                    s,
                    self.lambda.unwrap_or(0.0),
                    self.lambda_hi.unwrap_or(f64::INFINITY),
                )
            }
            "custom" => {
                let profile = self
                    .profile
                    .as_ref()
                    .ok_or_else(|| Error::InvalidParameter("custom kernel needs a profile".into()))?;
                tabulated_power_kernel(profile, s)
            }
            "oscillatory_convex" => Kernel::oscillatory_convex(s),
            other => Err(Error::InvalidParameter(format!("unknown kernel family \"{other}\""))),
        }
    }
}

/// Log-log interpolation of a positive table, continued by `t^{−1−2s}`
/// before the first and after the last node.
fn tabulated_power_kernel(profile: &[[f64; 2]], s: f64) -> Result<Kernel> {
    if profile.len() < 2
        || profile.iter().any(|p| !(p[0] > 0.0 && p[1] > 0.0))
        || profile.windows(2).any(|w| w[1][0] <= w[0][0])
    {
        return Err(Error::InvalidParameter(
            "custom profile needs >= 2 positive nodes with increasing t and positive values".into(),
        ));
    }
    let p = 1.0 + 2.0 * s;
    let logs: Vec<(f64, f64)> = profile.iter().map(|q| (q[0].ln(), q[1].ln())).collect();
    let scaled: Vec<f64> = profile.iter().map(|q| q[1] * q[0].powf(p)).collect();
    let lo = scaled.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = scaled.iter().cloned().fold(0.0, f64::max);
    let first = logs[0];
    let last = logs[logs.len() - 1];
    let f = move |t: f64| {
        let x = t.ln();
        if x <= first.0 {
            return (first.1 - p * (x - first.0)).exp();
        }
        if x >= last.0 {
            return (last.1 - p * (x - last.0)).exp();
        }
        let i = logs.partition_point(|q| q.0 <= x);
        let (x0, y0) = logs[i - 1];
        let (x1, y1) = logs[i];
        (y0 + (y1 - y0) * (x - x0) / (x1 - x0)).exp()
    };
    Kernel::custom(CustomProfile::new("custom", scaled[0], f), s, lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_families() {
        let k: KernelSpec = serde_json::from_str(r#"{"family": "fraclap", "s": 0.5}"#).unwrap();
        let k = k.build(None).unwrap();
        assert!((k.eval(1.0).unwrap() - 1.0 / std::f64::consts::PI).abs() < 1e-15);
        let d: KernelSpec =
            serde_json::from_str(r#"{"family": "delaunay", "s": 0.5, "n": 2, "a": 1}"#).unwrap();
        assert_eq!(d.build(None).unwrap().value_at_zero(), Some(1.0));
        let c: KernelSpec =
            serde_json::from_str(r#"{"family": "counterexample", "L": 2.0, "eps": 0.3}"#).unwrap();
        assert_eq!(c.build(None).unwrap().support_end(), Some(2.3));
        let bad = serde_json::from_str::<KernelSpec>(r#"{"family": "fraclap", "q": 1}"#);
        assert!(bad.is_err());
        let unknown: KernelSpec = serde_json::from_str(r#"{"family": "gauss"}"#).unwrap();
        assert!(unknown.build(None).is_err());
    }

    #[test]
    fn custom_table_reproduces_power_law() {
        let s = 0.3;
        let pts: Vec<[f64; 2]> = [0.1, 0.5, 1.0, 4.0]
            .iter()
            .map(|&t: &f64| [t, 2.0 * t.powf(-1.6)])
            .collect();
        let spec = KernelSpec {
            family: "custom".into(),
            s: Some(s),
            profile: Some(pts),
            ..Default::default()
        };
        let k = spec.build(None).unwrap();
        for t in [0.01, 0.3, 2.0, 50.0] {
            assert!((k.eval(t).unwrap() - 2.0 * t.powf(-1.6)).abs() < 1e-12 * t.powf(-1.6));
        }
        assert!((k.singular_coefficient() - 2.0).abs() < 1e-12);
    }
}
