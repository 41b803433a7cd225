//! Run configuration: JSON file, command-line overrides and schema check.

use std::f64::consts::PI;
use std::path::Path;

use nonloc_core::energy::{Nonlinearity, Primitive};
use nonloc_core::minimize::InitialGuess;
use nonloc_core::rearrange::two_bump;
use nonloc_core::{KernelSpec, PeriodicFunction, PeriodicGrid};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

pub const SCHEMA: &str = include_str!("../schema/run_config.schema.json");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(rename = "L", default = "default_half_period")]
    pub half_period: f64,
    #[serde(rename = "N", default = "default_n")]
    pub n: usize,
}

fn default_half_period() -> f64 {
    PI
}

fn default_n() -> usize {
    256
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            half_period: default_half_period(),
            n: default_n(),
        }
    }
}

impl GridSpec {
    pub fn build(&self) -> Result<PeriodicGrid, CliError> {
        Ok(PeriodicGrid::new(self.half_period, self.n)?)
    }
}

/// Kernel as a spec object or as a shorthand string such as `fraclap`,
/// `counterexample_eps=0.3` or `delaunay_n=3,a=0.5`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KernelField {
    Short(String),
    Spec(KernelSpec),
}

impl KernelField {
    pub fn normalize(&self) -> Result<KernelSpec, CliError> {
        match self {
            Self::Spec(s) => Ok(s.clone()),
            Self::Short(s) => parse_kernel_shorthand(s),
        }
    }
}

pub fn parse_kernel_shorthand(text: &str) -> Result<KernelSpec, CliError> {
    let text = text.trim();
    if text.starts_with('{') {
        return serde_json::from_str(text).map_err(|e| CliError::Validation(format!("kernel JSON: {e}")));
    }
    let Some(eq) = text.find('=') else {
        return Ok(KernelSpec {
            family: text.to_string(),
            ..KernelSpec::default()
        });
    };
    let (family, first_key) = text[..eq]
        .rsplit_once('_')
        .ok_or_else(|| CliError::Validation(format!("kernel shorthand {text:?}: expected family_key=value")))?;
    let mut spec = KernelSpec {
        family: family.to_string(),
        ..KernelSpec::default()
    };
    let rest = format!("{first_key}{}", &text[eq..]);
    for pair in rest.split(',') {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| CliError::Validation(format!("kernel shorthand: {pair:?} is not key=value")))?;
        set_kernel_param(&mut spec, key.trim(), value.trim())?;
    }
    Ok(spec)
}

fn number(key: &str, value: &str) -> Result<f64, CliError> {
    value
        .parse::<f64>()
        .map_err(|_| CliError::Validation(format!("kernel parameter {key}: {value:?} is not a number")))
}

pub fn set_kernel_param(spec: &mut KernelSpec, key: &str, value: &str) -> Result<(), CliError> {
    match key {
        "s" => spec.s = Some(number(key, value)?),
        "n" => {
            spec.n = Some(
                value
                    .parse()
                    .map_err(|_| CliError::Validation(format!("kernel parameter n: {value:?}")))?,
            )
        }
        "a" => spec.a = Some(number(key, value)?),
        "L" => spec.half_period = Some(number(key, value)?),
        "eps" => spec.eps = Some(number(key, value)?),
        "cutoff" => spec.cutoff = Some(number(key, value)?),
        "lambda" => spec.lambda = Some(number(key, value)?),
        "Lambda" => spec.lambda_hi = Some(number(key, value)?),
        _ => return Err(CliError::Validation(format!("unknown kernel parameter {key:?}"))),
    }
    Ok(())
}

/// Named forms `benjamin_ono` (with `p`) and `double_well`, or explicit
/// primitives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NonlinearityField {
    Named(String),
    Explicit(Nonlinearity),
}

impl NonlinearityField {
    pub fn build(&self, p: Option<f64>) -> Result<Nonlinearity, CliError> {
        match self {
            Self::Explicit(nl) => Ok(Nonlinearity::new(nl.potential.clone(), nl.constraint.clone())?),
            Self::Named(name) => match name.as_str() {
                "benjamin_ono" => Ok(Nonlinearity::benjamin_ono(p.unwrap_or(2.0))?),
                "double_well" => Ok(Nonlinearity::new(
                    Primitive::polynomial(vec![0.0, 0.0, 0.5, 0.0, -0.25]),
                    None,
                )?),
                "none" => Ok(Nonlinearity::new(Primitive::zero(), None)?),
                other => Err(CliError::Validation(format!("unknown nonlinearity {other:?}"))),
            },
        }
    }
}

/// Test function on the configured grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    /// `amplitude · cos(πk(x + shift)/L)`.
    Cos {
        #[serde(default = "one_usize")]
        k: usize,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default)]
        shift: f64,
    },
    /// Bumps of heights `a` at `−L/2` and `b` at `L/2`.
    TwoBump {
        a: f64,
        b: f64,
        #[serde(default = "two_usize")]
        half_width: usize,
    },
    /// `1 + Σ_{k≤8} (a_k cos + b_k sin)/k`; the seed falls back to the
    /// run seed.
    Random {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    /// `−sin²(mπx/L) sin(πx/L)`.
    Probe { m: usize },
    Samples { values: Vec<f64> },
    /// One column of a CSV file with a header row.
    Csv {
        path: String,
        #[serde(default = "u_column")]
        column: String,
    },
}

fn one() -> f64 {
    1.0
}

fn one_usize() -> usize {
    1
}

fn two_usize() -> usize {
    2
}

fn u_column() -> String {
    "u".into()
}

impl FunctionSpec {
    pub fn build(&self, grid: PeriodicGrid, seed: Option<u64>) -> Result<PeriodicFunction, CliError> {
        let l = grid.half_period();
        match self {
            Self::Cos { k, amplitude, shift } => {
                let k = *k as f64;
                Ok(PeriodicFunction::from_fn(grid, |x| amplitude * (PI * k * (x + shift) / l).cos()))
            }
            Self::TwoBump { a, b, half_width } => {
                if *half_width == 0 || 4 * half_width >= grid.len() {
                    return Err(CliError::Validation(format!(
                        "two_bump half_width {half_width} does not fit N = {}",
                        grid.len()
                    )));
                }
                Ok(two_bump(grid, *a, *b, *half_width))
            }
            Self::Random { seed: own } => {
                let seed = own.or(seed).ok_or_else(|| {
                    CliError::Validation("random function needs a seed (field, --seed or NONLOC_SEED)".into())
                })?;
                Ok(InitialGuess::Random { seed }.build(grid)?)
            }
            Self::Probe { m } => Ok(nonloc_core::minimize::probe_family(grid, *m)),
            Self::Samples { values } => Ok(PeriodicFunction::new(grid, values.clone())?),
            Self::Csv { path, column } => Ok(PeriodicFunction::new(grid, read_column(Path::new(path), column)?)?),
        }
    }
}

pub fn read_column(path: &Path, column: &str) -> Result<Vec<f64>, CliError> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?
        .clone();
    let idx = headers
        .iter()
        .position(|h| h.trim() == column)
        .ok_or_else(|| CliError::Validation(format!("{}: no column {column:?}", path.display())))?;
    let mut out = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        let field = record.get(idx).unwrap_or("").trim();
        out.push(field.parse::<f64>().map_err(|_| {
            CliError::Validation(format!("{} row {}: {field:?} is not a number", path.display(), line + 2))
        })?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Relative tolerance of symbol quadrature.
    pub quad_tol: f64,
    /// Tail tolerance of the wrapped kernel.
    pub wrap_tol: f64,
    pub grad_tol: f64,
    pub max_iters: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            quad_tol: 1e-10,
            wrap_tol: 1e-12,
            grad_tol: 1e-8,
            max_iters: 50_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RieszInputs {
    pub f: FunctionSpec,
    pub g: FunctionSpec,
    pub h: FunctionSpec,
}

/// Everything a run needs. Absent fields take per-command defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelField>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nonlinearity: Option<NonlinearityField>,
    /// Exponent of the named `benjamin_ono` nonlinearity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    /// Constraint level.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Independent minimization runs, one per seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialGuess>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<FunctionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub riesz: Option<RieszInputs>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
    /// Order `s` for `regularity`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Probe family index for `maxprinciple`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shifts: Option<usize>,
    /// Points at which `apply` cross-checks against the principal value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pv_probes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_grid: Option<TGrid>,
    /// Output directory; not part of the hashed configuration.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

pub fn validate(value: &Value) -> Result<(), CliError> {
    let schema: Value = serde_json::from_str(SCHEMA).expect("shipped schema is valid JSON");
    let validator = jsonschema::validator_for(&schema).expect("shipped schema compiles");
    let problems: Vec<String> = validator
        .iter_errors(value)
        .map(|e| {
            let path = e.instance_path().to_string();
            if path.is_empty() {
                e.to_string()
            } else {
                format!("{path}: {e}")
            }
        })
        .collect();
    if problems.is_empty() {
        Ok(())
    } else {
        Err(CliError::Validation(format!("config does not match schema: {}", problems.join("; "))))
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let value: Value = serde_json::from_str(text).map_err(|e| CliError::Validation(format!("malformed JSON: {e}")))?;
    validate(&value)?;
    serde_json::from_value(value).map_err(|e| CliError::Validation(format!("config: {e}")))
}

impl RunConfig {
    pub fn tolerances(&self) -> Tolerances {
        self.tolerances.unwrap_or_default()
    }

    pub fn grid_spec(&self) -> GridSpec {
        self.grid.unwrap_or_default()
    }

    /// Configuration as embedded in reports and hashed: normalized kernel,
    /// no output directory.
    pub fn canonical(&self) -> Result<Self, CliError> {
        let mut c = self.clone();
        c.out = None;
        if let Some(k) = &c.kernel {
            c.kernel = Some(KernelField::Spec(k.normalize()?));
        }
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shorthand_forms() {
        let k = parse_kernel_shorthand("counterexample_eps=0.3").unwrap();
        assert_eq!((k.family.as_str(), k.eps), ("counterexample", Some(0.3)));
        let k = parse_kernel_shorthand("oscillatory_convex_s=0.4").unwrap();
        assert_eq!((k.family.as_str(), k.s), ("oscillatory_convex", Some(0.4)));
        let k = parse_kernel_shorthand("delaunay_n=3,a=0.5").unwrap();
        assert_eq!((k.n, k.a), (Some(3), Some(0.5)));
        assert_eq!(parse_kernel_shorthand("fraclap").unwrap().family, "fraclap");
        assert!(parse_kernel_shorthand("fraclap_q=1").is_err());
        assert!(parse_kernel_shorthand("fraclap_s=abc").is_err());
    }

    #[test]
    fn schema_accepts_and_rejects() {
        let ok = r#"{"command": "symbol", "kernel": {"family": "fraclap", "s": 0.5}, "grid": {"L": 3.0, "N": 64}}"#;
        assert!(parse_config(ok).is_ok());
        let short = r#"{"kernel": "counterexample_eps=0.3", "function": {"kind": "two_bump", "a": 1, "b": 2}}"#;
        assert!(parse_config(short).is_ok());
        for bad in [
            r#"{"grid": {"L": -1, "N": 64}}"#,
            r#"{"grid": {"L": 1, "N": 100}}"#,
            r#"{"command": "frobnicate"}"#,
            r#"{"kernel": {"family": "gauss"}}"#,
            r#"{"surplus": 1}"#,
            r#"{"tolerances": {"grad_tol": 0}}"#,
        ] {
            assert!(matches!(parse_config(bad), Err(CliError::Validation(_))), "{bad}");
        }
        assert!(matches!(parse_config("{"), Err(CliError::Validation(_))));
    }

    #[test]
    fn canonical_form_drops_output_and_expands_kernel() {
        let c = RunConfig {
            kernel: Some(KernelField::Short("fraclap_s=0.5".into())),
            out: Some("somewhere".into()),
            ..RunConfig::default()
        };
        let k = c.canonical().unwrap();
        assert!(k.out.is_none());
        assert!(matches!(k.kernel, Some(KernelField::Spec(ref s)) if s.s == Some(0.5)));
    }
}
