//! `nonloc`: batch front end for the nonloc-core library.
//!
//! Every subcommand reads an optional JSON run configuration, applies the
//! command-line overrides, validates the result against the shipped schema
//! and writes `<command>.json` plus CSV tables into the output directory.

mod commands;
mod config;
mod error;
mod output;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::{
    parse_config, parse_kernel_shorthand, set_kernel_param, FunctionSpec, GridSpec, KernelField, NonlinearityField,
    RunConfig,
};
use crate::error::CliError;
use crate::output::write_report;

#[derive(Parser)]
#[command(name = "nonloc", version, about = "Periodic nonlocal operators from the command line")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Tabulate the Fourier symbol of a kernel
    Symbol,
    /// Apply the operator to a function
    Apply,
    /// Lagrangian, its gradient and both seminorm routes
    Energy,
    /// Periodic symmetric decreasing rearrangement
    Rearrange,
    /// Compare a seminorm before and after rearrangement
    PolyaSzego,
    /// Riesz inequality on the circle by brute-force double sums
    Riesz,
    /// Constrained minimization of the Lagrangian
    Minimize,
    /// Sign of the operator on odd nonpositive test functions
    Maxprinciple,
    /// Hölder-exponent verdict and bootstrap
    Regularity,
    /// Convexity, wrapped monotonicity and complete monotonicity
    KernelClass,
    /// Dirichlet-to-Neumann identities on the unit circle
    DtnCheck,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Self::Symbol => "symbol",
            Self::Apply => "apply",
            Self::Energy => "energy",
            Self::Rearrange => "rearrange",
            Self::PolyaSzego => "polya-szego",
            Self::Riesz => "riesz",
            Self::Minimize => "minimize",
            Self::Maxprinciple => "maxprinciple",
            Self::Regularity => "regularity",
            Self::KernelClass => "kernel-class",
            Self::DtnCheck => "dtn-check",
        }
    }
}

#[derive(Args)]
struct Common {
    /// JSON run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: nonloc-out)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Kernel: family name, shorthand like counterexample_eps=0.3, or JSON
    #[arg(long, global = true)]
    kernel: Option<String>,
    /// Kernel order s (for `regularity`, the operator order)
    #[arg(long, global = true)]
    s: Option<f64>,
    /// Delaunay dimension parameter
    #[arg(long = "n", global = true)]
    order_n: Option<u32>,
    #[arg(long, global = true)]
    a: Option<f64>,
    #[arg(long, global = true)]
    eps: Option<f64>,
    #[arg(long, global = true)]
    cutoff: Option<f64>,
    /// Half period
    #[arg(long = "L", global = true)]
    half_period: Option<f64>,
    /// Number of grid points (a power of two)
    #[arg(long = "N", global = true)]
    points: Option<usize>,
    /// Test function as JSON, e.g. '{"kind": "two_bump", "a": 1, "b": 2}'
    #[arg(long, global = true)]
    function: Option<String>,
    /// CSV file with a header row; the `u` column is the test function
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// benjamin_ono, double_well, none, or JSON primitives
    #[arg(long, global = true)]
    nonlinearity: Option<String>,
    #[arg(long, global = true)]
    p: Option<f64>,
    /// Constraint level
    #[arg(long, global = true)]
    c: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Comma-separated seeds for independent minimization runs
    #[arg(long, global = true, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long, global = true)]
    grad_tol: Option<f64>,
    #[arg(long, global = true)]
    max_iters: Option<usize>,
    #[arg(long, global = true)]
    quad_tol: Option<f64>,
    #[arg(long, global = true)]
    beta: Option<f64>,
    /// Probe family index for maxprinciple
    #[arg(long, global = true)]
    m: Option<usize>,
    #[arg(long, global = true)]
    x0: Option<f64>,
    /// Cyclic placements tested by riesz
    #[arg(long, global = true)]
    shifts: Option<usize>,
    /// Principal-value cross-checks for apply
    #[arg(long, global = true)]
    pv_probes: Option<usize>,
}

fn merge(cmd: Command, c: &Common, mut cfg: RunConfig) -> Result<RunConfig, CliError> {
    if let Some(named) = &cfg.command {
        if named != cmd.name() {
            return Err(CliError::Validation(format!(
                "config is for command {named:?}, not {:?}",
                cmd.name()
            )));
        }
    }
    cfg.command = Some(cmd.name().to_string());
    if let Some(k) = &c.kernel {
        cfg.kernel = Some(KernelField::Spec(parse_kernel_shorthand(k)?));
    }
    let kernel_flags = [
        ("n", c.order_n.map(|v| v.to_string())),
        ("a", c.a.map(|v| v.to_string())),
        ("eps", c.eps.map(|v| v.to_string())),
        ("cutoff", c.cutoff.map(|v| v.to_string())),
    ];
    let s_is_kernel = cmd != Command::Regularity;
    let mut overrides: Vec<(&str, String)> = kernel_flags
        .into_iter()
        .filter_map(|(k, v)| v.map(|v| (k, v)))
        .collect();
    if s_is_kernel {
        if let Some(s) = c.s {
            overrides.push(("s", s.to_string()));
        }
    } else if c.s.is_some() {
        cfg.s = c.s;
    }
    if !overrides.is_empty() {
        let mut spec = cfg
            .kernel
            .as_ref()
            .ok_or_else(|| CliError::Validation("kernel parameters given without --kernel".into()))?
            .normalize()?;
        for (k, v) in overrides {
            set_kernel_param(&mut spec, k, &v)?;
        }
        cfg.kernel = Some(KernelField::Spec(spec));
    }
    if c.half_period.is_some() || c.points.is_some() {
        let g = cfg.grid.unwrap_or_default();
        cfg.grid = Some(GridSpec {
            half_period: c.half_period.unwrap_or(g.half_period),
            n: c.points.unwrap_or(g.n),
        });
    }
    if let Some(f) = &c.function {
        cfg.function =
            Some(serde_json::from_str(f).map_err(|e| CliError::Validation(format!("--function: {e}")))?);
    }
    if let Some(path) = &c.input {
        cfg.function = Some(FunctionSpec::Csv {
            path: path.display().to_string(),
            column: "u".into(),
        });
    }
    if let Some(n) = &c.nonlinearity {
        cfg.nonlinearity = Some(if n.trim_start().starts_with('{') {
            NonlinearityField::Explicit(
                serde_json::from_str(n).map_err(|e| CliError::Validation(format!("--nonlinearity: {e}")))?,
            )
        } else {
            NonlinearityField::Named(n.clone())
        });
    }
    macro_rules! take {
        ($($field:ident),*) => { $( if c.$field.is_some() { cfg.$field = c.$field.clone(); } )* };
    }
    take!(p, c, seed, seeds, beta, m, x0, shifts, pv_probes);
    if c.grad_tol.is_some() || c.max_iters.is_some() || c.quad_tol.is_some() {
        let mut t = cfg.tolerances.unwrap_or_default();
        t.grad_tol = c.grad_tol.unwrap_or(t.grad_tol);
        t.max_iters = c.max_iters.unwrap_or(t.max_iters);
        t.quad_tol = c.quad_tol.unwrap_or(t.quad_tol);
        cfg.tolerances = Some(t);
    }
    if let Some(out) = &c.out {
        cfg.out = Some(out.display().to_string());
    }
    if let Ok(v) = std::env::var("NONLOC_SEED") {
        let seed: u64 = v
            .trim()
            .parse()
            .map_err(|_| CliError::Validation(format!("NONLOC_SEED={v:?} is not an unsigned integer")))?;
        cfg.seed = Some(seed);
        if cfg.seeds.is_some() {
            cfg.seeds = Some(vec![seed]);
        }
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<String, CliError> {
    let c = &cli.common;
    if let Some(jobs) = c.jobs {
        if jobs == 0 {
            return Err(CliError::Validation("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Validation(format!("--jobs: {e}")))?;
    }
    let base = match &c.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
            parse_config(&text)?
        }
        None => RunConfig::default(),
    };
    let cfg = merge(cli.command, c, base)?;
    config::validate(&serde_json::to_value(&cfg).expect("config serializes"))?;
    let canonical = cfg.canonical()?;
    let out = match cli.command {
        Command::Symbol => commands::symbol(&canonical),
        Command::Apply => commands::apply(&canonical),
        Command::Energy => commands::energy(&canonical),
        Command::Rearrange => commands::rearrange(&canonical),
        Command::PolyaSzego => commands::polya_szego(&canonical),
        Command::Riesz => commands::riesz(&canonical),
        Command::Minimize => commands::minimize(&canonical),
        Command::Maxprinciple => commands::maxprinciple(&canonical),
        Command::Regularity => commands::regularity(&canonical),
        Command::KernelClass => commands::kernel_class(&canonical),
        Command::DtnCheck => commands::dtn_check(&canonical),
    }?;
    let dir = PathBuf::from(cfg.out.as_deref().unwrap_or("nonloc-out"));
    let text = write_report(&dir, cli.command.name(), &canonical, &out)?;
    match out.failure {
        Some(f) => Err(f),
        None => Ok(text),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("nonloc: {e}");
            e.exit_code()
        }
    }
}
