use std::f64::consts::PI;

use nonloc_core::analysis::regularity_verdict;
use nonloc_core::circle::{
    dtn_multiplier, dtn_poisson, energy_identity_check, half_lap_pv_circle, wrapped_identity_check,
    CircleFunction, DEFAULT_DELTAS,
};
use nonloc_core::energy::{energy as lagrangian, seminorm_sq_realspace, Nonlinearity};
use nonloc_core::kernels::{classify_kernel, wrap_kernel};
use nonloc_core::minimize::{max_principle_probe, minimize as run_minimize, probe_family, InitialGuess, MinimizeConfig};
use nonloc_core::operator::{apply_pv, apply_spectral, symbol_of_kernel, PvOptions};
use nonloc_core::rearrange::{polya_szego_check, rearrange_periodic, riesz_circle_check};
use nonloc_core::{Kernel, PeriodicFunction, PeriodicGrid};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{FunctionSpec, RunConfig};
use crate::error::CliError;
use crate::output::{Output, Table};

type Outcome = Result<Output, CliError>;

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report serializes")
}

fn done(result: Value, tables: Vec<Table>) -> Outcome {
    Ok(Output {
        result,
        tables,
        failure: None,
    })
}

fn kernel(cfg: &RunConfig) -> Result<Kernel, CliError> {
    let field = cfg
        .kernel
        .as_ref()
        .ok_or_else(|| CliError::Validation("this command needs a kernel (--kernel or \"kernel\")".into()))?;
    Ok(field.normalize()?.build(Some(cfg.grid_spec().half_period))?)
}

fn function(cfg: &RunConfig, grid: PeriodicGrid) -> Result<PeriodicFunction, CliError> {
    let default = FunctionSpec::Cos {
        k: 1,
        amplitude: 1.0,
        shift: 0.0,
    };
    cfg.function.as_ref().unwrap_or(&default).build(grid, cfg.seed)
}

fn nonlinearity(cfg: &RunConfig) -> Result<Nonlinearity, CliError> {
    match &cfg.nonlinearity {
        Some(n) => n.build(cfg.p),
        None => Ok(Nonlinearity::new(Default::default(), None)?),
    }
}

fn sample_columns(grid: &PeriodicGrid, name: &str, header: Vec<&'static str>, cols: &[&[f64]]) -> Table {
    let mut t = Table::new(name, header);
    for j in 0..grid.len() {
        let mut row = vec![grid.node(j)];
        row.extend(cols.iter().map(|c| c[j]));
        t.rows.push(row);
    }
    t
}

pub fn symbol(cfg: &RunConfig) -> Outcome {
    let grid = cfg.grid_spec().build()?;
    let k = kernel(cfg)?;
    let sym = symbol_of_kernel(&k, &grid, cfg.tolerances().quad_tol)?;
    let mut t = Table::new("symbol", vec!["k", "xi", "ell"]);
    for (k, xi, ell) in sym.rows() {
        t.rows.push(vec![k as f64, xi, ell]);
    }
    let max = sym.values().iter().copied().fold(0.0, f64::max);
    done(
        json!({
            "family": k.family_name(),
            "s": k.s(),
            "provenance": sym.provenance(),
            "modes": sym.values().len(),
            "nonnegative": sym.is_nonnegative(),
            "ell_max": max,
        }),
        vec![t],
    )
}

pub fn apply(cfg: &RunConfig) -> Outcome {
    let grid = cfg.grid_spec().build()?;
    let k = kernel(cfg)?;
    let u = function(cfg, grid)?;
    let sym = symbol_of_kernel(&k, &grid, cfg.tolerances().quad_tol)?;
    let lu = apply_spectral(&sym, &u)?;
    let probes = cfg.pv_probes.unwrap_or(0);
    let l = grid.half_period();
    let opts = PvOptions::default();
    let pv: Vec<Value> = (0..probes)
        .into_par_iter()
        .map(|j| {
            let x = -l + 2.0 * l * (j as f64 + 0.5) / probes as f64;
            let r = apply_pv(&k, &u, x, &opts)?;
            let spectral = lu.eval(x);
            Ok(json!({"x": x, "pv": r.value, "spectral": spectral, "difference": (r.value - spectral).abs(), "stable": r.stable}))
        })
        .collect::<Result<_, CliError>>()?;
    let worst = pv
        .iter()
        .map(|v| v["difference"].as_f64().unwrap_or(f64::NAN))
        .fold(0.0, f64::max);
    let table = sample_columns(&grid, "apply", vec!["x", "u", "Lu"], &[u.samples(), lu.samples()]);
    done(
        json!({
            "family": k.family_name(),
            "l2_norm_u": u.l2_norm(),
            "l2_norm_Lu": lu.l2_norm(),
            "mean_Lu": lu.mean(),
            "pv_checks": pv,
            "pv_max_difference": if probes > 0 { Some(worst) } else { None },
        }),
        vec![table],
    )
}

pub fn energy(cfg: &RunConfig) -> Outcome {
    let grid = cfg.grid_spec().build()?;
    let k = kernel(cfg)?;
    let u = function(cfg, grid)?;
    let nl = nonlinearity(cfg)?;
    let tol = cfg.tolerances();
    let sym = symbol_of_kernel(&k, &grid, tol.quad_tol)?;
    let rep = lagrangian(&u, &sym, &nl)?;
    let wk = wrap_kernel(&k, &grid, tol.wrap_tol)?;
    let real = seminorm_sq_realspace(&wk, &u)?;
    let table = sample_columns(
        &grid,
        "energy_gradient",
        vec!["x", "u", "gradient"],
        &[u.samples(), rep.gradient.samples()],
    );
    done(
        json!({
            "kinetic": rep.kinetic,
            "potential": rep.potential,
            "total": rep.total,
            "constraint": rep.constraint,
            "grad_norm": rep.grad_norm,
            "seminorm_sq_fourier": 2.0 * rep.kinetic,
            "seminorm_sq_realspace": real,
        }),
        vec![table],
    )
}

fn sorted_abs(v: &[f64]) -> Vec<f64> {
    let mut a: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    a.sort_by(f64::total_cmp);
    a
}

pub fn rearrange(cfg: &RunConfig) -> Outcome {
    let grid = cfg.grid_spec().build()?;
    let u = function(cfg, grid)?;
    let r = rearrange_periodic(&u);
    let table = sample_columns(&grid, "rearrange", vec!["x", "u", "u_star"], &[u.samples(), r.samples()]);
    done(
        json!({
            "l2_before": u.l2_norm(),
            "l2_after": r.l2_norm(),
            "max_before": u.max_abs(),
            "max_after": r.max_abs(),
            "equimeasurable": sorted_abs(u.samples()) == sorted_abs(r.samples()),
        }),
        vec![table],
    )
}

pub fn polya_szego(cfg: &RunConfig) -> Outcome {
    let grid = cfg.grid_spec().build()?;
    let k = kernel(cfg)?;
    let u = function(cfg, grid)?;
    let rep = polya_szego_check(&k, &u)?;
    let r = rearrange_periodic(&u);
    let table = sample_columns(&grid, "polya_szego", vec!["x", "u", "u_star"], &[u.samples(), r.samples()]);
    let mut result = to_value(&rep);
    result["family"] = json!(k.family_name());
    done(result, vec![table])
}

pub fn riesz(cfg: &RunConfig) -> Outcome {
    let grid = cfg.grid_spec().build()?;
    let l = grid.half_period();
    let (f, g, h) = match &cfg.riesz {
        Some(r) => (
            r.f.build(grid, cfg.seed)?,
            r.g.build(grid, cfg.seed)?,
            r.h.build(grid, cfg.seed)?,
        ),
        None => {
            let seed = cfg.seed.unwrap_or(7);
            let f = InitialGuess::Random { seed }.build(grid)?.map(f64::abs);
            let h = InitialGuess::Random { seed: seed + 1 }.build(grid)?.map(f64::abs);
            let g = PeriodicFunction::from_fn(grid, |x| 1.0 + (PI * x / l).cos());
            (f, g, h)
        }
    };
    let rep = riesz_circle_check(&f, &g, &h, cfg.shifts.unwrap_or(grid.len()))?;
    let table = sample_columns(&grid, "riesz", vec!["x", "f", "g", "h"], &[f.samples(), g.samples(), h.samples()]);
    done(to_value(&rep), vec![table])
}

pub fn minimize(cfg: &RunConfig) -> Outcome {
    let grid = cfg.grid_spec().build()?;
    let k = kernel(cfg)?;
    let nl = match &cfg.nonlinearity {
        Some(n) => n.build(cfg.p)?,
        None => Nonlinearity::benjamin_ono(cfg.p.unwrap_or(2.0))?,
    };
    if nl.constraint.is_some() != cfg.c.is_some() {
        return Err(CliError::Validation(
            "the constraint level \"c\" must be given exactly when the nonlinearity has a constraint".into(),
        ));
    }
    let tol = cfg.tolerances();
    let sym = symbol_of_kernel(&k, &grid, tol.quad_tol)?;
    let starts: Vec<(Option<u64>, InitialGuess)> = match (&cfg.seeds, &cfg.initial, cfg.seed) {
        (Some(seeds), _, _) => seeds.iter().map(|&s| (Some(s), InitialGuess::Random { seed: s })).collect(),
        (None, Some(init), _) => vec![(None, init.clone())],
        (None, None, Some(s)) => vec![(Some(s), InitialGuess::Random { seed: s })],
        (None, None, None) => vec![(None, InitialGuess::Default)],
    };
    let runs: Vec<_> = starts
        .par_iter()
        .map(|(seed, init)| {
            let mut mc = MinimizeConfig::new(sym.clone(), nl.clone(), cfg.c);
            mc.initial = init.clone();
            mc.grad_tol = tol.grad_tol;
            mc.max_iters = tol.max_iters;
            run_minimize(&mc).map(|r| (*seed, r))
        })
        .collect::<Result<_, _>>()?;
    let mut profile = Table::new("minimize_profile", vec!["run", "x", "u"]);
    let mut trace = Table::new("minimize_energy_trace", vec!["run", "iteration", "energy"]);
    let mut results = Vec::new();
    let mut unconverged = Vec::new();
    for (i, (seed, r)) in runs.iter().enumerate() {
        for (j, v) in r.u.samples().iter().enumerate() {
            profile.rows.push(vec![i as f64, grid.node(j), *v]);
        }
        for (it, e) in r.energy_trace.iter().enumerate() {
            trace.rows.push(vec![i as f64, it as f64, *e]);
        }
        if !r.converged {
            unconverged.push(i);
        }
        let mut v = to_value(r);
        v["run"] = json!(i);
        v["seed"] = json!(seed);
        results.push(v);
    }
    let failure = (!unconverged.is_empty()).then(|| {
        CliError::Numerical(format!(
            "runs {unconverged:?} did not reach grad_tol = {:e} within {} iterations",
            tol.grad_tol, tol.max_iters
        ))
    });
    Ok(Output {
        result: json!({ "family": k.family_name(), "runs": results }),
        tables: vec![profile, trace],
        failure,
    })
}

pub fn maxprinciple(cfg: &RunConfig) -> Outcome {
    let grid = cfg.grid_spec().build()?;
    let k = kernel(cfg)?;
    let m = cfg.m.unwrap_or(2);
    let l = grid.half_period();
    let v = match &cfg.function {
        Some(f) => f.build(grid, cfg.seed)?,
        None => probe_family(grid, m),
    };
    let points: Vec<f64> = match cfg.x0 {
        Some(x) => vec![x],
        None if m >= 2 => (1..m).map(|j| j as f64 * l / m as f64).collect(),
        None => vec![0.5 * l],
    };
    let opts = PvOptions::default();
    let probes: Vec<_> = points
        .par_iter()
        .map(|&x0| max_principle_probe(&k, &v, x0, &opts))
        .collect::<Result<_, _>>()?;
    let mut t = Table::new("maxprinciple", vec!["x0", "value", "stable"]);
    for p in &probes {
        t.rows.push(vec![p.x0, p.value, if p.stable { 1.0 } else { 0.0 }]);
    }
    let positive = probes.iter().all(|p| p.value > 0.0);
    done(
        json!({ "family": k.family_name(), "m": m, "probes": to_value(&probes), "all_positive": positive }),
        vec![t],
    )
}

pub fn regularity(cfg: &RunConfig) -> Outcome {
    let s = cfg
        .s
        .ok_or_else(|| CliError::Validation("regularity needs --s".into()))?;
    let beta = cfg
        .beta
        .ok_or_else(|| CliError::Validation("regularity needs --beta".into()))?;
    let v = regularity_verdict(s, beta)?;
    let mut t = Table::new("regularity_bootstrap", vec!["k", "beta_k", "exponent"]);
    for (k, (b, e)) in v.bootstrap_sums.iter().zip(&v.bootstrap_trace).enumerate() {
        t.rows.push(vec![k as f64, *b, *e]);
    }
    done(to_value(&v), vec![t])
}

pub fn kernel_class(cfg: &RunConfig) -> Outcome {
    let k = kernel(cfg)?;
    let l = cfg.grid_spec().half_period;
    let tg = cfg.t_grid.unwrap_or(crate::config::TGrid {
        min: 1e-2,
        max: 1e2,
        points: 400,
    });
    if !(tg.min < tg.max) {
        return Err(CliError::Validation("t_grid needs min < max".into()));
    }
    let ratio = (tg.max / tg.min).ln() / (tg.points - 1) as f64;
    let ts: Vec<f64> = (0..tg.points).map(|i| tg.min * (ratio * i as f64).exp()).collect();
    let rep = classify_kernel(&k, &ts, l)?;
    let mut t = Table::new("kernel_class", vec!["t", "K"]);
    for &x in &ts {
        t.rows.push(vec![x, k.eval(x)?]);
    }
    done(to_value(&rep), vec![t])
}

pub fn dtn_check(cfg: &RunConfig) -> Outcome {
    let spec = cfg.grid_spec();
    if cfg.grid.is_some() && (spec.half_period - PI).abs() > 1e-12 {
        return Err(CliError::Validation("dtn-check works on the unit circle: L must be pi".into()));
    }
    let n = cfg.grid.map_or(64, |g| g.n);
    let grid = PeriodicGrid::new(PI, n)?;
    let u = match &cfg.function {
        Some(f) => f.build(grid, cfg.seed)?,
        None => PeriodicFunction::from_fn(grid, |t| t.cos() + 0.5 * (2.0 * t).sin()),
    };
    let u = CircleFunction::from_periodic(u)?;
    let exact = dtn_multiplier(&u);
    let poisson = dtn_poisson(&u, &DEFAULT_DELTAS)?;
    let poisson_err = poisson
        .samples()
        .iter()
        .zip(exact.samples())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let opts = PvOptions::default();
    let pv_err = (0..32)
        .into_par_iter()
        .map(|j| {
            let x = -PI + 2.0 * PI * (j as f64 + 0.25) / 32.0;
            half_lap_pv_circle(&u, x, &opts).map(|r| (r.value - exact.eval(x)).abs())
        })
        .collect::<Result<Vec<f64>, _>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let mut wrapped_gap: f64 = 0.0;
    for j in 0..64 {
        let t = 0.1 + (2.0 * PI - 0.2) * j as f64 / 63.0;
        wrapped_gap = wrapped_gap.max(wrapped_identity_check(t, 100_000)?.gap);
    }
    let e = energy_identity_check(&u)?;
    let energy_spread = [e.e_line, e.e_disk, e.e_circle]
        .iter()
        .flat_map(|a| [e.e_line, e.e_disk, e.e_circle].map(|b| (a - b).abs()))
        .fold(0.0, f64::max);
    let table = sample_columns(
        &grid,
        "dtn_check",
        vec!["theta", "u", "dtn_multiplier", "dtn_poisson"],
        &[u.samples(), exact.samples(), poisson.samples()],
    );
    done(
        json!({
            "poisson": {"max_error": poisson_err, "tolerance": 1e-6, "pass": poisson_err < 1e-6},
            "principal_value": {"probes": 32, "max_error": pv_err, "tolerance": 1e-5, "pass": pv_err < 1e-5},
            "wrapped_identity": {"points": 64, "max_gap": wrapped_gap, "tolerance": 1e-10, "pass": wrapped_gap < 1e-10},
            "energy_identity": {"values": to_value(&e), "max_spread": energy_spread, "tolerance": 1e-4, "pass": energy_spread < 1e-4},
        }),
        vec![table],
    )
}
