use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use hydrounit::checks::{coefficient_check, derived_regression, flux_roundtrip, jacobian_fidelity};
use hydrounit::config::{Config, Grid};
use hydrounit::equilibria::{balance_curves, equilibria_at, operating_equilibrium};
use hydrounit::model::GovernorRow;
use hydrounit::stability::{stability_sweep, JacobianForm, Method};
use hydrounit::state::{State, NAMES, SLIP};
use hydrounit::transient::{amplitude_argmax, amplitude_sweep, run_scenario, RegimeKind, Scenario, StartMode};
use hydrounit::{Error, Result};

use crate::output::{num, opt, Artifacts};
use crate::svg::{plot, Series};

/// Upper bound on samples drawn in a trajectory plot.
const PLOT_POINTS: usize = 4000;

pub struct Context {
    pub config: Config,
    pub out: std::path::PathBuf,
    pub seed: u64,
}

impl Context {
    fn artifacts(&self) -> Result<Artifacts> {
        Artifacts::new(&self.out)
    }

    fn finish(&self, mut a: Artifacts, command: &str) -> Result<()> {
        a.json("config.json", &self.config)?;
        let m = a.finish(command, self.config.digest(), self.seed)?;
        for o in &m.outputs {
            eprintln!("wrote {} ({} bytes)", Path::new(&self.out).join(&o.file).display(), o.bytes);
        }
        Ok(())
    }
}

pub fn equilibria(ctx: &Context, grid: Option<Grid>) -> Result<()> {
    let cfg = &ctx.config;
    let params = cfg.unit_params()?;
    let gammas = grid.unwrap_or(cfg.stability.equilibria_grid).values();
    let curve = balance_curves(&gammas, &params, &cfg.tolerances);
    let mut a = ctx.artifacts()?;
    let rows: Vec<Vec<String>> = curve
        .points
        .iter()
        .map(|p| vec![num(p.gamma), num(p.mu0), p.saturated.to_string(), num(p.theta), num(p.power), num(p.residual)])
        .collect();
    a.csv("equilibria.csv", "equilibria", &["gamma", "mu0", "saturated", "theta", "power", "residual"], &rows)?;

    let mut branches = Vec::new();
    for &g in &gammas {
        let (eqs, op) = equilibria_at(g, &params, &cfg.tolerances);
        for (i, e) in eqs.iter().enumerate() {
            match e {
                Ok(e) => branches.push(vec![num(g), i.to_string(), (op == Some(i)).to_string(), num(e.theta), num(e.residual_norm), String::new()]),
                Err(err) => branches.push(vec![num(g), i.to_string(), (op == Some(i)).to_string(), String::new(), String::new(), err.to_string()]),
            }
        }
    }
    a.csv("branches.csv", "branches", &["gamma", "branch", "operating", "theta", "residual", "error"], &branches)?;

    let ok: Vec<_> = curve.points.iter().filter(|p| p.error.is_none()).collect();
    let theta = Series::line("theta", ok.iter().map(|p| (p.gamma, p.theta)).collect());
    a.write("theta.svg", plot("Operating load angle", "gamma", "theta [rad]", &[theta]).as_bytes())?;
    let power = Series::line("P", ok.iter().map(|p| (p.gamma, p.power)).collect());
    a.write("power.svg", plot("Instantaneous power at the operating point", "gamma", "P", &[power]).as_bytes())?;
    let mu = Series::line("mu0", ok.iter().map(|p| (p.gamma, p.mu0)).collect());
    a.write("mu0.svg", plot("Operating vane opening", "gamma", "mu0", &[mu]).as_bytes())?;
    ctx.finish(a, "equilibria")
}

pub fn stability(ctx: &Context, grid: Option<Grid>, row: Option<GovernorRow>, published: bool) -> Result<()> {
    let cfg = &ctx.config;
    let params = cfg.unit_params()?;
    let gammas = grid.unwrap_or(cfg.stability.grid).values();
    let form = if published { JacobianForm::Published } else { JacobianForm::Exact(row.unwrap_or(cfg.stability.governor_row)) };
    let sweep = stability_sweep(&gammas, &params, form, &cfg.tolerances)?;
    let mut a = ctx.artifacts()?;
    let mut rows = Vec::new();
    for p in &sweep.points {
        for v in [&p.routh, &p.eigen] {
            rows.push(vec![
                num(p.gamma),
                p.branch.to_string(),
                num(p.theta),
                v.method.as_str().to_string(),
                serde_json::to_value(v.stable).unwrap().as_str().unwrap().to_string(),
                num(v.margin),
            ]);
        }
    }
    a.csv("stability.csv", "stability", &["gamma", "branch", "theta", "method", "stable", "margin"], &rows)?;
    let windows = |m: Method| {
        let w = sweep.windows(m);
        json!({
            "contiguous": w.contiguous,
            "windows": w.windows.iter().map(|w| json!({
                "gamma_1": w.lower, "gamma_2": w.upper,
                "lower_open": w.lower_open, "upper_open": w.upper_open,
            })).collect::<Vec<_>>(),
        })
    };
    let summary = json!({
        "form": sweep.form,
        "points": sweep.points.len(),
        "routh_hurwitz": windows(Method::RouthHurwitz),
        "eigen_bound": windows(Method::EigenBound),
        "failures": sweep.failures,
    });
    a.json("stability.json", &summary)?;
    let op = Series::line("operating", sweep.operating().map(|p| (p.gamma, p.eigen.margin)).collect());
    let others = Series::points("other branches", sweep.points.iter().filter(|p| !p.operating).map(|p| (p.gamma, p.eigen.margin)).collect());
    a.write("stability.svg", plot("Largest real part of the spectrum", "gamma", "max Re", &[op, others]).as_bytes())?;
    ctx.finish(a, "stability")
}

pub struct SimulateArgs {
    pub scenario: String,
    pub gamma: Option<f64>,
    pub start: Option<StartMode>,
    pub t_end: Option<f64>,
    pub t_discard: Option<f64>,
    pub perturb: Option<f64>,
}

pub fn simulate(ctx: &Context, args: &SimulateArgs) -> Result<()> {
    let mut cfg = ctx.config.clone();
    if let Some(t) = args.t_end {
        cfg.integration.t_end = t;
        if args.t_discard.is_none() {
            cfg.integration.t_discard = 0.6 * t;
        }
    }
    if let Some(t) = args.t_discard {
        cfg.integration.t_discard = t;
    }
    cfg.integration.validate()?;
    if let Some(s) = args.start {
        cfg.scenario.start = s;
    }
    let params = cfg.unit_params()?;
    let scenario = match (args.scenario.as_str(), args.gamma) {
        ("rated", _) => Scenario::Rated,
        ("reduced-089", _) => Scenario::Reduced089,
        ("reduced-07", _) => Scenario::Reduced07,
        ("custom", Some(gamma)) => {
            let x0 = match args.perturb {
                Some(eps) => {
                    let eq = operating_equilibrium(gamma, &params, &cfg.tolerances)?;
                    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
                    let mut x = eq.state.to_array();
                    for v in x.iter_mut() {
                        *v += eps * v.abs().max(1.0) * rng.random_range(-1.0..1.0);
                    }
                    Some(State::from_array(&x))
                }
                None => None,
            };
            Scenario::Custom { gamma, x0 }
        }
        ("custom", None) => return Err(Error::param("simulate.gamma", "custom scenario needs --gamma")),
        (other, _) => return Err(Error::param("simulate.scenario", format!("unknown scenario `{other}`"))),
    };
    let outcome = run_scenario(&scenario, &params, &cfg.integration, &cfg.scenario_options())?;
    let mut a = ctx.artifacts()?;
    let tr = &outcome.trajectory;
    let mut header = vec!["t"];
    header.extend(NAMES);
    let rows: Vec<Vec<String>> = tr
        .times
        .iter()
        .zip(&tr.states)
        .map(|(t, s)| std::iter::once(num(*t)).chain(s.to_array().iter().map(|v| num(*v))).collect())
        .collect();
    a.csv("trajectory.csv", "trajectory", &header, &rows)?;
    let report = json!({
        "scenario": scenario,
        "gamma": outcome.gamma,
        "mu0": outcome.mu0,
        "report": outcome.report,
        "events": tr.events.len(),
    });
    a.json("regime.json", &report)?;
    let stride = tr.times.len().div_ceil(PLOT_POINTS).max(1);
    let s = Series::line("s", tr.times.iter().zip(&tr.states).step_by(stride).map(|(t, x)| (*t, x.to_array()[SLIP])).collect());
    let title = format!("Slip, gamma = {} ({})", outcome.gamma, outcome.report.kind.as_str());
    a.write("trajectory.svg", plot(&title, "t [s]", "s", &[s]).as_bytes())?;
    eprintln!("regime: {}", outcome.report.kind.as_str());
    ctx.finish(a, "simulate")
}

pub fn amplitude(ctx: &Context, betas: Option<Vec<f64>>, t_end: Option<f64>) -> Result<()> {
    let mut cfg = ctx.config.clone();
    if let Some(b) = betas {
        cfg.scenario.betas = b;
    }
    if let Some(t) = t_end {
        cfg.integration.t_end = t;
        cfg.integration.t_discard = 0.6 * t;
    }
    cfg.validate()?;
    let params = cfg.unit_params()?;
    let points = amplitude_sweep(&cfg.scenario.betas, &params, &cfg.integration, &cfg.scenario_options())?;
    let mut a = ctx.artifacts()?;
    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|p| vec![num(p.beta), p.kind.as_str().to_string(), num(p.amplitude), opt(p.period)])
        .collect();
    a.csv("amplitude.csv", "amplitude", &["beta", "kind", "amplitude_s", "period_s"], &rows)?;
    let summary = json!({
        "argmax_beta": amplitude_argmax(&points),
        "limit_cycles": points.iter().filter(|p| p.kind == RegimeKind::LimitCycle).count(),
        "points": points,
    });
    a.json("amplitude.json", &summary)?;
    let curve = Series::line("peak-to-peak slip", points.iter().map(|p| (p.beta, p.amplitude)).collect());
    a.write("amplitude.svg", plot("Oscillation amplitude against voltage", "beta", "amplitude of s", &[curve]).as_bytes())?;
    ctx.finish(a, "amplitude")
}

pub fn check(ctx: &Context, points: usize) -> Result<()> {
    let cfg = &ctx.config;
    let params = cfg.unit_params()?;
    let tol = &cfg.tolerances;
    let derived = derived_regression(&params, &cfg.reference);
    let consistency = params.check_consistency()?;
    let roundtrip = flux_roundtrip(params.flux(), 10_000, ctx.seed);
    let coefficients = coefficient_check(&params, 1e-3)?;
    let grid = Grid { start: 0.8, end: 1.05, points }.values();
    let jac = jacobian_fidelity(&grid, &params, tol, 1e-6, 1e-5)?;
    let mut a = ctx.artifacts()?;
    let mut flags = Vec::new();
    for j in &jac {
        for f in &j.published_flags {
            flags.push(vec![num(j.gamma), "published".into(), f.row.to_string(), f.col.to_string(), num(f.analytic), num(f.numeric), num(f.relative_error)]);
        }
        for f in &j.exact_flags {
            flags.push(vec![num(j.gamma), "exact".into(), f.row.to_string(), f.col.to_string(), num(f.analytic), num(f.numeric), num(f.relative_error)]);
        }
    }
    a.csv("jacobian_flags.csv", "jacobian-flags", &["gamma", "form", "row", "col", "analytic", "numeric", "relative_error"], &flags)?;
    let summary = json!({
        "derived": derived,
        "derived_consistency": consistency,
        "flux_roundtrip_residual": roundtrip,
        "coefficient_discrepancies": coefficients,
        "jacobian": jac.iter().map(|j| json!({
            "gamma": j.gamma,
            "exact_max_relative_error": j.exact_max_relative_error,
            "published_max_relative_error": j.published_max_relative_error,
            "published_flags": j.published_flags.len(),
        })).collect::<Vec<_>>(),
    });
    a.json("check.json", &summary)?;
    for d in &derived {
        eprintln!("{:5} derived {:.6} table {:.4} {}", d.name, d.derived, d.reference, if d.pass { "ok" } else { "MISMATCH" });
    }
    ctx.finish(a, "check")
}
