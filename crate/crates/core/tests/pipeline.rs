//! Config through steady states, stability and short transients.

use hydrounit::config::Config;
use hydrounit::equilibria::{balance_curves, operating_equilibrium};
use hydrounit::stability::{stability_sweep, JacobianForm, Stability};
use hydrounit::transient::{integrate_with, run_scenario, IntegrationConfig, RegimeKind, Scenario, StartMode};

#[test]
fn defaults_validate_and_roundtrip_through_json() {
    let c = Config::defaults();
    c.validate().unwrap();
    let again = Config::from_json_str(&c.to_json_pretty()).unwrap();
    assert_eq!(again.digest(), c.digest());
}

#[test]
fn balance_curve_is_gapless_over_the_default_grid() {
    let c = Config::defaults();
    let p = c.unit_params().unwrap();
    let curve = balance_curves(&c.stability.equilibria_grid.values(), &p, &c.tolerances);
    assert!(curve.points.iter().all(|q| q.error.is_none()));
    assert!(curve.points.iter().all(|q| q.residual < c.tolerances.equilibrium_residual));
}

/// Peak slip deviation over the second half of a run from a kicked steady
/// state, with the horizon set by the eigen margin so the trend is visible.
fn late_slip(gamma: f64, kick: f64) -> (Stability, f64) {
    let c = Config::defaults();
    let p = c.unit_params().unwrap().with_deadband(0.0);
    let sweep = stability_sweep(&[gamma], &p, JacobianForm::Exact(c.stability.governor_row), &c.tolerances).unwrap();
    let v = sweep.operating().next().unwrap().eigen;
    let eq = operating_equilibrium(gamma, &p, &c.tolerances).unwrap();
    let mut x0 = eq.state;
    x0.s += kick;
    let t_end = (6.0 / v.margin.abs()).min(400.0);
    let cfg = IntegrationConfig { t_end, t_discard: 0.5 * t_end, ..c.integration };
    let traj = integrate_with(&x0, &p.with_gamma(gamma), eq.mu_0, &cfg).unwrap();
    let late = traj.component(1).iter().skip(traj.times.len() / 2).fold(0.0f64, |m, v| m.max(v.abs()));
    (v.stable, late)
}

#[test]
fn stable_operating_point_settles_after_a_kick() {
    let (verdict, late) = late_slip(1.0, 1e-4);
    assert_eq!(verdict, Stability::Stable);
    assert!(late < 1e-5, "{late}");
}

#[test]
fn unstable_operating_point_grows_away() {
    let (verdict, late) = late_slip(0.85, 1e-6);
    assert_eq!(verdict, Stability::Unstable);
    assert!(late > 1e-5, "{late}");
}

#[test]
fn cold_rated_start_reaches_equilibrium() {
    let c = Config::defaults();
    let p = c.unit_params().unwrap();
    let mut opts = c.scenario_options();
    opts.start = StartMode::Cold;
    let out = run_scenario(&Scenario::Rated, &p, &c.integration, &opts).unwrap();
    assert_eq!(out.report.kind, RegimeKind::Equilibrium);
}
