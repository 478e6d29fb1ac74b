//! Fixed-step time integration, regime classification and voltage-step scenarios.

mod classify;
mod scenario;

pub use classify::{classify_regime, measure_regime, schmitt_peaks, RegimeKind, RegimeReport};
pub use scenario::{
    amplitude_argmax, amplitude_sweep, cold_start, consistency_check, run_chain, run_scenario, AmplitudePoint,
    ConsistencyRow, Expectation, Scenario, ScenarioOptions, ScenarioOutcome, StartMode, CONSISTENCY_MARGIN,
};

use serde::{Deserialize, Serialize};

use crate::equilibria::solve_mu0;
use crate::error::{Error, Result};
use crate::model::rhs_array;
use crate::params::UnitParams;
use crate::state::{State, DIM, MU, SLIP};

/// Largest state magnitude accepted before a run is declared divergent.
pub const DIVERGENCE_BOUND: f64 = 1e9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrationConfig {
    pub dt: f64,
    pub t_end: f64,
    pub t_discard: f64,
    pub record_stride: usize,
    pub clamp_mu: bool,
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        Self { dt: 2e-4, t_end: 1000.0, t_discard: 600.0, record_stride: 50, clamp_mu: true }
    }
}

impl IntegrationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt <= 1e-3) {
            return Err(Error::param("integration.dt", "must lie in (0, 1e-3]"));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::param("integration.t_end", "must be positive and finite"));
        }
        if !(self.t_discard >= 0.0 && self.t_discard < self.t_end) {
            return Err(Error::param("integration.t_discard", "must lie in [0, t_end)"));
        }
        if self.record_stride == 0 {
            return Err(Error::param("integration.record_stride", "must be at least 1"));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    StopHit,
    StopRelease,
    DeadbandCross,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub events: Vec<Event>,
    /// Operating vane opening the run was integrated with.
    pub mu0: f64,
    pub gamma: f64,
}

impl Trajectory {
    pub fn last(&self) -> &State {
        self.states.last().expect("trajectory has at least the initial state")
    }

    /// Values of one state component over time.
    pub fn component(&self, index: usize) -> Vec<f64> {
        self.states.iter().map(|s| s.to_array()[index]).collect()
    }
}

fn stop_state(mu_delta: f64, lo: f64, hi: f64) -> i8 {
    if mu_delta <= lo {
        -1
    } else if mu_delta >= hi {
        1
    } else {
        0
    }
}

fn band_state(s: f64, half: f64) -> i8 {
    if s > half {
        1
    } else if s < -half {
        -1
    } else {
        0
    }
}

/// Integrate at the voltage in `params`, with the operating opening solved from it.
pub fn integrate(x0: &State, params: &UnitParams, cfg: &IntegrationConfig) -> Result<Trajectory> {
    let (mu0, _) = solve_mu0(params.gamma, params);
    integrate_with(x0, params, mu0, cfg)
}

/// Classical RK4 with the vane deviation clamped to the stroke after every step.
pub fn integrate_with(x0: &State, params: &UnitParams, mu0: f64, cfg: &IntegrationConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let mut x = x0.to_array();
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("initial state is not finite".into()));
    }
    if !(mu0 + x[MU] > 0.0) {
        return Err(Error::Domain(format!("initial vane opening {} is not positive", mu0 + x[MU])));
    }
    let gov = &params.gov;
    let (lo, hi) = (gov.mu_min - mu0, gov.mu_max - mu0);
    let half = 0.5 * gov.z;
    let dt = cfg.dt;
    let n = cfg.steps();
    let mut events = Vec::new();

    if cfg.clamp_mu && (x[MU] < lo || x[MU] > hi) {
        x[MU] = x[MU].clamp(lo, hi);
        events.push(Event { time: 0.0, kind: EventKind::StopHit });
    }
    let mut stop = stop_state(x[MU], lo, hi);
    let mut band = band_state(x[SLIP], half);

    let cap = n / cfg.record_stride + 1;
    let mut times = Vec::with_capacity(cap);
    let mut states = Vec::with_capacity(cap);
    times.push(0.0);
    states.push(State::from_array(&x));

    let mut y = [0.0; DIM];
    for step in 1..=n {
        let k1 = rhs_array(&x, params, mu0);
        let k1 = k1.map_err(|e| blowup(e, step, dt))?;
        for i in 0..DIM {
            y[i] = x[i] + 0.5 * dt * k1[i];
        }
        let k2 = rhs_array(&y, params, mu0).map_err(|e| blowup(e, step, dt))?;
        for i in 0..DIM {
            y[i] = x[i] + 0.5 * dt * k2[i];
        }
        let k3 = rhs_array(&y, params, mu0).map_err(|e| blowup(e, step, dt))?;
        for i in 0..DIM {
            y[i] = x[i] + dt * k3[i];
        }
        let k4 = rhs_array(&y, params, mu0).map_err(|e| blowup(e, step, dt))?;
        for i in 0..DIM {
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if cfg.clamp_mu {
            x[MU] = x[MU].clamp(lo, hi);
        }
        let t = step as f64 * dt;
        if let Some(component) = x.iter().position(|v| !v.is_finite() || v.abs() > DIVERGENCE_BOUND) {
            return Err(Error::Divergence { time: t, component });
        }

        let now = stop_state(x[MU], lo, hi);
        if now != stop {
            let kind = if now == 0 { EventKind::StopRelease } else { EventKind::StopHit };
            events.push(Event { time: t, kind });
            stop = now;
        }
        if gov.z > 0.0 {
            let now = band_state(x[SLIP], half);
            if now != band {
                events.push(Event { time: t, kind: EventKind::DeadbandCross });
                band = now;
            }
        }
        if step % cfg.record_stride == 0 {
            times.push(t);
            states.push(State::from_array(&x));
        }
    }
    Ok(Trajectory { times, states, events, mu0, gamma: params.gamma })
}

/// Domain failures mid-run mean the state left the physical region.
fn blowup(e: Error, step: usize, dt: f64) -> Error {
    match e {
        Error::Domain(_) => Error::Divergence { time: step as f64 * dt, component: SLIP },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::operating_equilibrium;
    use crate::params::fixtures::unit;
    use crate::tolerances::Tolerances;

    #[test]
    fn equilibrium_persists() {
        let p = unit();
        let eq = operating_equilibrium(1.0, &p, &Tolerances::default()).unwrap();
        let cfg = IntegrationConfig { t_end: 100.0, t_discard: 50.0, ..Default::default() };
        let tr = integrate_with(&eq.state, &p, eq.mu_0, &cfg).unwrap();
        let (a, b) = (eq.state.to_array(), tr.last().to_array());
        for i in 0..DIM {
            assert!((a[i] - b[i]).abs() <= 1e-6 * a[i].abs().max(1.0), "component {i}: {} vs {}", a[i], b[i]);
        }
    }

    #[test]
    fn uniform_record_times() {
        let p = unit();
        let eq = operating_equilibrium(1.0, &p, &Tolerances::default()).unwrap();
        let cfg = IntegrationConfig { t_end: 1.0, t_discard: 0.5, record_stride: 10, ..Default::default() };
        let tr = integrate_with(&eq.state, &p, eq.mu_0, &cfg).unwrap();
        assert_eq!(tr.times.len(), 501);
        for w in tr.times.windows(2) {
            assert!((w[1] - w[0] - 10.0 * cfg.dt).abs() < 1e-12);
        }
    }

    #[test]
    fn overdriven_vanes_are_clamped_at_start() {
        let p = unit();
        let eq = operating_equilibrium(1.0, &p, &Tolerances::default()).unwrap();
        let mut x0 = eq.state;
        x0.mu_delta = 2.0;
        let cfg = IntegrationConfig { t_end: 0.1, t_discard: 0.05, ..Default::default() };
        let tr = integrate_with(&x0, &p, eq.mu_0, &cfg).unwrap();
        assert_eq!(tr.states[0].mu_delta, p.gov.mu_max - eq.mu_0);
        assert_eq!(tr.events[0], Event { time: 0.0, kind: EventKind::StopHit });
        for s in &tr.states {
            assert!(s.mu_delta <= p.gov.mu_max - eq.mu_0 && s.mu_delta >= p.gov.mu_min - eq.mu_0);
        }
    }

    #[test]
    fn invalid_config_is_rejected() {
        let p = unit();
        let x0 = State::default();
        let bad = IntegrationConfig { dt: 0.01, ..Default::default() };
        assert!(integrate_with(&x0, &p, 0.5, &bad).unwrap_err().is_input_error());
        let bad = IntegrationConfig { t_discard: 2000.0, ..Default::default() };
        assert!(integrate_with(&x0, &p, 0.5, &bad).is_err());
    }

    #[test]
    fn richardson_ratio_is_fourth_order() {
        let p = unit().with_deadband(0.0);
        let eq = operating_equilibrium(0.9, &p, &Tolerances::default()).unwrap();
        let mut x0 = eq.state;
        x0.theta_delta += 0.05;
        x0.s += 1e-3;
        let run = |dt: f64| {
            let cfg = IntegrationConfig { dt, t_end: 1.0, t_discard: 0.5, record_stride: 1, clamp_mu: true };
            integrate_with(&x0, &p, eq.mu_0, &cfg).unwrap().last().to_array()
        };
        let (a, b, c) = (run(1e-3), run(5e-4), run(2.5e-4));
        let diff = |u: &[f64; DIM], v: &[f64; DIM]| (0..DIM).map(|i| (u[i] - v[i]).abs() / u[i].abs().max(1.0)).fold(0.0, f64::max);
        let ratio = diff(&a, &b) / diff(&b, &c);
        assert!((12.0..=20.0).contains(&ratio), "{ratio}");
    }
}
