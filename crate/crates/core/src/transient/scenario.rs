use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{classify_regime, integrate_with, measure_regime, IntegrationConfig, RegimeKind, RegimeReport, Trajectory};
use crate::equilibria::solve_mu0;
use crate::error::{Error, Result};
use crate::model::GovernorRow;
use crate::params::UnitParams;
use crate::stability::sweep::{operating_verdicts, stability_sweep};
use crate::stability::JacobianForm;
use crate::state::State;
use crate::tolerances::Tolerances;

/// How reduced-voltage runs begin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartMode {
    /// From the end state of the preceding regime, voltage stepped at t = 0.
    Chained,
    /// From the configured initial state.
    Cold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioOptions {
    pub start: StartMode,
    pub initial_state: State,
    pub tolerances: Tolerances,
}

impl Default for ScenarioOptions {
    fn default() -> Self {
        Self { start: StartMode::Chained, initial_state: cold_start(), tolerances: Tolerances::default() }
    }
}

/// Initial state of the rated run: unit slip, everything else zero.
pub fn cold_start() -> State {
    State { s: 1.0, ..State::default() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Rated,
    Reduced089,
    Reduced07,
    /// A voltage step from the rated regime, or a run from `x0` when given.
    Custom { gamma: f64, x0: Option<State> },
}

impl Scenario {
    pub fn gamma(&self) -> f64 {
        match self {
            Scenario::Rated => 1.0,
            Scenario::Reduced089 => 0.89,
            Scenario::Reduced07 => 0.7,
            Scenario::Custom { gamma, .. } => *gamma,
        }
    }

    /// Voltages visited in order when runs are chained.
    pub fn chain(&self) -> Vec<f64> {
        match self {
            Scenario::Rated => vec![1.0],
            Scenario::Reduced089 => vec![1.0, 0.89],
            Scenario::Reduced07 => vec![1.0, 0.89, 0.7],
            Scenario::Custom { gamma, x0: None } => vec![1.0, *gamma],
            Scenario::Custom { gamma, x0: Some(_) } => vec![*gamma],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioOutcome {
    pub gamma: f64,
    pub mu0: f64,
    pub trajectory: Trajectory,
    pub report: RegimeReport,
}

/// Classification that degrades to an unresolved report when peaks are too few.
fn classify_lenient(traj: &Trajectory, cfg: &IntegrationConfig, tol: &Tolerances) -> Result<RegimeReport> {
    match classify_regime(traj, cfg.t_discard, tol) {
        Err(Error::InsufficientData(_)) => measure_regime(traj, cfg.t_discard),
        other => other,
    }
}

/// Run one voltage after another, each from the previous end state. The vane
/// position is held across a step: the deviation absorbs the change of the
/// operating opening.
pub fn run_chain(gammas: &[f64], x0: &State, params: &UnitParams, cfg: &IntegrationConfig, tol: &Tolerances) -> Result<Vec<ScenarioOutcome>> {
    let mut out: Vec<ScenarioOutcome> = Vec::with_capacity(gammas.len());
    let mut x = *x0;
    for &gamma in gammas {
        let p = params.with_gamma(gamma);
        let (mu0, _) = solve_mu0(gamma, &p);
        if let Some(prev) = out.last() {
            x = *prev.trajectory.last();
            x.mu_delta += prev.mu0 - mu0;
        }
        let trajectory = integrate_with(&x, &p, mu0, cfg)?;
        let report = classify_lenient(&trajectory, cfg, tol)?;
        out.push(ScenarioOutcome { gamma, mu0, trajectory, report });
    }
    Ok(out)
}

pub fn run_scenario(scenario: &Scenario, params: &UnitParams, cfg: &IntegrationConfig, opts: &ScenarioOptions) -> Result<ScenarioOutcome> {
    let tol = &opts.tolerances;
    let (gammas, x0) = match (scenario, opts.start) {
        (Scenario::Custom { gamma, x0: Some(x) }, _) => (vec![*gamma], *x),
        (s, StartMode::Cold) => (vec![s.gamma()], opts.initial_state),
        (s, StartMode::Chained) => (s.chain(), opts.initial_state),
    };
    let mut runs = run_chain(&gammas, &x0, params, cfg, tol)?;
    Ok(runs.pop().expect("chain is never empty"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudePoint {
    pub beta: f64,
    pub kind: RegimeKind,
    /// Peak-to-peak slip; zero for an equilibrium, NaN when the run failed.
    pub amplitude: f64,
    pub period: Option<f64>,
    pub error: Option<String>,
}

/// Slip amplitude after a step from the rated regime to each voltage in the grid.
pub fn amplitude_sweep(betas: &[f64], params: &UnitParams, cfg: &IntegrationConfig, opts: &ScenarioOptions) -> Result<Vec<AmplitudePoint>> {
    if betas.iter().any(|b| !(*b > 0.0 && *b <= 1.2)) {
        return Err(Error::param("amplitude.betas", "every value must lie in (0, 1.2]"));
    }
    if betas.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::param("amplitude.betas", "must be strictly ascending"));
    }
    let tol = &opts.tolerances;
    let rated = match opts.start {
        StartMode::Chained => Some(run_chain(&[1.0], &opts.initial_state, params, cfg, tol)?.remove(0)),
        StartMode::Cold => None,
    };
    let points = betas
        .par_iter()
        .map(|&beta| {
            let run = match &rated {
                Some(r) => {
                    let p = params.with_gamma(beta);
                    let (mu0, _) = solve_mu0(beta, &p);
                    let mut x = *r.trajectory.last();
                    x.mu_delta += r.mu0 - mu0;
                    integrate_with(&x, &p, mu0, cfg).and_then(|t| classify_lenient(&t, cfg, tol))
                }
                None => run_chain(&[beta], &opts.initial_state, params, cfg, tol).map(|mut v| v.remove(0).report),
            };
            match run {
                Ok(rep) => AmplitudePoint {
                    beta,
                    kind: rep.kind,
                    amplitude: if rep.kind == RegimeKind::Equilibrium { 0.0 } else { rep.slip_amplitude() },
                    period: rep.period,
                    error: None,
                },
                Err(e) => AmplitudePoint {
                    beta,
                    kind: RegimeKind::Unresolved,
                    amplitude: f64::NAN,
                    period: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(points)
}

/// Voltage with the largest finite amplitude.
pub fn amplitude_argmax(points: &[AmplitudePoint]) -> Option<f64> {
    points
        .iter()
        .filter(|p| p.amplitude.is_finite())
        .fold(None, |best: Option<&AmplitudePoint>, p| match best {
            Some(b) if b.amplitude >= p.amplitude => Some(b),
            _ => Some(p),
        })
        .map(|p| p.beta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    Settles,
    Oscillates,
    /// Margin too small or too close to a window endpoint to call.
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyRow {
    pub gamma: f64,
    pub margin: f64,
    pub expected: Expectation,
    /// Regime name, or "divergence".
    pub observed: String,
    pub agrees: Option<bool>,
}

/// Margin beyond which the local verdict is expected to show in a transient run.
pub const CONSISTENCY_MARGIN: f64 = 1e-3;

/// Compare the eigen-path verdict of the operating steady state with a run
/// started slightly off it. The Jacobian row follows the governor map of
/// `params`; points within two grid steps of a window endpoint are skipped.
pub fn consistency_check(grid: &[f64], params: &UnitParams, cfg: &IntegrationConfig, tol: &Tolerances, seed: u64) -> Result<Vec<ConsistencyRow>> {
    let form = JacobianForm::Exact(GovernorRow::native(&params.gov));
    let sweep = stability_sweep(grid, params, form, tol)?;
    let step = grid.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let endpoints: Vec<f64> = sweep
        .eigen
        .windows
        .iter()
        .flat_map(|w| {
            let mut e = Vec::new();
            if !w.lower_open {
                e.push(w.lower);
            }
            if !w.upper_open {
                e.push(w.upper);
            }
            e
        })
        .collect();
    let rows = grid
        .par_iter()
        .enumerate()
        .map(|(i, &gamma)| -> Result<ConsistencyRow> {
            let verdict = operating_verdicts(gamma, params, form, tol)?;
            let margin = verdict.eigen.margin;
            let near_edge = endpoints.iter().any(|e| (gamma - e).abs() <= 2.0 * step);
            let expected = if near_edge || margin.abs() <= CONSISTENCY_MARGIN {
                Expectation::Skipped
            } else if margin < 0.0 {
                Expectation::Settles
            } else {
                Expectation::Oscillates
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let eq = crate::equilibria::operating_equilibrium(gamma, params, tol)?;
            let mut x = eq.state.to_array();
            for v in x.iter_mut() {
                *v += 1e-4 * v.abs().max(1.0) * rng.random_range(-1.0..1.0);
            }
            let p = params.with_gamma(gamma);
            let observed = match integrate_with(&State::from_array(&x), &p, eq.mu_0, cfg) {
                Ok(t) => classify_lenient(&t, cfg, tol)?.kind.as_str().to_string(),
                Err(Error::Divergence { .. }) => "divergence".to_string(),
                Err(e) => return Err(e),
            };
            let agrees = match expected {
                Expectation::Skipped => None,
                Expectation::Settles => Some(observed == "equilibrium"),
                Expectation::Oscillates => Some(observed == "limit_cycle" || observed == "divergence"),
            };
            Ok(ConsistencyRow { gamma, margin, expected, observed, agrees })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(rows)
}
