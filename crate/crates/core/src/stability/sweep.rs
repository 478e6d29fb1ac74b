//! Stability table over a voltage grid and the operating-branch instability windows.

use rayon::prelude::*;
use serde::Serialize;

use super::{analytic_jacobian, balanced_norm, classify_eigen, classify_routh, JacobianForm, Method, Stability, StabilityVerdict};
use crate::equilibria::{equilibria_at, operating_equilibrium, Equilibrium};
use crate::error::{Error, Result};
use crate::params::UnitParams;
use crate::tolerances::Tolerances;

/// Both verdicts for one steady state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchVerdicts {
    pub gamma: f64,
    pub branch: usize,
    pub theta: f64,
    pub operating: bool,
    pub saturated: bool,
    pub mu0: f64,
    /// Frobenius norm of the balanced Jacobian.
    pub norm: f64,
    pub routh: StabilityVerdict,
    pub eigen: StabilityVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepFailure {
    pub gamma: f64,
    pub branch: Option<usize>,
    pub message: String,
}

/// A run of unstable operating points. An open end touches the grid edge and was not bisected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window {
    pub lower: f64,
    pub upper: f64,
    pub lower_open: bool,
    pub upper_open: bool,
}

impl Window {
    pub fn contains(&self, gamma: f64) -> bool {
        self.lower <= gamma && gamma <= self.upper
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodWindows {
    pub method: Method,
    pub windows: Vec<Window>,
    /// At most one window: the unstable grid points form a single run.
    pub contiguous: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilitySweep {
    pub form: JacobianForm,
    pub points: Vec<BranchVerdicts>,
    pub failures: Vec<SweepFailure>,
    pub routh: MethodWindows,
    pub eigen: MethodWindows,
}

impl StabilitySweep {
    pub fn operating(&self) -> impl Iterator<Item = &BranchVerdicts> {
        self.points.iter().filter(|p| p.operating)
    }

    pub fn verdicts(&self) -> Vec<StabilityVerdict> {
        self.points.iter().flat_map(|p| [p.routh, p.eigen]).collect()
    }

    pub fn windows(&self, method: Method) -> &MethodWindows {
        match method {
            Method::RouthHurwitz => &self.routh,
            _ => &self.eigen,
        }
    }
}

fn verdicts_for(eq: &Equilibrium, operating: bool, params: &UnitParams, form: JacobianForm, tol: &Tolerances) -> Result<BranchVerdicts> {
    let j = analytic_jacobian(eq, params, form)?;
    Ok(BranchVerdicts {
        gamma: eq.gamma,
        branch: eq.theta_branch,
        theta: eq.theta,
        operating,
        saturated: eq.saturated,
        mu0: eq.mu_0,
        norm: balanced_norm(&j),
        routh: classify_routh(&j, tol, eq.gamma, eq.theta_branch)?,
        eigen: classify_eigen(&j, tol, eq.gamma, eq.theta_branch)?,
    })
}

/// Verdicts for the operating steady state at one voltage.
pub fn operating_verdicts(gamma: f64, params: &UnitParams, form: JacobianForm, tol: &Tolerances) -> Result<BranchVerdicts> {
    let eq = operating_equilibrium(gamma, params, tol)?;
    verdicts_for(&eq, true, params, form, tol)
}

fn at_gamma(gamma: f64, params: &UnitParams, form: JacobianForm, tol: &Tolerances) -> (Vec<BranchVerdicts>, Vec<SweepFailure>) {
    let (eqs, op) = equilibria_at(gamma, params, tol);
    let mut points = Vec::new();
    let mut failures = Vec::new();
    if eqs.is_empty() {
        failures.push(SweepFailure { gamma, branch: None, message: "no torque balance".into() });
    }
    for (i, eq) in eqs.into_iter().enumerate() {
        match eq.and_then(|e| verdicts_for(&e, op == Some(i), params, form, tol)) {
            Ok(v) => points.push(v),
            Err(e) => failures.push(SweepFailure { gamma, branch: Some(i), message: e.to_string() }),
        }
    }
    (points, failures)
}

fn is_unstable(v: &BranchVerdicts, method: Method) -> bool {
    let verdict = if method == Method::RouthHurwitz { &v.routh } else { &v.eigen };
    verdict.stable != Stability::Stable
}

/// Refine a stable/unstable boundary between `lo` and `hi` by bisection.
fn bisect(mut lo: f64, mut hi: f64, lo_unstable: bool, method: Method, params: &UnitParams, form: JacobianForm, tol: &Tolerances) -> f64 {
    while hi - lo > tol.window_resolution {
        let mid = 0.5 * (lo + hi);
        match operating_verdicts(mid, params, form, tol) {
            Ok(v) if is_unstable(&v, method) == lo_unstable => lo = mid,
            Ok(_) => hi = mid,
            Err(_) => break,
        }
    }
    0.5 * (lo + hi)
}

fn windows(points: &[&BranchVerdicts], method: Method, params: &UnitParams, form: JacobianForm, tol: &Tolerances) -> MethodWindows {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for i in 0..=points.len() {
        let unstable = i < points.len() && is_unstable(points[i], method);
        match (start, unstable) {
            (None, true) => start = Some(i),
            (Some(s), false) => {
                let e = i - 1;
                let (lower, lower_open) = if s == 0 {
                    (points[0].gamma, true)
                } else {
                    (bisect(points[s - 1].gamma, points[s].gamma, false, method, params, form, tol), false)
                };
                let (upper, upper_open) = if e + 1 == points.len() {
                    (points[e].gamma, true)
                } else {
                    (bisect(points[e].gamma, points[e + 1].gamma, true, method, params, form, tol), false)
                };
                out.push(Window { lower, upper, lower_open, upper_open });
                start = None;
            }
            _ => {}
        }
    }
    MethodWindows { method, contiguous: out.len() <= 1, windows: out }
}

/// Classify every steady state on the grid with both methods and locate the
/// instability windows of the operating branch.
pub fn stability_sweep(grid: &[f64], params: &UnitParams, form: JacobianForm, tol: &Tolerances) -> Result<StabilitySweep> {
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Domain("gamma grid must be strictly ascending".into()));
    }
    let per_gamma: Vec<_> = grid.par_iter().map(|&g| at_gamma(g, params, form, tol)).collect();
    let mut points = Vec::new();
    let mut failures = Vec::new();
    for (p, f) in per_gamma {
        points.extend(p);
        failures.extend(f);
    }
    let operating: Vec<&BranchVerdicts> = points.iter().filter(|p| p.operating).collect();
    let routh = windows(&operating, Method::RouthHurwitz, params, form, tol);
    let eigen = windows(&operating, Method::EigenBound, params, form, tol);
    Ok(StabilitySweep { form, points, failures, routh, eigen })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::GovernorRow;
    use crate::params::fixtures::unit;

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn descending_grid_is_rejected() {
        let form = JacobianForm::Exact(GovernorRow::Linear);
        assert!(stability_sweep(&[1.0, 0.9], &unit(), form, &Tolerances::default()).is_err());
    }

    #[test]
    fn window_contains_reduced_voltage() {
        let form = JacobianForm::Exact(GovernorRow::Linear);
        let s = stability_sweep(&grid(0.7, 1.05, 36), &unit(), form, &Tolerances::default()).unwrap();
        assert!(s.eigen.contiguous, "{:?}", s.eigen);
        let w = s.eigen.windows[0];
        assert!(w.contains(0.89));
        assert!(!w.lower_open && !w.upper_open);
    }

    #[test]
    fn endpoints_are_stable_under_refinement() {
        let form = JacobianForm::Exact(GovernorRow::Linear);
        let tol = Tolerances::default();
        let a = stability_sweep(&grid(0.7, 1.05, 15), &unit(), form, &tol).unwrap();
        let b = stability_sweep(&grid(0.7, 1.05, 29), &unit(), form, &tol).unwrap();
        let (wa, wb) = (a.eigen.windows[0], b.eigen.windows[0]);
        let step = 0.35 / 28.0;
        assert!((wa.lower - wb.lower).abs() < 2.0 * step);
        assert!((wa.upper - wb.upper).abs() < 2.0 * step);
    }

    #[test]
    fn other_branches_are_unstable() {
        let form = JacobianForm::Exact(GovernorRow::Linear);
        let s = stability_sweep(&grid(0.7, 1.05, 8), &unit(), form, &Tolerances::default()).unwrap();
        assert!(s.points.iter().any(|p| !p.operating));
        for p in s.points.iter().filter(|p| !p.operating) {
            assert_eq!(p.eigen.stable, Stability::Unstable, "{p:?}");
        }
    }
}
