use serde::{Deserialize, Serialize};

/// Numeric tolerances shared by the solvers and classifiers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Acceptable norm of the right-hand side at an equilibrium.
    pub equilibrium_residual: f64,
    pub refine_max_iter: usize,
    /// Points in the angle grid used to bracket balance roots.
    pub root_grid: usize,
    pub root_bisection: f64,
    /// Flux systems with a larger condition estimate are rejected.
    pub condition_limit: f64,
    /// Routh first-column tolerance, relative to the largest coefficient.
    pub routh_relative: f64,
    /// Eigen margins below this (relative to the balanced matrix norm) count as marginal.
    pub marginal_relative: f64,
    /// Window endpoints are bisected down to this width in gamma.
    pub window_resolution: f64,
    /// Amplitude below which a trajectory counts as settled.
    pub eq_tol: f64,
    /// Slip amplitude above which an oscillation counts as a cycle.
    pub cycle_tol: f64,
    /// Allowed relative spread of successive peak intervals in a cycle.
    pub period_jitter: f64,
    pub min_peaks: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            equilibrium_residual: 1e-8,
            refine_max_iter: 50,
            root_grid: 2048,
            root_bisection: 1e-12,
            condition_limit: 1e12,
            routh_relative: 1e-9,
            marginal_relative: 1e-9,
            window_resolution: 1e-3,
            eq_tol: 1e-6,
            cycle_tol: 1e-4,
            period_jitter: 0.05,
            min_peaks: 4,
        }
    }
}
