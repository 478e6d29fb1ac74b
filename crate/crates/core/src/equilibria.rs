//! Operating points: torque balance, load-angle roots, full steady states.

use std::f64::consts::{PI, TAU};

use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};

use crate::electrical::instantaneous_power;
use crate::error::{Error, Result};
use crate::model::{linearize, norm, rhs_array, GovernorRow};
use crate::params::UnitParams;
use crate::state::{State, DIM, MU, SLIP};
use crate::tolerances::Tolerances;

/// A refined steady state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub state: State,
    pub mu_0: f64,
    pub gamma: f64,
    /// Absolute load angle `theta0 + theta_delta` of the root this state was built from.
    pub theta: f64,
    /// Index of the root among the ascending balance roots in `[0, 2pi)`.
    pub theta_branch: usize,
    pub residual_norm: f64,
    pub saturated: bool,
}

fn denominator(params: &UnitParams) -> f64 {
    let g = params.gen();
    g.r * g.r + g.x_d * g.x_q
}

/// Steady stator currents `(i_d, i_q)` at voltage `u` and load angle `theta`.
pub fn steady_currents(u: f64, theta: f64, params: &UnitParams) -> (f64, f64) {
    let g = params.gen();
    let d = denominator(params);
    let (sin, cos) = theta.sin_cos();
    let i_d = (g.r * u * sin + g.x_q * (u * cos - g.e_r)) / d;
    let i_q = (g.x_d * u * sin - g.r * u * cos + g.r * g.e_r) / d;
    (i_d, i_q)
}

/// Steady currents as published; `i_q` carries a sign slip on its `r U cos` term.
pub fn published_steady_currents(u: f64, theta: f64, params: &UnitParams) -> (f64, f64) {
    let g = params.gen();
    let d = denominator(params);
    let (sin, cos) = theta.sin_cos();
    let i_d = -g.x_q / d * (-g.r / g.x_q * u * sin - u * cos + g.e_r);
    let i_q = -g.r / d * (-g.x_d / g.r * u * sin - u * cos - g.e_r);
    (i_d, i_q)
}

/// Generator torque at a steady state with voltage `u` and load angle `theta`.
pub fn generator_torque_curve(u: f64, theta: f64, params: &UnitParams) -> f64 {
    let g = params.gen();
    let (i_d, i_q) = steady_currents(u, theta, params);
    (g.x_d - g.x_q) * i_d * i_q + g.e_r * i_q
}

/// The published multi-term expression for the steady generator torque.
pub fn published_generator_torque(u: f64, theta: f64, params: &UnitParams) -> f64 {
    let g = params.gen();
    let (r, xd, xq, er) = (g.r, g.x_d, g.x_q, g.e_r);
    let d = denominator(params);
    let (sin, cos) = theta.sin_cos();
    let bracket = -u * u * xd * sin * sin + u * u * xq * cos * cos
        - (r * r - xd * xq) / r * u * u * sin * cos
        - er * (xd * xq - r * r) / r * u * sin
        + 2.0 * xq * er * u * cos;
    r * (xd - xq) / (d * d) * bracket - er / d * (-xd * u * sin + r * u * cos) + r * xq * er * (xd - xq) / (d * d)
        - r * er * er / d
}

/// Slope of the steady turbine torque in the vane opening.
pub fn torque_slope(params: &UnitParams) -> f64 {
    let t = &params.tur;
    t.k * t.c * t.head().powf(1.5) / params.gen().omega0.powi(2)
}

/// Steady turbine torque for vane opening `mu0`.
pub fn turbine_torque_linear(mu0: f64, params: &UnitParams) -> f64 {
    torque_slope(params) * mu0
}

/// Vane opening balancing the generator torque at `theta0`, clamped to the stops.
pub fn solve_mu0(gamma: f64, params: &UnitParams) -> (f64, bool) {
    let u = gamma * params.gen().u_nom;
    let raw = generator_torque_curve(u, params.gen().theta0, params) / torque_slope(params);
    let g = &params.gov;
    if raw < g.mu_min {
        (g.mu_min, true)
    } else if raw > g.mu_max {
        (g.mu_max, true)
    } else {
        (raw, false)
    }
}

/// All load angles in `[0, 2pi)` where generator torque meets the turbine torque of `mu0`.
pub fn find_theta_equilibria(gamma: f64, mu0: f64, params: &UnitParams, tol: &Tolerances) -> Vec<f64> {
    let u = gamma * params.gen().u_nom;
    let target = turbine_torque_linear(mu0, params);
    let f = |th: f64| generator_torque_curve(u, th, params) - target;
    let n = tol.root_grid.max(8);
    let mut roots: Vec<f64> = Vec::new();
    let mut a = 0.0;
    let mut fa = f(a);
    for i in 1..=n {
        let b = TAU * i as f64 / n as f64;
        let fb = f(b);
        if fa == 0.0 {
            roots.push(a);
        } else if fa * fb < 0.0 {
            let (mut lo, mut hi, mut flo) = (a, b, fa);
            while hi - lo > tol.root_bisection {
                let mid = 0.5 * (lo + hi);
                let fm = f(mid);
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if flo * fm < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        a = b;
        fa = fb;
    }
    for r in roots.iter_mut() {
        if *r >= TAU - tol.root_bisection {
            *r = 0.0;
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|x, y| (*x - *y).abs() < 10.0 * tol.root_bisection);
    roots
}

/// Circular distance between two angles.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Index of the root nearest the operating angle.
pub fn operating_branch(roots: &[f64], theta0: f64) -> Option<usize> {
    roots
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| angle_distance(**a, theta0).total_cmp(&angle_distance(**b, theta0)))
        .map(|(i, _)| i)
}

/// Steady state from the closed forms, before refinement.
pub fn closed_form_state(gamma: f64, mu0: f64, theta: f64, params: &UnitParams) -> State {
    let g = params.gen();
    let d = params.der();
    let u = gamma * g.u_nom;
    let (i_d, i_q) = steady_currents(u, theta, params);
    let mut dtheta = theta - g.theta0;
    if dtheta > PI {
        dtheta -= TAU;
    } else if dtheta <= -PI {
        dtheta += TAU;
    }
    State {
        theta_delta: dtheta,
        s: 0.0,
        q: params.tur.steady_flow(mu0),
        psi_d: g.x_d * i_d + g.e_r,
        psi_q: g.x_q * i_q,
        psi_r: d.x_ad * d.x_ad / d.x_r * i_d + g.e_r,
        psi_rd: d.x_ad * d.x_ad / d.x_rd * i_d + d.x_ad / d.x_rd * g.e_r,
        psi_rq: d.x_aq * d.x_aq / d.x_rq * i_q,
        mu_delta: 0.0,
    }
}

/// Newton iteration on the full right-hand side.
pub fn refine_equilibrium(x_guess: &State, params: &UnitParams, mu0: f64, tol: &Tolerances) -> Result<(State, f64)> {
    let row = GovernorRow::native(&params.gov);
    let mut x = x_guess.to_array();
    let mut f = rhs_array(&x, params, mu0)?;
    let mut res = norm(&f);
    let mut iter = 0;
    while res >= tol.equilibrium_residual {
        if iter >= tol.refine_max_iter {
            return Err(Error::NonConvergence { iterations: iter, residual: res });
        }
        iter += 1;
        let jac = linearize(&x, params, mu0, row);
        let jm = SMatrix::<f64, DIM, DIM>::from_fn(|i, k| jac[i][k]);
        let rhs = SVector::<f64, DIM>::from_column_slice(&f);
        let step = jm
            .lu()
            .solve(&rhs)
            .ok_or(Error::NonConvergence { iterations: iter, residual: res })?;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let mut trial = x;
            for k in 0..DIM {
                trial[k] -= lambda * step[k];
            }
            if let Ok(ft) = rhs_array(&trial, params, mu0) {
                let rt = norm(&ft);
                if rt.is_finite() && rt < res {
                    x = trial;
                    f = ft;
                    res = rt;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(Error::NonConvergence { iterations: iter, residual: res });
        }
    }
    // Slip and vane deviation vanish at any root; drop round-off.
    for k in [SLIP, MU] {
        if x[k].abs() < 1e-10 {
            x[k] = 0.0;
        }
    }
    let res = norm(&rhs_array(&x, params, mu0)?);
    if res >= tol.equilibrium_residual {
        return Err(Error::NonConvergence { iterations: iter, residual: res });
    }
    Ok((State::from_array(&x), res))
}

/// Closed-form steady state for a balance root, refined to the residual tolerance.
pub fn build_equilibrium(
    gamma: f64,
    mu0: f64,
    theta: f64,
    branch: usize,
    saturated: bool,
    params: &UnitParams,
    tol: &Tolerances,
) -> Result<Equilibrium> {
    let p = params.with_gamma(gamma);
    let guess = closed_form_state(gamma, mu0, theta, &p);
    let (state, residual_norm) = refine_equilibrium(&guess, &p, mu0, tol)?;
    Ok(Equilibrium { state, mu_0: mu0, gamma, theta, theta_branch: branch, residual_norm, saturated })
}

/// All steady states at `gamma`, one per balance root.
pub fn equilibria_at(gamma: f64, params: &UnitParams, tol: &Tolerances) -> (Vec<Result<Equilibrium>>, Option<usize>) {
    let (mu0, saturated) = solve_mu0(gamma, params);
    let roots = find_theta_equilibria(gamma, mu0, params, tol);
    let op = operating_branch(&roots, params.gen().theta0);
    let eqs = roots
        .iter()
        .enumerate()
        .map(|(i, &th)| build_equilibrium(gamma, mu0, th, i, saturated, params, tol))
        .collect();
    (eqs, op)
}

/// The steady state nearest the operating angle.
pub fn operating_equilibrium(gamma: f64, params: &UnitParams, tol: &Tolerances) -> Result<Equilibrium> {
    let (mu0, saturated) = solve_mu0(gamma, params);
    let roots = find_theta_equilibria(gamma, mu0, params, tol);
    let theta0 = params.gen().theta0;
    let branch = operating_branch(&roots, theta0)
        .ok_or_else(|| Error::Domain(format!("no torque balance at gamma = {gamma}")))?;
    let theta = if saturated { roots[branch] } else { theta0 };
    build_equilibrium(gamma, mu0, theta, branch, saturated, params, tol)
}

/// One row of the balance curves; `error` marks a gap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalancePoint {
    pub gamma: f64,
    pub mu0: f64,
    pub saturated: bool,
    pub theta: f64,
    pub power: f64,
    pub residual: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceCurve {
    pub points: Vec<BalancePoint>,
}

impl BalanceCurve {
    pub fn gamma_grid(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.gamma).collect()
    }

    pub fn mu0_values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.mu0).collect()
    }

    pub fn theta_values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.theta).collect()
    }

    pub fn power_values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.power).collect()
    }
}

/// Operating vane opening, load angle and power across a voltage grid.
pub fn balance_curves(gamma_grid: &[f64], params: &UnitParams, tol: &Tolerances) -> BalanceCurve {
    let points = gamma_grid
        .iter()
        .map(|&gamma| {
            let (mu0, saturated) = solve_mu0(gamma, params);
            match operating_equilibrium(gamma, params, tol) {
                Ok(eq) => {
                    let u = gamma * params.gen().u_nom;
                    let (i_d, i_q) = steady_currents(u, eq.theta, params);
                    BalancePoint {
                        gamma,
                        mu0,
                        saturated,
                        theta: eq.theta,
                        power: instantaneous_power(i_d, i_q, u, eq.theta),
                        residual: eq.residual_norm,
                        error: None,
                    }
                }
                Err(e) => BalancePoint {
                    gamma,
                    mu0,
                    saturated,
                    theta: f64::NAN,
                    power: f64::NAN,
                    residual: f64::NAN,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    BalanceCurve { points }
}
