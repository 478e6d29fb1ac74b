//! Jacobian of the right-hand side at a steady state: closed-form entries
//! and a central-difference oracle.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::electrical::InversionCoefficients;
use crate::equilibria::Equilibrium;
use crate::error::{Error, Result};
use crate::governor::Region;
use crate::model::{rhs_array, GovernorRow};
use crate::params::UnitParams;
use crate::state::{DIM, FLOW, MU, PSI_D, PSI_Q, PSI_R, PSI_RD, PSI_RQ, SLIP, THETA};

/// Which closed-form Jacobian to assemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "governor")]
pub enum JacobianForm {
    /// Entries exactly as published: closed-form inversion coefficients,
    /// published signs on the vane-opening column, `j(9,2) = 1/T_c`.
    Published,
    /// Entries from the exact flux inversion with the given governor row.
    Exact(GovernorRow),
}

/// Closed-form Jacobian at a steady state (slip zero, vanes between stops).
pub fn analytic_jacobian(eq: &Equilibrium, params: &UnitParams, form: JacobianForm) -> Result<DMatrix<f64>> {
    let p = params.with_gamma(eq.gamma);
    let gen = p.gen();
    let der = p.der();
    let tur = &p.tur;
    let gov = &p.gov;
    let coef = match form {
        JacobianForm::Published => InversionCoefficients::published(gen, der)?,
        JacobianForm::Exact(_) => InversionCoefficients::from_system(gen, der, p.flux()),
    };
    let x = eq.state.to_array();
    let (psi_d, psi_q, psi_r, psi_rd, psi_rq) = (x[PSI_D], x[PSI_Q], x[PSI_R], x[PSI_RD], x[PSI_RQ]);
    let w0 = gen.omega0;
    let tj = der.t_j;
    let q = eq.state.q;
    let mu0 = eq.mu_0;
    let cc = tur.c * tur.c;
    let u = p.voltage();
    let theta = gen.theta0 + eq.state.theta_delta;
    let lrho = tur.l * tur.rho_w;

    // Published entries flip the sign of both vane-opening partials.
    let vane_sign = match form {
        JacobianForm::Published => 1.0,
        JacobianForm::Exact(_) => -1.0,
    };

    let mut j = DMatrix::<f64>::zeros(DIM, DIM);
    j[(THETA, SLIP)] = w0;
    j[(SLIP, SLIP)] = -tur.k * q.powi(3) / (tj * cc * w0 * w0 * mu0 * mu0);
    j[(SLIP, FLOW)] = 3.0 * tur.k * q * q / (tj * cc * w0 * w0 * mu0 * mu0);
    j[(SLIP, PSI_D)] = ((coef.xd - coef.yq) * psi_q + coef.yrq * psi_rq) / tj;
    j[(SLIP, PSI_Q)] = (-coef.yq * psi_d + coef.xd * psi_d - coef.xr * psi_r + coef.xrd * psi_rd) / tj;
    j[(SLIP, PSI_R)] = -coef.xr * psi_q / tj;
    j[(SLIP, PSI_RD)] = coef.xrd * psi_q / tj;
    j[(SLIP, PSI_RQ)] = coef.yrq * psi_d / tj;
    j[(SLIP, MU)] = vane_sign * 2.0 * tur.k * q.powi(3) / (tj * cc * mu0.powi(3) * w0 * w0);
    j[(FLOW, FLOW)] = -2.0 * tur.s_area * q / (lrho * cc * mu0 * mu0);
    j[(FLOW, MU)] = -vane_sign * 2.0 * tur.s_area * q * q / (lrho * cc * mu0.powi(3));
    j[(PSI_D, THETA)] = w0 * u * theta.cos();
    j[(PSI_D, SLIP)] = -w0 * psi_q;
    j[(PSI_D, PSI_D)] = -w0 * gen.r * coef.xd;
    j[(PSI_D, PSI_Q)] = -w0;
    j[(PSI_D, PSI_R)] = w0 * gen.r * coef.xr;
    j[(PSI_D, PSI_RD)] = -w0 * gen.r * coef.xrd;
    j[(PSI_Q, THETA)] = w0 * u * theta.sin();
    j[(PSI_Q, SLIP)] = w0 * psi_d;
    j[(PSI_Q, PSI_D)] = w0;
    j[(PSI_Q, PSI_Q)] = -w0 * gen.r * coef.yq;
    j[(PSI_Q, PSI_RQ)] = w0 * gen.r * coef.yrq;
    j[(PSI_R, PSI_D)] = -coef.zd / gen.t_r;
    j[(PSI_R, PSI_R)] = -coef.zr / gen.t_r;
    j[(PSI_R, PSI_RD)] = coef.zrd / gen.t_r;
    j[(PSI_RD, PSI_D)] = coef.qd / der.t_rd;
    j[(PSI_RD, PSI_R)] = -coef.qr / der.t_rd;
    j[(PSI_RD, PSI_RD)] = -coef.qrd / der.t_rd;
    j[(PSI_RQ, PSI_Q)] = coef.pq / der.t_rq;
    j[(PSI_RQ, PSI_RQ)] = -coef.prq / der.t_rq;
    j[(MU, SLIP)] = match form {
        JacobianForm::Published => 1.0 / gov.t_c,
        JacobianForm::Exact(GovernorRow::Linear) => -gov.sigma / gov.t_c,
        JacobianForm::Exact(GovernorRow::Deadband) => 0.0,
    };
    j[(MU, MU)] = -1.0 / gov.t_c;
    Ok(j)
}

/// Central differences of an arbitrary vector field, step `h * max(1, |x_k|)`.
pub fn central_differences<F>(f: F, x: &[f64], h: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = x.len();
    let mut j = DMatrix::<f64>::zeros(n, n);
    let mut probe = x.to_vec();
    for k in 0..n {
        let step = h * x[k].abs().max(1.0);
        probe[k] = x[k] + step;
        let fp = f(&probe)?;
        probe[k] = x[k] - step;
        let fm = f(&probe)?;
        probe[k] = x[k];
        for i in 0..n {
            j[(i, k)] = (fp[i] - fm[i]) / (2.0 * step);
        }
    }
    Ok(j)
}

/// Central-difference Jacobian of the right-hand side. Fails if a probe
/// leaves the smooth piece of the governor map containing `x`.
pub fn numeric_jacobian(x: &[f64; DIM], params: &UnitParams, mu0: f64, h: f64) -> Result<DMatrix<f64>> {
    if !(1e-8..=1e-4).contains(&h) {
        return Err(Error::Domain(format!("difference step {h} outside [1e-8, 1e-4]")));
    }
    let gov = &params.gov;
    let centre = Region::of(x[SLIP], x[MU], mu0, gov);
    for k in [SLIP, MU] {
        let step = h * x[k].abs().max(1.0);
        for sign in [-1.0, 1.0] {
            let mut y = *x;
            y[k] += sign * step;
            if let Some(boundary) = centre.boundary_to(&Region::of(y[SLIP], y[MU], mu0, gov)) {
                return Err(Error::Smoothness { component: k, boundary });
            }
        }
    }
    central_differences(
        |y| {
            let arr: [f64; DIM] = y.try_into().expect("state dimension");
            rhs_array(&arr, params, mu0).map(|d| d.to_vec())
        },
        x,
        h,
    )
}

/// One entry where a closed-form Jacobian and the oracle disagree; indices are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntryFlag {
    pub row: usize,
    pub col: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JacobianComparison {
    pub max_relative_error: f64,
    pub flags: Vec<EntryFlag>,
}

/// Entry-wise relative error, each entry scaled by the larger of itself and
/// `1e-8` times the largest oracle entry in its row.
pub fn compare_jacobians(analytic: &DMatrix<f64>, numeric: &DMatrix<f64>, threshold: f64) -> JacobianComparison {
    let mut max_rel: f64 = 0.0;
    let mut flags = Vec::new();
    for i in 0..numeric.nrows() {
        let row_scale = (0..numeric.ncols()).map(|k| numeric[(i, k)].abs()).fold(0.0, f64::max);
        let floor = (1e-8 * row_scale).max(1e-300);
        for k in 0..numeric.ncols() {
            let (a, b) = (analytic[(i, k)], numeric[(i, k)]);
            let rel = (a - b).abs() / b.abs().max(floor);
            max_rel = max_rel.max(rel);
            if rel > threshold {
                flags.push(EntryFlag { row: i + 1, col: k + 1, analytic: a, numeric: b, relative_error: rel });
            }
        }
    }
    JacobianComparison { max_relative_error: max_rel, flags }
}
