//! Right-hand side of the nine-state unit model.

use crate::electrical::{generator_torque_pu, instantaneous_power, ElectricalSolution};
use crate::error::{Error, Result};
use crate::governor::governor_rate;
use crate::params::UnitParams;
use crate::state::{fluxes_of, State, DIM, FLOW, MU, PSI_D, PSI_Q, PSI_R, PSI_RD, PSI_RQ, SLIP, THETA};

/// Turbine torque for flow `q`, vane opening `mu` and slip `s`.
pub fn turbine_torque_pu(q: f64, mu: f64, s: f64, params: &UnitParams) -> Result<f64> {
    if !(mu > 0.0) {
        return Err(Error::Domain(format!("vane opening must be positive, got {mu}")));
    }
    if !(s > -1.0) {
        return Err(Error::Domain(format!("slip must exceed -1, got {s}")));
    }
    let t = &params.tur;
    let w0 = params.gen().omega0;
    Ok(t.k / (t.c * t.c * mu * mu) * q * q * q / (w0 * w0 * (1.0 + s)))
}

/// Currents, torque and power at a state.
pub fn electrical_solution(x: &State, params: &UnitParams) -> ElectricalSolution {
    let c = params.flux().invert(&x.fluxes());
    let theta = params.gen().theta0 + x.theta_delta;
    ElectricalSolution {
        i_d: c.i_d,
        i_q: c.i_q,
        e_q: c.e_q,
        e_rd: c.e_rd,
        e_rq: c.e_rq,
        m_g_pu: generator_torque_pu(x.psi_d, x.psi_q, c.i_d, c.i_q),
        p: instantaneous_power(c.i_d, c.i_q, params.voltage(), theta),
    }
}

/// Time derivative of the state for operating vane opening `mu0`.
pub fn rhs(x: &State, params: &UnitParams, mu0: f64) -> Result<State> {
    rhs_array(&x.to_array(), params, mu0).map(|d| State::from_array(&d))
}

#[inline]
pub fn rhs_array(x: &[f64; DIM], params: &UnitParams, mu0: f64) -> Result<[f64; DIM]> {
    let gen = params.gen();
    let der = params.der();
    let tur = &params.tur;
    let w0 = gen.omega0;
    let s = x[SLIP];
    let mu = mu0 + x[MU];

    let c = params.flux().invert(&fluxes_of(x));
    let m_t = turbine_torque_pu(x[FLOW], mu, s, params)?;
    let m_g = generator_torque_pu(x[PSI_D], x[PSI_Q], c.i_d, c.i_q);
    let u = params.voltage();
    let (sin, cos) = (gen.theta0 + x[THETA]).sin_cos();
    let speed = w0 * (1.0 + s);

    let mut d = [0.0; DIM];
    d[THETA] = w0 * s;
    d[SLIP] = (m_t - m_g) / der.t_j;
    d[FLOW] = tur.inertance() * (tur.head() - x[FLOW] * x[FLOW] / (tur.c * tur.c * mu * mu));
    d[PSI_D] = -speed * x[PSI_Q] - w0 * gen.r * c.i_d + w0 * u * sin;
    d[PSI_Q] = speed * x[PSI_D] - w0 * gen.r * c.i_q - w0 * u * cos;
    d[PSI_R] = (gen.e_r - c.e_q) / gen.t_r;
    d[PSI_RD] = -c.e_rq / der.t_rd;
    d[PSI_RQ] = c.e_rd / der.t_rq;
    d[MU] = governor_rate(s, x[MU], mu0, &params.gov);
    Ok(d)
}

/// How the governor row is linearized at zero slip.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GovernorRow {
    /// Deadband ignored: `d(mu')/ds = -sigma/T_c`. Exact when `z = 0`.
    Linear,
    /// Slip inside the deadband: `d(mu')/ds = 0`. Exact when `z > 0`.
    Deadband,
}

impl GovernorRow {
    /// The row matching the actual governor map at zero slip.
    pub fn native(gov: &crate::params::GovernorParams) -> Self {
        if gov.z > 0.0 {
            GovernorRow::Deadband
        } else {
            GovernorRow::Linear
        }
    }
}

/// Exact Jacobian of the right-hand side at an arbitrary state, assuming the
/// governor is off its rate limits and the vanes are between the stops.
pub fn linearize(x: &[f64; DIM], params: &UnitParams, mu0: f64, row: GovernorRow) -> [[f64; DIM]; DIM] {
    let gen = params.gen();
    let der = params.der();
    let tur = &params.tur;
    let gov = &params.gov;
    let w0 = gen.omega0;
    let s = x[SLIP];
    let q = x[FLOW];
    let mu = mu0 + x[MU];
    let m = params.flux().d_inverse();
    let n = params.flux().q_inverse();
    let c = params.flux().invert(&fluxes_of(x));
    let u = params.voltage();
    let (sin, cos) = (gen.theta0 + x[THETA]).sin_cos();
    let cc = tur.c * tur.c;
    let tj = der.t_j;

    let mut j = [[0.0; DIM]; DIM];
    j[THETA][SLIP] = w0;

    let mt_coef = tur.k / (cc * mu * mu * w0 * w0 * (1.0 + s));
    j[SLIP][SLIP] = -mt_coef * q * q * q / (1.0 + s) / tj;
    j[SLIP][FLOW] = 3.0 * mt_coef * q * q / tj;
    j[SLIP][MU] = -2.0 * mt_coef * q * q * q / mu / tj;
    j[SLIP][PSI_D] = (-c.i_q + x[PSI_Q] * m[0][0]) / tj;
    j[SLIP][PSI_Q] = (-x[PSI_D] * n[0][0] + c.i_d) / tj;
    j[SLIP][PSI_R] = x[PSI_Q] * m[0][1] / tj;
    j[SLIP][PSI_RD] = x[PSI_Q] * m[0][2] / tj;
    j[SLIP][PSI_RQ] = -x[PSI_D] * n[0][1] / tj;

    let a = tur.inertance();
    j[FLOW][FLOW] = -2.0 * a * q / (cc * mu * mu);
    j[FLOW][MU] = 2.0 * a * q * q / (cc * mu * mu * mu);

    j[PSI_D][THETA] = w0 * u * cos;
    j[PSI_D][SLIP] = -w0 * x[PSI_Q];
    j[PSI_D][PSI_Q] = -w0 * (1.0 + s);
    j[PSI_D][PSI_D] = -w0 * gen.r * m[0][0];
    j[PSI_D][PSI_R] = -w0 * gen.r * m[0][1];
    j[PSI_D][PSI_RD] = -w0 * gen.r * m[0][2];

    j[PSI_Q][THETA] = w0 * u * sin;
    j[PSI_Q][SLIP] = w0 * x[PSI_D];
    j[PSI_Q][PSI_D] = w0 * (1.0 + s);
    j[PSI_Q][PSI_Q] = -w0 * gen.r * n[0][0];
    j[PSI_Q][PSI_RQ] = -w0 * gen.r * n[0][1];

    for (k, col) in [PSI_D, PSI_R, PSI_RD].into_iter().enumerate() {
        j[PSI_R][col] = -m[1][k] / gen.t_r;
        j[PSI_RD][col] = -m[2][k] / der.t_rd;
    }
    j[PSI_RQ][PSI_Q] = n[1][0] / der.t_rq;
    j[PSI_RQ][PSI_RQ] = n[1][1] / der.t_rq;

    j[MU][SLIP] = match row {
        GovernorRow::Linear => -gov.sigma / gov.t_c,
        GovernorRow::Deadband => 0.0,
    };
    j[MU][MU] = -1.0 / gov.t_c;
    j
}

pub fn norm(v: &[f64; DIM]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}
