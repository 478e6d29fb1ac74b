use serde::{Deserialize, Serialize};

use crate::electrical::Fluxes;

pub const DIM: usize = 9;

pub const THETA: usize = 0;
pub const SLIP: usize = 1;
pub const FLOW: usize = 2;
pub const PSI_D: usize = 3;
pub const PSI_Q: usize = 4;
pub const PSI_R: usize = 5;
pub const PSI_RD: usize = 6;
pub const PSI_RQ: usize = 7;
pub const MU: usize = 8;

/// Column names in state order, as used in CSV headers.
pub const NAMES: [&str; DIM] = ["theta_delta", "s", "Q", "psi_d", "psi_q", "psi_r", "psi_rd", "psi_rq", "mu_delta"];

/// Dynamic state of the unit: load-angle deviation, slip, penstock flow,
/// five flux linkages and vane deviation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct State {
    pub theta_delta: f64,
    pub s: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    pub psi_d: f64,
    pub psi_q: f64,
    pub psi_r: f64,
    pub psi_rd: f64,
    pub psi_rq: f64,
    pub mu_delta: f64,
}

impl State {
    pub fn to_array(&self) -> [f64; DIM] {
        [
            self.theta_delta,
            self.s,
            self.q,
            self.psi_d,
            self.psi_q,
            self.psi_r,
            self.psi_rd,
            self.psi_rq,
            self.mu_delta,
        ]
    }

    pub fn from_array(x: &[f64; DIM]) -> Self {
        Self {
            theta_delta: x[THETA],
            s: x[SLIP],
            q: x[FLOW],
            psi_d: x[PSI_D],
            psi_q: x[PSI_Q],
            psi_r: x[PSI_R],
            psi_rd: x[PSI_RD],
            psi_rq: x[PSI_RQ],
            mu_delta: x[MU],
        }
    }

    pub fn fluxes(&self) -> Fluxes {
        fluxes_of(&self.to_array())
    }
}

#[inline]
pub fn fluxes_of(x: &[f64; DIM]) -> Fluxes {
    Fluxes { d: x[PSI_D], q: x[PSI_Q], r: x[PSI_R], rd: x[PSI_RD], rq: x[PSI_RQ] }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn array_roundtrip() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0];
        assert_eq!(State::from_array(&x).to_array(), x);
        assert_eq!(State::from_array(&x).psi_rq, 8.0);
    }
}
