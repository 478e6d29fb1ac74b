//! Flux-linkage algebra of the generator.
//!
//! The five flux relations split into a d-axis block in (i_d, E_q, E_rq)
//! and a q-axis block in (i_q, E_rd):
//!
//! ```text
//! Psi_d  = x_d i_d + E_q + E_rq
//! Psi_r  = a3 i_d + E_q + a4 E_rq
//! Psi_rd = a5 i_d + a6 E_q + (1 + a6) E_rq
//! Psi_q  = x_q i_q - E_rd
//! Psi_rq = a7 i_q - (1 + x_aq/x_rq) E_rd
//! ```
//!
//! Both blocks are inverted once per parameter set.

use nalgebra::{Matrix2, Matrix3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{DerivedElectricalParams, GeneratorRatings};

/// Stator currents and internal EMFs.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Currents {
    pub i_d: f64,
    pub i_q: f64,
    pub e_q: f64,
    pub e_rd: f64,
    pub e_rq: f64,
}

/// Currents together with the torque and power they produce.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElectricalSolution {
    pub i_d: f64,
    pub i_q: f64,
    pub e_q: f64,
    pub e_rd: f64,
    pub e_rq: f64,
    pub m_g_pu: f64,
    pub p: f64,
}

/// The five flux linkages (Psi_d, Psi_q, Psi_r, Psi_rd, Psi_rq).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Fluxes {
    pub d: f64,
    pub q: f64,
    pub r: f64,
    pub rd: f64,
    pub rq: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FluxSystem {
    d: [[f64; 3]; 3],
    d_inv: [[f64; 3]; 3],
    q: [[f64; 2]; 2],
    q_inv: [[f64; 2]; 2],
}

fn norm1_3(m: &Matrix3<f64>) -> f64 {
    (0..3).map(|j| m.column(j).abs().sum()).fold(0.0, f64::max)
}

fn norm1_2(m: &Matrix2<f64>) -> f64 {
    (0..2).map(|j| m.column(j).abs().sum()).fold(0.0, f64::max)
}

impl FluxSystem {
    pub fn new(gen: &GeneratorRatings, der: &DerivedElectricalParams, condition_limit: f64) -> Result<Self> {
        let a3 = der.x_ad * der.x_ad / der.x_r;
        let a4 = der.x_ad / der.x_r;
        let a5 = der.x_ad * der.x_ad / der.x_rd;
        let a6 = der.x_ad / der.x_rd;
        let a7 = der.x_aq * der.x_aq / der.x_rq;
        let cq = der.x_aq / der.x_rq;

        let d = Matrix3::new(gen.x_d, 1.0, 1.0, a3, 1.0, a4, a5, a6, 1.0 + a6);
        let q = Matrix2::new(gen.x_q, -1.0, a7, -(1.0 + cq));

        let d_inv = d
            .try_inverse()
            .ok_or(Error::SingularFlux { axis: 'd', condition: f64::INFINITY })?;
        let cond_d = norm1_3(&d) * norm1_3(&d_inv);
        if !(cond_d < condition_limit) {
            return Err(Error::SingularFlux { axis: 'd', condition: cond_d });
        }
        let q_inv = q
            .try_inverse()
            .ok_or(Error::SingularFlux { axis: 'q', condition: f64::INFINITY })?;
        let cond_q = norm1_2(&q) * norm1_2(&q_inv);
        if !(cond_q < condition_limit) {
            return Err(Error::SingularFlux { axis: 'q', condition: cond_q });
        }

        let to3 = |m: &Matrix3<f64>| {
            let mut out = [[0.0; 3]; 3];
            for (i, row) in out.iter_mut().enumerate() {
                for (j, v) in row.iter_mut().enumerate() {
                    *v = m[(i, j)];
                }
            }
            out
        };
        let to2 = |m: &Matrix2<f64>| [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]];
        Ok(Self { d: to3(&d), d_inv: to3(&d_inv), q: to2(&q), q_inv: to2(&q_inv) })
    }

    /// Solve the flux relations for currents and EMFs.
    #[inline]
    pub fn invert(&self, f: &Fluxes) -> Currents {
        let v = [f.d, f.r, f.rd];
        let m = &self.d_inv;
        let i_d = m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2];
        let e_q = m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2];
        let e_rq = m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2];
        let n = &self.q_inv;
        let i_q = n[0][0] * f.q + n[0][1] * f.rq;
        let e_rd = n[1][0] * f.q + n[1][1] * f.rq;
        Currents { i_d, i_q, e_q, e_rd, e_rq }
    }

    /// Evaluate the flux relations forward.
    pub fn fluxes(&self, c: &Currents) -> Fluxes {
        let m = &self.d;
        let n = &self.q;
        Fluxes {
            d: m[0][0] * c.i_d + m[0][1] * c.e_q + m[0][2] * c.e_rq,
            r: m[1][0] * c.i_d + m[1][1] * c.e_q + m[1][2] * c.e_rq,
            rd: m[2][0] * c.i_d + m[2][1] * c.e_q + m[2][2] * c.e_rq,
            q: n[0][0] * c.i_q + n[0][1] * c.e_rd,
            rq: n[1][0] * c.i_q + n[1][1] * c.e_rd,
        }
    }

    pub fn d_inverse(&self) -> &[[f64; 3]; 3] {
        &self.d_inv
    }

    pub fn q_inverse(&self) -> &[[f64; 2]; 2] {
        &self.q_inv
    }
}

/// Linear-solve inversion of the flux relations.
pub fn flux_inverse(fluxes: &Fluxes, system: &FluxSystem) -> Currents {
    system.invert(fluxes)
}

/// Closed-form inversion coefficients, named after their role in
/// `i_d = X_d Psi_d - X_r Psi_r + X_rd Psi_rd` and the analogous rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InversionCoefficients {
    pub a: [f64; 7],
    pub b1: f64,
    pub xd: f64,
    pub xr: f64,
    pub xrd: f64,
    pub yq: f64,
    pub yrq: f64,
    pub zd: f64,
    pub zr: f64,
    pub zrd: f64,
    pub pq: f64,
    pub prq: f64,
    pub qd: f64,
    pub qr: f64,
    pub qrd: f64,
}

impl InversionCoefficients {
    /// Coefficients from the published closed-form expressions.
    pub fn published(gen: &GeneratorRatings, der: &DerivedElectricalParams) -> Result<Self> {
        let a1 = gen.x_d;
        let a2 = gen.x_q;
        let a3 = der.x_ad * der.x_ad / der.x_r;
        let a4 = der.x_ad / der.x_r;
        let a5 = der.x_ad * der.x_ad / der.x_rd;
        let a6 = der.x_ad / der.x_rd;
        let a7 = der.x_aq * der.x_aq / der.x_rq;
        let b1 = (a1 - a5) * (a4 - 1.0) - (a1 * a4 - a3) * (1.0 - a6);
        let degenerate = |what: &str| Err(Error::param("der", format!("degenerate inversion: {what}")));
        if b1 == 0.0 {
            return degenerate("b1 = 0");
        }
        if a2 == a7 {
            return degenerate("a2 = a7");
        }
        if a4 == 1.0 {
            return degenerate("a4 = 1");
        }
        if a6 == 1.0 {
            return degenerate("a6 = 1");
        }
        let yq = 1.0 / (a2 - a7);
        Ok(Self {
            a: [a1, a2, a3, a4, a5, a6, a7],
            b1,
            xd: (a4 * a6 - 1.0) / b1,
            xr: (a6 - 1.0) / b1,
            xrd: (1.0 - a4) / b1,
            yq,
            yrq: yq,
            zd: (b1 - (a1 - a5) * (a4 * a6 - 1.0)) / (b1 * (1.0 - a6)),
            zr: (a5 - a1) / b1,
            zrd: (b1 + (a1 - a5) * (1.0 - a4)) / (b1 * (1.0 - a6)),
            pq: a7 / (a2 - a7),
            prq: a2 / (a2 - a7),
            qd: ((a1 - a3) * (a4 * a6 - 1.0) - b1) / (b1 * (1.0 - a4)),
            qr: ((a1 - a3) * (a6 - 1.0) - b1) / (b1 * (1.0 - a4)),
            qrd: (a3 - a1) / b1,
        })
    }

    /// The same layout read off the exact inverse of the flux relations.
    pub fn from_system(gen: &GeneratorRatings, der: &DerivedElectricalParams, system: &FluxSystem) -> Self {
        let m = system.d_inverse();
        let n = system.q_inverse();
        let a3 = der.x_ad * der.x_ad / der.x_r;
        let a4 = der.x_ad / der.x_r;
        let a5 = der.x_ad * der.x_ad / der.x_rd;
        let a6 = der.x_ad / der.x_rd;
        let a7 = der.x_aq * der.x_aq / der.x_rq;
        let b1 = (gen.x_d - a5) * (a4 - 1.0) - (gen.x_d * a4 - a3) * (1.0 - a6);
        Self {
            a: [gen.x_d, gen.x_q, a3, a4, a5, a6, a7],
            b1,
            xd: m[0][0],
            xr: -m[0][1],
            xrd: m[0][2],
            zd: m[1][0],
            zr: m[1][1],
            zrd: -m[1][2],
            qd: -m[2][0],
            qr: m[2][1],
            qrd: m[2][2],
            yq: n[0][0],
            yrq: -n[0][1],
            pq: n[1][0],
            prq: -n[1][1],
        }
    }

    pub fn apply(&self, f: &Fluxes) -> Currents {
        Currents {
            i_d: self.xd * f.d - self.xr * f.r + self.xrd * f.rd,
            i_q: self.yq * f.q - self.yrq * f.rq,
            e_q: self.zd * f.d + self.zr * f.r - self.zrd * f.rd,
            e_rd: self.pq * f.q - self.prq * f.rq,
            e_rq: -self.qd * f.d + self.qr * f.r + self.qrd * f.rd,
        }
    }

    /// Named coefficient values, in a fixed order.
    pub fn named(&self) -> [(&'static str, f64); 13] {
        [
            ("X_d", self.xd),
            ("X_r", self.xr),
            ("X_rd", self.xrd),
            ("Y_q", self.yq),
            ("Y_rq", self.yrq),
            ("Z_d", self.zd),
            ("Z_r", self.zr),
            ("Z_rd", self.zrd),
            ("P_q", self.pq),
            ("P_rq", self.prq),
            ("Q_d", self.qd),
            ("Q_r", self.qr),
            ("Q_rd", self.qrd),
        ]
    }
}

/// One coefficient whose published value differs from the exact inverse.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientDiscrepancy {
    pub name: &'static str,
    pub published: f64,
    pub exact: f64,
}

/// Compare published coefficients against the exact inverse, reporting those off by more than `tol` (relative).
pub fn coefficient_discrepancies(
    published: &InversionCoefficients,
    exact: &InversionCoefficients,
    tol: f64,
) -> Vec<CoefficientDiscrepancy> {
    published
        .named()
        .iter()
        .zip(exact.named().iter())
        .filter(|((_, p), (_, e))| (p - e).abs() > tol * e.abs().max(1.0))
        .map(|((name, p), (_, e))| CoefficientDiscrepancy { name, published: *p, exact: *e })
        .collect()
}

/// Electromagnetic torque `Psi_d i_q - Psi_q i_d`.
#[inline]
pub fn generator_torque_pu(psi_d: f64, psi_q: f64, i_d: f64, i_q: f64) -> f64 {
    psi_d * i_q - psi_q * i_d
}

/// Power delivered to a grid of voltage `u` at load angle `theta`.
#[inline]
pub fn instantaneous_power(i_d: f64, i_q: f64, u: f64, theta: f64) -> f64 {
    -1.5 * (i_d * u * theta.sin() + i_q * u * theta.cos())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::fixtures::unit;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_fluxes(rng: &mut ChaCha8Rng) -> Fluxes {
        Fluxes {
            d: rng.random_range(-2.0..2.0),
            q: rng.random_range(-2.0..2.0),
            r: rng.random_range(-2.0..2.0),
            rd: rng.random_range(-2.0..2.0),
            rq: rng.random_range(-2.0..2.0),
        }
    }

    #[test]
    fn zero_fluxes_give_zero_currents() {
        let p = unit();
        assert_eq!(flux_inverse(&Fluxes::default(), p.flux()), Currents::default());
    }

    #[test]
    fn roundtrip_reproduces_fluxes() {
        let p = unit();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let f = random_fluxes(&mut rng);
            let back = p.flux().fluxes(&flux_inverse(&f, p.flux()));
            for (a, b) in [(f.d, back.d), (f.q, back.q), (f.r, back.r), (f.rd, back.rd), (f.rq, back.rq)] {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn exact_coefficients_reproduce_solver() {
        let p = unit();
        let c = InversionCoefficients::from_system(p.gen(), p.der(), p.flux());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let f = random_fluxes(&mut rng);
            let a = c.apply(&f);
            let b = flux_inverse(&f, p.flux());
            assert!((a.i_d - b.i_d).abs() < 1e-12 && (a.e_rq - b.e_rq).abs() < 1e-12);
            assert!((a.i_q - b.i_q).abs() < 1e-12 && (a.e_rd - b.e_rd).abs() < 1e-12);
        }
    }

    #[test]
    fn published_a_coefficients() {
        let p = unit();
        let c = InversionCoefficients::published(p.gen(), p.der()).unwrap();
        assert_eq!(c.a[0], 1.58);
        assert_eq!(c.a[1], 0.97);
        assert!((c.a[3] - 1.396 / 1.6946).abs() < 1e-4);
    }

    #[test]
    fn published_coefficients_are_reported_against_solver() {
        let p = unit();
        let published = InversionCoefficients::published(p.gen(), p.der()).unwrap();
        let exact = InversionCoefficients::from_system(p.gen(), p.der(), p.flux());
        let names: Vec<_> = coefficient_discrepancies(&published, &exact, 1e-9).iter().map(|d| d.name).collect();
        assert!(names.contains(&"Y_q"));
        assert!(names.contains(&"X_d"));
        assert_eq!(coefficient_discrepancies(&exact, &exact, 1e-12).len(), 0);
    }

    #[test]
    fn torque_and_power_basics() {
        assert_eq!(generator_torque_pu(0.0, 0.0, 0.0, 0.0), 0.0);
        assert_eq!(generator_torque_pu(1.0, 0.0, 0.0, 1.0), 1.0);
        assert_eq!(instantaneous_power(0.0, 0.0, 1.0, 0.3), 0.0);
        assert_eq!(instantaneous_power(1.0, 2.0, 0.0, 0.3), 0.0);
    }
}
