use std::f64::consts::TAU;

use nalgebra::DMatrix;
use proptest::prelude::*;

use hydrounit::config::Config;
use hydrounit::electrical::Fluxes;
use hydrounit::equilibria::operating_equilibrium;
use hydrounit::governor::governor_rate;
use hydrounit::model::{rhs_array, GovernorRow};
use hydrounit::stability::{analytic_jacobian, balanced_norm, eigen_bound, routh_hurwitz, JacobianForm, Stability};
use hydrounit::state::DIM;
use hydrounit::tolerances::Tolerances;
use hydrounit::UnitParams;

fn params() -> UnitParams {
    Config::defaults().unit_params().unwrap()
}

/// Monic coefficients, highest power first, of the polynomial with these real roots.
fn poly_from_roots(roots: &[f64]) -> Vec<f64> {
    let mut c = vec![1.0];
    for r in roots {
        let mut next = vec![0.0; c.len() + 1];
        for (i, a) in c.iter().enumerate() {
            next[i] += a;
            next[i + 1] -= a * r;
        }
        c = next;
    }
    c
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn flux_inversion_roundtrips(d in -2e4..2e4f64, q in -2e4..2e4f64, r in -2e4..2e4f64, rd in -2e4..2e4f64, rq in -2e4..2e4f64) {
        let p = params();
        let f = Fluxes { d, q, r, rd, rq };
        let back = p.flux().fluxes(&p.flux().invert(&f));
        let scale = [d, q, r, rd, rq].iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (a, b) in [(back.d, d), (back.q, q), (back.r, r), (back.rd, rd), (back.rq, rq)] {
            prop_assert!((a - b).abs() <= 1e-11 * scale);
        }
    }

    #[test]
    fn field_is_periodic_in_angle(gamma in 0.5..1.1f64, dth in -3.0..3.0f64, s in -0.05..0.05f64, k in -3i32..3) {
        let p = params().with_gamma(gamma);
        let eq = operating_equilibrium(gamma, &p, &Tolerances::default()).unwrap();
        let mut x = eq.state.to_array();
        x[0] = dth;
        x[1] = s;
        let mut y = x;
        y[0] += k as f64 * TAU;
        let (fx, fy) = (rhs_array(&x, &p, eq.mu_0).unwrap(), rhs_array(&y, &p, eq.mu_0).unwrap());
        for i in 0..DIM {
            prop_assert!((fx[i] - fy[i]).abs() <= 1e-9 * fx[i].abs().max(1.0), "component {}", i);
        }
    }

    #[test]
    fn governor_is_continuous_in_slip(s in -0.05..0.05f64, mu in -0.1..0.1f64) {
        let gov = params().gov;
        let h = 1e-10;
        let (a, b) = (governor_rate(s - h, mu, 0.5, &gov), governor_rate(s + h, mu, 0.5, &gov));
        prop_assert!((a - b).abs() <= 2.0 * h * gov.sigma / gov.t_c + 1e-12);
    }

    #[test]
    fn eigen_bound_survives_diagonal_similarity(gamma in 0.4..1.1f64, exps in proptest::collection::vec(-6i32..6, DIM)) {
        let p = params();
        let eq = operating_equilibrium(gamma, &p, &Tolerances::default()).unwrap();
        let j = analytic_jacobian(&eq, &p, JacobianForm::Exact(GovernorRow::Linear)).unwrap();
        let d: Vec<f64> = exps.iter().map(|&e| 10f64.powi(e)).collect();
        let scaled = DMatrix::from_fn(DIM, DIM, |r, c| d[r] * j[(r, c)] / d[c]);
        let (a, b) = (eigen_bound(&j).unwrap(), eigen_bound(&scaled).unwrap());
        prop_assert!((a - b).abs() <= 1e-8 * balanced_norm(&j), "{} vs {}", a, b);
    }

    #[test]
    fn routh_agrees_with_real_roots(roots in proptest::collection::vec(prop_oneof![-5.0..-0.1f64, 0.1..5.0f64], 1..9)) {
        let r = routh_hurwitz(&poly_from_roots(&roots), 1e-12);
        let expected = if roots.iter().all(|&x| x < 0.0) { Stability::Stable } else { Stability::Unstable };
        prop_assert_eq!(r.stability, expected);
        prop_assert_eq!(r.sign_changes, roots.iter().filter(|&&x| x > 0.0).count());
    }
}
