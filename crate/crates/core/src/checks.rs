//! Self-checks against tabulated data and independent oracles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::Reference;
use crate::electrical::{coefficient_discrepancies, CoefficientDiscrepancy, Fluxes, FluxSystem, InversionCoefficients};
use crate::equilibria::operating_equilibrium;
use crate::error::Result;
use crate::model::GovernorRow;
use crate::params::UnitParams;
use crate::stability::jacobian::EntryFlag;
use crate::stability::{analytic_jacobian, compare_jacobians, numeric_jacobian, JacobianForm};
use crate::tolerances::Tolerances;

/// Half a unit in the fourth decimal place.
pub const FOUR_DECIMALS: f64 = 5e-5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivedCheck {
    pub name: &'static str,
    pub derived: f64,
    pub reference: f64,
    pub pass: bool,
}

/// Derived winding data of `params` against the tabulated values.
pub fn derived_regression(params: &UnitParams, reference: &Reference) -> Vec<DerivedCheck> {
    let d = params.der();
    [
        ("x_ad", d.x_ad, reference.x_ad),
        ("x_aq", d.x_aq, reference.x_aq),
        ("x_r", d.x_r, reference.x_r),
        ("x_sr", d.x_sr, reference.x_sr),
        ("x_rd", d.x_rd, reference.x_rd),
        ("x_rq", d.x_rq, reference.x_rq),
        ("T_rd", d.t_rd, reference.t_rd),
        ("T_rq", d.t_rq, reference.t_rq),
    ]
    .into_iter()
    .map(|(name, derived, reference)| DerivedCheck { name, derived, reference, pass: (derived - reference).abs() < FOUR_DECIMALS })
    .collect()
}

/// Largest relative residual of forward-evaluating inverted random fluxes.
pub fn flux_roundtrip(system: &FluxSystem, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let mut draw = || rng.random_range(-2e4..2e4);
        let f = Fluxes { d: draw(), q: draw(), r: draw(), rd: draw(), rq: draw() };
        let back = system.fluxes(&system.invert(&f));
        let scale = [f.d, f.q, f.r, f.rd, f.rq].iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let err = [back.d - f.d, back.q - f.q, back.r - f.r, back.rd - f.rd, back.rq - f.rq]
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        worst = worst.max(err / scale);
    }
    worst
}

/// Published closed-form inversion coefficients that disagree with the exact inverse.
pub fn coefficient_check(params: &UnitParams, tol: f64) -> Result<Vec<CoefficientDiscrepancy>> {
    let published = InversionCoefficients::published(params.gen(), params.der())?;
    let exact = InversionCoefficients::from_system(params.gen(), params.der(), params.flux());
    Ok(coefficient_discrepancies(&published, &exact, tol))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JacobianCheck {
    pub gamma: f64,
    pub exact_max_relative_error: f64,
    pub published_max_relative_error: f64,
    /// Entries of the published form off the oracle by more than the threshold.
    pub published_flags: Vec<EntryFlag>,
    pub exact_flags: Vec<EntryFlag>,
}

/// Closed-form Jacobians against central differences at operating steady
/// states, with the deadband removed so the governor map is smooth.
pub fn jacobian_fidelity(gammas: &[f64], params: &UnitParams, tol: &Tolerances, h: f64, threshold: f64) -> Result<Vec<JacobianCheck>> {
    let p = params.with_deadband(0.0);
    gammas
        .iter()
        .map(|&gamma| {
            let eq = operating_equilibrium(gamma, &p, tol)?;
            let pg = p.with_gamma(gamma);
            let fd = numeric_jacobian(&eq.state.to_array(), &pg, eq.mu_0, h)?;
            let exact = compare_jacobians(&analytic_jacobian(&eq, &p, JacobianForm::Exact(GovernorRow::Linear))?, &fd, threshold);
            let published = compare_jacobians(&analytic_jacobian(&eq, &p, JacobianForm::Published)?, &fd, threshold);
            Ok(JacobianCheck {
                gamma,
                exact_max_relative_error: exact.max_relative_error,
                published_max_relative_error: published.max_relative_error,
                published_flags: published.flags,
                exact_flags: exact.flags,
            })
        })
        .collect()
}
