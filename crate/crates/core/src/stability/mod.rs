//! Local stability of steady states.

pub mod charpoly;
pub mod eigen;
pub mod jacobian;
pub mod routh;
pub mod sweep;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use charpoly::{balance, characteristic_polynomial};
pub use eigen::{balanced_norm, eigen_bound, spectrum};
pub use jacobian::{analytic_jacobian, compare_jacobians, numeric_jacobian, JacobianComparison, JacobianForm};
pub use routh::{routh_hurwitz, RouthOutcome, Stability};
pub use sweep::{stability_sweep, StabilitySweep, Window};

use crate::error::Result;
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    RouthHurwitz,
    EigenBound,
    Transient,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::RouthHurwitz => "routh_hurwitz",
            Method::EigenBound => "eigen_bound",
            Method::Transient => "transient",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub method: Method,
    pub stable: Stability,
    /// Largest real part for the eigen path, smallest first-column entry for Routh.
    pub margin: f64,
    pub gamma: f64,
    pub branch: usize,
}

/// Routh-Hurwitz verdict for a Jacobian.
pub fn classify_routh(j: &DMatrix<f64>, tol: &Tolerances, gamma: f64, branch: usize) -> Result<StabilityVerdict> {
    let coeffs = characteristic_polynomial(j)?;
    let r = routh_hurwitz(&coeffs, tol.routh_relative);
    Ok(StabilityVerdict { method: Method::RouthHurwitz, stable: r.stability, margin: r.margin, gamma, branch })
}

/// Eigenvalue verdict; margins within `marginal_relative * |J|` are marginal.
pub fn classify_eigen(j: &DMatrix<f64>, tol: &Tolerances, gamma: f64, branch: usize) -> Result<StabilityVerdict> {
    let bound = eigen_bound(j)?;
    let band = tol.marginal_relative * balanced_norm(j);
    let stable = if bound.abs() <= band {
        Stability::Marginal
    } else if bound < 0.0 {
        Stability::Stable
    } else {
        Stability::Unstable
    };
    Ok(StabilityVerdict { method: Method::EigenBound, stable, margin: bound, gamma, branch })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn companion(coeffs: &[f64]) -> DMatrix<f64> {
        let n = coeffs.len() - 1;
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n - 1 {
            a[(i, i + 1)] = 1.0;
        }
        for k in 0..n {
            a[(n - 1, k)] = -coeffs[n - k];
        }
        a
    }

    fn expand(roots: &[f64]) -> Vec<f64> {
        let mut p = vec![1.0];
        for r in roots {
            let mut q = vec![0.0; p.len() + 1];
            for (i, c) in p.iter().enumerate() {
                q[i] += c;
                q[i + 1] -= c * r;
            }
            p = q;
        }
        p
    }

    #[test]
    fn zero_and_identity_polynomials() {
        let z = characteristic_polynomial(&DMatrix::zeros(9, 9)).unwrap();
        assert_eq!(z[0], 1.0);
        assert!(z[1..].iter().all(|c| *c == 0.0));
        let d = characteristic_polynomial(&(-DMatrix::<f64>::identity(9, 9))).unwrap();
        let binom = [1.0, 9.0, 36.0, 84.0, 126.0, 126.0, 84.0, 36.0, 9.0, 1.0];
        for (x, y) in d.iter().zip(binom) {
            assert!((x - y).abs() < 1e-12 * y);
        }
    }

    #[test]
    fn shifted_roots_are_classified() {
        let stable: Vec<f64> = (1..=9).map(|k| -(k as f64)).collect();
        let p = expand(&stable);
        assert_eq!(routh_hurwitz(&p, 1e-9).stability, Stability::Stable);
        let mut unstable = stable.clone();
        unstable[0] = 1.0;
        assert_eq!(routh_hurwitz(&expand(&unstable), 1e-9).stability, Stability::Unstable);
    }

    #[test]
    fn imaginary_pair_with_stable_factors() {
        // (l^2 + 1) (l + 1) ... (l + 7)
        let stable = expand(&(1..=7).map(|k| -(k as f64)).collect::<Vec<_>>());
        let mut p = vec![0.0; stable.len() + 2];
        for (i, c) in stable.iter().enumerate() {
            p[i] += c;
            p[i + 2] += c;
        }
        assert_eq!(routh_hurwitz(&p, 1e-9).stability, Stability::Marginal);
        let a = companion(&p);
        let b = eigen_bound(&a).unwrap();
        assert!(b.abs() < 1e-8 * balanced_norm(&a), "{b}");
    }

    #[test]
    fn diagonal_bound() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-3.0, -2.0, -0.5, -7.0]));
        assert!((eigen_bound(&a).unwrap() + 0.5).abs() < 1e-14);
        let v = classify_eigen(&a, &Tolerances::default(), 1.0, 0).unwrap();
        assert_eq!(v.stable, Stability::Stable);
    }

    #[test]
    fn similarity_of_known_spectrum() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let roots = [-0.3, -1.1, -2.0, -0.05, -4.5, -0.8, -3.3, -1.7, -6.0];
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&roots));
        let m = DMatrix::from_fn(9, 9, |_, _| rng.random_range(-1.0..1.0));
        let q = m.qr().q();
        let a = &q * d * q.transpose();
        let got = characteristic_polynomial(&a).unwrap();
        let want = expand(&roots);
        for (x, y) in got.iter().zip(want.iter()) {
            assert!((x - y).abs() <= 1e-7 * y.abs().max(1e-3), "{x} vs {y}");
        }
    }
}
