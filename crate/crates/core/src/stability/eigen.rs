//! Spectrum of a balanced matrix via real Schur decomposition.

use nalgebra::{Complex, DMatrix};

use super::charpoly::balance;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 10_000;

/// All eigenvalues, sorted by decreasing real part.
pub fn spectrum(a: &DMatrix<f64>) -> Result<Vec<Complex<f64>>> {
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Overflow("non-finite matrix entry".into()));
    }
    let (b, _) = balance(a);
    let schur = b.try_schur(f64::EPSILON, MAX_SWEEPS).ok_or(Error::EigenNonConvergence)?;
    let mut ev: Vec<Complex<f64>> = schur.complex_eigenvalues().iter().cloned().collect();
    ev.sort_by(|x, y| y.re.total_cmp(&x.re));
    Ok(ev)
}

/// Largest real part of the spectrum.
pub fn eigen_bound(a: &DMatrix<f64>) -> Result<f64> {
    Ok(spectrum(a)?[0].re)
}

/// Frobenius norm after balancing, the scale used for marginal decisions.
pub fn balanced_norm(a: &DMatrix<f64>) -> f64 {
    balance(a).0.norm()
}
