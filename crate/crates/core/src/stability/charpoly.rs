//! Diagonal balancing and the characteristic polynomial.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const RADIX: f64 = 2.0;

/// Parlett-Reinsch balancing by powers of two. Returns `D^-1 A D` and the
/// diagonal of `D`; the spectrum is unchanged exactly.
pub fn balance(a: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>) {
    let n = a.nrows();
    let mut m = a.clone();
    let mut scale = vec![1.0; n];
    let sqrdx = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for k in 0..n {
                if k != i {
                    c += m[(k, i)].abs();
                    r += m[(i, k)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut g = r / RADIX;
            let mut f = 1.0;
            while c < g {
                f *= RADIX;
                c *= sqrdx;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= sqrdx;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                scale[i] *= f;
                for k in 0..n {
                    m[(i, k)] /= f;
                }
                for k in 0..n {
                    m[(k, i)] *= f;
                }
            }
        }
    }
    (m, scale)
}

/// Coefficients of `det(lambda I - A)` by Faddeev-LeVerrier, highest power
/// first, leading coefficient one. The matrix is balanced first.
pub fn characteristic_polynomial(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::Domain(format!("matrix is {}x{}, not square", n, a.ncols())));
    }
    let (b, _) = balance(a);
    let mut coeffs = vec![0.0; n + 1];
    coeffs[0] = 1.0;
    let mut m = DMatrix::<f64>::zeros(n, n);
    for k in 1..=n {
        for i in 0..n {
            m[(i, i)] += coeffs[k - 1];
        }
        let am = &b * &m;
        let c = -am.trace() / k as f64;
        if !c.is_finite() || am.iter().any(|v| !v.is_finite()) {
            return Err(Error::Overflow(format!("characteristic coefficient {k}")));
        }
        coeffs[k] = c;
        m = am;
    }
    Ok(coeffs)
}
