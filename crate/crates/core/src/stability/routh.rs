//! Routh-Hurwitz test on a real polynomial.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Stable,
    Unstable,
    Marginal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RouthOutcome {
    pub stability: Stability,
    /// First column of the Routh array, normalized by the leading coefficient.
    pub first_column: Vec<f64>,
    /// Smallest signed first-column entry.
    pub margin: f64,
    /// Sign changes in the first column (right-half-plane roots).
    pub sign_changes: usize,
}

/// Routh array for coefficients given highest power first. Entries with
/// magnitude below `relative * max|coeff|` count as zero. A zero pivot is
/// replaced by that tolerance; an all-zero row is replaced by the derivative
/// of the auxiliary polynomial and the verdict becomes at best marginal.
pub fn routh_hurwitz(coeffs: &[f64], relative: f64) -> RouthOutcome {
    let lead = coeffs[0];
    let a: Vec<f64> = coeffs.iter().map(|c| c / lead).collect();
    let n = a.len() - 1;
    let scale = a.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let eps = relative * scale;
    let width = n / 2 + 1;

    let row = |start: usize| -> Vec<f64> {
        let mut r: Vec<f64> = (start..=n).step_by(2).map(|k| a[k]).collect();
        r.resize(width, 0.0);
        r
    };
    let mut rows = vec![row(0), row(1)];
    let mut marginal = false;
    for i in 2..=n {
        let (prev, last) = (&rows[i - 2], &rows[i - 1]);
        let mut last = last.clone();
        if last.iter().all(|v| v.abs() <= eps) {
            // Auxiliary polynomial from the row above, differentiated.
            let deg = n + 2 - i;
            let aux = prev.clone();
            for (k, v) in last.iter_mut().enumerate() {
                let power = deg as isize - 2 * k as isize;
                *v = if power > 0 { aux[k] * power as f64 } else { 0.0 };
            }
            marginal = true;
            rows[i - 1] = last.clone();
        }
        if last[0].abs() <= eps {
            last[0] = eps;
            marginal = true;
            rows[i - 1][0] = eps;
        }
        let prev = &rows[i - 2];
        let mut next = vec![0.0; width];
        for k in 0..width - 1 {
            next[k] = (last[0] * prev[k + 1] - prev[0] * last[k + 1]) / last[0];
        }
        rows.push(next);
    }
    let first_column: Vec<f64> = rows.iter().take(n + 1).map(|r| r[0]).collect();
    let sign_changes = first_column.windows(2).filter(|w| (w[0] > 0.0) != (w[1] > 0.0)).count();
    let margin = first_column.iter().cloned().fold(f64::INFINITY, f64::min);
    let stability = if sign_changes > 0 || first_column.iter().any(|v| *v < -eps) {
        Stability::Unstable
    } else if marginal || first_column.iter().any(|v| v.abs() <= eps) {
        Stability::Marginal
    } else {
        Stability::Stable
    };
    RouthOutcome { stability, first_column, margin, sign_changes }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_verdicts() {
        // (l+1)(l+2)(l+3)
        assert_eq!(routh_hurwitz(&[1.0, 6.0, 11.0, 6.0], 1e-9).stability, Stability::Stable);
        // (l-1)(l+2)(l+3) = l^3 + 4 l^2 + l - 6
        let r = routh_hurwitz(&[1.0, 4.0, 1.0, -6.0], 1e-9);
        assert_eq!(r.stability, Stability::Unstable);
        assert_eq!(r.sign_changes, 1);
        // (l^2 - 0.2 l + 4)(l + 1): two right-half-plane roots
        let r = routh_hurwitz(&[1.0, 0.8, 3.8, 4.0], 1e-9);
        assert_eq!(r.sign_changes, 2);
    }

    #[test]
    fn imaginary_pair_is_marginal() {
        // (l^2 + 1)(l + 1) = l^3 + l^2 + l + 1
        let r = routh_hurwitz(&[1.0, 1.0, 1.0, 1.0], 1e-9);
        assert_eq!(r.stability, Stability::Marginal);
        // (l^2 + 4)(l^2 + 3 l + 2)
        let r = routh_hurwitz(&[1.0, 3.0, 6.0, 12.0, 8.0], 1e-9);
        assert_eq!(r.stability, Stability::Marginal);
    }

    #[test]
    fn leading_sign_is_normalized() {
        assert_eq!(routh_hurwitz(&[-1.0, -6.0, -11.0, -6.0], 1e-9).stability, Stability::Stable);
    }
}
