use serde::{Deserialize, Serialize};

use super::Trajectory;
use crate::error::{Error, Result};
use crate::state::{State, DIM, SLIP};
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeKind {
    Equilibrium,
    LimitCycle,
    Unresolved,
}

impl RegimeKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegimeKind::Equilibrium => "equilibrium",
            RegimeKind::LimitCycle => "limit_cycle",
            RegimeKind::Unresolved => "unresolved",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub kind: RegimeKind,
    /// Peak-to-peak amplitude of each component after the discard time.
    pub amplitude: [f64; DIM],
    /// Mean of each component over the same window.
    pub mean: [f64; DIM],
    pub period: Option<f64>,
    /// Largest relative deviation of a peak spacing from the mean spacing.
    pub jitter: Option<f64>,
    pub peaks: usize,
    pub final_state: State,
    pub gamma: f64,
}

impl RegimeReport {
    pub fn slip_amplitude(&self) -> f64 {
        self.amplitude[SLIP]
    }
}

/// Indices of maxima in `x`, each confirmed once the signal falls `h` below
/// it; a maximum is only sought after the signal rises `h` above the running
/// minimum, so the first sample never counts as a peak.
pub fn schmitt_peaks(x: &[f64], h: f64) -> Vec<usize> {
    let mut peaks = Vec::new();
    if x.is_empty() {
        return peaks;
    }
    let mut rising = false;
    let (mut best, mut at) = (x[0], 0);
    for (i, &v) in x.iter().enumerate().skip(1) {
        if rising {
            if v > best {
                best = v;
                at = i;
            } else if v < best - h {
                peaks.push(at);
                rising = false;
                best = v;
            }
        } else if v < best {
            best = v;
        } else if v > best + h {
            rising = true;
            best = v;
            at = i;
        }
    }
    peaks
}

/// Amplitudes after `t_discard`, with the kind left unresolved.
pub fn measure_regime(traj: &Trajectory, t_discard: f64) -> Result<RegimeReport> {
    let start = traj.times.iter().position(|&t| t >= t_discard).ok_or_else(|| {
        Error::InsufficientData(format!("no samples after the discard time {t_discard}"))
    })?;
    let window = &traj.states[start..];
    if window.len() < 3 {
        return Err(Error::InsufficientData(format!("{} samples after discard", window.len())));
    }
    let rows: Vec<[f64; DIM]> = window.iter().map(|s| s.to_array()).collect();
    let mut amplitude = [0.0; DIM];
    let mut mean = [0.0; DIM];
    for i in 0..DIM {
        let (lo, hi, sum) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY, 0.0), |(lo, hi, sum), r| {
            (lo.min(r[i]), hi.max(r[i]), sum + r[i])
        });
        amplitude[i] = hi - lo;
        mean[i] = sum / rows.len() as f64;
    }
    Ok(RegimeReport {
        kind: RegimeKind::Unresolved,
        amplitude,
        mean,
        period: None,
        jitter: None,
        peaks: 0,
        final_state: *traj.last(),
        gamma: traj.gamma,
    })
}

/// Classify the part of a trajectory after `t_discard`. Amplitudes are
/// compared relative to the larger of one and each component's mean size,
/// since the flux components sit near 1e4 in absolute units.
pub fn classify_regime(traj: &Trajectory, t_discard: f64, tol: &Tolerances) -> Result<RegimeReport> {
    let mut report = measure_regime(traj, t_discard)?;
    let scaled = (0..DIM).map(|i| report.amplitude[i] / report.mean[i].abs().max(1.0)).fold(0.0, f64::max);
    let amplitude = report.amplitude;
    let start = traj.times.iter().position(|&t| t >= t_discard).unwrap_or(0);
    if scaled < tol.eq_tol {
        report.kind = RegimeKind::Equilibrium;
        return Ok(report);
    }
    if amplitude[SLIP] <= tol.cycle_tol {
        return Ok(report);
    }
    let s: Vec<f64> = traj.states[start..].iter().map(|r| r.s).collect();
    let times = &traj.times[start..];
    let peaks = schmitt_peaks(&s, 0.5 * tol.cycle_tol);
    report.peaks = peaks.len();
    if peaks.len() < tol.min_peaks {
        return Err(Error::InsufficientData(format!("{} slip peaks, need {}", peaks.len(), tol.min_peaks)));
    }
    let spacing: Vec<f64> = peaks.windows(2).map(|w| times[w[1]] - times[w[0]]).collect();
    let mean = spacing.iter().sum::<f64>() / spacing.len() as f64;
    let jitter = spacing.iter().map(|d| (d - mean).abs() / mean).fold(0.0, f64::max);
    report.period = Some(mean);
    report.jitter = Some(jitter);
    if jitter < tol.period_jitter {
        report.kind = RegimeKind::LimitCycle;
    }
    Ok(report)
}
