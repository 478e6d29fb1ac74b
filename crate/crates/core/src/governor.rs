//! Speed governor: deadband on slip, rate limit, vane stops, servomotor lag.

use crate::params::GovernorParams;

/// Deadband response `sigma * chi_s(s)`.
#[inline]
pub fn deadband(s: f64, gov: &GovernorParams) -> f64 {
    let half = 0.5 * gov.z;
    if s >= half {
        gov.sigma * (s - half)
    } else if s <= -half {
        gov.sigma * (s + half)
    } else {
        0.0
    }
}

/// Rate command clamped to `[rho_o, rho_c]`.
#[inline]
pub fn rate_limit(eta: f64, gov: &GovernorParams) -> f64 {
    eta.clamp(gov.rho_o, gov.rho_c)
}

/// Vane deviation after the stops: `mu_0 + mu_delta` clamped to `[mu_min, mu_max]`, minus `mu_0`.
#[inline]
pub fn vane_saturation(mu_delta: f64, mu0: f64, gov: &GovernorParams) -> f64 {
    (mu0 + mu_delta).clamp(gov.mu_min, gov.mu_max) - mu0
}

/// The part of the rate command that would push the vanes further into a stop.
#[inline]
pub fn stop_logic(mu_delta: f64, mu0: f64, rate_cmd: f64, gov: &GovernorParams) -> f64 {
    let mu = mu0 + mu_delta;
    if (mu < gov.mu_min && rate_cmd < 0.0) || (mu > gov.mu_max && rate_cmd > 0.0) {
        rate_cmd
    } else {
        0.0
    }
}

/// Vane velocity: deadband, feedback, rate limit, stop logic, servomotor.
#[inline]
pub fn governor_rate(s: f64, mu_delta: f64, mu0: f64, gov: &GovernorParams) -> f64 {
    let eta = -deadband(s, gov) - vane_saturation(mu_delta, mu0, gov);
    let rate = rate_limit(eta, gov);
    (rate - stop_logic(mu_delta, mu0, rate, gov)) / gov.t_c
}

/// Which smooth piece of the governor map a point lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Region {
    pub deadband: i8,
    pub rate: i8,
    pub vanes: i8,
}

impl Region {
    pub fn of(s: f64, mu_delta: f64, mu0: f64, gov: &GovernorParams) -> Self {
        let half = 0.5 * gov.z;
        let band = if gov.z == 0.0 {
            0
        } else if s > half {
            1
        } else if s < -half {
            -1
        } else {
            0
        };
        let eta = -deadband(s, gov) - vane_saturation(mu_delta, mu0, gov);
        let rate = if eta > gov.rho_c {
            1
        } else if eta < gov.rho_o {
            -1
        } else {
            0
        };
        let mu = mu0 + mu_delta;
        let vanes = if mu > gov.mu_max {
            1
        } else if mu < gov.mu_min {
            -1
        } else {
            0
        };
        Region { deadband: band, rate, vanes }
    }

    /// Name of the first boundary separating two regions.
    pub fn boundary_to(&self, other: &Region) -> Option<&'static str> {
        if self.deadband != other.deadband {
            Some("deadband")
        } else if self.rate != other.rate {
            Some("rate-limit")
        } else if self.vanes != other.vanes {
            Some("vane-stop")
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gov(sigma: f64, z: f64) -> GovernorParams {
        GovernorParams { z, sigma, t_c: 0.5, rho_o: -0.1, rho_c: 0.1, mu_min: 0.05, mu_max: 1.0 }
    }

    #[test]
    fn deadband_pieces() {
        let g = gov(1.0, 0.002);
        assert_eq!(deadband(0.0005, &g), 0.0);
        assert!((deadband(0.011, &g) - 0.010).abs() < 1e-15);
        assert!((deadband(-0.011, &g) + 0.010).abs() < 1e-15);
    }

    #[test]
    fn deadband_is_continuous_at_edge() {
        let g = gov(3.0, 0.002);
        let edge = deadband(0.001, &g);
        for eps in [1e-6, 1e-7, 1e-9] {
            assert!((deadband(0.001 + eps, &g) - edge).abs() <= 3.0 * eps * (1.0 + 1e-9));
            assert!((deadband(0.001 - eps, &g) - edge).abs() <= 3.0 * eps * (1.0 + 1e-9));
        }
    }

    #[test]
    fn rate_limit_clamps() {
        let g = gov(1.0, 0.0);
        assert_eq!(rate_limit(0.0, &g), 0.0);
        assert_eq!(rate_limit(0.5, &g), 0.1);
        assert_eq!(rate_limit(-0.5, &g), -0.1);
    }

    #[test]
    fn vane_saturation_clamps_deviation() {
        let g = gov(1.0, 0.0);
        assert_eq!(vane_saturation(0.0, 0.5, &g), 0.0);
        assert!((vane_saturation(0.7, 0.5, &g) - 0.5).abs() < 1e-15);
        assert!((vane_saturation(-0.5, 0.5, &g) + 0.45).abs() < 1e-15);
    }

    #[test]
    fn stop_logic_blocks_outward_push_only() {
        let g = gov(1.0, 0.0);
        assert_eq!(stop_logic(0.55, 0.5, 0.1, &g), 0.1);
        assert_eq!(stop_logic(0.55, 0.5, -0.1, &g), 0.0);
        assert_eq!(stop_logic(0.0, 0.5, 0.1, &g), 0.0);
        assert_eq!(stop_logic(0.0, 0.5, -0.1, &g), 0.0);
    }

    #[test]
    fn governor_rate_examples() {
        assert_eq!(governor_rate(0.0, 0.0, 0.4, &gov(1.0, 0.002)), 0.0);
        let mut wide = gov(1.0, 0.002);
        wide.rho_o = -10.0;
        wide.rho_c = 10.0;
        assert!((governor_rate(0.011, 0.0, 0.4, &wide) + 0.02).abs() < 1e-14);
        assert!((governor_rate(5.0, 0.0, 0.4, &gov(1.0, 0.002)) + 0.2).abs() < 1e-14);
    }

    #[test]
    fn regions_detect_deadband_edge() {
        let g = gov(1.0, 0.002);
        let inside = Region::of(0.0009, 0.0, 0.4, &g);
        let outside = Region::of(0.0011, 0.0, 0.4, &g);
        assert_eq!(inside.boundary_to(&outside), Some("deadband"));
        assert_eq!(inside.boundary_to(&inside), None);
    }
}
