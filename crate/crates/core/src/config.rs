//! Run configuration: bundled defaults, JSON overrides, validation and hashing.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::GovernorRow;
use crate::params::{damper_resistances_from_formulas, derive_params, GeneratorRatings, GovernorParams, TurbineParams, UnitParams};
use crate::state::State;
use crate::tolerances::Tolerances;
use crate::transient::{IntegrationConfig, ScenarioOptions, StartMode};

/// The bundled default configuration.
pub const DEFAULT_JSON: &str = include_str!("../config/default.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSection {
    pub omega0: f64,
    pub r: f64,
    pub x_s: f64,
    pub x_d: f64,
    pub x_q: f64,
    pub x_d_prime: f64,
    pub x_d_dprime: f64,
    pub x_q_dprime: f64,
    #[serde(rename = "T_r")]
    pub t_r: f64,
    #[serde(rename = "T_d_dprime")]
    pub t_d_dprime: f64,
    #[serde(rename = "J")]
    pub j: f64,
    #[serde(rename = "U_nom")]
    pub u_nom: f64,
    pub theta0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DamperSection {
    pub r_rd: f64,
    pub r_rq: f64,
    /// Compute the damper resistances from winding data instead of using `r_rd`, `r_rq`.
    pub from_formulas: bool,
    #[serde(rename = "T_q_dprime")]
    pub t_q_dprime: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GovernorSection {
    pub z: f64,
}

/// Constants not fixed by nameplate data, chosen to reproduce the observed regimes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Calibration {
    #[serde(rename = "E_r")]
    pub e_r: f64,
    #[serde(rename = "S_b")]
    pub s_b: f64,
    pub sigma: f64,
    #[serde(rename = "T_c")]
    pub t_c: f64,
    pub rho_o: f64,
    pub rho_c: f64,
    pub mu_min: f64,
    pub mu_max: f64,
}

/// Tabulated winding data, kept for regression checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Reference {
    pub x_ad: f64,
    pub x_aq: f64,
    pub x_r: f64,
    pub x_sr: f64,
    pub x_rd: f64,
    pub x_rq: f64,
    #[serde(rename = "T_rd")]
    pub t_rd: f64,
    #[serde(rename = "T_rq")]
    pub t_rq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub initial_state: State,
    pub start: StartMode,
    /// Voltage ratios of the amplitude sweep.
    pub betas: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub start: f64,
    pub end: f64,
    pub points: usize,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self.points {
            0 => vec![],
            1 => vec![self.start],
            n => (0..n).map(|i| self.start + (self.end - self.start) * i as f64 / (n - 1) as f64).collect(),
        }
    }

    fn validate(&self, key: &str) -> Result<()> {
        if self.points == 0 || !(self.start > 0.0) || !(self.end >= self.start) || !self.end.is_finite() {
            return Err(Error::param(key, "needs points >= 1 and 0 < start <= end"));
        }
        if self.points > 1 && self.end == self.start {
            return Err(Error::param(key, "start and end coincide"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilitySection {
    pub governor_row: GovernorRow,
    pub grid: Grid,
    pub equilibria_grid: Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub gen: GeneratorSection,
    pub damper: DamperSection,
    pub tur: TurbineParams,
    pub gov: GovernorSection,
    pub calibration: Calibration,
    /// Where each value comes from; free text.
    pub provenance: BTreeMap<String, String>,
    pub reference: Reference,
    pub gamma: f64,
    pub integration: IntegrationConfig,
    pub tolerances: Tolerances,
    pub scenario: ScenarioSection,
    pub stability: StabilitySection,
}

fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Parameter errors from the model carry model-side key paths; point them
/// at the config section the value actually lives in.
fn remap_key(key: &str) -> String {
    match key {
        "gen.E_r" => "calibration.E_r".into(),
        "gen.S_b" => "calibration.S_b".into(),
        k if k.starts_with("gov.") && k != "gov.z" => format!("calibration.{}", &k[4..]),
        k => k.into(),
    }
}

impl Config {
    /// The bundled defaults.
    pub fn defaults() -> Self {
        Self::from_json_str("{}").expect("bundled defaults are valid")
    }

    /// Defaults overridden by a (possibly partial) JSON document.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let over: Value = serde_json::from_str(text).map_err(|e| Error::Config {
            path: format!("line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        let mut base: Value = serde_json::from_str(DEFAULT_JSON).expect("bundled defaults parse");
        merge(&mut base, over);
        let cfg: Config = serde_path_to_error::deserialize(base).map_err(|e| Error::Config {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_json_str(&text)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json_pretty() + "\n").map_err(|e| Error::Config {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }

    /// SHA-256 of the canonical JSON (keys sorted, compact).
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_value(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical.to_string().as_bytes()))
    }

    pub fn generator(&self) -> GeneratorRatings {
        let g = &self.gen;
        GeneratorRatings {
            omega0: g.omega0,
            r: g.r,
            x_s: g.x_s,
            x_d: g.x_d,
            x_q: g.x_q,
            x_d_prime: g.x_d_prime,
            x_d_dprime: g.x_d_dprime,
            x_q_dprime: g.x_q_dprime,
            t_r: g.t_r,
            t_d_dprime: g.t_d_dprime,
            j: g.j,
            e_r: self.calibration.e_r,
            u_nom: g.u_nom,
            theta0: g.theta0,
            s_b: self.calibration.s_b,
        }
    }

    pub fn governor(&self) -> GovernorParams {
        let c = &self.calibration;
        GovernorParams {
            z: self.gov.z,
            sigma: c.sigma,
            t_c: c.t_c,
            rho_o: c.rho_o,
            rho_c: c.rho_c,
            mu_min: c.mu_min,
            mu_max: c.mu_max,
        }
    }

    /// Damper resistances in use, from the table or from the formulas.
    pub fn damper_resistances(&self) -> Result<(f64, f64)> {
        if !self.damper.from_formulas {
            return Ok((self.damper.r_rd, self.damper.r_rq));
        }
        let gen = self.generator();
        let der = derive_params(&gen, self.damper.r_rd, self.damper.r_rq).map_err(|e| self.remap(e))?;
        Ok(damper_resistances_from_formulas(&gen, der.x_rd, der.x_rq, self.damper.t_q_dprime))
    }

    pub fn unit_params(&self) -> Result<UnitParams> {
        let (r_rd, r_rq) = self.damper_resistances()?;
        UnitParams::new(
            self.generator(),
            r_rd,
            r_rq,
            self.tur,
            self.governor(),
            self.gamma,
            self.tolerances.condition_limit,
        )
        .map_err(|e| self.remap(e))
    }

    pub fn scenario_options(&self) -> ScenarioOptions {
        ScenarioOptions {
            start: self.scenario.start,
            initial_state: self.scenario.initial_state,
            tolerances: self.tolerances,
        }
    }

    fn remap(&self, e: Error) -> Error {
        match e {
            Error::Parameter { key, reason } => Error::Parameter { key: remap_key(&key), reason },
            other => other,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.unit_params()?;
        self.integration.validate()?;
        let t = &self.tolerances;
        for (key, v) in [
            ("tolerances.equilibrium_residual", t.equilibrium_residual),
            ("tolerances.root_bisection", t.root_bisection),
            ("tolerances.condition_limit", t.condition_limit),
            ("tolerances.routh_relative", t.routh_relative),
            ("tolerances.marginal_relative", t.marginal_relative),
            ("tolerances.window_resolution", t.window_resolution),
            ("tolerances.eq_tol", t.eq_tol),
            ("tolerances.cycle_tol", t.cycle_tol),
            ("tolerances.period_jitter", t.period_jitter),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(key, format!("must be positive, got {v}")));
            }
        }
        if t.root_grid < 8 {
            return Err(Error::param("tolerances.root_grid", "needs at least 8 points"));
        }
        if t.min_peaks < 2 {
            return Err(Error::param("tolerances.min_peaks", "needs at least 2 peaks"));
        }
        let b = &self.scenario.betas;
        if b.is_empty() || b.iter().any(|v| !(*v > 0.0 && *v <= 1.2)) || b.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::param("scenario.betas", "must be ascending within (0, 1.2]"));
        }
        if self.scenario.initial_state.to_array().iter().any(|v| !v.is_finite()) {
            return Err(Error::param("scenario.initial_state", "must be finite"));
        }
        self.stability.grid.validate("stability.grid")?;
        self.stability.equilibria_grid.validate("stability.equilibria_grid")?;
        Ok(())
    }
}
