//! Flat JSON run configuration shared by every subcommand.
//!
//! One document per run, no layering. Unknown keys are rejected so typos do
//! not silently fall back to defaults. Each subcommand reads only the keys
//! it needs; `README.md` lists them per command.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::operators::FlowParams;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    // Flow and discretization.
    pub nu: Option<f64>,
    #[serde(rename = "A")]
    pub a: Option<f64>,
    #[serde(rename = "B")]
    pub b: Option<f64>,
    #[serde(rename = "R")]
    pub outer_radius: Option<f64>,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    #[serde(rename = "K")]
    pub k_max: Option<usize>,
    pub k: Option<i32>,
    pub seed: Option<u64>,
    pub out: Option<String>,

    // Resolvent and pseudospectrum.
    pub lambda_min: Option<f64>,
    pub lambda_max: Option<f64>,
    pub n_lambda: Option<usize>,
    pub refine_iters: Option<usize>,

    // Sweeps: lists replacing the scalar of the same flow parameter.
    pub nu_values: Option<Vec<f64>>,
    pub b_values: Option<Vec<f64>>,
    pub r_values: Option<Vec<f64>>,

    // Semigroup and rates.
    pub times: Option<Vec<f64>>,
    pub gp_tol: Option<f64>,
    pub variable: Option<String>,
    pub expected_exponent: Option<f64>,
    pub exponent_tol: Option<f64>,

    // Basis and damping.
    pub l_max: Option<usize>,
    pub gram_tol: Option<f64>,
    pub residual_tol: Option<f64>,
    pub n_t: Option<usize>,
    pub c_prime: Option<f64>,

    // Simulation.
    pub dt: Option<f64>,
    #[serde(rename = "T")]
    pub t_final: Option<f64>,
    pub profile: Option<String>,
    pub amplitude: Option<f64>,
    pub nonlinear: Option<bool>,
    pub n_records: Option<usize>,

    // Threshold.
    pub a_lo: Option<f64>,
    pub a_hi: Option<f64>,
    pub iters: Option<usize>,
    pub ladder: Option<usize>,
    pub decay_ratio: Option<f64>,
    pub growth_cap: Option<f64>,

    // Inequalities.
    pub samples: Option<usize>,
}

impl ExperimentConfig {
    /// Parse a document, returning it together with its JSON value for the
    /// provenance echo.
    pub fn from_json_str(text: &str) -> Result<(Self, Value)> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| Error::config(format!("config is not valid JSON: {e}")))?;
        if !value.is_object() {
            return Err(Error::config("config must be a flat JSON object"));
        }
        let cfg: Self = serde_json::from_value(value.clone()).map_err(|e| Error::config(format!("config: {e}")))?;
        Ok((cfg, value))
    }

    pub fn load(path: &Path) -> Result<(Self, Value)> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    /// Flow parameters with defaults `nu = 1e-3, A = 0, B = 1, R = 2`.
    pub fn params(&self) -> Result<FlowParams> {
        FlowParams::new(
            self.nu.unwrap_or(1e-3),
            self.a.unwrap_or(0.0),
            self.b.unwrap_or(1.0),
            self.outer_radius.unwrap_or(2.0),
        )
    }

    /// Every combination of the `nu`, `B`, `R` lists (scalars when a list is
    /// absent), `nu` varying slowest.
    pub fn param_sweep(&self) -> Result<Vec<FlowParams>> {
        let base = self.params()?;
        let nus = self.nu_values.clone().unwrap_or_else(|| vec![base.nu]);
        let bs = self.b_values.clone().unwrap_or_else(|| vec![base.b]);
        let rs = self.r_values.clone().unwrap_or_else(|| vec![base.outer_radius]);
        if nus.is_empty() || bs.is_empty() || rs.is_empty() {
            return Err(Error::config("sweep lists must not be empty"));
        }
        let mut out = Vec::with_capacity(nus.len() * bs.len() * rs.len());
        for &nu in &nus {
            for &b in &bs {
                for &r in &rs {
                    out.push(FlowParams::new(nu, base.a, b, r)?);
                }
            }
        }
        Ok(out)
    }

    pub fn n_or(&self, default: usize) -> usize {
        self.n.unwrap_or(default)
    }

    pub fn k_or(&self, default: i32) -> i32 {
        self.k.unwrap_or(default)
    }

    pub fn seed_or(&self, default: u64) -> u64 {
        self.seed.unwrap_or(default)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_echoes() {
        let (c, v) = ExperimentConfig::from_json_str(r#"{"nu": 0.001, "B": 2, "R": 2, "N": 48, "T": 5}"#).unwrap();
        assert_eq!(c.b, Some(2.0));
        assert_eq!(c.n, Some(48));
        assert_eq!(c.t_final, Some(5.0));
        assert_eq!(v["N"], 48);
        let p = c.params().unwrap();
        assert_eq!((p.nu, p.a, p.b, p.outer_radius), (1e-3, 0.0, 2.0, 2.0));
    }

    #[test]
    fn unknown_key_is_a_config_error() {
        let e = ExperimentConfig::from_json_str(r#"{"nu": 0.001, "bogus": 1}"#).unwrap_err();
        assert!(e.is_config());
        assert!(e.to_string().contains("bogus"));
    }

    #[test]
    fn non_object_is_rejected() {
        assert!(ExperimentConfig::from_json_str("[1, 2]").unwrap_err().is_config());
        assert!(ExperimentConfig::from_json_str("{").unwrap_err().is_config());
    }

    #[test]
    fn sweep_order_is_nu_major() {
        let (c, _) =
            ExperimentConfig::from_json_str(r#"{"nu_values": [1e-4, 1e-3], "b_values": [1, 2], "R": 2}"#).unwrap();
        let s = c.param_sweep().unwrap();
        let pairs: Vec<(f64, f64)> = s.iter().map(|p| (p.nu, p.b)).collect();
        assert_eq!(pairs, vec![(1e-4, 1.0), (1e-4, 2.0), (1e-3, 1.0), (1e-3, 2.0)]);
    }

    #[test]
    fn invalid_params_surface_as_config_errors() {
        let (c, _) = ExperimentConfig::from_json_str(r#"{"R": 0.5}"#).unwrap();
        assert!(c.params().unwrap_err().is_config());
    }
}
