use std::collections::BTreeMap;
use std::f64::consts::PI;

use degensemi_core::coefficients::{CoefficientField, CoefficientSpec};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::CliError;

pub const DEFAULT_CONFIG: &str = include_str!("../config/default.toml");

pub const DEFAULT_SEED: u64 = 0xF001;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: Problem,
    pub discretization: Discretization,
    pub sweep: Sweep,
    pub oracle: Oracle,
    pub evolve: Evolve,
    #[serde(default)]
    pub output: Output,
    #[serde(default)]
    pub families: BTreeMap<String, CoefficientSpec>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Problem {
    pub d: usize,
    pub m: f64,
    pub gamma: f64,
    pub drift: f64,
    pub drift_bound: f64,
    #[serde(default)]
    pub perturb: Vec<String>,
    pub freeze: Option<String>,
    #[serde(default)]
    pub corners: Vec<String>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Discretization {
    /// Nodes of one-dimensional grids.
    pub n: usize,
    /// Nodes per axis when `d ≥ 2`.
    pub n_tensor: usize,
    /// Nodes per axis for eigenvalue checks.
    pub n_spectral: usize,
    pub grading: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub seed: Option<String>,
    pub rays_deg: Vec<f64>,
    pub magnitudes: Vec<f64>,
    pub sector_rays_deg: Vec<f64>,
    pub times: Vec<f64>,
    pub t_bar: f64,
    pub drift_steps: usize,
    pub eps_bar: f64,
    pub eps_levels: usize,
    pub lambda0: f64,
    pub probes: usize,
    pub interpolation_probes: usize,
    pub trials: usize,
    pub vanishing_probes: usize,
    pub vanishing_lambda: f64,
    pub vanishing_time: f64,
    pub lambda_perturb: f64,
    pub lambda_freeze: f64,
    pub lambda_corners: f64,
    pub freeze_d1: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Oracle {
    pub thetas_deg: Vec<f64>,
    pub magnitudes: Vec<f64>,
    pub drifts: Vec<f64>,
    pub gammas: Vec<f64>,
    pub nprobe: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Evolve {
    pub times: Vec<f64>,
    pub datum: Datum,
}

/// Initial data for `evolve`.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Datum {
    Constant { value: f64 },
    /// `Π cos(freq · π xᵢ / M)`.
    Cosine { freq: f64 },
    /// `exp(−|x − c|² / w²)` with the same centre on every axis.
    Bump { center: f64, width: f64 },
}

impl Datum {
    pub fn eval(&self, x: &[f64], m: f64) -> f64 {
        match *self {
            Datum::Constant { value } => value,
            Datum::Cosine { freq } => x.iter().map(|&xi| (freq * PI * xi / m).cos()).product(),
            Datum::Bump { center, width } => {
                let r2: f64 = x.iter().map(|&xi| (xi - center).powi(2)).sum();
                (-r2 / (width * width)).exp()
            }
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    pub dir: String,
    #[serde(default)]
    pub plots: bool,
}

impl Default for Output {
    fn default() -> Self {
        Self {
            dir: "degensemi-out".into(),
            plots: false,
        }
    }
}

/// A parsed configuration together with the text it came from.
#[derive(Clone, Debug)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub hash: String,
}

impl LoadedConfig {
    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        let config: RunConfig =
            toml::from_str(text).map_err(|e| CliError::Config(format!("{origin}: {e}")))?;
        config
            .validate()
            .map_err(|e| CliError::Config(format!("{origin}: {e}")))?;
        Ok(Self {
            config,
            hash: hex(&Sha256::digest(text.as_bytes())),
        })
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Accepts `0xF001`, `0XF001` or bare `F001`.
pub fn parse_seed(text: &str) -> Result<u64, String> {
    let t = text.trim();
    let digits = t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")).unwrap_or(t);
    u64::from_str_radix(digits, 16).map_err(|e| format!("seed {text:?} is not hexadecimal: {e}"))
}

pub fn radians(deg: &[f64]) -> Vec<f64> {
    deg.iter().map(|d| d * PI / 180.0).collect()
}

fn positive(name: &str, v: usize) -> Result<(), String> {
    if v == 0 {
        Err(format!("{name} must be positive"))
    } else {
        Ok(())
    }
}

fn positive_f(name: &str, v: f64) -> Result<(), String> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(format!("{name} must be a positive number, got {v}"))
    }
}

impl RunConfig {
    fn validate(&self) -> Result<(), String> {
        let p = &self.problem;
        positive("problem.d", p.d)?;
        positive_f("problem.m", p.m)?;
        positive_f("problem.gamma", p.gamma)?;
        if !(p.drift.is_finite() && p.drift >= 0.0) {
            return Err(format!("problem.drift must be nonnegative (inward), got {}", p.drift));
        }
        if !(p.drift_bound.is_finite() && p.drift_bound >= 0.0) {
            return Err(format!("problem.drift_bound must be nonnegative, got {}", p.drift_bound));
        }
        let names = p.perturb.iter().chain(&p.freeze).chain(&p.corners);
        for name in names {
            let spec = self
                .families
                .get(name)
                .ok_or_else(|| format!("problem references unknown family {name:?}"))?;
            CoefficientField::new(spec.clone()).map_err(|e| format!("families.{name}: {e}"))?;
        }
        let disc = &self.discretization;
        positive("discretization.n", disc.n)?;
        positive("discretization.n_tensor", disc.n_tensor)?;
        positive("discretization.n_spectral", disc.n_spectral)?;
        positive_f("discretization.grading", disc.grading)?;
        let s = &self.sweep;
        if let Some(seed) = &s.seed {
            parse_seed(seed).map_err(|e| format!("sweep.seed: {e}"))?;
        }
        for (name, v) in [
            ("sweep.probes", s.probes),
            ("sweep.interpolation_probes", s.interpolation_probes),
            ("sweep.trials", s.trials),
            ("sweep.vanishing_probes", s.vanishing_probes),
            ("sweep.eps_levels", s.eps_levels),
            ("sweep.drift_steps", s.drift_steps),
        ] {
            positive(name, v)?;
        }
        for (name, v) in [
            ("sweep.t_bar", s.t_bar),
            ("sweep.eps_bar", s.eps_bar),
            ("sweep.lambda0", s.lambda0),
            ("sweep.vanishing_lambda", s.vanishing_lambda),
            ("sweep.vanishing_time", s.vanishing_time),
            ("sweep.lambda_perturb", s.lambda_perturb),
            ("sweep.lambda_freeze", s.lambda_freeze),
            ("sweep.lambda_corners", s.lambda_corners),
            ("sweep.freeze_d1", s.freeze_d1),
        ] {
            positive_f(name, v)?;
        }
        for (name, list) in [
            ("sweep.magnitudes", &s.magnitudes),
            ("sweep.times", &s.times),
            ("oracle.magnitudes", &self.oracle.magnitudes),
            ("oracle.gammas", &self.oracle.gammas),
        ] {
            for &v in list {
                positive_f(name, v)?;
            }
        }
        for &b in &self.oracle.drifts {
            if !(b.is_finite() && b >= 0.0) {
                return Err(format!("oracle.drifts must be nonnegative, got {b}"));
            }
        }
        for &t in &self.oracle.thetas_deg {
            if !(t.abs() < 180.0) {
                return Err(format!("oracle.thetas_deg must lie in (-180, 180), got {t}"));
            }
        }
        for (name, list) in [("sweep.rays_deg", &s.rays_deg), ("sweep.sector_rays_deg", &s.sector_rays_deg)] {
            for &t in list {
                if !(t.abs() < 90.0) {
                    return Err(format!("{name} must lie in (-90, 90), got {t}"));
                }
            }
        }
        positive("oracle.nprobe", self.oracle.nprobe)?;
        for &t in &self.evolve.times {
            if !(t.is_finite() && t >= 0.0) {
                return Err(format!("evolve.times must be nonnegative, got {t}"));
            }
        }
        Ok(())
    }

    pub fn family(&self, name: &str) -> Result<CoefficientField, CliError> {
        let spec = self
            .families
            .get(name)
            .ok_or_else(|| CliError::Config(format!("unknown family {name:?}")))?;
        CoefficientField::new(spec.clone()).map_err(CliError::from)
    }

    /// `B · k / (steps − 1)` for `k = 0..steps`.
    pub fn drift_grid(&self) -> Vec<f64> {
        let steps = self.sweep.drift_steps;
        if steps == 1 {
            return vec![self.problem.drift_bound];
        }
        (0..steps)
            .map(|k| self.problem.drift_bound * k as f64 / (steps - 1) as f64)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_parses() {
        let loaded = LoadedConfig::parse(DEFAULT_CONFIG, "default").unwrap();
        assert_eq!(loaded.hash.len(), 64);
        assert_eq!(loaded.config.drift_grid(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(loaded.config.families.len(), 5);
    }

    #[test]
    fn seeds() {
        assert_eq!(parse_seed("0xF001"), Ok(0xF001));
        assert_eq!(parse_seed("f001"), Ok(0xF001));
        assert!(parse_seed("0xFV01").is_err());
    }

    #[test]
    fn unknown_family_is_a_config_error() {
        let text = DEFAULT_CONFIG.replace("freeze = \"variable-gamma\"", "freeze = \"nowhere\"");
        match LoadedConfig::parse(&text, "x") {
            Err(CliError::Config(msg)) => assert!(msg.contains("nowhere")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn datum_values() {
        assert_eq!(Datum::Constant { value: 2.0 }.eval(&[0.3], 1.0), 2.0);
        assert_eq!(Datum::Bump { center: 0.5, width: 0.1 }.eval(&[0.5, 0.5], 1.0), 1.0);
        assert!((Datum::Cosine { freq: 1.0 }.eval(&[1.0], 1.0) + 1.0).abs() < 1e-15);
    }
}
