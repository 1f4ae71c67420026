//! The JSON run configuration.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use dispersolve::operator::MAX_L;
use dispersolve::{Grid, InitialCondition};
use serde::{Deserialize, Serialize};

/// How `simulate` chooses the final time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// `min(T*, T_horizon)`, one Picard iteration over the whole interval
    #[default]
    Guaranteed,
    /// `T_horizon`, Picard restarted every `window` steps
    Marching,
}

/// Which exact solution `convergence` measures against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Manufactured {
    /// `x^l (1-x)^{l+1} e^x`, rescaled to the interval
    #[default]
    Profile,
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub k: usize,
    pub l: usize,
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "T_horizon")]
    pub horizon: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub dt: f64,
    pub u0_spec: InitialCondition,
    /// Defaults to `1e-8 (1 + ||u0||)`.
    #[serde(default)]
    pub tol_fp: Option<f64>,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub mode: Mode,
    /// Picard window, in time steps, for marching runs and the energy study.
    #[serde(default = "default_window")]
    pub window: usize,
    /// Constant used by the Gagliardo-Nirenberg suite in `verify`.
    #[serde(default = "default_gn_constant")]
    pub gn_constant: f64,
    #[serde(default)]
    pub manufactured: Manufactured,
}

fn default_max_iter() -> usize {
    50
}

fn default_window() -> usize {
    4
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("dispersolve-out")
}

fn default_gn_constant() -> f64 {
    std::f64::consts::SQRT_2
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg: RunConfig = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        if cfg.output_dir.is_relative() {
            if let Some(parent) = path.parent() {
                cfg.output_dir = parent.join(&cfg.output_dir);
            }
        }
        if let InitialCondition::File { path: p } = &cfg.u0_spec {
            if p.is_relative() {
                if let Some(parent) = path.parent() {
                    cfg.u0_spec = InitialCondition::File { path: parent.join(p) };
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.k == 0 {
            bail!("k must be at least 1");
        }
        if !(1..=MAX_L).contains(&self.l) {
            bail!("l must be in 1..={MAX_L}, got {}", self.l);
        }
        for (name, v) in
            [("L", self.length), ("T_horizon", self.horizon), ("dt", self.dt), ("gn_constant", self.gn_constant)]
        {
            if !(v.is_finite() && v > 0.0) {
                bail!("{name} must be positive and finite, got {v}");
            }
        }
        if let Some(t) = self.tol_fp {
            if !(t.is_finite() && t > 0.0) {
                bail!("tol_fp must be positive, got {t}");
            }
        }
        if self.max_iter == 0 {
            bail!("max_iter must be at least 1");
        }
        if self.window == 0 {
            bail!("window must be at least 1 step");
        }
        self.grid()?.require_order(self.l)?;
        self.u0_spec.sample(&self.grid()?)?;
        Ok(())
    }

    pub fn grid(&self) -> anyhow::Result<Grid> {
        Ok(Grid::new(self.length, self.n)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> anyhow::Result<RunConfig> {
        let c: RunConfig = serde_json::from_str(s)?;
        c.validate()?;
        Ok(c)
    }

    const BASE: &str = r#""k": 1, "l": 1, "L": 1.0, "T_horizon": 0.5, "N": 64, "dt": 0.001, "u0_spec": "sin2:1""#;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse(&format!("{{{BASE}}}")).unwrap();
        assert_eq!(c.max_iter, 50);
        assert_eq!(c.seed, 0);
        assert_eq!(c.tol_fp, None);
        assert_eq!(c.manufactured, Manufactured::Profile);
        assert_eq!(c.u0_spec, InitialCondition::Sin2 { amplitude: 1.0 });
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(parse(&format!("{{{BASE}, \"tol\": 1}}")).is_err());
        for (from, to) in
            [("\"N\": 64", "\"N\": 5"), ("\"l\": 1", "\"l\": 9"), ("\"dt\": 0.001", "\"dt\": -1"), ("sin2:1", "sin2")]
        {
            assert!(parse(&format!("{{{}}}", BASE.replace(from, to))).is_err(), "{to}");
        }
    }
}
