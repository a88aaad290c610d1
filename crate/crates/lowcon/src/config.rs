//! Experiment configuration: a flat JSON object, unknown keys rejected.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use lowcon_core::datagen::{MisspecKind, PredictorDist};
use lowcon_core::design::OlhdOptions;
use lowcon_core::sampler::{LowconOptions, Method, SamplerParams};
use serde::{Deserialize, Deserializer};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Simulate,
    Realdata,
    Toy,
    Diagnose,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_mode")]
    pub mode: Mode,
    #[serde(default = "default_dist", deserialize_with = "parse_one")]
    pub dist: PredictorDist,
    #[serde(default = "default_misspec", deserialize_with = "parse_one")]
    pub misspec: MisspecKind,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_p")]
    pub p: usize,
    /// Defaults to `2p, 4p, ..., 10p`.
    #[serde(default)]
    pub r_list: Vec<usize>,
    /// Trimming percentile of the design box, in percent.
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default = "default_sigma2")]
    pub sigma2: f64,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_methods", deserialize_with = "parse_many")]
    pub methods: Vec<Method>,
    #[serde(default = "default_slev_alpha")]
    pub slev_alpha: f64,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
    /// Record wall-clock time per fit. Off by default because timings make
    /// otherwise identical runs produce different files.
    #[serde(default)]
    pub record_timing: bool,
    /// Fit an intercept on real data (the ones column is added after
    /// subsampling, never seen by the samplers).
    #[serde(default = "default_true")]
    pub intercept: bool,
}

fn default_mode() -> Mode {
    Mode::Simulate
}
fn default_dist() -> PredictorDist {
    PredictorDist::D1
}
fn default_misspec() -> MisspecKind {
    MisspecKind::H1
}
fn default_n() -> usize {
    10_000
}
fn default_p() -> usize {
    10
}
fn default_theta() -> f64 {
    1.0
}
fn default_sigma2() -> f64 {
    1.0
}
fn default_replicates() -> usize {
    100
}
fn default_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}
fn default_slev_alpha() -> f64 {
    0.9
}
fn default_true() -> bool {
    true
}

fn parse_one<'de, D, T>(de: D) -> std::result::Result<T, D::Error>
where
    D: Deserializer<'de>,
    T: FromStr,
    T::Err: fmt::Display,
{
    let s = String::deserialize(de)?;
    s.parse().map_err(|e| serde::de::Error::custom(format!("`{s}`: {e}")))
}

fn parse_many<'de, D, T>(de: D) -> std::result::Result<Vec<T>, D::Error>
where
    D: Deserializer<'de>,
    T: FromStr,
    T::Err: fmt::Display,
{
    Vec::<String>::deserialize(de)?
        .into_iter()
        .map(|s| s.parse().map_err(|e| serde::de::Error::custom(format!("`{s}`: {e}"))))
        .collect()
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str::<Self>("{}")
            .expect("empty object deserializes")
            .normalized()
    }
}

impl ExperimentConfig {
    /// The one-predictor toy comparison: n = 1000, 100 replicates, and an
    /// untrimmed design box.
    pub fn toy(r_list: Vec<usize>, seed: u64) -> Self {
        Self {
            mode: Mode::Toy,
            n: 1000,
            p: 1,
            r_list,
            theta: 0.0,
            seed,
            methods: vec![Method::Unif, Method::Blev, Method::Lowcon],
            ..Self::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| HarnessError::config(e.to_string()))?;
        let cfg = cfg.normalized();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Fills the default subsample sizes and puts methods in canonical order.
    pub fn normalized(mut self) -> Self {
        if self.r_list.is_empty() {
            self.r_list = (1..=5).map(|k| 2 * k * self.p).collect();
        }
        self.methods.sort();
        self.methods.dedup();
        self
    }

    /// Predictor dimension used by the samplers: the toy model has one.
    pub fn dim(&self) -> usize {
        if self.mode == Mode::Toy {
            1
        } else {
            self.p
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.replicates == 0 {
            return bad("replicates must be at least 1".into());
        }
        if !(0.0..50.0).contains(&self.theta) {
            return bad(format!("theta {} outside [0, 50)", self.theta));
        }
        if !(self.sigma2 >= 0.0 && self.sigma2.is_finite()) {
            return bad("sigma2 must be finite and non-negative".into());
        }
        if !(0.0..=1.0).contains(&self.slev_alpha) {
            return bad("slev_alpha must lie in [0, 1]".into());
        }
        if self.methods.is_empty() {
            return bad("methods must not be empty".into());
        }
        if self.mode == Mode::Realdata {
            // p, n and the size bounds come from the dataset.
            return Ok(());
        }
        let p = self.dim();
        if p == 0 {
            return bad("p must be at least 1".into());
        }
        if self.mode != Mode::Toy && self.misspec.min_dim() > p {
            return bad(format!("{} needs p >= {}", self.misspec, self.misspec.min_dim()));
        }
        self.check_r_list(p, Some(self.n))
    }

    /// Requires `p < r`, plus `r < n` when `n` is known, and `r >= 2p` for IBOSS.
    pub fn check_r_list(&self, p: usize, n: Option<usize>) -> Result<()> {
        for &r in &self.r_list {
            if r <= p {
                return Err(HarnessError::config(format!("r = {r} must exceed p = {p}")));
            }
            if let Some(n) = n {
                if r >= n {
                    return Err(HarnessError::config(format!("r = {r} must be below n = {n}")));
                }
            }
            if self.methods.contains(&Method::Iboss) && r < 2 * p {
                return Err(HarnessError::config(format!("IBOSS needs r >= 2p, got r = {r}")));
            }
        }
        Ok(())
    }

    pub fn sampler_params(&self) -> SamplerParams {
        SamplerParams {
            lowcon: LowconOptions {
                theta: self.theta,
                olhd: OlhdOptions::default(),
                allow_duplicates: false,
            },
            slev_alpha: self.slev_alpha,
        }
    }
}
