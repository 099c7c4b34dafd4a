//! Flat `key=value` run configuration.
//!
//! Tokens are separated by whitespace or newlines and `#` starts a comment
//! that runs to the end of the line. Unknown keys are errors. Lists are
//! comma-separated without spaces.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::bounds::ProtocolKind;
use crate::channel::{ChannelParams, Eq20Variant, ObservationModel};
use crate::keyrate::{
    DistanceSearch, ProtocolConstants, DEFAULT_ATTACK_SUCCESS, DEFAULT_EC_INEFFICIENCY,
    DEFAULT_SIFTING,
};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

impl From<crate::Error> for ConfigError {
    fn from(e: crate::Error) -> Self {
        ConfigError(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Fig1Sweep,
    PnsLimit,
    AttackVerify,
    BoundsTable,
    Optimize,
}

impl Mode {
    pub const ALL: [Mode; 5] = [
        Mode::Fig1Sweep,
        Mode::PnsLimit,
        Mode::AttackVerify,
        Mode::BoundsTable,
        Mode::Optimize,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Fig1Sweep => "fig1_sweep",
            Mode::PnsLimit => "pns_limit",
            Mode::AttackVerify => "attack_verify",
            Mode::BoundsTable => "bounds_table",
            Mode::Optimize => "optimize",
        }
    }
}

impl FromStr for Mode {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Mode::ALL.iter().map(|m| m.name()).collect();
                ConfigError(format!(
                    "unknown mode {s:?}; expected one of {}",
                    names.join(", ")
                ))
            })
    }
}

/// Attack-verification targets and tolerances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyTargets {
    pub postselection: f64,
    pub u1: f64,
    pub u2: f64,
    pub overall: f64,
    pub tol_probability: f64,
    pub tol_fidelity: f64,
    pub tol_rank: f64,
}

impl Default for VerifyTargets {
    fn default() -> Self {
        VerifyTargets {
            postselection: 0.25,
            u1: 0.75,
            u2: 0.40,
            overall: 0.30,
            tol_probability: 1e-10,
            tol_fidelity: 1e-10,
            tol_rank: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub out: Option<PathBuf>,
    pub lambda: f64,
    pub lambda_prime: f64,
    pub k_db_per_km: f64,
    pub dark_count: f64,
    pub q: f64,
    pub f_ec: f64,
    pub l_start: f64,
    pub l_end: f64,
    pub l_step: f64,
    pub eq20_variant: Eq20Variant,
    pub diagnostics: bool,
    pub protocol: ProtocolKind,
    pub attack_success: f64,
    pub search_max_km: f64,
    pub opt_distance_km: f64,
    pub opt_lambda_grid: Vec<f64>,
    pub opt_lambda_prime_grid: Vec<f64>,
    pub verify: VerifyTargets,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: Mode::default(),
            out: None,
            lambda: 0.1,
            lambda_prime: 0.01,
            k_db_per_km: 0.2,
            dark_count: 1e-6,
            q: DEFAULT_SIFTING,
            f_ec: DEFAULT_EC_INEFFICIENCY,
            l_start: 0.0,
            l_end: 60.0,
            l_step: 1.0,
            eq20_variant: Eq20Variant::default(),
            diagnostics: false,
            protocol: ProtocolKind::default(),
            attack_success: DEFAULT_ATTACK_SUCCESS,
            search_max_km: DistanceSearch::default().max_km,
            opt_distance_km: 20.0,
            opt_lambda_grid: vec![0.05, 0.1, 0.2],
            opt_lambda_prime_grid: vec![0.005, 0.01, 0.02],
            verify: VerifyTargets::default(),
        }
    }
}

pub const KEYS: [&str; 26] = [
    "mode",
    "out",
    "lambda",
    "lambda_prime",
    "k_db_per_km",
    "dark_count",
    "q",
    "f_ec",
    "l_start",
    "l_end",
    "l_step",
    "eq20_variant",
    "diagnostics",
    "protocol",
    "attack_success",
    "search_max_km",
    "opt_distance_km",
    "opt_lambda_grid",
    "opt_lambda_prime_grid",
    "expect_postselection",
    "expect_u1",
    "expect_u2",
    "expect_overall",
    "tol_probability",
    "tol_fidelity",
    "tol_rank",
];

fn number(key: &str, value: &str) -> Result<f64, ConfigError> {
    let x: f64 = value
        .parse()
        .map_err(|_| ConfigError(format!("{key}: malformed number {value:?}")))?;
    if !x.is_finite() {
        return Err(ConfigError(format!("{key}: must be finite, got {value:?}")));
    }
    Ok(x)
}

fn boolean(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(ConfigError(format!(
            "{key}: expected true or false, got {value:?}"
        ))),
    }
}

fn list(key: &str, value: &str) -> Result<Vec<f64>, ConfigError> {
    value.split(',').map(|v| number(key, v)).collect()
}

impl RunConfig {
    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "mode" => self.mode = value.parse()?,
            "out" => self.out = Some(PathBuf::from(value)),
            "lambda" => self.lambda = number(key, value)?,
            "lambda_prime" => self.lambda_prime = number(key, value)?,
            "k_db_per_km" => self.k_db_per_km = number(key, value)?,
            "dark_count" => self.dark_count = number(key, value)?,
            "q" => self.q = number(key, value)?,
            "f_ec" => self.f_ec = number(key, value)?,
            "l_start" => self.l_start = number(key, value)?,
            "l_end" => self.l_end = number(key, value)?,
            "l_step" => self.l_step = number(key, value)?,
            "eq20_variant" => self.eq20_variant = value.parse()?,
            "diagnostics" => self.diagnostics = boolean(key, value)?,
            "protocol" => self.protocol = value.parse()?,
            "attack_success" => self.attack_success = number(key, value)?,
            "search_max_km" => self.search_max_km = number(key, value)?,
            "opt_distance_km" => self.opt_distance_km = number(key, value)?,
            "opt_lambda_grid" => self.opt_lambda_grid = list(key, value)?,
            "opt_lambda_prime_grid" => self.opt_lambda_prime_grid = list(key, value)?,
            "expect_postselection" => self.verify.postselection = number(key, value)?,
            "expect_u1" => self.verify.u1 = number(key, value)?,
            "expect_u2" => self.verify.u2 = number(key, value)?,
            "expect_overall" => self.verify.overall = number(key, value)?,
            "tol_probability" => self.verify.tol_probability = number(key, value)?,
            "tol_fidelity" => self.verify.tol_fidelity = number(key, value)?,
            "tol_rank" => self.verify.tol_rank = number(key, value)?,
            _ => return Err(ConfigError(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Applies every `key=value` token of `text` on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (lineno, line) in text.lines().enumerate() {
            let content = line.split('#').next().unwrap_or("");
            for token in content.split_whitespace() {
                let (key, value) = token.split_once('=').ok_or_else(|| {
                    ConfigError(format!(
                        "line {}: expected key=value, got {token:?}",
                        lineno + 1
                    ))
                })?;
                self.set(key, value)
                    .map_err(|e| ConfigError(format!("line {}: {e}", lineno + 1)))?;
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.lambda <= self.lambda_prime {
            return Err(ConfigError(format!(
                "lambda ({}) must exceed lambda_prime ({})",
                self.lambda, self.lambda_prime
            )));
        }
        if self.lambda_prime <= 0.0 {
            return Err(ConfigError(format!(
                "lambda_prime must be positive, got {}",
                self.lambda_prime
            )));
        }
        if self.l_start < 0.0 || self.l_start > self.l_end {
            return Err(ConfigError(format!(
                "need 0 <= l_start <= l_end, got l_start = {}, l_end = {}",
                self.l_start, self.l_end
            )));
        }
        if self.l_step <= 0.0 {
            return Err(ConfigError(format!(
                "l_step must be positive, got {}",
                self.l_step
            )));
        }
        ChannelParams::new(self.k_db_per_km, self.l_start, self.dark_count)?;
        self.constants()?;
        if !(0.0..=1.0).contains(&self.attack_success) {
            return Err(ConfigError(format!(
                "attack_success must lie in [0, 1], got {}",
                self.attack_success
            )));
        }
        if self.search_max_km <= 0.0 || self.opt_distance_km < 0.0 {
            return Err(ConfigError(
                "search_max_km must be positive and opt_distance_km non-negative".into(),
            ));
        }
        let v = &self.verify;
        if [v.tol_probability, v.tol_fidelity, v.tol_rank]
            .iter()
            .any(|t| *t < 0.0)
        {
            return Err(ConfigError("tolerances must be non-negative".into()));
        }
        Ok(())
    }

    pub fn constants(&self) -> Result<ProtocolConstants, ConfigError> {
        Ok(ProtocolConstants::with_constant_f(self.q, self.f_ec)?)
    }

    pub fn channel(&self, length_km: f64) -> Result<ChannelParams, ConfigError> {
        Ok(ChannelParams::new(
            self.k_db_per_km,
            length_km,
            self.dark_count,
        )?)
    }

    pub fn model(&self) -> ObservationModel {
        ObservationModel::series(self.eq20_variant)
    }

    pub fn search(&self) -> DistanceSearch {
        DistanceSearch {
            max_km: self.search_max_km,
            ..DistanceSearch::default()
        }
    }

    /// `l_start, l_start + l_step, …` up to and including `l_end` when it
    /// lies on the grid.
    pub fn lengths(&self) -> Vec<f64> {
        let n = ((self.l_end - self.l_start) / self.l_step + 1e-9).floor() as usize;
        (0..=n)
            .map(|i| self.l_start + i as f64 * self.l_step)
            .collect()
    }
}

/// Defaults overlaid with `text`, validated.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    cfg.apply_text(text)?;
    cfg.validate()?;
    Ok(cfg)
}
