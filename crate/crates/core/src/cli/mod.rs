//! Batch front-end: configuration, sweeps, and the attack report.
//!
//! Exit statuses: 0 on success, 1 on configuration or I/O errors, 2 when
//! attack verification fails.

pub mod config;
pub mod modes;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::Parser;

pub use config::{parse_config, ConfigError, Mode, RunConfig, VerifyTargets};
pub use modes::{
    run_attack_verify, run_bounds_table, run_fig1_sweep, run_optimize, run_pns_limit, sci,
    FIG1_HEADER,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_VERIFY: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "dfs-decoy",
    version,
    about = "Decoy-state key rates and PNS attack checks for DFS-encoded QKD"
)]
pub struct Args {
    /// fig1_sweep, pns_limit, attack_verify, bounds_table or optimize.
    #[arg(long)]
    pub mode: Option<String>,
    /// Flat key=value configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long = "lambda-prime")]
    pub lambda_prime: Option<f64>,
    #[arg(long = "k-db-per-km")]
    pub k_db_per_km: Option<f64>,
    #[arg(long = "dark-count")]
    pub dark_count: Option<f64>,
    #[arg(long = "f-ec")]
    pub f_ec: Option<f64>,
    #[arg(long = "l-start")]
    pub l_start: Option<f64>,
    #[arg(long = "l-end")]
    pub l_end: Option<f64>,
    #[arg(long = "l-step")]
    pub l_step: Option<f64>,
    /// as_printed or squared_dark.
    #[arg(long = "eq20-variant")]
    pub eq20_variant: Option<String>,
    /// Append pre-clamp values as `.diag` columns.
    #[arg(long)]
    pub diagnostics: bool,
}

impl Args {
    /// Defaults, then the config file, then flags.
    pub fn resolve(&self) -> Result<RunConfig, ConfigError> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path)
                .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
            cfg.apply_text(&text)
                .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        }
        if let Some(m) = &self.mode {
            cfg.set("mode", m)?;
        }
        if let Some(v) = &self.eq20_variant {
            cfg.set("eq20_variant", v)?;
        }
        if let Some(p) = &self.out {
            cfg.out = Some(p.clone());
        }
        let numbers = [
            (&mut cfg.lambda, self.lambda),
            (&mut cfg.lambda_prime, self.lambda_prime),
            (&mut cfg.k_db_per_km, self.k_db_per_km),
            (&mut cfg.dark_count, self.dark_count),
            (&mut cfg.f_ec, self.f_ec),
            (&mut cfg.l_start, self.l_start),
            (&mut cfg.l_end, self.l_end),
            (&mut cfg.l_step, self.l_step),
        ];
        for (slot, flag) in numbers {
            if let Some(v) = flag {
                *slot = v;
            }
        }
        if self.diagnostics {
            cfg.diagnostics = true;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Output text and exit status for a resolved configuration.
pub fn execute(cfg: &RunConfig) -> Result<(String, i32), ConfigError> {
    Ok(match cfg.mode {
        Mode::Fig1Sweep => (run_fig1_sweep(cfg)?, EXIT_OK),
        Mode::BoundsTable => (run_bounds_table(cfg)?, EXIT_OK),
        Mode::PnsLimit => (run_pns_limit(cfg)?, EXIT_OK),
        Mode::Optimize => (run_optimize(cfg)?, EXIT_OK),
        Mode::AttackVerify => {
            let (report, pass) = run_attack_verify(cfg)?;
            (report, if pass { EXIT_OK } else { EXIT_VERIFY })
        }
    })
}

fn emit(cfg: &RunConfig, text: &str) -> Result<(), ConfigError> {
    match &cfg.out {
        Some(path) => fs::write(path, text)
            .map_err(|e| ConfigError(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| ConfigError(format!("cannot write stdout: {e}"))),
    }
}

/// Parses `argv`, runs the selected mode and returns the exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = args
        .resolve()
        .and_then(|cfg| execute(&cfg).and_then(|(text, code)| emit(&cfg, &text).map(|_| code)));
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}
