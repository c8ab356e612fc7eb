//! Experiment runner behind the `omtrans` binary.
//!
//! [`run`] executes one experiment from a resolved [`RunConfig`] and writes
//! its CSV tables plus a `summary.txt` of `key=value` lines into
//! `<out>/<experiment>/`.

pub mod analyze;
pub mod artifacts;
mod experiments;

use std::path::{Path, PathBuf};

use omtrans::{Error, Experiment, Result, RunConfig};

pub use artifacts::{Artifacts, StreamFormat};

/// Exit status for configuration and usage errors.
pub const EXIT_USAGE: i32 = 2;
/// Exit status when a fit fails or is under-constrained.
pub const EXIT_FIT: i32 = 3;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::InvalidParameter { .. } => EXIT_USAGE,
        Error::FitFailure(_) | Error::UnderConstrained(_) => EXIT_FIT,
        _ => 1,
    }
}

/// Parses a repetition count, accepting integer or float notation ("1e7").
pub fn parse_count(s: &str) -> std::result::Result<u64, String> {
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if !(v.is_finite() && v >= 1.0 && v.fract() == 0.0 && v <= 9.007_199_254_740_992e15) {
        return Err(format!("`{s}` is not a positive whole number"));
    }
    Ok(v as u64)
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub format: StreamFormat,
}

/// Runs `experiment` and returns the files written.
pub fn run(experiment: Experiment, cfg: &RunConfig, opts: &RunOptions) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    if experiment.is_stochastic() && cfg.seed.is_none() {
        return Err(Error::Config(format!(
            "`{experiment}` is stochastic and needs a seed (--seed or `seed` in the config)"
        )));
    }
    let dir = opts.out_dir.join(experiment.name());
    let seed = if experiment.is_stochastic() { cfg.seed } else { None };
    let mut art = Artifacts::create(&dir, cfg.hash(experiment), seed)?;
    let toml = cfg.to_toml();
    art.text("config.toml", |w| Ok(w.write_all(toml.as_bytes())?))?;
    log::info!("running {experiment} into {}", dir.display());
    match experiment {
        Experiment::Thermometry => experiments::thermometry(cfg, &mut art)?,
        Experiment::Linescan => experiments::linescan_run(cfg, &mut art)?,
        Experiment::Transient => experiments::transient(cfg, &mut art)?,
        Experiment::G2Pulsed => experiments::g2_pulsed(cfg, &mut art, opts.format)?,
        Experiment::G2Cw => experiments::g2_cw(cfg, &mut art, opts.format)?,
        Experiment::Interference => experiments::interference(cfg, &mut art)?,
        Experiment::HeatingSweep => experiments::heating_sweep(cfg, &mut art)?,
        Experiment::Budget => experiments::budget(cfg, &mut art)?,
    }
    art.finish()
}

/// Loads a configuration: `config` (a TOML file) merged over `preset`.
pub fn load_config(preset: &str, config: Option<&Path>) -> Result<RunConfig> {
    match config {
        None => RunConfig::from_preset(preset),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            RunConfig::from_preset_and_toml(preset, &text)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_in_float_notation() {
        assert_eq!(parse_count("1e7"), Ok(10_000_000));
        assert_eq!(parse_count("250"), Ok(250));
        assert_eq!(parse_count("2.5e3"), Ok(2500));
        assert!(parse_count("1.5").is_err());
        assert!(parse_count("0").is_ok());
        assert!(parse_count("-3").is_err());
        assert!(parse_count("abc").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Config("x".into())), EXIT_USAGE);
        assert_eq!(exit_code(&Error::FitFailure("x".into())), EXIT_FIT);
        assert_eq!(exit_code(&Error::UnderConstrained("x".into())), EXIT_FIT);
        assert_eq!(exit_code(&Error::Domain("x".into())), 1);
    }
}
