//! Run configuration: TOML files layered over shipped presets.
//!
//! A preset is a complete configuration (`paper_defaults`) or an overlay
//! applied on top of it (`low_power`, `room_temp`). A user file is merged
//! over the chosen preset table by table, then the result is validated
//! with unknown keys rejected.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::estimators::budget::DriveCalibration;
use crate::model::{DeviceParams, EfficiencyChain, MechanicalState, OpticalPulse, RFPulse};

const PAPER_DEFAULTS: &str = include_str!("../presets/paper_defaults.toml");
const LOW_POWER: &str = include_str!("../presets/low_power.toml");
const ROOM_TEMP: &str = include_str!("../presets/room_temp.toml");

/// Names accepted by [`RunConfig::from_preset`].
pub const PRESETS: [&str; 3] = ["paper_defaults", "low_power", "room_temp"];

/// SHA-256 of the canonical TOML rendering of `value`, hex encoded.
pub fn config_hash<T: Serialize>(value: &T) -> String {
    let text = toml::to_string(value).expect("configuration types serialise to TOML");
    hex::encode(Sha256::digest(text.as_bytes()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Thermometry,
    Linescan,
    Transient,
    G2Pulsed,
    G2Cw,
    Interference,
    HeatingSweep,
    Budget,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::Thermometry,
        Experiment::Linescan,
        Experiment::Transient,
        Experiment::G2Pulsed,
        Experiment::G2Cw,
        Experiment::Interference,
        Experiment::HeatingSweep,
        Experiment::Budget,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Thermometry => "thermometry",
            Experiment::Linescan => "linescan",
            Experiment::Transient => "transient",
            Experiment::G2Pulsed => "g2-pulsed",
            Experiment::G2Cw => "g2-cw",
            Experiment::Interference => "interference",
            Experiment::HeatingSweep => "heating-sweep",
            Experiment::Budget => "budget",
        }
    }

    /// Whether the experiment draws random numbers and so needs a seed.
    pub fn is_stochastic(self) -> bool {
        !matches!(self, Experiment::Transient | Experiment::Budget)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermometryConfig {
    /// Readout pulses per sideband.
    pub pulses: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinescanConfig {
    pub power_dbm: f64,
    /// Full sweep width centred on the mechanical frequency, Hz.
    pub span_hz: f64,
    pub points: usize,
    pub pulses_per_point: u64,
    /// Multiply the drive power by the IDT passband.
    pub idt_envelope: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransientConfig {
    pub power_dbm: f64,
    pub duration: f64,
    pub detunings_hz: Vec<f64>,
    pub t_max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct G2PulsedConfig {
    pub repetitions: u64,
    pub rep_period: f64,
    /// Lumped p_r·η_det used for the correlation runs; g² is unchanged by
    /// uniform loss, only its statistical error is.
    pub readout_constant: f64,
    pub max_delta_i: usize,
    /// Coherent-to-thermal ratios to sweep; converted to RF powers through
    /// the drive calibration. Ignored when `powers_dbm` is set.
    pub n_coh_ratios: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub powers_dbm: Option<Vec<f64>>,
    pub save_streams: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct G2CwConfig {
    pub duration: f64,
    /// Mean detected click rate summed over both detectors, Hz.
    pub detected_rate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    pub bin_width: f64,
    pub max_tau: f64,
    /// Coherent occupations to run; the thermal part comes from `state`.
    pub n_coh: Vec<f64>,
    pub save_streams: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterferenceConfig {
    pub n_coh: f64,
    pub v_max: f64,
    pub phases: usize,
    pub pulses_per_phase: u64,
    pub readout_constant: f64,
    /// Measured value kept for comparison only.
    pub reference_visibility: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeatingConfig {
    pub powers_w: Vec<f64>,
    pub exponent: f64,
    pub anchor_power: f64,
    pub anchor_n_th: f64,
    pub pulses_per_point: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetConfig {
    /// Intracavity photon number for the cooperativity line.
    pub n_c: f64,
    pub quoted_cooperativity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    pub device: DeviceParams,
    pub chain: EfficiencyChain,
    pub state: MechanicalState,
    pub rf: RFPulse,
    pub readout: OpticalPulse,
    pub calibration: DriveCalibration,
    pub thermometry: ThermometryConfig,
    pub linescan: LinescanConfig,
    pub transient: TransientConfig,
    pub g2_pulsed: G2PulsedConfig,
    pub g2_cw: G2CwConfig,
    pub interference: InterferenceConfig,
    pub heating: HeatingConfig,
    pub budget: BudgetConfig,
}

fn parse_table(text: &str, origin: &str) -> Result<toml::Table> {
    text.parse::<toml::Table>()
        .map_err(|e| Error::Config(format!("{origin}: {e}")))
}

/// Recursively overlays `top` onto `base`; non-table values replace.
fn merge(base: &mut toml::Table, top: toml::Table) {
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(t)) => merge(b, t),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

const PATH_KEYS: [&str; 4] = ["eta_tot", "eta_trans_qe", "eta_trans", "eta_qe"];

/// [`merge`], except that a chain overlay naming any detection-path key
/// replaces the base's path description instead of adding to it.
fn merge_config(base: &mut toml::Table, top: toml::Table) {
    let replaces_path = top
        .get("chain")
        .and_then(toml::Value::as_table)
        .is_some_and(|c| PATH_KEYS.iter().any(|k| c.contains_key(*k)));
    if replaces_path {
        if let Some(toml::Value::Table(chain)) = base.get_mut("chain") {
            for k in PATH_KEYS {
                chain.remove(k);
            }
        }
    }
    merge(base, top);
}

fn preset_table(name: &str) -> Result<toml::Table> {
    let mut base = parse_table(PAPER_DEFAULTS, "paper_defaults preset")?;
    let overlay = match name {
        "paper_defaults" => None,
        "low_power" => Some(LOW_POWER),
        "room_temp" => Some(ROOM_TEMP),
        other => {
            return Err(Error::Config(format!(
                "unknown preset `{other}` (available: {})",
                PRESETS.join(", ")
            )))
        }
    };
    if let Some(text) = overlay {
        merge_config(&mut base, parse_table(text, name)?);
    }
    Ok(base)
}

impl RunConfig {
    pub fn from_preset(name: &str) -> Result<Self> {
        Self::from_table(preset_table(name)?)
    }

    /// `user` TOML merged over the named preset.
    pub fn from_preset_and_toml(name: &str, user: &str) -> Result<Self> {
        let mut table = preset_table(name)?;
        merge_config(&mut table, parse_table(user, "config file")?);
        Self::from_table(table)
    }

    fn from_table(table: toml::Table) -> Result<Self> {
        let cfg: RunConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.calibration.validate()?;
        let bad = |what: &str| Err(Error::Config(what.to_string()));
        if self.thermometry.pulses == 0 {
            return bad("thermometry.pulses must be >= 1");
        }
        if self.linescan.points < 5 || self.linescan.span_hz <= 0.0 || self.linescan.pulses_per_point == 0 {
            return bad("linescan needs points >= 5, span_hz > 0 and pulses_per_point >= 1");
        }
        if self.transient.points < 2 || self.transient.t_max <= 0.0 || self.transient.duration <= 0.0 {
            return bad("transient needs points >= 2, t_max > 0 and duration > 0");
        }
        let g = &self.g2_pulsed;
        if g.repetitions == 0 || g.rep_period <= 0.0 || !(0.0..=1.0).contains(&g.readout_constant) || g.max_delta_i == 0 {
            return bad("g2_pulsed needs repetitions >= 1, rep_period > 0, readout_constant in [0, 1], max_delta_i >= 1");
        }
        if g.n_coh_ratios.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return bad("g2_pulsed.n_coh_ratios must be finite and >= 0");
        }
        let c = &self.g2_cw;
        if c.duration <= 0.0 || c.detected_rate <= 0.0 || c.bin_width <= 0.0 || c.max_tau <= c.bin_width {
            return bad("g2_cw needs duration, detected_rate, bin_width > 0 and max_tau > bin_width");
        }
        if c.n_coh.iter().any(|n| !(n.is_finite() && *n >= 0.0)) {
            return bad("g2_cw.n_coh must be finite and >= 0");
        }
        let i = &self.interference;
        if i.phases < 4 || i.pulses_per_phase == 0 || !(0.0..=1.0).contains(&i.v_max) || !(0.0..=1.0).contains(&i.readout_constant) {
            return bad("interference needs phases >= 4, pulses_per_phase >= 1, v_max and readout_constant in [0, 1]");
        }
        let h = &self.heating;
        if h.powers_w.len() < 3 || h.powers_w.iter().any(|p| !(p.is_finite() && *p > 0.0)) || h.pulses_per_point == 0 {
            return bad("heating needs at least 3 positive powers and pulses_per_point >= 1");
        }
        if self.budget.n_c < 0.0 {
            return bad("budget.n_c must be >= 0");
        }
        Ok(())
    }

    /// Overrides the repetition count that sets the statistics of
    /// `experiment`.
    pub fn set_repetitions(&mut self, experiment: Experiment, reps: u64) -> Result<()> {
        if reps == 0 {
            return Err(Error::Config("repetitions must be >= 1".into()));
        }
        match experiment {
            Experiment::Thermometry => self.thermometry.pulses = reps,
            Experiment::Linescan => self.linescan.pulses_per_point = reps,
            Experiment::G2Pulsed => self.g2_pulsed.repetitions = reps,
            Experiment::Interference => self.interference.pulses_per_phase = reps,
            Experiment::HeatingSweep => self.heating.pulses_per_point = reps,
            Experiment::Transient | Experiment::Budget | Experiment::G2Cw => {
                return Err(Error::Config(format!("`{experiment}` has no repetition count")))
            }
        }
        Ok(())
    }

    /// Hash of everything that determines the output of `experiment`
    /// except the seed and the output location.
    pub fn hash(&self, experiment: Experiment) -> String {
        #[derive(Serialize)]
        struct Hashed<'a> {
            experiment: Experiment,
            config: &'a RunConfig,
        }
        let mut stripped = self.clone();
        stripped.seed = None;
        stripped.output_dir = None;
        config_hash(&Hashed {
            experiment,
            config: &stripped,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration types serialise to TOML")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_load() {
        let p = RunConfig::from_preset("paper_defaults").unwrap();
        assert_eq!(p.device, DeviceParams::base_temp());
        assert_eq!(p.chain, EfficiencyChain::paper_defaults());
        assert!((p.state.n_th() - 0.90).abs() < 1e-12);
        let lp = RunConfig::from_preset("low_power").unwrap();
        assert!((lp.state.n_th() - 0.36).abs() < 1e-12);
        assert!((lp.readout.peak_power() - 1e-7).abs() < 1e-20);
        let rt = RunConfig::from_preset("room_temp").unwrap();
        assert_eq!(rt.device, DeviceParams::room_temp());
        assert!(RunConfig::from_preset("nope").is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::from_preset_and_toml("paper_defaults", "bogus = 1").is_err());
        assert!(RunConfig::from_preset_and_toml("paper_defaults", "[device]\nomega = 1.0").is_err());
        assert!(RunConfig::from_preset_and_toml("paper_defaults", "[state]\nn_th = -1.0").is_err());
    }

    #[test]
    fn user_values_override() {
        let c = RunConfig::from_preset_and_toml("paper_defaults", "seed = 5\n[thermometry]\npulses = 1000").unwrap();
        assert_eq!(c.seed, Some(5));
        assert_eq!(c.thermometry.pulses, 1000);
        assert_eq!(c.device, DeviceParams::base_temp());
    }

    #[test]
    fn hash_ignores_seed_and_output() {
        let a = RunConfig::from_preset("paper_defaults").unwrap();
        let mut b = a.clone();
        b.seed = Some(3);
        b.output_dir = Some("/tmp/x".into());
        assert_eq!(a.hash(Experiment::Budget), b.hash(Experiment::Budget));
        assert_ne!(a.hash(Experiment::Budget), a.hash(Experiment::Thermometry));
        b.thermometry.pulses += 1;
        assert_ne!(a.hash(Experiment::Budget), b.hash(Experiment::Budget));
        assert_eq!(a.hash(Experiment::Budget).len(), 64);
    }

    #[test]
    fn toml_roundtrip() {
        let a = RunConfig::from_preset("low_power").unwrap();
        let back = RunConfig::from_preset_and_toml("paper_defaults", &a.to_toml()).unwrap();
        assert_eq!(a, back);
    }

    #[test]
    fn experiment_names() {
        for e in Experiment::ALL {
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
        }
        assert!(!Experiment::Budget.is_stochastic());
        assert!(Experiment::G2Cw.is_stochastic());
    }
}
