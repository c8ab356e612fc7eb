//! Domain types shared by every stage of the simulation and analysis chain.
//!
//! Unit conventions:
//! - every frequency and rate is an ordinary frequency in Hz (the quoted
//!   value is ω/2π); factors of 2π appear only inside formulas
//! - linewidths are energy-decay FWHM; the amplitude decays at half that rate
//! - times are in seconds, optical powers in W, RF powers in dBm

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_at_least, check_positive, check_unit, Error, Result};

/// Resonance parameters of the electro-opto-mechanical device.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDeviceParams", into = "RawDeviceParams")]
pub struct DeviceParams {
    omega_m: f64,
    gamma_m: f64,
    kappa: f64,
    kappa_e: f64,
    g0: f64,
    idt_center: f64,
    idt_bw: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDeviceParams {
    omega_m: f64,
    gamma_m: f64,
    kappa: f64,
    kappa_e: f64,
    g0: f64,
    idt_center: f64,
    idt_bw: f64,
}

impl TryFrom<RawDeviceParams> for DeviceParams {
    type Error = Error;

    fn try_from(r: RawDeviceParams) -> Result<Self> {
        DeviceParams::new(
            r.omega_m,
            r.gamma_m,
            r.kappa,
            r.kappa_e,
            r.g0,
            r.idt_center,
            r.idt_bw,
        )
    }
}

impl From<DeviceParams> for RawDeviceParams {
    fn from(d: DeviceParams) -> Self {
        RawDeviceParams {
            omega_m: d.omega_m,
            gamma_m: d.gamma_m,
            kappa: d.kappa,
            kappa_e: d.kappa_e,
            g0: d.g0,
            idt_center: d.idt_center,
            idt_bw: d.idt_bw,
        }
    }
}

/// Frequency offset of the cold operating point relative to room temperature.
pub const CRYOGENIC_BLUESHIFT: f64 = 35e6;

impl DeviceParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        omega_m: f64,
        gamma_m: f64,
        kappa: f64,
        kappa_e: f64,
        g0: f64,
        idt_center: f64,
        idt_bw: f64,
    ) -> Result<Self> {
        check_positive("omega_m", omega_m)?;
        check_positive("gamma_m", gamma_m)?;
        check_positive("kappa", kappa)?;
        check_positive("kappa_e", kappa_e)?;
        check_positive("g0", g0)?;
        check_positive("idt_center", idt_center)?;
        check_positive("idt_bw", idt_bw)?;
        if kappa_e > kappa {
            return Err(Error::invalid(
                "kappa_e",
                format!("extrinsic rate {kappa_e} exceeds loaded linewidth {kappa}"),
            ));
        }
        Ok(DeviceParams {
            omega_m,
            gamma_m,
            kappa,
            kappa_e,
            g0,
            idt_center,
            idt_bw,
        })
    }

    /// Device at dilution-refrigerator base temperature.
    pub fn base_temp() -> Self {
        DeviceParams {
            omega_m: 2.744e9,
            gamma_m: 197e3,
            kappa: 5.8e9,
            // κ_e/κ = 0.65
            kappa_e: 3.77e9,
            g0: 1.3e6,
            idt_center: 2.76e9,
            idt_bw: 10e6,
        }
    }

    /// Same device at room temperature: both resonances sit lower by the
    /// cryogenic blueshift and the mechanical linewidth is ten times wider.
    pub fn room_temp() -> Self {
        let cold = Self::base_temp();
        DeviceParams {
            omega_m: cold.omega_m - CRYOGENIC_BLUESHIFT,
            gamma_m: 10.0 * cold.gamma_m,
            idt_center: cold.idt_center - CRYOGENIC_BLUESHIFT,
            ..cold
        }
    }

    pub fn omega_m(&self) -> f64 {
        self.omega_m
    }
    pub fn gamma_m(&self) -> f64 {
        self.gamma_m
    }
    pub fn kappa(&self) -> f64 {
        self.kappa
    }
    pub fn kappa_e(&self) -> f64 {
        self.kappa_e
    }
    pub fn g0(&self) -> f64 {
        self.g0
    }
    pub fn idt_center(&self) -> f64 {
        self.idt_center
    }
    pub fn idt_bw(&self) -> f64 {
        self.idt_bw
    }

    /// Waveguide-cavity coupling κ_e/κ.
    pub fn coupling_ratio(&self) -> f64 {
        self.kappa_e / self.kappa
    }

    /// Amplitude decay rate of the mechanical mode in s⁻¹ (π·γ_m).
    pub fn amplitude_decay_rate(&self) -> f64 {
        std::f64::consts::PI * self.gamma_m
    }

    /// 1/e lifetime of the mechanical amplitude.
    pub fn amplitude_lifetime(&self) -> f64 {
        1.0 / self.amplitude_decay_rate()
    }
}

impl Default for DeviceParams {
    fn default() -> Self {
        Self::base_temp()
    }
}

/// Displaced thermal state of the mechanical mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawState", into = "RawState")]
pub struct MechanicalState {
    n_th: f64,
    beta: Complex64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawState {
    n_th: f64,
    #[serde(default)]
    beta_re: f64,
    #[serde(default)]
    beta_im: f64,
}

impl TryFrom<RawState> for MechanicalState {
    type Error = Error;
    fn try_from(r: RawState) -> Result<Self> {
        MechanicalState::new(r.n_th, Complex64::new(r.beta_re, r.beta_im))
    }
}

impl From<MechanicalState> for RawState {
    fn from(s: MechanicalState) -> Self {
        RawState {
            n_th: s.n_th,
            beta_re: s.beta.re,
            beta_im: s.beta.im,
        }
    }
}

impl MechanicalState {
    pub fn new(n_th: f64, beta: Complex64) -> Result<Self> {
        check_at_least("n_th", n_th, 0.0)?;
        if !(beta.re.is_finite() && beta.im.is_finite()) {
            return Err(Error::invalid("beta", "coherent amplitude must be finite"));
        }
        Ok(MechanicalState { n_th, beta })
    }

    pub fn thermal(n_th: f64) -> Result<Self> {
        Self::new(n_th, Complex64::new(0.0, 0.0))
    }

    pub fn coherent(beta: Complex64) -> Result<Self> {
        Self::new(0.0, beta)
    }

    /// Thermal occupation `n_th` displaced along the real axis by √n_coh.
    pub fn displaced(n_th: f64, n_coh: f64) -> Result<Self> {
        check_at_least("n_coh", n_coh, 0.0)?;
        Self::new(n_th, Complex64::new(n_coh.sqrt(), 0.0))
    }

    pub fn n_th(&self) -> f64 {
        self.n_th
    }

    pub fn beta(&self) -> Complex64 {
        self.beta
    }

    pub fn n_coh(&self) -> f64 {
        self.beta.norm_sqr()
    }

    pub fn with_n_th(self, n_th: f64) -> Result<Self> {
        Self::new(n_th, self.beta)
    }

    pub fn with_beta(self, beta: Complex64) -> Result<Self> {
        Self::new(self.n_th, beta)
    }
}

/// Mean phonon number ⟨n⟩ = n_coh + n_th.
pub fn occupation(state: &MechanicalState) -> f64 {
    state.n_coh() + state.n_th()
}

/// Transmission of the detection path after the device.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionPath {
    /// η_trans·η_QE known only as a product.
    Combined(f64),
    Split { trans: f64, qe: f64 },
}

impl DetectionPath {
    pub fn product(&self) -> f64 {
        match *self {
            DetectionPath::Combined(p) => p,
            DetectionPath::Split { trans, qe } => trans * qe,
        }
    }
}

/// Stage efficiencies between the RF source and the detector clicks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawChain", into = "RawChain")]
pub struct EfficiencyChain {
    eta_fc: f64,
    eta_dev: f64,
    path: DetectionPath,
    p_r: f64,
    rf_atten_db: f64,
    dark_count_rate: f64,
    dead_time: f64,
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChain {
    eta_fc: f64,
    eta_dev: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    eta_tot: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    eta_trans_qe: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    eta_trans: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    eta_qe: Option<f64>,
    p_r: f64,
    rf_atten_db: f64,
    #[serde(default)]
    dark_count_rate: f64,
    #[serde(default)]
    dead_time: f64,
}

impl TryFrom<RawChain> for EfficiencyChain {
    type Error = Error;

    fn try_from(r: RawChain) -> Result<Self> {
        let path = match (r.eta_tot, r.eta_trans_qe, r.eta_trans, r.eta_qe) {
            (Some(tot), None, None, None) => {
                check_unit("eta_fc", r.eta_fc)?;
                if r.eta_fc == 0.0 {
                    return Err(Error::invalid("eta_fc", "cannot derive path from eta_tot with eta_fc = 0"));
                }
                DetectionPath::Combined(tot / (r.eta_fc * r.eta_fc))
            }
            (None, Some(p), None, None) => DetectionPath::Combined(p),
            (None, None, Some(trans), Some(qe)) => DetectionPath::Split { trans, qe },
            _ => {
                return Err(Error::Config(
                    "chain needs exactly one of eta_tot, eta_trans_qe, or eta_trans + eta_qe".into(),
                ))
            }
        };
        EfficiencyChain::new(r.eta_fc, r.eta_dev, path, r.p_r, r.rf_atten_db)?
            .with_dark_counts(r.dark_count_rate)?
            .with_dead_time(r.dead_time)
    }
}

impl From<EfficiencyChain> for RawChain {
    fn from(c: EfficiencyChain) -> Self {
        let (eta_trans_qe, eta_trans, eta_qe) = match c.path {
            DetectionPath::Combined(p) => (Some(p), None, None),
            DetectionPath::Split { trans, qe } => (None, Some(trans), Some(qe)),
        };
        RawChain {
            eta_fc: c.eta_fc,
            eta_dev: c.eta_dev,
            eta_tot: None,
            eta_trans_qe,
            eta_trans,
            eta_qe,
            p_r: c.p_r,
            rf_atten_db: c.rf_atten_db,
            dark_count_rate: c.dark_count_rate,
            dead_time: c.dead_time,
        }
    }
}

/// Calibrated η_fc²·η_trans·η_QE of the setup.
pub const MEASURED_ETA_TOT: f64 = 8.43e-4;
/// Detection efficiency η_det as quoted alongside the calibration.
pub const QUOTED_ETA_DET: f64 = 1.41e-3;

impl EfficiencyChain {
    pub fn new(
        eta_fc: f64,
        eta_dev: f64,
        path: DetectionPath,
        p_r: f64,
        rf_atten_db: f64,
    ) -> Result<Self> {
        check_unit("eta_fc", eta_fc)?;
        check_unit("eta_dev", eta_dev)?;
        match path {
            DetectionPath::Combined(p) => {
                check_unit("eta_trans_qe", p)?;
            }
            DetectionPath::Split { trans, qe } => {
                check_unit("eta_trans", trans)?;
                check_unit("eta_qe", qe)?;
            }
        }
        check_unit("p_r", p_r)?;
        check_at_least("rf_atten_db", rf_atten_db, 0.0)?;
        Ok(EfficiencyChain {
            eta_fc,
            eta_dev,
            path,
            p_r,
            rf_atten_db,
            dark_count_rate: 0.0,
            dead_time: 0.0,
        })
    }

    /// Chain built from the calibrated total η_tot = η_fc²·η_trans·η_QE.
    pub fn from_total(eta_fc: f64, eta_tot: f64, eta_dev: f64, p_r: f64, rf_atten_db: f64) -> Result<Self> {
        check_positive("eta_fc", eta_fc)?;
        Self::new(
            eta_fc,
            eta_dev,
            DetectionPath::Combined(eta_tot / (eta_fc * eta_fc)),
            p_r,
            rf_atten_db,
        )
    }

    /// The calibrated setup: η_fc = 0.33, η_tot = 8.43e-4, η_dev = 0.65,
    /// p_r = 1.1 %, 39 dB of RF line attenuation.
    pub fn paper_defaults() -> Self {
        Self::from_total(0.33, MEASURED_ETA_TOT, 0.65, 0.011, 39.0)
            .expect("default chain is valid")
    }

    /// Variant whose η_det equals the quoted 1.41e-3 rather than the value
    /// implied by η_tot.
    pub fn quoted_detection() -> Self {
        let path = QUOTED_ETA_DET / (0.33 * 0.65);
        Self::new(0.33, 0.65, DetectionPath::Combined(path), 0.011, 39.0)
            .expect("quoted chain is valid")
    }

    /// Chain with a single lumped readout constant p_r·η_det = `readout`.
    pub fn lumped(readout: f64) -> Result<Self> {
        Self::new(1.0, 1.0, DetectionPath::Combined(1.0), readout, 0.0)
    }

    pub fn with_dark_counts(mut self, rate_hz: f64) -> Result<Self> {
        self.dark_count_rate = check_at_least("dark_count_rate", rate_hz, 0.0)?;
        Ok(self)
    }

    pub fn with_dead_time(mut self, dead_time: f64) -> Result<Self> {
        self.dead_time = check_at_least("dead_time", dead_time, 0.0)?;
        Ok(self)
    }

    pub fn with_readout_probability(mut self, p_r: f64) -> Result<Self> {
        self.p_r = check_unit("p_r", p_r)?;
        Ok(self)
    }

    pub fn eta_fc(&self) -> f64 {
        self.eta_fc
    }
    pub fn eta_dev(&self) -> f64 {
        self.eta_dev
    }
    pub fn path(&self) -> DetectionPath {
        self.path
    }
    pub fn p_r(&self) -> f64 {
        self.p_r
    }
    pub fn rf_atten_db(&self) -> f64 {
        self.rf_atten_db
    }
    pub fn dark_count_rate(&self) -> f64 {
        self.dark_count_rate
    }
    pub fn dead_time(&self) -> f64 {
        self.dead_time
    }

    /// η_fc²·η_trans·η_QE.
    pub fn eta_tot(&self) -> f64 {
        self.eta_fc * self.eta_fc * self.path.product()
    }

    /// η_fc·η_dev·η_trans·η_QE.
    pub fn eta_det(&self) -> f64 {
        self.eta_fc * self.eta_dev * self.path.product()
    }

    /// Detected photons per phonon per readout pulse, p_r·η_det.
    pub fn readout_constant(&self) -> f64 {
        self.p_r * self.eta_det()
    }
}

impl Default for EfficiencyChain {
    fn default() -> Self {
        Self::paper_defaults()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RfShape {
    Rectangular,
    /// Accepted by the config layer; the analytic dynamics reject it.
    Gaussian,
}

impl fmt::Display for RfShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RfShape::Rectangular => f.write_str("rectangular"),
            RfShape::Gaussian => f.write_str("gaussian"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRfPulse", into = "RawRfPulse")]
pub struct RFPulse {
    power_dbm: f64,
    freq: f64,
    duration: f64,
    shape: RfShape,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRfPulse {
    power_dbm: f64,
    freq: f64,
    duration: f64,
    #[serde(default = "rect")]
    shape: RfShape,
}

fn rect() -> RfShape {
    RfShape::Rectangular
}

impl TryFrom<RawRfPulse> for RFPulse {
    type Error = Error;
    fn try_from(r: RawRfPulse) -> Result<Self> {
        RFPulse::new(r.power_dbm, r.freq, r.duration, r.shape)
    }
}

impl From<RFPulse> for RawRfPulse {
    fn from(p: RFPulse) -> Self {
        RawRfPulse {
            power_dbm: p.power_dbm,
            freq: p.freq,
            duration: p.duration,
            shape: p.shape,
        }
    }
}

impl RFPulse {
    pub fn new(power_dbm: f64, freq: f64, duration: f64, shape: RfShape) -> Result<Self> {
        if !power_dbm.is_finite() {
            return Err(Error::invalid("power_dbm", "must be finite"));
        }
        check_positive("freq", freq)?;
        check_positive("duration", duration)?;
        Ok(RFPulse {
            power_dbm,
            freq,
            duration,
            shape,
        })
    }

    pub fn rectangular(power_dbm: f64, freq: f64, duration: f64) -> Result<Self> {
        Self::new(power_dbm, freq, duration, RfShape::Rectangular)
    }

    /// 1 µs pulse at −14 dBm nominal, resonant with the cold mechanical mode.
    pub fn paper_defaults() -> Self {
        Self::rectangular(-14.0, DeviceParams::base_temp().omega_m(), 1e-6).expect("valid")
    }

    pub fn power_dbm(&self) -> f64 {
        self.power_dbm
    }
    pub fn freq(&self) -> f64 {
        self.freq
    }
    pub fn duration(&self) -> f64 {
        self.duration
    }
    pub fn shape(&self) -> RfShape {
        self.shape
    }

    pub fn with_power_dbm(self, power_dbm: f64) -> Result<Self> {
        Self::new(power_dbm, self.freq, self.duration, self.shape)
    }

    pub fn with_freq(self, freq: f64) -> Result<Self> {
        Self::new(self.power_dbm, freq, self.duration, self.shape)
    }

    pub fn with_duration(self, duration: f64) -> Result<Self> {
        Self::new(self.power_dbm, self.freq, duration, self.shape)
    }

    /// Drive detuning f_drive − f_m.
    pub fn detuning(&self, device: &DeviceParams) -> f64 {
        self.freq - device.omega_m()
    }
}

/// Laser detuning of the readout pulse relative to the optical cavity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sideband {
    /// ω_c − ω_m: anti-Stokes, state swap.
    Red,
    /// ω_c + ω_m: Stokes.
    Blue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpticalShape {
    Gaussian,
    Rectangular,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawOptical", into = "RawOptical")]
pub struct OpticalPulse {
    detuning: Sideband,
    peak_power: f64,
    duration: f64,
    shape: OpticalShape,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOptical {
    detuning: Sideband,
    peak_power: f64,
    duration: f64,
    shape: OpticalShape,
}

impl TryFrom<RawOptical> for OpticalPulse {
    type Error = Error;
    fn try_from(r: RawOptical) -> Result<Self> {
        OpticalPulse::new(r.detuning, r.peak_power, r.duration, r.shape)
    }
}

impl From<OpticalPulse> for RawOptical {
    fn from(p: OpticalPulse) -> Self {
        RawOptical {
            detuning: p.detuning,
            peak_power: p.peak_power,
            duration: p.duration,
            shape: p.shape,
        }
    }
}

impl OpticalPulse {
    pub fn new(detuning: Sideband, peak_power: f64, duration: f64, shape: OpticalShape) -> Result<Self> {
        check_at_least("peak_power", peak_power, 0.0)?;
        check_positive("duration", duration)?;
        Ok(OpticalPulse {
            detuning,
            peak_power,
            duration,
            shape,
        })
    }

    /// 40 ns Gaussian pulse with 107 nW peak power at the device.
    pub fn paper_defaults(detuning: Sideband) -> Self {
        Self::new(detuning, 107e-9, 40e-9, OpticalShape::Gaussian).expect("valid")
    }

    pub fn detuning(&self) -> Sideband {
        self.detuning
    }
    pub fn peak_power(&self) -> f64 {
        self.peak_power
    }
    pub fn duration(&self) -> f64 {
        self.duration
    }
    pub fn shape(&self) -> OpticalShape {
        self.shape
    }

    pub fn with_detuning(self, detuning: Sideband) -> Self {
        OpticalPulse { detuning, ..self }
    }

    pub fn with_peak_power(self, peak_power: f64) -> Result<Self> {
        Self::new(self.detuning, peak_power, self.duration, self.shape)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Detector {
    D0,
    D1,
}

impl Detector {
    pub fn index(self) -> u8 {
        match self {
            Detector::D0 => 0,
            Detector::D1 => 1,
        }
    }

    pub fn from_index(i: u8) -> Option<Self> {
        match i {
            0 => Some(Detector::D0),
            1 => Some(Detector::D1),
            _ => None,
        }
    }
}

/// One detector click. `pulse_index` is `None` for CW acquisitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ClickRecord {
    pub detector: Detector,
    pub pulse_index: Option<u64>,
    pub timestamp_ns: u64,
}

impl ClickRecord {
    pub fn timestamp(&self) -> f64 {
        self.timestamp_ns as f64 * 1e-9
    }
}

/// Outcome of one of the fit kernels.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub names: Vec<&'static str>,
    pub params: Vec<f64>,
    pub sigmas: Vec<f64>,
    pub residual_norm: f64,
    /// When false the parameters are untrusted.
    pub converged: bool,
}

impl FitResult {
    fn position(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| *n == name)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.position(name).map(|i| self.params[i])
    }

    pub fn sigma(&self, name: &str) -> Option<f64> {
        self.position(name).map(|i| self.sigmas[i])
    }

    /// Parameter value, or an error when the fit did not converge.
    pub fn trusted(&self, name: &str) -> Result<f64> {
        if !self.converged {
            return Err(Error::FitFailure(format!("`{name}` comes from a non-converged fit")));
        }
        self.get(name)
            .ok_or_else(|| Error::FitFailure(format!("no parameter named `{name}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn occupation_examples() {
        let s = MechanicalState::thermal(0.9).unwrap();
        assert_eq!(occupation(&s), 0.9);
        let s = MechanicalState::displaced(0.0, 1.1).unwrap();
        assert!((occupation(&s) - 1.1).abs() < 1e-15);
        let s = MechanicalState::displaced(0.9, 1.1).unwrap();
        assert!((occupation(&s) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn occupation_ignores_phase() {
        let a = MechanicalState::new(0.3, Complex64::from_polar(1.2, 0.0)).unwrap();
        let b = MechanicalState::new(0.3, Complex64::from_polar(1.2, 2.1)).unwrap();
        assert!((occupation(&a) - occupation(&b)).abs() < 1e-14);
    }

    #[test]
    fn out_of_range_rejected() {
        assert!(MechanicalState::thermal(-0.1).is_err());
        assert!(MechanicalState::new(0.0, Complex64::new(f64::NAN, 0.0)).is_err());
        let d = DeviceParams::base_temp();
        assert!(DeviceParams::new(d.omega_m(), d.gamma_m(), 1.0, 2.0, 1.0, 1.0, 1.0).is_err());
        assert!(DeviceParams::new(d.omega_m(), 0.0, 1.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(EfficiencyChain::new(1.2, 0.5, DetectionPath::Combined(0.1), 0.1, 0.0).is_err());
        assert!(EfficiencyChain::new(0.2, 0.5, DetectionPath::Combined(0.1), 0.1, -1.0).is_err());
        assert!(EfficiencyChain::paper_defaults().with_dead_time(-1e-9).is_err());
        assert!(RFPulse::rectangular(-14.0, 2.7e9, 0.0).is_err());
        assert!(OpticalPulse::new(Sideband::Red, -1.0, 40e-9, OpticalShape::Gaussian).is_err());
    }

    #[test]
    fn reference_chain_numbers() {
        let c = EfficiencyChain::paper_defaults();
        assert!((c.eta_tot() - 8.43e-4).abs() < 1e-15);
        // η_det = η_tot·η_dev/η_fc
        assert!((c.eta_det() - 8.43e-4 * 0.65 / 0.33).abs() < 1e-15);
        assert!((c.eta_det() - 1.66e-3).abs() < 5e-6);
        let q = EfficiencyChain::quoted_detection();
        assert!((q.eta_det() - 1.41e-3).abs() < 1e-15);
    }

    #[test]
    fn room_temp_preset() {
        let cold = DeviceParams::base_temp();
        let warm = DeviceParams::room_temp();
        assert!((cold.omega_m() - warm.omega_m() - 35e6).abs() < 1.0);
        assert!((warm.gamma_m() / cold.gamma_m() - 10.0).abs() < 1e-12);
        assert!((cold.coupling_ratio() - 0.65).abs() < 1e-12);
        // amplitude lifetime ~1.6 µs, close to the quoted ~1.5 µs mechanical lifetime
        assert!((cold.amplitude_lifetime() - 1.616e-6).abs() < 2e-9);
    }

    #[test]
    fn chain_from_toml_variants() {
        let c: EfficiencyChain = toml::from_str(
            "eta_fc = 0.33\neta_dev = 0.65\neta_tot = 8.43e-4\np_r = 0.011\nrf_atten_db = 39.0\n",
        )
        .unwrap();
        assert_eq!(c, EfficiencyChain::paper_defaults());
        let err = toml::from_str::<EfficiencyChain>(
            "eta_fc = 0.33\neta_dev = 0.65\neta_tot = 8.43e-4\neta_trans_qe = 0.1\np_r = 0.011\nrf_atten_db = 39.0\n",
        );
        assert!(err.is_err());
        let err = toml::from_str::<EfficiencyChain>(
            "eta_fc = 0.33\neta_dev = 0.65\neta_tot = 8.43e-4\np_r = 0.011\nrf_atten_db = 39.0\nbogus = 1\n",
        );
        assert!(err.is_err());
    }
}
