//! Deterministic response of the mechanical mode to a coherent RF drive.
//!
//! In the frame rotating at the drive frequency the coherent amplitude obeys
//!
//! ```text
//! dβ/dt = (i·2πδ − π·γ_m)·β + i·Ω
//! ```
//!
//! with δ = f_drive − f_m and Ω an abstract drive rate (its relation to RF
//! power lives in [`crate::estimators::budget::DriveCalibration`]).

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_at_least, Error, Result};
use crate::model::{DeviceParams, MechanicalState, RFPulse, RfShape};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Exponent of the homogeneous solution, i·2πδ − π·γ_m.
fn evolution_rate(detuning: f64, device: &DeviceParams) -> Complex64 {
    Complex64::new(-device.amplitude_decay_rate(), 2.0 * PI * detuning)
}

/// Steady-state amplitude under a continuous drive of rate `drive`.
///
/// |β_ss|² = |Ω|² / ((2πδ)² + (πγ_m)²), a Lorentzian in δ with FWHM γ_m.
pub fn steady_state_amplitude(drive: Complex64, detuning: f64, device: &DeviceParams) -> Complex64 {
    -I * drive / evolution_rate(detuning, device)
}

/// Coherent amplitude trace on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DriveResponse {
    pub times: Vec<f64>,
    pub beta_t: Vec<Complex64>,
    pub detuning: f64,
}

impl DriveResponse {
    pub fn occupations(&self) -> impl Iterator<Item = f64> + '_ {
        self.beta_t.iter().map(|b| b.norm_sqr())
    }

    /// CSV trace with columns `time,re_beta,im_beta,abs_beta_sq`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "time,re_beta,im_beta,abs_beta_sq")?;
        for (t, b) in self.times.iter().zip(&self.beta_t) {
            writeln!(w, "{:e},{:e},{:e},{:e}", t, b.re, b.im, b.norm_sqr())?;
        }
        Ok(())
    }
}

/// Analytic response to a rectangular RF pulse that switches on at t = 0.
///
/// During the pulse β relaxes towards β_ss while ringing at |δ|; after it
/// ends the amplitude decays freely, |β|² ∝ exp(−2π·γ_m·(t − t_end)).
pub fn transient_response(
    drive: Complex64,
    pulse: &RFPulse,
    device: &DeviceParams,
    grid: &[f64],
    beta0: Complex64,
) -> Result<DriveResponse> {
    if pulse.shape() != RfShape::Rectangular {
        return Err(Error::UnsupportedShape(pulse.shape().to_string()));
    }
    validate_grid(grid)?;
    let detuning = pulse.detuning(device);
    let rate = evolution_rate(detuning, device);
    let beta_ss = steady_state_amplitude(drive, detuning, device);
    let t_end = pulse.duration();
    let driven = |t: f64| beta_ss + (beta0 - beta_ss) * (rate * t).exp();
    let beta_end = driven(t_end);

    let beta_t = grid
        .iter()
        .map(|&t| {
            if t <= t_end {
                driven(t)
            } else {
                beta_end * (rate * (t - t_end)).exp()
            }
        })
        .collect();
    Ok(DriveResponse {
        times: grid.to_vec(),
        beta_t,
        detuning,
    })
}

/// Amplitude at a single instant, without building a trace.
pub fn amplitude_at(
    drive: Complex64,
    pulse: &RFPulse,
    device: &DeviceParams,
    t: f64,
    beta0: Complex64,
) -> Result<Complex64> {
    Ok(transient_response(drive, pulse, device, &[t], beta0)?.beta_t[0])
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::invalid("grid", "times must be finite and >= 0"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("grid", "times must be strictly increasing"));
    }
    Ok(())
}

/// Uniform grid of `points` samples over [0, t_max].
pub fn uniform_grid(t_max: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        n => (0..n).map(|k| t_max * k as f64 / (n - 1) as f64).collect(),
    }
}

/// Passband of the IDT as a Lorentzian power envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdtEnvelope {
    pub center: f64,
    pub fwhm: f64,
}

impl IdtEnvelope {
    pub fn from_device(device: &DeviceParams) -> Self {
        IdtEnvelope {
            center: device.idt_center(),
            fwhm: device.idt_bw(),
        }
    }

    /// Relative drive power reaching the mode at frequency `f`.
    pub fn power_factor(&self, f: f64) -> f64 {
        let x = 2.0 * (f - self.center) / self.fwhm;
        1.0 / (1.0 + x * x)
    }
}

/// Steady-state coherent occupation |β_ss|² at each drive frequency.
///
/// `drive` is the rate for the nominal RF power; with an envelope the drive
/// power is scaled by the IDT passband at each frequency.
pub fn linescan(
    drive: Complex64,
    freqs: &[f64],
    device: &DeviceParams,
    envelope: Option<IdtEnvelope>,
) -> Vec<f64> {
    freqs
        .iter()
        .map(|&f| {
            let scale = envelope.map_or(1.0, |e| e.power_factor(f));
            let beta = steady_state_amplitude(drive * scale.sqrt(), f - device.omega_m(), device);
            beta.norm_sqr()
        })
        .collect()
}

/// Empirical heating law n_th = A·P^b for the optical peak power P in W.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerLaw {
    pub prefactor: f64,
    pub exponent: f64,
}

/// Largest heating exponent accepted when deriving a law from two anchors.
pub const MAX_PLAUSIBLE_HEATING_EXPONENT: f64 = 2.0;

impl PowerLaw {
    pub fn new(prefactor: f64, exponent: f64) -> Result<Self> {
        check_at_least("prefactor", prefactor, 0.0)?;
        if !exponent.is_finite() {
            return Err(Error::invalid("exponent", "must be finite"));
        }
        Ok(PowerLaw { prefactor, exponent })
    }

    /// Law with fixed exponent passing through (power, n_th).
    pub fn anchored(power: f64, n_th: f64, exponent: f64) -> Result<Self> {
        if !(power > 0.0 && n_th > 0.0) {
            return Err(Error::Domain("anchor needs positive power and occupation".into()));
        }
        Self::new(n_th / power.powf(exponent), exponent)
    }

    /// Law through two anchors, refused when the implied exponent is not a
    /// plausible monotone heating law.
    pub fn through_anchors(a: (f64, f64), b: (f64, f64)) -> Result<Self> {
        let ((p1, n1), (p2, n2)) = (a, b);
        if !(p1 > 0.0 && p2 > 0.0 && n1 > 0.0 && n2 > 0.0) || p1 == p2 {
            return Err(Error::Domain("anchors need distinct positive powers and positive occupations".into()));
        }
        let exponent = (n2 / n1).ln() / (p2 / p1).ln();
        if !(0.0..=MAX_PLAUSIBLE_HEATING_EXPONENT).contains(&exponent) {
            return Err(Error::InconsistentAnchors {
                exponent,
                max: MAX_PLAUSIBLE_HEATING_EXPONENT,
            });
        }
        Self::anchored(p1, n1, exponent)
    }

    pub fn eval(&self, power: f64) -> f64 {
        if power == 0.0 {
            return 0.0;
        }
        self.prefactor * power.powf(self.exponent)
    }
}

/// Thermal occupation produced by a readout pulse of the given peak power.
pub fn absorption_heating(peak_power: f64, model: &PowerLaw) -> Result<f64> {
    if !(peak_power >= 0.0 && peak_power.is_finite()) {
        return Err(Error::Domain(format!("peak power {peak_power} W must be finite and >= 0")));
    }
    Ok(model.eval(peak_power))
}

/// Replaces (never accumulates) the thermal part; β is untouched.
pub fn heated_state(state: &MechanicalState, peak_power: f64, model: &PowerLaw) -> Result<MechanicalState> {
    state.with_n_th(absorption_heating(peak_power, model)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn device() -> DeviceParams {
        DeviceParams::base_temp()
    }

    #[test]
    fn resonant_peak_and_half_width() {
        let d = device();
        let drive = Complex64::new(2.0e5, 0.0);
        let peak = steady_state_amplitude(drive, 0.0, &d).norm_sqr();
        let expected = drive.norm_sqr() / (PI * d.gamma_m()).powi(2);
        assert!((peak / expected - 1.0).abs() < 1e-12);
        for s in [-1.0, 1.0] {
            let half = steady_state_amplitude(drive, s * d.gamma_m() / 2.0, &d).norm_sqr();
            assert!((half / peak - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn free_decay() {
        let d = device();
        let pulse = RFPulse::rectangular(-14.0, d.omega_m(), 1e-9).unwrap();
        let beta0 = Complex64::new(1.3, -0.4);
        let grid = uniform_grid(5e-6, 51);
        let r = transient_response(Complex64::new(0.0, 0.0), &pulse, &d, &grid, beta0).unwrap();
        for (t, n) in grid.iter().zip(r.occupations()) {
            let want = beta0.norm_sqr() * (-2.0 * PI * d.gamma_m() * t).exp();
            assert!((n - want).abs() <= 1e-12 * want.max(1e-300), "t={t}");
        }
    }

    #[test]
    fn resonant_rise_is_monotone() {
        let d = device();
        let pulse = RFPulse::rectangular(-14.0, d.omega_m(), 20e-6).unwrap();
        let grid = uniform_grid(20e-6, 400);
        let r = transient_response(Complex64::new(1e5, 0.0), &pulse, &d, &grid, Complex64::default()).unwrap();
        let occ: Vec<f64> = r.occupations().collect();
        assert!(occ.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn rejects_gaussian_rf_and_bad_grid() {
        let d = device();
        let g = RFPulse::new(-14.0, d.omega_m(), 1e-6, RfShape::Gaussian).unwrap();
        let e = transient_response(Complex64::new(1.0, 0.0), &g, &d, &[0.0], Complex64::default());
        assert!(matches!(e, Err(Error::UnsupportedShape(_))));
        let p = RFPulse::paper_defaults();
        assert!(transient_response(Complex64::new(1.0, 0.0), &p, &d, &[0.0, 0.0], Complex64::default()).is_err());
    }

    #[test]
    fn envelope_factor() {
        let e = IdtEnvelope::from_device(&device());
        assert_eq!(e.power_factor(2.76e9), 1.0);
        assert!((e.power_factor(2.765e9) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn heating_examples() {
        let law = PowerLaw::anchored(107e-9, 0.90, 1.0 / 3.0).unwrap();
        assert_eq!(absorption_heating(0.0, &law).unwrap(), 0.0);
        assert!((absorption_heating(107e-9, &law).unwrap() - 0.90).abs() < 1e-12);
        assert!(absorption_heating(-1e-9, &law).is_err());
        let s = MechanicalState::displaced(0.1, 2.0).unwrap();
        let h = heated_state(&s, 107e-9, &law).unwrap();
        assert!((h.n_th() - 0.9).abs() < 1e-12);
        assert_eq!(h.beta(), s.beta());
    }

    #[test]
    fn conflicting_anchors_refused() {
        // (0.1 µW, 0.36) and (0.107 µW, 0.90) imply b = ln(2.5)/ln(1.07) ≈ 13.5
        let e = PowerLaw::through_anchors((0.1e-6, 0.36), (0.107e-6, 0.90)).unwrap_err();
        match e {
            Error::InconsistentAnchors { exponent, .. } => assert!((exponent - 13.54).abs() < 0.01),
            other => panic!("unexpected {other:?}"),
        }
        let ok = PowerLaw::through_anchors((1e-7, 0.5), (8e-7, 1.0)).unwrap();
        assert!((ok.exponent - 1.0 / 3.0).abs() < 1e-12);
    }
}
