//! Continuous-wave readout: the thermal amplitude follows a complex
//! Ornstein–Uhlenbeck process around the coherent displacement and clicks
//! are thinned from the resulting intensity on a fixed time grid.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::config::config_hash;
use crate::error::{check_positive, Error, Result};
use crate::mc::pulsed::apply_dead_time;
use crate::mc::sampler::sample_poisson;
use crate::mc::seeds::{stream_rng, Purpose};
use crate::mc::stream::{Acquisition, ClickStream, StreamMeta};
use crate::model::{ClickRecord, DeviceParams, Detector, EfficiencyChain, MechanicalState};

/// Runs shorter than this many amplitude lifetimes are flagged.
pub const MIN_LIFETIMES: f64 = 1000.0;
/// Grid points per energy-decay time 1/γ_m, at least.
pub const STEPS_PER_DECAY: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CwRun {
    /// Acquisition time, s.
    pub duration: f64,
    /// Swaps per second per phonon; the click rate is
    /// swap_rate·η_det·|α(t)|².
    pub swap_rate: f64,
    /// Grid step, s. Defaults to 1/(50·γ_m).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
}

impl CwRun {
    pub fn new(duration: f64, swap_rate: f64) -> Result<Self> {
        let run = CwRun {
            duration,
            swap_rate,
            step: None,
        };
        run.validate()?;
        Ok(run)
    }

    pub fn with_step(mut self, step: f64) -> Result<Self> {
        self.step = Some(step);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("duration", self.duration)?;
        check_positive("swap_rate", self.swap_rate)?;
        if let Some(s) = self.step {
            check_positive("step", s)?;
        }
        Ok(())
    }

    pub fn grid_step(&self, device: &DeviceParams) -> Result<f64> {
        let max = 1.0 / (STEPS_PER_DECAY * device.gamma_m());
        match self.step {
            None => Ok(max),
            Some(s) if s <= max * (1.0 + 1e-12) => Ok(s),
            Some(s) => Err(Error::invalid(
                "step",
                format!("{s:e} s does not resolve the decay; must be <= {max:e} s"),
            )),
        }
    }
}

/// Stationary complex OU amplitude β + g(t): g relaxes at π·γ_m with
/// E|g|² = n_th, advanced by its exact one-step transition.
struct OuAmplitude {
    beta: Complex64,
    fluct: Complex64,
    rho: f64,
    kick: f64,
}

impl OuAmplitude {
    fn new<R: Rng + ?Sized>(state: &MechanicalState, device: &DeviceParams, dt: f64, rng: &mut R) -> Self {
        let rho = (-PI * device.gamma_m() * dt).exp();
        let s = (state.n_th() / 2.0).sqrt();
        let x: f64 = rng.sample(StandardNormal);
        let y: f64 = rng.sample(StandardNormal);
        OuAmplitude {
            beta: state.beta(),
            fluct: Complex64::new(s * x, s * y),
            rho,
            kick: (state.n_th() * (1.0 - rho * rho) / 2.0).sqrt(),
        }
    }

    fn current(&self) -> Complex64 {
        self.beta + self.fluct
    }

    fn advance<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        if self.kick > 0.0 {
            let x: f64 = rng.sample(StandardNormal);
            let y: f64 = rng.sample(StandardNormal);
            self.fluct = self.fluct * self.rho + Complex64::new(self.kick * x, self.kick * y);
        }
    }
}

/// Amplitude α(t) sampled every `dt` for `steps` points, started in the
/// stationary distribution.
pub fn amplitude_trace(
    state: &MechanicalState,
    device: &DeviceParams,
    dt: f64,
    steps: usize,
    seed: u64,
) -> Result<Vec<Complex64>> {
    check_positive("dt", dt)?;
    let mut rng = stream_rng(seed, Purpose::Cw, 0);
    let mut process = OuAmplitude::new(state, device, dt, &mut rng);
    Ok((0..steps)
        .map(|_| {
            let a = process.current();
            process.advance(&mut rng);
            a
        })
        .collect())
}

#[derive(Serialize)]
struct CwInputs<'a> {
    kind: &'static str,
    run: &'a CwRun,
    state: &'a MechanicalState,
    device: &'a DeviceParams,
    chain: &'a EfficiencyChain,
}

/// Click stream of a CW experiment.
///
/// The fluctuating part of α relaxes at π·γ_m with stationary variance
/// n_th and is advanced with its exact Gaussian transition, so the grid
/// step only limits the time resolution of the intensity, not the
/// statistics. The stream is generated sequentially from one random
/// stream and does not depend on the thread pool.
pub fn simulate_cw(
    run: &CwRun,
    state: &MechanicalState,
    device: &DeviceParams,
    chain: &EfficiencyChain,
    seed: u64,
) -> Result<ClickStream> {
    run.validate()?;
    let dt = run.grid_step(device)?;
    let rate = run.swap_rate * chain.eta_det();
    let steps = (run.duration / dt).ceil() as u64;

    let mut warnings = Vec::new();
    let lifetimes = run.duration / device.amplitude_lifetime();
    if lifetimes < MIN_LIFETIMES {
        let w = format!(
            "duration covers only {lifetimes:.0} amplitude lifetimes (< {MIN_LIFETIMES:.0}); correlations are not converged"
        );
        log::warn!("{w}");
        warnings.push(w);
    }

    let mut rng = stream_rng(seed, Purpose::Cw, 0);
    let mut process = OuAmplitude::new(state, device, dt, &mut rng);
    let mut clicks = Vec::new();
    let mut step_clicks: Vec<ClickRecord> = Vec::new();
    for k in 0..steps {
        let t0 = k as f64 * dt;
        let width = dt.min(run.duration - t0);
        let intensity = process.current().norm_sqr();
        let n = sample_poisson(rate * intensity * width, &mut rng);
        if n > 0 {
            step_clicks.clear();
            for _ in 0..n {
                let detector = if rng.random::<bool>() { Detector::D1 } else { Detector::D0 };
                let t = t0 + rng.random::<f64>() * width;
                step_clicks.push(ClickRecord {
                    detector,
                    pulse_index: None,
                    timestamp_ns: (t * 1e9).round() as u64,
                });
            }
            step_clicks.sort_by_key(|r| (r.timestamp_ns, r.detector));
            clicks.extend_from_slice(&step_clicks);
        }
        process.advance(&mut rng);
    }

    if chain.dark_count_rate() > 0.0 {
        let mut noise = stream_rng(seed, Purpose::Noise, 0);
        for detector in [Detector::D0, Detector::D1] {
            for _ in 0..sample_poisson(chain.dark_count_rate() * run.duration, &mut noise) {
                let t = noise.random::<f64>() * run.duration;
                clicks.push(ClickRecord {
                    detector,
                    pulse_index: None,
                    timestamp_ns: (t * 1e9).round() as u64,
                });
            }
        }
        clicks.sort_by_key(|r| (r.timestamp_ns, r.detector));
    }
    if chain.dead_time() > 0.0 {
        apply_dead_time(&mut clicks, (chain.dead_time() * 1e9).round() as u64);
    }

    let config_hash = config_hash(&CwInputs {
        kind: "cw",
        run,
        state,
        device,
        chain,
    });
    Ok(ClickStream {
        clicks,
        meta: StreamMeta {
            config_hash,
            seed,
            acquisition: Acquisition::Cw { duration: run.duration },
            warnings,
        },
    })
}
