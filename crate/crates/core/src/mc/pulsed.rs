//! Pulsed readout: one thermal draw per repetition, optional RF displacement,
//! Poissonian scattering into the detection chain and a 50/50 split onto
//! two detectors.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::config_hash;
use crate::dynamics::amplitude_at;
use crate::error::{check_at_least, check_positive, Error, Result};
use crate::estimators::budget::DriveCalibration;
use crate::mc::sampler::{sample_amplitude, sample_poisson};
use crate::mc::seeds::{stream_rng, Purpose, PULSES_PER_BLOCK};
use crate::mc::stream::{Acquisition, ClickStream, StreamMeta};
use crate::model::{
    ClickRecord, DeviceParams, Detector, EfficiencyChain, MechanicalState, OpticalPulse, OpticalShape, RFPulse,
    Sideband,
};

/// Default spacing between repetitions, well beyond the mechanical lifetime.
pub const DEFAULT_REP_PERIOD: f64 = 50e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSequence {
    pub repetitions: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rf: Option<RFPulse>,
    pub readout: OpticalPulse,
    pub rep_period: f64,
    /// Start of the readout pulse relative to the start of the repetition;
    /// the coherent amplitude is evaluated at this instant.
    pub readout_delay: f64,
}

impl PulseSequence {
    /// Readout-only sequence.
    pub fn readout_only(repetitions: u64, readout: OpticalPulse) -> Self {
        PulseSequence {
            repetitions,
            rf: None,
            readout,
            rep_period: DEFAULT_REP_PERIOD,
            readout_delay: 0.0,
        }
    }

    /// RF pulse followed immediately by the readout pulse.
    pub fn with_rf(repetitions: u64, rf: RFPulse, readout: OpticalPulse) -> Self {
        PulseSequence {
            repetitions,
            rf: Some(rf),
            readout,
            rep_period: DEFAULT_REP_PERIOD,
            readout_delay: rf.duration(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::invalid("repetitions", "must be >= 1"));
        }
        check_positive("rep_period", self.rep_period)?;
        check_at_least("readout_delay", self.readout_delay, 0.0)?;
        if self.rep_period <= self.readout_delay + readout_gate(&self.readout) {
            return Err(Error::invalid("rep_period", "must exceed readout delay plus readout window"));
        }
        Ok(())
    }
}

/// Detection window of a readout pulse; Gaussian pulses (duration = FWHM)
/// get two FWHM.
pub fn readout_gate(readout: &OpticalPulse) -> f64 {
    match readout.shape() {
        OpticalShape::Rectangular => readout.duration(),
        OpticalShape::Gaussian => 2.0 * readout.duration(),
    }
}

fn emission_offset<R: Rng + ?Sized>(readout: &OpticalPulse, rng: &mut R) -> f64 {
    match readout.shape() {
        OpticalShape::Rectangular => rng.random::<f64>() * readout.duration(),
        OpticalShape::Gaussian => {
            let sigma = readout.duration() / (8.0 * std::f64::consts::LN_2).sqrt();
            let z: f64 = rng.sample(StandardNormal);
            (readout.duration() + sigma * z).clamp(0.0, 2.0 * readout.duration())
        }
    }
}

/// Coherent amplitude present when the readout pulse arrives.
pub fn readout_state(
    seq: &PulseSequence,
    state0: &MechanicalState,
    chain: &EfficiencyChain,
    device: &DeviceParams,
    calibration: &DriveCalibration,
) -> Result<MechanicalState> {
    match &seq.rf {
        None => Ok(*state0),
        Some(rf) => {
            let drive = calibration.pulse_drive_rate(rf, chain, device);
            let beta = amplitude_at(drive, rf, device, seq.readout_delay, state0.beta())?;
            state0.with_beta(beta)
        }
    }
}

#[derive(Serialize)]
struct PulsedInputs<'a> {
    kind: &'static str,
    sequence: &'a PulseSequence,
    state: &'a MechanicalState,
    chain: &'a EfficiencyChain,
    device: &'a DeviceParams,
    calibration: &'a DriveCalibration,
}

/// Detected photons per phonon for this chain; fails if it exceeds unity.
pub(crate) fn checked_readout_constant(chain: &EfficiencyChain) -> Result<f64> {
    let c = chain.readout_constant();
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::Config(format!("efficiency product {c} exceeds 1")));
    }
    Ok(c)
}

/// Click stream of a pulsed experiment.
///
/// Repetitions are split into fixed blocks of [`PULSES_PER_BLOCK`] pulses,
/// each with its own random stream, so the output is identical for any
/// number of worker threads. Clicks are ordered by (pulse_index, timestamp).
pub fn simulate_pulsed(
    seq: &PulseSequence,
    state0: &MechanicalState,
    chain: &EfficiencyChain,
    device: &DeviceParams,
    calibration: &DriveCalibration,
    seed: u64,
) -> Result<ClickStream> {
    seq.validate()?;
    calibration.validate()?;
    let c = checked_readout_constant(chain)?;
    let state = readout_state(seq, state0, chain, device, calibration)?;
    let stokes = match seq.readout.detuning() {
        Sideband::Red => 0.0,
        Sideband::Blue => 1.0,
    };
    let gate = readout_gate(&seq.readout);
    let dark_mean = chain.dark_count_rate() * gate;
    let dead_ns = (chain.dead_time() * 1e9).round() as u64;
    let rep_ns = (seq.rep_period * 1e9).round() as u64;
    let delay_ns = (seq.readout_delay * 1e9).round() as u64;

    let n_blocks = seq.repetitions.div_ceil(PULSES_PER_BLOCK);
    let blocks: Vec<Vec<ClickRecord>> = (0..n_blocks)
        .into_par_iter()
        .map(|block| {
            let mut rng = stream_rng(seed, Purpose::PulsedBlock, block);
            let first = block * PULSES_PER_BLOCK;
            let last = (first + PULSES_PER_BLOCK).min(seq.repetitions);
            let mut out = Vec::new();
            let mut pulse_clicks: Vec<ClickRecord> = Vec::new();
            for i in first..last {
                let alpha = sample_amplitude(&state, &mut rng);
                let photons = sample_poisson(c * (alpha.norm_sqr() + stokes), &mut rng);
                let base = i * rep_ns + delay_ns;
                pulse_clicks.clear();
                for _ in 0..photons {
                    let detector = if rng.random::<bool>() { Detector::D1 } else { Detector::D0 };
                    let t = base + (emission_offset(&seq.readout, &mut rng) * 1e9).round() as u64;
                    pulse_clicks.push(ClickRecord {
                        detector,
                        pulse_index: Some(i),
                        timestamp_ns: t,
                    });
                }
                if dark_mean > 0.0 {
                    for detector in [Detector::D0, Detector::D1] {
                        for _ in 0..sample_poisson(dark_mean, &mut rng) {
                            let t = base + (rng.random::<f64>() * gate * 1e9).round() as u64;
                            pulse_clicks.push(ClickRecord {
                                detector,
                                pulse_index: Some(i),
                                timestamp_ns: t,
                            });
                        }
                    }
                }
                if pulse_clicks.is_empty() {
                    continue;
                }
                pulse_clicks.sort_by_key(|r| (r.timestamp_ns, r.detector));
                if dead_ns > 0 {
                    apply_dead_time(&mut pulse_clicks, dead_ns);
                }
                out.extend_from_slice(&pulse_clicks);
            }
            out
        })
        .collect();

    let clicks = blocks.concat();
    let config_hash = config_hash(&PulsedInputs {
        kind: "pulsed",
        sequence: seq,
        state: state0,
        chain,
        device,
        calibration,
    });
    Ok(ClickStream {
        clicks,
        meta: StreamMeta {
            config_hash,
            seed,
            acquisition: Acquisition::Pulsed {
                n_pulses: seq.repetitions,
                rep_period: seq.rep_period,
            },
            warnings: Vec::new(),
        },
    })
}

/// Drops clicks arriving within `dead_ns` of the previous kept click on the
/// same detector. Input must be time ordered.
pub(crate) fn apply_dead_time(clicks: &mut Vec<ClickRecord>, dead_ns: u64) {
    let mut last: [Option<u64>; 2] = [None, None];
    clicks.retain(|c| {
        let slot = &mut last[c.detector.index() as usize];
        match *slot {
            Some(t) if c.timestamp_ns < t + dead_ns => false,
            _ => {
                *slot = Some(c.timestamp_ns);
                true
            }
        }
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DetectionPath;

    fn readout() -> OpticalPulse {
        OpticalPulse::paper_defaults(Sideband::Red)
    }

    #[test]
    fn zero_chain_gives_empty_stream() {
        let chain = EfficiencyChain::new(0.0, 0.0, DetectionPath::Combined(0.0), 0.0, 0.0).unwrap();
        let seq = PulseSequence::readout_only(10_000, readout());
        let s = simulate_pulsed(
            &seq,
            &MechanicalState::thermal(5.0).unwrap(),
            &chain,
            &DeviceParams::base_temp(),
            &DriveCalibration::default(),
            1,
        )
        .unwrap();
        assert!(s.clicks.is_empty());
    }

    #[test]
    fn stream_is_ordered_and_indexed() {
        let chain = EfficiencyChain::lumped(0.3).unwrap();
        let seq = PulseSequence::readout_only(40_000, readout());
        let s = simulate_pulsed(
            &seq,
            &MechanicalState::displaced(0.9, 1.1).unwrap(),
            &chain,
            &DeviceParams::base_temp(),
            &DriveCalibration::default(),
            9,
        )
        .unwrap();
        assert!(!s.clicks.is_empty());
        assert!(s
            .clicks
            .windows(2)
            .all(|w| (w[0].pulse_index, w[0].timestamp_ns) <= (w[1].pulse_index, w[1].timestamp_ns)));
        for c in &s.clicks {
            let i = c.pulse_index.unwrap();
            let t0 = i * 50_000;
            assert!(c.timestamp_ns >= t0 && c.timestamp_ns <= t0 + 80);
        }
    }

    #[test]
    fn dead_time_removes_close_clicks() {
        let mk = |d, t| ClickRecord {
            detector: d,
            pulse_index: Some(0),
            timestamp_ns: t,
        };
        let mut v = vec![mk(Detector::D0, 0), mk(Detector::D1, 5), mk(Detector::D0, 10), mk(Detector::D0, 60)];
        apply_dead_time(&mut v, 50);
        assert_eq!(v, vec![mk(Detector::D0, 0), mk(Detector::D1, 5), mk(Detector::D0, 60)]);
    }

    #[test]
    fn rejects_bad_sequences() {
        let mut seq = PulseSequence::readout_only(0, readout());
        assert!(seq.validate().is_err());
        seq.repetitions = 1;
        seq.rep_period = 50e-9;
        assert!(seq.validate().is_err());
    }
}
