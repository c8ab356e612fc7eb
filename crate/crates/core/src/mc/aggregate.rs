//! Total detected counts over many repetitions without materialising
//! individual clicks.
//!
//! Counts summed over N independent pulses are Poisson given the summed
//! intensity Σ|α_i|², which is itself an exact scaled noncentral χ² draw,
//! so these samplers are equal in distribution to summing per-pulse
//! simulations while costing O(1) per setting.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{check_unit, Result};
use crate::mc::pulsed::checked_readout_constant;
use crate::mc::sampler::{sample_poisson, sample_summed_intensity};
use crate::mc::seeds::{stream_rng, Purpose};
use crate::model::{EfficiencyChain, MechanicalState, Sideband};

/// Detected counts from `n_pulses` readouts of `state` on one sideband.
pub fn sideband_counts<R: Rng + ?Sized>(
    state: &MechanicalState,
    chain: &EfficiencyChain,
    sideband: Sideband,
    n_pulses: u64,
    rng: &mut R,
) -> Result<u64> {
    let c = checked_readout_constant(chain)?;
    let stokes = match sideband {
        Sideband::Red => 0.0,
        Sideband::Blue => n_pulses as f64,
    };
    let s = sample_summed_intensity(state, n_pulses, rng);
    Ok(sample_poisson(c * (s + stokes), rng))
}

/// Red and blue counts for a thermometry run, each from `n_pulses`.
pub fn thermometry_counts(
    state: &MechanicalState,
    chain: &EfficiencyChain,
    n_pulses: u64,
    seed: u64,
    index: u64,
) -> Result<(u64, u64)> {
    let mut rng = stream_rng(seed, Purpose::Aggregate, index);
    let r = sideband_counts(state, chain, Sideband::Red, n_pulses, &mut rng)?;
    let b = sideband_counts(state, chain, Sideband::Blue, n_pulses, &mut rng)?;
    Ok((r, b))
}

/// Red-sideband counts per drive setting; `states[k]` is the mechanical
/// state produced by the k-th setting.
pub fn scan_counts(states: &[MechanicalState], chain: &EfficiencyChain, n_pulses: u64, seed: u64) -> Result<Vec<u64>> {
    states
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let mut rng = stream_rng(seed, Purpose::Aggregate, k as u64);
            sideband_counts(s, chain, Sideband::Red, n_pulses, &mut rng)
        })
        .collect()
}

/// One output port of an interferometer combining the converted field with
/// a phase-locked reference of equal mean photon number.
///
/// The reference overlaps the converted mode with amplitude `v_max`; the
/// unmatched part of its power adds incoherently. The expected count rate
/// is c·⟨n⟩·(1 + v_max·√(n_coh/⟨n⟩)·cos φ).
pub fn interference_counts(
    state: &MechanicalState,
    chain: &EfficiencyChain,
    v_max: f64,
    phases: &[f64],
    n_pulses: u64,
    seed: u64,
) -> Result<Vec<u64>> {
    check_unit("v_max", v_max)?;
    let c = checked_readout_constant(chain)?;
    let n = state.n_th() + state.n_coh();
    let reference = n.sqrt();
    let unit = if state.n_coh() > 0.0 {
        state.beta() / state.beta().norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    phases
        .iter()
        .enumerate()
        .map(|(k, &phi)| {
            let mut rng = stream_rng(seed, Purpose::Interference, k as u64);
            let r = unit * Complex64::from_polar(reference, phi);
            let mixed = state.with_beta(state.beta() + v_max * r)?;
            let coherent = sample_summed_intensity(&mixed, n_pulses, &mut rng);
            let incoherent = (1.0 - v_max * v_max) * n * n_pulses as f64;
            Ok(sample_poisson(c * 0.5 * (coherent + incoherent), &mut rng))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::photostats::visibility_model;

    #[test]
    fn interference_mean_follows_visibility() {
        // noiseless limit: huge pulse count, compare relative fringe depth
        let state = MechanicalState::displaced(0.9, 1.1).unwrap();
        let chain = EfficiencyChain::lumped(0.5).unwrap();
        let counts = interference_counts(&state, &chain, 0.9, &[0.0, std::f64::consts::PI], 1_000_000_000, 5).unwrap();
        let (hi, lo) = (counts[0] as f64, counts[1] as f64);
        let v = (hi - lo) / (hi + lo);
        assert!((v - visibility_model(1.1, 0.9, 0.9).unwrap()).abs() < 1e-3, "{v}");
    }

    #[test]
    fn blue_adds_stokes_term() {
        let state = MechanicalState::thermal(0.9).unwrap();
        let chain = EfficiencyChain::lumped(0.1).unwrap();
        let (r, b) = thermometry_counts(&state, &chain, 100_000_000, 1, 0).unwrap();
        let ratio = b as f64 / r as f64;
        assert!((ratio - 1.9 / 0.9).abs() < 0.01, "{ratio}");
    }
}
