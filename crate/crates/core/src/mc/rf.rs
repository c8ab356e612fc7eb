use crate::model::{EfficiencyChain, RFPulse};

/// Planck constant, J·s.
pub const PLANCK: f64 = 6.626_070_15e-34;

/// RF photons reaching the device for a source at `power_dbm` behind
/// `atten_db` of line attenuation, for a pulse of `duration` at `freq`.
pub fn rf_photons(power_dbm: f64, atten_db: f64, duration: f64, freq: f64) -> f64 {
    let watts = 1e-3 * 10f64.powf((power_dbm - atten_db) / 10.0);
    watts * duration / (PLANCK * freq)
}

/// Photons delivered to the device by one RF pulse.
pub fn rf_photons_per_pulse(pulse: &RFPulse, chain: &EfficiencyChain) -> f64 {
    rf_photons(pulse.power_dbm(), chain.rf_atten_db(), pulse.duration(), pulse.freq())
}
