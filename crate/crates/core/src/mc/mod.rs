//! Monte Carlo click-stream generation.

pub mod aggregate;
pub mod cw;
pub mod pulsed;
pub mod rf;
pub mod sampler;
pub mod seeds;
pub mod stream;

pub use cw::{amplitude_trace, simulate_cw, CwRun};
pub use pulsed::{simulate_pulsed, PulseSequence};
pub use rf::rf_photons_per_pulse;
pub use sampler::sample_amplitude;
pub use stream::{Acquisition, ClickStream, StreamMeta};
