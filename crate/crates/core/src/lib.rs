//! Displaced-thermal optomechanical transduction: closed-form statistics,
//! drive dynamics, Monte Carlo click streams and the estimators that turn
//! those streams back into occupations, correlations and linewidths.

pub mod config;
pub mod dynamics;
pub mod error;
pub mod estimators;
pub mod mc;
pub mod model;
pub mod photostats;
pub mod quadrature;

pub use config::{Experiment, RunConfig};
pub use error::{Error, Result};
pub use estimators::budget::DriveCalibration;
pub use estimators::coincidence::CoincidenceHistogram;
pub use mc::{ClickStream, PulseSequence};
pub use model::{
    occupation, ClickRecord, DetectionPath, Detector, DeviceParams, EfficiencyChain, FitResult, MechanicalState,
    OpticalPulse, OpticalShape, RFPulse, RfShape, Sideband,
};
pub use photostats::SidebandRates;
