//! Analysis pipeline over click streams and count tables.

pub mod budget;
pub mod coincidence;
pub mod fit;
pub mod g2;
pub mod thermometry;

pub use budget::{efficiency_budget, BudgetReport, DriveCalibration};
pub use coincidence::{coincidences, coincidences_between, CoincidenceHistogram, DEFAULT_MAX_DELTA_I};
pub use fit::{bootstrap_sigmas, fit_lorentzian, fit_lorentzian_weighted, fit_powerlaw, fit_sinusoid};
pub use g2::{g2_tau_estimate, g2_zero_estimate, G2Curve};
pub use thermometry::thermometry;
