//! Closed-form statistics of displaced thermal states.
//!
//! A displaced thermal state with thermal occupation n_th and coherent
//! amplitude β has mean occupation n_coh + n_th, variance
//! n_th² + n_th + n_coh·(1 + 2·n_th) and
//! g²(0) = 2 − n_coh² / (n_th + n_coh)².

use num_complex::Complex64;

use crate::error::{check_at_least, check_unit, Error, Result};
use crate::model::{occupation, DeviceParams, EfficiencyChain, MechanicalState};
use crate::quadrature::GaussHermite;

/// Zero-delay intensity correlation, in [1, 2].
pub fn g2_zero(state: &MechanicalState) -> Result<f64> {
    let n = occupation(state);
    if n <= 0.0 {
        return Err(Error::UndefinedStatistic("g2(0)"));
    }
    let f = state.n_coh() / n;
    Ok(2.0 - f * f)
}

/// g²(0) as a function of n_coh/n_th alone.
pub fn g2_zero_from_ratio(coh_over_th: f64) -> f64 {
    let f = coh_over_th / (1.0 + coh_over_th);
    2.0 - f * f
}

/// Photon-number variance of the state.
pub fn number_variance(state: &MechanicalState) -> f64 {
    let (nt, nc) = (state.n_th(), state.n_coh());
    nt * nt + nt + nc * (1.0 + 2.0 * nt)
}

/// Normalised intensity correlation at delay τ for a thermal field with
/// exponential amplitude correlation (rate π·γ_m) plus a constant coherent
/// part. Even in τ, equals [`g2_zero`] at τ = 0 and tends to 1.
///
/// Returns NaN for the vacuum.
pub fn g2_tau_model(state: &MechanicalState, gamma_m: f64, tau: f64) -> f64 {
    let (nt, nc) = (state.n_th(), state.n_coh());
    let n = nt + nc;
    let amp = (-std::f64::consts::PI * gamma_m * tau.abs()).exp();
    1.0 + (nt * nt * amp * amp + 2.0 * nc * nt * amp) / (n * n)
}

/// Visibility of the interference between the scattered light and a
/// matched coherent reference, v_max·√(n_coh/(n_coh + n_th)).
pub fn visibility_model(n_coh: f64, n_th: f64, v_max: f64) -> Result<f64> {
    check_unit("v_max", v_max)?;
    check_at_least("n_coh", n_coh, 0.0)?;
    check_at_least("n_th", n_th, 0.0)?;
    let n = n_coh + n_th;
    if n <= 0.0 {
        return Err(Error::UndefinedStatistic("visibility"));
    }
    Ok(v_max * (n_coh / n).sqrt())
}

/// Optomechanical cooperativity 4·g0²·n_c/(κ·γ_m).
pub fn cooperativity(device: &DeviceParams, n_c: f64) -> Result<f64> {
    check_at_least("n_c", n_c, 0.0)?;
    Ok(4.0 * device.g0().powi(2) * n_c / (device.kappa() * device.gamma_m()))
}

/// How the detected rate scales with occupation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateMode {
    /// Counts per readout pulse: p_r·η_det per phonon.
    Pulsed,
    /// Counts per second under continuous readout at `swap_rate` phonon
    /// swaps per second per phonon: swap_rate·η_det per phonon.
    Cw { swap_rate: f64 },
}

/// Detected anti-Stokes (red) and Stokes (blue) rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SidebandRates {
    pub gamma_r: f64,
    pub gamma_b: f64,
    /// Number of pulses (or seconds, in CW) the rates were averaged over;
    /// needed for counting-statistics uncertainties.
    pub exposure: Option<f64>,
}

impl SidebandRates {
    pub fn new(gamma_r: f64, gamma_b: f64) -> Result<Self> {
        check_at_least("gamma_r", gamma_r, 0.0)?;
        check_at_least("gamma_b", gamma_b, 0.0)?;
        Ok(SidebandRates {
            gamma_r,
            gamma_b,
            exposure: None,
        })
    }

    /// Rates from raw counts accumulated over `exposure` pulses or seconds.
    pub fn from_counts(counts_r: u64, counts_b: u64, exposure: f64) -> Result<Self> {
        crate::error::check_positive("exposure", exposure)?;
        Ok(SidebandRates {
            gamma_r: counts_r as f64 / exposure,
            gamma_b: counts_b as f64 / exposure,
            exposure: Some(exposure),
        })
    }

    pub fn ratio(&self) -> f64 {
        self.gamma_b / self.gamma_r
    }
}

/// Γ_R = c·⟨n⟩ and Γ_B = c·(⟨n⟩ + 1).
pub fn sideband_rates(state: &MechanicalState, chain: &EfficiencyChain, mode: RateMode) -> SidebandRates {
    let c = match mode {
        RateMode::Pulsed => chain.readout_constant(),
        RateMode::Cw { swap_rate } => swap_rate * chain.eta_det(),
    };
    let n = occupation(state);
    SidebandRates {
        gamma_r: c * n,
        gamma_b: c * (n + 1.0),
        exposure: None,
    }
}

/// Truncated photon-number distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    pub probs: Vec<f64>,
    /// 1 − Σ probs.
    pub tail_mass: f64,
}

/// Tail mass above which a [`Pmf`] counts as truncated.
pub const PMF_TAIL_TOLERANCE: f64 = 1e-6;

impl Pmf {
    pub fn truncated(&self) -> bool {
        self.tail_mass > PMF_TAIL_TOLERANCE
    }

    pub fn mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(k, p)| k as f64 * p).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.probs
            .iter()
            .enumerate()
            .map(|(k, p)| (k as f64 - m).powi(2) * p)
            .sum()
    }
}

const MAX_QUADRATURE_ORDER: usize = 600;

/// P(n) for n = 0..=n_max of the displaced thermal state.
///
/// The Poisson kernel e^{−|α|²}|α|^{2n}/n! is averaged over the Gaussian
/// phase-space weight of the state (mean β, variance n_th). Folding the
/// kernel's exponential into the weight leaves a complex Gaussian with
/// mean β/(1+n_th) and variance n_th/(1+n_th) and a polynomial integrand,
/// which a tensor Gauss–Hermite rule of order n_max + 2 integrates exactly.
pub fn photon_number_pmf(state: &MechanicalState, n_max: usize) -> Pmf {
    let nt = state.n_th();
    let beta = state.beta();
    let prefactor = (-beta.norm_sqr() / (1.0 + nt)).exp() / (1.0 + nt);
    let mean = beta / (1.0 + nt);
    let spread = (nt / (1.0 + nt) / 2.0).sqrt();

    let order = (n_max + 2).clamp(24, MAX_QUADRATURE_ORDER);
    let gh = GaussHermite::new(order);


    let mut probs = vec![0.0; n_max + 1];
    let nodes: Vec<(f64, f64)> = if spread == 0.0 {
        vec![(mean.norm_sqr(), 1.0)]
    } else {
        let mut v = Vec::with_capacity(order * order);
        for (x, wx) in gh.nodes.iter().zip(&gh.weights) {
            for (y, wy) in gh.nodes.iter().zip(&gh.weights) {
                let w = wx * wy;
                if w < 1e-300 {
                    continue;
                }
                let alpha = mean + Complex64::new(spread * x, spread * y);
                v.push((alpha.norm_sqr(), w));
            }
        }
        v
    };

    for (r2, w) in nodes {
        if r2 == 0.0 {
            probs[0] += w;
            continue;
        }
        // w·r2^k/k! by recurrence; relative precision holds at any scale
        // above the subnormal range, which the weight cut-off excludes
        let mut term = w;
        probs[0] += term;
        for (k, p) in probs.iter_mut().enumerate().skip(1) {
            term *= r2 / k as f64;
            *p += term;
        }
    }
    for p in &mut probs {
        *p *= prefactor;
    }
    let tail_mass = (1.0 - probs.iter().sum::<f64>()).max(0.0);
    let pmf = Pmf { probs, tail_mass };
    if pmf.truncated() {
        log::warn!(
            "photon-number distribution truncated at n_max = {n_max}: tail mass {:.3e}",
            pmf.tail_mass
        );
    }
    pmf
}

/// Smallest n_max whose tail mass is below `tol`, found by doubling from a
/// moment-based guess.
pub fn pmf_with_tail_below(state: &MechanicalState, tol: f64) -> Pmf {
    let n = occupation(state);
    let sd = number_variance(state).sqrt();
    let mut n_max = ((n + 12.0 * sd).ceil() as usize).max(20);
    loop {
        let pmf = photon_number_pmf(state, n_max);
        if pmf.tail_mass <= tol || n_max + 2 >= MAX_QUADRATURE_ORDER {
            return pmf;
        }
        n_max = (n_max * 2).min(MAX_QUADRATURE_ORDER - 2);
    }
}
