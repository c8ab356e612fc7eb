//! Fit kernels. Uncertainties come from the Jacobian at the optimum;
//! [`bootstrap_sigmas`] replaces them with a pairs bootstrap on request.

pub(crate) mod lm;
mod lorentzian;
mod powerlaw;
mod sinusoid;

use rand::Rng;

use crate::error::{Error, Result};
use crate::mc::seeds::{stream_rng, Purpose};
use crate::model::FitResult;

pub use lorentzian::{fit_lorentzian, fit_lorentzian_weighted, lorentzian, LORENTZIAN_PARAMS};
pub use powerlaw::{fit_powerlaw, POWERLAW_PARAMS};
pub use sinusoid::{fit_sinusoid, fit_sinusoid_weighted, fringe, SINUSOID_PARAMS};

/// Re-fits `replicates` resamplings (with replacement) of the (x, y) pairs
/// and returns `base` with its sigmas replaced by the replicate standard
/// deviations. Replicates whose fit fails are skipped; fewer than half
/// succeeding is an error.
pub fn bootstrap_sigmas<F>(x: &[f64], y: &[f64], fit: F, replicates: usize, seed: u64) -> Result<FitResult>
where
    F: Fn(&[f64], &[f64]) -> Result<FitResult>,
{
    let base = fit(x, y)?;
    let n = x.len();
    let k = base.params.len();
    let mut draws: Vec<Vec<f64>> = Vec::with_capacity(replicates);
    for r in 0..replicates {
        let mut rng = stream_rng(seed, Purpose::Bootstrap, r as u64);
        let mut idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
        // keep abscissae ordered for kernels that require it
        idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(a.cmp(&b)));
        idx.dedup_by(|a, b| x[*a] == x[*b]);
        let xs: Vec<f64> = idx.iter().map(|&i| x[i]).collect();
        let ys: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
        if let Ok(f) = fit(&xs, &ys) {
            if f.converged {
                draws.push(f.params);
            }
        }
    }
    if draws.len() * 2 < replicates.max(2) {
        return Err(Error::FitFailure(format!(
            "only {} of {replicates} bootstrap replicates converged",
            draws.len()
        )));
    }
    let m = draws.len() as f64;
    let sigmas = (0..k)
        .map(|j| {
            let mean = draws.iter().map(|d| d[j]).sum::<f64>() / m;
            (draws.iter().map(|d| (d[j] - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt()
        })
        .collect();
    Ok(FitResult { sigmas, ..base })
}
