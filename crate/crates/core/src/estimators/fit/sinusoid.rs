use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::estimators::fit::lm::minimize;
use crate::model::FitResult;

pub const SINUSOID_PARAMS: [&str; 3] = ["visibility", "phase0", "mean"];

/// mean·(1 + visibility·cos(phase − phase0)).
pub fn fringe(phase: f64, visibility: f64, phase0: f64, mean: f64) -> f64 {
    mean * (1.0 + visibility * (phase - phase0).cos())
}

fn wrap(phi: f64) -> f64 {
    let w = phi.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// Fringe fit with the visibility held in [0, 1] by v = sin²u.
///
/// Phases must span at least one period in the sense of an evenly spaced
/// scan: max − min ≥ 2π·(N − 1)/N. Errors come from the Jacobian in
/// (visibility, phase0, mean) at the optimum, scaled by the residual
/// variance, or taken as absolute when `sigma` is given.
pub fn fit_sinusoid_weighted(phase: &[f64], counts: &[f64], sigma: Option<&[f64]>) -> Result<FitResult> {
    let n = phase.len();
    if counts.len() != n || sigma.is_some_and(|s| s.len() != n) {
        return Err(Error::invalid("data", "phase, counts (and sigma) must have equal length"));
    }
    if n < 4 {
        return Err(Error::UnderConstrained(format!("{n} points, need at least 4")));
    }
    if phase.iter().chain(counts).any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite data".into()));
    }
    let (lo, hi) = phase
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let need = 2.0 * PI * (n - 1) as f64 / n as f64;
    if hi - lo < need * (1.0 - 1e-9) {
        return Err(Error::UnderConstrained(format!(
            "phase span {:.4} rad is less than one period ({need:.4} rad for {n} points)",
            hi - lo
        )));
    }
    let w: Vec<f64> = match sigma {
        Some(s) => {
            if s.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                return Err(Error::Domain("sigmas must be finite and > 0".into()));
            }
            s.iter().map(|s| 1.0 / (s * s)).collect()
        }
        None => vec![1.0; n],
    };

    // linear start: y = a + b·cos φ + c·sin φ
    let mut design = DMatrix::zeros(n, 3);
    for (i, &p) in phase.iter().enumerate() {
        let sw = w[i].sqrt();
        design[(i, 0)] = sw;
        design[(i, 1)] = sw * p.cos();
        design[(i, 2)] = sw * p.sin();
    }
    let rhs = DVector::from_iterator(n, counts.iter().zip(&w).map(|(y, w)| y * w.sqrt()));
    let lin = design
        .clone()
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::FitFailure(e.to_string()))?;
    let mean0 = lin[0];
    if mean0 <= 0.0 {
        return Err(Error::FitFailure("non-positive mean count".into()));
    }
    let v0 = ((lin[1].powi(2) + lin[2].powi(2)).sqrt() / mean0).clamp(1e-6, 1.0 - 1e-6);
    let phi0 = lin[2].atan2(lin[1]);

    let model = |p: &[f64], x: f64, g: &mut [f64]| {
        let v = p[1].sin().powi(2);
        let c = (x - p[2]).cos();
        g[0] = 1.0 + v * c;
        g[1] = p[0] * (2.0 * p[1]).sin() * c;
        g[2] = p[0] * v * (x - p[2]).sin();
        p[0] * (1.0 + v * c)
    };
    let out = minimize(&model, phase, counts, &w, vec![mean0, v0.sqrt().asin(), phi0]);
    let mean = out.params[0];
    let vis = out.params[1].sin().powi(2);
    let phase0 = wrap(out.params[2]);

    // covariance in the natural parameters
    let mut a = Matrix3::zeros();
    let mut chi2 = 0.0;
    for i in 0..n {
        let (c, s) = ((phase[i] - phase0).cos(), (phase[i] - phase0).sin());
        let g = Vector3::new(mean * c, mean * vis * s, 1.0 + vis * c);
        a += w[i] * g * g.transpose();
        chi2 += w[i] * (counts[i] - fringe(phase[i], vis, phase0, mean)).powi(2);
    }
    let scale = if sigma.is_some() { 1.0 } else { chi2 / (n - 3) as f64 };
    let sigmas: Vec<f64> = match a.try_inverse() {
        Some(inv) => (0..3).map(|i| (inv[(i, i)] * scale).max(0.0).sqrt()).collect(),
        None => vec![f64::NAN; 3],
    };
    let residual_norm = (0..n)
        .map(|i| (counts[i] - fringe(phase[i], vis, phase0, mean)).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(FitResult {
        names: SINUSOID_PARAMS.to_vec(),
        params: vec![vis, phase0, mean],
        converged: out.converged && sigmas.iter().all(|v| v.is_finite()),
        sigmas,
        residual_norm,
    })
}

pub fn fit_sinusoid(phase: &[f64], counts: &[f64]) -> Result<FitResult> {
    fit_sinusoid_weighted(phase, counts, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scan(n: usize) -> Vec<f64> {
        (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect()
    }

    #[test]
    fn perfect_fringe() {
        let ph = scan(16);
        let y: Vec<f64> = ph.iter().map(|&p| fringe(p, 0.5, 1.0, 1000.0)).collect();
        let f = fit_sinusoid(&ph, &y).unwrap();
        assert!(f.converged);
        assert!((f.get("visibility").unwrap() - 0.5).abs() < 1e-9);
        assert!((f.get("phase0").unwrap() - 1.0).abs() < 1e-9);
        assert!((f.get("mean").unwrap() - 1000.0).abs() < 1e-6);
    }

    #[test]
    fn short_span_rejected() {
        let ph: Vec<f64> = (0..10).map(|k| k as f64 * 0.3).collect();
        let y: Vec<f64> = ph.iter().map(|&p| fringe(p, 0.5, 0.0, 10.0)).collect();
        assert!(matches!(fit_sinusoid(&ph, &y), Err(Error::UnderConstrained(_))));
    }

    #[test]
    fn visibility_stays_in_unit_interval() {
        // over-modulated data cannot push the visibility above 1
        let ph = scan(12);
        let y: Vec<f64> = ph.iter().map(|&p| (10.0 * (1.0 + 1.3 * p.cos())).max(0.0)).collect();
        let f = fit_sinusoid(&ph, &y).unwrap();
        let v = f.get("visibility").unwrap();
        assert!((0.0..=1.0).contains(&v));
    }
}
