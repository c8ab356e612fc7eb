use crate::error::{Error, Result};
use crate::estimators::fit::lm::{minimize, sigmas};
use crate::model::FitResult;

pub const LORENTZIAN_PARAMS: [&str; 4] = ["center", "fwhm", "amplitude", "offset"];

/// offset + amplitude·(fwhm/2)²/((x − center)² + (fwhm/2)²).
pub fn lorentzian(x: f64, center: f64, fwhm: f64, amplitude: f64, offset: f64) -> f64 {
    let h2 = (fwhm / 2.0).powi(2);
    offset + amplitude * h2 / ((x - center).powi(2) + h2)
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Deterministic starting point: centre at the maximum, offset from the
/// median of the outer fifth of the points on each side, width from the
/// half-maximum crossings.
fn initial_guess(x: &[f64], y: &[f64]) -> [f64; 4] {
    let n = x.len();
    let imax = (0..n).fold(0, |best, i| if y[i] > y[best] { i } else { best });
    let edge = (n / 5).max(2).min(n / 2);
    let mut edges: Vec<f64> = y[..edge].iter().chain(&y[n - edge..]).copied().collect();
    let offset = median(&mut edges);
    let amp = y[imax] - offset;
    let half = offset + amp / 2.0;

    let cross = |range: &mut dyn Iterator<Item = usize>| -> Option<f64> {
        let mut prev = imax;
        for i in range {
            if y[i] <= half {
                let t = (y[prev] - half) / (y[prev] - y[i]);
                return Some(x[prev] + t * (x[i] - x[prev]));
            }
            prev = i;
        }
        None
    };
    let left = cross(&mut (0..imax).rev());
    let right = cross(&mut (imax + 1..n));
    let span = x[n - 1] - x[0];
    let fwhm = match (left, right) {
        (Some(l), Some(r)) => r - l,
        (Some(l), None) => 2.0 * (x[imax] - l),
        (None, Some(r)) => 2.0 * (r - x[imax]),
        (None, None) => span / 4.0,
    };
    let fwhm = if fwhm > 0.0 { fwhm } else { span / 4.0 };
    [x[imax], fwhm, amp, offset]
}

fn check_inputs(x: &[f64], y: &[f64], sigma: Option<&[f64]>) -> Result<()> {
    if x.len() != y.len() || sigma.is_some_and(|s| s.len() != x.len()) {
        return Err(Error::invalid("data", "x, y (and sigma) must have equal length"));
    }
    if x.len() < 5 {
        return Err(Error::UnderConstrained(format!("{} points, need at least 5", x.len())));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite data".into()));
    }
    if let Some(s) = sigma {
        if s.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Domain("sigmas must be finite and > 0".into()));
        }
    }
    if !x.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::invalid("x", "must be strictly increasing"));
    }
    let (lo, hi) = y.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if hi - lo <= 0.0 {
        return Err(Error::FitFailure("degenerate data: zero variance".into()));
    }
    Ok(())
}

fn fit(x: &[f64], y: &[f64], sigma: Option<&[f64]>) -> Result<FitResult> {
    check_inputs(x, y, sigma)?;
    // work on centred, unit-scale axes; line centres sit at GHz while
    // widths are kHz
    let n = x.len();
    let x0 = 0.5 * (x[0] + x[n - 1]);
    let xs = 0.5 * (x[n - 1] - x[0]);
    let (lo, hi) = y.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let ys = hi - lo;
    let xn: Vec<f64> = x.iter().map(|v| (v - x0) / xs).collect();
    let yn: Vec<f64> = y.iter().map(|v| (v - lo) / ys).collect();
    let w: Vec<f64> = match sigma {
        Some(s) => s.iter().map(|s| (ys / s).powi(2)).collect(),
        None => vec![1.0; n],
    };

    let model = |p: &[f64], x: f64, g: &mut [f64]| {
        let h = p[1] / 2.0;
        let d = x - p[0];
        let den = d * d + h * h;
        let shape = h * h / den;
        g[0] = p[2] * h * h * 2.0 * d / (den * den);
        g[1] = p[2] * h * d * d / (den * den);
        g[2] = shape;
        g[3] = 1.0;
        p[3] + p[2] * shape
    };
    let out = minimize(&model, &xn, &yn, &w, initial_guess(&xn, &yn).to_vec());
    let s = sigmas(&out, n, sigma.is_some());
    let p = &out.params;
    let fwhm = p[1].abs() * xs;
    if !(fwhm > 0.0 && fwhm.is_finite()) {
        return Err(Error::FitFailure("collapsed linewidth".into()));
    }
    if x[n - 1] - x[0] <= fwhm {
        return Err(Error::UnderConstrained(format!(
            "data span {:e} does not exceed the fitted FWHM {fwhm:e}",
            x[n - 1] - x[0]
        )));
    }
    let residual_norm = x
        .iter()
        .zip(y)
        .map(|(&xi, &yi)| (yi - lorentzian(xi, x0 + xs * p[0], fwhm, ys * p[2], lo + ys * p[3])).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(FitResult {
        names: LORENTZIAN_PARAMS.to_vec(),
        params: vec![x0 + xs * p[0], fwhm, ys * p[2], lo + ys * p[3]],
        sigmas: vec![xs * s[0], xs * s[1], ys * s[2], ys * s[3]],
        residual_norm,
        converged: out.converged && s.iter().all(|v| v.is_finite()),
    })
}

/// Unweighted least-squares Lorentzian; errors scaled by the residual
/// variance.
pub fn fit_lorentzian(x: &[f64], y: &[f64]) -> Result<FitResult> {
    fit(x, y, None)
}

/// Lorentzian fit with known 1σ errors per point.
pub fn fit_lorentzian_weighted(x: &[f64], y: &[f64], sigma: &[f64]) -> Result<FitResult> {
    fit(x, y, Some(sigma))
}
