use crate::error::{Error, Result};
use crate::model::FitResult;

pub const POWERLAW_PARAMS: [&str; 2] = ["A", "b"];

/// Ordinary least squares of ln n = ln A + b·ln P.
pub fn fit_powerlaw(power: &[f64], n_th: &[f64]) -> Result<FitResult> {
    if power.len() != n_th.len() {
        return Err(Error::invalid("data", "power and n_th must have equal length"));
    }
    let m = power.len();
    if m < 3 {
        return Err(Error::UnderConstrained(format!("{m} points, need at least 3")));
    }
    if power.iter().chain(n_th).any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::Domain("powers and occupations must be strictly positive".into()));
    }
    let lx: Vec<f64> = power.iter().map(|p| p.ln()).collect();
    let ly: Vec<f64> = n_th.iter().map(|n| n.ln()).collect();
    let mf = m as f64;
    let mx = lx.iter().sum::<f64>() / mf;
    let my = ly.iter().sum::<f64>() / mf;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::UnderConstrained("all powers equal".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = sxy / sxx;
    let ln_a = my - b * mx;
    let rss: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - ln_a - b * x).powi(2)).sum();
    let s2 = rss / (mf - 2.0);
    let sigma_b = (s2 / sxx).sqrt();
    let sigma_ln_a = (s2 * (1.0 / mf + mx * mx / sxx)).sqrt();
    let a = ln_a.exp();
    Ok(FitResult {
        names: POWERLAW_PARAMS.to_vec(),
        params: vec![a, b],
        sigmas: vec![a * sigma_ln_a, sigma_b],
        residual_norm: rss.sqrt(),
        converged: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_recovery() {
        let p = [1e-8f64, 3e-8, 1e-7, 3e-7, 1e-6];
        let n: Vec<f64> = p.iter().map(|p| 19.0 * p.powf(1.0 / 3.0)).collect();
        let f = fit_powerlaw(&p, &n).unwrap();
        assert!((f.get("b").unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert!((f.get("A").unwrap() / 19.0 - 1.0).abs() < 1e-10);
        assert!(f.residual_norm < 1e-12);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(fit_powerlaw(&[0.0, 1.0, 2.0], &[1.0, 1.0, 1.0]), Err(Error::Domain(_))));
        assert!(matches!(fit_powerlaw(&[1.0, 2.0, 3.0], &[1.0, -1.0, 1.0]), Err(Error::Domain(_))));
        assert!(matches!(fit_powerlaw(&[1.0, 2.0], &[1.0, 1.0]), Err(Error::UnderConstrained(_))));
    }
}
