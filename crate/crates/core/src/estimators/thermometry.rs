use crate::error::{Error, Result};
use crate::photostats::SidebandRates;

/// Thermal occupation from the sideband asymmetry, n_th = Γ_R/(Γ_B − Γ_R).
///
/// The 1σ error propagates Poisson counting noise on both rates over their
/// exposure; rates without an exposure are taken as exact (σ = 0).
pub fn thermometry(rates: &SidebandRates) -> Result<(f64, f64)> {
    let (r, b) = (rates.gamma_r, rates.gamma_b);
    if b <= r {
        return Err(Error::UnphysicalAsymmetry { gamma_r: r, gamma_b: b });
    }
    let n = r / (b - r);
    let sigma = match rates.exposure {
        Some(e) => {
            let (vr, vb) = (r / e, b / e);
            ((b * b * vr + r * r * vb) / (b - r).powi(4)).sqrt()
        }
        None => 0.0,
    };
    Ok((n, sigma))
}
