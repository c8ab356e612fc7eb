use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson, StandardNormal};

use crate::model::MechanicalState;

/// Phase-space amplitude of one realisation: α = β + g with g complex
/// Gaussian of variance n_th/2 per quadrature, so E|α|² = n_coh + n_th.
pub fn sample_amplitude<R: Rng + ?Sized>(state: &MechanicalState, rng: &mut R) -> Complex64 {
    let nt = state.n_th();
    if nt == 0.0 {
        return state.beta();
    }
    let s = (nt / 2.0).sqrt();
    let x: f64 = rng.sample(StandardNormal);
    let y: f64 = rng.sample(StandardNormal);
    state.beta() + Complex64::new(s * x, s * y)
}

/// Poisson variate; inversion for small means, rejection above.
pub fn sample_poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    if mean < 30.0 {
        let u: f64 = rng.random();
        let mut p = (-mean).exp();
        let mut cdf = p;
        let mut k = 0u64;
        while u > cdf && k < 1000 {
            k += 1;
            p *= mean / k as f64;
            cdf += p;
        }
        return k;
    }
    Poisson::new(mean).expect("finite positive mean").sample(rng) as u64
}

/// Σ|α_i|² over `n` independent realisations of `state`, drawn exactly as a
/// scaled noncentral χ² with 2n degrees of freedom.
pub fn sample_summed_intensity<R: Rng + ?Sized>(state: &MechanicalState, n: u64, rng: &mut R) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let nt = state.n_th();
    let coherent = n as f64 * state.n_coh();
    if nt == 0.0 {
        return coherent;
    }
    let half = nt / 2.0;
    // one quadrature carries all of the displacement, the other 2n − 1 are central
    let shift = (coherent / half).sqrt();
    let z: f64 = rng.sample(StandardNormal);
    let dof = 2.0 * n as f64 - 1.0;
    let central = Gamma::new(dof / 2.0, 2.0).expect("positive shape").sample(rng);
    half * ((shift + z).powi(2) + central)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::seeds::{stream_rng, Purpose};

    #[test]
    fn pure_coherent_is_deterministic() {
        let s = MechanicalState::new(0.0, Complex64::new(0.3, -1.0)).unwrap();
        let mut rng = stream_rng(1, Purpose::Noise, 0);
        for _ in 0..10 {
            assert_eq!(sample_amplitude(&s, &mut rng), s.beta());
        }
    }

    #[test]
    fn poisson_moments() {
        let mut rng = stream_rng(2, Purpose::Noise, 0);
        for mean in [0.01, 0.7, 5.0, 80.0] {
            let n = 200_000;
            let xs: Vec<f64> = (0..n).map(|_| sample_poisson(mean, &mut rng) as f64).collect();
            let m = xs.iter().sum::<f64>() / n as f64;
            let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
            let se = (mean / n as f64).sqrt();
            assert!((m - mean).abs() < 5.0 * se, "mean {mean}: {m}");
            assert!((v / mean - 1.0).abs() < 0.05, "var {mean}: {v}");
        }
    }

    #[test]
    fn summed_intensity_moments() {
        // E[S] = n⟨n⟩, Var[S] = n·(n_th² + 2 n_th n_coh)
        let s = MechanicalState::displaced(0.9, 1.1).unwrap();
        let mut rng = stream_rng(3, Purpose::Noise, 0);
        let (n, reps) = (50u64, 40_000);
        let xs: Vec<f64> = (0..reps).map(|_| sample_summed_intensity(&s, n, &mut rng)).collect();
        let m = xs.iter().sum::<f64>() / reps as f64;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (reps - 1) as f64;
        let want_v = n as f64 * (0.81 + 2.0 * 0.9 * 1.1);
        assert!((m - 100.0).abs() < 5.0 * (want_v / reps as f64).sqrt());
        assert!((v / want_v - 1.0).abs() < 0.04);
    }
}
