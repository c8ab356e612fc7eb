use num_complex::Complex64;
use omtrans::mc::sampler::{sample_amplitude, sample_poisson};
use omtrans::mc::seeds::{stream_rng, Purpose};
use omtrans::photostats::{g2_tau_model, g2_zero, photon_number_pmf};
use omtrans::{occupation, MechanicalState};
use proptest::prelude::*;

/// Asymptotic Kolmogorov survival function.
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

#[test]
fn thermal_intensity_is_exponential() {
    let state = MechanicalState::thermal(0.9).unwrap();
    let mut rng = stream_rng(2024, Purpose::Noise, 0);
    let n = 1_000_000;
    let mut x: Vec<f64> = (0..n).map(|_| sample_amplitude(&state, &mut rng).norm_sqr()).collect();
    x.sort_by(f64::total_cmp);
    let nf = n as f64;
    let d = x
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let f = 1.0 - (-v / 0.9).exp();
            (f - i as f64 / nf).abs().max(((i + 1) as f64 / nf - f).abs())
        })
        .fold(0.0, f64::max);
    let sn = nf.sqrt();
    let p = kolmogorov_q((sn + 0.12 + 0.11 / sn) * d);
    assert!(p > 0.01, "D={d:e} p={p}");
}

#[test]
fn kolmogorov_rejects_wrong_mean() {
    // same samples against a 2% wrong mean must be rejected
    let state = MechanicalState::thermal(0.9).unwrap();
    let mut rng = stream_rng(2024, Purpose::Noise, 0);
    let n = 1_000_000;
    let mut x: Vec<f64> = (0..n).map(|_| sample_amplitude(&state, &mut rng).norm_sqr()).collect();
    x.sort_by(f64::total_cmp);
    let nf = n as f64;
    let d = x
        .iter()
        .enumerate()
        .map(|(i, v)| ((1.0 - (-v / 0.918).exp()) - i as f64 / nf).abs())
        .fold(0.0, f64::max);
    assert!(kolmogorov_q(nf.sqrt() * d) < 1e-6);
}

fn tv_distance(state: &MechanicalState, samples: usize, seed: u64) -> f64 {
    let n_max = 80;
    let pmf = photon_number_pmf(state, n_max);
    let mut hist = vec![0u64; n_max + 2];
    let mut rng = stream_rng(seed, Purpose::Noise, 1);
    for _ in 0..samples {
        let a = sample_amplitude(state, &mut rng);
        let k = sample_poisson(a.norm_sqr(), &mut rng) as usize;
        hist[k.min(n_max + 1)] += 1;
    }
    let s = samples as f64;
    let body: f64 = (0..=n_max).map(|k| (hist[k] as f64 / s - pmf.probs[k]).abs()).sum();
    0.5 * (body + (hist[n_max + 1] as f64 / s - pmf.tail_mass).abs())
}

#[test]
fn sampler_matches_photon_number_distribution() {
    let state = MechanicalState::displaced(0.9, 1.1).unwrap();
    let tv = tv_distance(&state, 1_000_000, 5);
    assert!(tv < 1e-2, "{tv}");
    // a neighbouring state is distinguishable at this sample size
    let other = MechanicalState::displaced(0.9, 1.3).unwrap();
    let pmf_a = photon_number_pmf(&state, 80);
    let pmf_b = photon_number_pmf(&other, 80);
    let gap: f64 = 0.5 * pmf_a.probs.iter().zip(&pmf_b.probs).map(|(a, b)| (a - b).abs()).sum::<f64>();
    assert!(gap > 3.0 * tv);
}

#[test]
fn moments_of_pmf_against_closed_form() {
    for (nt, nc) in [(0.9, 1.1), (0.36, 0.0), (0.0, 4.0), (3.0, 7.0)] {
        let s = MechanicalState::displaced(nt, nc).unwrap();
        let p = photon_number_pmf(&s, 200);
        let var = nt * nt + nt + nc * (1.0 + 2.0 * nt);
        assert!((p.mean() - (nt + nc)).abs() < 1e-9);
        assert!((p.variance() - var).abs() < 1e-8 * var.max(1.0));
    }
}

proptest! {
    #[test]
    fn g2_zero_bounded_and_monotone(nt in 1e-3f64..50.0, nc in 0.0f64..50.0, dn in 1e-3f64..10.0) {
        let a = g2_zero(&MechanicalState::displaced(nt, nc).unwrap()).unwrap();
        let b = g2_zero(&MechanicalState::displaced(nt, nc + dn).unwrap()).unwrap();
        prop_assert!((1.0..=2.0).contains(&a));
        prop_assert!(b < a);
        let r = nc / (nt + nc);
        prop_assert!((a - (2.0 - r * r)).abs() < 1e-12);
    }

    #[test]
    fn g2_tau_even_and_anchored(nt in 1e-3f64..20.0, nc in 0.0f64..20.0, tau in 0.0f64..2e-5) {
        let s = MechanicalState::displaced(nt, nc).unwrap();
        let z = g2_zero(&s).unwrap();
        prop_assert!((g2_tau_model(&s, 197e3, 0.0) - z).abs() <= 4.0 * f64::EPSILON * z);
        prop_assert_eq!(g2_tau_model(&s, 197e3, tau), g2_tau_model(&s, 197e3, -tau));
    }

    #[test]
    fn occupation_ignores_phase(nt in 0.0f64..10.0, r in 0.0f64..10.0, phi in -10.0f64..10.0) {
        let a = MechanicalState::new(nt, Complex64::new(r, 0.0)).unwrap();
        let b = MechanicalState::new(nt, Complex64::from_polar(r, phi)).unwrap();
        prop_assert!((occupation(&a) - occupation(&b)).abs() <= 1e-12 * occupation(&a).max(1.0));
    }

    #[test]
    fn negative_occupation_rejected(nt in -1e6f64..-1e-12) {
        prop_assert!(MechanicalState::thermal(nt).is_err());
        prop_assert!(MechanicalState::displaced(0.5, nt).is_err());
    }
}
