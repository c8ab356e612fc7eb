use std::f64::consts::PI;

use omtrans::estimators::g2_tau_estimate;
use omtrans::estimators::g2::G2Curve;
use omtrans::mc::{amplitude_trace, simulate_cw, CwRun};
use omtrans::{DeviceParams, EfficiencyChain, MechanicalState};

const RATE: f64 = 4e6;

fn cw_curve(state: &MechanicalState, duration: f64, seed: u64) -> G2Curve {
    let device = DeviceParams::base_temp();
    let chain = EfficiencyChain::paper_defaults();
    let swap = RATE / (chain.eta_det() * (state.n_th() + state.n_coh()));
    let run = CwRun::new(duration, swap).unwrap();
    let s = simulate_cw(&run, state, &device, &chain, seed).unwrap();
    assert!(s.meta.warnings.is_empty());
    let rate = s.clicks.len() as f64 / duration;
    assert!((rate / RATE - 1.0).abs() < 0.01, "{rate}");
    g2_tau_estimate(&s, 20e-9, 10e-6).unwrap()
}

/// Bunching of a thermal-plus-coherent field at delay τ, written out
/// directly from the amplitude correlation e^{−πγτ}.
fn excess(n_th: f64, n_coh: f64, gamma: f64, tau: f64) -> f64 {
    let a = (-PI * gamma * tau.abs()).exp();
    let n = n_th + n_coh;
    (n_th * n_th * a * a + 2.0 * n_th * n_coh * a) / (n * n)
}

/// Expected estimator output: the model averaged over each bin and divided
/// by its own average over the plateau bins.
fn expected_curve(c: &G2Curve, n_th: f64, n_coh: f64, gamma: f64) -> Vec<f64> {
    let w = c.tau[1] - c.tau[0];
    let avg = |t: f64| (0..40).map(|j| 1.0 + excess(n_th, n_coh, gamma, t + w * ((j as f64 + 0.5) / 40.0 - 0.5))).sum::<f64>() / 40.0;
    let raw: Vec<f64> = c.tau.iter().map(|&t| avg(t)).collect();
    let max_tau = *c.tau.last().unwrap() + 0.5 * w;
    let plateau: Vec<f64> = c
        .tau
        .iter()
        .zip(&raw)
        .filter(|(t, _)| t.abs() >= 0.75 * max_tau)
        .map(|(_, v)| *v)
        .collect();
    let p = plateau.iter().sum::<f64>() / plateau.len() as f64;
    raw.iter().map(|v| v / p).collect()
}

#[test]
fn thermal_light_is_bunched() {
    let c = cw_curve(&MechanicalState::thermal(0.9).unwrap(), 2.0, 1);
    let (g0, s0) = c.at_zero();
    assert!((g0 - 2.0).abs() < 0.05, "{g0} ± {s0}");
    assert!(!c.low_statistics);
    for (t, g) in c.tau.iter().zip(&c.g2) {
        if t.abs() >= 5e-6 {
            assert!((g - 1.0).abs() < 0.02, "τ={t:e}: {g}");
        }
    }
    // decay on the mechanical scale: 1/e of the excess at 1/(2πγ_m)
    let t_e = 1.0 / (2.0 * PI * 197e3);
    let k = c.tau.iter().position(|t| *t >= t_e).unwrap();
    let e = (c.g2[k] - 1.0) / (g0 - 1.0);
    assert!((e - (-1.0f64).exp()).abs() < 0.05, "{e}");
}

#[test]
fn coherent_light_is_flat() {
    let c = cw_curve(&MechanicalState::displaced(0.9, 400.0).unwrap(), 2.0, 2);
    for (t, g) in c.tau.iter().zip(&c.g2) {
        assert!((g - 1.0).abs() < 0.02, "τ={t:e}: {g}");
    }
}

#[test]
fn mixture_follows_model_pointwise() {
    let gamma = 197e3;
    let c = cw_curve(&MechanicalState::displaced(0.9, 0.9).unwrap(), 1.0, 3);
    let want = expected_curve(&c, 0.9, 0.9, gamma);
    let z: Vec<f64> = c.g2.iter().zip(&c.sigma).zip(&want).map(|((g, s), w)| (g - w) / s).collect();
    let within = z.iter().filter(|z| z.abs() < 2.0).count() as f64 / z.len() as f64;
    let worst = z.iter().fold(0.0f64, |m, z| m.max(z.abs()));
    assert!(within > 0.9, "{within}");
    assert!(worst < 5.0, "{worst}");
    let chi2 = z.iter().map(|z| z * z).sum::<f64>() / z.len() as f64;
    assert!((0.8..1.25).contains(&chi2), "{chi2}");
}

#[test]
fn intensity_autocorrelation_matches_model() {
    let device = DeviceParams::base_temp();
    let gamma = device.gamma_m();
    let dt = 1.0 / (50.0 * gamma);
    for (nt, nc, seed) in [(0.9, 0.0, 4), (0.9, 1.1, 5)] {
        let state = MechanicalState::displaced(nt, nc).unwrap();
        let a = amplitude_trace(&state, &device, dt, 4_000_000, seed).unwrap();
        let x: Vec<f64> = a.iter().map(|a| a.norm_sqr()).collect();
        let m = x.iter().sum::<f64>() / x.len() as f64;
        let lags = (5.0 / gamma / dt).round() as usize;
        let mut sq = 0.0;
        let mut count = 0.0;
        for l in (0..=lags).step_by(5) {
            let n = x.len() - l;
            let c = x[..n].iter().zip(&x[l..]).map(|(p, q)| p * q).sum::<f64>() / n as f64 / (m * m) - 1.0;
            sq += (c - excess(nt, nc, gamma, l as f64 * dt)).powi(2);
            count += 1.0;
        }
        let rms = (sq / count).sqrt();
        let scale = excess(nt, nc, gamma, 0.0);
        assert!(rms < 0.02 * scale, "n_coh={nc}: rms {rms} vs {scale}");
    }
}

#[test]
fn coarse_grid_is_an_error() {
    let device = DeviceParams::base_temp();
    let run = CwRun::new(1e-3, 1e9).unwrap().with_step(1e-6).unwrap();
    let s = MechanicalState::thermal(0.9).unwrap();
    assert!(simulate_cw(&run, &s, &device, &EfficiencyChain::paper_defaults(), 1).is_err());
}
