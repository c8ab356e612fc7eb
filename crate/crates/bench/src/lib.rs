//! Criterion benchmarks for the simulation and estimation kernels.

use std::hint::black_box;

use criterion::{Criterion, Throughput};
use omtrans::estimators::fit::lorentzian;
use omtrans::estimators::{coincidences, fit_lorentzian, g2_tau_estimate};
use omtrans::mc::sampler::{sample_amplitude, sample_poisson};
use omtrans::mc::seeds::{stream_rng, Purpose};
use omtrans::mc::{simulate_cw, simulate_pulsed, CwRun, PulseSequence};
use omtrans::photostats::photon_number_pmf;
use omtrans::{ClickStream, DeviceParams, DriveCalibration, EfficiencyChain, MechanicalState, OpticalPulse, Sideband};

fn mixture() -> MechanicalState {
    MechanicalState::displaced(0.9, 1.1).unwrap()
}

/// Pulsed click stream with a few thousand clicks per 1e6 pulses.
pub fn pulsed_stream(reps: u64, seed: u64) -> ClickStream {
    let seq = PulseSequence::readout_only(reps, OpticalPulse::paper_defaults(Sideband::Red));
    simulate_pulsed(
        &seq,
        &mixture(),
        &EfficiencyChain::lumped(0.05).unwrap(),
        &DeviceParams::base_temp(),
        &DriveCalibration::default(),
        seed,
    )
    .unwrap()
}

pub fn cw_stream(duration: f64, seed: u64) -> ClickStream {
    let chain = EfficiencyChain::paper_defaults();
    let run = CwRun {
        duration,
        swap_rate: 4e6 / (chain.eta_det() * 2.0),
        step: None,
    };
    simulate_cw(&run, &mixture(), &DeviceParams::base_temp(), &chain, seed).unwrap()
}

fn samplers(c: &mut Criterion) {
    let state = mixture();
    let mut g = c.benchmark_group("sampler");
    g.throughput(Throughput::Elements(1));
    let mut rng = stream_rng(1, Purpose::Noise, 0);
    g.bench_function("amplitude", |b| b.iter(|| black_box(sample_amplitude(&state, &mut rng))));
    g.bench_function("amplitude_and_count", |b| {
        b.iter(|| {
            let a = sample_amplitude(&state, &mut rng);
            black_box(sample_poisson(0.05 * a.norm_sqr(), &mut rng))
        })
    });
    g.finish();
    c.bench_function("photon_number_pmf/80", |b| b.iter(|| photon_number_pmf(black_box(&state), 80)));
}

fn simulation(c: &mut Criterion) {
    let mut g = c.benchmark_group("simulate");
    g.sample_size(10);
    g.throughput(Throughput::Elements(100_000));
    g.bench_function("pulsed/1e5", |b| b.iter(|| pulsed_stream(100_000, black_box(3))));
    g.throughput(Throughput::Elements(1));
    g.bench_function("cw/1ms", |b| b.iter(|| cw_stream(1e-3, black_box(3))));
    g.finish();
}

fn estimators(c: &mut Criterion) {
    let pulsed = pulsed_stream(1_000_000, 5);
    c.bench_function("coincidences/1e6 pulses", |b| b.iter(|| coincidences(black_box(&pulsed), 10).unwrap()));
    let cw = cw_stream(10e-3, 5);
    c.bench_function("g2_tau/10ms", |b| b.iter(|| g2_tau_estimate(black_box(&cw), 20e-9, 10e-6).unwrap()));

    let x: Vec<f64> = (0..81).map(|i| -1e6 + 25e3 * i as f64).collect();
    let y: Vec<f64> = x.iter().map(|&x| lorentzian(x, 1e3, 197e3, 1e4, 1.6e3)).collect();
    c.bench_function("fit_lorentzian/81", |b| b.iter(|| fit_lorentzian(black_box(&x), black_box(&y)).unwrap()));
}

pub fn benchmarks(c: &mut Criterion) {
    samplers(c);
    simulation(c);
    estimators(c);
}
