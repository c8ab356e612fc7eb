use std::f64::consts::PI;

use num_complex::Complex64;
use omtrans::dynamics::{linescan, transient_response, uniform_grid, IdtEnvelope, PowerLaw};
use omtrans::dynamics::heated_state;
use omtrans::estimators::fit::{fit_sinusoid_weighted, fringe, lorentzian};
use omtrans::estimators::{
    coincidences, efficiency_budget, fit_lorentzian_weighted, fit_powerlaw, g2_tau_estimate, g2_zero_estimate,
    thermometry as invert_sidebands,
};
use omtrans::mc::aggregate::{interference_counts, scan_counts, thermometry_counts};
use omtrans::mc::pulsed::readout_state;
use omtrans::mc::seeds::sub_seed;
use omtrans::mc::{simulate_cw, simulate_pulsed, CwRun, PulseSequence};
use omtrans::photostats::{cooperativity, g2_tau_model, g2_zero, sideband_rates, visibility_model, RateMode};
use omtrans::{
    occupation, DetectionPath, EfficiencyChain, Error, FitResult, MechanicalState, Result, RunConfig, SidebandRates,
};

use crate::artifacts::{Artifacts, StreamFormat};

/// Lumped readout constant with the RF attenuation and detector
/// imperfections of `chain`.
fn correlation_chain(chain: &EfficiencyChain, readout: f64) -> Result<EfficiencyChain> {
    EfficiencyChain::new(1.0, 1.0, DetectionPath::Combined(1.0), readout, chain.rf_atten_db())?
        .with_dark_counts(chain.dark_count_rate())?
        .with_dead_time(chain.dead_time())
}

fn with_coherent(state: &MechanicalState, n_coh: f64) -> Result<MechanicalState> {
    state.with_beta(Complex64::new(n_coh.sqrt(), 0.0))
}

fn put_fit(art: &mut Artifacts, prefix: &str, fit: &FitResult) {
    for (i, name) in fit.names.iter().enumerate() {
        art.put_f(format!("{prefix}{name}"), fit.params[i]);
        art.put_f(format!("{prefix}{name}_sigma"), fit.sigmas[i]);
    }
    art.put(format!("{prefix}converged"), fit.converged);
}

fn require_converged(fit: &FitResult, what: &str) -> Result<()> {
    if fit.converged {
        Ok(())
    } else {
        Err(Error::FitFailure(format!("{what} fit did not converge")))
    }
}

pub(crate) fn thermometry(cfg: &RunConfig, art: &mut Artifacts) -> Result<()> {
    let seed = art.require_seed("thermometry")?;
    let pulses = cfg.thermometry.pulses;
    let (r, b) = thermometry_counts(&cfg.state, &cfg.chain, pulses, seed, 0)?;
    let rates = SidebandRates::from_counts(r, b, pulses as f64)?;
    let (n, sigma) = invert_sidebands(&rates)?;
    let model = sideband_rates(&cfg.state, &cfg.chain, RateMode::Pulsed);

    art.text("sidebands.csv", |w| {
        writeln!(w, "sideband,counts,pulses,rate_per_pulse,model_rate_per_pulse")?;
        writeln!(w, "red,{r},{pulses},{:e},{:e}", rates.gamma_r, model.gamma_r)?;
        writeln!(w, "blue,{b},{pulses},{:e},{:e}", rates.gamma_b, model.gamma_b)?;
        Ok(())
    })?;
    let ratio = rates.ratio();
    art.put("experiment", "thermometry");
    art.put("pulses_per_sideband", pulses);
    art.put("counts_red", r);
    art.put("counts_blue", b);
    art.put_f("n_th", n);
    art.put_f("n_th_sigma", sigma);
    art.put_f("n_input", occupation(&cfg.state));
    art.put_f("ratio_blue_red", ratio);
    art.put_f("ratio_blue_red_sigma", ratio * (1.0 / r as f64 + 1.0 / b as f64).sqrt());
    art.put_f("ratio_blue_red_model", model.ratio());
    Ok(())
}

pub(crate) fn linescan_run(cfg: &RunConfig, art: &mut Artifacts) -> Result<()> {
    let seed = art.require_seed("linescan")?;
    let l = &cfg.linescan;
    let device = &cfg.device;
    let drive = cfg.calibration.drive_rate(l.power_dbm, device.omega_m(), &cfg.chain, device);
    let freqs: Vec<f64> = (0..l.points)
        .map(|k| device.omega_m() - l.span_hz / 2.0 + l.span_hz * k as f64 / (l.points - 1) as f64)
        .collect();
    let envelope = l.idt_envelope.then(|| IdtEnvelope::from_device(device));
    let n_coh = linescan(drive, &freqs, device, envelope);
    let states = n_coh.iter().map(|&n| with_coherent(&cfg.state, n)).collect::<Result<Vec<_>>>()?;
    let counts = scan_counts(&states, &cfg.chain, l.pulses_per_point, seed)?;

    let x: Vec<f64> = freqs.iter().map(|f| f - device.omega_m()).collect();
    let y: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let s: Vec<f64> = y.iter().map(|c| c.max(1.0).sqrt()).collect();
    let fit = fit_lorentzian_weighted(&x, &y, &s)?;
    let p = &fit.params;

    art.text("linescan.csv", |w| {
        writeln!(w, "freq_hz,detuning_hz,n_coh_model,counts,fit")?;
        for k in 0..freqs.len() {
            let f = lorentzian(x[k], p[0], p[1], p[2], p[3]);
            writeln!(w, "{:e},{:e},{:e},{},{:e}", freqs[k], x[k], n_coh[k], counts[k], f)?;
        }
        Ok(())
    })?;
    art.put("experiment", "linescan");
    art.put("points", l.points);
    art.put("pulses_per_point", l.pulses_per_point);
    art.put_f("power_dbm", l.power_dbm);
    art.put_f("gamma_m_input_hz", device.gamma_m());
    art.put_f("peak_n_coh_model", n_coh.iter().cloned().fold(0.0, f64::max));
    put_fit(art, "fit_", &fit);
    art.put_f("center_hz", device.omega_m() + p[0]);
    art.put_f("fwhm_over_input", p[1] / device.gamma_m());
    require_converged(&fit, "Lorentzian")
}

pub(crate) fn transient(cfg: &RunConfig, art: &mut Artifacts) -> Result<()> {
    let t = &cfg.transient;
    let device = &cfg.device;
    let grid = uniform_grid(t.t_max, t.points);
    let mut traces = Vec::new();
    for &delta in &t.detunings_hz {
        let pulse = cfg
            .rf
            .with_power_dbm(t.power_dbm)?
            .with_freq(device.omega_m() + delta)?
            .with_duration(t.duration)?;
        let drive = cfg.calibration.pulse_drive_rate(&pulse, &cfg.chain, device);
        let resp = transient_response(drive, &pulse, device, &grid, Complex64::new(0.0, 0.0))?;
        let ss = omtrans::dynamics::steady_state_amplitude(drive, resp.detuning, device).norm_sqr();
        traces.push((delta, resp, ss));
    }
    art.text("transient.csv", |w| {
        writeln!(w, "detuning_hz,time_s,re_beta,im_beta,occupation")?;
        for (delta, r, _) in &traces {
            for (time, b) in r.times.iter().zip(&r.beta_t) {
                writeln!(w, "{:e},{:e},{:e},{:e},{:e}", delta, time, b.re, b.im, b.norm_sqr())?;
            }
        }
        Ok(())
    })?;
    art.put("experiment", "transient");
    art.put_f("pulse_duration_s", t.duration);
    art.put_f("intensity_decay_rate_per_s", 2.0 * PI * device.gamma_m());
    for (k, (delta, r, ss)) in traces.iter().enumerate() {
        let end = r
            .times
            .iter()
            .zip(r.occupations())
            .filter(|(time, _)| **time <= t.duration)
            .last()
            .map_or(0.0, |(_, n)| n);
        let peak = r.occupations().fold(0.0, f64::max);
        art.put_f(format!("detuning_{k}_hz"), *delta);
        art.put_f(format!("detuning_{k}_n_end"), end);
        art.put_f(format!("detuning_{k}_n_peak"), peak);
        art.put_f(format!("detuning_{k}_n_steady"), *ss);
    }
    Ok(())
}

pub(crate) fn g2_pulsed(cfg: &RunConfig, art: &mut Artifacts, format: StreamFormat) -> Result<()> {
    let seed = art.require_seed("g2-pulsed")?;
    let g = &cfg.g2_pulsed;
    let chain = correlation_chain(&cfg.chain, g.readout_constant)?;
    let device = &cfg.device;

    let powers: Vec<Option<f64>> = match &g.powers_dbm {
        Some(p) => p.iter().map(|&p| Some(p)).collect(),
        None => g
            .n_coh_ratios
            .iter()
            .map(|&r| {
                (r > 0.0).then(|| cfg.calibration.power_for_phonons(r * cfg.state.n_th(), cfg.rf.freq(), &chain))
            })
            .collect(),
    };

    struct Point {
        power: Option<f64>,
        state: MechanicalState,
        clicks: usize,
        g2: f64,
        sigma: f64,
        model: f64,
        hist: Vec<u64>,
    }
    let mut points = Vec::new();
    for (k, power) in powers.iter().enumerate() {
        let mut seq = match power {
            Some(p) => PulseSequence::with_rf(g.repetitions, cfg.rf.with_power_dbm(*p)?, cfg.readout),
            None => PulseSequence::readout_only(g.repetitions, cfg.readout),
        };
        seq.rep_period = g.rep_period;
        let state = readout_state(&seq, &cfg.state, &chain, device, &cfg.calibration)?;
        log::info!("g2-pulsed point {k}: n_coh = {:.4}", state.n_coh());
        let stream = simulate_pulsed(&seq, &cfg.state, &chain, device, &cfg.calibration, sub_seed(seed, k as u64))?;
        let hist = coincidences(&stream, g.max_delta_i)?;
        let (g2, sigma) = g2_zero_estimate(&hist)?;
        if g.save_streams {
            art.stream(&format!("stream_{k}"), &stream, format)?;
        }
        points.push(Point {
            power: *power,
            state,
            clicks: stream.clicks.len(),
            g2,
            sigma,
            model: g2_zero(&state)?,
            hist: hist.counts.clone(),
        });
    }

    art.text("g2_vs_power.csv", |w| {
        writeln!(w, "point,rf_power_dbm,n_coh,n_th,n_coh_over_n_th,clicks,g2,sigma,g2_model,z")?;
        for (k, p) in points.iter().enumerate() {
            let power = p.power.map(|p| format!("{p:.4}")).unwrap_or_else(|| "off".into());
            writeln!(
                w,
                "{k},{power},{:e},{:e},{:e},{},{:.6},{:.6},{:.6},{:.3}",
                p.state.n_coh(),
                p.state.n_th(),
                p.state.n_coh() / p.state.n_th(),
                p.clicks,
                p.g2,
                p.sigma,
                p.model,
                (p.g2 - p.model) / p.sigma
            )?;
        }
        Ok(())
    })?;
    let m = g.max_delta_i as i64;
    art.text("coincidences.csv", |w| {
        writeln!(w, "point,delta_i,counts")?;
        for (k, p) in points.iter().enumerate() {
            for (j, c) in p.hist.iter().enumerate() {
                writeln!(w, "{k},{},{c}", j as i64 - m)?;
            }
        }
        Ok(())
    })?;
    art.put("experiment", "g2-pulsed");
    art.put("repetitions", g.repetitions);
    art.put_f("readout_constant", g.readout_constant);
    art.put("points", points.len());
    let worst = points.iter().map(|p| ((p.g2 - p.model) / p.sigma).abs()).fold(0.0, f64::max);
    art.put_f("max_abs_z", worst);
    for (k, p) in points.iter().enumerate() {
        art.put_f(format!("point_{k}_n_coh"), p.state.n_coh());
        art.put_f(format!("point_{k}_g2"), p.g2);
        art.put_f(format!("point_{k}_sigma"), p.sigma);
        art.put_f(format!("point_{k}_g2_model"), p.model);
    }
    Ok(())
}

pub(crate) fn g2_cw(cfg: &RunConfig, art: &mut Artifacts, format: StreamFormat) -> Result<()> {
    let seed = art.require_seed("g2-cw")?;
    let c = &cfg.g2_cw;
    let device = &cfg.device;
    let eta = cfg.chain.eta_det();
    if eta <= 0.0 {
        return Err(Error::Config("g2-cw needs a nonzero detection efficiency".into()));
    }
    let mut curves = Vec::new();
    let mut warnings = Vec::new();
    for (k, &n_coh) in c.n_coh.iter().enumerate() {
        let state = with_coherent(&cfg.state, n_coh)?;
        let n = occupation(&state);
        if n <= 0.0 {
            return Err(Error::UndefinedStatistic("g2-cw rate"));
        }
        let run = CwRun {
            duration: c.duration,
            swap_rate: c.detected_rate / (eta * n),
            step: c.step,
        };
        log::info!("g2-cw curve {k}: n_coh = {n_coh}");
        let stream = simulate_cw(&run, &state, device, &cfg.chain, sub_seed(seed, k as u64))?;
        warnings.extend(stream.meta.warnings.iter().cloned());
        let curve = g2_tau_estimate(&stream, c.bin_width, c.max_tau)?;
        if c.save_streams {
            art.stream(&format!("stream_{k}"), &stream, format)?;
        }
        curves.push((n_coh, state, stream.clicks.len(), curve));
    }
    art.text("g2_tau.csv", |w| {
        writeln!(w, "curve,n_coh,tau_s,pairs,g2,sigma,g2_model")?;
        for (k, (n_coh, state, _, curve)) in curves.iter().enumerate() {
            for i in 0..curve.tau.len() {
                let model = g2_tau_model(state, device.gamma_m(), curve.tau[i]);
                writeln!(
                    w,
                    "{k},{n_coh:e},{:e},{},{:.6},{:.6},{:.6}",
                    curve.tau[i], curve.counts[i], curve.g2[i], curve.sigma[i], model
                )?;
            }
        }
        Ok(())
    })?;
    art.put("experiment", "g2-cw");
    art.put_f("duration_s", c.duration);
    art.put_f("detected_rate_hz", c.detected_rate);
    for (k, (n_coh, state, clicks, curve)) in curves.iter().enumerate() {
        let (g0, s0) = curve.at_zero();
        let far = curve
            .tau
            .iter()
            .zip(&curve.g2)
            .filter(|(t, _)| t.abs() * device.gamma_m() >= 1.0)
            .map(|(_, g)| (g - 1.0).abs())
            .fold(0.0, f64::max);
        let all = curve.g2.iter().map(|g| (g - 1.0).abs()).fold(0.0, f64::max);
        art.put_f(format!("curve_{k}_n_coh"), *n_coh);
        art.put(format!("curve_{k}_clicks"), clicks);
        art.put(format!("curve_{k}_pairs"), curve.pairs);
        art.put(format!("curve_{k}_low_statistics"), curve.low_statistics);
        art.put_f(format!("curve_{k}_g2_zero"), g0);
        art.put_f(format!("curve_{k}_g2_zero_sigma"), s0);
        art.put_f(format!("curve_{k}_g2_zero_model"), g2_zero(state)?);
        art.put_f(format!("curve_{k}_max_dev_beyond_lifetime"), far);
        art.put_f(format!("curve_{k}_max_dev"), all);
    }
    for w in warnings {
        art.put("warning", w);
    }
    Ok(())
}

pub(crate) fn interference(cfg: &RunConfig, art: &mut Artifacts) -> Result<()> {
    let seed = art.require_seed("interference")?;
    let i = &cfg.interference;
    let chain = correlation_chain(&cfg.chain, i.readout_constant)?;
    let phases: Vec<f64> = (0..i.phases).map(|k| 2.0 * PI * k as f64 / i.phases as f64).collect();
    let series = [
        ("mixture", with_coherent(&cfg.state, i.n_coh)?),
        ("coherent", MechanicalState::displaced(0.0, i.n_coh)?),
    ];
    let mut results = Vec::new();
    for (k, (name, state)) in series.iter().enumerate() {
        let counts = interference_counts(state, &chain, i.v_max, &phases, i.pulses_per_phase, sub_seed(seed, k as u64))?;
        let y: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
        let s: Vec<f64> = y.iter().map(|c| c.max(1.0).sqrt()).collect();
        let fit = fit_sinusoid_weighted(&phases, &y, Some(&s))?;
        let model = visibility_model(state.n_coh(), state.n_th(), i.v_max)?;
        results.push((*name, counts, fit, model));
    }
    art.text("fringes.csv", |w| {
        writeln!(w, "series,phase_rad,counts,fit")?;
        for (name, counts, fit, _) in &results {
            let p = &fit.params;
            for (phi, c) in phases.iter().zip(counts) {
                writeln!(w, "{name},{phi:.6},{c},{:e}", fringe(*phi, p[0], p[1], p[2]))?;
            }
        }
        Ok(())
    })?;
    art.put("experiment", "interference");
    art.put_f("v_max", i.v_max);
    art.put_f("n_coh", i.n_coh);
    art.put_f("n_th", cfg.state.n_th());
    for (name, _, fit, model) in &results {
        put_fit(art, &format!("{name}_"), fit);
        art.put_f(format!("{name}_visibility_model"), *model);
    }
    // measured value, kept for comparison only
    art.put_f("reference_visibility", i.reference_visibility);
    for (name, _, fit, _) in &results {
        require_converged(fit, name)?;
    }
    Ok(())
}

pub(crate) fn heating_sweep(cfg: &RunConfig, art: &mut Artifacts) -> Result<()> {
    let seed = art.require_seed("heating-sweep")?;
    let h = &cfg.heating;
    let law = PowerLaw::anchored(h.anchor_power, h.anchor_n_th, h.exponent)?;
    let mut rows = Vec::new();
    for (k, &p) in h.powers_w.iter().enumerate() {
        let state = heated_state(&cfg.state, p, &law)?;
        let (r, b) = thermometry_counts(&state, &cfg.chain, h.pulses_per_point, seed, k as u64)?;
        let (n, sigma) = invert_sidebands(&SidebandRates::from_counts(r, b, h.pulses_per_point as f64)?)?;
        rows.push((p, occupation(&state), r, b, n, sigma));
    }
    let powers: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let estimates: Vec<f64> = rows.iter().map(|r| r.4).collect();
    let fit = fit_powerlaw(&powers, &estimates)?;
    art.text("heating.csv", |w| {
        writeln!(w, "peak_power_w,n_model,counts_red,counts_blue,n_th,sigma")?;
        for (p, model, r, b, n, s) in &rows {
            writeln!(w, "{p:e},{model:e},{r},{b},{n:e},{s:e}")?;
        }
        Ok(())
    })?;
    art.put("experiment", "heating-sweep");
    art.put_f("exponent_input", h.exponent);
    art.put_f("prefactor_input", law.prefactor);
    art.put_f("anchor_power_w", h.anchor_power);
    art.put_f("anchor_n_th", h.anchor_n_th);
    put_fit(art, "fit_", &fit);
    Ok(())
}

pub(crate) fn budget(cfg: &RunConfig, art: &mut Artifacts) -> Result<()> {
    let chain = &cfg.chain;
    let report = efficiency_budget(chain, cfg.calibration.phonons_per_rf_photon, chain.p_r()).with_rf_pulse(&cfg.rf, chain, 1.0);
    let c = cooperativity(&cfg.device, cfg.budget.n_c)?;
    art.text("budget.csv", |w| report.write_csv(w))?;
    art.put("experiment", "budget");
    for item in &report.items {
        art.put_f(item.name, item.value);
        if let Some(gap) = item.gap() {
            art.put_f(format!("{}_quoted_over_value", item.name), gap);
            art.put(format!("{}_flagged", item.name), item.flagged());
        }
    }
    art.put_f("total", report.total);
    art.put_f("n_c", cfg.budget.n_c);
    art.put_f("cooperativity", c);
    art.put_f("cooperativity_quoted", cfg.budget.quoted_cooperativity);
    art.put_f("cooperativity_abs_diff", (c - cfg.budget.quoted_cooperativity).abs());
    art.put(
        "cooperativity_note",
        "computed from rounded g0, kappa, gamma_m; the quoted value is not reproduced exactly",
    );
    Ok(())
}
