//! Re-analysis of saved click streams.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use omtrans::estimators::{coincidences, g2_tau_estimate, g2_zero_estimate, DEFAULT_MAX_DELTA_I};
use omtrans::mc::StreamMeta;
use omtrans::{ClickStream, Detector, Error, Result};

use crate::artifacts::Artifacts;

#[derive(Debug, Clone)]
pub struct AnalyzeOptions {
    pub max_delta_i: usize,
    pub bin_width: f64,
    pub max_tau: f64,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            max_delta_i: DEFAULT_MAX_DELTA_I,
            bin_width: 20e-9,
            max_tau: 10e-6,
        }
    }
}

/// Reads a `.csv` stream, or a `.bin` stream with its `.meta` sidecar.
pub fn read_stream(path: &Path) -> Result<ClickStream> {
    let open = |p: &Path| File::open(p).map_err(|e| Error::Config(format!("cannot open {}: {e}", p.display())));
    match path.extension().and_then(|e| e.to_str()) {
        Some("bin") => {
            let meta_path = path.with_extension("meta");
            let meta = StreamMeta::read_kv(BufReader::new(open(&meta_path)?))?;
            ClickStream::read_binary(BufReader::new(open(path)?), meta)
        }
        _ => ClickStream::read_csv(BufReader::new(open(path)?)),
    }
}

/// Writes the correlation analysis of `stream` into `out`: the
/// coincidence histogram and g²(0) for pulsed streams, g²(τ) for CW.
pub fn analyze(stream: &ClickStream, opts: &AnalyzeOptions, out: &Path) -> Result<Vec<PathBuf>> {
    let mut art = Artifacts::create(out, stream.meta.config_hash.clone(), Some(stream.meta.seed))?;
    art.put("clicks_d0", stream.count(Detector::D0));
    art.put("clicks_d1", stream.count(Detector::D1));
    if stream.is_pulsed() {
        let hist = coincidences(stream, opts.max_delta_i)?;
        art.text("coincidences.csv", |w| hist.write_csv(w))?;
        art.put("mode", "pulsed");
        art.put("zero_delay_pairs", hist.at(0).unwrap_or(0));
        match g2_zero_estimate(&hist) {
            Ok((g, s)) => {
                art.put_f("g2_zero", g);
                art.put_f("g2_zero_sigma", s);
            }
            Err(e) => art.put("g2_zero", format!("undefined ({e})")),
        }
    } else {
        let curve = g2_tau_estimate(stream, opts.bin_width, opts.max_tau)?;
        art.text("g2_tau.csv", |w| curve.write_csv(w))?;
        let (g, s) = curve.at_zero();
        art.put("mode", "cw");
        art.put("pairs", curve.pairs);
        art.put("low_statistics", curve.low_statistics);
        art.put_f("plateau_pairs_per_bin", curve.plateau);
        art.put_f("g2_zero", g);
        art.put_f("g2_zero_sigma", s);
    }
    for w in &stream.meta.warnings {
        art.put("warning", w);
    }
    let files = art.finish()?;
    Ok(files)
}

