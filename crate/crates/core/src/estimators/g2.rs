use std::io::Write;

use crate::error::{check_positive, Error, Result};
use crate::estimators::coincidence::CoincidenceHistogram;
use crate::mc::stream::ClickStream;
use crate::model::Detector;

/// Pair count below which a g²(τ) curve is flagged.
pub const MIN_PAIRS: u64 = 1000;
/// Plateau bins are those with |τ| at or beyond this fraction of max_tau.
pub const PLATEAU_FRACTION: f64 = 0.75;

/// g² = c/B with B the mean of `baseline`; Poisson errors on both.
fn ratio_with_error(c: u64, baseline: &[u64]) -> Result<(f64, f64)> {
    if baseline.is_empty() {
        return Err(Error::UndefinedEstimate("no baseline bins".into()));
    }
    let m = baseline.len() as f64;
    let sum: u64 = baseline.iter().sum();
    if sum == 0 {
        return Err(Error::UndefinedEstimate("zero baseline".into()));
    }
    let b = sum as f64 / m;
    let c = c as f64;
    let var_b = sum as f64 / (m * m);
    let var = c.max(1.0) / (b * b) + c * c * var_b / b.powi(4);
    Ok((c / b, var.sqrt()))
}

/// counts[0] over the mean of the Δi ≠ 0 bins, with 1σ counting error.
pub fn g2_zero_estimate(hist: &CoincidenceHistogram) -> Result<(f64, f64)> {
    let m = hist.max_delta_i();
    let baseline: Vec<u64> = hist
        .counts
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != m)
        .map(|(_, &c)| c)
        .collect();
    ratio_with_error(hist.counts[m], &baseline)
}

#[derive(Debug, Clone, PartialEq)]
pub struct G2Curve {
    /// Bin centres, s; τ is the D1 time minus the D0 time.
    pub tau: Vec<f64>,
    pub counts: Vec<u64>,
    pub g2: Vec<f64>,
    pub sigma: Vec<f64>,
    pub plateau: f64,
    pub pairs: u64,
    pub low_statistics: bool,
}

impl G2Curve {
    pub fn at_zero(&self) -> (f64, f64) {
        let k = self.tau.len() / 2;
        (self.g2[k], self.sigma[k])
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "tau_s,pairs,g2,sigma")?;
        for i in 0..self.tau.len() {
            writeln!(w, "{:e},{},{:.6},{:.6}", self.tau[i], self.counts[i], self.g2[i], self.sigma[i])?;
        }
        Ok(())
    }
}

/// Binned D0–D1 cross-correlation of a CW stream, normalised by its
/// plateau at |τ| ≥ 0.75·max_tau.
pub fn g2_tau_estimate(stream: &ClickStream, bin_width: f64, max_tau: f64) -> Result<G2Curve> {
    if stream.is_pulsed() {
        return Err(Error::WrongMode { expected: "CW" });
    }
    check_positive("bin_width", bin_width)?;
    check_positive("max_tau", max_tau)?;
    let half = (max_tau / bin_width).floor() as i64;
    if half < 1 {
        return Err(Error::invalid("max_tau", "must cover at least one bin either side"));
    }
    let nb = (2 * half + 1) as usize;
    let w_ns = bin_width * 1e9;
    let reach = ((half as f64 + 0.5) * w_ns).floor() as i64;

    let mut t0: Vec<i64> = Vec::new();
    let mut t1: Vec<i64> = Vec::new();
    for c in &stream.clicks {
        match c.detector {
            Detector::D0 => t0.push(c.timestamp_ns as i64),
            Detector::D1 => t1.push(c.timestamp_ns as i64),
        }
    }
    t0.sort_unstable();
    t1.sort_unstable();

    let mut counts = vec![0u64; nb];
    let mut lo = 0usize;
    for &a in &t0 {
        while lo < t1.len() && t1[lo] < a - reach {
            lo += 1;
        }
        for &b in &t1[lo..] {
            let d = b - a;
            if d > reach {
                break;
            }
            let k = ((d as f64 / w_ns) + 0.5).floor() as i64 + half;
            if (0..nb as i64).contains(&k) {
                counts[k as usize] += 1;
            }
        }
    }

    let tau: Vec<f64> = (-half..=half).map(|k| k as f64 * bin_width).collect();
    let plateau_bins: Vec<u64> = tau
        .iter()
        .zip(&counts)
        .filter(|(t, _)| t.abs() >= PLATEAU_FRACTION * max_tau)
        .map(|(_, &c)| c)
        .collect();
    let pairs: u64 = counts.iter().sum();
    if plateau_bins.iter().sum::<u64>() == 0 {
        return Err(Error::UndefinedEstimate("empty correlation plateau".into()));
    }
    let plateau = plateau_bins.iter().sum::<u64>() as f64 / plateau_bins.len() as f64;
    let (g2, sigma): (Vec<f64>, Vec<f64>) = counts
        .iter()
        .map(|&c| ratio_with_error(c, &plateau_bins).expect("nonzero plateau"))
        .unzip();
    let low_statistics = pairs < MIN_PAIRS;
    if low_statistics {
        log::warn!("only {pairs} click pairs within ±max_tau; g²(τ) is statistically unreliable");
    }
    Ok(G2Curve {
        tau,
        counts,
        g2,
        sigma,
        plateau,
        pairs,
        low_statistics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::stream::{Acquisition, StreamMeta};
    use crate::model::ClickRecord;

    #[test]
    fn ratio_example() {
        // two baseline bins each side at 100
        let h = CoincidenceHistogram {
            delta_i: vec![-2, -1, 0, 1, 2],
            counts: vec![100, 100, 200, 100, 100],
            n_pulses: 1_000_000,
        };
        let (v, s) = g2_zero_estimate(&h).unwrap();
        assert_eq!(v, 2.0);
        // √(200/100² + 200²·(400/16)/100⁴)
        assert!((s - 0.17320508).abs() < 1e-6, "{s}");
    }

    #[test]
    fn zero_baseline_is_undefined() {
        let h = CoincidenceHistogram {
            delta_i: vec![-1, 0, 1],
            counts: vec![0, 5, 0],
            n_pulses: 10,
        };
        assert!(matches!(g2_zero_estimate(&h), Err(Error::UndefinedEstimate(_))));
    }

    fn cw(clicks: Vec<ClickRecord>) -> ClickStream {
        ClickStream {
            clicks,
            meta: StreamMeta {
                config_hash: String::new(),
                seed: 0,
                acquisition: Acquisition::Cw { duration: 1.0 },
                warnings: vec![],
            },
        }
    }

    #[test]
    fn binning_and_low_statistics_flag() {
        let mk = |d, t| ClickRecord {
            detector: d,
            pulse_index: None,
            timestamp_ns: t,
        };
        // D1 clicks at offsets −40, 0, +12, +40 ns from a single D0 click
        let s = cw(vec![
            mk(Detector::D1, 960),
            mk(Detector::D0, 1000),
            mk(Detector::D1, 1000),
            mk(Detector::D1, 1012),
            mk(Detector::D1, 1040),
        ]);
        let c = g2_tau_estimate(&s, 20e-9, 40e-9).unwrap();
        assert_eq!(c.counts, vec![1, 0, 1, 1, 1]);
        assert!(c.low_statistics);
        assert_eq!(c.plateau, 1.0);
        assert!((c.tau[0] + 40e-9).abs() < 1e-18);
    }

    #[test]
    fn pulsed_stream_rejected() {
        let mut s = cw(vec![]);
        s.meta.acquisition = Acquisition::Pulsed {
            n_pulses: 1,
            rep_period: 1.0,
        };
        assert!(matches!(g2_tau_estimate(&s, 1e-8, 1e-6), Err(Error::WrongMode { .. })));
    }
}
