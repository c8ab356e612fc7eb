use std::io::Write;

use crate::error::{Error, Result};
use crate::mc::stream::{Acquisition, ClickStream};
use crate::model::Detector;

/// Default half-width of the Δi window.
pub const DEFAULT_MAX_DELTA_I: usize = 10;

/// Cross-detector coincidences binned by pulse offset Δi.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoincidenceHistogram {
    /// −max..=max.
    pub delta_i: Vec<i64>,
    pub counts: Vec<u64>,
    pub n_pulses: u64,
}

impl CoincidenceHistogram {
    pub fn max_delta_i(&self) -> usize {
        self.delta_i.len() / 2
    }

    pub fn at(&self, delta_i: i64) -> Option<u64> {
        let m = self.max_delta_i() as i64;
        (-m..=m).contains(&delta_i).then(|| self.counts[(delta_i + m) as usize])
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "delta_i,counts")?;
        for (d, c) in self.delta_i.iter().zip(&self.counts) {
            writeln!(w, "{d},{c}")?;
        }
        Ok(())
    }
}

/// Per-pulse click counts (pulse_index, n_first, n_second), sorted.
fn per_pulse(stream: &ClickStream, first: Detector) -> Result<Vec<(u64, u64, u64)>> {
    let mut idx: Vec<(u64, bool)> = Vec::with_capacity(stream.clicks.len());
    for c in &stream.clicks {
        let p = c.pulse_index.ok_or(Error::WrongMode { expected: "pulsed" })?;
        idx.push((p, c.detector == first));
    }
    idx.sort_unstable();
    let mut out: Vec<(u64, u64, u64)> = Vec::new();
    for (p, is_first) in idx {
        match out.last_mut() {
            Some(last) if last.0 == p => {
                if is_first {
                    last.1 += 1
                } else {
                    last.2 += 1
                }
            }
            _ => out.push((p, is_first as u64, !is_first as u64)),
        }
    }
    Ok(out)
}

/// counts[Δi] = number of (`first` click in pulse i, other-detector click in
/// pulse i + Δi) pairs.
pub fn coincidences_between(stream: &ClickStream, first: Detector, max_delta_i: usize) -> Result<CoincidenceHistogram> {
    let n_pulses = match stream.meta.acquisition {
        Acquisition::Pulsed { n_pulses, .. } => n_pulses,
        Acquisition::Cw { .. } => return Err(Error::WrongMode { expected: "pulsed" }),
    };
    let m = max_delta_i as i64;
    let mut counts = vec![0u64; 2 * max_delta_i + 1];
    let pulses = per_pulse(stream, first)?;
    let mut lo = 0;
    for &(p, n_first, _) in &pulses {
        if n_first == 0 {
            continue;
        }
        while lo < pulses.len() && (pulses[lo].0 as i64) < p as i64 - m {
            lo += 1;
        }
        for &(q, _, n_second) in &pulses[lo..] {
            let d = q as i64 - p as i64;
            if d > m {
                break;
            }
            counts[(d + m) as usize] += n_first * n_second;
        }
    }
    Ok(CoincidenceHistogram {
        delta_i: (-m..=m).collect(),
        counts,
        n_pulses,
    })
}

/// Histogram of (D0 in pulse i, D1 in pulse i + Δi) pairs.
pub fn coincidences(stream: &ClickStream, max_delta_i: usize) -> Result<CoincidenceHistogram> {
    coincidences_between(stream, Detector::D0, max_delta_i)
}
