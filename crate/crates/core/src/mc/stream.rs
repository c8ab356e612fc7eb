//! Click streams and their on-disk formats.
//!
//! CSV: `#`-prefixed `key=value` metadata lines, then a
//! `detector,pulse_index,timestamp_ns` header; CW records leave
//! `pulse_index` empty.
//!
//! Binary: back-to-back 17-byte little-endian records
//! (`u8` detector, `u64` pulse_index, `u64` timestamp_ns) with
//! `u64::MAX` as the absent pulse index; metadata goes to a sidecar
//! `key=value` text file.

use std::collections::BTreeMap;
use std::io::{BufRead, Read, Write};

use crate::error::{Error, Result};
use crate::model::{ClickRecord, Detector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Acquisition {
    Pulsed { n_pulses: u64, rep_period: f64 },
    Cw { duration: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct StreamMeta {
    pub config_hash: String,
    pub seed: u64,
    pub acquisition: Acquisition,
    pub warnings: Vec<String>,
}

impl StreamMeta {
    fn to_pairs(&self) -> Vec<(String, String)> {
        let mut v = vec![
            ("config_hash".to_string(), self.config_hash.clone()),
            ("seed".to_string(), self.seed.to_string()),
        ];
        match self.acquisition {
            Acquisition::Pulsed { n_pulses, rep_period } => {
                v.push(("mode".into(), "pulsed".into()));
                v.push(("n_pulses".into(), n_pulses.to_string()));
                v.push(("rep_period_s".into(), format!("{rep_period:e}")));
            }
            Acquisition::Cw { duration } => {
                v.push(("mode".into(), "cw".into()));
                v.push(("duration_s".into(), format!("{duration:e}")));
            }
        }
        for w in &self.warnings {
            v.push(("warning".into(), w.replace('\n', " ")));
        }
        v
    }

    fn from_pairs(pairs: &[(String, String)]) -> Result<Self> {
        let mut map = BTreeMap::new();
        let mut warnings = Vec::new();
        for (k, v) in pairs {
            if k == "warning" {
                warnings.push(v.clone());
            } else {
                map.insert(k.as_str(), v.as_str());
            }
        }
        let get = |k: &str| map.get(k).copied().ok_or_else(|| Error::Format(format!("missing metadata `{k}`")));
        let num = |k: &str| -> Result<f64> { get(k)?.parse().map_err(|_| Error::Format(format!("bad `{k}`"))) };
        let int = |k: &str| -> Result<u64> { get(k)?.parse().map_err(|_| Error::Format(format!("bad `{k}`"))) };
        let acquisition = match get("mode")? {
            "pulsed" => Acquisition::Pulsed {
                n_pulses: int("n_pulses")?,
                rep_period: num("rep_period_s")?,
            },
            "cw" => Acquisition::Cw {
                duration: num("duration_s")?,
            },
            other => return Err(Error::Format(format!("unknown mode `{other}`"))),
        };
        Ok(StreamMeta {
            config_hash: get("config_hash")?.to_string(),
            seed: int("seed")?,
            acquisition,
            warnings,
        })
    }

    pub fn write_kv<W: Write>(&self, mut w: W) -> Result<()> {
        for (k, v) in self.to_pairs() {
            writeln!(w, "{k}={v}")?;
        }
        Ok(())
    }

    pub fn read_kv<R: BufRead>(r: R) -> Result<Self> {
        let mut pairs = Vec::new();
        for line in r.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            pairs.push(split_kv(line)?);
        }
        Self::from_pairs(&pairs)
    }
}

fn split_kv(line: &str) -> Result<(String, String)> {
    line.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| Error::Format(format!("expected key=value, got `{line}`")))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClickStream {
    pub clicks: Vec<ClickRecord>,
    pub meta: StreamMeta,
}

const BINARY_RECORD: usize = 17;

impl ClickStream {
    pub fn is_pulsed(&self) -> bool {
        matches!(self.meta.acquisition, Acquisition::Pulsed { .. })
    }

    pub fn count(&self, detector: Detector) -> usize {
        self.clicks.iter().filter(|c| c.detector == detector).count()
    }

    /// Click times of one detector in seconds, in stream order.
    pub fn times(&self, detector: Detector) -> Vec<f64> {
        self.clicks
            .iter()
            .filter(|c| c.detector == detector)
            .map(ClickRecord::timestamp)
            .collect()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for (k, v) in self.meta.to_pairs() {
            writeln!(w, "# {k}={v}")?;
        }
        writeln!(w, "detector,pulse_index,timestamp_ns")?;
        for c in &self.clicks {
            match c.pulse_index {
                Some(i) => writeln!(w, "{},{},{}", c.detector.index(), i, c.timestamp_ns)?,
                None => writeln!(w, "{},,{}", c.detector.index(), c.timestamp_ns)?,
            }
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut pairs = Vec::new();
        let mut clicks = Vec::new();
        let mut header_seen = false;
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                pairs.push(split_kv(rest.trim())?);
                continue;
            }
            if !header_seen {
                if line != "detector,pulse_index,timestamp_ns" {
                    return Err(Error::Format(format!("unexpected header `{line}`")));
                }
                header_seen = true;
                continue;
            }
            let bad = || Error::Format(format!("line {}: `{line}`", lineno + 1));
            let mut fields = line.split(',');
            let (d, p, t) = match (fields.next(), fields.next(), fields.next(), fields.next()) {
                (Some(d), Some(p), Some(t), None) => (d, p, t),
                _ => return Err(bad()),
            };
            let detector = d.parse().ok().and_then(Detector::from_index).ok_or_else(bad)?;
            let pulse_index = if p.is_empty() {
                None
            } else {
                Some(p.parse().map_err(|_| bad())?)
            };
            let timestamp_ns = t.parse().map_err(|_| bad())?;
            clicks.push(ClickRecord {
                detector,
                pulse_index,
                timestamp_ns,
            });
        }
        Ok(ClickStream {
            clicks,
            meta: StreamMeta::from_pairs(&pairs)?,
        })
    }

    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        let mut buf = [0u8; BINARY_RECORD];
        for c in &self.clicks {
            buf[0] = c.detector.index();
            buf[1..9].copy_from_slice(&c.pulse_index.unwrap_or(u64::MAX).to_le_bytes());
            buf[9..17].copy_from_slice(&c.timestamp_ns.to_le_bytes());
            w.write_all(&buf)?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R, meta: StreamMeta) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        if bytes.len() % BINARY_RECORD != 0 {
            return Err(Error::Format(format!(
                "binary stream length {} is not a multiple of {BINARY_RECORD}",
                bytes.len()
            )));
        }
        let clicks = bytes
            .chunks_exact(BINARY_RECORD)
            .map(|rec| {
                let detector = Detector::from_index(rec[0])
                    .ok_or_else(|| Error::Format(format!("bad detector byte {}", rec[0])))?;
                let p = u64::from_le_bytes(rec[1..9].try_into().expect("8 bytes"));
                let t = u64::from_le_bytes(rec[9..17].try_into().expect("8 bytes"));
                Ok(ClickRecord {
                    detector,
                    pulse_index: (p != u64::MAX).then_some(p),
                    timestamp_ns: t,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ClickStream { clicks, meta })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn meta(acq: Acquisition) -> StreamMeta {
        StreamMeta {
            config_hash: "abc123".into(),
            seed: 42,
            acquisition: acq,
            warnings: vec!["short run".into()],
        }
    }

    fn record() -> impl Strategy<Value = ClickRecord> {
        (any::<bool>(), proptest::option::of(0u64..u64::MAX), any::<u64>()).prop_map(|(d, p, t)| ClickRecord {
            detector: if d { Detector::D1 } else { Detector::D0 },
            pulse_index: p,
            timestamp_ns: t,
        })
    }

    proptest! {
        #[test]
        fn csv_and_binary_roundtrip(clicks in proptest::collection::vec(record(), 0..50)) {
            let s = ClickStream { clicks, meta: meta(Acquisition::Pulsed { n_pulses: 10, rep_period: 5e-5 }) };
            let mut csv = Vec::new();
            s.write_csv(&mut csv).unwrap();
            prop_assert_eq!(&ClickStream::read_csv(&csv[..]).unwrap(), &s);
            let mut bin = Vec::new();
            s.write_binary(&mut bin).unwrap();
            prop_assert_eq!(bin.len(), 17 * s.clicks.len());
            prop_assert_eq!(&ClickStream::read_binary(&bin[..], s.meta.clone()).unwrap(), &s);
        }
    }

    #[test]
    fn binary_layout_is_little_endian() {
        let s = ClickStream {
            clicks: vec![ClickRecord {
                detector: Detector::D1,
                pulse_index: Some(0x0102),
                timestamp_ns: 0x0a0b,
            }],
            meta: meta(Acquisition::Cw { duration: 1.0 }),
        };
        let mut bin = Vec::new();
        s.write_binary(&mut bin).unwrap();
        assert_eq!(bin, [1, 2, 1, 0, 0, 0, 0, 0, 0, 0x0b, 0x0a, 0, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn meta_sidecar_roundtrip() {
        let m = meta(Acquisition::Cw { duration: 0.25 });
        let mut buf = Vec::new();
        m.write_kv(&mut buf).unwrap();
        assert_eq!(StreamMeta::read_kv(&buf[..]).unwrap(), m);
    }

    #[test]
    fn malformed_inputs_rejected() {
        assert!(ClickStream::read_binary(&[0u8; 5][..], meta(Acquisition::Cw { duration: 1.0 })).is_err());
        let csv = "# config_hash=x\n# seed=1\n# mode=cw\n# duration_s=1\ndetector,pulse_index,timestamp_ns\n3,,5\n";
        assert!(ClickStream::read_csv(csv.as_bytes()).is_err());
        let csv = "# config_hash=x\n# seed=1\ndetector,pulse_index,timestamp_ns\n";
        assert!(ClickStream::read_csv(csv.as_bytes()).is_err());
    }
}
