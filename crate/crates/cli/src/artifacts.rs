//! Output files of a run. Every text artifact opens with
//! `# config_hash=` and `# seed=` lines; nothing time-dependent is written.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use omtrans::{ClickStream, Error, Result};

/// Encoding of saved click streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StreamFormat {
    #[default]
    Csv,
    /// 17-byte records plus a `.meta` key=value sidecar.
    Binary,
}

pub struct Artifacts {
    dir: PathBuf,
    hash: String,
    seed: Option<u64>,
    files: Vec<PathBuf>,
    summary: Vec<(String, String)>,
}

impl Artifacts {
    pub fn create(dir: &Path, hash: String, seed: Option<u64>) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Artifacts {
            dir: dir.to_path_buf(),
            hash,
            seed,
            files: Vec::new(),
            summary: Vec::new(),
        })
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub(crate) fn require_seed(&self, what: &str) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::Config(format!("`{what}` is stochastic and needs a seed (--seed or `seed` in the config)")))
    }

    fn header(&self) -> String {
        let seed = self.seed.map_or_else(|| "none".to_string(), |s| s.to_string());
        format!("# config_hash={}\n# seed={seed}\n", self.hash)
    }

    fn open(&mut self, name: &str) -> Result<BufWriter<fs::File>> {
        let path = self.dir.join(name);
        let file = fs::File::create(&path)?;
        self.files.push(path);
        Ok(BufWriter::new(file))
    }

    /// Writes `name` with the standard header followed by `body`.
    pub fn text<F>(&mut self, name: &str, body: F) -> Result<()>
    where
        F: FnOnce(&mut dyn Write) -> Result<()>,
    {
        let header = self.header();
        let mut w = self.open(name)?;
        w.write_all(header.as_bytes())?;
        body(&mut w)?;
        w.flush()?;
        Ok(())
    }

    /// Saves a click stream; its metadata carries the run hash and seed.
    pub fn stream(&mut self, stem: &str, stream: &ClickStream, format: StreamFormat) -> Result<()> {
        let mut s = stream.clone();
        s.meta.config_hash = self.hash.clone();
        if let Some(seed) = self.seed {
            s.meta.seed = seed;
        }
        match format {
            StreamFormat::Csv => {
                let mut w = self.open(&format!("{stem}.csv"))?;
                s.write_csv(&mut w)?;
                w.flush()?;
            }
            StreamFormat::Binary => {
                let mut w = self.open(&format!("{stem}.bin"))?;
                s.write_binary(&mut w)?;
                w.flush()?;
                let mut m = self.open(&format!("{stem}.meta"))?;
                s.meta.write_kv(&mut m)?;
                m.flush()?;
            }
        }
        Ok(())
    }

    pub fn put(&mut self, key: impl Into<String>, value: impl ToString) {
        self.summary.push((key.into(), value.to_string()));
    }

    pub fn put_f(&mut self, key: impl Into<String>, value: f64) {
        self.put(key, format!("{value:.6e}"));
    }

    /// Writes `summary.txt` and returns every file written.
    pub fn finish(mut self) -> Result<Vec<PathBuf>> {
        let summary = std::mem::take(&mut self.summary);
        self.text("summary.txt", |w| {
            for (k, v) in &summary {
                writeln!(w, "{k}={v}")?;
            }
            Ok(())
        })?;
        Ok(self.files)
    }
}
