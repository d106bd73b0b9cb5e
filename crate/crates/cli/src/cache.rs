//! Append-only JSONL cache of solves keyed by `(w, precision, N)`.
//!
//! Readers take a shared lock, writers an exclusive one, so concurrent workers and
//! processes never observe a torn line.

use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use fuchsian_core::BigComplex;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CacheRecord {
    /// `w` in hex, so keys compare exactly.
    pub w: [String; 2],
    pub precision_bits: u32,
    pub n: usize,
    #[serde(rename = "rho_F")]
    pub rho_f: [String; 2],
    /// Full `solve` output; absent for sample-only records.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<serde_json::Value>,
}

impl CacheRecord {
    pub fn key_matches(&self, w: &BigComplex, prec: u32, n: usize) -> bool {
        self.precision_bits == prec && self.n == n && self.w == w.to_strings(true)
    }
}

#[derive(Clone, Debug)]
pub struct Cache {
    path: PathBuf,
}

impl Cache {
    pub fn new(path: impl AsRef<Path>) -> Self {
        Cache { path: path.as_ref().to_path_buf() }
    }

    /// Latest record for the key; with `need_output` only records carrying a full result count.
    pub fn lookup(&self, w: &BigComplex, prec: u32, n: usize, need_output: bool) -> io::Result<Option<CacheRecord>> {
        let file = match File::open(&self.path) {
            Ok(f) => f,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e),
        };
        file.lock_shared()?;
        let mut found = None;
        for line in BufReader::new(&file).lines() {
            let line = line?;
            // a malformed line is skipped rather than poisoning the whole cache
            let Ok(rec) = serde_json::from_str::<CacheRecord>(&line) else { continue };
            if rec.key_matches(w, prec, n) && (!need_output || rec.output.is_some()) {
                found = Some(rec);
            }
        }
        file.unlock()?;
        Ok(found)
    }

    pub fn append(&self, rec: &CacheRecord) -> io::Result<()> {
        let mut file = OpenOptions::new().create(true).append(true).open(&self.path)?;
        file.lock()?;
        let mut line = serde_json::to_string(rec).map_err(io::Error::other)?;
        line.push('\n');
        let r = file.write_all(line.as_bytes()).and_then(|()| file.flush());
        file.unlock()?;
        r
    }
}
