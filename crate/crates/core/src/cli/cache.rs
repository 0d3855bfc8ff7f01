//! On-disk cache of solver results, one JSON record per solve.
//!
//! Records are written to a temporary file in the cache directory and renamed
//! into place, so concurrent writers and killed runs never leave a partial
//! record behind. Unreadable or mismatching records count as misses.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tempfile::NamedTempFile;

use crate::error::Result;
use crate::limits::{solve, Solve, TimedSolve};
use crate::options::SolverOptions;
use crate::scalar::{precision_bits, Scalar};
use crate::target::TargetSpec;

/// Bumped whenever a solver change can alter stored numbers.
pub const SOLVER_VERSION: &str = concat!("bernstein-convex-", env!("CARGO_PKG_VERSION"), "-s2");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CacheRecord {
    pub key: String,
    pub target: String,
    pub n: usize,
    pub constrained: bool,
    pub precision_bits: u32,
    pub tol_rel: Scalar,
    pub grid_factor: usize,
    pub solver_version: String,
    pub value: Solve,
    pub wall_ms: u64,
    /// Seconds since the Unix epoch.
    pub created_at: u64,
}

/// Content hash identifying one solve.
pub fn cache_key(f: &TargetSpec, n: usize, constrained: bool, opts: &SolverOptions) -> String {
    let mut h = Sha256::new();
    for part in [
        f.kind().as_str().to_string(),
        f.exponent().to_hex(),
        f.half_width().to_hex(),
        f.scale().to_hex(),
        n.to_string(),
        u8::from(constrained).to_string(),
        precision_bits().to_string(),
        opts.tol_rel.to_hex(),
        opts.grid_factor.to_string(),
        SOLVER_VERSION.to_string(),
    ] {
        h.update(part.as_bytes());
        h.update([0u8]);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub struct Cache {
    dir: PathBuf,
    hits: AtomicUsize,
    misses: AtomicUsize,
}

impl Cache {
    pub fn open(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Cache {
            dir: dir.to_path_buf(),
            hits: AtomicUsize::new(0),
            misses: AtomicUsize::new(0),
        })
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn load(&self, key: &str) -> Option<CacheRecord> {
        let text = fs::read_to_string(self.path(key)).ok()?;
        let rec: CacheRecord = serde_json::from_str(&text).ok()?;
        (rec.key == key && rec.solver_version == SOLVER_VERSION).then_some(rec)
    }

    pub fn store(&self, rec: &CacheRecord) -> Result<()> {
        let mut tmp = NamedTempFile::new_in(&self.dir)?;
        serde_json::to_writer(&mut tmp, rec)?;
        tmp.write_all(b"\n")?;
        tmp.as_file().sync_all()?;
        tmp.persist(self.path(&rec.key)).map_err(|e| e.error)?;
        Ok(())
    }

    /// Cached result if present, otherwise solve and store a success.
    pub fn solve(&self, f: &TargetSpec, n: usize, constrained: bool, opts: &SolverOptions) -> TimedSolve {
        let key = cache_key(f, n, constrained, opts);
        if let Some(rec) = self.load(&key) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            eprintln!("cache hit: {f} n={n} constrained={}", u8::from(constrained));
            return TimedSolve {
                outcome: Ok(rec.value),
                wall_ms: rec.wall_ms,
            };
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let start = Instant::now();
        let outcome = solve(f, n, constrained, opts);
        let wall_ms = start.elapsed().as_millis() as u64;
        if let Ok(value) = &outcome {
            let rec = CacheRecord {
                key,
                target: f.key(),
                n,
                constrained,
                precision_bits: precision_bits(),
                tol_rel: opts.tol_rel.clone(),
                grid_factor: opts.grid_factor,
                solver_version: SOLVER_VERSION.to_string(),
                value: value.clone(),
                wall_ms,
                created_at: SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0),
            };
            if let Err(e) = self.store(&rec) {
                eprintln!("cache write failed: {e}");
            }
        }
        TimedSolve { outcome, wall_ms }
    }

    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> usize {
        self.misses.load(Ordering::Relaxed)
    }
}
