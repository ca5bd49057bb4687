//! On-disk caches for divisor tables (`tau_{limit}.bin`) and stratified
//! g-sample sets (`gsamples_{key}.bin`).
//!
//! A file that fails validation is reported, rebuilt and rewritten; a cache
//! directory that cannot be written only costs the reuse.

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use cotlab::gseries::{divisor_sieve, DivisorTable, GEvaluator};
use cotlab::moments::GSampleSet;
use sha2::{Digest, Sha256};

use crate::config::Settings;
use crate::CliError;

const SAMPLE_MAGIC: &[u8; 8] = b"CLGSMP01";

pub struct Cache {
    dir: PathBuf,
}

fn status(msg: impl AsRef<str>) {
    eprintln!("cotlab: {}", msg.as_ref());
}

fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = BufWriter::new(File::create(&tmp)?);
        f.write_all(bytes)?;
        f.flush()?;
    }
    fs::rename(tmp, path)
}

impl Cache {
    pub fn new(dir: &Path) -> Self {
        Self { dir: dir.to_path_buf() }
    }

    fn store(&self, path: &Path, bytes: &[u8]) {
        if let Err(e) = fs::create_dir_all(&self.dir).and_then(|_| write_atomic(path, bytes)) {
            status(format!("warning: cannot write cache file {}: {e}", path.display()));
        }
    }

    pub fn divisor_table_path(&self, limit: usize) -> PathBuf {
        self.dir.join(format!("tau_{limit}.bin"))
    }

    pub fn divisor_table(&self, limit: usize) -> Result<DivisorTable, CliError> {
        let path = self.divisor_table_path(limit);
        if path.exists() {
            let loaded = File::open(&path).and_then(|f| DivisorTable::read_from(BufReader::new(f)));
            match loaded {
                Ok(t) if t.limit() == limit => {
                    status(format!("cache hit: {}", path.display()));
                    return Ok(t);
                }
                Ok(_) => status(format!("warning: {} has the wrong size, rebuilding", path.display())),
                Err(e) => status(format!("warning: {} is corrupt ({e}), rebuilding", path.display())),
            }
        } else {
            status(format!("cache miss: {}", path.display()));
        }
        let table = divisor_sieve(limit)?;
        let mut bytes = Vec::with_capacity(4 * (limit + 1));
        table.write_to(&mut bytes)?;
        self.store(&path, &bytes);
        Ok(table)
    }

    pub fn sample_set_path(&self, key: &str) -> PathBuf {
        let digest = Sha256::digest(key.as_bytes());
        let hex: String = digest[..8].iter().map(|b| format!("{b:02x}")).collect();
        self.dir.join(format!("gsamples_{hex}.bin"))
    }

    /// The stratified sample set for `(seed, samples, N, M, method)` and the
    /// remaining estimator settings.
    pub fn sample_set(&self, s: &Settings, cfg: &GEvaluator) -> Result<GSampleSet, CliError> {
        let key = format!(
            "seed={};samples={};n={};m={};method={};tolerance={:e};fejer={}",
            s.seed,
            s.samples,
            s.n_terms,
            s.m_terms,
            s.method.name(),
            s.tolerance,
            s.fejer
        );
        let path = self.sample_set_path(&key);
        if path.exists() {
            match read_sample_set(&path, &key) {
                Ok(set) => {
                    status(format!("cache hit: {}", path.display()));
                    return Ok(set);
                }
                Err(e) => status(format!("warning: {} is corrupt ({e}), rebuilding", path.display())),
            }
        } else {
            status(format!("cache miss: {}", path.display()));
        }
        let set = GSampleSet::draw(s.samples, s.seed, cfg)?;
        self.store(&path, &encode_sample_set(&set, &key));
        Ok(set)
    }
}

fn encode_sample_set(set: &GSampleSet, key: &str) -> Vec<u8> {
    let mut b = Vec::with_capacity(16 * set.len() + 8 * set.offsets().len() + 128);
    b.extend_from_slice(SAMPLE_MAGIC);
    b.extend_from_slice(&(key.len() as u64).to_le_bytes());
    b.extend_from_slice(key.as_bytes());
    for x in [set.seed(), set.offsets().len() as u64, set.len() as u64, set.rejected() as u64, set.unresolved() as u64] {
        b.extend_from_slice(&x.to_le_bytes());
    }
    for &o in set.offsets() {
        b.extend_from_slice(&(o as u64).to_le_bytes());
    }
    for x in set.alphas().iter().chain(set.values()) {
        b.extend_from_slice(&x.to_le_bytes());
    }
    let digest = Sha256::digest(&b);
    b.extend_from_slice(&digest);
    b
}

fn invalid(msg: &str) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.to_owned())
}

fn read_sample_set(path: &Path, key: &str) -> io::Result<GSampleSet> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < SAMPLE_MAGIC.len() + 32 {
        return Err(invalid("truncated"));
    }
    let (body, digest) = bytes.split_at(bytes.len() - 32);
    if Sha256::digest(body).as_slice() != digest {
        return Err(invalid("checksum mismatch"));
    }
    let mut words = Words { bytes: body, pos: SAMPLE_MAGIC.len() };
    if &body[..SAMPLE_MAGIC.len()] != SAMPLE_MAGIC {
        return Err(invalid("bad magic"));
    }
    let key_len = words.u64()? as usize;
    if words.take(key_len)? != key.as_bytes() {
        return Err(invalid("key mismatch"));
    }
    let seed = words.u64()?;
    let n_offsets = words.u64()? as usize;
    let n = words.u64()? as usize;
    let rejected = words.u64()? as usize;
    let unresolved = words.u64()? as usize;
    let offsets = (0..n_offsets).map(|_| words.u64().map(|o| o as usize)).collect::<io::Result<Vec<_>>>()?;
    let alphas = (0..n).map(|_| words.f64()).collect::<io::Result<Vec<_>>>()?;
    let values = (0..n).map(|_| words.f64()).collect::<io::Result<Vec<_>>>()?;
    if words.pos != body.len() {
        return Err(invalid("trailing bytes"));
    }
    GSampleSet::from_parts(seed, offsets, alphas, values, rejected, unresolved).map_err(|e| invalid(&e.to_string()))
}

struct Words<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Words<'_> {
    fn take(&mut self, n: usize) -> io::Result<&[u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(|| invalid("truncated"))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u64(&mut self) -> io::Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("eight bytes")))
    }

    fn f64(&mut self) -> io::Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("eight bytes")))
    }
}
