//! Binary dictionary cache.
//!
//! Layout, all little-endian:
//!
//! ```text
//! magic "VRPD" | u32 version
//! key: u64 N | f64 d | f64 f_c | f64 beta | u64 rings | f64 theta_min | f64 theta_max | u64 atom_limit (0 = none)
//! u64 S
//! S x (f64 angle, f64 distance)          distance = +inf for plane-wave atoms
//! N*S x (f64 re, f64 im)                 row-major atom matrix
//! 32-byte SHA-256 of everything above
//! ```

use std::path::Path;

use log::warn;
use sha2::{Digest, Sha256};

use super::{build_dictionary, AtomParams, PolarDictionary};
use crate::harness::ScenarioConfig;
use crate::{CMatrix, Error, Result, C64};

const MAGIC: &[u8; 4] = b"VRPD";
const VERSION: u32 = 1;
const DIGEST_LEN: usize = 32;

/// Everything the dictionary depends on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DictionaryKey {
    pub n_antennas: usize,
    pub spacing: f64,
    pub carrier_frequency: f64,
    pub beta: f64,
    pub rings: usize,
    pub theta_min: f64,
    pub theta_max: f64,
    pub atom_limit: Option<usize>,
}

impl DictionaryKey {
    pub fn from_config(cfg: &ScenarioConfig) -> Self {
        Self {
            n_antennas: cfg.n_antennas,
            spacing: cfg.antenna_spacing,
            carrier_frequency: cfg.carrier_frequency,
            beta: cfg.dictionary_beta,
            rings: cfg.dictionary_rings,
            theta_min: cfg.angle_min,
            theta_max: cfg.angle_max,
            atom_limit: (cfg.dictionary_atoms > 0).then_some(cfg.dictionary_atoms),
        }
    }

    pub fn build(&self) -> Result<PolarDictionary> {
        let geom = crate::channel::ArrayGeometry::new(self.n_antennas, self.spacing)?;
        let k_c = 2.0 * std::f64::consts::PI * self.carrier_frequency / crate::SPEED_OF_LIGHT;
        build_dictionary(
            &geom,
            k_c,
            (self.theta_min, self.theta_max),
            self.beta,
            self.rings,
            self.atom_limit,
        )
    }

    fn encode(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&(self.n_antennas as u64).to_le_bytes());
        out.extend_from_slice(&self.spacing.to_le_bytes());
        out.extend_from_slice(&self.carrier_frequency.to_le_bytes());
        out.extend_from_slice(&self.beta.to_le_bytes());
        out.extend_from_slice(&(self.rings as u64).to_le_bytes());
        out.extend_from_slice(&self.theta_min.to_le_bytes());
        out.extend_from_slice(&self.theta_max.to_le_bytes());
        out.extend_from_slice(&(self.atom_limit.unwrap_or(0) as u64).to_le_bytes());
    }
}

/// What [`load_or_build`] did.
#[derive(Debug, Clone, PartialEq)]
pub enum CacheStatus {
    /// The cache matched the key and was loaded.
    Hit,
    /// No cache existed (or rebuilding was forced); a fresh one was written.
    Built,
    /// The cache was unreadable or for another key; it was replaced.
    Rebuilt(String),
}

fn encode(key: &DictionaryKey, dict: &PolarDictionary) -> Vec<u8> {
    let (n, s) = dict.atoms().shape();
    let mut out = Vec::with_capacity(64 + 16 * s + 16 * n * s + DIGEST_LEN);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    key.encode(&mut out);
    out.extend_from_slice(&(s as u64).to_le_bytes());
    for p in dict.params() {
        out.extend_from_slice(&p.angle.to_le_bytes());
        out.extend_from_slice(&p.distance.to_le_bytes());
    }
    for row in 0..n {
        for col in 0..s {
            let z = dict.atoms()[(row, col)];
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    let digest = Sha256::digest(&out);
    out.extend_from_slice(&digest);
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take<const K: usize>(&mut self) -> Option<[u8; K]> {
        let chunk = self.bytes.get(self.pos..self.pos + K)?;
        self.pos += K;
        chunk.try_into().ok()
    }

    fn u64(&mut self) -> Option<u64> {
        self.take::<8>().map(u64::from_le_bytes)
    }

    fn f64(&mut self) -> Option<f64> {
        self.take::<8>().map(f64::from_le_bytes)
    }
}

fn decode(bytes: &[u8]) -> std::result::Result<(DictionaryKey, PolarDictionary), String> {
    if bytes.len() < 8 + DIGEST_LEN {
        return Err("file too short".into());
    }
    let (body, digest) = bytes.split_at(bytes.len() - DIGEST_LEN);
    if Sha256::digest(body).as_slice() != digest {
        return Err("checksum mismatch".into());
    }
    if &body[..4] != MAGIC {
        return Err("bad magic".into());
    }
    let mut r = Reader { bytes: body, pos: 4 };
    let version = r.take::<4>().map(u32::from_le_bytes).ok_or("truncated header")?;
    if version != VERSION {
        return Err(format!("unsupported version {version}"));
    }
    let truncated = || "truncated header".to_string();
    let key = DictionaryKey {
        n_antennas: r.u64().ok_or_else(truncated)? as usize,
        spacing: r.f64().ok_or_else(truncated)?,
        carrier_frequency: r.f64().ok_or_else(truncated)?,
        beta: r.f64().ok_or_else(truncated)?,
        rings: r.u64().ok_or_else(truncated)? as usize,
        theta_min: r.f64().ok_or_else(truncated)?,
        theta_max: r.f64().ok_or_else(truncated)?,
        atom_limit: match r.u64().ok_or_else(truncated)? {
            0 => None,
            v => Some(v as usize),
        },
    };
    let s = r.u64().ok_or_else(truncated)? as usize;
    let n = key.n_antennas;
    let expected = r.pos + 16 * s + 16 * n * s;
    if body.len() != expected {
        return Err(format!("expected {expected} payload bytes, found {}", body.len()));
    }
    let params = (0..s)
        .map(|_| AtomParams {
            angle: r.f64().unwrap(),
            distance: r.f64().unwrap(),
        })
        .collect();
    let mut atoms = CMatrix::zeros(n, s);
    for row in 0..n {
        for col in 0..s {
            atoms[(row, col)] = C64::new(r.f64().unwrap(), r.f64().unwrap());
        }
    }
    let dict = PolarDictionary::from_parts(atoms, params).map_err(|e| e.to_string())?;
    Ok((key, dict))
}

pub fn write_cache(path: &Path, key: &DictionaryKey, dict: &PolarDictionary) -> Result<()> {
    std::fs::write(path, encode(key, dict)).map_err(|e| Error::io(path, e))
}

/// Reads a cache file. Returns `Ok(None)` when the file is valid but was
/// built for a different key.
pub fn read_cache(path: &Path, key: &DictionaryKey) -> Result<Option<PolarDictionary>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let (stored, dict) = decode(&bytes).map_err(|reason| Error::CorruptCache {
        path: path.to_path_buf(),
        reason,
    })?;
    Ok((stored == *key).then_some(dict))
}

/// Loads the dictionary for `key` from `path`, building and writing it when
/// the file is missing, stale, corrupt, or `force` is set.
pub fn load_or_build(path: &Path, key: &DictionaryKey, force: bool) -> Result<(PolarDictionary, CacheStatus)> {
    let mut status = CacheStatus::Built;
    if !force && path.exists() {
        match read_cache(path, key) {
            Ok(Some(dict)) => return Ok((dict, CacheStatus::Hit)),
            Ok(None) => status = CacheStatus::Rebuilt("cache was built for different parameters".into()),
            Err(Error::CorruptCache { reason, .. }) => {
                warn!("dictionary cache {} is corrupt ({reason}); rebuilding", path.display());
                status = CacheStatus::Rebuilt(reason);
            }
            Err(e) => return Err(e),
        }
    }
    let dict = key.build()?;
    write_cache(path, key, &dict)?;
    Ok((dict, status))
}
