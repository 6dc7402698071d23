//! Content-addressed cache for spectral bases.
//!
//! Eigendecomposition dominates pipeline runtime, and transformed meshes
//! reuse filenames across seeds and datasets, so entries are keyed by mesh
//! *content* — positions and faces hashed with SHA-256 — plus the requested
//! mode count, never by path. Writes go through a unique temp file and an
//! atomic rename, so parallel workers computing the same basis race
//! benignly; corrupt or truncated entries are treated as misses and
//! rewritten in place.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use sha2::{Digest, Sha256};

use crate::mesh::spectral::{eigendecompose, SpectralBasis};
use crate::{Error, Result, TriMesh};

/// Environment variable that overrides any configured cache directory.
pub const CACHE_ENV: &str = "MESHBENCH_CACHE";

/// Picks the cache directory: the `MESHBENCH_CACHE` environment variable
/// when set and non-empty, otherwise whatever was configured.
pub fn resolve_cache_dir(configured: Option<&Path>) -> Option<PathBuf> {
    match std::env::var_os(CACHE_ENV) {
        Some(v) if !v.is_empty() => Some(PathBuf::from(v)),
        _ => configured.map(Path::to_path_buf),
    }
}

/// Hex SHA-256 over the mesh geometry, connectivity, and mode count.
pub fn cache_key(mesh: &TriMesh, k: usize) -> String {
    let mut h = Sha256::new();
    h.update(b"meshbench spectral basis v1");
    h.update((mesh.nv() as u64).to_le_bytes());
    h.update((mesh.nf() as u64).to_le_bytes());
    for v in 0..mesh.nv() as u32 {
        let p = mesh.position(v);
        for c in [p.x, p.y, p.z] {
            h.update(c.to_le_bytes());
        }
    }
    for f in 0..mesh.nf() as u32 {
        for i in mesh.face(f) {
            h.update(i.to_le_bytes());
        }
    }
    h.update((k as u64).to_le_bytes());
    let mut out = String::with_capacity(64);
    for byte in h.finalize() {
        use std::fmt::Write as _;
        write!(out, "{byte:02x}").unwrap();
    }
    out
}

const MAGIC: &[u8; 8] = b"MBSBAS\0\x01";

pub fn basis_to_bytes(basis: &SpectralBasis) -> Vec<u8> {
    let nv = basis.eigenfunctions.first().map_or(0, Vec::len);
    let mut out = Vec::with_capacity(40 + 8 * basis.k() * (nv + 1));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(nv as u64).to_le_bytes());
    out.extend_from_slice(&(basis.k() as u64).to_le_bytes());
    out.extend_from_slice(&(basis.components as u64).to_le_bytes());
    out.extend_from_slice(&(basis.iterations as u64).to_le_bytes());
    for l in &basis.eigenvalues {
        out.extend_from_slice(&l.to_le_bytes());
    }
    for phi in &basis.eigenfunctions {
        for x in phi {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse { what: "spectral basis file", line: 0, msg: msg.into() }
}

pub fn parse_basis_bytes(bytes: &[u8]) -> Result<SpectralBasis> {
    if bytes.len() < 40 {
        return Err(parse_err("shorter than the fixed header"));
    }
    if &bytes[..8] != MAGIC {
        return Err(parse_err("bad magic"));
    }
    let word = |i: usize| u64::from_le_bytes(bytes[8 + 8 * i..16 + 8 * i].try_into().unwrap());
    let (nv, k, components, iterations) = (word(0), word(1), word(2), word(3));
    if k == 0 || nv == 0 {
        return Err(parse_err("empty basis"));
    }
    if components == 0 || components > nv {
        return Err(parse_err(format!("{components} components on {nv} vertices")));
    }
    let payload = k
        .checked_mul(nv)
        .and_then(|kn| kn.checked_add(k))
        .and_then(|n| n.checked_mul(8))
        .and_then(|n| n.checked_add(40))
        .ok_or_else(|| parse_err("size overflows"))?;
    if payload != bytes.len() as u64 {
        return Err(parse_err(format!(
            "expected {payload} bytes for k={k} over {nv} vertices, found {}",
            bytes.len()
        )));
    }
    let (nv, k) = (nv as usize, k as usize);
    let mut at = 40usize;
    let mut next = || {
        let x = f64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
        at += 8;
        x
    };
    let eigenvalues: Vec<f64> = (0..k).map(|_| next()).collect();
    if eigenvalues.iter().any(|l| !l.is_finite()) {
        return Err(parse_err("non-finite eigenvalue"));
    }
    if eigenvalues.windows(2).any(|w| w[0] > w[1]) {
        return Err(parse_err("eigenvalues out of order"));
    }
    let mut eigenfunctions = Vec::with_capacity(k);
    for _ in 0..k {
        let phi: Vec<f64> = (0..nv).map(|_| next()).collect();
        if phi.iter().any(|x| !x.is_finite()) {
            return Err(parse_err("non-finite eigenfunction value"));
        }
        eigenfunctions.push(phi);
    }
    Ok(SpectralBasis {
        eigenvalues,
        eigenfunctions,
        components: components as usize,
        iterations: iterations as usize,
    })
}

/// Directory-backed cache of eigendecompositions.
///
/// Reads are lock-free; writes use rename so readers never observe a
/// partial file. Hit/miss/persist-failure counts are exposed for the
/// pipeline's run summary — a failed persist degrades to recomputation
/// next run rather than failing the current one.
#[derive(Debug)]
pub struct SpectralCache {
    dir: PathBuf,
    hits: AtomicUsize,
    misses: AtomicUsize,
    write_failures: AtomicUsize,
}

impl SpectralCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(SpectralCache {
            dir,
            hits: AtomicUsize::new(0),
            misses: AtomicUsize::new(0),
            write_failures: AtomicUsize::new(0),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> usize {
        self.misses.load(Ordering::Relaxed)
    }

    pub fn write_failures(&self) -> usize {
        self.write_failures.load(Ordering::Relaxed)
    }

    fn entry_path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.sbasis"))
    }

    /// Returns the cached basis for this exact mesh content and `k`, or
    /// computes, persists, and returns it.
    pub fn get_or_compute(&self, mesh: &TriMesh, k: usize) -> Result<SpectralBasis> {
        let key = cache_key(mesh, k);
        let path = self.entry_path(&key);
        if let Ok(bytes) = fs::read(&path) {
            if let Ok(basis) = parse_basis_bytes(&bytes) {
                if basis.k() == k
                    && basis.eigenfunctions.iter().all(|phi| phi.len() == mesh.nv())
                {
                    self.hits.fetch_add(1, Ordering::Relaxed);
                    return Ok(basis);
                }
            }
        }
        let basis = eigendecompose(mesh, k)?;
        self.misses.fetch_add(1, Ordering::Relaxed);
        if self.persist(&path, &basis).is_err() {
            self.write_failures.fetch_add(1, Ordering::Relaxed);
        }
        Ok(basis)
    }

    fn persist(&self, path: &Path, basis: &SpectralBasis) -> std::io::Result<()> {
        let tmp = self.dir.join(format!(
            ".tmp.{}.{}",
            std::process::id(),
            path.file_name().and_then(|n| n.to_str()).unwrap_or("entry")
        ));
        fs::write(&tmp, basis_to_bytes(basis))?;
        match fs::rename(&tmp, path) {
            Ok(()) => Ok(()),
            Err(e) => {
                let _ = fs::remove_file(&tmp);
                Err(e)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::synth;

    #[test]
    fn bytes_round_trip_bit_exactly() {
        let m = synth::icosphere(1.0, 1);
        let basis = eigendecompose(&m, 6).unwrap();
        let bytes = basis_to_bytes(&basis);
        assert_eq!(parse_basis_bytes(&bytes).unwrap(), basis);
    }

    #[test]
    fn cold_miss_then_warm_hit_with_identical_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let cache = SpectralCache::new(dir.path()).unwrap();
        let m = synth::icosphere(1.0, 2);
        let cold = cache.get_or_compute(&m, 8).unwrap();
        assert_eq!((cache.hits(), cache.misses()), (0, 1));
        let warm = cache.get_or_compute(&m, 8).unwrap();
        assert_eq!((cache.hits(), cache.misses()), (1, 1));
        assert_eq!(cold, warm);
        assert_eq!(cache.write_failures(), 0);
    }

    #[test]
    fn keys_follow_content_and_mode_count_not_identity() {
        let m = synth::icosphere(1.0, 1);
        let same = synth::icosphere(1.0, 1);
        assert_eq!(cache_key(&m, 8), cache_key(&same, 8));
        assert_ne!(cache_key(&m, 8), cache_key(&m, 9));
        assert_ne!(cache_key(&m, 8), cache_key(&m.scaled(2.0).unwrap(), 8));
    }

    #[test]
    fn corrupt_entries_are_recomputed_and_repaired() {
        let dir = tempfile::tempdir().unwrap();
        let cache = SpectralCache::new(dir.path()).unwrap();
        let m = synth::icosphere(1.0, 1);
        let key = cache_key(&m, 5);
        let path = cache.entry_path(&key);
        fs::write(&path, b"not a basis").unwrap();
        let basis = cache.get_or_compute(&m, 5).unwrap();
        assert_eq!((cache.hits(), cache.misses()), (0, 1));
        let repaired = parse_basis_bytes(&fs::read(&path).unwrap()).unwrap();
        assert_eq!(repaired, basis);
        assert_eq!(cache.get_or_compute(&m, 5).unwrap(), basis);
        assert_eq!(cache.hits(), 1);
    }

    #[test]
    fn parser_rejects_malformed_bytes() {
        let m = synth::icosphere(1.0, 1);
        let good = basis_to_bytes(&eigendecompose(&m, 4).unwrap());
        assert!(parse_basis_bytes(&good[..20]).is_err(), "truncated header");
        assert!(parse_basis_bytes(&good[..good.len() - 1]).is_err(), "truncated payload");
        let mut bad_magic = good.clone();
        bad_magic[0] = b'X';
        assert!(parse_basis_bytes(&bad_magic).is_err());
        let mut huge_k = good.clone();
        huge_k[16..24].copy_from_slice(&u64::MAX.to_le_bytes());
        assert!(parse_basis_bytes(&huge_k).is_err(), "size must not overflow");
        let mut nan = good.clone();
        nan[40..48].copy_from_slice(&f64::NAN.to_le_bytes());
        assert!(parse_basis_bytes(&nan).is_err());
        let mut unordered = good;
        unordered[40..48].copy_from_slice(&1e9f64.to_le_bytes());
        assert!(parse_basis_bytes(&unordered).is_err());
    }

    #[test]
    fn environment_variable_takes_precedence() {
        let configured = Path::new("/tmp/configured-cache");
        std::env::remove_var(CACHE_ENV);
        assert_eq!(
            resolve_cache_dir(Some(configured)),
            Some(configured.to_path_buf())
        );
        assert_eq!(resolve_cache_dir(None), None);
        std::env::set_var(CACHE_ENV, "/tmp/env-cache");
        assert_eq!(
            resolve_cache_dir(Some(configured)),
            Some(PathBuf::from("/tmp/env-cache"))
        );
        assert_eq!(resolve_cache_dir(None), Some(PathBuf::from("/tmp/env-cache")));
        std::env::remove_var(CACHE_ENV);
    }
}
