//! On-disk eigendecompositions in the ADEC1 format.
//!
//! Layout, all integers and floats little-endian:
//! `"ADEC1"`, u64 metadata length, metadata (u64 dimension, u64 atom count,
//! 32-byte SHA-256 of the Hamiltonian's defining parameters), eigenvalues,
//! eigenvector columns, and a trailing u64 checksum (the first eight bytes
//! of the SHA-256 of everything before it).

use std::path::{Path, PathBuf};

use emission_core::arrowhead::EigenDecomposition;
use emission_core::model::ArrowheadHamiltonian;
use nalgebra::DMatrix;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};
use crate::output::{hex, write_atomic};

pub const MAGIC: &[u8; 5] = b"ADEC1";
pub const ENV_CACHE_DIR: &str = "EMISSION_CACHE_DIR";
/// Dense columns cost `8 n²` bytes; larger problems are not cached.
pub const CACHE_MAX_DIM: usize = 4096;

const META_LEN: usize = 8 + 8 + 32;

pub fn hamiltonian_key(h: &ArrowheadHamiltonian) -> [u8; 32] {
    Sha256::digest(h.defining_bytes()).into()
}

pub fn cache_path(dir: &Path, key: &[u8; 32]) -> PathBuf {
    dir.join(format!("{}.adec", hex(key)))
}

fn checksum(bytes: &[u8]) -> u64 {
    let d = Sha256::digest(bytes);
    u64::from_le_bytes(d[..8].try_into().unwrap())
}

pub fn encode(key: &[u8; 32], eig: &EigenDecomposition) -> Vec<u8> {
    let n = eig.dim();
    let mut out = Vec::with_capacity(5 + 8 + META_LEN + 8 * n * (n + 1) + 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(META_LEN as u64).to_le_bytes());
    out.extend_from_slice(&(n as u64).to_le_bytes());
    out.extend_from_slice(&(eig.atoms() as u64).to_le_bytes());
    out.extend_from_slice(key);
    for v in eig.eigenvalues() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for j in 0..n {
        for v in eig.column(j) {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    let sum = checksum(&out);
    out.extend_from_slice(&sum.to_le_bytes());
    out
}

fn read_u64(b: &[u8], at: usize) -> Option<u64> {
    b.get(at..at + 8).map(|s| u64::from_le_bytes(s.try_into().unwrap()))
}

fn read_f64s(b: &[u8], at: usize, count: usize) -> Vec<f64> {
    b[at..at + 8 * count].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect()
}

/// Decode a cache file, checking magic, key, size and checksum.
pub fn decode(bytes: &[u8], key: &[u8; 32]) -> Result<EigenDecomposition, String> {
    if bytes.len() < 5 + 8 + META_LEN + 8 || &bytes[..5] != MAGIC {
        return Err("not an ADEC1 file".into());
    }
    let (body, tail) = bytes.split_at(bytes.len() - 8);
    if checksum(body) != u64::from_le_bytes(tail.try_into().unwrap()) {
        return Err("checksum mismatch".into());
    }
    if read_u64(bytes, 5) != Some(META_LEN as u64) {
        return Err("unexpected metadata length".into());
    }
    let n = read_u64(bytes, 13).unwrap() as usize;
    let atoms = read_u64(bytes, 21).unwrap() as usize;
    if &bytes[29..61] != key {
        return Err("parameter hash does not match".into());
    }
    let start = 5 + 8 + META_LEN;
    let expected = n.checked_mul(n + 1).and_then(|m| m.checked_mul(8)).and_then(|m| m.checked_add(start + 8));
    if expected != Some(bytes.len()) {
        return Err("size does not match the dimension".into());
    }
    let values = read_f64s(bytes, start, n);
    let columns = read_f64s(bytes, start + 8 * n, n * n);
    EigenDecomposition::from_dense(values, DMatrix::from_vec(n, n, columns), atoms).map_err(|e| e.to_string())
}

/// What happened to the cache during one lookup.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CacheStatus {
    Disabled,
    TooLarge,
    Hit(PathBuf),
    Stored(PathBuf),
    /// The file was unusable and was rewritten.
    Replaced {
        path: PathBuf,
        reason: String,
    },
}

impl CacheStatus {
    pub fn describe(&self) -> String {
        match self {
            Self::Disabled => "disabled".into(),
            Self::TooLarge => format!("skipped (dimension above {CACHE_MAX_DIM})"),
            Self::Hit(p) => format!("hit {}", p.display()),
            Self::Stored(p) => format!("stored {}", p.display()),
            Self::Replaced { path, reason } => format!("replaced {} ({reason})", path.display()),
        }
    }
}

/// Decomposition of `h`, read from or stored into `dir`.
///
/// With a cache directory every small problem runs on the dense columns that
/// the cache holds, so a hit and a miss give bit-identical results.
pub fn decomposition(
    h: &ArrowheadHamiltonian,
    dir: Option<&Path>,
    compute: impl FnOnce(&ArrowheadHamiltonian) -> emission_core::Result<EigenDecomposition>,
) -> CliResult<(EigenDecomposition, CacheStatus)> {
    let Some(dir) = dir else {
        return Ok((compute(h)?, CacheStatus::Disabled));
    };
    if h.dim() > CACHE_MAX_DIM {
        return Ok((compute(h)?, CacheStatus::TooLarge));
    }
    let key = hamiltonian_key(h);
    let path = cache_path(dir, &key);
    let mut replaced = None;
    if let Ok(bytes) = std::fs::read(&path) {
        match decode(&bytes, &key) {
            Ok(eig) => return Ok((eig, CacheStatus::Hit(path))),
            Err(reason) => {
                eprintln!("warning: ignoring cache file {}: {reason}; recomputing", path.display());
                replaced = Some(reason);
            }
        }
    }
    let fresh = compute(h)?;
    let eig = EigenDecomposition::from_dense(fresh.eigenvalues().to_vec(), fresh.to_dense(), fresh.atoms())?;
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    write_atomic(&path, &encode(&key, &eig))?;
    let status = match replaced {
        Some(reason) => CacheStatus::Replaced { path, reason },
        None => CacheStatus::Stored(path),
    };
    Ok((eig, status))
}

#[cfg(test)]
mod tests {
    use super::*;
    use emission_core::arrowhead::{build_symmetric_1d_hamiltonian, eigendecompose_arrowhead};

    #[test]
    fn round_trip_is_bit_exact() {
        let h = build_symmetric_1d_hamiltonian(20, 1.0, 1.3).unwrap();
        let eig = eigendecompose_arrowhead(&h).unwrap();
        let key = hamiltonian_key(&h);
        let bytes = encode(&key, &eig);
        assert_eq!(&bytes[..5], b"ADEC1");
        let back = decode(&bytes, &key).unwrap();
        assert_eq!(back.eigenvalues(), eig.eigenvalues());
        for j in 0..eig.dim() {
            assert_eq!(back.column(j), eig.column(j));
        }
    }

    #[test]
    fn corruption_and_key_mismatch_are_detected() {
        let h = build_symmetric_1d_hamiltonian(5, 1.0, 1.0).unwrap();
        let eig = eigendecompose_arrowhead(&h).unwrap();
        let key = hamiltonian_key(&h);
        let mut bytes = encode(&key, &eig);
        let other = hamiltonian_key(&build_symmetric_1d_hamiltonian(5, 1.0, 1.1).unwrap());
        assert!(decode(&bytes, &other).is_err());
        bytes[80] ^= 1;
        assert_eq!(decode(&bytes, &key).unwrap_err(), "checksum mismatch");
        assert!(decode(b"ADEC0", &key).is_err());
    }
}
