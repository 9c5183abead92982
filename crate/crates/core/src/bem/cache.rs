//! On-disk cache of basis solutions keyed by a SHA-256 hash of the mesh.
//!
//! File `<dir>/<hash>.tfbem`, little-endian:
//!
//! ```text
//! magic        6 bytes  "TFBEM\0"
//! version      u32      1
//! n_panels     u64
//! n_electrodes u64
//! conditioning f64
//! per electrode: offset f64, then n_panels charges f64
//! ```
//!
//! Anything unreadable or mismatched counts as a miss.

use crate::geometry::PanelMesh;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

pub const CACHE_ENV: &str = "TRENCHFIELD_CACHE_DIR";

const MAGIC: &[u8; 6] = b"TFBEM\0";
const VERSION: u32 = 1;

pub(super) struct Entry {
    pub conditioning: f64,
    pub charges: Vec<Vec<f64>>,
    pub offsets: Vec<f64>,
}

/// Hex SHA-256 of the panel coordinates and electrode assignment.
pub fn cache_key(mesh: &PanelMesh) -> String {
    let mut h = Sha256::new();
    h.update(VERSION.to_le_bytes());
    for (id, _) in &mesh.electrodes {
        h.update((id.len() as u64).to_le_bytes());
        h.update(id.as_bytes());
    }
    for p in &mesh.panels {
        for v in [p.a.x, p.a.y, p.b.x, p.b.y] {
            h.update(v.to_bits().to_le_bytes());
        }
        h.update((p.electrode as u64).to_le_bytes());
    }
    let mut out = String::with_capacity(64);
    for b in h.finalize() {
        write!(out, "{b:02x}").expect("write to string");
    }
    out
}

pub(super) fn load(dir: &Path, key: &str, n: usize, m: usize) -> Option<Entry> {
    let bytes = fs::read(dir.join(format!("{key}.tfbem"))).ok()?;
    let header = 6 + 4 + 8 + 8 + 8;
    if bytes.len() != header + m * (n + 1) * 8 || &bytes[..6] != MAGIC {
        return None;
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    if u32_at(6) != VERSION || u64_at(10) != n as u64 || u64_at(18) != m as u64 {
        return None;
    }
    let conditioning = f64_at(26);
    let mut offsets = Vec::with_capacity(m);
    let mut charges = Vec::with_capacity(m);
    let mut o = header;
    for _ in 0..m {
        offsets.push(f64_at(o));
        o += 8;
        charges.push((0..n).map(|i| f64_at(o + 8 * i)).collect());
        o += 8 * n;
    }
    Some(Entry {
        conditioning,
        charges,
        offsets,
    })
}

pub(super) fn store(
    dir: &Path,
    key: &str,
    conditioning: f64,
    charges: &[Vec<f64>],
    offsets: &[f64],
) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let n = charges.first().map_or(0, Vec::len);
    let mut buf = Vec::with_capacity(34 + charges.len() * (n + 1) * 8);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(n as u64).to_le_bytes());
    buf.extend_from_slice(&(charges.len() as u64).to_le_bytes());
    buf.extend_from_slice(&conditioning.to_le_bytes());
    for (c, off) in charges.iter().zip(offsets) {
        buf.extend_from_slice(&off.to_le_bytes());
        for v in c {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    let tmp = dir.join(format!("{key}.tfbem.{}", std::process::id()));
    let mut f = fs::File::create(&tmp)?;
    f.write_all(&buf)?;
    f.sync_all()?;
    fs::rename(tmp, dir.join(format!("{key}.tfbem")))
}
