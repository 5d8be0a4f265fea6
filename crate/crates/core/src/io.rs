//! Binary field snapshots with JSON sidecars.
//!
//! Record layout (little endian): 8-byte magic `VNLWFLD1`, `N` as u64, Hermitian
//! flag as u64, time as f64, then `N²` interleaved `(re, im)` f64 pairs in
//! lattice order (`n₁` from `−N/2` outermost, then `n₂`).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::field::SpectralField;
use crate::grid::{FourierGrid, C64};
use crate::noise::NoiseManifest;

pub const MAGIC: &[u8; 8] = b"VNLWFLD1";
pub const HEADER_BYTES: usize = 32;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FieldSidecar {
    pub n: usize,
    pub pad: f64,
    pub time: f64,
    pub hermitian: bool,
    pub measure: f64,
    pub convention: String,
    pub ordering: String,
}

impl FieldSidecar {
    pub fn for_field(field: &SpectralField, time: f64) -> Self {
        FieldSidecar {
            n: field.grid().n(),
            pad: field.grid().pad(),
            time,
            hermitian: field.is_hermitian(),
            measure: 1.0,
            convention: "c(n) = mean_x u(x) exp(-i n.x), x in 2pi (Z/N)^2".into(),
            ordering: "n1 ascending from -N/2 (outer), n2 ascending from -N/2 (inner)".into(),
        }
    }
}

fn lattice_order(grid: &FourierGrid) -> impl Iterator<Item = usize> + '_ {
    let h = (grid.n() / 2) as i64;
    (-h..h).flat_map(move |k1| (-h..h).map(move |k2| grid.index([k1, k2]).expect("on lattice")))
}

pub fn encode_record(field: &SpectralField, time: f64) -> Vec<u8> {
    let g = field.grid();
    let mut out = Vec::with_capacity(HEADER_BYTES + 16 * g.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(g.n() as u64).to_le_bytes());
    out.extend_from_slice(&(field.is_hermitian() as u64).to_le_bytes());
    out.extend_from_slice(&time.to_le_bytes());
    for idx in lattice_order(g) {
        let c = field.coeffs()[idx];
        out.extend_from_slice(&c.re.to_le_bytes());
        out.extend_from_slice(&c.im.to_le_bytes());
    }
    out
}

fn read_u64(b: &[u8]) -> u64 {
    u64::from_le_bytes(b[..8].try_into().expect("8 bytes"))
}

fn read_f64(b: &[u8]) -> f64 {
    f64::from_le_bytes(b[..8].try_into().expect("8 bytes"))
}

/// Decodes one record from the front of `bytes`; returns the field, its time and
/// the number of bytes consumed.
pub fn decode_record(bytes: &[u8], grid: &Arc<FourierGrid>) -> Result<(SpectralField, f64, usize)> {
    if bytes.len() < HEADER_BYTES || &bytes[..8] != MAGIC {
        return invalid("not a field record (bad magic)");
    }
    let n = read_u64(&bytes[8..]) as usize;
    if n != grid.n() {
        return Err(Error::GridMismatch(n, grid.n()));
    }
    let herm = read_u64(&bytes[16..]) != 0;
    let time = read_f64(&bytes[24..]);
    let total = HEADER_BYTES + 16 * n * n;
    if bytes.len() < total {
        return Err(Error::ShapeMismatch { expected: total, got: bytes.len() });
    }
    let mut coeffs = vec![C64::new(0.0, 0.0); n * n];
    for (k, idx) in lattice_order(grid).enumerate() {
        let off = HEADER_BYTES + 16 * k;
        coeffs[idx] = C64::new(read_f64(&bytes[off..]), read_f64(&bytes[off + 8..]));
    }
    let mut f = SpectralField::from_coeffs(grid, coeffs, false)?;
    f.set_hermitian_flag(herm);
    Ok((f, time, total))
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

/// Writes the record and its sidecar.
pub fn write_field(path: &Path, field: &SpectralField, time: f64) -> Result<()> {
    fs::write(path, encode_record(field, time))?;
    let side = serde_json::to_string_pretty(&FieldSidecar::for_field(field, time))?;
    fs::write(sidecar_path(path), side)?;
    Ok(())
}

pub fn read_field(path: &Path, grid: &Arc<FourierGrid>) -> Result<(SpectralField, f64)> {
    let bytes = fs::read(path)?;
    let (f, t, _) = decode_record(&bytes, grid)?;
    Ok((f, t))
}

/// Writes a sequence of records into one file plus a JSON manifest next to it.
pub fn write_noise_path(path: &Path, records: &[(f64, SpectralField)], manifest: &NoiseManifest) -> Result<()> {
    let mut file = fs::File::create(path)?;
    for (t, f) in records {
        file.write_all(&encode_record(f, *t))?;
    }
    fs::write(sidecar_path(path), serde_json::to_string_pretty(manifest)?)?;
    Ok(())
}

pub fn read_records(path: &Path, grid: &Arc<FourierGrid>) -> Result<Vec<(f64, SpectralField)>> {
    let bytes = fs::read(path)?;
    let mut out = Vec::new();
    let mut off = 0;
    while off < bytes.len() {
        let (f, t, used) = decode_record(&bytes[off..], grid)?;
        out.push((t, f));
        off += used;
    }
    Ok(out)
}
