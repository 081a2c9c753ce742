//! `QKM1` binary kernel-matrix files.
//!
//! Layout, little-endian: magic `QKM1`, u32 rows, u32 cols, u8 mode
//! (0 exact, 1 sampled), u64 shots (0 for exact), then rows*cols f64
//! entries in row-major order.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use super::kernel::{KernelMatrix, KernelMode, PsdRepair};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"QKM1";
const HEADER_LEN: usize = 4 + 4 + 4 + 1 + 8;

pub fn encode(k: &KernelMatrix) -> Result<Vec<u8>> {
    let rows = u32::try_from(k.nrows()).map_err(|_| Error::Format("too many rows".into()))?;
    let cols = u32::try_from(k.ncols()).map_err(|_| Error::Format("too many columns".into()))?;
    let (mode, shots) = match k.mode {
        KernelMode::Exact => (0u8, 0u64),
        KernelMode::Sampled { shots } => (1u8, shots),
    };
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * k.nrows() * k.ncols());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&rows.to_le_bytes());
    out.extend_from_slice(&cols.to_le_bytes());
    out.push(mode);
    out.extend_from_slice(&shots.to_le_bytes());
    for r in 0..k.nrows() {
        for c in 0..k.ncols() {
            out.extend_from_slice(&k.data[(r, c)].to_le_bytes());
        }
    }
    Ok(out)
}

/// Decodes a `QKM1` buffer. The symmetric flag is recomputed from the data;
/// PSD-repair history is not stored in the format.
pub fn decode(bytes: &[u8]) -> Result<KernelMatrix> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!(
            "{} bytes is shorter than the header",
            bytes.len()
        )));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::Format("bad magic, expected QKM1".into()));
    }
    let u32_at =
        |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes")) as usize;
    let rows = u32_at(4);
    let cols = u32_at(8);
    let shots = u64::from_le_bytes(bytes[13..21].try_into().expect("8 bytes"));
    let mode = match bytes[12] {
        0 => KernelMode::Exact,
        1 => KernelMode::Sampled { shots },
        m => return Err(Error::Format(format!("unknown mode byte {m}"))),
    };
    let expected = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(8))
        .and_then(|n| n.checked_add(HEADER_LEN))
        .ok_or_else(|| Error::Format("dimensions overflow".into()))?;
    if bytes.len() != expected {
        return Err(Error::Format(format!(
            "expected {expected} bytes, found {}",
            bytes.len()
        )));
    }
    let values: Vec<f64> = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    let data = DMatrix::from_row_slice(rows, cols, &values);
    let symmetric = rows == cols && data == data.transpose();
    Ok(KernelMatrix {
        data,
        mode,
        symmetric,
        psd_repair: PsdRepair::None,
    })
}

pub fn write_qkm(k: &KernelMatrix, w: &mut impl Write) -> Result<()> {
    w.write_all(&encode(k)?)
        .map_err(|e| Error::io("<qkm stream>", e))
}

pub fn read_qkm(r: &mut impl Read) -> Result<KernelMatrix> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)
        .map_err(|e| Error::io("<qkm stream>", e))?;
    decode(&buf)
}

pub fn save(k: &KernelMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode(k)?).map_err(|e| Error::io(path, e))
}

pub fn load(path: impl AsRef<Path>) -> Result<KernelMatrix> {
    let path = path.as_ref();
    decode(&std::fs::read(path).map_err(|e| Error::io(path, e))?)
}

/// Plain CSV dump, one matrix row per line, no header.
pub fn write_csv(k: &KernelMatrix, w: impl Write) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    for r in 0..k.nrows() {
        wtr.write_record((0..k.ncols()).map(|c| format!("{}", k.data[(r, c)])))?;
    }
    wtr.flush().map_err(|e| Error::io("<csv stream>", e))?;
    Ok(())
}
