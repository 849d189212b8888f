//! Raw cost-volume dump for debugging and oracle comparison: the header line
//! `LFCV <D> <H> <W>\n` followed by little-endian 32-bit reals in slice-major
//! order.

use std::fs;
use std::path::Path;

use crate::costvolume::CostVolume;
use crate::error::{Error, Result};

pub fn write_volume(path: impl AsRef<Path>, vol: &CostVolume) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::with_capacity(64 + vol.costs().len() * 4);
    out.extend_from_slice(
        format!("LFCV {} {} {}\n", vol.depth(), vol.height(), vol.width()).as_bytes(),
    );
    for v in vol.costs() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Reads a dump back as (depth, height, width, costs).
pub fn read_volume(path: impl AsRef<Path>) -> Result<(usize, usize, usize, Vec<f32>)> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let newline = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::Format {
            path: path.display().to_string(),
            offset: bytes.len(),
            message: "missing header line".into(),
        })?;
    let header = std::str::from_utf8(&bytes[..newline]).map_err(|_| Error::Format {
        path: path.display().to_string(),
        offset: 0,
        message: "non-ascii header".into(),
    })?;
    let mut parts = header.split_whitespace();
    let magic = parts.next().unwrap_or("");
    if magic != "LFCV" {
        return Err(Error::Format {
            path: path.display().to_string(),
            offset: 0,
            message: format!("bad magic '{}', expected 'LFCV'", magic),
        });
    }
    let dims: Vec<usize> = parts.filter_map(|p| p.parse().ok()).collect();
    if dims.len() != 3 {
        return Err(Error::Format {
            path: path.display().to_string(),
            offset: 0,
            message: "header needs three dimensions".into(),
        });
    }
    let (d, h, w) = (dims[0], dims[1], dims[2]);
    let expected = d * h * w * 4;
    let payload = &bytes[newline + 1..];
    if payload.len() != expected {
        return Err(Error::Format {
            path: path.display().to_string(),
            offset: newline + 1 + payload.len().min(expected),
            message: format!("payload is {} bytes, expected {}", payload.len(), expected),
        });
    }
    let costs = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    Ok((d, h, w, costs))
}
