//! Portable float map codec for disparity maps.
//!
//! Grayscale `Pf` maps only. The header is three whitespace-terminated
//! tokens (magic, "width height", scale); a negative scale marks a
//! little-endian payload. Rows are stored bottom to top in the file and
//! flipped to top-to-bottom in memory. The writer always emits the canonical
//! little-endian form (`Pf\n{w} {h}\n-1.0\n`), so write→read→write round
//! trips are byte-identical; invalid map pixels are written as NaN and read
//! back as invalid.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::DisparityMap;

/// A decoded map: top-to-bottom rows plus the header's scale magnitude.
#[derive(Clone, Debug)]
pub struct PfmData {
    pub width: usize,
    pub height: usize,
    /// Absolute value of the header scale.
    pub scale: f32,
    /// Row-major, top-to-bottom.
    pub values: Vec<f32>,
}

fn format_err(path: &Path, offset: usize, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.display().to_string(),
        offset,
        message: message.into(),
    }
}

/// Reads one whitespace-terminated token starting at `pos`, returning the
/// token and the offset just past its terminating whitespace byte.
fn read_token<'a>(bytes: &'a [u8], pos: usize, path: &Path) -> Result<(&'a str, usize)> {
    let mut start = pos;
    while start < bytes.len() && bytes[start].is_ascii_whitespace() {
        start += 1;
    }
    let mut end = start;
    while end < bytes.len() && !bytes[end].is_ascii_whitespace() {
        end += 1;
    }
    if start == end {
        return Err(format_err(path, pos, "unexpected end of header"));
    }
    let token = std::str::from_utf8(&bytes[start..end])
        .map_err(|_| format_err(path, start, "non-ascii header token"))?;
    if end == bytes.len() {
        return Err(format_err(path, end, "truncated after header token"));
    }
    Ok((token, end + 1))
}

pub fn read_pfm(path: impl AsRef<Path>) -> Result<PfmData> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;

    let (magic, pos) = read_token(&bytes, 0, path)?;
    match magic {
        "Pf" => {}
        "PF" => {
            return Err(format_err(path, 0, "color PFM not supported, only grayscale 'Pf'"));
        }
        other => {
            return Err(format_err(path, 0, format!("bad magic '{}', expected 'Pf'", other)));
        }
    }
    let (wtok, pos2) = read_token(&bytes, pos, path)?;
    let (htok, pos3) = read_token(&bytes, pos2, path)?;
    let width: usize = wtok
        .parse()
        .map_err(|_| format_err(path, pos, format!("bad width '{}'", wtok)))?;
    let height: usize = htok
        .parse()
        .map_err(|_| format_err(path, pos2, format!("bad height '{}'", htok)))?;
    if width == 0 || height == 0 {
        return Err(format_err(path, pos, "zero dimension"));
    }
    let (stok, payload_start) = read_token(&bytes, pos3, path)?;
    let scale: f32 = stok
        .parse()
        .map_err(|_| format_err(path, pos3, format!("bad scale '{}'", stok)))?;
    if scale == 0.0 {
        return Err(format_err(path, pos3, "zero scale"));
    }
    let little_endian = scale < 0.0;

    let expected = width * height * 4;
    if bytes.len() < payload_start + expected {
        return Err(format_err(
            path,
            bytes.len(),
            format!(
                "truncated payload: need {} bytes from offset {}, file has {}",
                expected,
                payload_start,
                bytes.len()
            ),
        ));
    }
    let payload = &bytes[payload_start..payload_start + expected];
    let mut values = vec![0.0f32; width * height];
    for row in 0..height {
        // File rows run bottom to top.
        let src = height - 1 - row;
        for x in 0..width {
            let i = (src * width + x) * 4;
            let b = [payload[i], payload[i + 1], payload[i + 2], payload[i + 3]];
            values[row * width + x] = if little_endian {
                f32::from_le_bytes(b)
            } else {
                f32::from_be_bytes(b)
            };
        }
    }
    Ok(PfmData { width, height, scale: scale.abs(), values })
}

/// Writes canonical little-endian grayscale PFM (scale -1.0).
pub fn write_pfm(path: impl AsRef<Path>, width: usize, height: usize, values: &[f32]) -> Result<()> {
    let path = path.as_ref();
    if values.len() != width * height {
        return Err(Error::ShapeMismatch {
            context: "write_pfm",
            expected: format!("{} values", width * height),
            got: format!("{}", values.len()),
        });
    }
    let mut out = Vec::with_capacity(64 + values.len() * 4);
    out.extend_from_slice(format!("Pf\n{} {}\n-1.0\n", width, height).as_bytes());
    for row in (0..height).rev() {
        for x in 0..width {
            out.extend_from_slice(&values[row * width + x].to_le_bytes());
        }
    }
    fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Loads a PFM as a disparity map; non-finite samples become invalid pixels.
pub fn read_disparity(path: impl AsRef<Path>) -> Result<DisparityMap> {
    let pfm = read_pfm(path)?;
    DisparityMap::from_values(pfm.width, pfm.height, pfm.values)
}

/// Writes a disparity map as PFM, encoding invalid pixels as NaN.
pub fn write_disparity(path: impl AsRef<Path>, map: &DisparityMap) -> Result<()> {
    let values: Vec<f32> = map
        .values()
        .iter()
        .zip(map.valid())
        .map(|(&v, &ok)| if ok { v } else { f32::NAN })
        .collect();
    write_pfm(path, map.width(), map.height(), &values)
}
