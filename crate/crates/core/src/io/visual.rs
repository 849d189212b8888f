//! Visualization exports: colormapped disparity PNGs, grayscale occlusion
//! PNGs and BadPix error maps.

use std::path::Path;

use crate::error::{Error, Result};
use crate::image::{BoolMap, DisparityMap};

/// Piecewise-linear approximation of the viridis colormap (nine anchors,
/// linearly interpolated). Luma increases monotonically with the input.
const VIRIDIS: [[u8; 3]; 9] = [
    [68, 1, 84],
    [71, 44, 122],
    [59, 81, 139],
    [44, 113, 142],
    [33, 144, 141],
    [39, 173, 129],
    [92, 200, 99],
    [170, 220, 50],
    [253, 231, 37],
];

/// Maps t in [0, 1] through the colormap.
pub fn colormap(t: f32) -> [u8; 3] {
    let t = t.clamp(0.0, 1.0) * (VIRIDIS.len() - 1) as f32;
    let i = (t.floor() as usize).min(VIRIDIS.len() - 2);
    let f = t - i as f32;
    let a = VIRIDIS[i];
    let b = VIRIDIS[i + 1];
    [
        (a[0] as f32 + f * (b[0] as f32 - a[0] as f32)).round() as u8,
        (a[1] as f32 + f * (b[1] as f32 - a[1] as f32)).round() as u8,
        (a[2] as f32 + f * (b[2] as f32 - a[2] as f32)).round() as u8,
    ]
}

fn save_rgb(path: &Path, width: usize, height: usize, buf: Vec<u8>) -> Result<()> {
    image::RgbImage::from_raw(width as u32, height as u32, buf)
        .expect("buffer sized from dimensions")
        .save(path)
        .map_err(|e| Error::Format {
            path: path.display().to_string(),
            offset: 0,
            message: e.to_string(),
        })
}

/// Renders a disparity map by mapping [lo, hi] linearly through the
/// colormap; invalid pixels come out black.
pub fn write_disparity_png(
    path: impl AsRef<Path>,
    map: &DisparityMap,
    lo: f32,
    hi: f32,
) -> Result<()> {
    if !(lo < hi) {
        return Err(Error::InvalidArgument(format!(
            "colormap range needs lo < hi, got [{}, {}]",
            lo, hi
        )));
    }
    let mut buf = Vec::with_capacity(map.width() * map.height() * 3);
    for y in 0..map.height() {
        for x in 0..map.width() {
            if map.is_valid(x, y) {
                let t = (map.get(x, y) - lo) / (hi - lo);
                buf.extend_from_slice(&colormap(t));
            } else {
                buf.extend_from_slice(&[0, 0, 0]);
            }
        }
    }
    save_rgb(path.as_ref(), map.width(), map.height(), buf)
}

/// Writes one occlusion map as 8-bit grayscale, pixel value round(255·M).
pub fn write_gray_png(
    path: impl AsRef<Path>,
    width: usize,
    height: usize,
    values: &[f32],
) -> Result<()> {
    let path = path.as_ref();
    if values.len() != width * height {
        return Err(Error::ShapeMismatch {
            context: "write_gray_png",
            expected: format!("{} values", width * height),
            got: format!("{}", values.len()),
        });
    }
    let buf: Vec<u8> = values
        .iter()
        .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect();
    image::GrayImage::from_raw(width as u32, height as u32, buf)
        .expect("buffer sized from dimensions")
        .save(path)
        .map_err(|e| Error::Format {
            path: path.display().to_string(),
            offset: 0,
            message: e.to_string(),
        })
}

/// BadPix error map: red where the error exceeds eps, white where the pixel
/// evaluated fine, black where it was excluded.
pub fn write_badpix_png(
    path: impl AsRef<Path>,
    pred: &DisparityMap,
    gt: &DisparityMap,
    eps: f64,
    mask: Option<&BoolMap>,
) -> Result<()> {
    let bad = crate::metrics::badpix_mask(pred, gt, eps, mask)?;
    let mut buf = Vec::with_capacity(gt.width() * gt.height() * 3);
    for y in 0..gt.height() {
        for x in 0..gt.width() {
            let evaluated = pred.is_valid(x, y)
                && gt.is_valid(x, y)
                && mask.map_or(true, |m| m.get(x, y));
            let px: [u8; 3] = if !evaluated {
                [0, 0, 0]
            } else if bad.get(x, y) {
                [255, 0, 0]
            } else {
                [255, 255, 255]
            };
            buf.extend_from_slice(&px);
        }
    }
    save_rgb(path.as_ref(), gt.width(), gt.height(), buf)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn colormap_endpoints_and_monotone_luma() {
        assert_eq!(colormap(0.0), VIRIDIS[0]);
        assert_eq!(colormap(1.0), VIRIDIS[8]);
        let luma = |c: [u8; 3]| 0.299 * c[0] as f32 + 0.587 * c[1] as f32 + 0.114 * c[2] as f32;
        let mut prev = -1.0f32;
        for i in 0..=100 {
            let l = luma(colormap(i as f32 / 100.0));
            assert!(l >= prev - 1.0, "luma dipped at t={}", i);
            prev = l;
        }
    }

    #[test]
    fn disparity_png_extremes_and_invalid_black() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.png");
        let mut map = DisparityMap::constant(3, 1, -2.0);
        map.set(1, 0, 2.0, true);
        map.set(2, 0, 0.0, false);
        write_disparity_png(&path, &map, -2.0, 2.0).unwrap();
        let img = image::open(&path).unwrap().to_rgb8();
        assert_eq!(img.get_pixel(0, 0).0, VIRIDIS[0]);
        assert_eq!(img.get_pixel(1, 0).0, VIRIDIS[8]);
        assert_eq!(img.get_pixel(2, 0).0, [0, 0, 0]);
        assert!(write_disparity_png(&path, &map, 2.0, 2.0).is_err());
    }

    #[test]
    fn monotone_ramp_gives_monotone_colors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.png");
        let values: Vec<f32> = (0..16).map(|i| i as f32 / 15.0).collect();
        let map = DisparityMap::from_parts(16, 1, values, vec![true; 16]).unwrap();
        write_disparity_png(&path, &map, 0.0, 1.0).unwrap();
        let img = image::open(&path).unwrap().to_rgb8();
        let luma = |x: u32| {
            let p = img.get_pixel(x, 0).0;
            0.299 * p[0] as f32 + 0.587 * p[1] as f32 + 0.114 * p[2] as f32
        };
        for x in 1..16 {
            assert!(luma(x) >= luma(x - 1) - 1.0);
        }
    }

    #[test]
    fn gray_png_rounds_to_8bit() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.png");
        write_gray_png(&path, 2, 1, &[0.0, 1.0]).unwrap();
        let img = image::open(&path).unwrap().to_luma8();
        assert_eq!(img.get_pixel(0, 0).0, [0]);
        assert_eq!(img.get_pixel(1, 0).0, [255]);
    }

    #[test]
    fn badpix_png_colors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("b.png");
        let gt = DisparityMap::constant(3, 1, 0.0);
        let mut pred = DisparityMap::constant(3, 1, 0.0);
        pred.set(1, 0, 1.0, true);
        pred.set(2, 0, 0.0, false);
        write_badpix_png(&path, &pred, &gt, 0.07, None).unwrap();
        let img = image::open(&path).unwrap().to_rgb8();
        assert_eq!(img.get_pixel(0, 0).0, [255, 255, 255]);
        assert_eq!(img.get_pixel(1, 0).0, [255, 0, 0]);
        assert_eq!(img.get_pixel(2, 0).0, [0, 0, 0]);
    }
}
