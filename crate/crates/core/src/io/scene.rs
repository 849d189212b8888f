//! Scene-directory ingestion and export in the common benchmark layout:
//! one PNG per view named by a row-major index pattern, with an optional
//! ground-truth PFM alongside.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::{DisparityMap, Image};
use crate::lightfield::LightField;

use super::pfm;

/// Rec. 601 luma weights for optional grayscale conversion.
const LUMA: [f32; 3] = [0.299, 0.587, 0.114];

/// Where and how a scene lives on disk. View index 0 maps to (u=0, v=0) and
/// the index advances row-major with u as the slow axis.
#[derive(Clone, Debug)]
pub struct SceneLayout {
    pub directory: PathBuf,
    /// File name pattern containing `{index:03}` (or `{index}`).
    pub view_pattern: String,
    /// Ground-truth file name; loading skips it silently when absent.
    pub gt_filename: Option<String>,
    pub nu: usize,
    pub nv: usize,
    /// Collapse RGB inputs to luma on load.
    pub grayscale: bool,
}

impl SceneLayout {
    /// The 9×9 benchmark convention: `input_Cam000.png` … `input_Cam080.png`
    /// plus `gt_disp_lowres.pfm`.
    pub fn hci(directory: impl Into<PathBuf>) -> Self {
        Self {
            directory: directory.into(),
            view_pattern: "input_Cam{index:03}.png".into(),
            gt_filename: Some("gt_disp_lowres.pfm".into()),
            nu: 9,
            nv: 9,
            grayscale: false,
        }
    }

    pub fn view_index(&self, u: usize, v: usize) -> usize {
        u * self.nv + v
    }

    pub fn view_coord(&self, index: usize) -> (usize, usize) {
        (index / self.nv, index % self.nv)
    }

    pub fn view_filename(&self, index: usize) -> String {
        render_pattern(&self.view_pattern, index)
    }

    pub fn view_path(&self, index: usize) -> PathBuf {
        self.directory.join(self.view_filename(index))
    }
}

/// Expands `{index}` or `{index:0N}` in a view filename pattern.
pub fn render_pattern(pattern: &str, index: usize) -> String {
    if let Some(start) = pattern.find("{index") {
        let rest = &pattern[start..];
        if let Some(close) = rest.find('}') {
            let spec = &rest[6..close];
            let rendered = if let Some(width) = spec.strip_prefix(":0") {
                let width: usize = width.parse().unwrap_or(0);
                format!("{:0width$}", index, width = width)
            } else {
                format!("{}", index)
            };
            return format!("{}{}{}", &pattern[..start], rendered, &rest[close + 1..]);
        }
    }
    pattern.to_string()
}

fn decode_view(path: &Path, index: usize, grayscale: bool) -> Result<Image> {
    if !path.exists() {
        return Err(Error::MissingView { path: path.display().to_string(), index });
    }
    let img = image::open(path).map_err(|e| Error::Format {
        path: path.display().to_string(),
        offset: 0,
        message: e.to_string(),
    })?;
    let img = match img {
        image::DynamicImage::ImageLuma8(g) => {
            let (w, h) = (g.width() as usize, g.height() as usize);
            Image::from_fn(w, h, 1, |x, y, _| g.get_pixel(x as u32, y as u32)[0] as f32 / 255.0)
        }
        other => {
            let rgb = other.to_rgb8();
            let (w, h) = (rgb.width() as usize, rgb.height() as usize);
            if grayscale {
                Image::from_fn(w, h, 1, |x, y, _| {
                    let p = rgb.get_pixel(x as u32, y as u32);
                    (LUMA[0] * p[0] as f32 + LUMA[1] * p[1] as f32 + LUMA[2] * p[2] as f32) / 255.0
                })
            } else {
                Image::from_fn(w, h, 3, |x, y, c| rgb.get_pixel(x as u32, y as u32)[c] as f32 / 255.0)
            }
        }
    };
    Ok(img)
}

/// Loads all views (in parallel) and the ground truth when present.
pub fn load_scene(layout: &SceneLayout) -> Result<(LightField, Option<DisparityMap>)> {
    let count = layout.nu * layout.nv;
    let views: Vec<Image> = (0..count)
        .into_par_iter()
        .map(|i| decode_view(&layout.view_path(i), i, layout.grayscale))
        .collect::<Result<Vec<_>>>()?;
    for (i, v) in views.iter().enumerate() {
        if v.width() != views[0].width()
            || v.height() != views[0].height()
            || v.channels() != views[0].channels()
        {
            return Err(Error::ShapeMismatch {
                context: "load_scene views",
                expected: format!(
                    "{}x{}x{}",
                    views[0].height(),
                    views[0].width(),
                    views[0].channels()
                ),
                got: format!(
                    "{}x{}x{} in {}",
                    v.height(),
                    v.width(),
                    v.channels(),
                    layout.view_filename(i)
                ),
            });
        }
    }
    let lf = LightField::from_views(layout.nu, layout.nv, views)?;

    let gt = match &layout.gt_filename {
        Some(name) => {
            let path = layout.directory.join(name);
            if path.exists() {
                let map = pfm::read_disparity(&path)?;
                if map.width() != lf.width() || map.height() != lf.height() {
                    return Err(Error::ShapeMismatch {
                        context: "load_scene ground truth",
                        expected: format!("{}x{}", lf.width(), lf.height()),
                        got: format!("{}x{}", map.width(), map.height()),
                    });
                }
                Some(map)
            } else {
                None
            }
        }
        None => None,
    };
    Ok((lf, gt))
}

/// Quantizes [0,1] to 8 bits.
#[inline]
fn to_u8(v: f32) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Writes a light field (and optional ground truth) into a scene directory
/// using the layout's naming. Grayscale views become 8-bit gray PNGs, RGB
/// views 8-bit color PNGs.
pub fn export_scene(
    layout: &SceneLayout,
    lf: &LightField,
    gt: Option<&DisparityMap>,
) -> Result<()> {
    std::fs::create_dir_all(&layout.directory)
        .map_err(|e| Error::io(layout.directory.display().to_string(), e))?;
    if layout.nu != lf.angular().0 || layout.nv != lf.angular().1 {
        return Err(Error::ShapeMismatch {
            context: "export_scene",
            expected: format!("{}x{} views", layout.nu, layout.nv),
            got: format!("{}x{} views", lf.angular().0, lf.angular().1),
        });
    }
    let (w, h) = (lf.width() as u32, lf.height() as u32);
    for a in lf.angular_coords() {
        let index = layout.view_index(a.u, a.v);
        let path = layout.view_path(index);
        let view = lf.view(a)?;
        let save_result = if lf.channels() == 1 {
            let buf: Vec<u8> = view.data().iter().map(|&v| to_u8(v)).collect();
            image::GrayImage::from_raw(w, h, buf)
                .expect("buffer sized from dimensions")
                .save(&path)
        } else if lf.channels() == 3 {
            let buf: Vec<u8> = view.data().iter().map(|&v| to_u8(v)).collect();
            image::RgbImage::from_raw(w, h, buf)
                .expect("buffer sized from dimensions")
                .save(&path)
        } else {
            return Err(Error::InvalidArgument(format!(
                "cannot export {}-channel views as PNG",
                lf.channels()
            )));
        };
        save_result.map_err(|e| Error::Format {
            path: path.display().to_string(),
            offset: 0,
            message: e.to_string(),
        })?;
    }
    if let (Some(map), Some(name)) = (gt, &layout.gt_filename) {
        pfm::write_disparity(layout.directory.join(name), map)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate_lf, DisparityModel, Layer, SceneSpec, Texture};

    fn tiny_scene() -> (LightField, DisparityMap) {
        let spec = SceneSpec {
            layers: vec![Layer {
                texture: Texture::ValueNoise { seed: 14, period: 3.0, lo: 0.1, hi: 0.9 },
                disparity: DisparityModel::Constant(0.5),
                alpha: None,
            }],
            nu: 3,
            nv: 3,
            height: 12,
            width: 10,
            channels: 1,
            seed: 14,
        };
        let (lf, truth) = generate_lf(&spec).unwrap();
        (lf, truth.disparity)
    }

    fn tiny_layout(dir: &Path) -> SceneLayout {
        SceneLayout {
            directory: dir.to_path_buf(),
            view_pattern: "input_Cam{index:03}.png".into(),
            gt_filename: Some("gt_disp_lowres.pfm".into()),
            nu: 3,
            nv: 3,
            grayscale: false,
        }
    }

    #[test]
    fn pattern_rendering() {
        assert_eq!(render_pattern("input_Cam{index:03}.png", 7), "input_Cam007.png");
        assert_eq!(render_pattern("input_Cam{index:03}.png", 80), "input_Cam080.png");
        assert_eq!(render_pattern("view_{index}.png", 12), "view_12.png");
    }

    #[test]
    fn index_mapping_is_a_bijection_for_9x9() {
        let layout = SceneLayout::hci("/tmp");
        let mut seen = std::collections::HashSet::new();
        for u in 0..9 {
            for v in 0..9 {
                let i = layout.view_index(u, v);
                assert!(i < 81);
                assert!(seen.insert(i));
                assert_eq!(layout.view_coord(i), (u, v));
            }
        }
        assert_eq!(layout.view_index(0, 0), 0);
        assert_eq!(layout.view_filename(80), "input_Cam080.png");
    }

    #[test]
    fn export_then_load_round_trips_within_quantization() {
        let dir = tempfile::tempdir().unwrap();
        let (lf, gt) = tiny_scene();
        let layout = tiny_layout(dir.path());
        export_scene(&layout, &lf, Some(&gt)).unwrap();
        let (loaded, loaded_gt) = load_scene(&layout).unwrap();
        assert_eq!(loaded.angular(), lf.angular());
        assert_eq!(loaded.width(), lf.width());
        let max_err = lf
            .view(crate::lightfield::AngularCoord::new(0, 0))
            .unwrap()
            .data()
            .iter()
            .zip(loaded.view(crate::lightfield::AngularCoord::new(0, 0)).unwrap().data())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f32, f32::max);
        assert!(max_err <= 1.0 / 255.0, "max quantization error {}", max_err);
        let loaded_gt = loaded_gt.unwrap();
        assert_eq!(loaded_gt.values(), gt.values());
    }

    #[test]
    fn missing_view_error_names_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let (lf, _) = tiny_scene();
        let layout = tiny_layout(dir.path());
        export_scene(&layout, &lf, None).unwrap();
        std::fs::remove_file(layout.view_path(5)).unwrap();
        let err = load_scene(&layout).unwrap_err();
        assert!(err.to_string().contains("input_Cam005.png"), "{}", err);
    }

    #[test]
    fn absent_gt_loads_as_none() {
        let dir = tempfile::tempdir().unwrap();
        let (lf, _) = tiny_scene();
        let layout = tiny_layout(dir.path());
        export_scene(&layout, &lf, None).unwrap();
        let (_, gt) = load_scene(&layout).unwrap();
        assert!(gt.is_none());
    }

    #[test]
    fn grayscale_conversion_uses_rec601_luma() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.png");
        let mut rgb = image::RgbImage::new(1, 1);
        rgb.put_pixel(0, 0, image::Rgb([255, 0, 0]));
        rgb.save(&path).unwrap();
        let img = decode_view(&path, 0, true).unwrap();
        assert_eq!(img.channels(), 1);
        assert!((img.get(0, 0, 0) - 0.299).abs() < 1e-6);
        let img = decode_view(&path, 0, false).unwrap();
        assert_eq!(img.channels(), 3);
        assert_eq!(img.get(0, 0, 0), 1.0);
    }

    #[test]
    fn dimension_mismatch_across_views_detected() {
        let dir = tempfile::tempdir().unwrap();
        let (lf, _) = tiny_scene();
        let layout = tiny_layout(dir.path());
        export_scene(&layout, &lf, None).unwrap();
        // Overwrite one view with a smaller image.
        image::GrayImage::new(4, 4).save(layout.view_path(3)).unwrap();
        let err = load_scene(&layout).unwrap_err();
        assert!(matches!(err, Error::ShapeMismatch { .. }));
    }
}
