//! Per-view occlusion maps from photo-consistency residuals, and the view
//! weights derived from them.
//!
//! Warping a side view to the center by a correct disparity map makes the two
//! agree wherever the scene point is actually visible in that view. The
//! occlusion map is the clipped intensity residual
//! M = clip(mean_c |I_center - I_warped|, 0, 1), taken per pixel with the
//! channel-mean absolute difference so the scale is independent of the
//! channel count. Pixels whose warp left the frame carry M = 1: absent
//! evidence is treated as occlusion, never as a match. The matching weight of
//! a view is w = 1 - M, which is also the per-pixel magnitude of 1 - M given
//! M in [0, 1]; the center view gets M = 0, w = 1 everywhere.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::{BoolMap, DisparityMap, ImageRef};
use crate::lightfield::LightField;
use crate::warp::{warp_view, DispField, WarpedView};

/// Occlusion map, matching weights and warp validity for one view.
#[derive(Clone, Debug)]
pub struct ViewOcclusion {
    /// M in [0, 1] per pixel; 1 where the warp was invalid.
    pub map: Vec<f32>,
    /// w = 1 - M; 0 where the warp was invalid.
    pub weight: Vec<f32>,
    /// Validity inherited from warping.
    pub valid: BoolMap,
}

/// Per-view occlusion maps M and weights w = 1 - M over a U×V grid,
/// row-major with u as the slow axis. Immutable once built.
#[derive(Clone, Debug)]
pub struct OcclusionSet {
    nu: usize,
    nv: usize,
    width: usize,
    height: usize,
    views: Vec<ViewOcclusion>,
}

impl OcclusionSet {
    /// All-pass set: M = 0, w = 1 everywhere. Weighted matching against this
    /// set reproduces unweighted matching bit for bit.
    pub fn neutral(nu: usize, nv: usize, width: usize, height: usize) -> Self {
        let n = width * height;
        let views = (0..nu * nv)
            .map(|_| ViewOcclusion {
                map: vec![0.0; n],
                weight: vec![1.0; n],
                valid: BoolMap::filled(width, height, true),
            })
            .collect();
        Self { nu, nv, width, height, views }
    }

    pub fn angular(&self) -> (usize, usize) {
        (self.nu, self.nv)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn view(&self, index: usize) -> &ViewOcclusion {
        &self.views[index]
    }

    pub fn views(&self) -> &[ViewOcclusion] {
        &self.views
    }
}

/// Photo-consistency residual map between the center view and one warped side
/// view: M = clip(mean_c |center - warped|, 0, 1) where the warp is valid,
/// M = 1 elsewhere.
pub fn occlusion_map(center: ImageRef<'_>, warped: &WarpedView) -> Result<Vec<f32>> {
    let (w, h, c) = (center.width(), center.height(), center.channels());
    if warped.image.width() != w || warped.image.height() != h || warped.image.channels() != c {
        return Err(Error::ShapeMismatch {
            context: "occlusion_map",
            expected: format!("{}x{}x{}", w, h, c),
            got: format!(
                "{}x{}x{}",
                warped.image.width(),
                warped.image.height(),
                warped.image.channels()
            ),
        });
    }
    let mut map = vec![1.0f32; w * h];
    for y in 0..h {
        for x in 0..w {
            if !warped.valid.get(x, y) {
                continue;
            }
            let a = center.pixel(x, y);
            let b = warped.image.pixel(x, y);
            let mut acc = 0.0f32;
            for ch in 0..c {
                acc += (a[ch] - b[ch]).abs();
            }
            map[y * w + x] = (acc / c as f32).clamp(0.0, 1.0);
        }
    }
    Ok(map)
}

/// Matching weight from an occlusion map: w = 1 - M on valid pixels, 0 on
/// invalid ones.
pub fn occlusion_weights(map: &[f32], valid: &BoolMap) -> Vec<f32> {
    map.iter()
        .zip(valid.data())
        .map(|(&m, &ok)| if ok { 1.0 - m } else { 0.0 })
        .collect()
}

/// Warps every side view by the given disparity map and derives the full
/// occlusion set. The center view gets M = 0, w = 1.
pub fn build_occlusion_set(lf: &LightField, disp: &DisparityMap) -> Result<OcclusionSet> {
    let (nu, nv) = lf.angular();
    let (w, h) = (lf.width(), lf.height());
    if disp.width() != w || disp.height() != h {
        return Err(Error::ShapeMismatch {
            context: "build_occlusion_set",
            expected: format!("{}x{}", w, h),
            got: format!("{}x{}", disp.width(), disp.height()),
        });
    }
    let center = lf.center_view();
    let coords: Vec<_> = lf.angular_coords().collect();
    let views: Vec<ViewOcclusion> = coords
        .into_par_iter()
        .map(|a| -> Result<ViewOcclusion> {
            let baseline = lf.baseline(a)?;
            if baseline.is_center() {
                let n = w * h;
                return Ok(ViewOcclusion {
                    map: vec![0.0; n],
                    weight: vec![1.0; n],
                    valid: BoolMap::filled(w, h, true),
                });
            }
            let warped = warp_view(
                lf.view(a)?,
                baseline,
                DispField::PerPixel { map: disp, offset: 0.0 },
            )?;
            let map = occlusion_map(center, &warped)?;
            let weight = occlusion_weights(&map, &warped.valid);
            Ok(ViewOcclusion { map, weight, valid: warped.valid })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OcclusionSet { nu, nv, width: w, height: h, views })
}
