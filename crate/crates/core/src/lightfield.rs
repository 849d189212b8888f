//! 4D light-field data model under the two-plane parameterization, with the
//! three canonical 2D slices: sub-aperture views, epipolar-plane images and
//! macro-pixels (angular patches).
//!
//! A `LightField` stores intensities L(u, v, y, x, c) in a single tensor with
//! memory order (u, v, y, x, c), x fastest among the spatial axes. All
//! intensities are normalized to [0, 1] and the angular grid is odd in both
//! directions so a center view exists.
//!
//! Disparity sign convention, fixed project-wide: a scene point seen at (x, y)
//! in the center view appears at (x + d·du, y + d·dv) in the view with
//! baseline (du, dv) = (u - u_center, v - v_center).

use crate::error::{Error, Result};
use crate::image::{Image, ImageRef};

/// Angular position of one view in the U×V grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AngularCoord {
    /// View row index, 0..U-1.
    pub u: usize,
    /// View column index, 0..V-1.
    pub v: usize,
}

impl AngularCoord {
    pub fn new(u: usize, v: usize) -> Self {
        Self { u, v }
    }
}

/// Signed angular offset of a view from the center view, in view units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Baseline {
    pub du: f32,
    pub dv: f32,
}

impl Baseline {
    pub fn is_center(&self) -> bool {
        self.du == 0.0 && self.dv == 0.0
    }
}

/// Selects an epipolar-plane slice of the 4D tensor.
#[derive(Clone, Copy, Debug)]
pub enum EpiFixed {
    /// Fix (v, y); the slice varies over (u, x) and has shape U×W×C.
    Horizontal { v: usize, y: usize },
    /// Fix (u, x); the slice varies over (v, y) and has shape V×H×C.
    Vertical { u: usize, x: usize },
}

/// Immutable 4D intensity tensor indexed by angular (u, v) and spatial (x, y)
/// coordinates. The single source of pixel data for the pipeline.
#[derive(Clone, Debug)]
pub struct LightField {
    nu: usize,
    nv: usize,
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f32>,
}

impl LightField {
    /// Wraps a (u, v, y, x, c)-ordered tensor. Angular dimensions must be odd
    /// and every intensity must lie in [0, 1].
    pub fn from_data(
        nu: usize,
        nv: usize,
        height: usize,
        width: usize,
        channels: usize,
        data: Vec<f32>,
    ) -> Result<Self> {
        if nu == 0 || nv == 0 || nu % 2 == 0 || nv % 2 == 0 {
            return Err(Error::InvalidArgument(format!(
                "angular resolution must be odd and nonzero, got {}x{}",
                nu, nv
            )));
        }
        if height == 0 || width == 0 || channels == 0 {
            return Err(Error::InvalidArgument(format!(
                "spatial dimensions must be nonzero, got {}x{}x{}",
                height, width, channels
            )));
        }
        let expected = nu * nv * height * width * channels;
        if data.len() != expected {
            return Err(Error::ShapeMismatch {
                context: "LightField::from_data",
                expected: format!("{} values", expected),
                got: format!("{}", data.len()),
            });
        }
        if let Some(bad) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidArgument(format!(
                "intensity {} outside [0, 1]",
                bad
            )));
        }
        Ok(Self { nu, nv, height, width, channels, data })
    }

    /// Assembles a light field from per-view images ordered row-major over
    /// the angular grid (index = u·V + v).
    pub fn from_views(nu: usize, nv: usize, views: Vec<Image>) -> Result<Self> {
        if views.len() != nu * nv {
            return Err(Error::ShapeMismatch {
                context: "LightField::from_views",
                expected: format!("{} views", nu * nv),
                got: format!("{}", views.len()),
            });
        }
        let (h, w, c) = (views[0].height(), views[0].width(), views[0].channels());
        let mut data = Vec::with_capacity(nu * nv * h * w * c);
        for (i, view) in views.iter().enumerate() {
            if view.height() != h || view.width() != w || view.channels() != c {
                return Err(Error::ShapeMismatch {
                    context: "LightField::from_views",
                    expected: format!("{}x{}x{}", h, w, c),
                    got: format!(
                        "{}x{}x{} at view {}",
                        view.height(),
                        view.width(),
                        view.channels(),
                        i
                    ),
                });
            }
            data.extend_from_slice(view.data());
        }
        Self::from_data(nu, nv, h, w, c, data)
    }

    #[inline]
    pub fn angular(&self) -> (usize, usize) {
        (self.nu, self.nv)
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.channels
    }

    /// Number of views.
    #[inline]
    pub fn view_count(&self) -> usize {
        self.nu * self.nv
    }

    pub fn center(&self) -> AngularCoord {
        AngularCoord::new((self.nu - 1) / 2, (self.nv - 1) / 2)
    }

    pub fn in_bounds(&self, a: AngularCoord) -> bool {
        a.u < self.nu && a.v < self.nv
    }

    /// Signed offset of view `a` from the center view.
    pub fn baseline(&self, a: AngularCoord) -> Result<Baseline> {
        if !self.in_bounds(a) {
            return Err(Error::AngularOutOfBounds { u: a.u, v: a.v, nu: self.nu, nv: self.nv });
        }
        let c = self.center();
        Ok(Baseline {
            du: a.u as f32 - c.u as f32,
            dv: a.v as f32 - c.v as f32,
        })
    }

    /// The sub-aperture view at (u, v), borrowed without copying.
    pub fn view(&self, a: AngularCoord) -> Result<ImageRef<'_>> {
        if !self.in_bounds(a) {
            return Err(Error::AngularOutOfBounds { u: a.u, v: a.v, nu: self.nu, nv: self.nv });
        }
        let stride = self.height * self.width * self.channels;
        let start = (a.u * self.nv + a.v) * stride;
        ImageRef::new(self.width, self.height, self.channels, &self.data[start..start + stride])
    }

    pub fn center_view(&self) -> ImageRef<'_> {
        self.view(self.center()).expect("center view exists by construction")
    }

    /// Iterates the angular grid row-major, u as the slow axis.
    pub fn angular_coords(&self) -> impl Iterator<Item = AngularCoord> + '_ {
        let nv = self.nv;
        (0..self.nu * self.nv).map(move |i| AngularCoord::new(i / nv, i % nv))
    }

    /// Epipolar-plane image: a 2D slice fixing one angular and one spatial
    /// coordinate. Scene depth appears as line slope in the result.
    pub fn extract_epi(&self, fixed: EpiFixed) -> Result<Image> {
        match fixed {
            EpiFixed::Horizontal { v, y } => {
                if v >= self.nv {
                    return Err(Error::AngularOutOfBounds { u: 0, v, nu: self.nu, nv: self.nv });
                }
                if y >= self.height {
                    return Err(Error::SpatialOutOfBounds {
                        x: 0,
                        y,
                        width: self.width,
                        height: self.height,
                    });
                }
                let mut out = Image::zeros(self.width, self.nu, self.channels);
                for u in 0..self.nu {
                    let view = self.view(AngularCoord::new(u, v))?;
                    for x in 0..self.width {
                        for c in 0..self.channels {
                            out.set(x, u, c, view.get(x, y, c));
                        }
                    }
                }
                Ok(out)
            }
            EpiFixed::Vertical { u, x } => {
                if u >= self.nu {
                    return Err(Error::AngularOutOfBounds { u, v: 0, nu: self.nu, nv: self.nv });
                }
                if x >= self.width {
                    return Err(Error::SpatialOutOfBounds {
                        x,
                        y: 0,
                        width: self.width,
                        height: self.height,
                    });
                }
                let mut out = Image::zeros(self.height, self.nv, self.channels);
                for v in 0..self.nv {
                    let view = self.view(AngularCoord::new(u, v))?;
                    for y in 0..self.height {
                        for c in 0..self.channels {
                            out.set(y, v, c, view.get(x, y, c));
                        }
                    }
                }
                Ok(out)
            }
        }
    }

    /// Macro-pixel: the U×V angular patch at one spatial location.
    pub fn extract_macpi(&self, x: usize, y: usize) -> Result<Image> {
        if x >= self.width || y >= self.height {
            return Err(Error::SpatialOutOfBounds {
                x,
                y,
                width: self.width,
                height: self.height,
            });
        }
        let mut out = Image::zeros(self.nv, self.nu, self.channels);
        for a in self.angular_coords() {
            let view = self.view(a)?;
            for c in 0..self.channels {
                out.set(a.v, a.u, c, view.get(x, y, c));
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn make_lf(nu: usize, nv: usize, h: usize, w: usize, c: usize) -> LightField {
        let n = nu * nv * h * w * c;
        let data: Vec<f32> = (0..n).map(|i| (i % 97) as f32 / 96.0).collect();
        LightField::from_data(nu, nv, h, w, c, data).unwrap()
    }

    #[test]
    fn center_of_odd_grid() {
        let lf = make_lf(9, 9, 4, 4, 1);
        assert_eq!(lf.center(), AngularCoord::new(4, 4));
    }

    #[test]
    fn view_shape_and_bounds() {
        let lf = make_lf(9, 9, 6, 5, 3);
        let v = lf.view(AngularCoord::new(0, 0)).unwrap();
        assert_eq!((v.width(), v.height(), v.channels()), (5, 6, 3));
        assert!(matches!(
            lf.view(AngularCoord::new(9, 0)),
            Err(Error::AngularOutOfBounds { .. })
        ));
    }

    #[test]
    fn even_angular_grid_rejected() {
        assert!(LightField::from_data(2, 3, 1, 1, 1, vec![0.0; 6]).is_err());
    }

    #[test]
    fn out_of_range_intensity_rejected() {
        assert!(LightField::from_data(1, 1, 1, 2, 1, vec![0.5, 1.5]).is_err());
    }

    #[test]
    fn view_matches_direct_tensor_indexing() {
        let lf = make_lf(3, 3, 4, 4, 2);
        let c = lf.center();
        let view = lf.view(c).unwrap();
        for y in 0..4 {
            for x in 0..4 {
                for ch in 0..2 {
                    let direct = (((c.u * 3 + c.v) * 4 + y) * 4 + x) * 2 + ch;
                    assert_eq!(view.get(x, y, ch), lf.data[direct]);
                }
            }
        }
    }

    #[test]
    fn epi_and_macpi_agree_with_brute_force_slicing() {
        let lf = make_lf(3, 3, 4, 4, 1);
        for v in 0..3 {
            for y in 0..4 {
                let epi = lf.extract_epi(EpiFixed::Horizontal { v, y }).unwrap();
                assert_eq!((epi.width(), epi.height()), (4, 3));
                for u in 0..3 {
                    for x in 0..4 {
                        assert_eq!(epi.get(x, u, 0), lf.view(AngularCoord::new(u, v)).unwrap().get(x, y, 0));
                    }
                }
            }
        }
        for u in 0..3 {
            for x in 0..4 {
                let epi = lf.extract_epi(EpiFixed::Vertical { u, x }).unwrap();
                assert_eq!((epi.width(), epi.height()), (4, 3));
                for v in 0..3 {
                    for y in 0..4 {
                        assert_eq!(epi.get(y, v, 0), lf.view(AngularCoord::new(u, v)).unwrap().get(x, y, 0));
                    }
                }
            }
        }
        for y in 0..4 {
            for x in 0..4 {
                let mp = lf.extract_macpi(x, y).unwrap();
                assert_eq!((mp.width(), mp.height()), (3, 3));
                for a in lf.angular_coords() {
                    assert_eq!(mp.get(a.v, a.u, 0), lf.view(a).unwrap().get(x, y, 0));
                }
            }
        }
    }

    #[test]
    fn epi_shape_contract() {
        let lf = make_lf(9, 9, 16, 16, 1);
        let epi = lf.extract_epi(EpiFixed::Horizontal { v: 4, y: 7 }).unwrap();
        assert_eq!((epi.height(), epi.width(), epi.channels()), (9, 16, 1));
    }

    #[test]
    fn macpi_shape_contract() {
        let lf = make_lf(9, 9, 8, 8, 3);
        let mp = lf.extract_macpi(3, 2).unwrap();
        assert_eq!((mp.height(), mp.width(), mp.channels()), (9, 9, 3));
        assert!(lf.extract_macpi(8, 0).is_err());
    }

    #[test]
    fn constant_lf_has_constant_macpi() {
        let lf = LightField::from_data(3, 3, 2, 2, 1, vec![0.25; 36]).unwrap();
        let mp = lf.extract_macpi(1, 1).unwrap();
        assert!(mp.data().iter().all(|&v| v == 0.25));
    }

    #[test]
    fn baselines_sum_to_zero_over_odd_grid() {
        let lf = make_lf(9, 7, 2, 2, 1);
        let (mut su, mut sv) = (0.0f32, 0.0f32);
        for a in lf.angular_coords() {
            let b = lf.baseline(a).unwrap();
            su += b.du;
            sv += b.dv;
        }
        assert_eq!(su, 0.0);
        assert_eq!(sv, 0.0);
    }
}
