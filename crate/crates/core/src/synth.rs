//! Procedural light-field generator with exact ground-truth disparity and
//! per-view occlusion masks.
//!
//! Scenes are stacks of fronto-parallel layers. Each layer carries a texture
//! defined on the center view's coordinate frame, a disparity model (constant
//! or planar ramp), and an optional opacity mask. A view with baseline
//! (du, dv) sees the layer point (xc, yc) at (xc + d·du, yc + d·dv), so
//! rendering a view pixel solves that relation for (xc, yc) per layer,
//! front to back, and samples the first covering layer.
//!
//! Procedural textures are defined on the whole plane, so side views never
//! run out of texture; ramp textures are exactly linear, which makes
//! bilinear warps of the rendered views exact.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::{BoolMap, DisparityMap, Image};
use crate::lightfield::LightField;

/// Default suite resolution: 9×9 views of 128×128 pixels.
pub const SUITE_ANGULAR: usize = 9;
pub const SUITE_SPATIAL: usize = 128;

/// Texture of one scene layer, defined on center-view coordinates.
#[derive(Clone, Debug)]
pub enum Texture {
    /// Seeded lattice value noise: deterministic hash values on a grid of
    /// the given period, bilinearly interpolated, mapped to [lo, hi].
    /// Defined on the whole plane.
    ValueNoise { seed: u64, period: f32, lo: f32, hi: f32 },
    /// Exactly linear texture a·x + b·y + c. Defined on the whole plane;
    /// coefficients must keep values inside [0, 1] over every sampled
    /// position, which `SceneSpec::validate` checks.
    Ramp { a: f32, b: f32, c: f32 },
    Constant(f32),
    /// Explicit texture image, sampled bilinearly; positions outside the
    /// image leave the layer uncovered.
    Image(Image),
}

/// Per-layer disparity over center-view coordinates.
#[derive(Clone, Copy, Debug)]
pub enum DisparityModel {
    Constant(f32),
    /// d(x, y) = a·x + b·y + c.
    Ramp { a: f32, b: f32, c: f32 },
}

impl DisparityModel {
    #[inline]
    pub fn eval(&self, x: f32, y: f32) -> f32 {
        match *self {
            DisparityModel::Constant(d) => d,
            DisparityModel::Ramp { a, b, c } => a * x + b * y + c,
        }
    }
}

/// One fronto-parallel scene layer. `alpha` (center-view coordinates) limits
/// coverage; `None` covers wherever the texture is defined.
#[derive(Clone, Debug)]
pub struct Layer {
    pub texture: Texture,
    pub disparity: DisparityModel,
    pub alpha: Option<BoolMap>,
}

/// Declarative scene: layers listed front first, rendered over a U×V angular
/// grid at H×W spatial resolution.
#[derive(Clone, Debug)]
pub struct SceneSpec {
    pub layers: Vec<Layer>,
    pub nu: usize,
    pub nv: usize,
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    pub seed: u64,
}

/// Exact ground truth for a generated scene.
#[derive(Clone, Debug)]
pub struct GroundTruth {
    /// Front-most visible layer's disparity per center-view pixel.
    pub disparity: DisparityMap,
    /// One mask per view (row-major over the angular grid): true where the
    /// center-view pixel's surface is hidden in that view.
    pub occlusion: Vec<BoolMap>,
}

/// Scene families of the standard suite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SceneFamily {
    /// Textured plane at one coarse-grid disparity.
    OnGridPlane,
    /// Textured plane at a disparity halfway between coarse samples.
    OffGridPlane,
    /// Foreground square over a background plane.
    TwoLayer,
    /// Disparity varies linearly across the image.
    DisparityRamp,
    /// Constant color; matching is ambiguous everywhere.
    Constant,
}

/// A generated suite member.
#[derive(Clone, Debug)]
pub struct SuiteScene {
    pub name: String,
    pub family: SceneFamily,
    pub spec: SceneSpec,
    pub lf: LightField,
    pub truth: GroundTruth,
}

// splitmix64 finalizer over the lattice coordinates; stable across platforms.
#[inline]
fn lattice_hash(seed: u64, ix: i64, iy: i64) -> f32 {
    let mut h = seed
        ^ (ix as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (iy as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    h ^= h >> 30;
    h = h.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    h ^= h >> 27;
    h = h.wrapping_mul(0x94D0_49BB_1331_11EB);
    h ^= h >> 31;
    ((h >> 40) as f32) / ((1u64 << 24) as f32)
}

fn value_noise(seed: u64, period: f32, x: f32, y: f32) -> f32 {
    let gx = x / period;
    let gy = y / period;
    let ix = gx.floor();
    let iy = gy.floor();
    let fx = gx - ix;
    let fy = gy - iy;
    let (ix, iy) = (ix as i64, iy as i64);
    let v00 = lattice_hash(seed, ix, iy);
    let v10 = lattice_hash(seed, ix + 1, iy);
    let v01 = lattice_hash(seed, ix, iy + 1);
    let v11 = lattice_hash(seed, ix + 1, iy + 1);
    let top = v00 * (1.0 - fx) + v10 * fx;
    let bottom = v01 * (1.0 - fx) + v11 * fx;
    top * (1.0 - fy) + bottom * fy
}

impl Texture {
    /// Samples the texture at a continuous position; `None` when uncovered.
    fn sample(&self, x: f32, y: f32, channel: usize) -> Option<f32> {
        match self {
            Texture::ValueNoise { seed, period, lo, hi } => {
                let t = value_noise(*seed, *period, x, y);
                Some(lo + t * (hi - lo))
            }
            Texture::Ramp { a, b, c } => Some(a * x + b * y + c),
            Texture::Constant(v) => Some(*v),
            Texture::Image(img) => {
                let w = img.width();
                let h = img.height();
                if !(x >= 0.0 && x <= (w - 1) as f32 && y >= 0.0 && y <= (h - 1) as f32) {
                    return None;
                }
                let x0 = x.floor() as usize;
                let y0 = y.floor() as usize;
                let x1 = (x0 + 1).min(w - 1);
                let y1 = (y0 + 1).min(h - 1);
                let fx = x - x0 as f32;
                let fy = y - y0 as f32;
                let c = channel.min(img.channels() - 1);
                let top = img.get(x0, y0, c) * (1.0 - fx) + img.get(x1, y0, c) * fx;
                let bottom = img.get(x0, y1, c) * (1.0 - fx) + img.get(x1, y1, c) * fx;
                Some(top * (1.0 - fy) + bottom * fy)
            }
        }
    }
}

impl Layer {
    /// Center-view coordinates seen at view position (xq, yq) under this
    /// layer's disparity model, or `None` when the model degenerates.
    fn preimage(&self, du: f32, dv: f32, xq: f32, yq: f32) -> Option<(f32, f32)> {
        match self.disparity {
            DisparityModel::Constant(d) => Some((xq - d * du, yq - d * dv)),
            DisparityModel::Ramp { a, b, c } => {
                // Solve xc + d(xc,yc)·du = xq, yc + d(xc,yc)·dv = yq.
                let m11 = 1.0 + a * du;
                let m12 = b * du;
                let m21 = a * dv;
                let m22 = 1.0 + b * dv;
                let det = m11 * m22 - m12 * m21;
                if det.abs() < 1e-4 {
                    return None;
                }
                let r1 = xq - c * du;
                let r2 = yq - c * dv;
                Some(((r1 * m22 - m12 * r2) / det, (m11 * r2 - r1 * m21) / det))
            }
        }
    }

    /// Whether the layer covers the center-view position (xc, yc), using a
    /// nearest-pixel test on the opacity mask.
    fn covers(&self, xc: f32, yc: f32) -> bool {
        let texture_covers = match &self.texture {
            Texture::Image(img) => {
                xc >= 0.0
                    && xc <= (img.width() - 1) as f32
                    && yc >= 0.0
                    && yc <= (img.height() - 1) as f32
            }
            _ => true,
        };
        if !texture_covers {
            return false;
        }
        match &self.alpha {
            None => true,
            Some(mask) => {
                let xi = xc.round();
                let yi = yc.round();
                if xi < 0.0 || yi < 0.0 || xi >= mask.width() as f32 || yi >= mask.height() as f32 {
                    return false;
                }
                mask.get(xi as usize, yi as usize)
            }
        }
    }
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::InvalidArgument("scene needs at least one layer".into()));
        }
        if self.nu % 2 == 0 || self.nv % 2 == 0 || self.nu == 0 || self.nv == 0 {
            return Err(Error::InvalidArgument(format!(
                "angular resolution must be odd, got {}x{}",
                self.nu, self.nv
            )));
        }
        if self.height == 0 || self.width == 0 || self.channels == 0 {
            return Err(Error::InvalidArgument("spatial dimensions must be nonzero".into()));
        }
        let max_du = (self.nu / 2) as f32;
        let max_dv = (self.nv / 2) as f32;
        for (i, layer) in self.layers.iter().enumerate() {
            // Largest texture-space excursion any view can request.
            let dmax = match layer.disparity {
                DisparityModel::Constant(d) => {
                    if !d.is_finite() {
                        return Err(Error::InvalidArgument(format!(
                            "layer {} has non-finite disparity",
                            i
                        )));
                    }
                    d.abs()
                }
                DisparityModel::Ramp { a, b, c } => {
                    let corners = [
                        c,
                        a * (self.width - 1) as f32 + c,
                        b * (self.height - 1) as f32 + c,
                        a * (self.width - 1) as f32 + b * (self.height - 1) as f32 + c,
                    ];
                    if corners.iter().any(|v| !v.is_finite()) {
                        return Err(Error::InvalidArgument(format!(
                            "layer {} has non-finite disparity",
                            i
                        )));
                    }
                    // Preimage positions stay near the view frustum; double the
                    // corner extremum is a conservative bound on the excursion.
                    2.0 * corners.iter().fold(0.0f32, |m, v| m.max(v.abs()))
                }
            };
            let margin_x = dmax * max_du + 2.0;
            let margin_y = dmax * max_dv + 2.0;
            if let Texture::Ramp { a, b, c } = layer.texture {
                let xs = [-margin_x, (self.width - 1) as f32 + margin_x];
                let ys = [-margin_y, (self.height - 1) as f32 + margin_y];
                for &x in &xs {
                    for &y in &ys {
                        let v = a * x + b * y + c;
                        if !(0.0..=1.0).contains(&v) {
                            return Err(Error::InvalidArgument(format!(
                                "layer {} ramp texture leaves [0,1] (value {} at ({}, {}))",
                                i, v, x, y
                            )));
                        }
                    }
                }
            }
            if let Texture::Constant(v) = layer.texture {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidArgument(format!(
                        "layer {} constant texture {} outside [0,1]",
                        i, v
                    )));
                }
            }
            if let Texture::ValueNoise { lo, hi, period, .. } = layer.texture {
                if !(0.0 <= lo && lo < hi && hi <= 1.0) || !(period > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "layer {} noise parameters out of range",
                        i
                    )));
                }
            }
        }
        Ok(())
    }

    /// Front-most covering layer index at an exact center-view pixel.
    fn visible_layer(&self, x: usize, y: usize) -> Option<usize> {
        self.layers
            .iter()
            .position(|layer| layer.covers(x as f32, y as f32))
    }
}

/// Renders the scene into a light field plus exact ground truth.
pub fn generate_lf(spec: &SceneSpec) -> Result<(LightField, GroundTruth)> {
    spec.validate()?;
    let (h, w, c) = (spec.height, spec.width, spec.channels);
    let uc = (spec.nu - 1) as f32 / 2.0;
    let vc = (spec.nv - 1) as f32 / 2.0;

    let views: Vec<Image> = (0..spec.nu * spec.nv)
        .into_par_iter()
        .map(|i| {
            let du = (i / spec.nv) as f32 - uc;
            let dv = (i % spec.nv) as f32 - vc;
            let mut img = Image::zeros(w, h, c);
            for y in 0..h {
                for x in 0..w {
                    for layer in &spec.layers {
                        let Some((xc, yc)) = layer.preimage(du, dv, x as f32, y as f32) else {
                            continue;
                        };
                        if !layer.covers(xc, yc) {
                            continue;
                        }
                        for ch in 0..c {
                            let v = layer
                                .texture
                                .sample(xc, yc, ch)
                                .expect("covered layer must sample")
                                .clamp(0.0, 1.0);
                            img.set(x, y, ch, v);
                        }
                        break;
                    }
                }
            }
            img
        })
        .collect();

    // Ground-truth disparity: front-most visible layer per center pixel.
    let mut gt = DisparityMap::constant(w, h, 0.0);
    for y in 0..h {
        for x in 0..w {
            match spec.visible_layer(x, y) {
                Some(li) => gt.set(x, y, spec.layers[li].disparity.eval(x as f32, y as f32), true),
                None => gt.set(x, y, 0.0, false),
            }
        }
    }

    // Ground-truth occlusion: center pixel's surface hidden behind a
    // strictly nearer layer in the given view.
    let occlusion: Vec<BoolMap> = (0..spec.nu * spec.nv)
        .into_par_iter()
        .map(|i| {
            let du = (i / spec.nv) as f32 - uc;
            let dv = (i % spec.nv) as f32 - vc;
            let mut mask = BoolMap::filled(w, h, false);
            if du == 0.0 && dv == 0.0 {
                return mask;
            }
            for y in 0..h {
                for x in 0..w {
                    let Some(li) = spec.visible_layer(x, y) else {
                        continue;
                    };
                    let d = spec.layers[li].disparity.eval(x as f32, y as f32);
                    let qx = x as f32 + d * du;
                    let qy = y as f32 + d * dv;
                    let occluded = spec.layers[..li].iter().any(|front| {
                        front
                            .preimage(du, dv, qx, qy)
                            .map(|(xc, yc)| front.covers(xc, yc))
                            .unwrap_or(false)
                    });
                    if occluded {
                        mask.set(x, y, true);
                    }
                }
            }
            mask
        })
        .collect();

    let lf = LightField::from_views(spec.nu, spec.nv, views)?;
    Ok((lf, GroundTruth { disparity: gt, occlusion }))
}

fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut h = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    h ^= h >> 33;
    h = h.wrapping_mul(0xFF51_AFD7_ED55_8CCD);
    h ^= h >> 33;
    h
}

fn noise_layer(seed: u64, disparity: DisparityModel, lo: f32, hi: f32) -> Layer {
    Layer {
        texture: Texture::ValueNoise { seed, period: 5.0, lo, hi },
        disparity,
        alpha: None,
    }
}

fn plane_spec(seed: u64, d: f32) -> SceneSpec {
    SceneSpec {
        layers: vec![noise_layer(seed, DisparityModel::Constant(d), 0.05, 0.95)],
        nu: SUITE_ANGULAR,
        nv: SUITE_ANGULAR,
        height: SUITE_SPATIAL,
        width: SUITE_SPATIAL,
        channels: 1,
        seed,
    }
}

/// Off-grid plane disparity used by the suite: one coarse step of 1/4 plus
/// half of it, so it sits exactly between two coarse samples.
pub const OFF_GRID_DISPARITY: f32 = 0.625;

/// Two-layer suite scene geometry: a 48×48 foreground square at disparity 2
/// over a background plane at disparity 0.
pub const TWO_LAYER_FRONT_DISPARITY: f32 = 2.0;
pub const TWO_LAYER_BACK_DISPARITY: f32 = 0.0;
pub const TWO_LAYER_SQUARE_MIN: usize = 40;
pub const TWO_LAYER_SQUARE_MAX: usize = 88; // exclusive

/// Builds the two-layer occlusion scene. The layers' intensity ranges are
/// far apart, so wherever a warp lands on the wrong surface the
/// photo-consistency residual is at least 0.5.
pub fn two_layer_spec(seed: u64) -> SceneSpec {
    let square = BoolMap::from_fn(SUITE_SPATIAL, SUITE_SPATIAL, |x, y| {
        (TWO_LAYER_SQUARE_MIN..TWO_LAYER_SQUARE_MAX).contains(&x)
            && (TWO_LAYER_SQUARE_MIN..TWO_LAYER_SQUARE_MAX).contains(&y)
    });
    SceneSpec {
        layers: vec![
            Layer {
                texture: Texture::ValueNoise {
                    seed: mix_seed(seed, 2001),
                    period: 3.5,
                    lo: 0.75,
                    hi: 1.0,
                },
                disparity: DisparityModel::Constant(TWO_LAYER_FRONT_DISPARITY),
                alpha: Some(square),
            },
            Layer {
                texture: Texture::ValueNoise {
                    seed: mix_seed(seed, 2002),
                    period: 3.5,
                    lo: 0.0,
                    hi: 0.25,
                },
                disparity: DisparityModel::Constant(TWO_LAYER_BACK_DISPARITY),
                alpha: None,
            },
        ],
        nu: SUITE_ANGULAR,
        nv: SUITE_ANGULAR,
        height: SUITE_SPATIAL,
        width: SUITE_SPATIAL,
        channels: 1,
        seed,
    }
}

/// Deterministic standard suite: (a) a textured plane at each coarse-grid
/// disparity of the default [-4, 4] @ 1/4 sweep, (b) a plane at the off-grid
/// disparity 0.625, (c) the two-layer occlusion scene, (d) a disparity ramp,
/// (e) a constant-color degenerate scene. The same seed reproduces the suite
/// bit for bit.
pub fn standard_suite(seed: u64) -> Vec<SuiteScene> {
    let mut scenes = Vec::new();

    for k in 0..33u64 {
        let d = -4.0 + 0.25 * k as f32;
        let spec = plane_spec(mix_seed(seed, 100 + k), d);
        let sign = if d < 0.0 { "m" } else { "p" };
        let name = format!("plane_{}{:03}", sign, (d.abs() * 100.0).round() as u32);
        scenes.push(build_scene(name, SceneFamily::OnGridPlane, spec));
    }

    let spec = plane_spec(mix_seed(seed, 1001), OFF_GRID_DISPARITY);
    scenes.push(build_scene("plane_offgrid".into(), SceneFamily::OffGridPlane, spec));

    scenes.push(build_scene("two_layer".into(), SceneFamily::TwoLayer, two_layer_spec(seed)));

    let ramp_spec = SceneSpec {
        layers: vec![noise_layer(
            mix_seed(seed, 3001),
            DisparityModel::Ramp {
                a: 2.0 / (SUITE_SPATIAL - 1) as f32,
                b: 0.0,
                c: -1.0,
            },
            0.05,
            0.95,
        )],
        nu: SUITE_ANGULAR,
        nv: SUITE_ANGULAR,
        height: SUITE_SPATIAL,
        width: SUITE_SPATIAL,
        channels: 1,
        seed,
    };
    scenes.push(build_scene("disp_ramp".into(), SceneFamily::DisparityRamp, ramp_spec));

    let flat_spec = SceneSpec {
        layers: vec![Layer {
            texture: Texture::Constant(0.5),
            disparity: DisparityModel::Constant(0.7),
            alpha: None,
        }],
        nu: SUITE_ANGULAR,
        nv: SUITE_ANGULAR,
        height: SUITE_SPATIAL,
        width: SUITE_SPATIAL,
        channels: 1,
        seed,
    };
    scenes.push(build_scene("flat_color".into(), SceneFamily::Constant, flat_spec));

    scenes
}

fn build_scene(name: String, family: SceneFamily, spec: SceneSpec) -> SuiteScene {
    let (lf, truth) = generate_lf(&spec).expect("suite scene specs are valid");
    SuiteScene { name, family, spec, lf, truth }
}

/// Number of distinct scene families in the standard suite.
pub const SUITE_FAMILY_COUNT: usize = 5;
