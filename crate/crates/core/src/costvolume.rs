//! Plane-sweep cost volumes: per-candidate, per-pixel matching costs built by
//! shifting side-view features toward the center view, plus spatial
//! aggregation.
//!
//! The matching cost is the per-view mean absolute feature difference,
//! averaged over the views whose warp taps stayed in frame. Border pixels
//! where views drop out are normalized by the surviving view count so they do
//! not look artificially cheap; pixels with no valid side view at a candidate
//! get the sentinel cost 1.0 and minimal support.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::{DisparityMap, Image};
use crate::lightfield::{Baseline, LightField};
use crate::occlusion::OcclusionSet;
use crate::warp::{warp_view, DispField};

/// Cost assigned where no side view contributes.
pub const COST_SENTINEL: f32 = 1.0;

/// Support recorded where no side view contributes. Real support is at least
/// 1/(view count), well above this floor, so `support > MIN_SUPPORT` is the
/// per-cell evidence test.
pub const MIN_SUPPORT: f32 = 1e-3;

/// Ordered set of candidate disparities d_k = min + k·interval.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplingGrid {
    min: f64,
    max: f64,
    interval: f64,
    count: usize,
}

impl SamplingGrid {
    /// The interval must divide the range to within 1e-9 of an integer step
    /// count.
    pub fn new(min: f64, max: f64, interval: f64) -> Result<Self> {
        if !min.is_finite() || !max.is_finite() || !interval.is_finite() {
            return Err(Error::InvalidConfig("non-finite sampling grid bounds".into()));
        }
        if interval <= 0.0 {
            return Err(Error::InvalidConfig(format!("interval must be positive, got {}", interval)));
        }
        if max < min {
            return Err(Error::InvalidConfig(format!("empty disparity range [{}, {}]", min, max)));
        }
        let ratio = (max - min) / interval;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::InvalidConfig(format!(
                "interval {} does not divide range [{}, {}]",
                interval, min, max
            )));
        }
        let count = ((max - min) / interval + 0.5).floor() as usize + 1;
        Ok(Self { min, max, interval, count })
    }

    #[inline]
    pub fn min(&self) -> f64 {
        self.min
    }

    #[inline]
    pub fn max(&self) -> f64 {
        self.max
    }

    #[inline]
    pub fn interval(&self) -> f64 {
        self.interval
    }

    #[inline]
    pub fn count(&self) -> usize {
        self.count
    }

    #[inline]
    pub fn sample(&self, k: usize) -> f64 {
        debug_assert!(k < self.count);
        self.min + k as f64 * self.interval
    }

    pub fn samples(&self) -> Vec<f64> {
        (0..self.count).map(|k| self.sample(k)).collect()
    }

    /// Midpoint of the range.
    pub fn midpoint(&self) -> f64 {
        (self.min + self.max) / 2.0
    }
}

/// Which per-view features drive the matching cost.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FeatureKind {
    /// Raw intensity channels only.
    Intensity,
    /// Intensity channels plus central-difference gradients per channel.
    IntensityGradient,
}

/// Per-view feature maps plus baselines, extracted once and shared by both
/// sweep stages.
#[derive(Clone, Debug)]
pub struct FeatureStack {
    views: Vec<Image>,
    baselines: Vec<Baseline>,
    nu: usize,
    nv: usize,
    center_index: usize,
}

impl FeatureStack {
    pub fn angular(&self) -> (usize, usize) {
        (self.nu, self.nv)
    }

    pub fn width(&self) -> usize {
        self.views[0].width()
    }

    pub fn height(&self) -> usize {
        self.views[0].height()
    }

    /// Feature channels per view.
    pub fn channels(&self) -> usize {
        self.views[0].channels()
    }

    pub fn view(&self, index: usize) -> &Image {
        &self.views[index]
    }

    pub fn baseline(&self, index: usize) -> Baseline {
        self.baselines[index]
    }

    pub fn center_index(&self) -> usize {
        self.center_index
    }

    pub fn view_count(&self) -> usize {
        self.views.len()
    }
}

/// Deterministic classical features: the intensity channels and, optionally,
/// horizontal/vertical gradients (central differences inside, one-sided at
/// the borders).
pub fn extract_features(lf: &LightField, kind: FeatureKind) -> FeatureStack {
    let (nu, nv) = lf.angular();
    let (w, h, c) = (lf.width(), lf.height(), lf.channels());
    let coords: Vec<_> = lf.angular_coords().collect();
    let views: Vec<Image> = coords
        .par_iter()
        .map(|&a| {
            let view = lf.view(a).expect("angular_coords stays in bounds");
            match kind {
                FeatureKind::Intensity => view.to_image(),
                FeatureKind::IntensityGradient => {
                    let mut out = Image::zeros(w, h, 3 * c);
                    for y in 0..h {
                        for x in 0..w {
                            for ch in 0..c {
                                out.set(x, y, ch, view.get(x, y, ch));
                                let (xl, xr, dxn) = if x == 0 {
                                    (0, 1.min(w - 1), 1.0f32.min((w - 1) as f32))
                                } else if x == w - 1 {
                                    (x - 1, x, 1.0)
                                } else {
                                    (x - 1, x + 1, 2.0)
                                };
                                let gx = if w == 1 {
                                    0.0
                                } else {
                                    (view.get(xr, y, ch) - view.get(xl, y, ch)) / dxn
                                };
                                let (yl, yr, dyn_) = if y == 0 {
                                    (0, 1.min(h - 1), 1.0f32.min((h - 1) as f32))
                                } else if y == h - 1 {
                                    (y - 1, y, 1.0)
                                } else {
                                    (y - 1, y + 1, 2.0)
                                };
                                let gy = if h == 1 {
                                    0.0
                                } else {
                                    (view.get(x, yr, ch) - view.get(x, yl, ch)) / dyn_
                                };
                                out.set(x, y, c + ch, gx);
                                out.set(x, y, 2 * c + ch, gy);
                            }
                        }
                    }
                    out
                }
            }
        })
        .collect();
    let baselines = coords
        .iter()
        .map(|&a| lf.baseline(a).expect("in bounds"))
        .collect();
    let center = lf.center();
    FeatureStack {
        views,
        baselines,
        nu,
        nv,
        center_index: center.u * nv + center.v,
    }
}

/// Per-candidate, per-pixel matching costs. `support` records the fraction of
/// side views (weighted, for the occlusion-aware volume) that contributed to
/// each cell.
#[derive(Clone, Debug)]
pub struct CostVolume {
    grid: SamplingGrid,
    width: usize,
    height: usize,
    costs: Vec<f32>,
    support: Vec<f32>,
}

impl CostVolume {
    pub fn grid(&self) -> &SamplingGrid {
        &self.grid
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Number of disparity slices.
    pub fn depth(&self) -> usize {
        self.grid.count()
    }

    #[inline]
    pub fn cost(&self, k: usize, x: usize, y: usize) -> f32 {
        self.costs[(k * self.height + y) * self.width + x]
    }

    #[inline]
    pub fn support(&self, k: usize, x: usize, y: usize) -> f32 {
        self.support[(k * self.height + y) * self.width + x]
    }

    pub fn slice(&self, k: usize) -> &[f32] {
        let n = self.width * self.height;
        &self.costs[k * n..(k + 1) * n]
    }

    pub fn support_slice(&self, k: usize) -> &[f32] {
        let n = self.width * self.height;
        &self.support[k * n..(k + 1) * n]
    }

    pub fn costs(&self) -> &[f32] {
        &self.costs
    }

    /// True when some candidate at this pixel saw real evidence.
    pub fn pixel_has_support(&self, x: usize, y: usize) -> bool {
        (0..self.depth()).any(|k| self.support(k, x, y) > MIN_SUPPORT)
    }

    /// Index of the cheapest candidate per pixel.
    pub fn argmin(&self, x: usize, y: usize) -> usize {
        let mut best = 0;
        let mut best_cost = f32::INFINITY;
        for k in 0..self.depth() {
            let c = self.cost(k, x, y);
            if c < best_cost {
                best_cost = c;
                best = k;
            }
        }
        best
    }

    /// Test-support constructor for synthetic volumes; support defaults to 1.
    pub fn from_costs(grid: SamplingGrid, width: usize, height: usize, costs: Vec<f32>) -> Result<Self> {
        if costs.len() != grid.count() * width * height {
            return Err(Error::ShapeMismatch {
                context: "CostVolume::from_costs",
                expected: format!("{} cells", grid.count() * width * height),
                got: format!("{}", costs.len()),
            });
        }
        let support = vec![1.0; costs.len()];
        Ok(Self { grid, width, height, costs, support })
    }
}

struct SliceAccum {
    cost: Vec<f32>,
    support: Vec<f32>,
}

/// Shared slice accumulation for both sweep stages. `weights` is one weight
/// map per view (center skipped); `None` means unweighted. Accumulation order
/// over views is fixed by view index, so results do not depend on the thread
/// count.
fn accumulate_slice(
    feat: &FeatureStack,
    disp_of_view: &dyn Fn(usize) -> Result<crate::warp::WarpedView>,
    weights: Option<&OcclusionSet>,
) -> Result<SliceAccum> {
    let (w, h) = (feat.width(), feat.height());
    let f = feat.channels();
    let n = w * h;
    let n_side = feat.view_count() - 1;
    let center = feat.view(feat.center_index());
    let mut acc = vec![0.0f64; n];
    let mut wsum = vec![0.0f64; n];
    for vi in 0..feat.view_count() {
        if vi == feat.center_index() {
            continue;
        }
        let warped = disp_of_view(vi)?;
        let view_weights = weights.map(|occ| &occ.view(vi).weight);
        for y in 0..h {
            for x in 0..w {
                if !warped.valid.get(x, y) {
                    continue;
                }
                let i = y * w + x;
                let weight = match view_weights {
                    Some(vw) => vw[i] as f64,
                    None => 1.0,
                };
                if weight <= 0.0 {
                    continue;
                }
                let a = center.pixel(x, y);
                let b = warped.image.pixel(x, y);
                let mut diff = 0.0f64;
                for ch in 0..f {
                    diff += (a[ch] - b[ch]).abs() as f64;
                }
                acc[i] += weight * diff;
                wsum[i] += weight;
            }
        }
    }
    let mut cost = vec![0.0f32; n];
    let mut support = vec![0.0f32; n];
    for i in 0..n {
        if wsum[i] > 0.0 {
            cost[i] = (acc[i] / (wsum[i] * f as f64)) as f32;
            support[i] = ((wsum[i] / n_side as f64) as f32).max(MIN_SUPPORT);
        } else {
            cost[i] = COST_SENTINEL;
            support[i] = MIN_SUPPORT;
        }
    }
    Ok(SliceAccum { cost, support })
}

/// Sweeps the candidate grid, warping every side view by each constant
/// disparity and accumulating absolute feature differences against the
/// center view.
pub fn build_coarse_volume(feat: &FeatureStack, grid: &SamplingGrid) -> Result<CostVolume> {
    if feat.view_count() < 2 {
        return Err(Error::InvalidArgument(
            "cost volume needs at least one side view".into(),
        ));
    }
    let (w, h) = (feat.width(), feat.height());
    let slices: Vec<SliceAccum> = (0..grid.count())
        .into_par_iter()
        .map(|k| {
            let d = grid.sample(k) as f32;
            accumulate_slice(
                feat,
                &|vi| warp_view(feat.view(vi).as_ref(), feat.baseline(vi), DispField::Constant(d)),
                None,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let mut costs = Vec::with_capacity(grid.count() * w * h);
    let mut support = Vec::with_capacity(grid.count() * w * h);
    for s in slices {
        costs.extend_from_slice(&s.cost);
        support.extend_from_slice(&s.support);
    }
    Ok(CostVolume { grid: grid.clone(), width: w, height: h, costs, support })
}

/// Sweeps a residual grid around a per-pixel coarse disparity map, scaling
/// each side view's contribution by its occlusion weight. Pixels invalid in
/// the coarse map stay unsupported.
pub fn build_refined_volume(
    feat: &FeatureStack,
    coarse: &DisparityMap,
    residual_grid: &SamplingGrid,
    occ: &OcclusionSet,
) -> Result<CostVolume> {
    if feat.view_count() < 2 {
        return Err(Error::InvalidArgument(
            "cost volume needs at least one side view".into(),
        ));
    }
    let (w, h) = (feat.width(), feat.height());
    if coarse.width() != w || coarse.height() != h {
        return Err(Error::ShapeMismatch {
            context: "build_refined_volume coarse map",
            expected: format!("{}x{}", w, h),
            got: format!("{}x{}", coarse.width(), coarse.height()),
        });
    }
    if occ.angular() != feat.angular() || occ.width() != w || occ.height() != h {
        return Err(Error::ShapeMismatch {
            context: "build_refined_volume occlusion set",
            expected: format!("{:?} views of {}x{}", feat.angular(), w, h),
            got: format!("{:?} views of {}x{}", occ.angular(), occ.width(), occ.height()),
        });
    }
    if !coarse.all_finite() {
        return Err(Error::InvalidArgument("non-finite coarse disparity".into()));
    }
    let slices: Vec<SliceAccum> = (0..residual_grid.count())
        .into_par_iter()
        .map(|k| {
            let offset = residual_grid.sample(k) as f32;
            accumulate_slice(
                feat,
                &|vi| {
                    warp_view(
                        feat.view(vi).as_ref(),
                        feat.baseline(vi),
                        DispField::PerPixel { map: coarse, offset },
                    )
                },
                Some(occ),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let mut costs = Vec::with_capacity(residual_grid.count() * w * h);
    let mut support = Vec::with_capacity(residual_grid.count() * w * h);
    for s in slices {
        costs.extend_from_slice(&s.cost);
        support.extend_from_slice(&s.support);
    }
    Ok(CostVolume {
        grid: residual_grid.clone(),
        width: w,
        height: h,
        costs,
        support,
    })
}

/// Support-weighted box filter over each disparity slice. The window is
/// clipped at image borders; window 1 returns the volume unchanged.
pub fn aggregate(vol: &CostVolume, window: usize) -> Result<CostVolume> {
    if window % 2 == 0 || window == 0 {
        return Err(Error::InvalidArgument(format!(
            "aggregation window must be odd and positive, got {}",
            window
        )));
    }
    if window == 1 {
        return Ok(vol.clone());
    }
    let (w, h) = (vol.width, vol.height);
    let r = window / 2;
    let n = w * h;
    let results: Vec<(Vec<f32>, Vec<f32>)> = (0..vol.depth())
        .into_par_iter()
        .map(|k| {
            let cost = vol.slice(k);
            let support = vol.support_slice(k);
            // Horizontal pass: windowed sums of support·cost and support.
            let mut row_wc = vec![0.0f64; n];
            let mut row_ws = vec![0.0f64; n];
            for y in 0..h {
                let base = y * w;
                for x in 0..w {
                    let lo = x.saturating_sub(r);
                    let hi = (x + r).min(w - 1);
                    let mut wc = 0.0f64;
                    let mut ws = 0.0f64;
                    for xi in lo..=hi {
                        let s = support[base + xi] as f64;
                        wc += s * cost[base + xi] as f64;
                        ws += s;
                    }
                    row_wc[base + x] = wc;
                    row_ws[base + x] = ws;
                }
            }
            // Vertical pass and normalization.
            let mut out_cost = vec![0.0f32; n];
            let mut out_support = vec![0.0f32; n];
            for y in 0..h {
                let lo = y.saturating_sub(r);
                let hi = (y + r).min(h - 1);
                let rows_in = (hi - lo + 1) as f64;
                for x in 0..w {
                    let mut wc = 0.0f64;
                    let mut ws = 0.0f64;
                    for yi in lo..=hi {
                        wc += row_wc[yi * w + x];
                        ws += row_ws[yi * w + x];
                    }
                    let cols_in = ((x + r).min(w - 1) - x.saturating_sub(r) + 1) as f64;
                    out_cost[y * w + x] = (wc / ws) as f32;
                    out_support[y * w + x] = (ws / (rows_in * cols_in)) as f32;
                }
            }
            (out_cost, out_support)
        })
        .collect();
    let mut costs = Vec::with_capacity(vol.depth() * n);
    let mut support = Vec::with_capacity(vol.depth() * n);
    for (c, s) in results {
        costs.extend_from_slice(&c);
        support.extend_from_slice(&s);
    }
    Ok(CostVolume { grid: vol.grid.clone(), width: w, height: h, costs, support })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate_lf, DisparityModel, Layer, SceneSpec, Texture};

    fn noise_plane(d: f32, nu: usize, size: usize) -> LightField {
        let spec = SceneSpec {
            layers: vec![Layer {
                texture: Texture::ValueNoise { seed: 5, period: 4.0, lo: 0.05, hi: 0.95 },
                disparity: DisparityModel::Constant(d),
                alpha: None,
            }],
            nu,
            nv: nu,
            height: size,
            width: size,
            channels: 1,
            seed: 5,
        };
        generate_lf(&spec).unwrap().0
    }

    #[test]
    fn grid_counts_match_known_configurations() {
        assert_eq!(SamplingGrid::new(-4.0, 4.0, 0.25).unwrap().count(), 33);
        assert_eq!(SamplingGrid::new(-0.5, 0.5, 0.125).unwrap().count(), 9);
        assert_eq!(SamplingGrid::new(-4.0, 4.0, 1.0).unwrap().count(), 9);
        assert_eq!(SamplingGrid::new(-4.0, 4.0, 0.5).unwrap().count(), 17);
        assert_eq!(SamplingGrid::new(-4.0, 4.0, 0.125).unwrap().count(), 65);
    }

    #[test]
    fn grid_rejects_non_dividing_interval() {
        assert!(SamplingGrid::new(-4.0, 4.0, 0.3).is_err());
        assert!(SamplingGrid::new(0.0, 1.0, -0.5).is_err());
        assert!(SamplingGrid::new(1.0, 0.0, 0.5).is_err());
    }

    #[test]
    fn grid_samples_are_strictly_increasing() {
        let g = SamplingGrid::new(-1.0, 1.0, 0.25).unwrap();
        let s = g.samples();
        assert_eq!(s.len(), 9);
        assert!(s.windows(2).all(|p| p[1] > p[0]));
        assert_eq!(s[0], -1.0);
        assert_eq!(*s.last().unwrap(), 1.0);
    }

    #[test]
    fn grayscale_features_have_three_channels() {
        let lf = noise_plane(0.0, 3, 12);
        let feat = extract_features(&lf, FeatureKind::IntensityGradient);
        assert_eq!(feat.channels(), 3);
        let feat = extract_features(&lf, FeatureKind::Intensity);
        assert_eq!(feat.channels(), 1);
    }

    #[test]
    fn constant_image_has_zero_gradients() {
        let lf = LightField::from_data(1, 1, 4, 4, 1, vec![0.5; 16]).unwrap();
        let feat = extract_features(&lf, FeatureKind::IntensityGradient);
        let img = feat.view(0);
        for y in 0..4 {
            for x in 0..4 {
                assert_eq!(img.get(x, y, 1), 0.0);
                assert_eq!(img.get(x, y, 2), 0.0);
            }
        }
    }

    #[test]
    fn linear_ramp_has_constant_x_gradient() {
        let w = 8usize;
        let data: Vec<f32> = (0..w * w).map(|i| (i % w) as f32 / w as f32).collect();
        let lf = LightField::from_data(1, 1, w, w, 1, data).unwrap();
        let feat = extract_features(&lf, FeatureKind::IntensityGradient);
        let img = feat.view(0);
        for y in 0..w {
            for x in 0..w {
                assert!((img.get(x, y, 1) - 1.0 / w as f32).abs() < 1e-6);
                assert_eq!(img.get(x, y, 2), 0.0);
            }
        }
    }

    #[test]
    fn single_view_lf_rejected() {
        let lf = LightField::from_data(1, 1, 4, 4, 1, vec![0.5; 16]).unwrap();
        let feat = extract_features(&lf, FeatureKind::IntensityGradient);
        let grid = SamplingGrid::new(-1.0, 1.0, 1.0).unwrap();
        assert!(build_coarse_volume(&feat, &grid).is_err());
    }

    #[test]
    fn coarse_volume_depth_matches_grid() {
        let lf = noise_plane(0.0, 3, 10);
        let feat = extract_features(&lf, FeatureKind::IntensityGradient);
        let grid = SamplingGrid::new(-4.0, 4.0, 0.25).unwrap();
        let vol = build_coarse_volume(&feat, &grid).unwrap();
        assert_eq!(vol.depth(), 33);
        assert!(vol.costs().iter().all(|c| c.is_finite() && *c >= 0.0));
    }

    #[test]
    fn argmin_recovers_on_grid_plane_disparity() {
        let lf = noise_plane(0.75, 3, 32);
        let feat = extract_features(&lf, FeatureKind::IntensityGradient);
        let grid = SamplingGrid::new(-1.0, 1.0, 0.25).unwrap();
        let vol = build_coarse_volume(&feat, &grid).unwrap();
        let agg = aggregate(&vol, 9).unwrap();
        let k_expected = 7; // -1 + 7*0.25 = 0.75
        // Interior pixels: clear of the maximum shift (1 px · 1 view unit)
        // plus the aggregation radius.
        for y in 6..26 {
            for x in 6..26 {
                assert_eq!(agg.argmin(x, y), k_expected, "pixel ({}, {})", x, y);
            }
        }
    }

    #[test]
    fn weight_neutrality_is_bit_exact() {
        // A refined sweep around a constant coarse map with all-ones weights
        // must reproduce the unweighted coarse-path sweep over the shifted
        // grid bit for bit. All grid values are dyadic so the two routes
        // compute identical sample positions.
        let lf = noise_plane(0.5, 3, 16);
        let feat = extract_features(&lf, FeatureKind::IntensityGradient);
        let coarse = DisparityMap::constant(16, 16, 0.5);
        let residual = SamplingGrid::new(-0.5, 0.5, 0.25).unwrap();
        let (nu, nv) = lf.angular();
        let neutral = OcclusionSet::neutral(nu, nv, 16, 16);
        let weighted = build_refined_volume(&feat, &coarse, &residual, &neutral).unwrap();
        let absolute = SamplingGrid::new(0.0, 1.0, 0.25).unwrap();
        let unweighted = build_coarse_volume(&feat, &absolute).unwrap();
        assert_eq!(weighted.costs(), unweighted.costs());
        assert_eq!(weighted.support_slice(0), unweighted.support_slice(0));
        // And the refined volume around the true disparity has its minimum at
        // zero residual for interior pixels.
        let agg = aggregate(&weighted, 5).unwrap();
        for y in 5..11 {
            for x in 5..11 {
                assert_eq!(agg.argmin(x, y), 2, "pixel ({}, {})", x, y);
            }
        }
    }

    #[test]
    fn occlusion_weights_lower_cost_at_occluded_pixels() {
        use crate::occlusion::build_occlusion_set;
        use crate::synth::two_layer_spec;
        let spec = two_layer_spec(17);
        let (lf, truth) = generate_lf(&spec).unwrap();
        let feat = extract_features(&lf, FeatureKind::IntensityGradient);
        let grid = SamplingGrid::new(-0.5, 0.5, 0.25).unwrap();
        let occ = build_occlusion_set(&lf, &truth.disparity).unwrap();
        let (nu, nv) = lf.angular();
        let neutral = OcclusionSet::neutral(nu, nv, lf.width(), lf.height());
        let weighted = build_refined_volume(&feat, &truth.disparity, &grid, &occ).unwrap();
        let unweighted = build_refined_volume(&feat, &truth.disparity, &grid, &neutral).unwrap();
        // At ground-truth-occluded pixels the weighted cost at the true
        // residual (k = 2, residual 0) should not exceed the unweighted one.
        let union_occ = {
            let mut m = crate::image::BoolMap::filled(lf.width(), lf.height(), false);
            for mask in &truth.occlusion {
                for y in 0..lf.height() {
                    for x in 0..lf.width() {
                        if mask.get(x, y) {
                            m.set(x, y, true);
                        }
                    }
                }
            }
            m
        };
        let mut improved = 0usize;
        let mut total = 0usize;
        for y in 0..lf.height() {
            for x in 0..lf.width() {
                if union_occ.get(x, y) && weighted.support(2, x, y) > MIN_SUPPORT {
                    total += 1;
                    if weighted.cost(2, x, y) <= unweighted.cost(2, x, y) + 1e-7 {
                        improved += 1;
                    }
                }
            }
        }
        assert!(total > 100);
        assert!(
            improved as f64 >= 0.95 * total as f64,
            "improved {}/{}",
            improved,
            total
        );
    }

    #[test]
    fn aggregate_window_one_is_identity() {
        let lf = noise_plane(0.25, 3, 12);
        let feat = extract_features(&lf, FeatureKind::IntensityGradient);
        let grid = SamplingGrid::new(-0.5, 0.5, 0.5).unwrap();
        let vol = build_coarse_volume(&feat, &grid).unwrap();
        let agg = aggregate(&vol, 1).unwrap();
        assert_eq!(vol.costs(), agg.costs());
    }

    #[test]
    fn aggregate_rejects_even_window() {
        let grid = SamplingGrid::new(0.0, 0.0, 1.0).unwrap();
        let vol = CostVolume::from_costs(grid, 2, 2, vec![0.0; 4]).unwrap();
        assert!(aggregate(&vol, 2).is_err());
        assert!(aggregate(&vol, 0).is_err());
    }

    #[test]
    fn box_filter_hand_computed_center() {
        // 3x3 slice of zeros with center 9, window 3, full support: the
        // center becomes the window mean, 1.
        let grid = SamplingGrid::new(0.0, 0.0, 1.0).unwrap();
        let mut costs = vec![0.0f32; 9];
        costs[4] = 9.0;
        let vol = CostVolume::from_costs(grid, 3, 3, costs).unwrap();
        let agg = aggregate(&vol, 3).unwrap();
        assert!((agg.cost(0, 1, 1) - 1.0).abs() < 1e-6);
        // Corner windows clip to 4 cells.
        assert!((agg.cost(0, 0, 0) - 9.0 / 4.0).abs() < 1e-6);
    }

    #[test]
    fn constant_slice_is_box_filter_fixed_point() {
        let grid = SamplingGrid::new(0.0, 0.0, 1.0).unwrap();
        let vol = CostVolume::from_costs(grid, 7, 5, vec![0.37; 35]).unwrap();
        for window in [3, 5, 7] {
            let agg = aggregate(&vol, window).unwrap();
            for v in agg.costs() {
                assert!((v - 0.37).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn zero_support_cells_get_sentinel() {
        // Disparity 6 over a 3x3 grid shifts every view's samples out of an
        // 8-pixel-wide frame only for border columns; check a forced case
        // with a huge candidate instead.
        let lf = noise_plane(0.0, 3, 8);
        let feat = extract_features(&lf, FeatureKind::IntensityGradient);
        let grid = SamplingGrid::new(16.0, 16.0, 1.0).unwrap();
        let vol = build_coarse_volume(&feat, &grid).unwrap();
        // Every sample position is at least 8 px out of frame for the corner
        // views; centre row/column views with zero du or dv keep some pixels.
        let mut sentinel_seen = false;
        for y in 0..8 {
            for x in 0..8 {
                if vol.support(0, x, y) == MIN_SUPPORT {
                    assert_eq!(vol.cost(0, x, y), COST_SENTINEL);
                    sentinel_seen = true;
                }
            }
        }
        assert!(sentinel_seen);
    }
}
