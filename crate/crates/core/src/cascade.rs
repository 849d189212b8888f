//! The two-stage coarse-to-refined disparity pipeline: refined-grid
//! derivation from decay factors, softmax disparity regression, residual
//! regression around the coarse map, and orchestration.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::costvolume::{
    aggregate, build_coarse_volume, build_refined_volume, extract_features, CostVolume,
    FeatureKind, SamplingGrid, MIN_SUPPORT,
};
use crate::error::{Error, Result};
use crate::image::DisparityMap;
use crate::lightfield::LightField;
use crate::occlusion::{build_occlusion_set, OcclusionSet};

/// Configuration of the two-stage cascade.
///
/// The refined residual grid either derives from the decay factors
/// (half-extent = coarse extent · range_decay / 2, interval = coarse
/// interval · interval_decay, snapped to a whole number of steps) or is given
/// explicitly, in which case the explicit grid wins.
#[derive(Clone, Debug)]
pub struct CascadeConfig {
    pub coarse_grid: SamplingGrid,
    /// Disparity-range decay factor, in (0, 1).
    pub range_decay: f64,
    /// Disparity-interval decay factor, in (0, 1).
    pub interval_decay: f64,
    /// Explicit residual grid overriding the decay factors.
    pub refined_grid: Option<SamplingGrid>,
    /// Softmax temperature on matching costs. Classical absolute-difference
    /// costs live in [0, 1] and need sharpening; lower is sharper.
    pub temperature: f64,
    /// Odd box-filter window for cost aggregation.
    pub aggregation_window: usize,
    /// Scale side-view costs by photo-consistency weights in the refined
    /// stage.
    pub occlusion_enabled: bool,
    pub features: FeatureKind,
}

impl Default for CascadeConfig {
    fn default() -> Self {
        Self {
            coarse_grid: SamplingGrid::new(-4.0, 4.0, 0.25).expect("valid default grid"),
            range_decay: 0.125,
            interval_decay: 0.5,
            refined_grid: None,
            temperature: 0.1,
            aggregation_window: 9,
            occlusion_enabled: true,
            features: FeatureKind::IntensityGradient,
        }
    }
}

impl CascadeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.range_decay > 0.0 && self.range_decay < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "range decay factor must lie in (0, 1), got {}",
                self.range_decay
            )));
        }
        if !(self.interval_decay > 0.0 && self.interval_decay < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "interval decay factor must lie in (0, 1), got {}",
                self.interval_decay
            )));
        }
        if !(self.temperature.is_finite() && self.temperature > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "temperature must be positive, got {}",
                self.temperature
            )));
        }
        if self.aggregation_window % 2 == 0 || self.aggregation_window == 0 {
            return Err(Error::InvalidConfig(format!(
                "aggregation window must be odd, got {}",
                self.aggregation_window
            )));
        }
        Ok(())
    }
}

/// Residual grid for the refined stage: symmetric around zero, with
/// half-extent (coarse extent · range_decay)/2 and interval
/// coarse interval · interval_decay, snapped so the extent is a whole number
/// of intervals. An explicit grid in the config takes precedence.
pub fn derive_refined_grid(cfg: &CascadeConfig) -> Result<SamplingGrid> {
    cfg.validate()?;
    if let Some(grid) = &cfg.refined_grid {
        return Ok(grid.clone());
    }
    let extent = cfg.coarse_grid.max() - cfg.coarse_grid.min();
    let half = extent * cfg.range_decay / 2.0;
    let interval = cfg.coarse_grid.interval() * cfg.interval_decay;
    let steps = (half / interval).round().max(1.0);
    let snapped = steps * interval;
    SamplingGrid::new(-snapped, snapped, interval)
}

/// Softmax-weighted disparity regression over a cost volume: per pixel,
/// p_k = softmax(-cost_k / temperature) and d = Σ d_k p_k, clamped to the
/// grid range. Pixels with no supported candidate are invalid.
pub fn regress_disparity(vol: &CostVolume, temperature: f64) -> Result<DisparityMap> {
    if !(temperature.is_finite() && temperature > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "temperature must be positive, got {}",
            temperature
        )));
    }
    let (w, h) = (vol.width(), vol.height());
    let depth = vol.depth();
    let samples = vol.grid().samples();
    let lo = vol.grid().min();
    let hi = vol.grid().max();
    let rows: Vec<(Vec<f32>, Vec<bool>)> = (0..h)
        .into_par_iter()
        .map(|y| {
            let mut values = vec![0.0f32; w];
            let mut valid = vec![false; w];
            for x in 0..w {
                let mut max_logit = f64::NEG_INFINITY;
                for k in 0..depth {
                    let logit = -(vol.cost(k, x, y) as f64) / temperature;
                    if logit > max_logit {
                        max_logit = logit;
                    }
                }
                let mut z = 0.0f64;
                let mut num = 0.0f64;
                let mut supported = false;
                for k in 0..depth {
                    let logit = -(vol.cost(k, x, y) as f64) / temperature;
                    let p = (logit - max_logit).exp();
                    z += p;
                    num += p * samples[k];
                    if vol.support(k, x, y) > MIN_SUPPORT {
                        supported = true;
                    }
                }
                let d = (num / z).clamp(lo, hi);
                if supported {
                    values[x] = d as f32;
                    valid[x] = true;
                }
            }
            (values, valid)
        })
        .collect();
    let mut values = Vec::with_capacity(w * h);
    let mut valid = Vec::with_capacity(w * h);
    for (v, ok) in rows {
        values.extend_from_slice(&v);
        valid.extend_from_slice(&ok);
    }
    DisparityMap::from_parts(w, h, values, valid)
}

/// Residual regression: d = coarse + softmax-regressed residual, the
/// residual clamped to the residual grid's range. Pixels invalid in the
/// coarse map stay invalid rather than being extrapolated.
pub fn regress_residual(
    vol: &CostVolume,
    coarse: &DisparityMap,
    temperature: f64,
) -> Result<DisparityMap> {
    if coarse.width() != vol.width() || coarse.height() != vol.height() {
        return Err(Error::ShapeMismatch {
            context: "regress_residual",
            expected: format!("{}x{}", vol.width(), vol.height()),
            got: format!("{}x{}", coarse.width(), coarse.height()),
        });
    }
    let residual = regress_disparity(vol, temperature)?;
    let (w, h) = (vol.width(), vol.height());
    let mut out = DisparityMap::constant(w, h, 0.0);
    for y in 0..h {
        for x in 0..w {
            if coarse.is_valid(x, y) && residual.is_valid(x, y) {
                out.set(x, y, coarse.get(x, y) + residual.get(x, y), true);
            } else {
                out.set(x, y, 0.0, false);
            }
        }
    }
    Ok(out)
}

/// Wall-clock per stage plus sweep slice counts.
#[derive(Clone, Debug, Default)]
pub struct PipelineStats {
    pub features: Duration,
    pub coarse_volume: Duration,
    pub coarse_aggregate: Duration,
    pub coarse_regress: Duration,
    pub occlusion: Duration,
    pub refined_volume: Duration,
    pub refined_aggregate: Duration,
    pub refined_regress: Duration,
    pub coarse_slices: usize,
    pub refined_slices: usize,
}

impl PipelineStats {
    pub fn total(&self) -> Duration {
        self.features
            + self.coarse_volume
            + self.coarse_aggregate
            + self.coarse_regress
            + self.occlusion
            + self.refined_volume
            + self.refined_aggregate
            + self.refined_regress
    }
}

/// Everything a pipeline run produces.
#[derive(Clone, Debug)]
pub struct PipelineOutput {
    pub coarse: DisparityMap,
    pub refined: DisparityMap,
    pub occlusion: OcclusionSet,
    pub stats: PipelineStats,
}

/// Where the refined stage's occlusion weights come from.
#[derive(Clone, Copy, Debug)]
pub enum OcclusionSource<'a> {
    /// Per the config: from the coarse map when enabled, neutral otherwise.
    Auto,
    /// Weights from warping by this map instead (e.g. a ground-truth map,
    /// for upper-bound studies).
    FromMap(&'a DisparityMap),
    /// Force unweighted matching.
    Disabled,
}

/// Runs the full two-stage pipeline: features, coarse sweep, aggregation,
/// regression, occlusion maps from the coarse disparity, occlusion-aware
/// refined sweep, aggregation, residual regression. Deterministic for fixed
/// inputs and config, at any thread count.
pub fn run_pipeline(lf: &LightField, cfg: &CascadeConfig) -> Result<PipelineOutput> {
    run_pipeline_with(lf, cfg, OcclusionSource::Auto)
}

/// `run_pipeline` with an explicit occlusion source.
pub fn run_pipeline_with(
    lf: &LightField,
    cfg: &CascadeConfig,
    source: OcclusionSource<'_>,
) -> Result<PipelineOutput> {
    cfg.validate()?;
    let refined_grid = derive_refined_grid(cfg)?;
    let mut stats = PipelineStats {
        coarse_slices: cfg.coarse_grid.count(),
        refined_slices: refined_grid.count(),
        ..Default::default()
    };

    let t = Instant::now();
    let feat = extract_features(lf, cfg.features);
    stats.features = t.elapsed();

    let t = Instant::now();
    let coarse_vol = build_coarse_volume(&feat, &cfg.coarse_grid)?;
    stats.coarse_volume = t.elapsed();

    let t = Instant::now();
    let coarse_agg = aggregate(&coarse_vol, cfg.aggregation_window)?;
    stats.coarse_aggregate = t.elapsed();

    let t = Instant::now();
    let coarse = regress_disparity(&coarse_agg, cfg.temperature)?;
    stats.coarse_regress = t.elapsed();

    let t = Instant::now();
    let (nu, nv) = lf.angular();
    let occlusion = match source {
        OcclusionSource::Auto => {
            if cfg.occlusion_enabled {
                build_occlusion_set(lf, &coarse)?
            } else {
                OcclusionSet::neutral(nu, nv, lf.width(), lf.height())
            }
        }
        OcclusionSource::FromMap(map) => build_occlusion_set(lf, map)?,
        OcclusionSource::Disabled => OcclusionSet::neutral(nu, nv, lf.width(), lf.height()),
    };
    stats.occlusion = t.elapsed();

    let t = Instant::now();
    let refined_vol = build_refined_volume(&feat, &coarse, &refined_grid, &occlusion)?;
    stats.refined_volume = t.elapsed();

    let t = Instant::now();
    let refined_agg = aggregate(&refined_vol, cfg.aggregation_window)?;
    stats.refined_aggregate = t.elapsed();

    let t = Instant::now();
    let refined = regress_residual(&refined_agg, &coarse, cfg.temperature)?;
    stats.refined_regress = t.elapsed();

    Ok(PipelineOutput { coarse, refined, occlusion, stats })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costvolume::COST_SENTINEL;
    use crate::synth::{generate_lf, DisparityModel, Layer, SceneSpec, Texture};

    fn grid(min: f64, max: f64, step: f64) -> SamplingGrid {
        SamplingGrid::new(min, max, step).unwrap()
    }

    fn volume_from(costs: Vec<f32>, g: SamplingGrid) -> CostVolume {
        CostVolume::from_costs(g, 1, 1, costs).unwrap()
    }

    #[test]
    fn default_config_matches_published_setup() {
        let cfg = CascadeConfig::default();
        assert_eq!(cfg.coarse_grid.count(), 33);
        let refined = derive_refined_grid(&cfg).unwrap();
        assert_eq!(refined.count(), 9);
        assert!((refined.min() + 0.5).abs() < 1e-12);
        assert!((refined.max() - 0.5).abs() < 1e-12);
        assert!((refined.interval() - 0.125).abs() < 1e-12);
    }

    #[test]
    fn decay_factors_from_coarse_interval_one() {
        let cfg = CascadeConfig {
            coarse_grid: grid(-4.0, 4.0, 1.0),
            range_decay: 0.125,
            interval_decay: 0.125,
            ..CascadeConfig::default()
        };
        let refined = derive_refined_grid(&cfg).unwrap();
        assert_eq!(refined.count(), 9);
        assert!((refined.min() + 0.5).abs() < 1e-12);
        assert!((refined.interval() - 0.125).abs() < 1e-12);
    }

    #[test]
    fn unit_decay_factor_rejected() {
        let cfg = CascadeConfig { interval_decay: 1.0, ..CascadeConfig::default() };
        assert!(derive_refined_grid(&cfg).is_err());
        let cfg = CascadeConfig { range_decay: 1.0, ..CascadeConfig::default() };
        assert!(derive_refined_grid(&cfg).is_err());
    }

    #[test]
    fn explicit_refined_grid_takes_precedence() {
        let cfg = CascadeConfig {
            refined_grid: Some(grid(-0.25, 0.25, 0.25)),
            ..CascadeConfig::default()
        };
        let refined = derive_refined_grid(&cfg).unwrap();
        assert_eq!(refined.count(), 3);
    }

    #[test]
    fn sharp_softmax_picks_cheapest_candidate() {
        let g = grid(-1.0, 1.0, 0.5);
        let mut costs = vec![COST_SENTINEL; 5];
        costs[3] = 0.0; // d = 0.5
        let vol = volume_from(costs, g);
        let d = regress_disparity(&vol, 1e-3).unwrap();
        assert!((d.get(0, 0) - 0.5).abs() < 0.05);
    }

    #[test]
    fn uniform_costs_regress_to_grid_midpoint() {
        let g = grid(-1.0, 1.0, 0.5);
        let vol = volume_from(vec![0.3; 5], g);
        let d = regress_disparity(&vol, 0.5).unwrap();
        assert!(d.get(0, 0).abs() < 1e-6);
        let g = grid(0.0, 2.0, 0.5);
        let vol = volume_from(vec![0.3; 5], g);
        let d = regress_disparity(&vol, 0.5).unwrap();
        assert!((d.get(0, 0) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn closed_form_softmax_value() {
        // costs [0, 0.5, 1] at samples [-1, 0, 1], temperature 1.
        let g = grid(-1.0, 1.0, 1.0);
        let vol = volume_from(vec![0.0, 0.5, 1.0], g);
        let d = regress_disparity(&vol, 1.0).unwrap();
        let e0 = 1.0f64;
        let e1 = (-0.5f64).exp();
        let e2 = (-1.0f64).exp();
        let expected = (-1.0 * e0 + 0.0 * e1 + 1.0 * e2) / (e0 + e1 + e2);
        assert!((d.get(0, 0) as f64 - expected).abs() < 1e-6);
    }

    #[test]
    fn regression_stays_within_grid_bounds() {
        let g = grid(-2.0, 2.0, 1.0);
        let vol = volume_from(vec![0.9, 0.1, 0.5, 0.2, 0.7], g);
        for t in [1e-3, 0.1, 10.0] {
            let d = regress_disparity(&vol, t).unwrap();
            assert!(d.get(0, 0) >= -2.0 && d.get(0, 0) <= 2.0);
        }
        assert!(regress_disparity(&vol, 0.0).is_err());
        assert!(regress_disparity(&vol, -1.0).is_err());
    }

    #[test]
    fn residual_regression_recenters_on_coarse() {
        let g = grid(-0.5, 0.5, 0.25);
        let mut costs = vec![COST_SENTINEL; 5];
        costs[2] = 0.0; // residual 0
        let vol = volume_from(costs, g);
        let coarse = DisparityMap::constant(1, 1, 1.75);
        let d = regress_residual(&vol, &coarse, 1e-3).unwrap();
        assert!((d.get(0, 0) - 1.75).abs() < 0.01);
    }

    #[test]
    fn symmetric_uniform_residual_keeps_coarse() {
        let g = grid(-0.5, 0.5, 0.25);
        let vol = volume_from(vec![0.4; 5], g);
        let coarse = DisparityMap::constant(1, 1, -0.5);
        let d = regress_residual(&vol, &coarse, 0.1).unwrap();
        assert!((d.get(0, 0) + 0.5).abs() < 1e-6);
    }

    #[test]
    fn invalid_coarse_pixels_stay_invalid() {
        let g = grid(-0.5, 0.5, 0.5);
        let vol = CostVolume::from_costs(g, 2, 1, vec![0.1; 6]).unwrap();
        let mut coarse = DisparityMap::constant(2, 1, 0.0);
        coarse.set(1, 0, 0.0, false);
        let d = regress_residual(&vol, &coarse, 0.1).unwrap();
        assert!(d.is_valid(0, 0));
        assert!(!d.is_valid(1, 0));
    }

    fn small_scene(d: f32) -> LightField {
        let spec = SceneSpec {
            layers: vec![Layer {
                texture: Texture::ValueNoise { seed: 9, period: 4.0, lo: 0.05, hi: 0.95 },
                disparity: DisparityModel::Constant(d),
                alpha: None,
            }],
            nu: 3,
            nv: 3,
            height: 32,
            width: 32,
            channels: 1,
            seed: 9,
        };
        generate_lf(&spec).unwrap().0
    }

    fn small_config() -> CascadeConfig {
        CascadeConfig {
            coarse_grid: grid(-1.0, 1.0, 0.25),
            temperature: 5e-3,
            aggregation_window: 5,
            ..CascadeConfig::default()
        }
    }

    #[test]
    fn pipeline_is_deterministic() {
        let lf = small_scene(0.375);
        let cfg = small_config();
        let a = run_pipeline(&lf, &cfg).unwrap();
        let b = run_pipeline(&lf, &cfg).unwrap();
        assert_eq!(a.coarse.values(), b.coarse.values());
        assert_eq!(a.refined.values(), b.refined.values());
    }

    #[test]
    fn pipeline_slice_counts_default_config() {
        let lf = small_scene(0.25);
        let cfg = CascadeConfig {
            temperature: 5e-3,
            aggregation_window: 5,
            ..CascadeConfig::default()
        };
        let out = run_pipeline(&lf, &cfg).unwrap();
        assert_eq!(out.stats.coarse_slices, 33);
        assert_eq!(out.stats.refined_slices, 9);
    }

    #[test]
    fn disabled_occlusion_equals_neutral_weights_bit_exact() {
        let lf = small_scene(0.5);
        let cfg = CascadeConfig { occlusion_enabled: false, ..small_config() };
        let a = run_pipeline(&lf, &cfg).unwrap();
        let b = run_pipeline_with(&lf, &cfg, OcclusionSource::Disabled).unwrap();
        assert_eq!(a.refined.values(), b.refined.values());
        let cfg_on = CascadeConfig { occlusion_enabled: true, ..small_config() };
        let c = run_pipeline_with(&lf, &cfg_on, OcclusionSource::Disabled).unwrap();
        assert_eq!(a.refined.values(), c.refined.values());
    }

    #[test]
    fn refined_bounded_by_coarse_plus_extent() {
        let lf = small_scene(0.625);
        let cfg = small_config();
        let out = run_pipeline(&lf, &cfg).unwrap();
        let refined_grid = derive_refined_grid(&cfg).unwrap();
        for y in 0..32 {
            for x in 0..32 {
                if out.refined.is_valid(x, y) {
                    let r = out.refined.get(x, y) - out.coarse.get(x, y);
                    assert!(r >= refined_grid.min() as f32 - 1e-6);
                    assert!(r <= refined_grid.max() as f32 + 1e-6);
                }
            }
        }
    }
}
