// temporary probe for acceptance calibration
use lfdepth_core::cascade::{run_pipeline_with, CascadeConfig, OcclusionSource};
use lfdepth_core::image::BoolMap;
use lfdepth_core::metrics;
use lfdepth_core::synth::{generate_lf, standard_suite, two_layer_spec};

fn band_around_discontinuity(gt: &lfdepth_core::image::DisparityMap, radius: usize) -> BoolMap {
    let (w, h) = (gt.width(), gt.height());
    let mut edge = BoolMap::filled(w, h, false);
    for y in 0..h {
        for x in 0..w {
            let d = gt.get(x, y);
            if (x + 1 < w && (gt.get(x + 1, y) - d).abs() > 0.5)
                || (y + 1 < h && (gt.get(x, y + 1) - d).abs() > 0.5)
            {
                edge.set(x, y, true);
            }
        }
    }
    BoolMap::from_fn(w, h, |x, y| {
        let x0 = x.saturating_sub(radius);
        let y0 = y.saturating_sub(radius);
        let x1 = (x + radius).min(w - 1);
        let y1 = (y + radius).min(h - 1);
        for yy in y0..=y1 {
            for xx in x0..=x1 {
                if edge.get(xx, yy) {
                    return true;
                }
            }
        }
        false
    })
}

fn main() {
    let suite = standard_suite(20240807);
    let scene = suite.iter().find(|s| s.name == "plane_offgrid").unwrap();
    for temp in [0.1, 1e-2, 5e-3, 1e-3] {
        let cfg = CascadeConfig { temperature: temp, ..Default::default() };
        let t0 = std::time::Instant::now();
        let out = lfdepth_core::cascade::run_pipeline(&scene.lf, &cfg).unwrap();
        let dt = t0.elapsed();
        let mask = metrics::border_mask(128, 128, 24);
        let med_c =
            metrics::median_abs_error(&out.coarse, &scene.truth.disparity, Some(&mask)).unwrap();
        let med_r =
            metrics::median_abs_error(&out.refined, &scene.truth.disparity, Some(&mask)).unwrap();
        let mut improved = 0usize;
        let mut total = 0usize;
        for y in 24..104 {
            for x in 24..104 {
                if out.coarse.is_valid(x, y) && out.refined.is_valid(x, y) {
                    total += 1;
                    let ec = (out.coarse.get(x, y) - 0.625).abs();
                    let er = (out.refined.get(x, y) - 0.625).abs();
                    if er < ec {
                        improved += 1;
                    }
                }
            }
        }
        println!(
            "offgrid T={:.0e}: med_coarse={:.5} med_refined={:.5} improved={:.3} time={:.2?}",
            temp,
            med_c,
            med_r,
            improved as f64 / total as f64,
            dt
        );
    }

    let spec = two_layer_spec(20240807);
    let (lf, truth) = generate_lf(&spec).unwrap();
    {
        // raw coarse costs at a belt pixel
        let feat = lfdepth_core::extract_features(&lf, lfdepth_core::FeatureKind::IntensityGradient);
        let grid = lfdepth_core::SamplingGrid::new(-4.0, 4.0, 0.25).unwrap();
        let vol = lfdepth_core::build_coarse_volume(&feat, &grid).unwrap();
        for &(px, py) in &[(35usize, 64usize), (38, 64), (30, 64)] {
            print!("cost({},{}):", px, py);
            for k in 0..vol.depth() {
                print!(" {:.0}:{:.4}", grid.sample(k) * 4.0, vol.cost(k, px, py));
            }
            println!();
        }
        // per-view channel-mean diffs at (35,64) for two candidates
        let center = feat.view(feat.center_index());
        for cand in [0.0f32, 1.25] {
            println!("per-view diffs at (35,64), candidate {}:", cand);
            for vi in 0..feat.view_count() {
                if vi == feat.center_index() {
                    continue;
                }
                let b = feat.baseline(vi);
                let w = lfdepth_core::warp_view(
                    feat.view(vi).as_ref(),
                    b,
                    lfdepth_core::DispField::Constant(cand),
                )
                .unwrap();
                if !w.valid.get(35, 64) {
                    continue;
                }
                let a = center.pixel(35, 64);
                let c = w.image.pixel(35, 64);
                let d: f32 =
                    a.iter().zip(c).map(|(x, y)| (x - y).abs()).sum::<f32>() / a.len() as f32;
                if (b.du as i32 == 0 && b.dv as i32 == 0) || d > 0.0 {
                    print!(" ({:+.0},{:+.0}):{:.3}", b.du, b.dv, d);
                }
            }
            println!();
        }
    }
    {
        // refined volume dissection at p=(35,64) with gt occlusion weights
        let feat = lfdepth_core::extract_features(&lf, lfdepth_core::FeatureKind::Intensity);
        let occ = lfdepth_core::build_occlusion_set(&lf, &truth.disparity).unwrap();
        let grid33 = lfdepth_core::SamplingGrid::new(-4.0, 4.0, 0.25).unwrap();
        let cvol = lfdepth_core::build_coarse_volume(&feat, &grid33).unwrap();
        let cagg = lfdepth_core::aggregate(&cvol, 3).unwrap();
        let coarse = lfdepth_core::regress_disparity(&cagg, 1e-2).unwrap();
        println!("coarse at (35,64) = {:.4}", coarse.get(35, 64));
        let rgrid = lfdepth_core::SamplingGrid::new(-2.5, 2.5, 0.125).unwrap();
        let rvol =
            lfdepth_core::build_refined_volume(&feat, &coarse, &rgrid, &occ).unwrap();
        print!("refined row (total disparity: cost):");
        for k in 0..rvol.depth() {
            let total = coarse.get(35, 64) as f64 + rgrid.sample(k);
            print!(" {:.2}:{:.4}", total, rvol.cost(k, 35, 64));
        }
        println!();
        // weights of the du=-4..-2 column views vs others at p
        let (_, nv) = lf.angular();
        print!("weights at p:");
        for a in lf.angular_coords() {
            let b = lf.baseline(a).unwrap();
            if b.dv == 0.0 {
                let vw = &occ.view(a.u * nv + a.v).weight;
                print!(" du{:+.0}:{:.2}", b.du, vw[64 * 128 + 35]);
            }
        }
        println!();
    }
    {
        // scanline profile across the left silhouette edge (x=40) at y=64
        let cfg = CascadeConfig {
            temperature: 1e-2,
            aggregation_window: 1,
            refined_grid: Some(lfdepth_core::SamplingGrid::new(-2.5, 2.5, 0.125).unwrap()),
            ..Default::default()
        };
        let on = run_pipeline_with(&lf, &cfg, OcclusionSource::Auto).unwrap();
        let off = run_pipeline_with(&lf, &cfg, OcclusionSource::Disabled).unwrap();
        let gto = run_pipeline_with(&lf, &cfg, OcclusionSource::FromMap(&truth.disparity)).unwrap();
        println!("  x | gt    coarse  off    on     gtocc");
        for x in 30..58 {
            println!(
                " {:3} | {:.2}  {:+.3} {:+.3} {:+.3} {:+.3}",
                x,
                truth.disparity.get(x, 64),
                on.coarse.get(x, 64),
                off.refined.get(x, 64),
                on.refined.get(x, 64),
                gto.refined.get(x, 64),
            );
        }
    }
    let band = band_around_discontinuity(&truth.disparity, 3);
    let interior = metrics::border_mask(128, 128, 12);
    let band_interior = BoolMap::from_fn(128, 128, |x, y| band.get(x, y) && interior.get(x, y));
    println!("band pixels: {}", band_interior.count_true());
    for (temp, window, refined) in [
        (2e-3, 3, Some(lfdepth_core::SamplingGrid::new(-2.5, 2.5, 0.125).unwrap())),
        (2e-3, 1, Some(lfdepth_core::SamplingGrid::new(-2.5, 2.5, 0.125).unwrap())),
        (1e-3, 3, Some(lfdepth_core::SamplingGrid::new(-2.5, 2.5, 0.125).unwrap())),
        (2e-3, 5, Some(lfdepth_core::SamplingGrid::new(-2.5, 2.5, 0.125).unwrap())),
    ] {
        let cfg = CascadeConfig {
            temperature: temp,
            aggregation_window: window,
            refined_grid: refined.clone(),
            features: lfdepth_core::FeatureKind::Intensity,
            ..Default::default()
        };
        let t0 = std::time::Instant::now();
        let occ_on = run_pipeline_with(&lf, &cfg, OcclusionSource::Auto).unwrap();
        let occ_off = run_pipeline_with(&lf, &cfg, OcclusionSource::Disabled).unwrap();
        let occ_gt =
            run_pipeline_with(&lf, &cfg, OcclusionSource::FromMap(&truth.disparity)).unwrap();
        let dt = t0.elapsed();
        let bp = |m: &lfdepth_core::image::DisparityMap| {
            metrics::badpix(m, &truth.disparity, 0.07, Some(&band_interior)).unwrap()
        };
        println!(
            "two_layer T={:.0e} w={} refined={:?}: band badpix on={:.3} off={:.3} gt={:.3} | mse on={:.4} off={:.4} gt={:.4} | 3 runs {:.2?}",
            temp,
            window,
            refined.as_ref().map(|g| g.count()),
            bp(&occ_on.refined),
            bp(&occ_off.refined),
            bp(&occ_gt.refined),
            metrics::mse100(&occ_on.refined, &truth.disparity, Some(&interior)).unwrap(),
            metrics::mse100(&occ_off.refined, &truth.disparity, Some(&interior)).unwrap(),
            metrics::mse100(&occ_gt.refined, &truth.disparity, Some(&interior)).unwrap(),
            dt
        );
    }
}
