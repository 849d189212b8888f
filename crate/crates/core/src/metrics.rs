//! Benchmark evaluation metrics: BadPix(ε), MSE×100 and Q25, plus masking
//! helpers.
//!
//! A pixel enters the evaluation when it is valid in both maps and selected
//! by the optional mask. BadPix uses a strict comparison: a pixel is bad
//! when its absolute error exceeds ε. Q25 uses the nearest-rank convention
//! on the ascending error sort.

use crate::error::{Error, Result};
use crate::image::{BoolMap, DisparityMap};

/// All metrics over one evaluation region.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalResult {
    pub badpix_001: f64,
    pub badpix_003: f64,
    pub badpix_007: f64,
    pub mse100: f64,
    pub q25: f64,
    pub pixel_count: usize,
}

fn check_shapes(pred: &DisparityMap, gt: &DisparityMap, mask: Option<&BoolMap>) -> Result<()> {
    if pred.width() != gt.width() || pred.height() != gt.height() {
        return Err(Error::ShapeMismatch {
            context: "metrics",
            expected: format!("{}x{}", gt.width(), gt.height()),
            got: format!("{}x{}", pred.width(), pred.height()),
        });
    }
    if let Some(m) = mask {
        if m.width() != gt.width() || m.height() != gt.height() {
            return Err(Error::ShapeMismatch {
                context: "metrics mask",
                expected: format!("{}x{}", gt.width(), gt.height()),
                got: format!("{}x{}", m.width(), m.height()),
            });
        }
    }
    Ok(())
}

/// Absolute errors over the evaluation region (valid in both maps, selected
/// by the mask).
pub fn abs_errors(
    pred: &DisparityMap,
    gt: &DisparityMap,
    mask: Option<&BoolMap>,
) -> Result<Vec<f64>> {
    check_shapes(pred, gt, mask)?;
    let mut errors = Vec::new();
    for y in 0..gt.height() {
        for x in 0..gt.width() {
            if !pred.is_valid(x, y) || !gt.is_valid(x, y) {
                continue;
            }
            if let Some(m) = mask {
                if !m.get(x, y) {
                    continue;
                }
            }
            errors.push((pred.get(x, y) as f64 - gt.get(x, y) as f64).abs());
        }
    }
    Ok(errors)
}

/// Percentage of evaluated pixels whose absolute error exceeds `eps`.
pub fn badpix(
    pred: &DisparityMap,
    gt: &DisparityMap,
    eps: f64,
    mask: Option<&BoolMap>,
) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {}", eps)));
    }
    let errors = abs_errors(pred, gt, mask)?;
    if errors.is_empty() {
        return Err(Error::EmptyEvaluation);
    }
    let bad = errors.iter().filter(|e| **e > eps).count();
    Ok(100.0 * bad as f64 / errors.len() as f64)
}

/// Mean squared error times 100.
pub fn mse100(pred: &DisparityMap, gt: &DisparityMap, mask: Option<&BoolMap>) -> Result<f64> {
    let errors = abs_errors(pred, gt, mask)?;
    if errors.is_empty() {
        return Err(Error::EmptyEvaluation);
    }
    let sum: f64 = errors.iter().map(|e| e * e).sum();
    Ok(100.0 * sum / errors.len() as f64)
}

/// 100 times the largest absolute error among the best 25% of pixels
/// (nearest-rank percentile on the ascending sort). Needs at least four
/// evaluated pixels.
pub fn q25(pred: &DisparityMap, gt: &DisparityMap, mask: Option<&BoolMap>) -> Result<f64> {
    let mut errors = abs_errors(pred, gt, mask)?;
    if errors.len() < 4 {
        return Err(Error::TooFewPixels { needed: 4, got: errors.len() });
    }
    errors.sort_by(|a, b| a.partial_cmp(b).expect("errors are finite"));
    let rank = ((errors.len() as f64) * 0.25).ceil() as usize;
    Ok(100.0 * errors[rank - 1])
}

/// Median absolute error; the robust summary used by interval studies.
pub fn median_abs_error(
    pred: &DisparityMap,
    gt: &DisparityMap,
    mask: Option<&BoolMap>,
) -> Result<f64> {
    let mut errors = abs_errors(pred, gt, mask)?;
    if errors.is_empty() {
        return Err(Error::EmptyEvaluation);
    }
    errors.sort_by(|a, b| a.partial_cmp(b).expect("errors are finite"));
    let n = errors.len();
    Ok(if n % 2 == 1 {
        errors[n / 2]
    } else {
        (errors[n / 2 - 1] + errors[n / 2]) / 2.0
    })
}

/// The full metric set at the standard thresholds.
pub fn evaluate(pred: &DisparityMap, gt: &DisparityMap, mask: Option<&BoolMap>) -> Result<EvalResult> {
    let errors = abs_errors(pred, gt, mask)?;
    if errors.is_empty() {
        return Err(Error::EmptyEvaluation);
    }
    if errors.len() < 4 {
        return Err(Error::TooFewPixels { needed: 4, got: errors.len() });
    }
    let count = |eps: f64| 100.0 * errors.iter().filter(|e| **e > eps).count() as f64 / errors.len() as f64;
    let mse: f64 = 100.0 * errors.iter().map(|e| e * e).sum::<f64>() / errors.len() as f64;
    let mut sorted = errors.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("errors are finite"));
    let rank = ((sorted.len() as f64) * 0.25).ceil() as usize;
    Ok(EvalResult {
        badpix_001: count(0.01),
        badpix_003: count(0.03),
        badpix_007: count(0.07),
        mse100: mse,
        q25: 100.0 * sorted[rank - 1],
        pixel_count: errors.len(),
    })
}

/// True where a pixel evaluates and its error exceeds `eps` (the red region
/// of an error-map rendering).
pub fn badpix_mask(
    pred: &DisparityMap,
    gt: &DisparityMap,
    eps: f64,
    mask: Option<&BoolMap>,
) -> Result<BoolMap> {
    check_shapes(pred, gt, mask)?;
    let mut out = BoolMap::filled(gt.width(), gt.height(), false);
    for y in 0..gt.height() {
        for x in 0..gt.width() {
            if !pred.is_valid(x, y) || !gt.is_valid(x, y) {
                continue;
            }
            if let Some(m) = mask {
                if !m.get(x, y) {
                    continue;
                }
            }
            let e = (pred.get(x, y) as f64 - gt.get(x, y) as f64).abs();
            if e > eps {
                out.set(x, y, true);
            }
        }
    }
    Ok(out)
}

/// Mask selecting the image with `border` pixels cropped on every side.
pub fn border_mask(width: usize, height: usize, border: usize) -> BoolMap {
    BoolMap::from_fn(width, height, |x, y| {
        x >= border && y >= border && x + border < width && y + border < height
    })
}
