//! Text configuration for the cascade: a line-oriented `key = value` format
//! with `#` comments. Numeric values accept decimals or fractions like
//! `1/8`.
//!
//! Keys (all optional, defaults in parentheses):
//!
//! ```text
//! coarse_min          (-4)      coarse sweep lower bound
//! coarse_max          (4)       coarse sweep upper bound
//! coarse_interval     (1/4)     coarse sweep step
//! range_decay         (1/8)     refined range = coarse range · range_decay
//! interval_decay      (1/2)     refined step = coarse step · interval_decay
//! refined_min                   explicit residual grid; give all three
//! refined_max                   refined_* keys to override the decay
//! refined_interval              factors
//! temperature         (0.1)     softmax temperature on matching costs
//! aggregation_window  (9)       odd box-filter window
//! occlusion           (true)    occlusion-aware refined stage
//! features            (intensity-gradient)  or `intensity`
//! grayscale           (true)    collapse RGB input scenes to luma
//! views_u             (9)       angular rows of input scenes
//! views_v             (9)       angular columns of input scenes
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use crate::cascade::CascadeConfig;
use crate::costvolume::{FeatureKind, SamplingGrid};
use crate::error::{Error, Result};

/// Scene-loading options carried alongside the cascade parameters.
#[derive(Clone, Copy, Debug)]
pub struct LoadOptions {
    pub grayscale: bool,
    pub views_u: usize,
    pub views_v: usize,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self { grayscale: true, views_u: 9, views_v: 9 }
    }
}

/// Parses a real number, accepting `a/b` fractions.
pub fn parse_real(s: &str) -> Result<f64> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n: f64 = num
            .trim()
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("bad number '{}'", s)))?;
        let d: f64 = den
            .trim()
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("bad number '{}'", s)))?;
        if d == 0.0 {
            return Err(Error::InvalidConfig(format!("zero denominator in '{}'", s)));
        }
        Ok(n / d)
    } else {
        s.parse()
            .map_err(|_| Error::InvalidConfig(format!("bad number '{}'", s)))
    }
}

fn parse_bool(s: &str) -> Result<bool> {
    match s.trim() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        other => Err(Error::InvalidConfig(format!("bad boolean '{}'", other))),
    }
}

/// Parses config text into cascade parameters and load options. Unknown keys
/// are errors.
pub fn parse_config(text: &str) -> Result<(CascadeConfig, LoadOptions)> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::InvalidConfig(format!(
                "line {}: expected 'key = value', got '{}'",
                lineno + 1,
                line
            )));
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }

    let mut take_real = |key: &str, default: f64| -> Result<f64> {
        match map.remove(key) {
            Some(v) => parse_real(&v),
            None => Ok(default),
        }
    };

    let coarse_min = take_real("coarse_min", -4.0)?;
    let coarse_max = take_real("coarse_max", 4.0)?;
    let coarse_interval = take_real("coarse_interval", 0.25)?;
    let range_decay = take_real("range_decay", 0.125)?;
    let interval_decay = take_real("interval_decay", 0.5)?;
    let temperature = take_real("temperature", 0.1)?;

    let refined_min = map.remove("refined_min");
    let refined_max = map.remove("refined_max");
    let refined_interval = map.remove("refined_interval");
    let refined_grid = match (&refined_min, &refined_max, &refined_interval) {
        (None, None, None) => None,
        (Some(lo), Some(hi), Some(step)) => Some(SamplingGrid::new(
            parse_real(lo)?,
            parse_real(hi)?,
            parse_real(step)?,
        )?),
        _ => {
            return Err(Error::InvalidConfig(
                "give all of refined_min, refined_max, refined_interval or none".into(),
            ))
        }
    };

    let aggregation_window = match map.remove("aggregation_window") {
        Some(v) => v
            .parse::<usize>()
            .map_err(|_| Error::InvalidConfig(format!("bad window '{}'", v)))?,
        None => 9,
    };
    let occlusion_enabled = match map.remove("occlusion") {
        Some(v) => parse_bool(&v)?,
        None => true,
    };
    let features = match map.remove("features").as_deref() {
        None | Some("intensity-gradient") | Some("intensity+gradient") => {
            FeatureKind::IntensityGradient
        }
        Some("intensity") => FeatureKind::Intensity,
        Some(other) => {
            return Err(Error::InvalidConfig(format!(
                "unknown feature set '{}', expected 'intensity' or 'intensity-gradient'",
                other
            )))
        }
    };
    let grayscale = match map.remove("grayscale") {
        Some(v) => parse_bool(&v)?,
        None => true,
    };
    let views_u = match map.remove("views_u") {
        Some(v) => v
            .parse::<usize>()
            .map_err(|_| Error::InvalidConfig(format!("bad views_u '{}'", v)))?,
        None => 9,
    };
    let views_v = match map.remove("views_v") {
        Some(v) => v
            .parse::<usize>()
            .map_err(|_| Error::InvalidConfig(format!("bad views_v '{}'", v)))?,
        None => 9,
    };

    if let Some(key) = map.keys().next() {
        return Err(Error::InvalidConfig(format!("unknown key '{}'", key)));
    }

    let cfg = CascadeConfig {
        coarse_grid: SamplingGrid::new(coarse_min, coarse_max, coarse_interval)?,
        range_decay,
        interval_decay,
        refined_grid,
        temperature,
        aggregation_window,
        occlusion_enabled,
        features,
    };
    cfg.validate()?;
    Ok((cfg, LoadOptions { grayscale, views_u, views_v }))
}

pub fn load_config(path: impl AsRef<Path>) -> Result<(CascadeConfig, LoadOptions)> {
    let path = path.as_ref();
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    parse_config(&text)
}
