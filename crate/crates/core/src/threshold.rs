//! Turning a saliency map into a binary detection image.
//!
//! Every strategy ends in the same strict comparison: a pixel is set when
//! its value is *greater than* the threshold at that position, so ties go
//! to the background.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{BinaryImage, GrayImage};
use crate::stats::{global_stats, local_stats, RegionStats};

pub const DEFAULT_OTSU_BINS: usize = 256;
pub const DEFAULT_ITERMEAN_EPSILON: f64 = 0.5;
pub const ITERMEAN_MAX_ITERATIONS: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Fixed,
    Otsu,
    #[serde(rename = "itermean")]
    IterMean,
    GlobalK,
    LocalK,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Fixed => "fixed",
            Strategy::Otsu => "otsu",
            Strategy::IterMean => "itermean",
            Strategy::GlobalK => "global-k",
            Strategy::LocalK => "local-k",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" => Ok(Strategy::Fixed),
            "otsu" => Ok(Strategy::Otsu),
            "itermean" => Ok(Strategy::IterMean),
            "global-k" => Ok(Strategy::GlobalK),
            "local-k" => Ok(Strategy::LocalK),
            other => Err(Error::param(format!("unknown strategy {other:?}"))),
        }
    }
}

/// Threshold actually applied: one value, or one value per pixel.
#[derive(Clone, Debug, PartialEq)]
pub enum AppliedThreshold {
    Global(f64),
    Local(GrayImage),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdOutcome {
    pub binary: BinaryImage,
    pub threshold: AppliedThreshold,
    pub strategy: Strategy,
}

impl ThresholdOutcome {
    /// The global threshold, if one was used.
    pub fn global(&self) -> Option<f64> {
        match self.threshold {
            AppliedThreshold::Global(t) => Some(t),
            AppliedThreshold::Local(_) => None,
        }
    }
}

fn binarize(map: &GrayImage, t: f64) -> BinaryImage {
    let bits = map.samples().iter().map(|&v| v > t).collect();
    BinaryImage::new(map.width(), map.height(), bits).expect("same dimensions")
}

/// Fixed global threshold `t`.
pub fn threshold_fixed(map: &GrayImage, t: f64) -> ThresholdOutcome {
    ThresholdOutcome {
        binary: binarize(map, t),
        threshold: AppliedThreshold::Global(t),
        strategy: Strategy::Fixed,
    }
}

/// `μ + k·σ` for the given statistics.
#[inline]
pub fn stat_threshold_value(stats: &RegionStats, k: f64) -> f64 {
    stats.mean + k * stats.std
}

/// Global statistics threshold `T = μ_G + k·σ_G`.
pub fn global_stat_threshold(map: &GrayImage, k: f64) -> Result<ThresholdOutcome> {
    if !k.is_finite() {
        return Err(Error::param("control parameter must be finite"));
    }
    let t = stat_threshold_value(&global_stats(map), k);
    Ok(ThresholdOutcome {
        binary: binarize(map, t),
        threshold: AppliedThreshold::Global(t),
        strategy: Strategy::GlobalK,
    })
}

/// Local mean and standard deviation maps, computed once and reusable for
/// any control parameter.
#[derive(Clone, Debug)]
pub struct LocalStatMaps {
    mean: GrayImage,
    std: GrayImage,
    map: GrayImage,
}

impl LocalStatMaps {
    pub fn new(map: &GrayImage, side: usize) -> Result<Self> {
        let (mean, std) = local_stats(map, side)?;
        Ok(Self {
            mean,
            std,
            map: map.clone(),
        })
    }

    pub fn mean(&self) -> &GrayImage {
        &self.mean
    }

    pub fn std(&self) -> &GrayImage {
        &self.std
    }

    /// Thresholds the map at `T(x,y) = μ(x,y) + k·σ(x,y)`.
    pub fn apply(&self, k: f64) -> ThresholdOutcome {
        let t = self
            .mean
            .zip_with(&self.std, |m, s| m + k * s)
            .expect("maps share dimensions");
        let bits = self
            .map
            .samples()
            .iter()
            .zip(t.samples())
            .map(|(&v, &tv)| v > tv)
            .collect();
        ThresholdOutcome {
            binary: BinaryImage::new(self.map.width(), self.map.height(), bits)
                .expect("same dimensions"),
            threshold: AppliedThreshold::Local(t),
            strategy: Strategy::LocalK,
        }
    }
}

/// Local statistics threshold `T(x,y) = μ(x,y) + k·σ(x,y)` over an
/// `side`x`side` window.
pub fn local_stat_threshold(map: &GrayImage, k: f64, side: usize) -> Result<ThresholdOutcome> {
    if !k.is_finite() {
        return Err(Error::param("control parameter must be finite"));
    }
    Ok(LocalStatMaps::new(map, side)?.apply(k))
}

/// Otsu's threshold on a `bins`-bin histogram spanning `[min, max]` of the
/// map. Candidates are the interior bin edges; the lowest edge wins ties.
pub fn otsu_threshold(map: &GrayImage, bins: usize) -> Result<f64> {
    if bins < 2 {
        return Err(Error::param("Otsu needs at least 2 bins"));
    }
    let (lo, hi) = (map.min(), map.max());
    if lo == hi {
        return Err(Error::ConstantMap);
    }
    let width = (hi - lo) / bins as f64;
    let mut hist = vec![0u64; bins];
    for &v in map.samples() {
        let b = (((v - lo) / width) as usize).min(bins - 1);
        hist[b] += 1;
    }
    let centre = |b: usize| lo + (b as f64 + 0.5) * width;
    let total = map.len() as f64;
    let total_sum: f64 = hist
        .iter()
        .enumerate()
        .map(|(b, &c)| c as f64 * centre(b))
        .sum();

    let mut best_edge = 1;
    let mut best_var = f64::NEG_INFINITY;
    let (mut n0, mut s0) = (0.0, 0.0);
    for edge in 1..bins {
        n0 += hist[edge - 1] as f64;
        s0 += hist[edge - 1] as f64 * centre(edge - 1);
        let n1 = total - n0;
        if n0 == 0.0 || n1 == 0.0 {
            continue;
        }
        let diff = s0 / n0 - (total_sum - s0) / n1;
        let var = (n0 / total) * (n1 / total) * diff * diff;
        if var > best_var {
            best_var = var;
            best_edge = edge;
        }
    }
    Ok(lo + best_edge as f64 * width)
}

/// Result of the iterative class-mean threshold.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterMeanThreshold {
    pub threshold: f64,
    pub iterations: usize,
    /// Set when a class emptied mid-iteration; `threshold` is then the last
    /// value that still split the map in two.
    pub empty_class: bool,
}

/// Iterative threshold: start at the global mean, then repeatedly move to
/// the midpoint of the two class means until the update is at most
/// `epsilon`.
pub fn iterative_mean_threshold(map: &GrayImage, epsilon: f64) -> Result<IterMeanThreshold> {
    if !(epsilon > 0.0) {
        return Err(Error::param("epsilon must be positive"));
    }
    if map.is_constant() {
        return Err(Error::ConstantMap);
    }
    let mut t = global_stats(map).mean;
    for iteration in 1..=ITERMEAN_MAX_ITERATIONS {
        let (mut n_hi, mut s_hi, mut n_lo, mut s_lo) = (0usize, 0.0, 0usize, 0.0);
        for &v in map.samples() {
            if v > t {
                n_hi += 1;
                s_hi += v;
            } else {
                n_lo += 1;
                s_lo += v;
            }
        }
        if n_hi == 0 || n_lo == 0 {
            return Ok(IterMeanThreshold {
                threshold: t,
                iterations: iteration,
                empty_class: true,
            });
        }
        let next = 0.5 * (s_hi / n_hi as f64 + s_lo / n_lo as f64);
        let delta = (next - t).abs();
        t = next;
        if delta <= epsilon {
            return Ok(IterMeanThreshold {
                threshold: t,
                iterations: iteration,
                empty_class: false,
            });
        }
    }
    Err(Error::NonConvergence(ITERMEAN_MAX_ITERATIONS))
}

/// Parameters for running any strategy through one entry point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ThresholdParams {
    pub t: f64,
    pub k: f64,
    pub window: usize,
    pub bins: usize,
    pub eps: f64,
}

impl Default for ThresholdParams {
    fn default() -> Self {
        Self {
            t: 0.0,
            k: 3.0,
            window: 33,
            bins: DEFAULT_OTSU_BINS,
            eps: DEFAULT_ITERMEAN_EPSILON,
        }
    }
}

pub fn apply_strategy(
    map: &GrayImage,
    strategy: Strategy,
    params: &ThresholdParams,
) -> Result<ThresholdOutcome> {
    let global = |t: f64| ThresholdOutcome {
        binary: binarize(map, t),
        threshold: AppliedThreshold::Global(t),
        strategy,
    };
    match strategy {
        Strategy::Fixed => Ok(threshold_fixed(map, params.t)),
        Strategy::Otsu => Ok(global(otsu_threshold(map, params.bins)?)),
        Strategy::IterMean => Ok(global(iterative_mean_threshold(map, params.eps)?.threshold)),
        Strategy::GlobalK => global_stat_threshold(map, params.k),
        Strategy::LocalK => local_stat_threshold(map, params.k, params.window),
    }
}
