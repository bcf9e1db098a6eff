//! Pre-thresholding metrics: local signal-to-clutter ratio, background
//! suppression factor, SCR gain and the global SCR.
//!
//! The local SCR compares a target with a ring of background around it
//! (see [`background_ring`]). The global SCR instead measures how far the
//! target's brightest pixel sits above the whole map in units of the map's
//! standard deviation:
//!
//! ```text
//! scr_global = (max over target - mean of map) / std of map
//! ```
//!
//! which is exactly the largest `k` for which the global threshold
//! `mean + k * std` still keeps a pixel of the target.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::pulse::PulseModel;
use crate::region::{background_ring, GroundTruth, TargetRegion};
use crate::stats::{global_stats, region_stats};

/// Default width of the local background ring, in pixels.
pub const DEFAULT_RING_WIDTH: usize = 20;

/// A ratio whose denominator may vanish.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Ratio {
    Finite(f64),
    /// Non-zero numerator over a zero denominator, positive sign.
    PosInfinite,
    NegInfinite,
    /// Zero over zero.
    Undefined,
}

impl Ratio {
    pub fn new(num: f64, den: f64) -> Self {
        if den != 0.0 {
            Ratio::Finite(num / den)
        } else if num > 0.0 {
            Ratio::PosInfinite
        } else if num < 0.0 {
            Ratio::NegInfinite
        } else {
            Ratio::Undefined
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Ratio::Finite(v) => v,
            Ratio::PosInfinite => f64::INFINITY,
            Ratio::NegInfinite => f64::NEG_INFINITY,
            Ratio::Undefined => f64::NAN,
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Ratio::Finite(v) => Some(v),
            _ => None,
        }
    }

    fn divide(self, den: f64) -> Ratio {
        match self {
            Ratio::Finite(v) => Ratio::new(v, den),
            Ratio::Undefined => Ratio::Undefined,
            _ if den == 0.0 => Ratio::Undefined,
            Ratio::PosInfinite if den > 0.0 => Ratio::PosInfinite,
            Ratio::NegInfinite if den < 0.0 => Ratio::PosInfinite,
            _ => Ratio::NegInfinite,
        }
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::io::fmt_float(self.as_f64()))
    }
}

/// `(target mean - ring mean) / ring std`.
pub fn scr_local(img: &GrayImage, target: &TargetRegion, ring_width: usize) -> Result<f64> {
    let ring = background_ring(target, ring_width, img.dims())?;
    let t = region_stats(img, target.mask())?;
    let b = region_stats(img, &ring)?;
    if b.std == 0.0 {
        return Err(Error::FlatBackground);
    }
    Ok((t.mean - b.mean) / b.std)
}

/// Background suppression and SCR gain of a saliency map relative to its
/// input, both measured on the same ring.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GainMetrics {
    pub sigma_in: f64,
    pub sigma_out: f64,
    pub scr_in: f64,
    pub scr_out: Ratio,
    /// `sigma_in / sigma_out`; infinite when the background is fully
    /// suppressed.
    pub bsf: Ratio,
    /// `scr_out / scr_in`.
    pub scrg: Ratio,
}

pub fn bsf_scrg(
    input: &GrayImage,
    saliency: &GrayImage,
    target: &TargetRegion,
    ring_width: usize,
) -> Result<GainMetrics> {
    if input.dims() != saliency.dims() {
        return Err(Error::DimensionMismatch {
            left: input.dims(),
            right: saliency.dims(),
        });
    }
    let ring = background_ring(target, ring_width, input.dims())?;
    let t_in = region_stats(input, target.mask())?;
    let b_in = region_stats(input, &ring)?;
    if b_in.std == 0.0 {
        return Err(Error::FlatBackground);
    }
    let t_out = region_stats(saliency, target.mask())?;
    let b_out = region_stats(saliency, &ring)?;

    let scr_in = (t_in.mean - b_in.mean) / b_in.std;
    let scr_out = Ratio::new(t_out.mean - b_out.mean, b_out.std);
    Ok(GainMetrics {
        sigma_in: b_in.std,
        sigma_out: b_out.std,
        scr_in,
        scr_out,
        bsf: Ratio::new(b_in.std, b_out.std),
        scrg: scr_out.divide(scr_in),
    })
}

/// `(max over the target - global mean) / global std` of a saliency map.
pub fn scr_global(saliency: &GrayImage, gt: &GroundTruth, target_index: usize) -> Result<f64> {
    let target = gt.target(target_index)?;
    scr_global_of(saliency, target)
}

pub fn scr_global_of(saliency: &GrayImage, target: &TargetRegion) -> Result<f64> {
    let g = global_stats(saliency);
    if g.std == 0.0 {
        return Err(Error::ConstantMap);
    }
    let max_t = target
        .mask()
        .iter()
        .map(|&(x, y)| saliency.get(x, y))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok((max_t - g.mean) / g.std)
}

/// All pre-thresholding metrics for one target.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreMetrics {
    pub scr_in: f64,
    pub scr_out: Ratio,
    pub bsf: Ratio,
    pub scrg: Ratio,
    pub scr_global: f64,
}

pub fn pre_metrics(
    input: &GrayImage,
    saliency: &GrayImage,
    gt: &GroundTruth,
    target_index: usize,
    ring_width: usize,
) -> Result<PreMetrics> {
    let target = gt.target(target_index)?;
    let gains = bsf_scrg(input, saliency, target, ring_width)?;
    Ok(PreMetrics {
        scr_in: gains.scr_in,
        scr_out: gains.scr_out,
        bsf: gains.bsf,
        scrg: gains.scrg,
        scr_global: scr_global_of(saliency, target)?,
    })
}

/// Two detectors whose outputs are single square pulses on zero rows of
/// length `n`: amplitude/width `(a1, w1)` and `(a2, w2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoDetectorScenario {
    pub rows: [GrayImage; 2],
    pub scr_global: [f64; 2],
    /// Ring-based SCR with the rest of the row as background. `None` because
    /// a zero background has zero spread.
    pub classical_scr: [Option<f64>; 2],
    /// Ratio of the classical SCRs of detector 1 and 2 when both see the same
    /// non-zero clutter spread: the ratio of their target contrasts.
    pub classical_ratio_equal_clutter: f64,
}

impl TwoDetectorScenario {
    /// Whether a fixed threshold keeps any pulse sample, per detector.
    pub fn detects_at(&self, t: f64) -> [bool; 2] {
        [0, 1].map(|i| crate::threshold::threshold_fixed(&self.rows[i], t).binary.count_ones() > 0)
    }
}

pub fn two_detector_scenario(
    a1: f64,
    w1: usize,
    a2: f64,
    w2: usize,
    n: usize,
) -> Result<TwoDetectorScenario> {
    let p1 = PulseModel::new(a1, w1, n)?;
    let p2 = PulseModel::new(a2, w2, n)?;
    let rows = [p1.row(n), p2.row(n)];
    let mut scr_global = [0.0; 2];
    let mut classical_scr = [None; 2];
    let mut contrast = [0.0; 2];
    for (i, p) in [p1, p2].iter().enumerate() {
        let row = &rows[i];
        let start = p.centered_offset();
        let target = TargetRegion::from_mask((start..start + p.width).map(|x| (x, 0)))?;
        scr_global[i] = scr_global_of(row, &target)?;
        let background: Vec<_> = (0..n)
            .filter(|x| !(start..start + p.width).contains(x))
            .map(|x| (x, 0))
            .collect();
        let t = region_stats(row, target.mask())?;
        let b = region_stats(row, &background)?;
        contrast[i] = t.mean - b.mean;
        classical_scr[i] = (b.std > 0.0).then(|| (t.mean - b.mean) / b.std);
    }
    Ok(TwoDetectorScenario {
        rows,
        scr_global,
        classical_scr,
        classical_ratio_equal_clutter: contrast[0] / contrast[1],
    })
}
