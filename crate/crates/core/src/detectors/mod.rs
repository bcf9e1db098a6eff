//! Baseline saliency filters. Each maps an input frame to a saliency map
//! of the same size in which small bright targets should stand out.
//!
//! All windowed operations replicate the border, and every multiscale
//! detector fuses its scales with a per-pixel maximum.

mod contrast;
mod log;
mod morphology;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use contrast::{aagd, aagd_single, pcm, pcm_single};
pub use log::{log_kernel, log_multiscale, log_single, Kernel};
pub use morphology::{dilate, erode, opening, tophat};

use crate::error::{Error, Result};
use crate::image::GrayImage;

/// Scale parameters for the multiscale LoG baseline.
pub const DEFAULT_LOG_SCALES: [f64; 12] = [
    0.50, 0.60, 0.72, 0.86, 1.03, 1.24, 1.49, 1.79, 2.14, 2.57, 3.09, 3.71,
];

pub const DEFAULT_CELL_SIZES: [usize; 4] = [3, 5, 7, 9];

pub const DEFAULT_TOPHAT_SE: usize = 7;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectorConfig {
    pub tophat_se: usize,
    pub log_scales: Vec<f64>,
    pub cell_sizes: Vec<usize>,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            tophat_se: DEFAULT_TOPHAT_SE,
            log_scales: DEFAULT_LOG_SCALES.to_vec(),
            cell_sizes: DEFAULT_CELL_SIZES.to_vec(),
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        check_side(self.tophat_se)?;
        check_scales(&self.log_scales)?;
        check_cells(&self.cell_sizes)
    }
}

pub(crate) fn check_side(side: usize) -> Result<()> {
    if side < 3 || side % 2 == 0 {
        Err(Error::param(format!(
            "window side {side} must be odd and at least 3"
        )))
    } else {
        Ok(())
    }
}

pub(crate) fn check_cells(cells: &[usize]) -> Result<()> {
    if cells.is_empty() {
        return Err(Error::param("cell size list is empty"));
    }
    cells.iter().try_for_each(|&s| check_side(s))
}

pub(crate) fn check_scales(scales: &[f64]) -> Result<()> {
    if scales.is_empty() {
        return Err(Error::param("scale list is empty"));
    }
    if scales.iter().any(|&s| !(s.is_finite() && s > 0.0)) {
        return Err(Error::param("scales must be finite and positive"));
    }
    if scales.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("scales must be strictly increasing"));
    }
    Ok(())
}

/// The available saliency filters. `Identity` passes the input through
/// unchanged and serves as a reference point for gain metrics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Detector {
    TopHat,
    Log,
    Pcm,
    Aagd,
    Identity,
}

impl Detector {
    /// The four baselines, in reporting order.
    pub const BASELINES: [Detector; 4] =
        [Detector::Aagd, Detector::Log, Detector::TopHat, Detector::Pcm];

    pub fn name(self) -> &'static str {
        match self {
            Detector::TopHat => "tophat",
            Detector::Log => "log",
            Detector::Pcm => "pcm",
            Detector::Aagd => "aagd",
            Detector::Identity => "identity",
        }
    }

    /// Largest distance a pixel's response reaches into its neighbourhood.
    pub fn radius(self, config: &DetectorConfig) -> usize {
        match self {
            Detector::TopHat => 2 * (config.tophat_se / 2),
            Detector::Log => config
                .log_scales
                .iter()
                .map(|s| (3.0 * s).ceil() as usize)
                .max()
                .unwrap_or(0),
            Detector::Pcm | Detector::Aagd => config
                .cell_sizes
                .iter()
                .map(|&s| s + s / 2)
                .max()
                .unwrap_or(0),
            Detector::Identity => 0,
        }
    }

    pub fn run(self, img: &GrayImage, config: &DetectorConfig) -> Result<GrayImage> {
        match self {
            Detector::TopHat => tophat(img, config.tophat_se),
            Detector::Log => log_multiscale(img, &config.log_scales),
            Detector::Pcm => pcm(img, &config.cell_sizes),
            Detector::Aagd => aagd(img, &config.cell_sizes),
            Detector::Identity => Ok(img.clone()),
        }
    }
}

impl fmt::Display for Detector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Detector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tophat" | "top-hat" => Ok(Detector::TopHat),
            "log" => Ok(Detector::Log),
            "pcm" => Ok(Detector::Pcm),
            "aagd" => Ok(Detector::Aagd),
            "identity" => Ok(Detector::Identity),
            other => Err(Error::param(format!("unknown detector {other:?}"))),
        }
    }
}

/// Per-pixel maximum of several equally sized maps.
pub(crate) fn fuse_max(maps: Vec<GrayImage>) -> GrayImage {
    let mut it = maps.into_iter();
    let first = it.next().expect("at least one scale");
    let (w, h) = first.dims();
    let mut acc = first.into_samples();
    for m in it {
        for (a, &b) in acc.iter_mut().zip(m.samples()) {
            if b > *a {
                *a = b;
            }
        }
    }
    GrayImage::from_parts_unchecked(w, h, acc)
}
