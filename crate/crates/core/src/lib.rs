//! Baseline detectors, thresholding strategies and evaluation metrics for
//! infrared small target detection.

pub mod detectors;
pub mod error;
pub mod image;
pub mod io;
pub mod metrics;
pub mod pulse;
pub mod region;
pub mod stats;
pub mod synth;
pub mod threshold;

pub use error::{Error, Result};
pub use image::{BinaryImage, Coord, GrayImage};
pub use region::{GroundTruth, TargetRegion};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/images.md")]
    mod images {}
    #[doc = include_str!("../../../book/src/detectors.md")]
    mod detectors {}
    #[doc = include_str!("../../../book/src/thresholding.md")]
    mod thresholding {}
    #[doc = include_str!("../../../book/src/pre_metrics.md")]
    mod pre_metrics {}
    #[doc = include_str!("../../../book/src/pfa_k.md")]
    mod pfa_k {}
    #[doc = include_str!("../../../book/src/pulse.md")]
    mod pulse {}
    #[doc = include_str!("../../../book/src/synthetic.md")]
    mod synthetic {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
