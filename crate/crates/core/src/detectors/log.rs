//! Scale-normalized Laplacian of Gaussian.
//!
//! The kernel is `-σ²∇²G_σ`, truncated at radius `⌈3σ⌉` and shifted to sum
//! to zero, so flat regions respond with zero and bright blobs of spread
//! close to `σ` respond with a positive peak.

use rayon::prelude::*;

use crate::error::Result;
use crate::image::{GrayImage, Padded};

use super::{check_scales, fuse_max};

/// Square kernel of side `2r + 1`, row-major.
#[derive(Clone, Debug)]
pub struct Kernel {
    pub radius: usize,
    pub taps: Vec<f64>,
}

pub fn log_kernel(sigma: f64) -> Kernel {
    let radius = (3.0 * sigma).ceil() as usize;
    let r = radius as isize;
    let s2 = sigma * sigma;
    let norm = 1.0 / (2.0 * std::f64::consts::PI * s2);
    let mut taps = Vec::with_capacity((2 * radius + 1).pow(2));
    for y in -r..=r {
        for x in -r..=r {
            let rho2 = (x * x + y * y) as f64;
            taps.push(norm * (-rho2 / (2.0 * s2)).exp() * (2.0 * s2 - rho2) / s2);
        }
    }
    let mean = taps.iter().sum::<f64>() / taps.len() as f64;
    for t in &mut taps {
        *t -= mean;
    }
    Kernel { radius, taps }
}

fn correlate(img: &GrayImage, kernel: &Kernel) -> GrayImage {
    let (w, h) = img.dims();
    let r = kernel.radius as isize;
    let side = 2 * kernel.radius + 1;
    let padded = Padded::new(img, kernel.radius);
    let out: Vec<f64> = (0..h)
        .into_par_iter()
        .flat_map_iter(|y| {
            let padded = &padded;
            (0..w).map(move |x| {
                let mut acc = 0.0;
                for ky in 0..side {
                    let py = y as isize + ky as isize - r;
                    let row = &kernel.taps[ky * side..(ky + 1) * side];
                    for (kx, &k) in row.iter().enumerate() {
                        acc += k * padded.at(x as isize + kx as isize - r, py);
                    }
                }
                acc
            })
        })
        .collect();
    GrayImage::from_parts_unchecked(w, h, out)
}

/// Response at a single scale.
pub fn log_single(img: &GrayImage, sigma: f64) -> Result<GrayImage> {
    check_scales(&[sigma])?;
    Ok(correlate(img, &log_kernel(sigma)))
}

/// Per-pixel maximum of the single-scale responses.
pub fn log_multiscale(img: &GrayImage, scales: &[f64]) -> Result<GrayImage> {
    check_scales(scales)?;
    let maps = scales
        .iter()
        .map(|&s| correlate(img, &log_kernel(s)))
        .collect();
    Ok(fuse_max(maps))
}
