//! Descriptive statistics over whole images, sliding windows and pixel
//! sets. Standard deviations are always the population form (divide by
//! the pixel count), since every caller treats the pixels as a fixed set
//! rather than a sample.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{check_odd_window, Coord, GrayImage, Padded};

/// Mean, population standard deviation and pixel count of a pixel set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionStats {
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

impl RegionStats {
    /// Two-pass statistics of a non-empty value stream.
    ///
    /// Values are accumulated relative to the first one, so a constant
    /// set yields exactly its value and a zero deviation.
    fn of_values<I>(values: I) -> Option<Self>
    where
        I: Iterator<Item = f64> + Clone,
    {
        let mut it = values.clone();
        let reference = it.next()?;
        let mut count = 1usize;
        let mut offset_sum = 0.0;
        for v in it {
            offset_sum += v - reference;
            count += 1;
        }
        let n = count as f64;
        let mean = reference + offset_sum / n;
        let sq: f64 = values.map(|v| (v - mean) * (v - mean)).sum();
        Some(Self {
            mean,
            std: (sq / n).sqrt(),
            count,
        })
    }
}

/// Mean and population standard deviation of every sample.
pub fn global_stats(img: &GrayImage) -> RegionStats {
    RegionStats::of_values(img.samples().iter().copied()).expect("images are non-empty")
}

/// Statistics restricted to `region`.
pub fn region_stats(img: &GrayImage, region: &[Coord]) -> Result<RegionStats> {
    if region.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let (w, h) = img.dims();
    if let Some(&(x, y)) = region.iter().find(|&&(x, y)| x >= w || y >= h) {
        return Err(Error::OutOfBounds {
            x,
            y,
            width: w,
            height: h,
        });
    }
    Ok(RegionStats::of_values(region.iter().map(|&(x, y)| img.get(x, y))).expect("non-empty"))
}

/// Per-pixel mean and standard deviation over an `side`x`side` window
/// centred on each pixel, with replicate padding at the borders.
pub fn local_stats(img: &GrayImage, side: usize) -> Result<(GrayImage, GrayImage)> {
    check_odd_window(side)?;
    let r = (side / 2) as isize;
    let padded = Padded::new(img, side / 2);
    let (w, h) = img.dims();
    let n = (side * side) as f64;

    let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..h)
        .into_par_iter()
        .map(|y| {
            let mut means = Vec::with_capacity(w);
            let mut stds = Vec::with_capacity(w);
            let y = y as isize;
            for x in 0..w as isize {
                let reference = padded.at(x, y);
                let mut offset_sum = 0.0;
                for dy in -r..=r {
                    for dx in -r..=r {
                        offset_sum += padded.at(x + dx, y + dy) - reference;
                    }
                }
                let mean = reference + offset_sum / n;
                let mut sq = 0.0;
                for dy in -r..=r {
                    for dx in -r..=r {
                        let d = padded.at(x + dx, y + dy) - mean;
                        sq += d * d;
                    }
                }
                means.push(mean);
                stds.push((sq / n).sqrt());
            }
            (means, stds)
        })
        .collect();

    let mut mean = Vec::with_capacity(w * h);
    let mut std = Vec::with_capacity(w * h);
    for (m, s) in rows {
        mean.extend(m);
        std.extend(s);
    }
    Ok((
        GrayImage::from_parts_unchecked(w, h, mean),
        GrayImage::from_parts_unchecked(w, h, std),
    ))
}
