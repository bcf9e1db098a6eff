//! Raster types shared by every stage of the pipeline.
//!
//! A [`GrayImage`] holds real-valued samples and serves both as the input
//! frame and as a detector's saliency map, so values may be negative and
//! are never clamped. A [`BinaryImage`] is what thresholding produces.

use crate::error::{Error, Result};

/// Pixel coordinate `(x, y)` with `x` the column and `y` the row.
pub type Coord = (usize, usize);

/// Row-major real-valued raster with finite samples.
#[derive(Clone, Debug, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    samples: Vec<f64>,
}

impl GrayImage {
    /// Wraps `samples` after checking the dimensions and that every value
    /// is finite.
    pub fn new(width: usize, height: usize, samples: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || samples.len() != width * height {
            return Err(Error::InvalidDimensions {
                width,
                height,
                len: samples.len(),
            });
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self {
            width,
            height,
            samples,
        })
    }

    /// Image with every sample equal to `value`.
    ///
    /// # Panics
    ///
    /// Panics on a zero dimension or a non-finite `value`.
    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self::new(width, height, vec![value; width * height]).expect("valid constant image")
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel.
    ///
    /// # Panics
    ///
    /// Panics on a zero dimension or if `f` returns a non-finite value.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut samples = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                samples.push(f(x, y));
            }
        }
        Self::new(width, height, samples).expect("from_fn produced an invalid image")
    }

    /// Single-row image, handy for 1-D experiments.
    pub fn from_row(row: Vec<f64>) -> Result<Self> {
        let width = row.len();
        Self::new(width, 1, row)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    /// Always false; images have at least one pixel.
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.samples[y * self.width + x]
    }

    /// Sample at a possibly out-of-range position, replicating the border.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> f64 {
        let cx = x.clamp(0, self.width as isize - 1) as usize;
        let cy = y.clamp(0, self.height as isize - 1) as usize;
        self.samples[cy * self.width + cx]
    }

    pub fn set(&mut self, x: usize, y: usize, value: f64) {
        assert!(value.is_finite(), "non-finite sample");
        self.samples[y * self.width + x] = value;
    }

    pub fn row(&self, y: usize) -> &[f64] {
        &self.samples[y * self.width..(y + 1) * self.width]
    }

    pub fn min(&self) -> f64 {
        self.samples.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.samples.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_constant(&self) -> bool {
        let first = self.samples[0];
        self.samples.iter().all(|&v| v == first)
    }

    /// Applies `f` to every sample.
    ///
    /// # Panics
    ///
    /// Panics if `f` produces a non-finite value.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        let samples: Vec<f64> = self.samples.iter().map(|&v| f(v)).collect();
        Self::new(self.width, self.height, samples).expect("map produced a non-finite sample")
    }

    /// Pixelwise combination of two equally sized images.
    pub fn zip_with(&self, other: &GrayImage, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                left: self.dims(),
                right: other.dims(),
            });
        }
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self::new(self.width, self.height, samples)
    }

    /// Copies the `w`x`h` window whose top-left corner is `(x0, y0)`.
    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> Result<Self> {
        if x0 + w > self.width || y0 + h > self.height {
            return Err(Error::param(format!(
                "crop {w}x{h}+{x0}+{y0} exceeds {}x{}",
                self.width, self.height
            )));
        }
        Ok(Self::from_fn(w, h, |x, y| self.get(x0 + x, y0 + y)))
    }

    pub(crate) fn from_parts_unchecked(width: usize, height: usize, samples: Vec<f64>) -> Self {
        debug_assert_eq!(samples.len(), width * height);
        debug_assert!(samples.iter().all(|v| v.is_finite()));
        Self {
            width,
            height,
            samples,
        }
    }
}

/// Row-major boolean raster.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 || bits.len() != width * height {
            return Err(Error::InvalidDimensions {
                width,
                height,
                len: bits.len(),
            });
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn empty(width: usize, height: usize) -> Self {
        Self::new(width, height, vec![false; width * height]).expect("valid dimensions")
    }

    /// Marks exactly the listed pixels.
    pub fn from_coords(width: usize, height: usize, coords: &[Coord]) -> Result<Self> {
        let mut out = Self::new(width, height, vec![false; width * height])?;
        for &(x, y) in coords {
            if x >= width || y >= height {
                return Err(Error::OutOfBounds {
                    x,
                    y,
                    width,
                    height,
                });
            }
            out.bits[y * width + x] = true;
        }
        Ok(out)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.bits[y * self.width + x] = value;
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Coordinates of all set pixels in row-major order.
    pub fn ones(&self) -> Vec<Coord> {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| (i % self.width, i / self.width))
            .collect()
    }

    /// Square (8-connected) dilation by `radius` pixels.
    pub fn dilate(&self, radius: usize) -> Self {
        if radius == 0 {
            return self.clone();
        }
        let (w, h) = self.dims();
        let r = radius as isize;
        let mut rows = vec![false; w * h];
        for y in 0..h {
            for x in 0..w {
                let lo = (x as isize - r).max(0) as usize;
                let hi = ((x as isize + r) as usize).min(w - 1);
                rows[y * w + x] = self.bits[y * w + lo..=y * w + hi].iter().any(|&b| b);
            }
        }
        let mut out = vec![false; w * h];
        for y in 0..h {
            let lo = (y as isize - r).max(0) as usize;
            let hi = ((y as isize + r) as usize).min(h - 1);
            for x in 0..w {
                out[y * w + x] = (lo..=hi).any(|yy| rows[yy * w + x]);
            }
        }
        Self {
            width: w,
            height: h,
            bits: out,
        }
    }
}

/// Replicate-padded copy of an image, addressable with signed offsets
/// up to `margin` outside the original bounds.
pub(crate) struct Padded {
    pub width: usize,
    pub margin: usize,
    pub data: Vec<f64>,
}

impl Padded {
    pub fn new(img: &GrayImage, margin: usize) -> Self {
        let width = img.width() + 2 * margin;
        let height = img.height() + 2 * margin;
        let m = margin as isize;
        let mut data = Vec::with_capacity(width * height);
        for py in 0..height {
            for px in 0..width {
                data.push(img.get_clamped(px as isize - m, py as isize - m));
            }
        }
        Self {
            width,
            margin,
            data,
        }
    }

    pub fn height(&self) -> usize {
        self.data.len() / self.width
    }

    /// Sample at original-image coordinates shifted by the padding.
    #[inline]
    pub fn at(&self, x: isize, y: isize) -> f64 {
        let px = (x + self.margin as isize) as usize;
        let py = (y + self.margin as isize) as usize;
        self.data[py * self.width + px]
    }
}

pub(crate) fn check_odd_window(side: usize) -> Result<()> {
    if side < 3 || side % 2 == 0 {
        Err(Error::InvalidWindow(side))
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_dimensions_and_nan() {
        assert!(matches!(
            GrayImage::new(2, 2, vec![0.0; 3]),
            Err(Error::InvalidDimensions { .. })
        ));
        assert!(matches!(
            GrayImage::new(0, 1, vec![]),
            Err(Error::InvalidDimensions { .. })
        ));
        assert!(matches!(
            GrayImage::new(2, 1, vec![0.0, f64::NAN]),
            Err(Error::NonFinite(1))
        ));
    }

    #[test]
    fn clamped_access_replicates_border() {
        let img = GrayImage::new(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(img.get_clamped(-5, -5), 1.0);
        assert_eq!(img.get_clamped(7, 0), 2.0);
        assert_eq!(img.get_clamped(1, 9), 4.0);
        let p = Padded::new(&img, 2);
        assert_eq!(p.at(-2, 1), 3.0);
        assert_eq!(p.at(3, 3), 4.0);
        assert_eq!(p.height(), 6);
    }

    #[test]
    fn dilation_is_square() {
        let b = BinaryImage::from_coords(5, 5, &[(2, 2)]).unwrap();
        assert_eq!(b.dilate(1).count_ones(), 9);
        assert_eq!(b.dilate(2).count_ones(), 25);
        let corner = BinaryImage::from_coords(5, 5, &[(0, 0)]).unwrap();
        assert_eq!(corner.dilate(1).ones(), vec![(0, 0), (1, 0), (0, 1), (1, 1)]);
    }
}
