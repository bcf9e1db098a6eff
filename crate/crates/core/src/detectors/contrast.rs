//! Cell-based local contrast detectors.
//!
//! Both work on a grid of `s`x`s` cells around each pixel:
//!
//! * PCM compares the centre cell mean with the eight surrounding cell
//!   means. With `d_i = m_0 - m_i` the response is the smallest product
//!   `d_i * d_{i+4}` over the four opposing pairs, so a pixel scores high
//!   only when it is brighter than its surround in every direction. The
//!   sign is kept.
//! * AAGD takes the centre cell mean minus the mean of the surrounding
//!   frame of width `s` (the `3s`x`3s` block without the centre cell) and
//!   squares it when positive, zero otherwise.

use rayon::prelude::*;

use crate::error::Result;
use crate::image::{GrayImage, Padded};

use super::{check_cells, check_side, fuse_max};

/// Neighbour cells in circular order; index `i` and `i + 4` are opposite.
const RING: [(isize, isize); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
];

/// Box sums of side `side` centred at every padded position far enough
/// from the padded border; other entries stay zero.
struct BoxSums {
    sums: Vec<f64>,
    width: usize,
    margin: usize,
}

impl BoxSums {
    fn new(padded: &Padded, side: usize) -> Self {
        let (pw, ph) = (padded.width, padded.height());
        let r = side / 2;
        let mut rows = vec![0.0; pw * ph];
        for y in 0..ph {
            let line = &padded.data[y * pw..(y + 1) * pw];
            for x in r..pw.saturating_sub(r) {
                rows[y * pw + x] = line[x - r..=x + r].iter().sum();
            }
        }
        let mut sums = vec![0.0; pw * ph];
        sums.par_chunks_mut(pw)
            .enumerate()
            .skip(r)
            .take(ph.saturating_sub(2 * r))
            .for_each(|(y, out)| {
                for (x, o) in out.iter_mut().enumerate() {
                    *o = (y - r..=y + r).map(|yy| rows[yy * pw + x]).sum();
                }
            });
        Self {
            sums,
            width: pw,
            margin: padded.margin,
        }
    }

    #[inline]
    fn at(&self, x: isize, y: isize) -> f64 {
        let px = (x + self.margin as isize) as usize;
        let py = (y + self.margin as isize) as usize;
        self.sums[py * self.width + px]
    }
}

fn cell_margin(side: usize) -> usize {
    side + side / 2
}

/// PCM response for one cell size.
pub fn pcm_single(img: &GrayImage, side: usize) -> Result<GrayImage> {
    check_side(side)?;
    let padded = Padded::new(img, cell_margin(side));
    let cells = BoxSums::new(&padded, side);
    let area = (side * side) as f64;
    let step = side as isize;
    let (w, h) = img.dims();
    let out: Vec<f64> = (0..h)
        .into_par_iter()
        .flat_map_iter(|y| {
            let cells = &cells;
            (0..w).map(move |x| {
                let (x, y) = (x as isize, y as isize);
                let centre = cells.at(x, y) / area;
                let mut d = [0.0; 8];
                for (di, &(ox, oy)) in d.iter_mut().zip(RING.iter()) {
                    *di = centre - cells.at(x + ox * step, y + oy * step) / area;
                }
                (0..4)
                    .map(|i| d[i] * d[i + 4])
                    .fold(f64::INFINITY, f64::min)
            })
        })
        .collect();
    Ok(GrayImage::from_parts_unchecked(w, h, out))
}

/// Multiscale PCM: per-pixel maximum over `sides`.
pub fn pcm(img: &GrayImage, sides: &[usize]) -> Result<GrayImage> {
    check_cells(sides)?;
    let maps = sides
        .iter()
        .map(|&s| pcm_single(img, s))
        .collect::<Result<Vec<_>>>()?;
    Ok(fuse_max(maps))
}

/// AAGD response for one cell size.
pub fn aagd_single(img: &GrayImage, side: usize) -> Result<GrayImage> {
    check_side(side)?;
    let padded = Padded::new(img, cell_margin(side));
    let inner = BoxSums::new(&padded, side);
    let outer = BoxSums::new(&padded, 3 * side);
    let inner_area = (side * side) as f64;
    let frame_area = (8 * side * side) as f64;
    let (w, h) = img.dims();
    let out: Vec<f64> = (0..h)
        .into_par_iter()
        .flat_map_iter(|y| {
            let (inner, outer) = (&inner, &outer);
            (0..w).map(move |x| {
                let (x, y) = (x as isize, y as isize);
                let centre_sum = inner.at(x, y);
                let m_in = centre_sum / inner_area;
                let m_out = (outer.at(x, y) - centre_sum) / frame_area;
                let d = m_in - m_out;
                if d > 0.0 {
                    d * d
                } else {
                    0.0
                }
            })
        })
        .collect();
    Ok(GrayImage::from_parts_unchecked(w, h, out))
}

/// Multiscale AAGD: per-pixel maximum over `sides`.
pub fn aagd(img: &GrayImage, sides: &[usize]) -> Result<GrayImage> {
    check_cells(sides)?;
    let maps = sides
        .iter()
        .map(|&s| aagd_single(img, s))
        .collect::<Result<Vec<_>>>()?;
    Ok(fuse_max(maps))
}
