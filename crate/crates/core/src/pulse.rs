//! One-dimensional square-pulse model of local statistics thresholding.
//!
//! A target of amplitude `A` and width `W` sits on a zero background, and
//! the local window holds `n > W` samples with the whole pulse inside it.
//! Then
//!
//! ```text
//! mean      = A W / n
//! std       = (A / n) sqrt(n W - W²)
//! threshold = mean + k std
//! ```
//!
//! and the pulse survives `sample > threshold` only while
//! `k < sqrt((n - W) / W)`. The bound shrinks as the pulse widens and as
//! the window narrows, which is why a single local `k` cannot serve
//! targets of different sizes.
//!
//! ```
//! use irstd::pulse::{k_l_max, PulseModel};
//!
//! let p = PulseModel::new(1.0, 1, 33).unwrap();
//! assert!((k_l_max(1, 33).unwrap() - 32f64.sqrt()).abs() < 1e-12);
//! assert!((p.threshold(k_l_max(1, 33).unwrap()) - 1.0).abs() < 1e-12);
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::threshold::LocalStatMaps;

/// Square pulse of `amplitude` and `width` samples seen through a window of
/// `window` samples.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseModel {
    pub amplitude: f64,
    pub width: usize,
    pub window: usize,
}

impl PulseModel {
    pub fn new(amplitude: f64, width: usize, window: usize) -> Result<Self> {
        if !(amplitude.is_finite() && amplitude > 0.0) {
            return Err(Error::param("pulse amplitude must be positive"));
        }
        if width == 0 || width >= window {
            return Err(Error::param(format!(
                "pulse width {width} must satisfy 1 <= W < n = {window}"
            )));
        }
        Ok(Self {
            amplitude,
            width,
            window,
        })
    }

    pub fn local_mean(&self) -> f64 {
        self.amplitude * self.width as f64 / self.window as f64
    }

    pub fn local_std(&self) -> f64 {
        let (w, n) = (self.width as f64, self.window as f64);
        self.amplitude / n * (n * w - w * w).sqrt()
    }

    pub fn threshold(&self, k: f64) -> f64 {
        self.local_mean() + k * self.local_std()
    }

    /// Offset of the pulse's first sample inside its window.
    pub fn centered_offset(&self) -> usize {
        (self.window - self.width) / 2
    }

    /// Zero row of length `len >= n` with the window placed in the middle
    /// and the pulse centred in the window.
    ///
    /// # Panics
    ///
    /// Panics if `len < n`.
    pub fn row(&self, len: usize) -> GrayImage {
        assert!(len >= self.window, "row shorter than the window");
        let start = self.pulse_start(len);
        let mut v = vec![0.0; len];
        v[start..start + self.width].fill(self.amplitude);
        GrayImage::from_row(v).expect("non-empty row")
    }

    /// Index of the first pulse sample in [`row`](Self::row).
    pub fn pulse_start(&self, len: usize) -> usize {
        (len - self.window) / 2 + self.centered_offset()
    }

    /// Index of the centre of the window that contains the whole pulse.
    pub fn window_center(&self, len: usize) -> usize {
        (len - self.window) / 2 + self.window / 2
    }
}

pub fn pulse_local_mean(p: &PulseModel) -> f64 {
    p.local_mean()
}

pub fn pulse_local_std(p: &PulseModel) -> f64 {
    p.local_std()
}

pub fn pulse_threshold(p: &PulseModel, k: f64) -> Result<f64> {
    if !(k >= 0.0) {
        return Err(Error::param("control parameter must be non-negative"));
    }
    Ok(p.threshold(k))
}

/// Largest local control parameter that still detects a width-`w` pulse
/// in an `n`-sample window: `sqrt((n - w) / w)`.
pub fn k_l_max(w: usize, n: usize) -> Result<f64> {
    if w == 0 || w >= n {
        return Err(Error::param(format!("need 1 <= W < n, got W={w}, n={n}")));
    }
    Ok(((n - w) as f64 / w as f64).sqrt())
}

/// `(W, k_l_max)` for every width in `widths`.
pub fn sweep_klmax(n: usize, widths: impl IntoIterator<Item = usize>) -> Result<Vec<(usize, f64)>> {
    widths
        .into_iter()
        .map(|w| Ok((w, k_l_max(w, n)?)))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRatio {
    pub w: usize,
    pub k: f64,
    pub t_over_a: f64,
}

impl ThresholdRatio {
    /// The pulse is detected only below one.
    pub fn detectable(&self) -> bool {
        self.t_over_a < 1.0
    }
}

/// Local threshold relative to the amplitude, ordered by width then `k`.
pub fn sweep_threshold_ratio(
    n: usize,
    ks: &[f64],
    widths: impl IntoIterator<Item = usize>,
) -> Result<Vec<ThresholdRatio>> {
    let mut out = Vec::new();
    for w in widths {
        let p = PulseModel::new(1.0, w, n)?;
        for &k in ks {
            out.push(ThresholdRatio {
                w,
                k,
                t_over_a: pulse_threshold(&p, k)?,
            });
        }
    }
    Ok(out)
}

/// Local mean and standard deviation measured on the constructed row at
/// the window centre, as `(mean, std)`.
pub fn empirical_center_stats(p: &PulseModel) -> Result<(f64, f64)> {
    let len = 3 * p.window;
    let maps = LocalStatMaps::new(&p.row(len), p.window)?;
    let c = p.window_center(len);
    Ok((maps.mean().get(c, 0), maps.std().get(c, 0)))
}

/// Largest `k` for which local statistics thresholding of the constructed
/// row still keeps the pulse centre, found by bisection to within `tol`.
pub fn empirical_klmax(p: &PulseModel, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::param("tolerance must be positive"));
    }
    let len = 3 * p.window;
    let maps = LocalStatMaps::new(&p.row(len), p.window)?;
    let c = p.window_center(len);
    let detects = |k: f64| maps.apply(k).binary.get(c, 0);
    let mut lo = 0.0;
    if !detects(lo) {
        return Ok(0.0);
    }
    let mut hi = 1.0;
    while detects(hi) {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::param("pulse detected at every control parameter"));
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if detects(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_examples() {
        let p = PulseModel::new(1.0, 3, 33).unwrap();
        assert!((pulse_local_mean(&p) - 3.0 / 33.0).abs() < 1e-15);
        let q = PulseModel::new(2.5, 16, 17).unwrap();
        assert!((q.local_mean() - 2.5 * 16.0 / 17.0).abs() < 1e-15);
        let r = PulseModel::new(1.0, 1, 2).unwrap();
        assert_eq!(r.local_std(), 0.5);
        assert_eq!(pulse_threshold(&p, 0.0).unwrap(), p.local_mean());
        assert!(pulse_threshold(&p, -1.0).is_err());
    }

    #[test]
    fn std_vanishes_as_width_fills_window() {
        let mut last = f64::INFINITY;
        for w in (500..1000).step_by(50) {
            let s = PulseModel::new(1.0, w, 1000).unwrap().local_std();
            if w > 500 {
                assert!(s < last);
            }
            last = s;
        }
        assert!(PulseModel::new(1.0, 999, 1000).unwrap().local_std() < 0.04);
    }

    #[test]
    fn bound_examples() {
        assert!((k_l_max(1, 33).unwrap() - 32f64.sqrt()).abs() < 1e-12);
        assert!((k_l_max(32, 33).unwrap() - (1.0f64 / 32.0).sqrt()).abs() < 1e-15);
        assert_eq!(k_l_max(16, 17).unwrap(), 0.25);
        assert!(k_l_max(17, 17).is_err());
        assert!(k_l_max(0, 17).is_err());
    }

    #[test]
    fn threshold_at_bound_equals_amplitude() {
        for n in [17usize, 33] {
            for w in 1..n {
                let p = PulseModel::new(3.0, w, n).unwrap();
                let t = p.threshold(k_l_max(w, n).unwrap());
                assert!((t - 3.0).abs() < 1e-12 * 3.0, "w={w} n={n}");
            }
        }
    }

    #[test]
    fn sweep_shapes() {
        let rows = sweep_klmax(33, 1..=32).unwrap();
        assert_eq!(rows.len(), 32);
        assert!((rows[0].1 - 5.656854).abs() < 1e-6);
        assert!((rows[31].1 - 0.1767767).abs() < 1e-6);
        assert!(rows.windows(2).all(|w| w[1].1 < w[0].1));

        let ratios = sweep_threshold_ratio(33, &[0.0, 2.0], 1..=32).unwrap();
        assert_eq!(ratios.len(), 64);
        for r in ratios.iter().filter(|r| r.k == 0.0) {
            assert!((r.t_over_a - r.w as f64 / 33.0).abs() < 1e-15);
        }
    }

    #[test]
    fn row_places_pulse_inside_window() {
        let p = PulseModel::new(1.0, 4, 17).unwrap();
        let row = p.row(51);
        let c = p.window_center(51);
        let start = p.pulse_start(51);
        assert!(start <= c && c < start + 4);
        assert_eq!(row.samples().iter().filter(|&&v| v == 1.0).count(), 4);
        assert!(c.abs_diff(start) <= 8 && (start + 3).abs_diff(c) <= 8);
    }

    #[test]
    fn pipeline_matches_closed_form() {
        for n in [17usize, 33] {
            for w in 1..=8 {
                let p = PulseModel::new(1.0, w, n).unwrap();
                let (m, s) = empirical_center_stats(&p).unwrap();
                assert!((m - p.local_mean()).abs() < 1e-12);
                assert!((s - p.local_std()).abs() < 1e-12);
                let kb = empirical_klmax(&p, 1e-9).unwrap();
                assert!((kb - k_l_max(w, n).unwrap()).abs() < 1e-6);
            }
        }
    }
}
