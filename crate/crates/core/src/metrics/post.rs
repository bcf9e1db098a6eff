//! Post-thresholding metrics: pixel-level false-alarm and detection rates,
//! target-level detection rate, ROC curves and the normalized
//! false-alarm-versus-`k` curve.
//!
//! The Pfa–k curve is built in four steps. The largest global control
//! parameter `k_max` that still detects the targets is the global SCR of
//! the map. The interval `[0, k_max]` is sampled uniformly, the false-alarm
//! rate of `mean + k * std` is measured at every sample, and the abscissa
//! is divided by `k_max` so that curves from different detectors share the
//! unit interval.
//!
//! ```
//! use irstd::metrics::post::{pfa_k_curve, CurveOptions};
//! use irstd::{GrayImage, GroundTruth, TargetRegion};
//!
//! let mut map = GrayImage::filled(9, 9, 0.0);
//! map.set(4, 4, 10.0);
//! let gt = GroundTruth::new(9, 9, vec![TargetRegion::from_mask([(4, 4)]).unwrap()]).unwrap();
//! let curve = pfa_k_curve(&map, &gt, &CurveOptions::default()).unwrap();
//! assert_eq!(curve.pfa_min, 0.0);
//! assert_eq!(curve.samples.last().unwrap().0, 1.0);
//! ```

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{BinaryImage, GrayImage};
use crate::io::{curve_to_csv, fmt_float};
use crate::metrics::pre::scr_global_of;
use crate::region::GroundTruth;
use crate::stats::{global_stats, RegionStats};
use crate::threshold::{stat_threshold_value, threshold_fixed};

/// Margin around target masks where detections count as neither hits nor
/// false alarms.
pub const DEFAULT_DILATION: usize = 1;
pub const DEFAULT_CURVE_SAMPLES: usize = 512;

/// Pixel counts behind `Pfa = n_f / n_tot` and `Pd = n_d / n_r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub n_f: usize,
    pub n_tot: usize,
    pub n_d: usize,
    pub n_r: usize,
}

impl ConfusionCounts {
    pub fn pfa(&self) -> f64 {
        self.n_f as f64 / self.n_tot as f64
    }

    /// `None` when there are no target pixels.
    pub fn pd(&self) -> Option<f64> {
        (self.n_r > 0).then(|| self.n_d as f64 / self.n_r as f64)
    }
}

fn check_dims(binary: &BinaryImage, gt: &GroundTruth) -> Result<()> {
    if binary.dims() != gt.dims() {
        return Err(Error::DimensionMismatch {
            left: binary.dims(),
            right: gt.dims(),
        });
    }
    Ok(())
}

/// Counts hits inside the target masks and false alarms outside the masks
/// dilated by `dilation` pixels.
pub fn pixel_confusion(
    binary: &BinaryImage,
    gt: &GroundTruth,
    dilation: usize,
) -> Result<ConfusionCounts> {
    check_dims(binary, gt)?;
    let inside = gt.union_mask();
    let near = inside.dilate(dilation);
    let mut counts = ConfusionCounts {
        n_f: 0,
        n_tot: binary.bits().len(),
        n_d: 0,
        n_r: gt.pixel_count(),
    };
    for ((&b, &t), &m) in binary.bits().iter().zip(inside.bits()).zip(near.bits()) {
        if !b {
            continue;
        }
        if t {
            counts.n_d += 1;
        } else if !m {
            counts.n_f += 1;
        }
    }
    Ok(counts)
}

/// Fraction of targets with at least one detected pixel inside the mask.
pub fn target_pd(binary: &BinaryImage, gt: &GroundTruth) -> Result<f64> {
    check_dims(binary, gt)?;
    if gt.targets().is_empty() {
        return Err(Error::NoTargets);
    }
    let hit = gt
        .targets()
        .iter()
        .filter(|t| t.mask().iter().any(|&(x, y)| binary.get(x, y)))
        .count();
    Ok(hit as f64 / gt.targets().len() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PdMode {
    Pixel,
    Target,
}

impl FromStr for PdMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pixel" => Ok(PdMode::Pixel),
            "target" => Ok(PdMode::Target),
            other => Err(Error::param(format!("unknown pd mode {other:?}"))),
        }
    }
}

/// `(pfa, pd)` pairs ordered by threshold, highest threshold first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<(f64, f64)>,
}

impl RocCurve {
    pub fn to_csv(&self) -> String {
        curve_to_csv(["pfa", "pd"], &self.points)
    }
}

pub fn roc_curve(
    map: &GrayImage,
    gt: &GroundTruth,
    thresholds: &[f64],
    mode: PdMode,
    dilation: usize,
) -> Result<RocCurve> {
    if thresholds.len() < 2 {
        return Err(Error::param("an ROC curve needs at least 2 thresholds"));
    }
    if thresholds.iter().any(|t| t.is_nan()) || thresholds.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::UnsortedThresholds);
    }
    if gt.targets().is_empty() {
        return Err(Error::NoTargets);
    }
    let points = thresholds
        .iter()
        .map(|&t| {
            let binary = threshold_fixed(map, t).binary;
            let counts = pixel_confusion(&binary, gt, dilation)?;
            let pd = match mode {
                PdMode::Pixel => counts.pd().ok_or(Error::NoTargets)?,
                PdMode::Target => target_pd(&binary, gt)?,
            };
            Ok((counts.pfa(), pd))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RocCurve { points })
}

/// How per-target global SCRs combine into one `k_max` for a map.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KMaxRule {
    /// Every target keeps at least one pixel up to `k_max`.
    #[default]
    Min,
    Max,
    Mean,
}

impl FromStr for KMaxRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min" => Ok(KMaxRule::Min),
            "max" => Ok(KMaxRule::Max),
            "mean" => Ok(KMaxRule::Mean),
            other => Err(Error::param(format!("unknown k_max rule {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CurveOptions {
    pub n_samples: usize,
    pub rule: KMaxRule,
    pub dilation: usize,
}

impl Default for CurveOptions {
    fn default() -> Self {
        Self {
            n_samples: DEFAULT_CURVE_SAMPLES,
            rule: KMaxRule::Min,
            dilation: DEFAULT_DILATION,
        }
    }
}

/// False-alarm rate against the normalized control parameter `k / k_max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PfaKCurve {
    pub k_max: f64,
    pub samples: Vec<(f64, f64)>,
    pub pfa_min: f64,
}

impl PfaKCurve {
    /// The un-normalized control parameter of sample `i`.
    pub fn k_at(&self, i: usize) -> f64 {
        let u = self.samples[i].0;
        if u == 1.0 {
            self.k_max
        } else {
            u * self.k_max
        }
    }

    pub fn to_csv(&self) -> String {
        curve_to_csv(["k", "pfa"], &self.samples)
    }

    /// Checks the curve's shape: abscissa strictly increasing from 0 to 1,
    /// false-alarm rate non-increasing and ending at `pfa_min`.
    pub fn check(&self) -> std::result::Result<(), String> {
        let s = &self.samples;
        if s.len() < 2 {
            return Err("fewer than 2 samples".into());
        }
        if s[0].0 != 0.0 || s[s.len() - 1].0 != 1.0 {
            return Err("abscissa does not span [0, 1]".into());
        }
        if let Some(i) = s.windows(2).position(|w| w[1].0 <= w[0].0) {
            return Err(format!("abscissa not increasing at sample {}", i + 1));
        }
        if let Some(i) = s.windows(2).position(|w| w[1].1 > w[0].1) {
            return Err(format!("pfa increases at sample {}", i + 1));
        }
        if s[s.len() - 1].1 != self.pfa_min {
            return Err("pfa_min differs from the last sample".into());
        }
        Ok(())
    }
}

/// Sorted values of the pixels that may count as false alarms.
struct FalseAlarmCounter {
    sorted: Vec<f64>,
    n_tot: usize,
}

impl FalseAlarmCounter {
    fn new(map: &GrayImage, eligible: Option<&BinaryImage>) -> Self {
        let mut sorted: Vec<f64> = match eligible {
            Some(e) => map
                .samples()
                .iter()
                .zip(e.bits())
                .filter(|(_, &b)| b)
                .map(|(&v, _)| v)
                .collect(),
            None => map.samples().to_vec(),
        };
        sorted.sort_unstable_by(f64::total_cmp);
        Self {
            sorted,
            n_tot: map.len(),
        }
    }

    /// Number of eligible pixels strictly above `t`.
    fn above(&self, t: f64) -> usize {
        self.sorted.len() - self.sorted.partition_point(|&v| v <= t)
    }

    fn curve(&self, stats: &RegionStats, k_max: f64, n_samples: usize) -> PfaKCurve {
        let last = n_samples - 1;
        let samples: Vec<(f64, f64)> = (0..n_samples)
            .map(|i| {
                let (u, k) = if i == last {
                    (1.0, k_max)
                } else {
                    let u = i as f64 / last as f64;
                    (u, u * k_max)
                };
                let t = stat_threshold_value(stats, k);
                (u, self.above(t) as f64 / self.n_tot as f64)
            })
            .collect();
        PfaKCurve {
            k_max,
            pfa_min: samples[last].1,
            samples,
        }
    }
}

fn check_samples(n_samples: usize) -> Result<()> {
    if n_samples < 2 {
        return Err(Error::param("a curve needs at least 2 samples"));
    }
    Ok(())
}

/// `k_max` of a map: the per-target global SCRs combined by `rule`.
pub fn k_max(map: &GrayImage, gt: &GroundTruth, rule: KMaxRule) -> Result<f64> {
    if gt.targets().is_empty() {
        return Err(Error::NoTargets);
    }
    let per_target = gt
        .targets()
        .iter()
        .map(|t| scr_global_of(map, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(match rule {
        KMaxRule::Min => per_target.iter().copied().fold(f64::INFINITY, f64::min),
        KMaxRule::Max => per_target.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        KMaxRule::Mean => per_target.iter().sum::<f64>() / per_target.len() as f64,
    })
}

/// Normalized Pfa–k curve of a saliency map with at least one target.
pub fn pfa_k_curve(map: &GrayImage, gt: &GroundTruth, opts: &CurveOptions) -> Result<PfaKCurve> {
    check_samples(opts.n_samples)?;
    if map.dims() != gt.dims() {
        return Err(Error::DimensionMismatch {
            left: map.dims(),
            right: gt.dims(),
        });
    }
    let stats = global_stats(map);
    if stats.std == 0.0 {
        return Err(Error::ConstantMap);
    }
    let k_max = k_max(map, gt, opts.rule)?;
    if !(k_max > 0.0) {
        return Err(Error::NonPositiveKMax(k_max));
    }
    let near = gt.union_mask().dilate(opts.dilation);
    let eligible = BinaryImage::new(
        map.width(),
        map.height(),
        near.bits().iter().map(|&b| !b).collect(),
    )?;
    Ok(FalseAlarmCounter::new(map, Some(&eligible)).curve(&stats, k_max, opts.n_samples))
}

/// Largest `k` at which the global threshold still keeps a pixel of the
/// map: `(max - mean) / std`. Serves as the sweep range on target-free
/// maps.
pub fn k_reference(map: &GrayImage) -> Result<f64> {
    let stats = global_stats(map);
    if stats.std == 0.0 {
        return Err(Error::ConstantMap);
    }
    Ok((map.max() - stats.mean) / stats.std)
}

/// False-alarm sweep of a map without targets over `[0, k_ref]`, where
/// every detection is a false alarm. The returned curve stores `k_ref` in
/// `k_max`.
pub fn pfa_k_curve_target_free(map: &GrayImage, k_ref: f64, n_samples: usize) -> Result<PfaKCurve> {
    check_samples(n_samples)?;
    let stats = global_stats(map);
    if stats.std == 0.0 {
        return Err(Error::ConstantMap);
    }
    if !(k_ref > 0.0 && k_ref.is_finite()) {
        return Err(Error::NonPositiveKMax(k_ref));
    }
    Ok(FalseAlarmCounter::new(map, None).curve(&stats, k_ref, n_samples))
}

/// Pointwise order of two curves on a shared abscissa grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dominance {
    /// The first curve is lower at every abscissa.
    FirstStrict,
    /// The first curve is never higher and lower somewhere.
    FirstWeak,
    Tie,
    SecondWeak,
    SecondStrict,
    Crossing,
}

impl fmt::Display for Dominance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dominance::FirstStrict => "first-strict",
            Dominance::FirstWeak => "first-weak",
            Dominance::Tie => "tie",
            Dominance::SecondWeak => "second-weak",
            Dominance::SecondStrict => "second-strict",
            Dominance::Crossing => "crossing",
        })
    }
}

/// Piecewise-linear interpolation of a curve at abscissa `u`.
fn interpolate(samples: &[(f64, f64)], u: f64) -> f64 {
    let i = samples.partition_point(|&(x, _)| x < u);
    if i == 0 {
        return samples[0].1;
    }
    if i == samples.len() {
        return samples[samples.len() - 1].1;
    }
    let (x1, y1) = samples[i];
    if x1 == u {
        return y1;
    }
    let (x0, y0) = samples[i - 1];
    y0 + (y1 - y0) * (u - x0) / (x1 - x0)
}

fn dominance(a: &[f64], b: &[f64]) -> Dominance {
    let less = a.iter().zip(b).filter(|(x, y)| x < y).count();
    let more = a.iter().zip(b).filter(|(x, y)| x > y).count();
    let n = a.len();
    match (less, more) {
        (0, 0) => Dominance::Tie,
        (l, 0) if l == n => Dominance::FirstStrict,
        (_, 0) => Dominance::FirstWeak,
        (0, m) if m == n => Dominance::SecondStrict,
        (0, _) => Dominance::SecondWeak,
        _ => Dominance::Crossing,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairOrder {
    pub first: String,
    pub second: String,
    pub order: Dominance,
}

/// Side-by-side view of several labelled Pfa–k curves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveComparison {
    pub labels: Vec<String>,
    pub k_max: Vec<f64>,
    pub pfa_min: Vec<f64>,
    /// Union of all sample abscissae.
    pub grid: Vec<f64>,
    /// `overlay[c][i]` is curve `c` interpolated at `grid[i]`.
    pub overlay: Vec<Vec<f64>>,
    pub pairs: Vec<PairOrder>,
}

impl CurveComparison {
    /// `label,k_max,pfa_min`, one row per curve.
    pub fn table_csv(&self) -> String {
        let mut out = String::from("label,k_max,pfa_min\n");
        for ((l, k), p) in self.labels.iter().zip(&self.k_max).zip(&self.pfa_min) {
            out.push_str(&format!("{l},{},{}\n", fmt_float(*k), fmt_float(*p)));
        }
        out
    }

    /// `k,<label>...`, one row per grid abscissa.
    pub fn overlay_csv(&self) -> String {
        let mut out = String::from("k");
        for l in &self.labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for (i, &u) in self.grid.iter().enumerate() {
            out.push_str(&fmt_float(u));
            for c in &self.overlay {
                out.push(',');
                out.push_str(&fmt_float(c[i]));
            }
            out.push('\n');
        }
        out
    }

    /// `first,second,order` for every pair of curves.
    pub fn pairs_csv(&self) -> String {
        let mut out = String::from("first,second,order\n");
        for p in &self.pairs {
            out.push_str(&format!("{},{},{}\n", p.first, p.second, p.order));
        }
        out
    }
}

pub fn compare_curves(curves: &[(&str, &PfaKCurve)]) -> Result<CurveComparison> {
    if curves.len() < 2 {
        return Err(Error::param("comparison needs at least 2 curves"));
    }
    if let Some((l, _)) = curves.iter().find(|(_, c)| c.samples.is_empty()) {
        return Err(Error::param(format!("curve {l:?} has no samples")));
    }
    let mut grid: Vec<f64> = curves
        .iter()
        .flat_map(|(_, c)| c.samples.iter().map(|s| s.0))
        .collect();
    grid.sort_unstable_by(f64::total_cmp);
    grid.dedup();
    let overlay: Vec<Vec<f64>> = curves
        .iter()
        .map(|(_, c)| grid.iter().map(|&u| interpolate(&c.samples, u)).collect())
        .collect();
    let mut pairs = Vec::new();
    for i in 0..curves.len() {
        for j in i + 1..curves.len() {
            pairs.push(PairOrder {
                first: curves[i].0.to_string(),
                second: curves[j].0.to_string(),
                order: dominance(&overlay[i], &overlay[j]),
            });
        }
    }
    Ok(CurveComparison {
        labels: curves.iter().map(|(l, _)| l.to_string()).collect(),
        k_max: curves.iter().map(|(_, c)| c.k_max).collect(),
        pfa_min: curves.iter().map(|(_, c)| c.pfa_min).collect(),
        grid,
        overlay,
        pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::region::TargetRegion;
    use crate::threshold::global_stat_threshold;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn single(w: usize, h: usize, x: usize, y: usize) -> GroundTruth {
        GroundTruth::new(w, h, vec![TargetRegion::from_mask([(x, y)]).unwrap()]).unwrap()
    }

    #[test]
    fn confusion_examples() {
        let gt = single(4, 4, 1, 1);
        let exact = gt.union_mask();
        let c = pixel_confusion(&exact, &gt, 1).unwrap();
        assert_eq!((c.n_d, c.n_r, c.n_f), (1, 1, 0));

        let none = BinaryImage::empty(4, 4);
        let c = pixel_confusion(&none, &gt, 1).unwrap();
        assert_eq!((c.n_d, c.n_f), (0, 0));

        let b = BinaryImage::from_coords(4, 4, &[(1, 1), (3, 3)]).unwrap();
        let c = pixel_confusion(&b, &gt, 1).unwrap();
        assert_eq!(
            c,
            ConfusionCounts {
                n_f: 1,
                n_tot: 16,
                n_d: 1,
                n_r: 1
            }
        );
        assert_eq!(c.pfa(), 1.0 / 16.0);
    }

    #[test]
    fn margin_pixels_count_toward_neither() {
        let gt = single(5, 5, 2, 2);
        let b = BinaryImage::from_coords(5, 5, &[(1, 1), (3, 2)]).unwrap();
        let c = pixel_confusion(&b, &gt, 1).unwrap();
        assert_eq!((c.n_d, c.n_f), (0, 0));
        let c0 = pixel_confusion(&b, &gt, 0).unwrap();
        assert_eq!((c0.n_d, c0.n_f), (0, 2));
    }

    #[test]
    fn confusion_rejects_mismatch() {
        let gt = single(4, 4, 0, 0);
        assert!(pixel_confusion(&BinaryImage::empty(4, 5), &gt, 1).is_err());
    }

    #[test]
    fn target_pd_examples() {
        let gt = GroundTruth::new(
            8,
            8,
            vec![
                TargetRegion::from_mask([(1, 1), (2, 1)]).unwrap(),
                TargetRegion::from_mask([(6, 6)]).unwrap(),
            ],
        )
        .unwrap();
        let both = BinaryImage::from_coords(8, 8, &[(2, 1), (6, 6)]).unwrap();
        assert_eq!(target_pd(&both, &gt).unwrap(), 1.0);
        let one = BinaryImage::from_coords(8, 8, &[(1, 1)]).unwrap();
        assert_eq!(target_pd(&one, &gt).unwrap(), 0.5);
        let adjacent = BinaryImage::from_coords(8, 8, &[(5, 6)]).unwrap();
        assert_eq!(target_pd(&adjacent, &gt).unwrap(), 0.0);
        assert!(matches!(
            target_pd(&both, &GroundTruth::empty(8, 8)),
            Err(Error::NoTargets)
        ));
    }

    fn random_map(rng: &mut ChaCha8Rng, w: usize, h: usize) -> GrayImage {
        GrayImage::from_fn(w, h, |_, _| rng.random_range(0.0..100.0))
    }

    #[test]
    fn roc_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let map = random_map(&mut rng, 16, 16);
        let gt = single(16, 16, 8, 8);
        let roc = roc_curve(&map, &gt, &[1000.0, -1.0], PdMode::Pixel, 1).unwrap();
        assert_eq!(roc.points[0], (0.0, 0.0));
        assert_eq!(roc.points[1], ((256.0 - 9.0) / 256.0, 1.0));
    }

    #[test]
    fn roc_rejects_bad_thresholds() {
        let map = GrayImage::filled(4, 4, 0.0);
        let gt = single(4, 4, 0, 0);
        assert!(matches!(
            roc_curve(&map, &gt, &[1.0, 2.0], PdMode::Pixel, 1),
            Err(Error::UnsortedThresholds)
        ));
        assert!(matches!(
            roc_curve(&map, &gt, &[1.0, 1.0], PdMode::Pixel, 1),
            Err(Error::UnsortedThresholds)
        ));
        assert!(roc_curve(&map, &gt, &[1.0], PdMode::Pixel, 1).is_err());
    }

    #[test]
    fn roc_matches_recount() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let map = random_map(&mut rng, 16, 16);
        let gt = GroundTruth::new(
            16,
            16,
            vec![TargetRegion::from_mask([(4, 4), (5, 4), (4, 5)]).unwrap()],
        )
        .unwrap();
        let ts: Vec<f64> = (0..8).rev().map(|i| i as f64 * 12.5).collect();
        let roc = roc_curve(&map, &gt, &ts, PdMode::Pixel, 1).unwrap();
        let near = gt.union_mask().dilate(1);
        for (&t, &(pfa, pd)) in ts.iter().zip(&roc.points) {
            let mut nf = 0;
            let mut nd = 0;
            for y in 0..16 {
                for x in 0..16 {
                    if map.get(x, y) > t {
                        if [(4, 4), (5, 4), (4, 5)].contains(&(x, y)) {
                            nd += 1;
                        } else if !near.get(x, y) {
                            nf += 1;
                        }
                    }
                }
            }
            assert_eq!(pfa, nf as f64 / 256.0);
            assert_eq!(pd, nd as f64 / 3.0);
        }
        assert!(roc.points.windows(2).all(|w| w[1].0 >= w[0].0 && w[1].1 >= w[0].1));
    }

    #[test]
    fn single_bright_pixel_curve() {
        let mut map = GrayImage::filled(11, 11, 0.0);
        map.set(5, 5, 7.0);
        let gt = single(11, 11, 5, 5);
        let c = pfa_k_curve(&map, &gt, &CurveOptions::default()).unwrap();
        assert_eq!(c.samples.len(), DEFAULT_CURVE_SAMPLES);
        assert_eq!(c.pfa_min, 0.0);
        assert!(c.samples.iter().all(|s| s.1 == 0.0));
        assert!((c.k_max - 120f64.sqrt()).abs() < 1e-12);
        c.check().unwrap();
    }

    #[test]
    fn curve_errors() {
        let map = GrayImage::filled(5, 5, 1.0);
        let gt = single(5, 5, 2, 2);
        assert!(matches!(
            pfa_k_curve(&map, &gt, &CurveOptions::default()),
            Err(Error::ConstantMap)
        ));
        let mut m2 = map.clone();
        m2.set(0, 0, 9.0);
        assert!(matches!(
            pfa_k_curve(&m2, &GroundTruth::empty(5, 5), &CurveOptions::default()),
            Err(Error::NoTargets)
        ));
        // The target is darker than the mean.
        let mut m3 = map.clone();
        m3.set(2, 2, 0.0);
        assert!(matches!(
            pfa_k_curve(&m3, &gt, &CurveOptions::default()),
            Err(Error::NonPositiveKMax(_))
        ));
        let opts = CurveOptions {
            n_samples: 1,
            ..CurveOptions::default()
        };
        assert!(pfa_k_curve(&m2, &gt, &opts).is_err());
    }

    #[test]
    fn curve_matches_threshold_recount() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut map = random_map(&mut rng, 24, 24);
        map.set(12, 12, 400.0);
        map.set(3, 20, 300.0);
        let gt = GroundTruth::new(
            24,
            24,
            vec![
                TargetRegion::from_mask([(12, 12), (13, 12)]).unwrap(),
                TargetRegion::from_mask([(3, 20)]).unwrap(),
            ],
        )
        .unwrap();
        let opts = CurveOptions {
            n_samples: 64,
            ..CurveOptions::default()
        };
        let c = pfa_k_curve(&map, &gt, &opts).unwrap();
        c.check().unwrap();
        for i in 0..c.samples.len() {
            let k = c.k_at(i);
            let b = global_stat_threshold(&map, k).unwrap().binary;
            let counts = pixel_confusion(&b, &gt, 1).unwrap();
            assert_eq!(c.samples[i].1, counts.pfa(), "sample {i}");
        }
        // k = 0 thresholds at the mean.
        let mean = global_stats(&map).mean;
        let b = threshold_fixed(&map, mean).binary;
        assert_eq!(c.samples[0].1, pixel_confusion(&b, &gt, 1).unwrap().pfa());
        // Each target keeps a pixel just below k_max; one loses all just above.
        let below = global_stat_threshold(&map, c.k_max - 1e-6).unwrap().binary;
        assert!(gt
            .targets()
            .iter()
            .all(|t| t.mask().iter().any(|&(x, y)| below.get(x, y))));
        let above = global_stat_threshold(&map, c.k_max + 1e-6).unwrap().binary;
        assert!(gt
            .targets()
            .iter()
            .any(|t| t.mask().iter().all(|&(x, y)| !above.get(x, y))));
    }

    #[test]
    fn k_max_rules() {
        let mut map = GrayImage::filled(10, 10, 0.0);
        map.set(2, 2, 10.0);
        map.set(7, 7, 20.0);
        let gt = GroundTruth::new(
            10,
            10,
            vec![
                TargetRegion::from_mask([(2, 2)]).unwrap(),
                TargetRegion::from_mask([(7, 7)]).unwrap(),
            ],
        )
        .unwrap();
        let lo = k_max(&map, &gt, KMaxRule::Min).unwrap();
        let hi = k_max(&map, &gt, KMaxRule::Max).unwrap();
        let mid = k_max(&map, &gt, KMaxRule::Mean).unwrap();
        assert!(lo < mid && mid < hi);
        assert!((mid - 0.5 * (lo + hi)).abs() < 1e-12);
    }

    #[test]
    fn target_free_sweep() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let map = random_map(&mut rng, 20, 20);
        let k_ref = k_reference(&map).unwrap();
        let c = pfa_k_curve_target_free(&map, k_ref, 32).unwrap();
        c.check().unwrap();
        assert!((c.samples[0].1 - 0.5).abs() < 0.15);
        assert_eq!(c.pfa_min, 0.0);
    }

    fn curve(points: &[f64]) -> PfaKCurve {
        let n = points.len();
        PfaKCurve {
            k_max: 1.0,
            samples: points
                .iter()
                .enumerate()
                .map(|(i, &p)| (i as f64 / (n - 1) as f64, p))
                .collect(),
            pfa_min: points[n - 1],
        }
    }

    #[test]
    fn comparison_orders() {
        let a = curve(&[0.5, 0.2, 0.1]);
        let b = curve(&[0.6, 0.3, 0.2]);
        let cmp = compare_curves(&[("a", &a), ("b", &b), ("a2", &a)]).unwrap();
        assert_eq!(cmp.pairs[0].order, Dominance::FirstStrict);
        assert_eq!(cmp.pairs[1].order, Dominance::Tie);
        assert_eq!(cmp.pairs[2].order, Dominance::SecondStrict);
        let c = curve(&[0.7, 0.1, 0.0]);
        let cmp = compare_curves(&[("a", &a), ("c", &c)]).unwrap();
        assert_eq!(cmp.pairs[0].order, Dominance::Crossing);
        let d = curve(&[0.5, 0.3, 0.1]);
        let cmp = compare_curves(&[("a", &a), ("d", &d)]).unwrap();
        assert_eq!(cmp.pairs[0].order, Dominance::FirstWeak);
        assert!(compare_curves(&[("a", &a)]).is_err());
        assert_eq!(
            cmp.table_csv().lines().next().unwrap(),
            "label,k_max,pfa_min"
        );
        assert_eq!(cmp.overlay_csv().lines().count(), 4);
    }

    #[test]
    fn comparison_interpolates_mismatched_grids() {
        let a = curve(&[1.0, 0.0]);
        let b = curve(&[0.9, 0.45, 0.0]);
        let cmp = compare_curves(&[("a", &a), ("b", &b)]).unwrap();
        assert_eq!(cmp.grid, vec![0.0, 0.5, 1.0]);
        assert_eq!(cmp.overlay[0], vec![1.0, 0.5, 0.0]);
        assert_eq!(cmp.pairs[0].order, Dominance::SecondWeak);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn tolerance_zero_partitions_detections(
            seed in any::<u64>(),
            t in 0.0f64..100.0,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let map = random_map(&mut rng, 12, 10);
            let gt = GroundTruth::new(
                12,
                10,
                vec![TargetRegion::from_mask([(3, 3), (4, 3), (3, 4)]).unwrap()],
            )
            .unwrap();
            let b = threshold_fixed(&map, t).binary;
            let c = pixel_confusion(&b, &gt, 0).unwrap();
            prop_assert_eq!(c.n_d + c.n_f, b.count_ones());
            prop_assert!(c.n_f <= c.n_tot && c.n_d <= c.n_r);
        }

        #[test]
        fn dilated_detections_never_lose_targets(seed in any::<u64>(), t in 50.0f64..100.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let map = random_map(&mut rng, 12, 12);
            let gt = GroundTruth::new(
                12,
                12,
                vec![
                    TargetRegion::from_mask([(2, 2)]).unwrap(),
                    TargetRegion::from_mask([(8, 9), (9, 9)]).unwrap(),
                ],
            )
            .unwrap();
            let b = threshold_fixed(&map, t).binary;
            prop_assert!(target_pd(&b.dilate(1), &gt).unwrap() >= target_pd(&b, &gt).unwrap());
        }

        #[test]
        fn curves_are_monotone(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut map = random_map(&mut rng, 16, 16);
            map.set(8, 8, 250.0);
            let gt = single(16, 16, 8, 8);
            let c = pfa_k_curve(&map, &gt, &CurveOptions { n_samples: 40, ..CurveOptions::default() }).unwrap();
            prop_assert!(c.check().is_ok());
            prop_assert!(c.samples.iter().all(|s| s.1 >= c.pfa_min));
        }
    }
}
