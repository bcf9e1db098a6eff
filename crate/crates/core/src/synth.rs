//! Deterministic synthetic scenes with ground truth.
//!
//! A scene is a sum of background layers, target footprints and seeded
//! Gaussian noise. The ground-truth mask of a target holds the pixels where
//! its noiseless contribution exceeds `mask_fraction` of its amplitude.
//!
//! ```
//! use irstd::synth::{render, Noise, SceneSpec, TargetShape, TargetSpec};
//!
//! let spec = SceneSpec {
//!     width: 15,
//!     height: 15,
//!     background: vec![],
//!     noise: Noise { sigma: 0.0, seed: 0 },
//!     targets: vec![TargetSpec {
//!         centroid: (7.0, 7.0),
//!         amplitude: 100.0,
//!         shape: TargetShape::Gaussian { spread: 1.0 },
//!     }],
//!     mask_fraction: 0.05,
//! };
//! let scene = render(&spec).unwrap();
//! assert_eq!(scene.image.max(), 100.0);
//! assert_eq!(scene.gt.targets()[0].len(), 21);
//! ```
//!
//! Gaussian targets match the blob prior built into several detectors, so
//! the suite also carries a clutter-edge scene where that prior does not
//! hold.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{Coord, GrayImage};
use crate::region::{GroundTruth, TargetRegion};

pub const DEFAULT_MASK_FRACTION: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

/// One additive background layer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Background {
    Flat {
        level: f64,
    },
    /// Linear ramp from `low` at the first column (or row) to `high` at the
    /// last.
    Gradient {
        low: f64,
        high: f64,
        axis: Axis,
    },
    /// `blobs` Gaussian bumps of the given spread at seeded random
    /// positions, amplitudes drawn uniformly from `[amplitude/2, amplitude]`.
    Clutter {
        blobs: usize,
        spread: f64,
        amplitude: f64,
        seed: u64,
    },
    /// Step from `low` to `high` where the coordinate along `axis` reaches
    /// `position`.
    Edge {
        low: f64,
        high: f64,
        position: f64,
        axis: Axis,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Noise {
    pub sigma: f64,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TargetShape {
    Gaussian { spread: f64 },
    /// Flat rectangle of `width`x`height` pixels centred on the centroid.
    Block { width: usize, height: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetSpec {
    pub centroid: (f64, f64),
    pub amplitude: f64,
    pub shape: TargetShape,
}

impl TargetSpec {
    /// Noiseless contribution at pixel `(x, y)`; coordinates may lie
    /// outside the image.
    pub fn value(&self, x: isize, y: isize) -> f64 {
        let (cx, cy) = self.centroid;
        match self.shape {
            TargetShape::Gaussian { spread } => {
                let d2 = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
                self.amplitude * (-d2 / (2.0 * spread * spread)).exp()
            }
            TargetShape::Block { width, height } => {
                let x0 = (cx - (width as f64 - 1.0) / 2.0).round() as isize;
                let y0 = (cy - (height as f64 - 1.0) / 2.0).round() as isize;
                let inside = (x0..x0 + width as isize).contains(&x)
                    && (y0..y0 + height as isize).contains(&y);
                if inside {
                    self.amplitude
                } else {
                    0.0
                }
            }
        }
    }

    /// Half-extent of the pixels that can exceed `fraction` of the
    /// amplitude, measured from the rounded centroid.
    fn reach(&self, fraction: f64) -> isize {
        match self.shape {
            TargetShape::Gaussian { spread } => {
                (spread * (2.0 * (1.0 / fraction).ln()).sqrt()).ceil() as isize + 1
            }
            TargetShape::Block { width, height } => width.max(height) as isize,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.amplitude.is_finite() && self.amplitude > 0.0) {
            return Err(Error::param("target amplitude must be positive"));
        }
        if !(self.centroid.0.is_finite() && self.centroid.1.is_finite()) {
            return Err(Error::param("target centroid must be finite"));
        }
        match self.shape {
            TargetShape::Gaussian { spread } if !(spread.is_finite() && spread > 0.0) => {
                Err(Error::param("target spread must be positive"))
            }
            TargetShape::Block { width, height } if width == 0 || height == 0 => {
                Err(Error::param("block target must be non-empty"))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    #[serde(default)]
    pub background: Vec<Background>,
    pub noise: Noise,
    #[serde(default)]
    pub targets: Vec<TargetSpec>,
    #[serde(default = "default_mask_fraction")]
    pub mask_fraction: f64,
}

fn default_mask_fraction() -> f64 {
    DEFAULT_MASK_FRACTION
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scene {
    pub image: GrayImage,
    pub gt: GroundTruth,
    pub spec: SceneSpec,
}

fn background_layer(layer: &Background, w: usize, h: usize) -> Result<GrayImage> {
    let along = |axis: Axis, x: usize, y: usize| match axis {
        Axis::X => (x, w),
        Axis::Y => (y, h),
    };
    Ok(match *layer {
        Background::Flat { level } => GrayImage::filled(w, h, level),
        Background::Gradient { low, high, axis } => GrayImage::from_fn(w, h, |x, y| {
            let (i, n) = along(axis, x, y);
            if n == 1 {
                low
            } else {
                low + (high - low) * i as f64 / (n - 1) as f64
            }
        }),
        Background::Clutter {
            blobs,
            spread,
            amplitude,
            seed,
        } => {
            if !(spread > 0.0 && amplitude.is_finite()) {
                return Err(Error::param("clutter needs a positive spread"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let bumps: Vec<(f64, f64, f64)> = (0..blobs)
                .map(|_| {
                    let bx = rng.random_range(0.0..w as f64);
                    let by = rng.random_range(0.0..h as f64);
                    let a = amplitude * rng.random_range(0.5..=1.0);
                    (bx, by, a)
                })
                .collect();
            let two_s2 = 2.0 * spread * spread;
            GrayImage::from_fn(w, h, |x, y| {
                bumps
                    .iter()
                    .map(|&(bx, by, a)| {
                        let d2 = (x as f64 - bx).powi(2) + (y as f64 - by).powi(2);
                        a * (-d2 / two_s2).exp()
                    })
                    .sum()
            })
        }
        Background::Edge {
            low,
            high,
            position,
            axis,
        } => GrayImage::from_fn(w, h, |x, y| {
            if (along(axis, x, y).0 as f64) < position {
                low
            } else {
                high
            }
        }),
    })
}

/// Sum of the background layers alone.
pub fn render_background(spec: &SceneSpec) -> Result<GrayImage> {
    let (w, h) = (spec.width, spec.height);
    let mut acc = vec![0.0; w * h];
    for layer in &spec.background {
        let img = background_layer(layer, w, h)?;
        for (a, v) in acc.iter_mut().zip(img.samples()) {
            *a += v;
        }
    }
    GrayImage::new(w, h, acc)
}

fn target_mask(t: &TargetSpec, w: usize, h: usize, fraction: f64) -> Result<Vec<Coord>> {
    let cut = fraction * t.amplitude;
    let r = t.reach(fraction);
    let (cx, cy) = (t.centroid.0.round() as isize, t.centroid.1.round() as isize);
    let mut mask = Vec::new();
    for y in cy - r..=cy + r {
        for x in cx - r..=cx + r {
            if t.value(x, y) > cut {
                if x < 0 || y < 0 || x >= w as isize || y >= h as isize {
                    return Err(Error::param(format!(
                        "target at {:?} extends outside the {w}x{h} image",
                        t.centroid
                    )));
                }
                mask.push((x as usize, y as usize));
            }
        }
    }
    Ok(mask)
}

/// Renders `background + targets + noise`. Identical specs give
/// bit-identical images.
pub fn render(spec: &SceneSpec) -> Result<Scene> {
    let (w, h) = (spec.width, spec.height);
    if w == 0 || h == 0 {
        return Err(Error::InvalidDimensions {
            width: w,
            height: h,
            len: 0,
        });
    }
    if !(spec.mask_fraction > 0.0 && spec.mask_fraction < 1.0) {
        return Err(Error::param("mask fraction must lie in (0, 1)"));
    }
    if !(spec.noise.sigma.is_finite() && spec.noise.sigma >= 0.0) {
        return Err(Error::param("noise sigma must be non-negative"));
    }
    let mut samples = render_background(spec)?.into_samples();
    let mut regions = Vec::with_capacity(spec.targets.len());
    for t in &spec.targets {
        t.validate()?;
        regions.push(TargetRegion::from_mask(target_mask(
            t,
            w,
            h,
            spec.mask_fraction,
        )?)?);
        for (i, s) in samples.iter_mut().enumerate() {
            *s += t.value((i % w) as isize, (i / w) as isize);
        }
    }
    let gt = GroundTruth::new(w, h, regions)?;
    if spec.noise.sigma > 0.0 {
        let normal = Normal::new(0.0, spec.noise.sigma)
            .map_err(|e| Error::param(format!("noise: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(spec.noise.seed);
        for s in &mut samples {
            *s += normal.sample(&mut rng);
        }
    }
    Ok(Scene {
        image: GrayImage::new(w, h, samples)?,
        gt,
        spec: spec.clone(),
    })
}

pub const SUITE_SIZE: usize = 128;

/// Names of the standard scenes, in suite order.
pub const SUITE_NAMES: [&str; 6] = [
    "low-noise",
    "strong-noise",
    "target-free",
    "multi-target",
    "gradient",
    "clutter-edge",
];

fn gaussian(x: f64, y: f64, amplitude: f64, spread: f64) -> TargetSpec {
    TargetSpec {
        centroid: (x, y),
        amplitude,
        shape: TargetShape::Gaussian { spread },
    }
}

fn suite_spec(background: Vec<Background>, sigma: f64, seed: u64, targets: Vec<TargetSpec>) -> SceneSpec {
    SceneSpec {
        width: SUITE_SIZE,
        height: SUITE_SIZE,
        background,
        noise: Noise { sigma, seed },
        targets,
        mask_fraction: DEFAULT_MASK_FRACTION,
    }
}

/// Specs of the six standard scenes, all 128x128:
///
/// 1. low noise, one target;
/// 2. strong noise, one target;
/// 3. clutter and noise, no target;
/// 4. three targets of different size;
/// 5. horizontal intensity ramp, one target;
/// 6. vertical step edge with clutter, one target.
pub fn standard_specs() -> Vec<SceneSpec> {
    let flat = |level| Background::Flat { level };
    vec![
        suite_spec(vec![flat(100.0)], 2.0, 101, vec![gaussian(64.0, 64.0, 40.0, 1.5)]),
        suite_spec(vec![flat(100.0)], 10.0, 102, vec![gaussian(60.0, 70.0, 140.0, 1.5)]),
        suite_spec(
            vec![
                flat(100.0),
                Background::Clutter {
                    blobs: 12,
                    spread: 6.0,
                    amplitude: 20.0,
                    seed: 203,
                },
            ],
            4.0,
            103,
            vec![],
        ),
        suite_spec(
            vec![flat(100.0)],
            3.0,
            104,
            vec![
                gaussian(32.0, 40.0, 40.0, 1.0),
                gaussian(90.0, 30.0, 50.0, 1.5),
                gaussian(70.0, 96.0, 60.0, 2.0),
            ],
        ),
        suite_spec(
            vec![Background::Gradient {
                low: 60.0,
                high: 140.0,
                axis: Axis::X,
            }],
            3.0,
            105,
            vec![gaussian(80.0, 50.0, 40.0, 1.5)],
        ),
        suite_spec(
            vec![
                Background::Edge {
                    low: 80.0,
                    high: 120.0,
                    position: 64.0,
                    axis: Axis::X,
                },
                Background::Clutter {
                    blobs: 10,
                    spread: 5.0,
                    amplitude: 15.0,
                    seed: 206,
                },
            ],
            3.0,
            106,
            vec![gaussian(40.0, 80.0, 60.0, 1.2)],
        ),
    ]
}

pub fn standard_suite() -> Vec<Scene> {
    standard_specs()
        .iter()
        .map(|s| render(s).expect("standard scenes are valid"))
        .collect()
}

/// 256x256 scene with one 10-pixel block target at 200 over a noisy
/// background of mean 100.
pub fn tiny_target_spec() -> SceneSpec {
    SceneSpec {
        width: 256,
        height: 256,
        background: vec![Background::Flat { level: 100.0 }],
        noise: Noise {
            sigma: 10.0,
            seed: 107,
        },
        targets: vec![TargetSpec {
            centroid: (130.0, 120.0),
            amplitude: 100.0,
            shape: TargetShape::Block {
                width: 5,
                height: 2,
            },
        }],
        mask_fraction: DEFAULT_MASK_FRACTION,
    }
}

pub fn tiny_target_scene() -> Scene {
    render(&tiny_target_spec()).expect("tiny-target scene is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bare(w: usize, h: usize, targets: Vec<TargetSpec>) -> SceneSpec {
        SceneSpec {
            width: w,
            height: h,
            background: vec![],
            noise: Noise { sigma: 0.0, seed: 0 },
            targets,
            mask_fraction: DEFAULT_MASK_FRACTION,
        }
    }

    #[test]
    fn gaussian_mask_is_enumerable_disk() {
        let s = render(&bare(21, 21, vec![gaussian(10.0, 10.0, 100.0, 1.0)])).unwrap();
        assert_eq!(s.image.get(10, 10), 100.0);
        assert_eq!(s.image.max(), 100.0);
        // r² < 2 ln 20 ≈ 5.99 admits squared radii 0, 1, 2, 4, 5.
        let mask = s.gt.targets()[0].mask();
        assert_eq!(mask.len(), 21);
        for &(x, y) in mask {
            let r2 = (x as i64 - 10).pow(2) + (y as i64 - 10).pow(2);
            assert!(r2 <= 5);
            assert!(s.image.get(x, y) > 5.0);
        }
    }

    #[test]
    fn deterministic() {
        let a = standard_suite();
        let b = standard_suite();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.image.samples(), y.image.samples());
            assert_eq!(x.gt, y.gt);
        }
    }

    #[test]
    fn noiseless_render_is_analytic_sum() {
        let targets = vec![
            gaussian(10.0, 12.0, 30.0, 1.3),
            gaussian(25.5, 20.2, 55.0, 2.1),
        ];
        let mut spec = bare(40, 32, targets.clone());
        spec.background = vec![Background::Gradient {
            low: 5.0,
            high: 9.0,
            axis: Axis::Y,
        }];
        let s = render(&spec).unwrap();
        let bg = render_background(&spec).unwrap();
        for y in 0..32 {
            for x in 0..40 {
                let analytic: f64 = targets
                    .iter()
                    .map(|t| {
                        let (cx, cy) = t.centroid;
                        let TargetShape::Gaussian { spread } = t.shape else {
                            unreachable!()
                        };
                        let d2 = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
                        t.amplitude * (-d2 / (2.0 * spread * spread)).exp()
                    })
                    .sum();
                assert!((s.image.get(x, y) - bg.get(x, y) - analytic).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_overlap_and_out_of_bounds() {
        let overlap = bare(
            30,
            30,
            vec![gaussian(10.0, 10.0, 1.0, 1.0), gaussian(12.0, 10.0, 1.0, 1.0)],
        );
        assert!(matches!(render(&overlap), Err(Error::OverlappingTargets(..))));
        let edge = bare(30, 30, vec![gaussian(1.0, 10.0, 1.0, 1.0)]);
        assert!(render(&edge).is_err());
        let bad = bare(30, 30, vec![gaussian(10.0, 10.0, -1.0, 1.0)]);
        assert!(render(&bad).is_err());
    }

    #[test]
    fn suite_shape() {
        let suite = standard_suite();
        assert_eq!(suite.len(), 6);
        assert!(suite[2].gt.targets().is_empty());
        assert_eq!(suite[3].gt.targets().len(), 3);
        for (i, s) in suite.iter().enumerate() {
            assert_eq!(s.image.dims(), (SUITE_SIZE, SUITE_SIZE));
            if i != 2 {
                assert!(!s.gt.targets().is_empty());
            }
            assert!(s.gt.targets().iter().all(|t| !t.is_empty()));
        }
    }

    #[test]
    fn tiny_target_has_ten_pixels() {
        let s = tiny_target_scene();
        assert_eq!(s.image.dims(), (256, 256));
        assert_eq!(s.gt.pixel_count(), 10);
    }

    #[test]
    fn noise_statistics() {
        let mut spec = bare(200, 200, vec![]);
        spec.noise = Noise {
            sigma: 4.0,
            seed: 9,
        };
        let s = render(&spec).unwrap();
        let g = crate::stats::global_stats(&s.image);
        assert!(g.mean.abs() < 0.1);
        assert!((g.std - 4.0).abs() < 0.1);
    }

    #[test]
    fn spec_json_round_trip() {
        for spec in standard_specs() {
            let text = serde_json::to_string(&spec).unwrap();
            let back: SceneSpec = serde_json::from_str(&text).unwrap();
            assert_eq!(back, spec);
        }
        let minimal = r#"{"width":4,"height":4,"noise":{"sigma":0,"seed":1}}"#;
        let s: SceneSpec = serde_json::from_str(minimal).unwrap();
        assert_eq!(s.mask_fraction, DEFAULT_MASK_FRACTION);
        let no_seed = r#"{"width":4,"height":4,"noise":{"sigma":1}}"#;
        assert!(serde_json::from_str::<SceneSpec>(no_seed).is_err());
    }
}
