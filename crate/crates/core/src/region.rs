//! Ground-truth targets and the local background ring used by the
//! contrast metrics.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{BinaryImage, Coord};

/// Inclusive pixel bounding box.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BBox {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl BBox {
    pub fn width(&self) -> usize {
        self.x1 - self.x0 + 1
    }

    pub fn height(&self) -> usize {
        self.y1 - self.y0 + 1
    }

    pub fn pixels(&self) -> impl Iterator<Item = Coord> + '_ {
        (self.y0..=self.y1).flat_map(move |y| (self.x0..=self.x1).map(move |x| (x, y)))
    }
}

/// One ground-truth target: its pixel mask plus derived geometry.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetRegion {
    mask: Vec<Coord>,
    bbox: BBox,
    centroid: (f64, f64),
}

impl TargetRegion {
    /// Builds a target from its mask; duplicates are dropped and the mask
    /// is stored in row-major order.
    pub fn from_mask(mask: impl IntoIterator<Item = Coord>) -> Result<Self> {
        let set: BTreeSet<(usize, usize)> = mask.into_iter().map(|(x, y)| (y, x)).collect();
        if set.is_empty() {
            return Err(Error::EmptyRegion);
        }
        let mask: Vec<Coord> = set.into_iter().map(|(y, x)| (x, y)).collect();
        let mut bbox = BBox {
            x0: usize::MAX,
            y0: usize::MAX,
            x1: 0,
            y1: 0,
        };
        let (mut sx, mut sy) = (0.0, 0.0);
        for &(x, y) in &mask {
            bbox.x0 = bbox.x0.min(x);
            bbox.y0 = bbox.y0.min(y);
            bbox.x1 = bbox.x1.max(x);
            bbox.y1 = bbox.y1.max(y);
            sx += x as f64;
            sy += y as f64;
        }
        let n = mask.len() as f64;
        Ok(Self {
            mask,
            bbox,
            centroid: (sx / n, sy / n),
        })
    }

    /// Target covering a whole bounding box.
    pub fn from_bbox(bbox: BBox) -> Result<Self> {
        if bbox.x1 < bbox.x0 || bbox.y1 < bbox.y0 {
            return Err(Error::param(format!("inverted bounding box {bbox:?}")));
        }
        Self::from_mask(bbox.pixels().collect::<Vec<_>>())
    }

    pub fn mask(&self) -> &[Coord] {
        &self.mask
    }

    pub fn bbox(&self) -> BBox {
        self.bbox
    }

    pub fn centroid(&self) -> (f64, f64) {
        self.centroid
    }

    pub fn len(&self) -> usize {
        self.mask.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mask.is_empty()
    }
}

/// All targets of one image. Masks are non-empty, in bounds and pairwise
/// disjoint.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruth {
    width: usize,
    height: usize,
    targets: Vec<TargetRegion>,
}

impl GroundTruth {
    pub fn new(width: usize, height: usize, targets: Vec<TargetRegion>) -> Result<Self> {
        let mut owner = vec![usize::MAX; width * height];
        for (i, t) in targets.iter().enumerate() {
            for &(x, y) in t.mask() {
                if x >= width || y >= height {
                    return Err(Error::OutOfBounds {
                        x,
                        y,
                        width,
                        height,
                    });
                }
                let slot = &mut owner[y * width + x];
                if *slot != usize::MAX {
                    return Err(Error::OverlappingTargets(*slot, i));
                }
                *slot = i;
            }
        }
        Ok(Self {
            width,
            height,
            targets,
        })
    }

    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            targets: Vec::new(),
        }
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

    pub fn targets(&self) -> &[TargetRegion] {
        &self.targets
    }

    pub fn target(&self, index: usize) -> Result<&TargetRegion> {
        self.targets.get(index).ok_or(Error::NoSuchTarget {
            index,
            count: self.targets.len(),
        })
    }

    /// Total number of ground-truth target pixels.
    pub fn pixel_count(&self) -> usize {
        self.targets.iter().map(TargetRegion::len).sum()
    }

    /// Union of all target masks as a binary image.
    pub fn union_mask(&self) -> BinaryImage {
        let mut out = BinaryImage::empty(self.width, self.height);
        for t in &self.targets {
            for &(x, y) in t.mask() {
                out.set(x, y, true);
            }
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&GroundTruthJson::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let wire: GroundTruthJson = serde_json::from_str(text)?;
        wire.try_into()
    }
}

#[derive(Serialize, Deserialize)]
struct TargetJson {
    bbox: [usize; 4],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mask: Option<Vec<[usize; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    centroid: Option<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct GroundTruthJson {
    width: usize,
    height: usize,
    targets: Vec<TargetJson>,
}

impl From<&GroundTruth> for GroundTruthJson {
    fn from(gt: &GroundTruth) -> Self {
        Self {
            width: gt.width,
            height: gt.height,
            targets: gt
                .targets
                .iter()
                .map(|t| {
                    let b = t.bbox;
                    TargetJson {
                        bbox: [b.x0, b.y0, b.x1, b.y1],
                        mask: Some(t.mask.iter().map(|&(x, y)| [x, y]).collect()),
                        centroid: Some([t.centroid.0, t.centroid.1]),
                    }
                })
                .collect(),
        }
    }
}

impl TryFrom<GroundTruthJson> for GroundTruth {
    type Error = Error;

    fn try_from(wire: GroundTruthJson) -> Result<Self> {
        let mut targets = Vec::with_capacity(wire.targets.len());
        for t in wire.targets {
            let [x0, y0, x1, y1] = t.bbox;
            let region = match t.mask {
                Some(mask) => TargetRegion::from_mask(mask.into_iter().map(|[x, y]| (x, y)))?,
                None => TargetRegion::from_bbox(BBox { x0, y0, x1, y1 })?,
            };
            // The stored centroid is informational; geometry is always derived
            // from the mask.
            targets.push(region);
        }
        GroundTruth::new(wire.width, wire.height, targets)
    }
}

/// Local background around a target: the bounding box grown by `width`
/// pixels, minus the target mask grown by one pixel, clipped to the image.
pub fn background_ring(
    target: &TargetRegion,
    width: usize,
    image_dims: (usize, usize),
) -> Result<Vec<Coord>> {
    if width == 0 {
        return Err(Error::param("ring width must be at least 1"));
    }
    let (w, h) = image_dims;
    let b = target.bbox();
    let x0 = b.x0.saturating_sub(width);
    let y0 = b.y0.saturating_sub(width);
    let x1 = (b.x1 + width).min(w.saturating_sub(1));
    let y1 = (b.y1 + width).min(h.saturating_sub(1));

    let excluded: BTreeSet<Coord> = target
        .mask()
        .iter()
        .flat_map(|&(x, y)| {
            let xs = x.saturating_sub(1)..=x + 1;
            xs.flat_map(move |xx| (y.saturating_sub(1)..=y + 1).map(move |yy| (xx, yy)))
        })
        .collect();

    let ring: Vec<Coord> = (y0..=y1)
        .flat_map(|y| (x0..=x1).map(move |x| (x, y)))
        .filter(|c| !excluded.contains(c))
        .collect();
    if ring.is_empty() {
        Err(Error::EmptyRing)
    } else {
        Ok(ring)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometry_from_mask() {
        let t = TargetRegion::from_mask(vec![(2, 3), (4, 3), (3, 5), (2, 3)]).unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(
            t.bbox(),
            BBox {
                x0: 2,
                y0: 3,
                x1: 4,
                y1: 5
            }
        );
        assert_eq!(t.centroid(), (3.0, 11.0 / 3.0));
        assert!(matches!(
            TargetRegion::from_mask(Vec::new()),
            Err(Error::EmptyRegion)
        ));
    }

    #[test]
    fn ground_truth_rejects_overlap_and_out_of_bounds() {
        let a = TargetRegion::from_mask(vec![(1, 1), (2, 1)]).unwrap();
        let b = TargetRegion::from_mask(vec![(2, 1)]).unwrap();
        assert!(matches!(
            GroundTruth::new(4, 4, vec![a.clone(), b]),
            Err(Error::OverlappingTargets(0, 1))
        ));
        let c = TargetRegion::from_mask(vec![(4, 0)]).unwrap();
        assert!(matches!(
            GroundTruth::new(4, 4, vec![c]),
            Err(Error::OutOfBounds { .. })
        ));
        assert!(GroundTruth::new(4, 4, vec![a]).is_ok());
    }

    #[test]
    fn json_mask_is_optional() {
        let text = r#"{"width":8,"height":6,"targets":[{"bbox":[1,2,3,3]}]}"#;
        let gt = GroundTruth::from_json(text).unwrap();
        assert_eq!(gt.targets()[0].len(), 6);
        assert_eq!(gt.targets()[0].centroid(), (2.0, 2.5));
        let back = GroundTruth::from_json(&gt.to_json().unwrap()).unwrap();
        assert_eq!(back, gt);
    }

    #[test]
    fn ring_around_center_pixel() {
        let t = TargetRegion::from_mask(vec![(5, 5)]).unwrap();
        let ring = background_ring(&t, 2, (11, 11)).unwrap();
        // Enumerated: 5x5 block centred on (5,5) minus its 3x3 core.
        let expected: Vec<Coord> = (3..=7)
            .flat_map(|y| (3..=7).map(move |x| (x, y)))
            .filter(|&(x, y)| !((4..=6).contains(&x) && (4..=6).contains(&y)))
            .collect();
        assert_eq!(ring.len(), 16);
        assert_eq!(ring, expected);
    }

    #[test]
    fn ring_clipped_at_corner() {
        let t = TargetRegion::from_mask(vec![(0, 0), (1, 0)]).unwrap();
        let ring = background_ring(&t, 3, (10, 10)).unwrap();
        // Block x 0..=4, y 0..=3 (20 px) minus dilated mask x 0..=2, y 0..=1 (6 px).
        assert_eq!(ring.len(), 14);
        assert!(ring.iter().all(|&(x, y)| x <= 4 && y <= 3));
    }

    #[test]
    fn ring_covering_whole_image() {
        let t = TargetRegion::from_mask(vec![(3, 3)]).unwrap();
        let ring = background_ring(&t, 100, (8, 7)).unwrap();
        assert_eq!(ring.len(), 8 * 7 - 9);
    }

    #[test]
    fn ring_can_be_empty() {
        let t = TargetRegion::from_mask(vec![(0, 0)]).unwrap();
        assert!(matches!(background_ring(&t, 1, (2, 2)), Err(Error::EmptyRing)));
        assert!(background_ring(&t, 0, (5, 5)).is_err());
    }
}
