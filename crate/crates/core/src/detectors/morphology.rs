//! Grayscale morphology with a flat square structuring element.

use crate::error::Result;
use crate::image::GrayImage;

use super::check_side;

/// Separable min or max filter over a `side`x`side` square, borders
/// replicated.
fn rank_filter(img: &GrayImage, side: usize, pick: fn(f64, f64) -> f64) -> GrayImage {
    let (w, h) = img.dims();
    let r = (side / 2) as isize;
    let mut rows = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = img.get(x, y);
            for dx in -r..=r {
                acc = pick(acc, img.get_clamped(x as isize + dx, y as isize));
            }
            rows[y * w + x] = acc;
        }
    }
    let tmp = GrayImage::from_parts_unchecked(w, h, rows);
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = tmp.get(x, y);
            for dy in -r..=r {
                acc = pick(acc, tmp.get_clamped(x as isize, y as isize + dy));
            }
            out[y * w + x] = acc;
        }
    }
    GrayImage::from_parts_unchecked(w, h, out)
}

pub fn erode(img: &GrayImage, side: usize) -> Result<GrayImage> {
    check_side(side)?;
    Ok(rank_filter(img, side, f64::min))
}

pub fn dilate(img: &GrayImage, side: usize) -> Result<GrayImage> {
    check_side(side)?;
    Ok(rank_filter(img, side, f64::max))
}

/// Erosion followed by dilation.
pub fn opening(img: &GrayImage, side: usize) -> Result<GrayImage> {
    dilate(&erode(img, side)?, side)
}

/// White top-hat: the image minus its opening. Keeps bright structures
/// that the structuring element cannot fit inside.
pub fn tophat(img: &GrayImage, side: usize) -> Result<GrayImage> {
    let opened = opening(img, side)?;
    img.zip_with(&opened, |a, b| a - b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Erosion-then-dilation straight from the definition.
    fn naive_opening(img: &GrayImage, side: usize) -> GrayImage {
        let r = (side / 2) as isize;
        let (w, h) = img.dims();
        let er = GrayImage::from_fn(w, h, |x, y| {
            let mut m = f64::INFINITY;
            for dy in -r..=r {
                for dx in -r..=r {
                    m = m.min(img.get_clamped(x as isize + dx, y as isize + dy));
                }
            }
            m
        });
        GrayImage::from_fn(w, h, |x, y| {
            let mut m = f64::NEG_INFINITY;
            for dy in -r..=r {
                for dx in -r..=r {
                    m = m.max(er.get_clamped(x as isize + dx, y as isize + dy));
                }
            }
            m
        })
    }

    #[test]
    fn constant_image_gives_zero() {
        let out = tophat(&GrayImage::filled(9, 9, 42.0), 7).unwrap();
        assert!(out.samples().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn impulse_passes_through() {
        let mut img = GrayImage::filled(15, 15, 0.0);
        img.set(7, 7, 80.0);
        let out = tophat(&img, 7).unwrap();
        assert_eq!(out, img);
    }

    #[test]
    fn large_plateau_is_removed() {
        let img = GrayImage::from_fn(30, 30, |x, y| {
            if (5..20).contains(&x) && (8..22).contains(&y) {
                10.0
            } else {
                0.0
            }
        });
        let out = tophat(&img, 7).unwrap();
        assert_eq!(naive_opening(&img, 7), opening(&img, 7).unwrap());
        assert!(out.samples().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn even_element_rejected() {
        assert!(tophat(&GrayImage::filled(5, 5, 0.0), 4).is_err());
    }

    proptest! {
        #[test]
        fn opening_matches_oracle_and_is_anti_extensive(
            w in 1usize..14, h in 1usize..14, half in 1usize..4,
            vals in prop::collection::vec(-20.0f64..20.0, 196),
        ) {
            let img = GrayImage::from_fn(w, h, |x, y| vals[y * 14 + x]);
            let side = 2 * half + 1;
            let opened = opening(&img, side).unwrap();
            prop_assert_eq!(&opened, &naive_opening(&img, side));
            let th = tophat(&img, side).unwrap();
            let er = erode(&img, side).unwrap();
            for i in 0..w * h {
                prop_assert!(th.samples()[i] >= 0.0);
                prop_assert!(th.samples()[i] <= img.samples()[i] - er.samples()[i]);
            }
        }
    }
}
