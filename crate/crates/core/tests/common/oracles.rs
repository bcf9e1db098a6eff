//! Direct, unoptimized reference implementations.

#![allow(dead_code)]

use irstd::{BinaryImage, GrayImage, GroundTruth};

fn window(img: &GrayImage, x: usize, y: usize, side: usize) -> Vec<f64> {
    let r = (side / 2) as isize;
    let mut v = Vec::with_capacity(side * side);
    for dy in -r..=r {
        for dx in -r..=r {
            v.push(img.get_clamped(x as isize + dx, y as isize + dy));
        }
    }
    v
}

fn rank(img: &GrayImage, side: usize, pick: fn(f64, f64) -> f64) -> GrayImage {
    GrayImage::from_fn(img.width(), img.height(), |x, y| {
        window(img, x, y, side).into_iter().reduce(pick).unwrap()
    })
}

pub fn tophat(img: &GrayImage, side: usize) -> GrayImage {
    let opened = rank(&rank(img, side, f64::min), side, f64::max);
    GrayImage::from_fn(img.width(), img.height(), |x, y| {
        img.get(x, y) - opened.get(x, y)
    })
}

pub fn log(img: &GrayImage, sigma: f64) -> GrayImage {
    let r = (3.0 * sigma).ceil() as isize;
    let mut taps = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            let rho2 = (dx * dx + dy * dy) as f64;
            let g = (-rho2 / (2.0 * sigma * sigma)).exp()
                / (2.0 * std::f64::consts::PI * sigma * sigma);
            taps.push((dx, dy, (2.0 * sigma * sigma - rho2) / (sigma * sigma) * g));
        }
    }
    let mean = taps.iter().map(|t| t.2).sum::<f64>() / taps.len() as f64;
    GrayImage::from_fn(img.width(), img.height(), |x, y| {
        taps.iter()
            .map(|&(dx, dy, k)| (k - mean) * img.get_clamped(x as isize + dx, y as isize + dy))
            .sum()
    })
}

fn cell_mean(img: &GrayImage, cx: isize, cy: isize, side: usize) -> f64 {
    let r = (side / 2) as isize;
    let mut s = 0.0;
    for dy in -r..=r {
        for dx in -r..=r {
            s += img.get_clamped(cx + dx, cy + dy);
        }
    }
    s / (side * side) as f64
}

pub fn pcm(img: &GrayImage, side: usize) -> GrayImage {
    let s = side as isize;
    let pairs = [((-1, -1), (1, 1)), ((0, -1), (0, 1)), ((1, -1), (-1, 1)), ((1, 0), (-1, 0))];
    GrayImage::from_fn(img.width(), img.height(), |x, y| {
        let (x, y) = (x as isize, y as isize);
        let m0 = cell_mean(img, x, y, side);
        pairs
            .iter()
            .map(|&((ax, ay), (bx, by))| {
                let da = m0 - cell_mean(img, x + ax * s, y + ay * s, side);
                let db = m0 - cell_mean(img, x + bx * s, y + by * s, side);
                da * db
            })
            .fold(f64::INFINITY, f64::min)
    })
}

pub fn aagd(img: &GrayImage, side: usize) -> GrayImage {
    GrayImage::from_fn(img.width(), img.height(), |x, y| {
        let (x, y) = (x as isize, y as isize);
        let inner = cell_mean(img, x, y, side) * (side * side) as f64;
        let outer = cell_mean(img, x, y, 3 * side) * (9 * side * side) as f64;
        let d = inner / (side * side) as f64 - (outer - inner) / (8 * side * side) as f64;
        if d > 0.0 {
            d * d
        } else {
            0.0
        }
    })
}

/// `(mean, population std)` over every `side`x`side` window.
pub fn local_stats(img: &GrayImage, side: usize) -> (GrayImage, GrayImage) {
    let mut mean = GrayImage::filled(img.width(), img.height(), 0.0);
    let mut std = mean.clone();
    for y in 0..img.height() {
        for x in 0..img.width() {
            let v = window(img, x, y, side);
            let m = v.iter().sum::<f64>() / v.len() as f64;
            let var = v.iter().map(|a| (a - m) * (a - m)).sum::<f64>() / v.len() as f64;
            mean.set(x, y, m);
            std.set(x, y, var.sqrt());
        }
    }
    (mean, std)
}

/// `(n_f, n_d)` by direct enumeration.
pub fn confusion(binary: &BinaryImage, gt: &GroundTruth, dilation: usize) -> (usize, usize) {
    let d = dilation as isize;
    let in_mask = |x: isize, y: isize| {
        gt.targets()
            .iter()
            .any(|t| t.mask().contains(&(x as usize, y as usize)))
    };
    let (mut n_f, mut n_d) = (0, 0);
    for y in 0..binary.height() {
        for x in 0..binary.width() {
            if !binary.get(x, y) {
                continue;
            }
            let (xi, yi) = (x as isize, y as isize);
            if in_mask(xi, yi) {
                n_d += 1;
                continue;
            }
            let near = (-d..=d).any(|dy| {
                (-d..=d).any(|dx| {
                    let (u, v) = (xi + dx, yi + dy);
                    u >= 0
                        && v >= 0
                        && (u as usize) < binary.width()
                        && (v as usize) < binary.height()
                        && in_mask(u, v)
                })
            });
            if !near {
                n_f += 1;
            }
        }
    }
    (n_f, n_d)
}

/// `|a - b| <= rel * max(|a|, |b|, floor)` at every pixel; `floor` is the
/// largest magnitude of `b`.
pub fn assert_close(a: &GrayImage, b: &GrayImage, rel: f64, what: &str) {
    assert_eq!(a.dims(), b.dims(), "{what}: dimensions");
    let floor = b.samples().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for (i, (x, y)) in a.samples().iter().zip(b.samples()).enumerate() {
        let scale = x.abs().max(y.abs()).max(floor);
        assert!(
            (x - y).abs() <= rel * scale,
            "{what}: sample {i}: {x} vs {y}"
        );
    }
}

/// `None` when all samples agree within tolerance, otherwise a description.
pub fn mismatch(a: &GrayImage, b: &GrayImage, rel: f64) -> Option<String> {
    if a.dims() != b.dims() {
        return Some("dimensions differ".into());
    }
    let floor = b.samples().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    a.samples()
        .iter()
        .zip(b.samples())
        .enumerate()
        .find(|(_, (x, y))| (*x - *y).abs() > rel * x.abs().max(y.abs()).max(floor))
        .map(|(i, (x, y))| format!("sample {i}: {x} vs {y}"))
}
