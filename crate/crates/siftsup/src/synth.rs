//! Deterministic synthetic fixtures: textured test images, blobs and the
//! coordinate helpers the repeatability checks rely on. Everything is
//! seeded, so examples and tests reproduce byte-identical inputs without
//! bundling binary assets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::imgproc::{GrayImage, RgbImage};

/// Random field of oriented dipole features (a bright lobe next to a dark
/// lobe) on a mid-gray background.
///
/// Dipoles give blob detectors dense, well-localized extrema whose local
/// gradient field has a single dominant direction, so keypoints here carry
/// one orientation each and descriptors stay distinctive.
pub fn textured_gray(width: usize, height: usize, seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut img = vec![0.5f32; width * height];

    let n_dipoles = (width * height) / 560;
    for _ in 0..n_dipoles {
        let cx = rng.gen_range(8.0..width as f32 - 8.0);
        let cy = rng.gen_range(8.0..height as f32 - 8.0);
        let phi = rng.gen_range(0.0..std::f32::consts::TAU);
        let sigma = rng.gen_range(2.0f32..3.2);
        let sep = 2.4 * sigma;
        let amp = rng.gen_range(0.22f32..0.42) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };

        let (dx, dy) = (0.5 * sep * phi.cos(), 0.5 * sep * phi.sin());
        let lobes = [(cx + dx, cy + dy, amp), (cx - dx, cy - dy, -amp)];
        for &(lx, ly, a) in &lobes {
            let r = (4.0 * sigma).ceil() as isize;
            let x0 = (lx as isize - r).max(0);
            let x1 = (lx as isize + r).min(width as isize - 1);
            let y0 = (ly as isize - r).max(0);
            let y1 = (ly as isize + r).min(height as isize - 1);
            for y in y0..=y1 {
                for x in x0..=x1 {
                    let du = x as f32 - lx;
                    let dv = y as f32 - ly;
                    let g = (-(du * du + dv * dv) / (2.0 * sigma * sigma)).exp();
                    img[y as usize * width + x as usize] += a * g;
                }
            }
        }
    }
    for v in &mut img {
        *v = v.clamp(0.0, 1.0);
    }
    GrayImage::from_data(width, height, img)
}

/// Same texture rendered as gray RGB, handy for on-disk dataset fixtures.
pub fn textured_rgb(width: usize, height: usize, seed: u64) -> RgbImage {
    gray_to_rgb(&textured_gray(width, height, seed))
}

/// Single bright gaussian blob on black.
pub fn blob(width: usize, height: usize, cx: f32, cy: f32, sigma: f32) -> GrayImage {
    let mut img = GrayImage::new(width, height);
    for y in 0..height {
        for x in 0..width {
            let du = x as f32 - cx;
            let dv = y as f32 - cy;
            img.set(x, y, (-(du * du + dv * dv) / (2.0 * sigma * sigma)).exp());
        }
    }
    img
}

/// Quantize a gray image to 8-bit RGB.
pub fn gray_to_rgb(img: &GrayImage) -> RgbImage {
    let mut out = RgbImage::new(img.width, img.height);
    for y in 0..img.height {
        for x in 0..img.width {
            let v = (img.get(x, y).clamp(0.0, 1.0) * 255.0).round() as u8;
            out.set(x, y, [v, v, v]);
        }
    }
    out
}

/// Rotate 90 degrees clockwise (lossless pixel remap).
pub fn rotate90_cw(img: &GrayImage) -> GrayImage {
    let mut out = GrayImage::new(img.height, img.width);
    for y in 0..img.height {
        for x in 0..img.width {
            out.set(img.height - 1 - y, x, img.get(x, y));
        }
    }
    out
}

/// Map subpixel source coordinates through [`rotate90_cw`].
pub fn rotate90_point(x: f32, y: f32, src_height: usize) -> (f32, f32) {
    (src_height as f32 - 1.0 - y, x)
}
