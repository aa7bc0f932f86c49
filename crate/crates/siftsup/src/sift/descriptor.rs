//! Orientation assignment and the 4x4x8 gradient-histogram descriptor.

use crate::imgproc::GrayImage;

use super::detect::RawKeypoint;
use super::SiftParams;

pub(crate) const ORIENTATION_BINS: usize = 36;
const DESCR_HISTS: usize = 4;
const DESCR_ORI_BINS: usize = 8;
pub(crate) const DESCRIPTOR_LEN: usize = DESCR_HISTS * DESCR_HISTS * DESCR_ORI_BINS;
/// Lowe's magnitude clamp applied between the two normalization passes.
pub(crate) const DESCRIPTOR_CLAMP: f32 = 0.2;

/// Gaussian window multiplier for the orientation histogram.
const ORI_SIGMA_FACTOR: f32 = 1.5;
/// Histogram window width per descriptor cell, in units of keypoint scale.
const DESCR_SCALE_FACTOR: f32 = 3.0;

#[inline]
fn gradient(img: &GrayImage, x: usize, y: usize) -> (f32, f32) {
    let dx = img.get(x + 1, y) - img.get(x - 1, y);
    let dy = img.get(x, y + 1) - img.get(x, y - 1);
    (dx, dy)
}

/// 36-bin gradient-direction histogram around a refined extremum,
/// gaussian-weighted and smoothed with a [1 4 6 4 1]/16 circular kernel.
pub(crate) fn orientation_histogram(img: &GrayImage, kp: &RawKeypoint) -> [f32; ORIENTATION_BINS] {
    let xc = kp.x_oct.round() as isize;
    let yc = kp.y_oct.round() as isize;
    let radius = (3.0 * ORI_SIGMA_FACTOR * kp.sigma_oct).round() as isize;
    let sigma_w = ORI_SIGMA_FACTOR * kp.sigma_oct;
    let weight_scale = -1.0 / (2.0 * sigma_w * sigma_w);

    let mut raw = [0f32; ORIENTATION_BINS];
    for dy in -radius..=radius {
        let y = yc + dy;
        if y < 1 || y >= img.height as isize - 1 {
            continue;
        }
        for dx in -radius..=radius {
            let x = xc + dx;
            if x < 1 || x >= img.width as isize - 1 {
                continue;
            }
            let (gx, gy) = gradient(img, x as usize, y as usize);
            let mag = (gx * gx + gy * gy).sqrt();
            let theta = gy.atan2(gx).to_degrees();
            let w = ((dx * dx + dy * dy) as f32 * weight_scale).exp();
            let bin = (theta * ORIENTATION_BINS as f32 / 360.0).round() as i32;
            let bin = bin.rem_euclid(ORIENTATION_BINS as i32) as usize;
            raw[bin] += w * mag;
        }
    }

    let mut hist = [0f32; ORIENTATION_BINS];
    let n = ORIENTATION_BINS;
    for i in 0..n {
        hist[i] = (raw[(i + n - 2) % n] + raw[(i + 2) % n]) * (1.0 / 16.0)
            + (raw[(i + n - 1) % n] + raw[(i + 1) % n]) * (4.0 / 16.0)
            + raw[i] * (6.0 / 16.0);
    }
    hist
}

/// Reference orientations: local maxima within `peak_ratio` of the global
/// maximum, capped at `max_peaks`, each refined by parabolic interpolation.
/// Returned in ascending angle order, degrees in `[0, 360)`.
pub(crate) fn orientation_peaks(hist: &[f32; ORIENTATION_BINS], params: &SiftParams) -> Vec<f32> {
    let n = ORIENTATION_BINS;
    let max = hist.iter().cloned().fold(f32::MIN, f32::max);
    if max <= 0.0 {
        return Vec::new();
    }
    let threshold = max * params.orientation_peak_ratio;

    let mut peaks: Vec<(usize, f32)> = (0..n)
        .filter(|&k| {
            let prev = hist[(k + n - 1) % n];
            let next = hist[(k + 1) % n];
            hist[k] > prev && hist[k] > next && hist[k] >= threshold
        })
        .map(|k| (k, hist[k]))
        .collect();
    if peaks.len() > params.max_orientation_peaks {
        peaks.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        peaks.truncate(params.max_orientation_peaks);
        peaks.sort_by_key(|&(k, _)| k);
    }

    peaks
        .into_iter()
        .map(|(k, _)| {
            let prev = hist[(k + n - 1) % n];
            let next = hist[(k + 1) % n];
            let interp = 0.5 * (prev - next) / (prev - 2.0 * hist[k] + next);
            let bin = k as f32 + interp;
            (bin * 360.0 / n as f32).rem_euclid(360.0)
        })
        .collect()
}

/// 128-element descriptor: unit-normalized, clamped at
/// [`DESCRIPTOR_CLAMP`], renormalized. `inspect` observes the clamped
/// vector before the final renormalization.
pub(crate) fn compute_descriptor(
    img: &GrayImage,
    kp: &RawKeypoint,
    orientation_deg: f32,
    inspect: &mut dyn FnMut(&[f32; DESCRIPTOR_LEN]),
) -> Option<[f32; DESCRIPTOR_LEN]> {
    let d = DESCR_HISTS;
    let n = DESCR_ORI_BINS;
    let hist_width = DESCR_SCALE_FACTOR * kp.sigma_oct;
    let theta = orientation_deg.to_radians();
    let (sin_t, cos_t) = theta.sin_cos();

    let radius = (hist_width * std::f32::consts::SQRT_2 * (d as f32 + 1.0) * 0.5).round() as isize;
    let diag = ((img.width * img.width + img.height * img.height) as f32).sqrt() as isize;
    let radius = radius.min(diag);

    let xc = kp.x_oct.round() as isize;
    let yc = kp.y_oct.round() as isize;
    let bins_per_degree = n as f32 / 360.0;
    let weight_scale = -2.0 / (d * d) as f32;

    // (d+2)^2 spatial cells so the trilinear spill at the borders has a
    // place to land; outer ring is discarded below.
    let mut hist = [0f32; (DESCR_HISTS + 2) * (DESCR_HISTS + 2) * DESCR_ORI_BINS];
    let idx = |r: usize, c: usize, o: usize| (r * (d + 2) + c) * n + o;

    for dy in -radius..=radius {
        let y = yc + dy;
        if y < 1 || y >= img.height as isize - 1 {
            continue;
        }
        for dx in -radius..=radius {
            let x = xc + dx;
            if x < 1 || x >= img.width as isize - 1 {
                continue;
            }
            // Offset rotated into the keypoint frame, in histogram cells.
            let u = (dx as f32 * cos_t + dy as f32 * sin_t) / hist_width;
            let v = (-(dx as f32) * sin_t + dy as f32 * cos_t) / hist_width;
            let cbin = u + (d as f32 - 1.0) / 2.0;
            let rbin = v + (d as f32 - 1.0) / 2.0;
            if !(rbin > -1.0 && rbin < d as f32 && cbin > -1.0 && cbin < d as f32) {
                continue;
            }

            let (gx, gy) = gradient(img, x as usize, y as usize);
            let mag = (gx * gx + gy * gy).sqrt();
            let grad_deg = gy.atan2(gx).to_degrees();
            let obin = (grad_deg - orientation_deg).rem_euclid(360.0) * bins_per_degree;
            let w = ((u * u + v * v) * weight_scale).exp();
            let mag = mag * w;

            let r0 = rbin.floor();
            let c0 = cbin.floor();
            let o0 = obin.floor();
            let fr = rbin - r0;
            let fc = cbin - c0;
            let fo = obin - o0;
            let r0 = r0 as isize;
            let c0 = c0 as isize;
            let o0 = (o0 as usize) % n;
            let o1 = (o0 + 1) % n;

            for (rr, wr) in [(0isize, 1.0 - fr), (1, fr)] {
                let r = (r0 + 1 + rr) as usize;
                for (cc, wc) in [(0isize, 1.0 - fc), (1, fc)] {
                    let c = (c0 + 1 + cc) as usize;
                    let base = mag * wr * wc;
                    hist[idx(r, c, o0)] += base * (1.0 - fo);
                    hist[idx(r, c, o1)] += base * fo;
                }
            }
        }
    }

    let mut desc = [0f32; DESCRIPTOR_LEN];
    let mut k = 0;
    for r in 1..=d {
        for c in 1..=d {
            for o in 0..n {
                desc[k] = hist[idx(r, c, o)];
                k += 1;
            }
        }
    }

    let norm: f64 = desc.iter().map(|&v| (v as f64) * (v as f64)).sum::<f64>();
    if norm < 1e-24 {
        return None;
    }
    let inv = (1.0 / norm.sqrt()) as f32;
    for v in &mut desc {
        *v = (*v * inv).min(DESCRIPTOR_CLAMP);
    }
    inspect(&desc);
    let norm: f64 = desc.iter().map(|&v| (v as f64) * (v as f64)).sum::<f64>();
    let inv = 1.0 / norm.sqrt();
    for v in &mut desc {
        *v = (*v as f64 * inv) as f32;
    }
    Some(desc)
}
