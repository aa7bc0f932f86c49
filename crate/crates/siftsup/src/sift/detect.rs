//! Difference-of-gaussians extrema scan, subpixel refinement and the
//! contrast/edge rejection tests.

use crate::imgproc::GrayImage;

use super::pyramid::ScaleSpace;
use super::SiftParams;

/// Margin (in octave pixels) inside which extrema are ignored.
pub(crate) const IMAGE_BORDER: usize = 5;
const MAX_INTERPOLATION_STEPS: usize = 5;

/// Refined scale-space extremum, prior to orientation assignment.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RawKeypoint {
    pub octave: usize,
    /// Refined integer gaussian/DoG level within the octave.
    pub level: usize,
    pub x_oct: f32,
    pub y_oct: f32,
    /// Continuous blur level in octave pixel units.
    pub sigma_oct: f32,
    pub response: f32,
}

#[inline]
fn at(img: &GrayImage, x: usize, y: usize) -> f32 {
    img.data[y * img.width + x]
}

fn is_local_extremum(dog: &[GrayImage], level: usize, x: usize, y: usize, threshold: f32) -> bool {
    let v = at(&dog[level], x, y);
    if v.abs() <= threshold {
        return false;
    }
    let planes = [&dog[level - 1], &dog[level], &dog[level + 1]];
    if v > 0.0 {
        for p in planes {
            for dy in -1i32..=1 {
                for dx in -1i32..=1 {
                    let n = at(p, (x as i32 + dx) as usize, (y as i32 + dy) as usize);
                    if n > v {
                        return false;
                    }
                }
            }
        }
    } else {
        for p in planes {
            for dy in -1i32..=1 {
                for dx in -1i32..=1 {
                    let n = at(p, (x as i32 + dx) as usize, (y as i32 + dy) as usize);
                    if n < v {
                        return false;
                    }
                }
            }
        }
    }
    true
}

struct Interpolation {
    level: usize,
    x: usize,
    y: usize,
    offset: [f32; 3], // (scale, y, x)
    contrast: f32,
}

/// 3-D quadratic fit around a discrete extremum; walks to a neighboring
/// sample when the fitted peak lands outside the center cell.
fn interpolate_extremum(
    dog: &[GrayImage],
    n_levels: usize,
    mut level: usize,
    mut x: usize,
    mut y: usize,
) -> Option<Interpolation> {
    let width = dog[0].width;
    let height = dog[0].height;

    for _ in 0..MAX_INTERPOLATION_STEPS {
        let prev = &dog[level - 1];
        let curr = &dog[level];
        let next = &dog[level + 1];

        let g_s = (at(next, x, y) - at(prev, x, y)) / 2.0;
        let g_y = (at(curr, x, y + 1) - at(curr, x, y - 1)) / 2.0;
        let g_x = (at(curr, x + 1, y) - at(curr, x - 1, y)) / 2.0;

        let v2 = 2.0 * at(curr, x, y);
        let h_ss = at(next, x, y) + at(prev, x, y) - v2;
        let h_yy = at(curr, x, y + 1) + at(curr, x, y - 1) - v2;
        let h_xx = at(curr, x + 1, y) + at(curr, x - 1, y) - v2;
        let h_sy = (at(next, x, y + 1) - at(next, x, y - 1) - at(prev, x, y + 1)
            + at(prev, x, y - 1))
            / 4.0;
        let h_sx = (at(next, x + 1, y) - at(next, x - 1, y) - at(prev, x + 1, y)
            + at(prev, x - 1, y))
            / 4.0;
        let h_yx = (at(curr, x + 1, y + 1) - at(curr, x - 1, y + 1) - at(curr, x + 1, y - 1)
            + at(curr, x - 1, y - 1))
            / 4.0;

        let det = h_ss * (h_yy * h_xx - h_yx * h_yx) - h_sy * (h_sy * h_xx - h_yx * h_sx)
            + h_sx * (h_sy * h_yx - h_yy * h_sx);
        if det.abs() < 1e-20 {
            return None;
        }
        // Inverse via adjugate, then offset = -H^-1 g.
        let i_ss = (h_yy * h_xx - h_yx * h_yx) / det;
        let i_sy = (h_sx * h_yx - h_sy * h_xx) / det;
        let i_sx = (h_sy * h_yx - h_sx * h_yy) / det;
        let i_yy = (h_ss * h_xx - h_sx * h_sx) / det;
        let i_yx = (h_sy * h_sx - h_ss * h_yx) / det;
        let i_xx = (h_ss * h_yy - h_sy * h_sy) / det;

        let off_s = -(i_ss * g_s + i_sy * g_y + i_sx * g_x);
        let off_y = -(i_sy * g_s + i_yy * g_y + i_yx * g_x);
        let off_x = -(i_sx * g_s + i_yx * g_y + i_xx * g_x);

        if off_s.abs() < 0.5 && off_y.abs() < 0.5 && off_x.abs() < 0.5 {
            let contrast = at(curr, x, y) + 0.5 * (g_s * off_s + g_y * off_y + g_x * off_x);
            return Some(Interpolation {
                level,
                x,
                y,
                offset: [off_s, off_y, off_x],
                contrast,
            });
        }

        let nx = x as i64 + off_x.round() as i64;
        let ny = y as i64 + off_y.round() as i64;
        let nl = level as i64 + off_s.round() as i64;
        if nl < 1
            || nl as usize > n_levels
            || nx < IMAGE_BORDER as i64
            || nx >= (width - IMAGE_BORDER) as i64
            || ny < IMAGE_BORDER as i64
            || ny >= (height - IMAGE_BORDER) as i64
        {
            return None;
        }
        x = nx as usize;
        y = ny as usize;
        level = nl as usize;
    }
    None
}

/// Eigenvalue-ratio edge rejection on the 2x2 spatial Hessian.
fn is_on_edge(curr: &GrayImage, x: usize, y: usize, edge_threshold: f32) -> bool {
    let v2 = 2.0 * at(curr, x, y);
    let h_yy = at(curr, x, y + 1) + at(curr, x, y - 1) - v2;
    let h_xx = at(curr, x + 1, y) + at(curr, x - 1, y) - v2;
    let h_yx = (at(curr, x + 1, y + 1) - at(curr, x - 1, y + 1) - at(curr, x + 1, y - 1)
        + at(curr, x - 1, y - 1))
        / 4.0;
    let tr = h_xx + h_yy;
    let det = h_xx * h_yy - h_yx * h_yx;
    if det <= 0.0 {
        return true;
    }
    tr * tr * edge_threshold >= (edge_threshold + 1.0).powi(2) * det
}

pub(crate) fn find_extrema(space: &ScaleSpace, params: &SiftParams) -> Vec<RawKeypoint> {
    let s = params.scales_per_octave;
    let prefilter = 0.5 * params.contrast_threshold / s as f32;
    let mut found = Vec::new();

    for (o, octave) in space.octaves.iter().enumerate() {
        let width = octave.dog[0].width;
        let height = octave.dog[0].height;
        if width <= 2 * IMAGE_BORDER || height <= 2 * IMAGE_BORDER {
            continue;
        }
        for level in 1..=s {
            for y in IMAGE_BORDER..height - IMAGE_BORDER {
                for x in IMAGE_BORDER..width - IMAGE_BORDER {
                    if !is_local_extremum(&octave.dog, level, x, y, prefilter) {
                        continue;
                    }
                    let Some(interp) = interpolate_extremum(&octave.dog, s, level, x, y) else {
                        continue;
                    };
                    if interp.contrast.abs() * s as f32 <= params.contrast_threshold {
                        continue;
                    }
                    if is_on_edge(
                        &octave.dog[interp.level],
                        interp.x,
                        interp.y,
                        params.edge_threshold,
                    ) {
                        continue;
                    }
                    let sigma_oct = params.initial_sigma
                        * 2f32.powf((interp.level as f32 + interp.offset[0]) / s as f32);
                    found.push(RawKeypoint {
                        octave: o,
                        level: interp.level,
                        x_oct: interp.x as f32 + interp.offset[2],
                        y_oct: interp.y as f32 + interp.offset[1],
                        sigma_oct,
                        response: interp.contrast.abs(),
                    });
                }
            }
        }
    }
    found
}
