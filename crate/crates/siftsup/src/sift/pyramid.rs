//! Gaussian scale-space and difference-of-gaussians pyramid construction.

use crate::error::Result;
use crate::imgproc::{gaussian_blur, resample_half, GrayImage};

use super::SiftParams;

pub(crate) struct Octave {
    /// `scales_per_octave + 3` progressively blurred images.
    pub gauss: Vec<GrayImage>,
    /// `scales_per_octave + 2` adjacent differences.
    pub dog: Vec<GrayImage>,
}

pub(crate) struct ScaleSpace {
    pub octaves: Vec<Octave>,
    /// 2 when the input was upsampled before octave 0, otherwise 1.
    pub base_upsample: u32,
}

impl ScaleSpace {
    /// Conversion factor from octave-o pixel units to input-image pixels.
    pub fn octave_scale(&self, octave: usize) -> f32 {
        (1 << octave) as f32 / self.base_upsample as f32
    }
}

/// Bilinear 2x upsample, used only when [`SiftParams::upsample_input`] is set.
fn upsample_2x(img: &GrayImage) -> GrayImage {
    let (w, h) = (img.width * 2, img.height * 2);
    let mut out = GrayImage::new(w, h);
    for y in 0..h {
        for x in 0..w {
            let sx = x as f32 / 2.0;
            let sy = y as f32 / 2.0;
            let x0 = sx.floor() as usize;
            let y0 = sy.floor() as usize;
            let x1 = (x0 + 1).min(img.width - 1);
            let y1 = (y0 + 1).min(img.height - 1);
            let fx = sx - x0 as f32;
            let fy = sy - y0 as f32;
            let top = img.get(x0, y0) * (1.0 - fx) + img.get(x1, y0) * fx;
            let bot = img.get(x0, y1) * (1.0 - fx) + img.get(x1, y1) * fx;
            out.set(x, y, top * (1.0 - fy) + bot * fy);
        }
    }
    out
}

pub(crate) fn build_scale_space(img: &GrayImage, params: &SiftParams) -> Result<ScaleSpace> {
    let s = params.scales_per_octave;

    let (base, assumed_blur, base_upsample) = if params.upsample_input {
        (upsample_2x(img), 2.0 * params.input_blur, 2)
    } else {
        (img.clone(), params.input_blur, 1)
    };

    // Bring the base image up to the pyramid's initial blur level.
    let delta_sq = params.initial_sigma * params.initial_sigma - assumed_blur * assumed_blur;
    let base = if delta_sq > 1e-4 {
        gaussian_blur(&base, delta_sq.sqrt())?
    } else {
        base
    };

    // Per-octave blur increments: total blur at level i is sigma0 * 2^(i/s).
    let k = 2f32.powf(1.0 / s as f32);
    let mut increments = Vec::with_capacity(s + 2);
    for i in 1..s + 3 {
        let prev = params.initial_sigma * k.powi(i as i32 - 1);
        let curr = prev * k;
        increments.push((curr * curr - prev * prev).sqrt());
    }

    let mut octaves = Vec::new();
    let mut current = base;
    loop {
        let mut gauss = Vec::with_capacity(s + 3);
        gauss.push(current);
        for &inc in &increments {
            gauss.push(gaussian_blur(gauss.last().unwrap(), inc)?);
        }
        let dog = gauss
            .windows(2)
            .map(|w| {
                let mut data = Vec::with_capacity(w[0].data.len());
                for (a, b) in w[1].data.iter().zip(&w[0].data) {
                    data.push(a - b);
                }
                GrayImage::from_data(w[0].width, w[0].height, data)
            })
            .collect();

        // Base of the next octave: the image at total blur 2*sigma0, halved.
        let next = &gauss[s];
        let small_enough = next.width / 2 < params.min_octave_dim
            || next.height / 2 < params.min_octave_dim;
        let next = if small_enough {
            None
        } else {
            Some(resample_half(next)?)
        };
        octaves.push(Octave { gauss, dog });
        match next {
            Some(img) => current = img,
            None => break,
        }
    }

    Ok(ScaleSpace {
        octaves,
        base_upsample,
    })
}
