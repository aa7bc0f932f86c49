//! Image decode/encode and the sampling primitives behind the keypoint
//! pipeline: grayscale conversion, separable gaussian filtering and
//! half-resolution octave downsampling.
//!
//! Supported container formats are 8-bit PNG (RGB or RGBA, alpha dropped)
//! and binary PPM (`P6`). PPM round-trips bit-exactly, which keeps golden
//! tests free of codec dependencies.

use crate::error::{Error, Result};

/// Single-channel image with row-major luminance values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f32>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize) -> Self {
        GrayImage {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    pub fn from_data(width: usize, height: usize, data: Vec<f32>) -> Self {
        assert_eq!(data.len(), width * height, "data length must be w*h");
        GrayImage {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f32) {
        self.data[y * self.width + x] = v;
    }

    /// Clamp-to-border sample.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> f32 {
        let xc = x.clamp(0, self.width as isize - 1) as usize;
        let yc = y.clamp(0, self.height as isize - 1) as usize;
        self.data[yc * self.width + xc]
    }
}

/// Interleaved 8-bit RGB image, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize) -> Self {
        RgbImage {
            width,
            height,
            data: vec![0; 3 * width * height],
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        let i = 3 * (y * self.width + x);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, px: [u8; 3]) {
        let i = 3 * (y * self.width + x);
        self.data[i..i + 3].copy_from_slice(&px);
    }
}

/// Decode a PNG or binary PPM byte stream.
///
/// The format is sniffed from the leading magic bytes. PNG alpha channels
/// are dropped; 8-bit channels only.
pub fn decode_image(bytes: &[u8]) -> Result<RgbImage> {
    if bytes.starts_with(b"\x89PNG") {
        decode_png(bytes)
    } else if bytes.starts_with(b"P6") {
        decode_ppm(bytes)
    } else {
        Err(Error::MalformedImage(
            "unrecognized magic, expected PNG or P6 PPM".into(),
        ))
    }
}

fn decode_png(bytes: &[u8]) -> Result<RgbImage> {
    let dyn_img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)
        .map_err(|e| Error::MalformedImage(format!("png: {e}")))?;
    let rgb = dyn_img.to_rgb8();
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    if w == 0 || h == 0 {
        return Err(Error::MalformedImage("png with zero dimension".into()));
    }
    Ok(RgbImage {
        width: w,
        height: h,
        data: rgb.into_raw(),
    })
}

fn decode_ppm(bytes: &[u8]) -> Result<RgbImage> {
    let malformed = |m: &str| Error::MalformedImage(format!("ppm: {m}"));
    let mut pos = 2usize; // past "P6"

    // Header tokens are separated by whitespace; '#' starts a comment to EOL.
    let mut next_token = |pos: &mut usize| -> Result<u64> {
        loop {
            while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
            if *pos < bytes.len() && bytes[*pos] == b'#' {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
                continue;
            }
            break;
        }
        let start = *pos;
        while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
            *pos += 1;
        }
        if *pos == start {
            return Err(malformed("expected integer header field"));
        }
        std::str::from_utf8(&bytes[start..*pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| malformed("bad integer header field"))
    };

    let width = next_token(&mut pos)? as usize;
    let height = next_token(&mut pos)? as usize;
    let maxval = next_token(&mut pos)?;
    if width == 0 || height == 0 {
        return Err(malformed("zero dimension"));
    }
    if maxval != 255 {
        return Err(malformed("only maxval 255 supported"));
    }
    // Exactly one whitespace byte separates the header from raster data.
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(malformed("missing separator before raster"));
    }
    pos += 1;
    let need = 3 * width * height;
    if bytes.len() < pos + need {
        return Err(malformed("truncated raster data"));
    }
    Ok(RgbImage {
        width,
        height,
        data: bytes[pos..pos + need].to_vec(),
    })
}

/// Encode as binary PPM (`P6`, maxval 255). Inverse of [`decode_image`]
/// bit-for-bit.
pub fn encode_ppm(img: &RgbImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.data);
    out
}

/// Encode as 8-bit RGB PNG.
pub fn encode_png(img: &RgbImage) -> Result<Vec<u8>> {
    let buf: image::RgbImage =
        image::ImageBuffer::from_raw(img.width as u32, img.height as u32, img.data.clone())
            .expect("dimensions match data length");
    let mut out = std::io::Cursor::new(Vec::new());
    buf.write_to(&mut out, image::ImageFormat::Png)
        .map_err(|e| Error::MalformedImage(format!("png encode: {e}")))?;
    Ok(out.into_inner())
}

/// ITU-R 601 luminance, `(0.299 R + 0.587 G + 0.114 B) / 255`, clamped to `[0, 1]`.
pub fn to_gray(img: &RgbImage) -> GrayImage {
    let mut data = Vec::with_capacity(img.width * img.height);
    for px in img.data.chunks_exact(3) {
        let y = (0.299 * px[0] as f32 + 0.587 * px[1] as f32 + 0.114 * px[2] as f32) / 255.0;
        data.push(y.clamp(0.0, 1.0));
    }
    GrayImage {
        width: img.width,
        height: img.height,
        data,
    }
}

/// Normalized 1-D gaussian taps over `[-radius, radius]` with `radius = ceil(4 sigma)`.
fn gaussian_kernel(sigma: f32) -> Vec<f32> {
    let radius = (4.0 * sigma).ceil() as usize;
    let denom = 2.0 * (sigma as f64) * (sigma as f64);
    let mut taps: Vec<f64> = (-(radius as isize)..=radius as isize)
        .map(|i| (-((i * i) as f64) / denom).exp())
        .collect();
    let sum: f64 = taps.iter().sum();
    for t in &mut taps {
        *t /= sum;
    }
    taps.into_iter().map(|t| t as f32).collect()
}

/// Separable gaussian blur with clamp-to-border handling.
pub fn gaussian_blur(img: &GrayImage, sigma: f32) -> Result<GrayImage> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidSigma(sigma));
    }
    let kernel = gaussian_kernel(sigma);
    let radius = (kernel.len() / 2) as isize;
    let (w, h) = (img.width, img.height);

    // Horizontal pass.
    let mut tmp = vec![0.0f32; w * h];
    for y in 0..h {
        let row = &img.data[y * w..(y + 1) * w];
        for x in 0..w {
            let mut acc = 0.0f32;
            for (k, &tap) in kernel.iter().enumerate() {
                let xi = (x as isize + k as isize - radius).clamp(0, w as isize - 1) as usize;
                acc += tap * row[xi];
            }
            tmp[y * w + x] = acc;
        }
    }
    // Vertical pass.
    let mut out = vec![0.0f32; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0f32;
            for (k, &tap) in kernel.iter().enumerate() {
                let yi = (y as isize + k as isize - radius).clamp(0, h as isize - 1) as usize;
                acc += tap * tmp[yi * w + x];
            }
            out[y * w + x] = acc;
        }
    }
    Ok(GrayImage {
        width: w,
        height: h,
        data: out,
    })
}

/// Downsample by two, taking the source pixel at `(2r, 2c)`.
pub fn resample_half(img: &GrayImage) -> Result<GrayImage> {
    if img.width < 2 || img.height < 2 {
        return Err(Error::TooSmall {
            width: img.width,
            height: img.height,
        });
    }
    let (w, h) = (img.width / 2, img.height / 2);
    let mut data = Vec::with_capacity(w * h);
    for r in 0..h {
        for c in 0..w {
            data.push(img.get(2 * c, 2 * r));
        }
    }
    Ok(GrayImage {
        width: w,
        height: h,
        data,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decode_minimal_white_ppm() {
        let img = decode_image(b"P6 1 1 255 \xff\xff\xff").unwrap();
        assert_eq!((img.width, img.height), (1, 1));
        assert_eq!(img.data, vec![255, 255, 255]);
    }

    #[test]
    fn decode_two_pixel_ppm() {
        let img = decode_image(b"P6\n2 1\n255\n\x00\x00\x00\xff\x00\x00").unwrap();
        assert_eq!((img.width, img.height), (2, 1));
        assert_eq!(img.get(0, 0), [0, 0, 0]);
        assert_eq!(img.get(1, 0), [255, 0, 0]);
    }

    #[test]
    fn decode_truncated_png_fails() {
        let err = decode_image(b"\x89PNG\r\n\x1a\n\x00\x00").unwrap_err();
        assert!(matches!(err, Error::MalformedImage(_)));
    }

    #[test]
    fn decode_truncated_ppm_raster_fails() {
        let err = decode_image(b"P6 2 2 255 \xff\xff").unwrap_err();
        assert!(matches!(err, Error::MalformedImage(_)));
    }

    #[test]
    fn png_roundtrip_through_encoder() {
        let mut img = RgbImage::new(3, 2);
        img.set(0, 0, [255, 0, 0]);
        img.set(2, 1, [0, 128, 255]);
        let bytes = encode_png(&img).unwrap();
        let back = decode_image(&bytes).unwrap();
        assert_eq!(back, img);
    }

    #[test]
    fn gray_conversion_reference_points() {
        let mut img = RgbImage::new(3, 1);
        img.set(0, 0, [255, 255, 255]);
        img.set(1, 0, [0, 0, 0]);
        img.set(2, 0, [255, 0, 0]);
        let g = to_gray(&img);
        assert!((g.get(0, 0) - 1.0).abs() < 1e-6);
        assert_eq!(g.get(1, 0), 0.0);
        assert!((g.get(2, 0) - 0.299).abs() < 1e-6);
    }

    #[test]
    fn blur_of_constant_is_constant() {
        let img = GrayImage::from_data(9, 7, vec![0.37; 63]);
        let out = gaussian_blur(&img, 1.7).unwrap();
        for &v in &out.data {
            assert!((v - 0.37).abs() < 1e-6);
        }
    }

    /// Oracle: directly sampled, normalized 2-D gaussian kernel.
    fn gaussian_2d_oracle(sigma: f64, radius: isize) -> Vec<Vec<f64>> {
        let mut k = vec![vec![0.0; (2 * radius + 1) as usize]; (2 * radius + 1) as usize];
        let mut sum = 0.0;
        for dy in -radius..=radius {
            for dx in -radius..=radius {
                let v = (-((dx * dx + dy * dy) as f64) / (2.0 * sigma * sigma)).exp();
                k[(dy + radius) as usize][(dx + radius) as usize] = v;
                sum += v;
            }
        }
        for row in &mut k {
            for v in row {
                *v /= sum;
            }
        }
        k
    }

    #[test]
    fn blur_impulse_matches_sampled_gaussian() {
        let sigma = 2.0f32;
        let mut img = GrayImage::new(41, 41);
        img.set(20, 20, 1.0);
        let out = gaussian_blur(&img, sigma).unwrap();

        let center = out.get(20, 20) as f64;
        let analytic = 1.0 / (2.0 * std::f64::consts::PI * (sigma as f64).powi(2));
        assert!(
            (center - analytic).abs() / analytic < 0.02,
            "center {center} vs analytic {analytic}"
        );

        let mass: f64 = out.data.iter().map(|&v| v as f64).sum();
        assert!((mass - 1.0).abs() < 1e-3, "mass {mass}");

        // Full-field agreement with the independently sampled 2-D kernel.
        let oracle = gaussian_2d_oracle(sigma as f64, 8);
        for dy in -8isize..=8 {
            for dx in -8isize..=8 {
                let got = out.get((20 + dx) as usize, (20 + dy) as usize) as f64;
                let want = oracle[(dy + 8) as usize][(dx + 8) as usize];
                assert!((got - want).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn blur_rejects_nonpositive_sigma() {
        let img = GrayImage::new(4, 4);
        assert!(matches!(
            gaussian_blur(&img, 0.0),
            Err(Error::InvalidSigma(_))
        ));
        assert!(matches!(
            gaussian_blur(&img, -1.0),
            Err(Error::InvalidSigma(_))
        ));
    }

    #[test]
    fn blur_sigma_composition() {
        // blur(blur(x, s1), s2) ~= blur(x, sqrt(s1^2 + s2^2)) on a smooth
        // centered bump that decays to a constant at the borders.
        let (w, h) = (48, 40);
        let mut img = GrayImage::new(w, h);
        for y in 0..h {
            for x in 0..w {
                let dx = x as f32 - w as f32 / 2.0;
                let dy = y as f32 - h as f32 / 2.0;
                img.set(x, y, 0.2 + 0.6 * (-(dx * dx + dy * dy) / 40.0).exp());
            }
        }
        let (s1, s2) = (1.2f32, 1.6f32);
        let twice = gaussian_blur(&gaussian_blur(&img, s1).unwrap(), s2).unwrap();
        let once = gaussian_blur(&img, (s1 * s1 + s2 * s2).sqrt()).unwrap();
        let rms: f64 = (twice
            .data
            .iter()
            .zip(&once.data)
            .map(|(&a, &b)| ((a - b) as f64).powi(2))
            .sum::<f64>()
            / (w * h) as f64)
            .sqrt();
        assert!(rms < 1e-3, "rms {rms}");
    }

    #[test]
    fn resample_half_constant_and_corners() {
        let img = GrayImage::from_data(4, 4, vec![0.5; 16]);
        let half = resample_half(&img).unwrap();
        assert_eq!((half.width, half.height), (2, 2));
        assert!(half.data.iter().all(|&v| v == 0.5));

        let img = GrayImage::from_data(2, 2, vec![0.1, 0.2, 0.3, 0.4]);
        let half = resample_half(&img).unwrap();
        assert_eq!((half.width, half.height), (1, 1));
        assert_eq!(half.data, vec![0.1]);
    }

    #[test]
    fn resample_half_rejects_tiny_images() {
        let img = GrayImage::new(1, 1);
        assert!(matches!(resample_half(&img), Err(Error::TooSmall { .. })));
    }

    #[test]
    fn blur_preserves_interior_mass() {
        let mut img = GrayImage::new(41, 41);
        for y in 15..26 {
            for x in 15..26 {
                img.set(x, y, 0.8);
            }
        }
        let total: f64 = img.data.iter().map(|&v| v as f64).sum();
        let out = gaussian_blur(&img, 1.5).unwrap();
        let blurred: f64 = out.data.iter().map(|&v| v as f64).sum();
        assert!((blurred - total).abs() / total < 1e-3);
    }
}
