//! From-scratch SIFT: difference-of-gaussians keypoint detection, 128-d
//! gradient-histogram descriptors, and brute-force descriptor matching
//! with the nearest/second-nearest ratio test.
//!
//! Detection is fully deterministic: identical input and parameters
//! produce an identical keypoint list.

mod descriptor;
mod detect;
mod pyramid;

use crate::error::{Error, Result};
use crate::imgproc::GrayImage;

pub use descriptor::DESCRIPTOR_LEN;

/// Minimum input dimension accepted by the detector.
pub const MIN_IMAGE_DIM: usize = 16;

/// Detector and descriptor parameters. Defaults are the method's
/// canonical values for images normalized to `[0, 1]`.
#[derive(Debug, Clone)]
pub struct SiftParams {
    /// Sampled scales per octave (plus the 3 auxiliary blur levels).
    pub scales_per_octave: usize,
    /// Blur level of the first pyramid image, in pixels.
    pub initial_sigma: f32,
    /// Blur assumed already present in the input.
    pub input_blur: f32,
    /// Minimum interpolated DoG contrast, scaled by `scales_per_octave`.
    pub contrast_threshold: f32,
    /// Maximum principal-curvature ratio before a point counts as an edge.
    pub edge_threshold: f32,
    /// Cap on reference orientations emitted per extremum.
    pub max_orientation_peaks: usize,
    /// Secondary orientation peaks must reach this fraction of the maximum bin.
    pub orientation_peak_ratio: f32,
    /// Octaves are generated while both dimensions stay at or above this.
    pub min_octave_dim: usize,
    /// Optional 2x bilinear upsampling before octave 0; off by default
    /// since typical inputs are large enough without it.
    pub upsample_input: bool,
}

impl Default for SiftParams {
    fn default() -> Self {
        SiftParams {
            scales_per_octave: 3,
            initial_sigma: 1.6,
            input_blur: 0.5,
            contrast_threshold: 0.03,
            edge_threshold: 10.0,
            max_orientation_peaks: 4,
            orientation_peak_ratio: 0.8,
            min_octave_dim: MIN_IMAGE_DIM,
            upsample_input: false,
        }
    }
}

/// Detected keypoint with its descriptor.
///
/// `x`/`y` are subpixel positions in source-image coordinates, `size` is
/// the keypoint diameter in pixels, `orientation` is degrees in
/// `[0, 360)`. The descriptor has unit L2 norm.
#[derive(Debug, Clone)]
pub struct Keypoint {
    pub x: f32,
    pub y: f32,
    pub size: f32,
    pub orientation: f32,
    pub response: f32,
    pub octave: u32,
    pub descriptor: [f32; DESCRIPTOR_LEN],
}

/// Correspondence between a garment keypoint and a person keypoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchPair {
    pub garment_idx: usize,
    pub person_idx: usize,
    /// L2 distance between the two descriptors.
    pub distance: f32,
}

/// Detect keypoints and compute their descriptors.
///
/// Keypoints are returned sorted by descending response (deterministic
/// tie-breaking on position, scale and angle).
pub fn detect_and_describe(img: &GrayImage, params: &SiftParams) -> Result<Vec<Keypoint>> {
    detect_and_describe_inspect(img, params, |_| {})
}

/// [`detect_and_describe`] with an instrumentation hook that observes each
/// descriptor after magnitude clamping and before the final
/// renormalization. Useful for verifying the clamping invariant.
pub fn detect_and_describe_inspect(
    img: &GrayImage,
    params: &SiftParams,
    mut inspect: impl FnMut(&[f32; DESCRIPTOR_LEN]),
) -> Result<Vec<Keypoint>> {
    if img.width < MIN_IMAGE_DIM || img.height < MIN_IMAGE_DIM {
        return Err(Error::ImageTooSmall {
            width: img.width,
            height: img.height,
            min: MIN_IMAGE_DIM,
        });
    }

    let space = pyramid::build_scale_space(img, params)?;
    let raw = detect::find_extrema(&space, params);

    let mut keypoints = Vec::new();
    for rk in &raw {
        let gauss = &space.octaves[rk.octave].gauss[rk.level];
        let hist = descriptor::orientation_histogram(gauss, rk);
        let scale = space.octave_scale(rk.octave);
        for angle in descriptor::orientation_peaks(&hist, params) {
            let Some(desc) = descriptor::compute_descriptor(gauss, rk, angle, &mut inspect) else {
                continue;
            };
            keypoints.push(Keypoint {
                x: rk.x_oct * scale,
                y: rk.y_oct * scale,
                size: 2.0 * rk.sigma_oct * scale,
                orientation: angle,
                response: rk.response,
                octave: rk.octave as u32,
                descriptor: desc,
            });
        }
    }

    keypoints.sort_by(|a, b| {
        b.response
            .total_cmp(&a.response)
            .then(a.y.total_cmp(&b.y))
            .then(a.x.total_cmp(&b.x))
            .then(a.size.total_cmp(&b.size))
            .then(a.orientation.total_cmp(&b.orientation))
    });
    Ok(keypoints)
}

#[inline]
fn descriptor_distance_sq(a: &[f32; DESCRIPTOR_LEN], b: &[f32; DESCRIPTOR_LEN]) -> f64 {
    let mut acc = 0f64;
    for i in 0..DESCRIPTOR_LEN {
        let d = (a[i] - b[i]) as f64;
        acc += d * d;
    }
    acc
}

/// Brute-force nearest-neighbor matching with Lowe's ratio test.
///
/// Each keypoint in `a` is compared against all of `b`; the match is kept
/// iff the nearest distance is below `ratio` times the second-nearest.
/// When `b` holds a single keypoint there is no second neighbor and the
/// match is kept unconditionally. Distance ties resolve to the lower
/// index in `b`.
pub fn match_ratio_test(a: &[Keypoint], b: &[Keypoint], ratio: f32) -> Result<Vec<MatchPair>> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyKeypoints);
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidRatio(ratio));
    }
    let ratio_sq = (ratio as f64) * (ratio as f64);

    let mut matches = Vec::new();
    for (i, ka) in a.iter().enumerate() {
        let mut best = f64::INFINITY;
        let mut best_j = 0usize;
        let mut second = f64::INFINITY;
        for (j, kb) in b.iter().enumerate() {
            let d = descriptor_distance_sq(&ka.descriptor, &kb.descriptor);
            if d < best {
                second = best;
                best = d;
                best_j = j;
            } else if d < second {
                second = d;
            }
        }
        let keep = b.len() == 1 || best < ratio_sq * second;
        if keep {
            matches.push(MatchPair {
                garment_idx: i,
                person_idx: best_j,
                distance: best.sqrt() as f32,
            });
        }
    }
    Ok(matches)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imgproc::gaussian_blur;
    use crate::synth;

    fn kp_with_descriptor(values: &[(usize, f32)]) -> Keypoint {
        let mut descriptor = [0f32; DESCRIPTOR_LEN];
        for &(i, v) in values {
            descriptor[i] = v;
        }
        Keypoint {
            x: 0.0,
            y: 0.0,
            size: 1.0,
            orientation: 0.0,
            response: 1.0,
            octave: 0,
            descriptor,
        }
    }

    #[test]
    fn constant_image_has_no_keypoints() {
        let img = GrayImage::from_data(64, 64, vec![0.4; 64 * 64]);
        let kps = detect_and_describe(&img, &SiftParams::default()).unwrap();
        assert!(kps.is_empty());
    }

    #[test]
    fn tiny_image_is_rejected() {
        let img = GrayImage::new(15, 40);
        assert!(matches!(
            detect_and_describe(&img, &SiftParams::default()),
            Err(Error::ImageTooSmall { .. })
        ));
    }

    /// Brute-force DoG oracle: blur at two adjacent pyramid levels and scan
    /// the difference for its largest-magnitude interior sample.
    fn dog_extremum_oracle(img: &GrayImage, s0: f32, s1: f32) -> (usize, usize) {
        let a = gaussian_blur(img, s0).unwrap();
        let b = gaussian_blur(img, s1).unwrap();
        let mut best = (0usize, 0usize);
        let mut best_v = 0f32;
        for y in 5..img.height - 5 {
            for x in 5..img.width - 5 {
                let v = (b.get(x, y) - a.get(x, y)).abs();
                if v > best_v {
                    best_v = v;
                    best = (x, y);
                }
            }
        }
        best
    }

    #[test]
    fn gaussian_blob_yields_centered_keypoint() {
        let img = synth::blob(128, 128, 64.0, 64.0, 4.0);

        let (ox, oy) = dog_extremum_oracle(&img, 1.6, 1.6 * 2f32.powf(1.0 / 3.0));
        assert!((ox as f32 - 64.0).abs() <= 1.0 && (oy as f32 - 64.0).abs() <= 1.0);

        let kps = detect_and_describe(&img, &SiftParams::default()).unwrap();
        assert!(kps
            .iter()
            .any(|kp| (kp.x - 64.0).abs() <= 1.5 && (kp.y - 64.0).abs() <= 1.5));
    }

    #[test]
    fn strong_keypoints_survive_rotation() {
        let img = synth::textured_gray(192, 160, 11);
        let rot = synth::rotate90_cw(&img);
        let params = SiftParams::default();
        let kps = detect_and_describe(&img, &params).unwrap();
        let kps_rot = detect_and_describe(&rot, &params).unwrap();
        assert!(kps.len() > 40, "fixture too sparse: {}", kps.len());

        let strong = &kps[..kps.len() / 2];
        let recovered = strong
            .iter()
            .filter(|kp| {
                let (rx, ry) = synth::rotate90_point(kp.x, kp.y, img.height);
                kps_rot
                    .iter()
                    .any(|r| (r.x - rx).abs() <= 1.5 && (r.y - ry).abs() <= 1.5)
            })
            .count();
        let rate = recovered as f64 / strong.len() as f64;
        assert!(rate >= 0.8, "repeatability {rate}");
    }

    #[test]
    fn descriptors_are_unit_norm_and_clamped() {
        let img = synth::textured_gray(160, 128, 5);
        let mut max_clamped = 0f32;
        let kps = detect_and_describe_inspect(&img, &SiftParams::default(), |d| {
            for &v in d.iter() {
                max_clamped = max_clamped.max(v);
            }
        })
        .unwrap();
        assert!(!kps.is_empty());
        assert!(max_clamped <= 0.2 + 1e-6, "clamp violated: {max_clamped}");
        for kp in &kps {
            let norm: f64 = kp
                .descriptor
                .iter()
                .map(|&v| (v as f64) * (v as f64))
                .sum::<f64>()
                .sqrt();
            assert!((norm - 1.0).abs() <= 1e-6, "norm {norm}");
            assert!(kp.descriptor.iter().all(|&v| v >= 0.0));
            assert!((0.0..360.0).contains(&kp.orientation));
            assert!(kp.size > 0.0);
            assert!(kp.x >= 0.0 && kp.x < img.width as f32);
            assert!(kp.y >= 0.0 && kp.y < img.height as f32);
        }
    }

    #[test]
    fn detection_is_deterministic() {
        let img = synth::textured_gray(160, 128, 5);
        let a = detect_and_describe(&img, &SiftParams::default()).unwrap();
        let b = detect_and_describe(&img, &SiftParams::default()).unwrap();
        assert_eq!(a.len(), b.len());
        for (ka, kb) in a.iter().zip(&b) {
            assert_eq!(ka.x, kb.x);
            assert_eq!(ka.y, kb.y);
            assert_eq!(ka.orientation, kb.orientation);
            assert_eq!(ka.descriptor, kb.descriptor);
        }
    }

    #[test]
    fn single_candidate_matches_unconditionally() {
        let a = vec![kp_with_descriptor(&[(0, 1.0)])];
        let b = vec![kp_with_descriptor(&[(1, 1.0)])];
        let matches = match_ratio_test(&a, &b, 0.1).unwrap();
        assert_eq!(matches.len(), 1);
        assert_eq!(matches[0].person_idx, 0);
    }

    #[test]
    fn equidistant_neighbors_fail_ratio_test() {
        let a = vec![kp_with_descriptor(&[(0, 1.0)])];
        let b = vec![
            kp_with_descriptor(&[(1, 1.0)]),
            kp_with_descriptor(&[(2, 1.0)]),
        ];
        let matches = match_ratio_test(&a, &b, 0.75).unwrap();
        assert!(matches.is_empty());
    }

    #[test]
    fn self_match_finds_identical_twin() {
        let img = synth::textured_gray(192, 160, 11);
        let kps = detect_and_describe(&img, &SiftParams::default()).unwrap();
        let matches = match_ratio_test(&kps, &kps, 0.75).unwrap();
        let zero_dist = matches.iter().filter(|m| m.distance == 0.0).count();
        let rate = zero_dist as f64 / kps.len() as f64;
        assert!(rate >= 0.95, "self-match rate {rate}");
    }

    #[test]
    fn ratio_is_validated() {
        let a = vec![kp_with_descriptor(&[(0, 1.0)])];
        assert!(matches!(
            match_ratio_test(&a, &a, 1.0),
            Err(Error::InvalidRatio(_))
        ));
        assert!(matches!(
            match_ratio_test(&[], &a, 0.5),
            Err(Error::EmptyKeypoints)
        ));
    }

    #[test]
    fn ratio_monotonicity() {
        let img = synth::textured_gray(128, 96, 3);
        let kps = detect_and_describe(&img, &SiftParams::default()).unwrap();
        let other = synth::textured_gray(128, 96, 4);
        let kps_b = detect_and_describe(&other, &SiftParams::default()).unwrap();
        let mut prev: Vec<(usize, usize)> = Vec::new();
        for ratio in [0.5f32, 0.7, 0.9] {
            let m: Vec<(usize, usize)> = match_ratio_test(&kps, &kps_b, ratio)
                .unwrap()
                .iter()
                .map(|m| (m.garment_idx, m.person_idx))
                .collect();
            assert!(prev.iter().all(|pair| m.contains(pair)));
            prev = m;
        }
    }
}
