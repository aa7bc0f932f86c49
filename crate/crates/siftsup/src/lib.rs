//! Geometric-correspondence supervision for garment/person image pairs.
//!
//! The crate detects SIFT keypoints on a flat garment image and a person
//! image, filters the raw descriptor matches through a try-on-specific
//! cascade (angle/scale gating, duplicate removal, RANSAC homography),
//! converts the survivors into per-resolution reference attention
//! distributions, and evaluates the cross-entropy supervision loss those
//! distributions impose on cross-attention weights. A small trainable
//! attention layer demonstrates end to end that the loss concentrates
//! attention on geometrically corresponding regions.
//!
//! Start with the runnable examples (`cargo run --example ...`) or the
//! `siftsup` binary, which exposes each stage as a subcommand.

pub mod error;
pub mod imgproc;
pub mod sift;
pub mod synth;

pub use error::{Error, Result};
