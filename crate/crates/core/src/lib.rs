//! Visuo-tactile place recognition.
//!
//! A small research stack for studying place recognition from paired
//! visual and tactile observations:
//!
//! - [`pcnet`] — a three-module predictive coding network that infers a
//!   joint latent representation of a visuo-tactile stimulus with purely
//!   local update rules; the multi-sensory activity vector is the learned
//!   place feature.
//! - [`baseline`] — hand-crafted features (intensity profile, pair-distance
//!   histogram, slope distribution array) combined with a scaled L1 distance.
//! - [`synthworld`] — deterministic 2-D arenas, ray-cast vision, whisker
//!   contact sensing, and noisy waypoint trajectories.
//! - [`evaluate`] — template match error / ground truth matrices and
//!   τ-thresholded precision/recall/F1 scoring.
//! - [`persist`] — bit-exact file formats for models, datasets, template
//!   sets, matrices, and score reports.
//! - [`seeds`] — named-seed derivation so every run is reproducible.
//!
//! All floating point work is f64 and all randomness flows from explicit
//! 64-bit seeds; two runs with the same seeds produce bit-identical output.

pub mod baseline;
pub mod evaluate;
pub mod pcnet;
pub mod persist;
pub mod seeds;
pub mod synthworld;
