//! Hand-crafted features and their weighted L1 distance.
//!
//! The baseline front-end describes a place with three channels: the raw
//! visual intensity profile `V`, a pair-distance histogram `PFH` over
//! whisker contact points, and a slope distribution array `SDA` over
//! whisker deflection magnitudes. The PFH and SDA here are simplified,
//! fully specified stand-ins for their namesakes: distances between
//! unordered contact pairs binned over the reachable range, and nonzero
//! deflections binned over (0, 1], both normalized to sum 1.
//!
//! Channel distances are combined as α·L1(V) + β·L1(PFH) + γ·L1(SDA),
//! where each factor is the reciprocal of the standard deviation of that
//! channel's pairwise distances over a calibration template set.

use crate::synthworld::Observation;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("empty input")]
    EmptyInput,
    #[error("channel length mismatch: {0}")]
    LengthMismatch(String),
    #[error("deflection {value} at index {index} outside [0, 1]")]
    OutOfRange { index: usize, value: f64 },
    #[error("scaling needs at least 2 templates, got {0}")]
    TooFewTemplates(usize),
    #[error("downsample factor must be >= 1")]
    BadFactor,
}

/// Default bin count for both histograms.
pub const DEFAULT_BINS: usize = 16;

/// Hand-crafted place descriptor.
#[derive(Debug, Clone, PartialEq)]
pub struct HandcraftedTemplate {
    pub intensity: Vec<f64>,
    pub pfh: Vec<f64>,
    pub sda: Vec<f64>,
}

/// Per-channel reciprocal-σ weights for the combined distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFactors {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

/// Knobs for building templates from observations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineParams {
    pub pfh_bins: usize,
    pub sda_bins: usize,
    pub profile_downsample: usize,
    /// Largest possible contact pair distance; pair distances are
    /// normalized by this before binning. Two whisker lengths for a
    /// centered fan.
    pub max_pair_reach: f64,
}

impl Default for BaselineParams {
    fn default() -> Self {
        BaselineParams {
            pfh_bins: DEFAULT_BINS,
            sda_bins: DEFAULT_BINS,
            profile_downsample: 1,
            max_pair_reach: 0.5,
        }
    }
}

/// The visual channel: the synthetic observation already is an intensity
/// profile, so this is a pass-through with optional block-mean
/// downsampling. A trailing partial block is averaged over its own length.
pub fn intensity_profile(visual: &[f64], downsample: usize) -> Result<Vec<f64>, BaselineError> {
    if visual.is_empty() {
        return Err(BaselineError::EmptyInput);
    }
    if downsample == 0 {
        return Err(BaselineError::BadFactor);
    }
    if downsample == 1 {
        return Ok(visual.to_vec());
    }
    Ok(visual
        .chunks(downsample)
        .map(|c| c.iter().sum::<f64>() / c.len() as f64)
        .collect())
}

/// Histogram of normalized distances between all unordered contact pairs.
/// Empty or single-contact input yields the all-zero vector.
pub fn compute_pfh(contacts: &[[f64; 2]], bins: usize, max_reach: f64) -> Vec<f64> {
    let mut hist = vec![0.0; bins];
    if contacts.len() < 2 || bins == 0 || !(max_reach > 0.0) {
        return hist;
    }
    let mut count = 0usize;
    for i in 0..contacts.len() {
        for j in (i + 1)..contacts.len() {
            let d = ((contacts[i][0] - contacts[j][0]).powi(2)
                + (contacts[i][1] - contacts[j][1]).powi(2))
            .sqrt();
            let v = (d / max_reach).clamp(0.0, 1.0);
            let idx = ((v * bins as f64) as usize).min(bins - 1);
            hist[idx] += 1.0;
            count += 1;
        }
    }
    for h in &mut hist {
        *h /= count as f64;
    }
    hist
}

/// Histogram of nonzero deflection magnitudes over uniform bins on (0, 1].
/// All-zero input yields the all-zero vector.
pub fn compute_sda(deflections: &[f64], bins: usize) -> Result<Vec<f64>, BaselineError> {
    for (index, &value) in deflections.iter().enumerate() {
        if !(0.0..=1.0).contains(&value) {
            return Err(BaselineError::OutOfRange { index, value });
        }
    }
    let mut hist = vec![0.0; bins];
    if bins == 0 {
        return Ok(hist);
    }
    let mut count = 0usize;
    for &v in deflections {
        if v > 0.0 {
            // bins are half-open from above: ((k)/B, (k+1)/B], so 1.0
            // lands in the last bin
            let idx = ((v * bins as f64).ceil() as usize).saturating_sub(1).min(bins - 1);
            hist[idx] += 1.0;
            count += 1;
        }
    }
    if count > 0 {
        for h in &mut hist {
            *h /= count as f64;
        }
    }
    Ok(hist)
}

/// Build the full descriptor for one observation.
pub fn make_template(
    obs: &Observation,
    params: &BaselineParams,
) -> Result<HandcraftedTemplate, BaselineError> {
    Ok(HandcraftedTemplate {
        intensity: intensity_profile(&obs.visual, params.profile_downsample)?,
        pfh: compute_pfh(&obs.contacts, params.pfh_bins, params.max_pair_reach),
        sda: compute_sda(&obs.tactile, params.sda_bins)?,
    })
}

fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Population standard deviation of a channel's pairwise L1 distances
/// over the template set; zero-σ (constant) channels get factor 0 and a
/// warning instead of a division by zero.
pub fn fit_scaling(templates: &[HandcraftedTemplate]) -> Result<ScalingFactors, BaselineError> {
    if templates.len() < 2 {
        return Err(BaselineError::TooFewTemplates(templates.len()));
    }
    check_channel_lengths(templates)?;

    let sigma = |channel: &dyn Fn(&HandcraftedTemplate) -> &[f64]| -> f64 {
        let mut dists = Vec::with_capacity(templates.len() * (templates.len() - 1) / 2);
        for i in 0..templates.len() {
            for j in (i + 1)..templates.len() {
                dists.push(l1(channel(&templates[i]), channel(&templates[j])));
            }
        }
        // summing in sorted order makes the result independent of
        // template order, bit for bit
        dists.sort_by(f64::total_cmp);
        let n = dists.len() as f64;
        let mean = dists.iter().sum::<f64>() / n;
        (dists.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / n).sqrt()
    };

    let factor = |name: &str, sigma: f64| -> f64 {
        if sigma < 1e-12 {
            log::warn!("{name} channel is constant across the calibration set; its weight is 0");
            0.0
        } else {
            1.0 / sigma
        }
    };

    Ok(ScalingFactors {
        alpha: factor("intensity", sigma(&|t| t.intensity.as_slice())),
        beta: factor("pfh", sigma(&|t| t.pfh.as_slice())),
        gamma: factor("sda", sigma(&|t| t.sda.as_slice())),
    })
}

fn check_channel_lengths(templates: &[HandcraftedTemplate]) -> Result<(), BaselineError> {
    let first = &templates[0];
    for (i, t) in templates.iter().enumerate().skip(1) {
        if t.intensity.len() != first.intensity.len()
            || t.pfh.len() != first.pfh.len()
            || t.sda.len() != first.sda.len()
        {
            return Err(BaselineError::LengthMismatch(format!(
                "template {i} channel lengths differ from template 0"
            )));
        }
    }
    Ok(())
}

/// Combined distance: α·L1(V) + β·L1(PFH) + γ·L1(SDA).
pub fn handcrafted_distance(
    a: &HandcraftedTemplate,
    b: &HandcraftedTemplate,
    s: &ScalingFactors,
) -> Result<f64, BaselineError> {
    if a.intensity.len() != b.intensity.len()
        || a.pfh.len() != b.pfh.len()
        || a.sda.len() != b.sda.len()
    {
        return Err(BaselineError::LengthMismatch(format!(
            "({}, {}, {}) vs ({}, {}, {})",
            a.intensity.len(),
            a.pfh.len(),
            a.sda.len(),
            b.intensity.len(),
            b.pfh.len(),
            b.sda.len()
        )));
    }
    Ok(s.alpha * l1(&a.intensity, &b.intensity)
        + s.beta * l1(&a.pfh, &b.pfh)
        + s.gamma * l1(&a.sda, &b.sda))
}
