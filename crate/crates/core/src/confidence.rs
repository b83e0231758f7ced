//! Validity and confidence of point mappings from bidirectional flow consistency.
//!
//! All functions are element-wise over index-aligned slices. Backward flow and
//! matched target points are gathered at the current mapping by the caller.

use nalgebra::Vector3;

use crate::error::Result;
use crate::nn::NeighborIndex;
use crate::types::RigidTransform;

/// Target index nearest to each flow-warped point `pᵢ + fᵢ`.
pub fn init_mapping(
    region: &[Vector3<f64>],
    forward: &[Vector3<f64>],
    target: &NeighborIndex,
) -> Result<Vec<usize>> {
    region
        .iter()
        .zip(forward)
        .map(|(p, f)| target.nearest(&(p + f)).map(|(j, _)| j))
        .collect()
}

/// Target index nearest to each rigidly warped point `R pᵢ + t`.
pub fn update_mapping(
    region: &[Vector3<f64>],
    transform: &RigidTransform,
    target: &NeighborIndex,
) -> Result<Vec<usize>> {
    region
        .iter()
        .map(|p| {
            target
                .nearest(&transform.transform_point(p))
                .map(|(j, _)| j)
        })
        .collect()
}

fn validity(
    forward: &[Vector3<f64>],
    backward_at_match: &[Vector3<f64>],
    warped: impl Iterator<Item = Vector3<f64>>,
    target_at_match: &[Vector3<f64>],
    beta1: f64,
    beta2: f64,
) -> Vec<bool> {
    forward
        .iter()
        .zip(backward_at_match)
        .zip(warped.zip(target_at_match))
        .map(|((f, b), (x, q))| (f + b).norm() < beta1 && (x - q).norm() < beta2)
        .collect()
}

/// Valid iff `‖fᵢ + b_mᵢ‖ < β₁` and `‖pᵢ + fᵢ − q_mᵢ‖ < β₂`.
pub fn init_validity(
    region: &[Vector3<f64>],
    forward: &[Vector3<f64>],
    backward_at_match: &[Vector3<f64>],
    target_at_match: &[Vector3<f64>],
    beta1: f64,
    beta2: f64,
) -> Vec<bool> {
    let warped = region.iter().zip(forward).map(|(p, f)| p + f);
    validity(
        forward,
        backward_at_match,
        warped,
        target_at_match,
        beta1,
        beta2,
    )
}

/// Like [`init_validity`] but the proximity term uses the rigid warp `R pᵢ + t`.
#[allow(clippy::too_many_arguments)]
pub fn update_validity(
    region: &[Vector3<f64>],
    forward: &[Vector3<f64>],
    transform: &RigidTransform,
    backward_at_match: &[Vector3<f64>],
    target_at_match: &[Vector3<f64>],
    beta1: f64,
    beta2: f64,
) -> Vec<bool> {
    let warped = region.iter().map(|p| transform.transform_point(p));
    validity(
        forward,
        backward_at_match,
        warped,
        target_at_match,
        beta1,
        beta2,
    )
}

/// Gaussian kernel `exp(−‖fᵢ + bᵢ‖² / 2θ²)`.
pub fn confidence_scores(
    forward: &[Vector3<f64>],
    backward_at_match: &[Vector3<f64>],
    theta_sq: f64,
) -> Vec<f64> {
    forward
        .iter()
        .zip(backward_at_match)
        .map(|(f, b)| (-(f + b).norm_squared() / (2.0 * theta_sq)).exp())
        .collect()
}

pub fn combine_weights(scores: &[f64], validity: &[bool]) -> Vec<f64> {
    scores
        .iter()
        .zip(validity)
        .map(|(&s, &c)| if c { s } else { 0.0 })
        .collect()
}
