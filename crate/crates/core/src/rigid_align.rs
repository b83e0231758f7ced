//! Closed-form weighted rigid alignment and rigid flow synthesis.

use nalgebra::{Matrix3, Vector3, SVD};

use crate::error::{Error, Result};
use crate::types::{FlowField, PointCloud, RigidTransform};

/// Weights below this are treated as exactly zero.
pub const WEIGHT_FLOOR: f64 = 1e-12;

/// Support whose second principal variance falls below this fraction of the
/// first is treated as collinear.
const COLLINEAR_RATIO: f64 = 1e-12;

/// Index-aligned source/target pairs with per-pair weights in `[0, 1]`.
#[derive(Debug, Clone, Copy)]
pub struct CorrespondenceSet<'a> {
    pub src: &'a [Vector3<f64>],
    pub dst: &'a [Vector3<f64>],
    pub weights: &'a [f64],
}

impl<'a> CorrespondenceSet<'a> {
    pub fn new(
        src: &'a [Vector3<f64>],
        dst: &'a [Vector3<f64>],
        weights: &'a [f64],
    ) -> Result<Self> {
        for len in [dst.len(), weights.len()] {
            if len != src.len() {
                return Err(Error::LengthMismatch {
                    expected: src.len(),
                    found: len,
                });
            }
        }
        Ok(Self { src, dst, weights })
    }

    /// Pairs whose weight survives [`WEIGHT_FLOOR`].
    fn active(&self) -> impl Iterator<Item = (&Vector3<f64>, &Vector3<f64>, f64)> + '_ {
        self.src
            .iter()
            .zip(self.dst)
            .zip(self.weights)
            .filter(|(_, &w)| w >= WEIGHT_FLOOR)
            .map(|((p, q), &w)| (p, q, w))
    }

    /// `Σ wᵢ ‖R pᵢ + t − qᵢ‖²`.
    pub fn objective(&self, transform: &RigidTransform) -> f64 {
        self.active()
            .map(|(p, q, w)| w * (transform.transform_point(p) - q).norm_squared())
            .sum()
    }
}

/// Weighted means of the source and target points.
pub fn weighted_centroids(c: &CorrespondenceSet<'_>) -> Result<(Vector3<f64>, Vector3<f64>)> {
    let mut total = 0.0;
    let mut sp = Vector3::zeros();
    let mut sq = Vector3::zeros();
    for (p, q, w) in c.active() {
        total += w;
        sp += p * w;
        sq += q * w;
    }
    if total == 0.0 {
        return Err(Error::ZeroWeight);
    }
    Ok((sp / total, sq / total))
}

/// Rigid transform minimising the weighted squared residual.
///
/// Falls back to a translation-only fit (R = I) when fewer than three pairs
/// carry weight or the weighted source support is collinear.
pub fn weighted_kabsch(c: &CorrespondenceSet<'_>) -> Result<RigidTransform> {
    let (p_bar, q_bar) = weighted_centroids(c)?;

    let mut h = Matrix3::zeros();
    let mut spread = Matrix3::zeros();
    let mut support = 0usize;
    for (p, q, w) in c.active() {
        let dp = p - p_bar;
        let dq = q - q_bar;
        h += (dp * w) * dq.transpose();
        spread += (dp * w) * dp.transpose();
        support += 1;
    }
    if !h.iter().all(|v| v.is_finite()) {
        return Err(Error::SvdFailed);
    }

    if support < 3 || is_collinear(&spread) {
        return Ok(RigidTransform::from_translation(q_bar - p_bar));
    }

    let svd = SVD::new(h, true, true);
    let u = svd.u.ok_or(Error::SvdFailed)?;
    let v = svd.v_t.ok_or(Error::SvdFailed)?.transpose();
    // Singular values come back in descending order; the sign fix goes on the smallest.
    let d = (v * u.transpose()).determinant().signum();
    let rotation = v * Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, d)) * u.transpose();
    let translation = q_bar - rotation * p_bar;
    RigidTransform::new(rotation, translation)
}

fn is_collinear(spread: &Matrix3<f64>) -> bool {
    let mut eig: Vec<f64> = spread.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    eig[0] <= 0.0 || eig[1] <= COLLINEAR_RATIO * eig[0]
}

pub fn apply_transform(transform: &RigidTransform, cloud: &PointCloud) -> PointCloud {
    let moved = cloud
        .points()
        .iter()
        .map(|p| transform.transform_point(p))
        .collect();
    PointCloud::new(moved).expect("rigid motion of a finite cloud stays finite")
}

/// Per-point displacement `R pᵢ + t − pᵢ`.
pub fn rigid_flow(transform: &RigidTransform, region: &[Vector3<f64>]) -> FlowField {
    let vectors = region
        .iter()
        .map(|p| transform.transform_point(p) - p)
        .collect();
    FlowField::new(vectors).expect("rigid motion of a finite cloud stays finite")
}
