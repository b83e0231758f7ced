//! RANSAC ground plane estimation.

use nalgebra::{Matrix3, Vector3};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::RansacConfig;
use crate::error::{Error, Result};
use crate::types::PointCloud;

/// Plane `n·p + d = 0` with unit normal, plus the points within threshold of it.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundModel {
    pub normal: Vector3<f64>,
    pub offset: f64,
    pub inliers: Vec<bool>,
}

impl GroundModel {
    pub fn distance(&self, p: &Vector3<f64>) -> f64 {
        self.normal.dot(p) + self.offset
    }

    pub fn inlier_count(&self) -> usize {
        self.inliers.iter().filter(|&&i| i).count()
    }
}

fn inlier_mask(
    points: &[Vector3<f64>],
    normal: &Vector3<f64>,
    offset: f64,
    threshold: f64,
) -> Vec<bool> {
    points
        .iter()
        .map(|p| (normal.dot(p) + offset).abs() <= threshold)
        .collect()
}

/// Sign convention: the largest-magnitude component of the normal is positive.
fn orient(normal: Vector3<f64>) -> Vector3<f64> {
    if normal[normal.iamax()] < 0.0 {
        -normal
    } else {
        normal
    }
}

/// Total least-squares plane through `points`.
fn refit(points: &[Vector3<f64>]) -> Option<(Vector3<f64>, f64)> {
    let n = points.len() as f64;
    let centroid = points.iter().fold(Vector3::zeros(), |a, p| a + p) / n;
    let scatter = points.iter().fold(Matrix3::zeros(), |a, p| {
        let d = p - centroid;
        a + d * d.transpose()
    });
    let eig = scatter.symmetric_eigen();
    let normal = eig.eigenvectors.column(eig.eigenvalues.imin()).into_owned();
    let norm = normal.norm();
    if norm.is_nan() || norm <= 0.0 {
        return None;
    }
    let normal = orient(normal / norm);
    Some((normal, -normal.dot(&centroid)))
}

/// RANSAC over 3-point samples drawn from a generator seeded with `seed`.
///
/// The sample with the most inliers wins (first found on ties), and its
/// inliers are refit by least squares.
pub fn fit_ground_plane(
    cloud: &PointCloud,
    ransac: &RansacConfig,
    seed: u64,
) -> Result<GroundModel> {
    let points = cloud.points();
    if points.len() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            found: points.len(),
        });
    }
    let threshold = ransac.distance_threshold;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(usize, Vec<bool>)> = None;

    for _ in 0..ransac.max_iterations {
        let idx = sample(&mut rng, points.len(), 3);
        let (a, b, c) = (
            points[idx.index(0)],
            points[idx.index(1)],
            points[idx.index(2)],
        );
        let cross = (b - a).cross(&(c - a));
        let norm = cross.norm();
        if norm <= 1e-12 {
            continue;
        }
        let normal = cross / norm;
        let mask = inlier_mask(points, &normal, -normal.dot(&a), threshold);
        let count = mask.iter().filter(|&&m| m).count();
        if best.as_ref().is_none_or(|(c, _)| count > *c) {
            best = Some((count, mask));
        }
    }

    let (_, mask) = best.ok_or(Error::DegeneratePlane)?;
    let support: Vec<Vector3<f64>> = points
        .iter()
        .zip(&mask)
        .filter_map(|(p, &m)| m.then_some(*p))
        .collect();
    let (normal, offset) = refit(&support).ok_or(Error::DegeneratePlane)?;
    Ok(GroundModel {
        normal,
        offset,
        inliers: inlier_mask(points, &normal, offset, threshold),
    })
}
