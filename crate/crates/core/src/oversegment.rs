//! Supervoxel decomposition of a cloud into spatially compact regions.
//!
//! Seeds come from farthest-point sampling starting at point 0, then Lloyd
//! iterations of Euclidean k-means refine them. Any region left empty is
//! refilled by moving the farthest member out of the largest region.

use nalgebra::Vector3;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::nn::squared_distance;
use crate::types::{PointCloud, SupervoxelPartition};

pub const MAX_LLOYD_ITERATIONS: usize = 50;
/// Lloyd stops once no centroid moves farther than this (meters).
pub const CENTROID_SHIFT_TOLERANCE: f64 = 1e-6;

/// Splits `cloud` into `regions` non-empty supervoxels.
///
/// The result depends only on the geometry: `seed` is accepted so callers
/// can thread one configuration value through, but seeding is deterministic.
pub fn segment(cloud: &PointCloud, regions: usize, _seed: u64) -> Result<SupervoxelPartition> {
    let points = cloud.points();
    if regions == 0 {
        return Err(Error::NoRegions);
    }
    if regions > points.len() {
        return Err(Error::TooManyRegions {
            regions,
            points: points.len(),
        });
    }

    let mut centroids: Vec<Vector3<f64>> = farthest_point_seeds(points, regions)
        .into_iter()
        .map(|i| points[i])
        .collect();
    let mut labels = assign(points, &centroids);

    for _ in 0..MAX_LLOYD_ITERATIONS {
        let updated = update_centroids(points, &labels, &centroids);
        let shift = centroids
            .iter()
            .zip(&updated)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        centroids = updated;
        labels = assign(points, &centroids);
        if shift < CENTROID_SHIFT_TOLERANCE {
            break;
        }
    }

    repair_empty(points, &mut labels, regions);
    SupervoxelPartition::new(labels, regions)
}

/// Indices of `k` seeds by farthest-point sampling, first seed at index 0.
/// Ties go to the lowest unchosen index.
pub fn farthest_point_seeds(points: &[Vector3<f64>], k: usize) -> Vec<usize> {
    let mut chosen = vec![false; points.len()];
    let mut seeds = Vec::with_capacity(k);
    let mut min_dist = vec![f64::INFINITY; points.len()];
    let mut next = 0usize;
    while seeds.len() < k {
        seeds.push(next);
        chosen[next] = true;
        let seed = points[next];
        let mut best: Option<(usize, f64)> = None;
        for (i, p) in points.iter().enumerate() {
            let d = squared_distance(p, &seed);
            if d < min_dist[i] {
                min_dist[i] = d;
            }
            if !chosen[i] && best.is_none_or(|(_, bd)| min_dist[i] > bd) {
                best = Some((i, min_dist[i]));
            }
        }
        match best {
            Some((i, _)) => next = i,
            None => break,
        }
    }
    seeds
}

fn nearest_centroid(p: &Vector3<f64>, centroids: &[Vector3<f64>]) -> usize {
    let mut best = (0usize, f64::INFINITY);
    for (c, centroid) in centroids.iter().enumerate() {
        let d = squared_distance(p, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best.0
}

fn assign(points: &[Vector3<f64>], centroids: &[Vector3<f64>]) -> Vec<usize> {
    points
        .par_iter()
        .map(|p| nearest_centroid(p, centroids))
        .collect()
}

/// Member means; a region with no members keeps its previous centroid.
fn update_centroids(
    points: &[Vector3<f64>],
    labels: &[usize],
    previous: &[Vector3<f64>],
) -> Vec<Vector3<f64>> {
    let mut sums = vec![Vector3::zeros(); previous.len()];
    let mut counts = vec![0usize; previous.len()];
    for (p, &l) in points.iter().zip(labels) {
        sums[l] += p;
        counts[l] += 1;
    }
    sums.into_iter()
        .zip(counts)
        .zip(previous)
        .map(|((s, n), prev)| if n == 0 { *prev } else { s / n as f64 })
        .collect()
}

fn repair_empty(points: &[Vector3<f64>], labels: &mut [usize], regions: usize) {
    loop {
        let mut sizes = vec![0usize; regions];
        for &l in labels.iter() {
            sizes[l] += 1;
        }
        let Some(empty) = sizes.iter().position(|&s| s == 0) else {
            return;
        };
        // max_by_key returns the last maximum; reverse to prefer the lowest index.
        let largest = (0..regions)
            .rev()
            .max_by_key(|&r| sizes[r])
            .expect("at least one region");

        let members: Vec<usize> = (0..points.len())
            .filter(|&i| labels[i] == largest)
            .collect();
        let centroid = members
            .iter()
            .fold(Vector3::zeros(), |acc, &i| acc + points[i])
            / members.len() as f64;
        let mut farthest = (members[0], f64::NEG_INFINITY);
        for &i in &members {
            let d = squared_distance(&points[i], &centroid);
            if d > farthest.1 {
                farthest = (i, d);
            }
        }
        labels[farthest.0] = empty;
    }
}

/// Points of region `k` and their positions in the original cloud.
pub fn region_points(
    cloud: &PointCloud,
    partition: &SupervoxelPartition,
    k: usize,
) -> Result<(PointCloud, Vec<usize>)> {
    if k >= partition.region_count() {
        return Err(Error::RegionOutOfRange {
            region: k,
            count: partition.region_count(),
        });
    }
    if partition.len() != cloud.len() {
        return Err(Error::LengthMismatch {
            expected: cloud.len(),
            found: partition.len(),
        });
    }
    let indices: Vec<usize> = partition
        .labels()
        .iter()
        .enumerate()
        .filter_map(|(i, &l)| (l == k).then_some(i))
        .collect();
    Ok((cloud.select(&indices)?, indices))
}
