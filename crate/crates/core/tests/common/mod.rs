#![allow(dead_code)]

use nalgebra::{Rotation3, Unit, Vector3};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rigidflow::{FlowField, PointCloud, RigidTransform};

pub type V3 = Vector3<f64>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_points(rng: &mut ChaCha8Rng, n: usize, lo: V3, hi: V3) -> Vec<V3> {
    (0..n)
        .map(|_| {
            V3::new(
                rng.random_range(lo.x..hi.x),
                rng.random_range(lo.y..hi.y),
                rng.random_range(lo.z..hi.z),
            )
        })
        .collect()
}

pub fn unit_cube(rng: &mut ChaCha8Rng, n: usize) -> Vec<V3> {
    uniform_points(rng, n, V3::zeros(), V3::repeat(1.0))
}

pub fn random_axis(rng: &mut ChaCha8Rng) -> Unit<V3> {
    loop {
        let v = V3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return Unit::new_normalize(v);
        }
    }
}

/// Uniform random direction, length uniform in `[0, max_norm]`.
pub fn random_translation(rng: &mut ChaCha8Rng, max_norm: f64) -> V3 {
    random_axis(rng).into_inner() * rng.random_range(0.0..=max_norm)
}

pub fn random_transform(
    rng: &mut ChaCha8Rng,
    max_angle_deg: f64,
    max_translation: f64,
) -> RigidTransform {
    let angle = rng.random_range(0.0..=max_angle_deg).to_radians();
    let rotation = Rotation3::from_axis_angle(&random_axis(rng), angle);
    RigidTransform::new(*rotation.matrix(), random_translation(rng, max_translation)).unwrap()
}

pub fn transform_with(angle_deg: f64, axis: V3, translation: V3) -> RigidTransform {
    let rotation = Rotation3::from_axis_angle(&Unit::new_normalize(axis), angle_deg.to_radians());
    RigidTransform::new(*rotation.matrix(), translation).unwrap()
}

pub fn cloud(points: Vec<V3>) -> PointCloud {
    PointCloud::new(points).unwrap()
}

pub fn flow(vectors: Vec<V3>) -> FlowField {
    FlowField::new(vectors).unwrap()
}

/// Linear-scan nearest neighbour; lowest index wins ties.
pub fn brute_force_nearest(points: &[V3], q: &V3) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, p) in points.iter().enumerate() {
        let d = (q.x - p.x).powi(2) + (q.y - p.y).powi(2) + (q.z - p.z).powi(2);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

pub fn rotation_error(a: &RigidTransform, b: &RigidTransform) -> f64 {
    (a.rotation() - b.rotation()).norm()
}

pub fn translation_error(a: &RigidTransform, b: &RigidTransform) -> f64 {
    (a.translation() - b.translation()).norm()
}

/// A rigid body and its image: `Q = T·P` index-aligned, with exact flows.
pub struct RigidPair {
    pub source: PointCloud,
    pub target: PointCloud,
    pub truth: RigidTransform,
    pub forward: Vec<V3>,
}

pub fn rigid_pair(rng: &mut ChaCha8Rng, n: usize, extent: V3, truth: RigidTransform) -> RigidPair {
    let src = uniform_points(rng, n, V3::zeros(), extent);
    let dst: Vec<V3> = src.iter().map(|p| truth.transform_point(p)).collect();
    let forward = src.iter().zip(&dst).map(|(p, q)| q - p).collect();
    RigidPair {
        source: cloud(src),
        target: cloud(dst),
        truth,
        forward,
    }
}

/// Three sparse parts translated by (1,0,0), (0,1,0) and (−0.5,0,0.5).
pub struct PiecewiseScene {
    pub source: PointCloud,
    pub target: PointCloud,
    pub truth: Vec<V3>,
}

pub const PART_MOTIONS: [[f64; 3]; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [-0.5, 0.0, 0.5]];

pub fn piecewise_scene(seed: u64, points_per_part: usize) -> PiecewiseScene {
    let mut rng = rng(seed);
    let extent = V3::new(10.0, 10.0, 4.0);
    let gap = 4.0;
    let (mut src, mut dst, mut truth) = (Vec::new(), Vec::new(), Vec::new());
    for (k, m) in PART_MOTIONS.iter().enumerate() {
        let origin = V3::new(k as f64 * (extent.x + gap), 0.0, 0.0);
        let motion = V3::from(*m);
        for p in uniform_points(&mut rng, points_per_part, origin, origin + extent) {
            src.push(p);
            dst.push(p + motion);
            truth.push(motion);
        }
    }
    PiecewiseScene {
        source: cloud(src),
        target: cloud(dst),
        truth,
    }
}
