//! Value types shared by every stage of the label generator.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

/// Element-wise tolerance used to accept a matrix as a rotation.
pub const ROTATION_TOLERANCE: f64 = 1e-9;

fn is_finite(v: &Vector3<f64>) -> bool {
    v.iter().all(|c| c.is_finite())
}

/// An ordered, non-empty set of finite 3D points in meters.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<Vector3<f64>>,
    frame_id: Option<String>,
}

impl PointCloud {
    pub fn new(points: Vec<Vector3<f64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyCloud);
        }
        if !points.iter().all(is_finite) {
            return Err(Error::NonFinite("point cloud"));
        }
        Ok(Self {
            points,
            frame_id: None,
        })
    }

    pub fn with_frame_id(mut self, frame_id: impl Into<String>) -> Self {
        self.frame_id = Some(frame_id.into());
        self
    }

    pub fn frame_id(&self) -> Option<&str> {
        self.frame_id.as_deref()
    }

    pub fn points(&self) -> &[Vector3<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Always false; kept for clippy's `len_without_is_empty`.
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points at `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        Self::new(indices.iter().map(|&i| self.points[i]).collect())
    }

    pub fn into_points(self) -> Vec<Vector3<f64>> {
        self.points
    }
}

/// Per-point displacement vectors, index-aligned with a [`PointCloud`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FlowField {
    vectors: Vec<Vector3<f64>>,
}

impl FlowField {
    pub fn new(vectors: Vec<Vector3<f64>>) -> Result<Self> {
        if !vectors.iter().all(is_finite) {
            return Err(Error::NonFinite("flow field"));
        }
        Ok(Self { vectors })
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            vectors: vec![Vector3::zeros(); len],
        }
    }

    pub fn vectors(&self) -> &[Vector3<f64>] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            vectors: indices.iter().map(|&i| self.vectors[i]).collect(),
        }
    }

    /// Fails unless the field has exactly `len` vectors.
    pub fn check_len(&self, len: usize) -> Result<()> {
        if self.vectors.len() != len {
            return Err(Error::LengthMismatch {
                expected: len,
                found: self.vectors.len(),
            });
        }
        Ok(())
    }

    pub fn into_vectors(self) -> Vec<Vector3<f64>> {
        self.vectors
    }
}

/// A proper rigid motion `x ↦ R·x + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    rotation: Matrix3<f64>,
    translation: Vector3<f64>,
}

impl RigidTransform {
    /// Rejects anything whose rotation is not in SO(3) within [`ROTATION_TOLERANCE`].
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self> {
        if !rotation.iter().all(|c| c.is_finite()) || !is_finite(&translation) {
            return Err(Error::NonFinite("rigid transform"));
        }
        let gram = rotation.transpose() * rotation;
        let orthonormal = (gram - Matrix3::identity())
            .iter()
            .all(|e| e.abs() <= ROTATION_TOLERANCE);
        if !orthonormal || (rotation.determinant() - 1.0).abs() > ROTATION_TOLERANCE {
            return Err(Error::InvalidRotation);
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn from_translation(translation: Vector3<f64>) -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation,
        }
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vector3<f64> {
        &self.translation
    }

    pub fn transform_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }
}

impl Default for RigidTransform {
    fn default() -> Self {
        Self::identity()
    }
}

/// Assignment of every point of a cloud to one of `region_count` non-empty regions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupervoxelPartition {
    labels: Vec<usize>,
    region_count: usize,
}

impl SupervoxelPartition {
    pub fn new(labels: Vec<usize>, region_count: usize) -> Result<Self> {
        if region_count == 0 {
            return Err(Error::NoRegions);
        }
        let mut sizes = vec![0usize; region_count];
        for &l in &labels {
            if l >= region_count {
                return Err(Error::InvalidPartition(format!(
                    "label {l} not below region count {region_count}"
                )));
            }
            sizes[l] += 1;
        }
        if let Some(empty) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::InvalidPartition(format!("region {empty} is empty")));
        }
        Ok(Self {
            labels,
            region_count,
        })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn region_count(&self) -> usize {
        self.region_count
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Original point indices of every region, in ascending order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut members = vec![Vec::new(); self.region_count];
        for (i, &l) in self.labels.iter().enumerate() {
            members[l].push(i);
        }
        members
    }
}

/// Per-source-point mapping into the target, confidence weight and validity.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConfidenceState {
    pub mapping: Vec<usize>,
    pub weight: Vec<f64>,
    pub validity: Vec<bool>,
}

impl ConfidenceState {
    /// Checks mapping range, weight range and that invalid points carry no weight.
    pub fn check(&self, target_len: usize) -> Result<()> {
        let n = self.mapping.len();
        for len in [self.weight.len(), self.validity.len()] {
            if len != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    found: len,
                });
            }
        }
        if let Some(&m) = self.mapping.iter().find(|&&m| m >= target_len) {
            return Err(Error::InvalidConfig(format!(
                "mapping index {m} out of range for target of {target_len} points"
            )));
        }
        let coupled = self
            .weight
            .iter()
            .zip(&self.validity)
            .all(|(&w, &c)| (0.0..=1.0).contains(&w) && (c || w == 0.0));
        if !coupled {
            return Err(Error::InvalidConfig(
                "weights must lie in [0, 1] and vanish on invalid points".into(),
            ));
        }
        Ok(())
    }
}
