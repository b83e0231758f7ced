//! Confidence-aware piecewise rigid pseudo-label generation.
//!
//! The source cloud is split into supervoxels and each supervoxel is
//! registered to the whole target independently. Per region, the loop
//! alternates confidence weighting, a weighted rigid fit, nearest-neighbour
//! remapping, and a validity update. Labels are the rigid flow of each
//! region's final transform.

mod bootstrap;
mod ground;

use std::io::Write;

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::Serialize;

pub use bootstrap::{bootstrap_flow, BootstrapResult};
pub use ground::{fit_ground_plane, GroundModel};

use crate::confidence::{
    combine_weights, confidence_scores, init_mapping, init_validity, update_mapping,
    update_validity,
};
use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::nn::NeighborIndex;
use crate::oversegment::segment;
use crate::rigid_align::{rigid_flow, weighted_kabsch, CorrespondenceSet};
use crate::types::{ConfidenceState, FlowField, PointCloud, RigidTransform, SupervoxelPartition};

/// One region's diagnostics after a transform update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceEntry {
    pub region: usize,
    pub iter: usize,
    /// Weighted residual of the new transform against the mapping it was fit to.
    pub objective: f64,
    /// Same transform and weights, evaluated after the mapping update.
    #[serde(skip)]
    pub remapped_objective: f64,
    pub active_points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PseudoLabelResult {
    pub labels: FlowField,
    pub validity: Vec<bool>,
    /// One transform per region, indexed like `partition`.
    pub transforms: Vec<RigidTransform>,
    pub partition: SupervoxelPartition,
    /// Final mapping, weight and validity per source point.
    pub state: ConfidenceState,
    pub objective_trace: Vec<Vec<TraceEntry>>,
    /// Set when ground removal ran; ground points form the last region.
    pub ground: Option<GroundModel>,
}

impl PseudoLabelResult {
    /// Writes the trace as JSON lines `{region, iter, objective, active_points}`.
    pub fn write_trace<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for entry in self.objective_trace.iter().flatten() {
            serde_json::to_writer(&mut out, entry)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

struct RegionOutcome {
    transform: RigidTransform,
    mapping: Vec<usize>,
    weight: Vec<f64>,
    validity: Vec<bool>,
    trace: Vec<TraceEntry>,
}

fn gather(values: &[Vector3<f64>], mapping: &[usize]) -> Vec<Vector3<f64>> {
    mapping.iter().map(|&j| values[j]).collect()
}

fn weighted_residual(
    points: &[Vector3<f64>],
    matches: &[Vector3<f64>],
    weights: &[f64],
    transform: &RigidTransform,
) -> f64 {
    CorrespondenceSet {
        src: points,
        dst: matches,
        weights,
    }
    .objective(transform)
}

/// Registers one supervoxel against the full target.
fn solve_region(
    region: usize,
    points: &[Vector3<f64>],
    forward: &[Vector3<f64>],
    target: &NeighborIndex,
    backward: &[Vector3<f64>],
    cfg: &PipelineConfig,
) -> Result<RegionOutcome> {
    let n = points.len();
    let target_points = target.points();
    let mut mapping = init_mapping(points, forward, target)?;
    let mut validity = if cfg.warmup {
        vec![true; n]
    } else {
        init_validity(
            points,
            forward,
            &gather(backward, &mapping),
            &gather(target_points, &mapping),
            cfg.beta1,
            cfg.beta2,
        )
    };
    let mut transform = RigidTransform::identity();
    let mut trace = Vec::with_capacity(cfg.iterations);
    let mut starved = false;

    for iter in 0..cfg.iterations {
        let matches = gather(target_points, &mapping);
        let weights = if cfg.warmup {
            vec![1.0; n]
        } else {
            let scores = confidence_scores(forward, &gather(backward, &mapping), cfg.theta_sq);
            combine_weights(&scores, &validity)
        };
        let correspondences = CorrespondenceSet::new(points, &matches, &weights)?;
        transform = match weighted_kabsch(&correspondences) {
            Ok(t) => t,
            Err(Error::ZeroWeight) => {
                // No support left: keep the previous estimate, invalidate the region.
                starved = true;
                break;
            }
            Err(e) => return Err(e),
        };
        let objective = correspondences.objective(&transform);
        let active_points = weights
            .iter()
            .filter(|&&w| w >= crate::rigid_align::WEIGHT_FLOOR)
            .count();

        mapping = update_mapping(points, &transform, target)?;
        let matches = gather(target_points, &mapping);
        let remapped_objective = weighted_residual(points, &matches, &weights, &transform);
        if !cfg.warmup {
            validity = update_validity(
                points,
                forward,
                &transform,
                &gather(backward, &mapping),
                &matches,
                cfg.beta1,
                cfg.beta2,
            );
        }
        trace.push(TraceEntry {
            region,
            iter,
            objective,
            remapped_objective,
            active_points,
        });
    }

    let weight = if starved {
        validity = vec![false; n];
        vec![0.0; n]
    } else if cfg.warmup {
        vec![1.0; n]
    } else {
        let scores = confidence_scores(forward, &gather(backward, &mapping), cfg.theta_sq);
        combine_weights(&scores, &validity)
    };

    Ok(RegionOutcome {
        transform,
        mapping,
        weight,
        validity,
        trace,
    })
}

/// Piecewise rigid labels and validity for `source` given predicted flows.
///
/// `forward` is aligned with `source` and `backward` with `target`.
pub fn generate_pseudo_labels(
    source: &PointCloud,
    target: &PointCloud,
    forward: &FlowField,
    backward: &FlowField,
    cfg: &PipelineConfig,
) -> Result<PseudoLabelResult> {
    cfg.validate()?;
    forward.check_len(source.len())?;
    backward.check_len(target.len())?;
    if cfg.remove_ground {
        return generate_without_ground(source, target, forward, backward, cfg);
    }
    let index = NeighborIndex::build(target);
    label_regions(source, &index, forward, backward, cfg)
}

fn label_regions(
    source: &PointCloud,
    target: &NeighborIndex,
    forward: &FlowField,
    backward: &FlowField,
    cfg: &PipelineConfig,
) -> Result<PseudoLabelResult> {
    let partition = segment(source, cfg.supervoxel_count, cfg.seed)?;
    let members = partition.members();

    let outcomes = members
        .par_iter()
        .enumerate()
        .map(|(k, idx)| {
            let points: Vec<_> = idx.iter().map(|&i| source.points()[i]).collect();
            let flow: Vec<_> = idx.iter().map(|&i| forward.vectors()[i]).collect();
            solve_region(k, &points, &flow, target, backward.vectors(), cfg)
        })
        .collect::<Result<Vec<_>>>()?;

    let n = source.len();
    let mut labels = vec![Vector3::zeros(); n];
    let mut state = ConfidenceState {
        mapping: vec![0; n],
        weight: vec![0.0; n],
        validity: vec![false; n],
    };
    let mut transforms = Vec::with_capacity(outcomes.len());
    let mut objective_trace = Vec::with_capacity(outcomes.len());
    for (idx, outcome) in members.iter().zip(outcomes) {
        let points: Vec<_> = idx.iter().map(|&i| source.points()[i]).collect();
        let flow = rigid_flow(&outcome.transform, &points);
        for (slot, &i) in idx.iter().enumerate() {
            labels[i] = flow.vectors()[slot];
            state.mapping[i] = outcome.mapping[slot];
            state.weight[i] = outcome.weight[slot];
            state.validity[i] = outcome.validity[slot];
        }
        transforms.push(outcome.transform);
        objective_trace.push(outcome.trace);
    }

    Ok(PseudoLabelResult {
        labels: FlowField::new(labels)?,
        validity: state.validity.clone(),
        transforms,
        partition,
        state,
        objective_trace,
        ground: None,
    })
}

/// Ground points of the source get zero flow and full validity; the rest is
/// labelled against the non-ground part of the target.
fn generate_without_ground(
    source: &PointCloud,
    target: &PointCloud,
    forward: &FlowField,
    backward: &FlowField,
    cfg: &PipelineConfig,
) -> Result<PseudoLabelResult> {
    let source_ground = fit_ground_plane(source, &cfg.ransac, cfg.seed)?;
    let target_ground = fit_ground_plane(target, &cfg.ransac, cfg.seed)?;
    let keep = |mask: &[bool]| -> Vec<usize> {
        mask.iter()
            .enumerate()
            .filter_map(|(i, &g)| (!g).then_some(i))
            .collect()
    };
    let src_keep = keep(&source_ground.inliers);
    let mut tgt_keep = keep(&target_ground.inliers);
    if tgt_keep.is_empty() {
        tgt_keep = (0..target.len()).collect();
    }

    let full_index = NeighborIndex::build(target);
    let n = source.len();
    let ground_idx: Vec<usize> = (0..n).filter(|&i| source_ground.inliers[i]).collect();
    let ground_mapping = ground_idx
        .iter()
        .map(|&i| full_index.nearest(&source.points()[i]).map(|(j, _)| j))
        .collect::<Result<Vec<_>>>()?;

    let mut labels = vec![Vector3::zeros(); n];
    let mut state = ConfidenceState {
        mapping: vec![0; n],
        weight: vec![1.0; n],
        validity: vec![true; n],
    };
    for (&i, &j) in ground_idx.iter().zip(&ground_mapping) {
        state.mapping[i] = j;
    }

    let (mut transforms, mut objective_trace, mut region_labels) =
        (Vec::new(), Vec::new(), vec![0; n]);
    if !src_keep.is_empty() {
        let sub_source = source.select(&src_keep)?;
        let sub_target = target.select(&tgt_keep)?;
        let inner = label_regions(
            &sub_source,
            &NeighborIndex::build(&sub_target),
            &forward.select(&src_keep),
            &backward.select(&tgt_keep),
            cfg,
        )?;
        for (slot, &i) in src_keep.iter().enumerate() {
            labels[i] = inner.labels.vectors()[slot];
            state.mapping[i] = tgt_keep[inner.state.mapping[slot]];
            state.weight[i] = inner.state.weight[slot];
            state.validity[i] = inner.state.validity[slot];
            region_labels[i] = inner.partition.labels()[slot];
        }
        transforms = inner.transforms;
        objective_trace = inner.objective_trace;
    }

    let mut region_count = transforms.len();
    if !ground_idx.is_empty() {
        for &i in &ground_idx {
            region_labels[i] = region_count;
        }
        region_count += 1;
        transforms.push(RigidTransform::identity());
        objective_trace.push(Vec::new());
    }

    Ok(PseudoLabelResult {
        labels: FlowField::new(labels)?,
        validity: state.validity.clone(),
        transforms,
        partition: SupervoxelPartition::new(region_labels, region_count)?,
        state,
        objective_trace,
        ground: Some(source_ground),
    })
}

/// Mean end-point error over points with `mask[i]`, or 0 when none are set.
pub fn masked_flow_loss(flow: &FlowField, labels: &FlowField, mask: &[bool]) -> Result<f64> {
    labels.check_len(flow.len())?;
    if mask.len() != flow.len() {
        return Err(Error::LengthMismatch {
            expected: flow.len(),
            found: mask.len(),
        });
    }
    let mut total = 0.0;
    let mut count = 0usize;
    for ((f, d), &c) in flow.vectors().iter().zip(labels.vectors()).zip(mask) {
        if c {
            total += (f - d).norm();
            count += 1;
        }
    }
    Ok(if count == 0 {
        0.0
    } else {
        total / count as f64
    })
}
