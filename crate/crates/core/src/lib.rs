//! Scene flow pseudo-labels from confidence-aware piecewise rigid registration.
//!
//! The source cloud is cut into supervoxels, each supervoxel is registered
//! rigidly to the target with weights derived from forward/backward flow
//! consistency, and the resulting rigid flows form the labels together with
//! a binary validity mask.

pub mod cli;
pub mod confidence;
pub mod config;
pub mod error;
pub mod io;
pub mod metrics;
pub mod nn;
pub mod oversegment;
pub mod pipeline;
pub mod rigid_align;
pub mod types;

pub use config::{PipelineConfig, Profile, RansacConfig};
pub use error::{Error, Result};
pub use pipeline::{
    bootstrap_flow, fit_ground_plane, generate_pseudo_labels, masked_flow_loss, BootstrapResult,
    GroundModel, PseudoLabelResult, TraceEntry,
};
pub use types::{ConfidenceState, FlowField, PointCloud, RigidTransform, SupervoxelPartition};
