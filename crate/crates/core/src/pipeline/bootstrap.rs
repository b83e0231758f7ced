use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::types::{FlowField, PointCloud};

use super::{generate_pseudo_labels, PseudoLabelResult};

#[derive(Debug, Clone)]
pub struct BootstrapResult {
    pub flow: FlowField,
    pub validity: Vec<bool>,
    /// Last forward run, for diagnostics.
    pub last: PseudoLabelResult,
}

/// Network-free flow estimate: iterate the label generator on its own output.
///
/// Round 0 starts from zero flow with weights and validity fixed to 1. Each
/// later round feeds the previous forward labels as the forward flow and the
/// labels of a role-swapped (target → source) run as the backward flow.
pub fn bootstrap_flow(
    source: &PointCloud,
    target: &PointCloud,
    cfg: &PipelineConfig,
) -> Result<BootstrapResult> {
    if cfg.bootstrap_rounds == 0 {
        return Err(Error::InvalidConfig("bootstrap_rounds must be ≥ 1".into()));
    }
    let rounds = cfg.bootstrap_rounds;
    let warm = PipelineConfig {
        warmup: true,
        ..cfg.clone()
    };
    let refine = PipelineConfig {
        warmup: false,
        ..cfg.clone()
    };

    let zero_fwd = FlowField::zeros(source.len());
    let zero_bwd = FlowField::zeros(target.len());
    let mut forward = generate_pseudo_labels(source, target, &zero_fwd, &zero_bwd, &warm)?;
    let mut backward = if rounds > 1 {
        Some(generate_pseudo_labels(
            target, source, &zero_bwd, &zero_fwd, &warm,
        )?)
    } else {
        None
    };

    for round in 1..rounds {
        let prev_bwd = backward
            .take()
            .expect("backward run precedes every refinement");
        let next_fwd =
            generate_pseudo_labels(source, target, &forward.labels, &prev_bwd.labels, &refine)?;
        if round + 1 < rounds {
            backward = Some(generate_pseudo_labels(
                target,
                source,
                &prev_bwd.labels,
                &forward.labels,
                &refine,
            )?);
        }
        forward = next_fwd;
    }

    Ok(BootstrapResult {
        flow: forward.labels.clone(),
        validity: forward.validity.clone(),
        last: forward,
    })
}
