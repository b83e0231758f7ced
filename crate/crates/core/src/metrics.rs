//! End-point error and threshold accuracy metrics for scene flow.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::FlowField;

/// Pairwise summation over a fixed split order; deterministic for a given input.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let (a, b) = values.split_at(values.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowMetrics {
    pub epe_full: f64,
    pub epe: f64,
    #[serde(rename = "as")]
    pub as_pct: f64,
    #[serde(rename = "ar")]
    pub ar_pct: f64,
    #[serde(rename = "out")]
    pub out_pct: f64,
    /// Number of non-occluded points behind `epe`, `as`, `ar` and `out`.
    #[serde(rename = "n")]
    pub evaluated_points: usize,
}

impl FlowMetrics {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("metrics serialize")
    }
}

/// Threshold classes of a single point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PointClass {
    pub strict: bool,
    pub relaxed: bool,
    pub outlier: bool,
}

/// Classifies one estimate. Against zero motion the relative error is
/// undefined and only the absolute thresholds apply.
pub fn classify(epe: f64, truth_norm: f64) -> PointClass {
    let rel = (truth_norm > 0.0).then(|| epe / truth_norm);
    PointClass {
        strict: epe < 0.05 || rel.is_some_and(|r| r < 0.05),
        relaxed: epe < 0.1 || rel.is_some_and(|r| r < 0.1),
        outlier: epe > 0.3 || rel.is_some_and(|r| r > 0.1),
    }
}

/// `occluded[i] == true` excludes point `i` from everything but `epe_full`.
pub fn evaluate(
    flow: &FlowField,
    truth: &FlowField,
    occluded: Option<&[bool]>,
) -> Result<FlowMetrics> {
    truth.check_len(flow.len())?;
    if let Some(mask) = occluded {
        if mask.len() != flow.len() {
            return Err(Error::LengthMismatch {
                expected: flow.len(),
                found: mask.len(),
            });
        }
    }

    let errors: Vec<f64> = flow
        .vectors()
        .iter()
        .zip(truth.vectors())
        .map(|(f, d)| (f - d).norm())
        .collect();
    let mean = |v: &[f64]| {
        if v.is_empty() {
            0.0
        } else {
            pairwise_sum(v) / v.len() as f64
        }
    };
    let epe_full = mean(&errors);

    let visible: Vec<usize> = (0..flow.len())
        .filter(|&i| occluded.is_none_or(|m| !m[i]))
        .collect();
    let visible_errors: Vec<f64> = visible.iter().map(|&i| errors[i]).collect();

    let (mut strict, mut relaxed, mut outlier) = (0usize, 0usize, 0usize);
    for &i in &visible {
        let c = classify(errors[i], truth.vectors()[i].norm());
        strict += c.strict as usize;
        relaxed += c.relaxed as usize;
        outlier += c.outlier as usize;
    }
    let n = visible.len();
    let pct = |count: usize| {
        if n == 0 {
            0.0
        } else {
            100.0 * count as f64 / n as f64
        }
    };

    Ok(FlowMetrics {
        epe_full,
        epe: mean(&visible_errors),
        as_pct: pct(strict),
        ar_pct: pct(relaxed),
        out_pct: pct(outlier),
        evaluated_points: n,
    })
}
