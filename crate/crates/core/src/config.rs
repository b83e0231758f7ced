//! Pipeline parameters, the two shipped profiles, and the `key=value` file format.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RansacConfig {
    /// Maximum point-to-plane distance of an inlier (meters).
    pub distance_threshold: f64,
    pub max_iterations: usize,
}

impl Default for RansacConfig {
    fn default() -> Self {
        Self {
            distance_threshold: 0.2,
            max_iterations: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub supervoxel_count: usize,
    pub iterations: usize,
    /// Forward/backward mismatch threshold (meters).
    pub beta1: f64,
    /// Warped-point to match distance threshold (meters).
    pub beta2: f64,
    /// Gaussian kernel bandwidth θ² (meters²).
    pub theta_sq: f64,
    /// Fix confidence weights and validity to 1.
    pub warmup: bool,
    pub bootstrap_rounds: usize,
    pub seed: u64,
    pub remove_ground: bool,
    pub ransac: RansacConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    SceneFlow,
    Motion,
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scene" => Ok(Profile::SceneFlow),
            "motion" => Ok(Profile::Motion),
            other => Err(Error::InvalidConfig(format!(
                "unknown profile '{other}' (expected 'scene' or 'motion')"
            ))),
        }
    }
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self::scene_flow()
    }
}

impl PipelineConfig {
    /// Dense scene flow: 30 supervoxels, 4 iterations, β = (0.2, 0.1) m, θ² = 0.005.
    pub fn scene_flow() -> Self {
        Self {
            supervoxel_count: 30,
            iterations: 4,
            beta1: 0.2,
            beta2: 0.1,
            theta_sq: 0.005,
            warmup: false,
            bootstrap_rounds: 3,
            seed: 0,
            remove_ground: false,
            ransac: RansacConfig::default(),
        }
    }

    /// Ego-motion-compensated LiDAR motion labels: ground removed, 60
    /// supervoxels, 2 iterations, β = (3.0, 1.0) m, θ² = 0.5.
    pub fn motion() -> Self {
        Self {
            supervoxel_count: 60,
            iterations: 2,
            beta1: 3.0,
            beta2: 1.0,
            theta_sq: 0.5,
            remove_ground: true,
            ..Self::scene_flow()
        }
    }

    pub fn from_profile(profile: Profile) -> Self {
        match profile {
            Profile::SceneFlow => Self::scene_flow(),
            Profile::Motion => Self::motion(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!(
                    "{name} must be positive, got {v}"
                )))
            }
        };
        positive("beta1", self.beta1)?;
        positive("beta2", self.beta2)?;
        positive("theta_sq", self.theta_sq)?;
        positive("ransac_distance_threshold", self.ransac.distance_threshold)?;
        if self.supervoxel_count == 0 {
            return Err(Error::NoRegions);
        }
        if self.iterations == 0 {
            return Err(Error::InvalidConfig("iterations must be ≥ 1".into()));
        }
        if self.ransac.max_iterations == 0 {
            return Err(Error::InvalidConfig(
                "ransac_max_iterations must be ≥ 1".into(),
            ));
        }
        Ok(())
    }

    /// Sets one field by name, as used in config files.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("bad value '{value}' for {key}")))
        }
        match key {
            "supervoxel_count" => self.supervoxel_count = parse(key, value)?,
            "iterations" => self.iterations = parse(key, value)?,
            "beta1" => self.beta1 = parse(key, value)?,
            "beta2" => self.beta2 = parse(key, value)?,
            "theta_sq" => self.theta_sq = parse(key, value)?,
            "warmup" => self.warmup = parse(key, value)?,
            "bootstrap_rounds" => self.bootstrap_rounds = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "remove_ground" => self.remove_ground = parse(key, value)?,
            "ransac_distance_threshold" => self.ransac.distance_threshold = parse(key, value)?,
            "ransac_max_iterations" => self.ransac.max_iterations = parse(key, value)?,
            _ => return Err(Error::InvalidConfig(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Applies `key=value` lines on top of `self`. Blank and `#` lines are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                message: format!("expected key=value, found '{line}'"),
            })?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "supervoxel_count={}", self.supervoxel_count);
        let _ = writeln!(out, "iterations={}", self.iterations);
        let _ = writeln!(out, "beta1={}", self.beta1);
        let _ = writeln!(out, "beta2={}", self.beta2);
        let _ = writeln!(out, "theta_sq={}", self.theta_sq);
        let _ = writeln!(out, "warmup={}", self.warmup);
        let _ = writeln!(out, "bootstrap_rounds={}", self.bootstrap_rounds);
        let _ = writeln!(out, "seed={}", self.seed);
        let _ = writeln!(out, "remove_ground={}", self.remove_ground);
        let _ = writeln!(
            out,
            "ransac_distance_threshold={}",
            self.ransac.distance_threshold
        );
        let _ = writeln!(out, "ransac_max_iterations={}", self.ransac.max_iterations);
        out
    }
}
