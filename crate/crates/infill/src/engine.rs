//! End-to-end program execution: keyframe edits followed by infilling.

use std::sync::Arc;

use meo_core::keyframe::{execute_meo_keyframes, EditConfig, ResolvedFrame};
use meo_core::lang::MeoProgram;
use meo_core::{Joint, MotionClip};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::denoiser::{Denoiser, SmoothingOracleDenoiser};
use crate::generative::{generative_infill, InfillCondition};
use crate::schedule::DiffusionSchedule;
use crate::spline::{spline_infill, ContextWindow};
use crate::trajectory::{SplineTrajectoryInfiller, TrajectoryInfiller};
use crate::InfillError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EngineVariant {
    /// Spline infill only.
    #[serde(rename = "interp")]
    Interp,
    /// Root trajectory infill, then generative body infill.
    #[serde(rename = "eng")]
    Eng,
    /// Generative infill of everything, no separate trajectory stage.
    #[serde(rename = "eng-ss")]
    EngSingleStage,
}

impl EngineVariant {
    pub const ALL: [EngineVariant; 3] = [Self::Interp, Self::Eng, Self::EngSingleStage];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Interp => "interp",
            Self::Eng => "eng",
            Self::EngSingleStage => "eng-ss",
        }
    }
}

impl std::str::FromStr for EngineVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|v| v.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown engine `{s}` (expected interp, eng or eng-ss)"))
    }
}

impl std::fmt::Display for EngineVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuidanceMode {
    /// On unless some MEO constrains the waist.
    #[default]
    Auto,
    On,
    Off,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineConfig {
    pub variant: EngineVariant,
    pub window: usize,
    pub seed: u64,
    pub guidance: GuidanceMode,
    pub edit: EditConfig,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self { variant: EngineVariant::Interp, window: 5, seed: 0, guidance: GuidanceMode::Auto, edit: EditConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyReport {
    pub frame_index: usize,
    pub touched_joints: Vec<Joint>,
    pub residual: Option<f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineReport {
    pub variant: EngineVariant,
    pub denoiser: Option<String>,
    pub resolved: Vec<ResolvedFrame>,
    pub keyframes: Vec<KeyReport>,
    pub context: (usize, usize),
    pub guidance: bool,
    pub seed: u64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct EngineOutput {
    pub clip: MotionClip,
    /// X_spline for the same keys, computed for every variant.
    pub spline: MotionClip,
    /// The source with whole-clip edits applied.
    pub base: MotionClip,
    pub keyframes: Vec<meo_core::keyframe::EditedKeyframe>,
    pub window: ContextWindow,
    pub report: EngineReport,
}

/// Keyframe editing plus infilling with a chosen denoiser.
#[derive(Clone)]
pub struct Engine {
    pub denoiser: Arc<dyn Denoiser>,
    pub schedule: DiffusionSchedule,
    pub trajectory: Arc<dyn TrajectoryInfiller>,
}

impl Default for Engine {
    /// Smoothing oracle as G; fine for `interp`, a placeholder for the others.
    fn default() -> Self {
        Self::new(Arc::new(SmoothingOracleDenoiser::new(2)), DiffusionSchedule::cosine(DiffusionSchedule::DEFAULT_STEPS))
    }
}

impl Engine {
    pub fn new(denoiser: Arc<dyn Denoiser>, schedule: DiffusionSchedule) -> Self {
        Self { denoiser, schedule, trajectory: Arc::new(SplineTrajectoryInfiller) }
    }

    pub fn execute_program(
        &self,
        source: &MotionClip,
        program: &MeoProgram,
        config: &EngineConfig,
    ) -> Result<EngineOutput, InfillError> {
        let edits = execute_meo_keyframes(source, program, &config.edit)?;
        let base = edits.base.clone();
        let keys = edits.keyframes.clone();
        let key_idx = edits.key_indices();
        let window = ContextWindow::around_keys(base.len(), config.window, &key_idx)?;
        let touches_waist = program.ops.iter().any(|m| m.constraint.joint == Joint::Waist);
        let guidance = match config.guidance {
            GuidanceMode::Auto => !touches_waist,
            GuidanceMode::On => true,
            GuidanceMode::Off => false,
        };

        let spline = spline_infill(&base, &keys, &window)?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let clip = if keys.is_empty() {
            base.clone()
        } else {
            match config.variant {
                EngineVariant::Interp => spline.clone(),
                EngineVariant::Eng | EngineVariant::EngSingleStage => {
                    let q = match config.variant {
                        EngineVariant::Eng => Some(self.trajectory.infill(&base, &keys, &window)?),
                        _ => None,
                    };
                    let cond = InfillCondition::new(&base, keys.clone(), window, q)?;
                    let g = guidance.then_some(&spline);
                    generative_infill(self.denoiser.as_ref(), &base, &cond, &self.schedule, g, &mut rng)?
                }
            }
        };

        let report = EngineReport {
            variant: config.variant,
            denoiser: (config.variant != EngineVariant::Interp).then(|| self.denoiser.name().to_string()),
            resolved: edits.resolved.clone(),
            keyframes: keys
                .iter()
                .map(|k| KeyReport {
                    frame_index: k.frame_index,
                    touched_joints: k.touched_joints.iter().copied().collect(),
                    residual: k.residual,
                    warnings: k.warnings.clone(),
                })
                .collect(),
            context: (window.start, window.end),
            guidance: guidance && config.variant != EngineVariant::Interp,
            seed: config.seed,
            warnings: edits.warnings.clone(),
        };
        Ok(EngineOutput { clip, spline, base, keyframes: keys, window, report })
    }
}
