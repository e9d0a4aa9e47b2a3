//! Hierarchical reward synthesis: fuse the two semantic pathways, normalize,
//! modulate vehicle-state shaping factors multiplicatively, and apply the
//! catastrophic-event override.

use serde::{Deserialize, Serialize};

use crate::embedding::{
    static_reward, ClgWeights, ContrastingLanguageGoal, Embedder, SceneDescriptor,
};
use crate::error::{Error, Result};
use crate::gate::{gate, CriticalClassSet, Detection};
use crate::reasoner::{dynamic_reward, Describer, TemporalWindow};
use crate::world::StepEvents;

/// Clipping bounds of the combined semantic score before normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationBounds {
    pub theta_min: f64,
    pub theta_max: f64,
}

impl NormalizationBounds {
    pub fn new(theta_min: f64, theta_max: f64) -> Result<Self> {
        if theta_min >= theta_max {
            return Err(Error::Config(format!(
                "normalization bounds require theta_min < theta_max ({theta_min} >= {theta_max})"
            )));
        }
        Ok(Self { theta_min, theta_max })
    }
}

impl Default for NormalizationBounds {
    fn default() -> Self {
        Self {
            theta_min: -0.1,
            theta_max: 0.2,
        }
    }
}

/// Vehicle-state quantities feeding the shaping factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapingInputs {
    pub v_actual_kmh: f64,
    pub v_max_kmh: f64,
    pub lateral_deviation_m: f64,
    pub lane_half_width_m: f64,
    pub heading_error_rad: f64,
    pub lateral_velocity_mps: f64,
}

impl ShapingInputs {
    pub fn validate(&self) -> Result<()> {
        if self.v_actual_kmh < 0.0 || self.v_actual_kmh > self.v_max_kmh + 1e-9 {
            return Err(Error::InvalidInput(format!(
                "v_actual {} outside [0, {}]",
                self.v_actual_kmh, self.v_max_kmh
            )));
        }
        Ok(())
    }
}

/// Shaping tunables beyond what the inputs carry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShapingConfig {
    /// Lateral-velocity normalizer of the stability factor, m/s.
    pub w_lat_mps: f64,
}

impl Default for ShapingConfig {
    fn default() -> Self {
        Self { w_lat_mps: 2.0 }
    }
}

/// Whether the catastrophic penalty branch is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardMode {
    Standard,
    /// Collision penalty removed; the shaping signal is all there is.
    NoPenalty,
}

/// The four vehicle-state factors, each in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapingFactors {
    pub f_speed: f64,
    pub f_center: f64,
    pub f_angle: f64,
    pub f_stability: f64,
}

/// Per-step trace of every reward stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub r_static: f64,
    pub g: bool,
    pub l_dyn_text: Option<String>,
    pub r_dynamic: f64,
    pub r_combined: f64,
    pub r_norm: f64,
    pub f_speed: f64,
    pub f_center: f64,
    pub f_angle: f64,
    pub f_stability: f64,
    pub r_shaping: f64,
    pub r_final: f64,
}

/// Fuse the two pathway scores into one semantic score in [-2, 2].
pub fn combine(r_static: f64, r_dynamic: f64) -> f64 {
    r_static + r_dynamic
}

/// Clip the combined score to the bounds and rescale onto [0, 1].
pub fn normalize(r_combined: f64, b: &NormalizationBounds) -> f64 {
    (r_combined.clamp(b.theta_min, b.theta_max) - b.theta_min) / (b.theta_max - b.theta_min)
}

/// Multiplicative vehicle-state shaping modulated by the semantic score.
///
/// The desired speed scales linearly with the normalized semantic score, so
/// perceived risk pulls the speed target down to zero.
pub fn shaping(r_norm: f64, s: &ShapingInputs, cfg: &ShapingConfig) -> (ShapingFactors, f64) {
    let v_desired = r_norm * s.v_max_kmh;
    let f_speed = (1.0 - (s.v_actual_kmh - v_desired).abs() / s.v_max_kmh).max(0.0);
    let f_center = (1.0 - s.lateral_deviation_m.abs() / s.lane_half_width_m).max(0.0);
    let f_angle = (1.0 - s.heading_error_rad.abs() / std::f64::consts::FRAC_PI_2).max(0.0);
    let f_stability = (1.0 - s.lateral_velocity_mps.abs() / cfg.w_lat_mps).max(0.0);
    let factors = ShapingFactors {
        f_speed,
        f_center,
        f_angle,
        f_stability,
    };
    (factors, f_speed * f_center * f_angle * f_stability)
}

/// Catastrophic-event override: a collision replaces the shaping signal with
/// the penalty, except in no-penalty mode where the shaping passes through.
pub fn final_reward(
    r_shaping: f64,
    events: &StepEvents,
    penalty: f64,
    mode: RewardMode,
) -> Result<f64> {
    if penalty > 0.0 {
        return Err(Error::Config(format!(
            "collision penalty must be non-positive, got {penalty}"
        )));
    }
    Ok(match mode {
        RewardMode::Standard if events.collision => penalty,
        _ => r_shaping,
    })
}

/// Configuration of the full synthesis stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthesisConfig {
    pub alpha: f64,
    pub beta: f64,
    pub bounds: NormalizationBounds,
    pub shaping: ShapingConfig,
    pub penalty: f64,
    pub mode: RewardMode,
    /// When false the gate, describer and dynamic reward are bypassed
    /// entirely (the static-only build).
    pub dynamic_enabled: bool,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            beta: 0.5,
            bounds: NormalizationBounds::default(),
            shaping: ShapingConfig::default(),
            penalty: -10.0,
            mode: RewardMode::Standard,
            dynamic_enabled: true,
        }
    }
}

impl SynthesisConfig {
    pub fn weights(&self) -> Result<ClgWeights> {
        ClgWeights::new(self.alpha, self.beta)
    }

    pub fn validate(&self) -> Result<()> {
        self.weights()?;
        NormalizationBounds::new(self.bounds.theta_min, self.bounds.theta_max)?;
        if self.penalty > 0.0 {
            return Err(Error::Config(format!(
                "collision penalty must be non-positive, got {}",
                self.penalty
            )));
        }
        if self.shaping.w_lat_mps <= 0.0 {
            return Err(Error::Config("w_lat must be positive".into()));
        }
        Ok(())
    }
}

/// Everything synthesize needs about one step, captured at the same step.
#[derive(Debug, Clone)]
pub struct StepInputs {
    pub bev: SceneDescriptor,
    pub front: SceneDescriptor,
    pub detections: Vec<Detection>,
    pub window: TemporalWindow,
    pub ego: ShapingInputs,
    pub events: StepEvents,
}

/// The full reward stage: static pathway, gated dynamic pathway, fusion,
/// normalization, shaping and override.
#[derive(Debug, Clone)]
pub struct RewardSynthesizer {
    embedder: Embedder,
    clg: ContrastingLanguageGoal,
    weights: ClgWeights,
    describer: Describer,
    critical: CriticalClassSet,
    cfg: SynthesisConfig,
}

impl RewardSynthesizer {
    pub fn new(
        embedder: Embedder,
        clg: ContrastingLanguageGoal,
        describer: Describer,
        critical: CriticalClassSet,
        cfg: SynthesisConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        let weights = cfg.weights()?;
        Ok(Self {
            embedder,
            clg,
            weights,
            describer,
            critical,
            cfg,
        })
    }

    /// Synthesizer over the builtin anchors, goals and vocabulary.
    pub fn builtin(cfg: SynthesisConfig) -> Result<Self> {
        let embedder = Embedder::builtin();
        let clg = ContrastingLanguageGoal::builtin(&embedder)?;
        let describer = Describer::new(
            crate::reasoner::RiskVocabulary::default(),
            embedder.counter().clone(),
        );
        Self::new(
            embedder,
            clg,
            describer,
            CriticalClassSet::default(),
            cfg,
        )
    }

    pub fn config(&self) -> &SynthesisConfig {
        &self.cfg
    }

    pub fn embedder(&self) -> &Embedder {
        &self.embedder
    }

    pub fn goal_pair(&self) -> &ContrastingLanguageGoal {
        &self.clg
    }

    pub fn critical_classes(&self) -> &CriticalClassSet {
        &self.critical
    }

    /// Run the complete reward computation for one step.
    ///
    /// A closed gate (recall miss, no critical object, or the dynamic
    /// pathway disabled) degrades exactly to the static-only pipeline.
    pub fn synthesize(&self, inputs: &StepInputs) -> Result<RewardBreakdown> {
        inputs.ego.validate()?;
        let r_static = static_reward(&self.embedder, &inputs.bev, &self.clg, &self.weights)?;

        let gated = self.cfg.dynamic_enabled && gate(&inputs.detections, &self.critical);
        let (l_dyn, r_dynamic) = if gated {
            let goal = self.describer.describe(&inputs.window, &inputs.detections)?;
            let r = dynamic_reward(
                &self.embedder,
                &inputs.front,
                true,
                self.clg.positive_embedding(),
                Some(&goal),
                &self.weights,
            )?;
            (Some(goal), r)
        } else {
            (None, 0.0)
        };

        let r_combined = combine(r_static, r_dynamic);
        let r_norm = normalize(r_combined, &self.cfg.bounds);
        let (factors, r_shaping) = shaping(r_norm, &inputs.ego, &self.cfg.shaping);
        let r_final = final_reward(r_shaping, &inputs.events, self.cfg.penalty, self.cfg.mode)?;

        Ok(RewardBreakdown {
            r_static,
            g: gated,
            l_dyn_text: l_dyn.map(|g| g.text),
            r_dynamic,
            r_combined,
            r_norm,
            f_speed: factors.f_speed,
            f_center: factors.f_center,
            f_angle: factors.f_angle,
            f_stability: factors.f_stability,
            r_shaping,
            r_final,
        })
    }
}
