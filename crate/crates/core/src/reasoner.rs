//! Deep risk reasoning: causal temporal windows, a rule-table describer that
//! stands in for a generative vision-language model, and the gated dynamic
//! reward.
//!
//! The describer looks at how hazard distances evolve across the window and
//! selects one canonical risk description (or composes a fallback phrase for
//! classes outside the vocabulary). It is deterministic: identical windows
//! and detections always yield the same description.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::apparatus::ApparatusCounter;
use crate::embedding::{
    cosine_sim, AgentClass, ClgWeights, Embedder, SceneDescriptor, UnitVector, RISK_DESCRIPTIONS,
};
use crate::error::{Error, Result};
use crate::gate::Detection;

/// Number of past frames kept alongside the current one (3-frame history).
pub const WINDOW_K: usize = 3;

/// Distance-trend changes below this are treated as stationary.
const TREND_EPS_M: f64 = 1e-6;

/// The most recent `K+1` front frames, oldest first.
///
/// At episode start the buffer front-pads by repeating the oldest frame, so
/// the window length is invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalWindow {
    frames: Vec<(u64, SceneDescriptor)>,
}

impl TemporalWindow {
    pub fn frames(&self) -> &[(u64, SceneDescriptor)] {
        &self.frames
    }

    pub fn newest(&self) -> &(u64, SceneDescriptor) {
        self.frames.last().expect("window is never empty")
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

/// Per-trajectory ring buffer feeding [`TemporalWindow`]s.
#[derive(Debug, Clone, Default)]
pub struct FrameBuffer {
    frames: Vec<(u64, SceneDescriptor)>,
}

impl FrameBuffer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Reset at an episode boundary.
    pub fn clear(&mut self) {
        self.frames.clear();
    }

    /// Push the front frame of `step` and return the current window.
    ///
    /// Steps must arrive in increasing order.
    pub fn push_frame(&mut self, step: u64, front: SceneDescriptor) -> Result<TemporalWindow> {
        if let Some((last, _)) = self.frames.last() {
            if step <= *last {
                return Err(Error::ContractViolation(format!(
                    "frame pushed out of order: step {step} after {last}"
                )));
            }
        }
        self.frames.push((step, front));
        if self.frames.len() > WINDOW_K + 1 {
            self.frames.remove(0);
        }
        let mut frames = self.frames.clone();
        while frames.len() < WINDOW_K + 1 {
            frames.insert(0, frames[0].clone());
        }
        Ok(TemporalWindow { frames })
    }
}

/// The reference vocabulary of canonical risk descriptions.
///
/// Layout convention: entries `3*slot + {0,1,2}` are the crossing, merging
/// and receding descriptions for vocabulary slots pedestrian (0), cyclist (1)
/// and motorcyclist (2); entry 9 is the generic blocked-lane description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskVocabulary {
    entries: Vec<String>,
}

impl RiskVocabulary {
    pub fn new(entries: Vec<String>) -> Result<Self> {
        if entries.len() != 10 {
            return Err(Error::Config(format!(
                "risk vocabulary must have exactly 10 entries, got {}",
                entries.len()
            )));
        }
        for (i, a) in entries.iter().enumerate() {
            if a.trim().is_empty() {
                return Err(Error::Config(format!("vocabulary entry {i} is empty")));
            }
            if entries[..i].contains(a) {
                return Err(Error::Config(format!("duplicate vocabulary entry: {a}")));
            }
        }
        Ok(Self { entries })
    }

    /// Load a vocabulary override: one description per line, blanks skipped.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::new(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(str::to_string)
                .collect(),
        )
    }

    pub fn entries(&self) -> &[String] {
        &self.entries
    }

    fn entry(&self, slot: usize, dynamics: HazardDynamics) -> &str {
        let offset = match dynamics {
            HazardDynamics::Crossing => 0,
            HazardDynamics::Merging => 1,
            HazardDynamics::Receding => 2,
        };
        &self.entries[slot * 3 + offset]
    }

    fn blocked_lane(&self) -> &str {
        &self.entries[9]
    }
}

impl Default for RiskVocabulary {
    fn default() -> Self {
        Self::new(RISK_DESCRIPTIONS.iter().map(|s| s.to_string()).collect())
            .expect("builtin vocabulary is valid")
    }
}

/// How a tracked hazard moves relative to the ego across the window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum HazardDynamics {
    Crossing,
    Merging,
    Receding,
}

/// Where a dynamic goal text came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GoalSource {
    Vocabulary,
    Composed,
}

/// A context-specific risk description used as the negative pole of the
/// dynamic reward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicGoal {
    pub text: String,
    pub source: GoalSource,
}

/// Template describer standing in for a generative model.
#[derive(Debug, Clone)]
pub struct Describer {
    vocab: RiskVocabulary,
    counter: ApparatusCounter,
}

impl Describer {
    pub fn new(vocab: RiskVocabulary, counter: ApparatusCounter) -> Self {
        Self { vocab, counter }
    }

    pub fn vocabulary(&self) -> &RiskVocabulary {
        &self.vocab
    }

    pub fn counter(&self) -> &ApparatusCounter {
        &self.counter
    }

    /// Describe the dominant critical risk in the window.
    ///
    /// Must only be called with the gate open (at least one critical
    /// detection). The dominant detection is the critical one with the
    /// smallest final distance, ties broken by lexicographic class label.
    pub fn describe(
        &self,
        window: &TemporalWindow,
        detections: &[Detection],
    ) -> Result<DynamicGoal> {
        self.counter.tick();
        let mut critical: Vec<&Detection> = detections.iter().filter(|d| d.is_critical).collect();
        if critical.is_empty() {
            return Err(Error::ContractViolation(
                "describe called with no critical detection (gate closed)".into(),
            ));
        }
        critical.sort_by(|a, b| {
            a.distance_m
                .total_cmp(&b.distance_m)
                .then_with(|| a.class.cmp(&b.class))
        });
        let dominant = critical[0];

        let slot = vocabulary_slot(&dominant.class);
        let track = track_class(window, &dominant.class);

        let (slot, track) = match (slot, track) {
            (Some(slot), Some(track)) => (slot, track),
            // Class outside the vocabulary, or a detection with no matching
            // hazard in the window (e.g. a spurious detection): compose.
            _ => {
                return Ok(DynamicGoal {
                    text: format!("a {} is near the roadway", dominant.class),
                    source: GoalSource::Composed,
                })
            }
        };

        let delta = track.final_distance - track.first_distance;
        let text = if delta < -TREND_EPS_M {
            if track.in_ego_lane {
                self.vocab.entry(slot, HazardDynamics::Crossing)
            } else {
                self.vocab.entry(slot, HazardDynamics::Merging)
            }
        } else if delta > TREND_EPS_M {
            self.vocab.entry(slot, HazardDynamics::Receding)
        } else if track.in_ego_lane {
            self.vocab.blocked_lane()
        } else {
            return Ok(DynamicGoal {
                text: format!("a {} is near the roadway", dominant.class),
                source: GoalSource::Composed,
            });
        };
        Ok(DynamicGoal {
            text: text.to_string(),
            source: GoalSource::Vocabulary,
        })
    }
}

/// Vocabulary slot of a detection label, if the label has a triad.
fn vocabulary_slot(label: &str) -> Option<usize> {
    match label {
        "person" => Some(0),
        "bicycle" => Some(1),
        "motorcycle" => Some(2),
        _ => None,
    }
}

/// Simulator class corresponding to a detection label.
fn simulator_class(label: &str) -> Option<AgentClass> {
    match label {
        "person" => Some(AgentClass::Pedestrian),
        "bicycle" => Some(AgentClass::Bicycle),
        "motorcycle" => Some(AgentClass::Motorcycle),
        "car" => Some(AgentClass::Vehicle),
        _ => None,
    }
}

struct Track {
    first_distance: f64,
    final_distance: f64,
    in_ego_lane: bool,
}

/// Follow the nearest hazard of `label`'s class across the window frames.
fn track_class(window: &TemporalWindow, label: &str) -> Option<Track> {
    let class = simulator_class(label)?;
    let per_frame: Vec<Option<&crate::embedding::Hazard>> = window
        .frames()
        .iter()
        .map(|(_, frame)| {
            frame
                .hazards
                .iter()
                .filter(|h| h.class == class)
                .min_by(|a, b| a.distance_m.total_cmp(&b.distance_m))
        })
        .collect();
    let newest = per_frame.last().copied().flatten()?;
    let oldest = per_frame.iter().copied().flatten().next()?;
    Some(Track {
        first_distance: oldest.distance_m,
        final_distance: newest.distance_m,
        in_ego_lane: newest.in_ego_lane,
    })
}

/// Dynamic reward of a gated frame:
/// `g * [alpha * sim(scene, pos) - beta * sim(scene, embed(l_dyn))]`,
/// exactly zero when the gate is closed.
pub fn dynamic_reward(
    embedder: &Embedder,
    front: &SceneDescriptor,
    gated: bool,
    l_pos_embedding: &UnitVector,
    l_dyn: Option<&DynamicGoal>,
    w: &ClgWeights,
) -> Result<f64> {
    if !gated {
        return Ok(0.0);
    }
    let goal = l_dyn.ok_or_else(|| {
        Error::ContractViolation("gate open but no dynamic goal supplied".into())
    })?;
    let scene = embedder.embed_scene(front)?;
    let pos = cosine_sim(&scene, l_pos_embedding)?;
    let neg = cosine_sim(&scene, &embedder.embed_text(&goal.text)?)?;
    Ok(w.alpha() * pos - w.beta() * neg)
}
