//! Attentional gate: a noisy detector stand-in plus the binary gating rule.
//!
//! Deep risk reasoning is expensive, so a cheap per-frame detector decides
//! whether it runs at all: the gate opens exactly when any detection belongs
//! to the safety-critical class set.

use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::apparatus::ApparatusCounter;
use crate::embedding::{SceneDescriptor, View, CRITICAL_CLASSES};
use crate::error::{Error, Result};

/// One detected object in a front-view frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub class: String,
    pub confidence: f64,
    pub distance_m: f64,
    pub is_critical: bool,
}

/// The set of class labels that open the gate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriticalClassSet {
    classes: BTreeSet<String>,
}

impl CriticalClassSet {
    pub fn new<I: IntoIterator<Item = String>>(classes: I) -> Result<Self> {
        let classes: BTreeSet<String> = classes.into_iter().collect();
        if classes.is_empty() {
            return Err(Error::Config("critical class set must be non-empty".into()));
        }
        Ok(Self { classes })
    }

    /// Parse a comma-separated override list.
    pub fn parse(list: &str) -> Result<Self> {
        Self::new(
            list.split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty()),
        )
    }

    pub fn contains(&self, class: &str) -> bool {
        self.classes.contains(class)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.classes.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }
}

impl Default for CriticalClassSet {
    /// The 11 safety-critical categories.
    fn default() -> Self {
        Self::new(CRITICAL_CLASSES.iter().map(|s| s.to_string())).expect("non-empty")
    }
}

/// Detector noise model: per-object recall and a spurious-detection rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    /// Per-object true-positive probability.
    pub recall: f64,
    /// Expected spurious critical detections per frame.
    pub false_positive_rate: f64,
    pub seed: u64,
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.recall) {
            return Err(Error::Config(format!(
                "detector recall {} outside [0, 1]",
                self.recall
            )));
        }
        if self.false_positive_rate < 0.0 {
            return Err(Error::Config(format!(
                "false positive rate {} negative",
                self.false_positive_rate
            )));
        }
        Ok(())
    }
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            recall: 0.95,
            false_positive_rate: 0.02,
            seed: 0,
        }
    }
}

/// Seeded detector stand-in over ground-truth scene descriptors.
///
/// Each ground-truth hazard is emitted with probability `recall`
/// (independent draws); spurious critical detections of a uniformly random
/// critical class arrive at Poisson rate `false_positive_rate` per frame.
#[derive(Debug, Clone)]
pub struct Detector {
    cfg: DetectorConfig,
    critical: CriticalClassSet,
    rng: ChaCha8Rng,
    counter: ApparatusCounter,
}

impl Detector {
    pub fn new(cfg: DetectorConfig, critical: CriticalClassSet, counter: ApparatusCounter) -> Result<Self> {
        cfg.validate()?;
        use rand::SeedableRng;
        let rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        Ok(Self {
            cfg,
            critical,
            rng,
            counter,
        })
    }

    pub fn critical_classes(&self) -> &CriticalClassSet {
        &self.critical
    }

    pub fn counter(&self) -> &ApparatusCounter {
        &self.counter
    }

    /// Run detection on a front-view descriptor.
    pub fn detect(&mut self, front: &SceneDescriptor) -> Result<Vec<Detection>> {
        self.counter.tick();
        if front.view != View::Front {
            return Err(Error::InvalidInput(
                "detector consumes front-view descriptors only".into(),
            ));
        }
        let mut out = Vec::new();
        for h in &front.hazards {
            // gen::<f64>() lies in [0, 1), so recall = 1 keeps every object
            // and recall = 0 drops every object.
            if self.rng.gen::<f64>() < self.cfg.recall {
                let label = h.class.detection_label().to_string();
                let is_critical = self.critical.contains(&label);
                out.push(Detection {
                    class: label,
                    confidence: 0.5 + 0.5 * self.rng.gen::<f64>(),
                    distance_m: h.distance_m,
                    is_critical,
                });
            }
        }
        if self.cfg.false_positive_rate > 0.0 {
            let poisson = Poisson::new(self.cfg.false_positive_rate)
                .map_err(|e| Error::Config(format!("invalid false positive rate: {e}")))?;
            let spurious = poisson.sample(&mut self.rng) as usize;
            let classes: Vec<&str> = self.critical.iter().collect();
            for _ in 0..spurious {
                let class = classes[self.rng.gen_range(0..classes.len())].to_string();
                out.push(Detection {
                    class,
                    confidence: 0.5 + 0.5 * self.rng.gen::<f64>(),
                    distance_m: 5.0 + 35.0 * self.rng.gen::<f64>(),
                    is_critical: true,
                });
            }
        }
        Ok(out)
    }
}

/// The binary gate: open exactly when any detection is safety-critical.
pub fn gate(detections: &[Detection], critical: &CriticalClassSet) -> bool {
    detections.iter().any(|d| critical.contains(&d.class))
}

/// Fraction of open gates in a trace, the empirical activation probability.
pub fn gate_rate(trace: &[bool]) -> Result<f64> {
    if trace.is_empty() {
        return Err(Error::InvalidInput("gate trace is empty".into()));
    }
    Ok(trace.iter().filter(|g| **g).count() as f64 / trace.len() as f64)
}
