//! Synthetic shared embedding space and the contrasting-goal static reward.
//!
//! Text and scene embedders map into the same d-dimensional unit sphere. The
//! space is spanned by fixed concept anchors (one axis per concept) so every
//! cosine similarity used in tests can be computed by hand. Free-form text
//! falls back to a deterministic token hash. No learned weights anywhere.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::apparatus::ApparatusCounter;
use crate::error::{Error, Result};

/// Default dimension of the embedding space.
pub const DEFAULT_DIM: usize = 16;

/// Positive goal text: the desired baseline state.
pub const POSITIVE_GOAL: &str = "the road is clear with no car accidents";
/// Negative goal text: the fundamental undesired state.
pub const NEGATIVE_GOAL: &str = "two cars have collided with each other on the road";

/// A hazard within 25 m in the ego lane clears the `road_clear` flag,
/// matching the ~30 m route preview horizon.
pub const CLEAR_THRESHOLD_M: f64 = 25.0;

/// Tilt of the negative-goal anchor toward the negative of the positive axis,
/// so the fixed goal pair is anti-correlated rather than orthogonal.
const NEG_ANCHOR_TILT: f64 = 0.25;

/// Axis assignments for the concept anchors.
const AXIS_POSITIVE: usize = 0;
const AXIS_NEGATIVE: usize = 1;
const AXIS_CLASS_BASE: usize = 2; // 11 critical classes occupy axes 2..=12
const AXIS_CAR: usize = 13;
const AXIS_NEUTRAL: usize = 15;

/// The 11 safety-critical detection labels, in canonical order.
pub const CRITICAL_CLASSES: [&str; 11] = [
    "person",
    "bicycle",
    "motorcycle",
    "dog",
    "horse",
    "sheep",
    "cow",
    "elephant",
    "bear",
    "zebra",
    "giraffe",
];

/// Canonical risk descriptions available to the describer, ordered as three
/// (crossing, merging, receding) triads for pedestrian / cyclist /
/// motorcyclist plus a generic blocked-lane entry.
pub const RISK_DESCRIPTIONS: [&str; 10] = [
    "a pedestrian is crossing the road ahead",
    "a pedestrian is stepping into the ego lane",
    "a pedestrian is moving away from the road",
    "a cyclist is crossing the road ahead",
    "a cyclist is merging into the ego lane",
    "a cyclist is moving away from the ego lane",
    "a motorcyclist is crossing the road ahead",
    "a motorcyclist is merging into the ego lane",
    "a motorcyclist is moving away from the ego lane",
    "the ego lane is blocked by a stopped vehicle",
];

/// A unit-norm vector in the shared embedding space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    /// Wrap a vector that is already unit norm (within 1e-9).
    pub fn new(components: Vec<f64>) -> Result<Self> {
        let norm = components.iter().map(|c| c * c).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "unit vector norm {norm} deviates from 1"
            )));
        }
        Ok(Self(components))
    }

    /// Normalize an arbitrary non-zero vector onto the unit sphere.
    pub fn normalized(raw: Vec<f64>) -> Result<Self> {
        let norm = raw.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm <= 1e-12 {
            return Err(Error::InvalidInput("cannot normalize zero vector".into()));
        }
        Ok(Self(raw.into_iter().map(|c| c / norm).collect()))
    }

    /// Basis vector along `axis`.
    pub fn axis(dim: usize, axis: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[axis] = 1.0;
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }
}

/// Cosine similarity between two embeddings. Errors on dimension mismatch.
pub fn cosine_sim(a: &UnitVector, b: &UnitVector) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::InvalidInput(format!(
            "dimension mismatch: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    let dot: f64 = a.0.iter().zip(&b.0).map(|(x, y)| x * y).sum();
    let na: f64 = a.0.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.0.iter().map(|x| x * x).sum::<f64>().sqrt();
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

/// Which camera a scene descriptor summarizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum View {
    Bev,
    Front,
}

impl fmt::Display for View {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            View::Bev => write!(f, "bev"),
            View::Front => write!(f, "front"),
        }
    }
}

/// Traffic participant classes produced by the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AgentClass {
    Vehicle,
    Pedestrian,
    Bicycle,
    Motorcycle,
}

impl AgentClass {
    /// Detection label emitted by the detector stand-in for this class.
    pub fn detection_label(self) -> &'static str {
        match self {
            AgentClass::Pedestrian => "person",
            AgentClass::Bicycle => "bicycle",
            AgentClass::Motorcycle => "motorcycle",
            AgentClass::Vehicle => "car",
        }
    }
}

impl fmt::Display for AgentClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AgentClass::Vehicle => write!(f, "vehicle"),
            AgentClass::Pedestrian => write!(f, "pedestrian"),
            AgentClass::Bicycle => write!(f, "bicycle"),
            AgentClass::Motorcycle => write!(f, "motorcycle"),
        }
    }
}

/// One hazard entry inside a scene descriptor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hazard {
    pub class: AgentClass,
    pub distance_m: f64,
    /// Rate of distance decrease in m/s; positive means approaching.
    pub closing_speed_mps: f64,
    /// Laterally within the ego lane and not significantly behind the ego.
    pub in_ego_lane: bool,
}

/// Symbolic ground-truth summary of what one camera view contains.
///
/// Stand-in for raw pixels: the scene embedder and the detector both consume
/// this instead of images.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneDescriptor {
    pub view: View,
    pub road_clear: bool,
    pub collision_present: bool,
    pub hazards: Vec<Hazard>,
    pub lane_blocked: bool,
}

impl SceneDescriptor {
    /// An empty, clear view.
    pub fn clear(view: View) -> Self {
        Self {
            view,
            road_clear: true,
            collision_present: false,
            hazards: Vec::new(),
            lane_blocked: false,
        }
    }

    /// Check the type invariants: non-negative distances, and `road_clear`
    /// only when no in-lane hazard sits within the clear threshold.
    pub fn validate(&self) -> Result<()> {
        for h in &self.hazards {
            if h.distance_m < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "negative hazard distance {}",
                    h.distance_m
                )));
            }
            if self.road_clear && h.in_ego_lane && h.distance_m < CLEAR_THRESHOLD_M {
                return Err(Error::InvalidInput(
                    "road_clear set with an in-lane hazard inside the clear threshold".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Weights of the scene-embedding blend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlendWeights {
    pub w_clear: f64,
    pub w_crash: f64,
    pub w_hazard: f64,
    /// Distance scale of the hazard weight decay, in meters.
    pub lambda_dist: f64,
}

impl Default for BlendWeights {
    fn default() -> Self {
        Self {
            w_clear: 1.0,
            w_crash: 1.5,
            w_hazard: 0.8,
            lambda_dist: 15.0,
        }
    }
}

/// Fixed table mapping canonical texts to anchor vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorTable {
    dim: usize,
    entries: Vec<(String, UnitVector)>,
}

impl AnchorTable {
    /// The default hand-computable table over 16 axes.
    pub fn builtin() -> Self {
        let dim = DEFAULT_DIM;
        let mut entries = Vec::new();

        entries.push((POSITIVE_GOAL.to_string(), UnitVector::axis(dim, AXIS_POSITIVE)));
        entries.push((NEGATIVE_GOAL.to_string(), negative_anchor(dim)));

        for (i, class) in CRITICAL_CLASSES.iter().enumerate() {
            entries.push((
                (*class).to_string(),
                UnitVector::axis(dim, AXIS_CLASS_BASE + i),
            ));
        }
        entries.push(("car".to_string(), UnitVector::axis(dim, AXIS_CAR)));

        // Risk description anchors lean toward the hazard-class axis, mixed
        // with the raw positive/negative axes by severity:
        //   crossing (2c + n)/sqrt(5), merging (c + n)/sqrt(2),
        //   receding (c + 2p)/sqrt(5), blocked lane (car + n)/sqrt(2).
        let s5 = 5.0_f64.sqrt();
        let s2 = 2.0_f64.sqrt();
        for (slot, class_axis) in [AXIS_CLASS_BASE, AXIS_CLASS_BASE + 1, AXIS_CLASS_BASE + 2]
            .into_iter()
            .enumerate()
        {
            let mut crossing = vec![0.0; dim];
            crossing[class_axis] = 2.0 / s5;
            crossing[AXIS_NEGATIVE] = 1.0 / s5;
            let mut merging = vec![0.0; dim];
            merging[class_axis] = 1.0 / s2;
            merging[AXIS_NEGATIVE] = 1.0 / s2;
            let mut receding = vec![0.0; dim];
            receding[class_axis] = 1.0 / s5;
            receding[AXIS_POSITIVE] = 2.0 / s5;
            for (k, v) in [crossing, merging, receding].into_iter().enumerate() {
                entries.push((
                    RISK_DESCRIPTIONS[slot * 3 + k].to_string(),
                    UnitVector(v),
                ));
            }
        }
        let mut blocked = vec![0.0; dim];
        blocked[AXIS_CAR] = 1.0 / s2;
        blocked[AXIS_NEGATIVE] = 1.0 / s2;
        entries.push((RISK_DESCRIPTIONS[9].to_string(), UnitVector(blocked)));

        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lookup(&self, text: &str) -> Option<&UnitVector> {
        self.entries
            .iter()
            .find(|(t, _)| t == text)
            .map(|(_, v)| v)
    }

    /// Anchor of a simulator class, used by the scene-embedding blend.
    pub fn class_anchor(&self, class: AgentClass) -> &UnitVector {
        self.lookup(class.detection_label())
            .expect("builtin table covers all simulator classes")
    }

    pub fn positive_anchor(&self) -> &UnitVector {
        self.lookup(POSITIVE_GOAL).expect("builtin positive anchor")
    }

    pub fn negative_anchor(&self) -> &UnitVector {
        self.lookup(NEGATIVE_GOAL).expect("builtin negative anchor")
    }

    /// Render the table as CSV (`text,c0,...,c{d-1}`), the format consumed by
    /// [`AnchorTable::from_csv`] and emitted by the `dump-anchors` subcommand.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("text");
        for i in 0..self.dim {
            out.push_str(&format!(",c{i}"));
        }
        out.push('\n');
        for (text, v) in &self.entries {
            out.push('"');
            out.push_str(text);
            out.push('"');
            for c in v.components() {
                out.push_str(&format!(",{c:?}"));
            }
            out.push('\n');
        }
        out
    }

    /// Parse a table from the CSV format written by [`AnchorTable::to_csv`].
    pub fn from_csv(csv: &str) -> Result<Self> {
        let mut lines = csv.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Config("empty anchor csv".into()))?;
        let dim = header.split(',').count() - 1;
        if dim == 0 {
            return Err(Error::Config("anchor csv header has no axes".into()));
        }
        let mut entries = Vec::new();
        for (lineno, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let rest = line.strip_prefix('"').ok_or_else(|| {
                Error::Config(format!("anchor csv line {}: expected quoted text", lineno + 2))
            })?;
            let close = rest.find('"').ok_or_else(|| {
                Error::Config(format!("anchor csv line {}: unterminated quote", lineno + 2))
            })?;
            let text = rest[..close].to_string();
            let comps: Vec<f64> = rest[close + 1..]
                .split(',')
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Config(format!("anchor csv value: {e}")))
                })
                .collect::<Result<_>>()?;
            if comps.len() != dim {
                return Err(Error::Config(format!(
                    "anchor csv line {}: expected {dim} components, got {}",
                    lineno + 2,
                    comps.len()
                )));
            }
            entries.push((text, UnitVector::new(comps)?));
        }
        Ok(Self { dim, entries })
    }
}

fn negative_anchor(dim: usize) -> UnitVector {
    let mut v = vec![0.0; dim];
    v[AXIS_POSITIVE] = -NEG_ANCHOR_TILT;
    v[AXIS_NEGATIVE] = (1.0 - NEG_ANCHOR_TILT * NEG_ANCHOR_TILT).sqrt();
    UnitVector(v)
}

/// Deterministic text/scene embedder over the anchor table.
#[derive(Debug, Clone)]
pub struct Embedder {
    table: AnchorTable,
    weights: BlendWeights,
    counter: ApparatusCounter,
}

impl Embedder {
    pub fn new(table: AnchorTable, weights: BlendWeights, counter: ApparatusCounter) -> Self {
        Self {
            table,
            weights,
            counter,
        }
    }

    pub fn builtin() -> Self {
        Self::new(
            AnchorTable::builtin(),
            BlendWeights::default(),
            ApparatusCounter::new(),
        )
    }

    pub fn table(&self) -> &AnchorTable {
        &self.table
    }

    pub fn counter(&self) -> &ApparatusCounter {
        &self.counter
    }

    /// Embed a goal or risk-description text.
    ///
    /// Canonical texts resolve through the anchor table; anything else hashes
    /// each whitespace token onto a signed axis and normalizes the sum.
    /// Identical texts always produce identical vectors.
    pub fn embed_text(&self, goal: &str) -> Result<UnitVector> {
        self.counter.tick();
        if goal.trim().is_empty() {
            return Err(Error::InvalidInput("cannot embed empty text".into()));
        }
        if let Some(anchor) = self.table.lookup(goal) {
            return Ok(anchor.clone());
        }
        let dim = self.table.dim();
        let mut acc = vec![0.0; dim];
        for token in goal.split_whitespace() {
            let h = fnv1a(token.to_lowercase().as_bytes());
            let axis = ((h >> 1) % dim as u64) as usize;
            let sign = if h & 1 == 0 { 1.0 } else { -1.0 };
            acc[axis] += sign;
        }
        UnitVector::normalized(acc).or_else(|_|
            // Tokens may cancel exactly; fall back to the neutral axis.
            Ok(UnitVector::axis(dim, AXIS_NEUTRAL)))
    }

    /// Embed a scene descriptor as a normalized blend of concept anchors.
    ///
    /// A clear road contributes the positive anchor, a present collision the
    /// negative anchor, and each hazard its class anchor with weight
    /// `w_hazard * exp(-distance / lambda_dist)`.
    pub fn embed_scene(&self, scene: &SceneDescriptor) -> Result<UnitVector> {
        self.counter.tick();
        scene.validate()?;
        let dim = self.table.dim();
        let mut acc = vec![0.0; dim];
        let mut add = |anchor: &UnitVector, w: f64| {
            for (a, c) in acc.iter_mut().zip(anchor.components()) {
                *a += w * c;
            }
        };
        if scene.road_clear {
            add(self.table.positive_anchor(), self.weights.w_clear);
        }
        if scene.collision_present {
            add(self.table.negative_anchor(), self.weights.w_crash);
        }
        for h in &scene.hazards {
            let w = self.weights.w_hazard * (-h.distance_m / self.weights.lambda_dist).exp();
            add(self.table.class_anchor(h.class), w);
        }
        UnitVector::normalized(acc)
            .or_else(|_| Ok(UnitVector::axis(dim, AXIS_NEUTRAL)))
    }
}

/// Weighting of the positive and negative goal similarities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClgWeights {
    alpha: f64,
    beta: f64,
}

impl ClgWeights {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if alpha <= 0.0 || beta <= 0.0 {
            return Err(Error::Config(format!(
                "clg weights must be strictly positive (alpha={alpha}, beta={beta})"
            )));
        }
        if ((alpha + beta) - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!(
                "clg weights must sum to 1 (alpha={alpha}, beta={beta})"
            )));
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

impl Default for ClgWeights {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            beta: 0.5,
        }
    }
}

/// A fixed pair of contrasting goal texts with cached embeddings.
#[derive(Debug, Clone, PartialEq)]
pub struct ContrastingLanguageGoal {
    positive: String,
    negative: String,
    positive_embedding: UnitVector,
    negative_embedding: UnitVector,
}

impl ContrastingLanguageGoal {
    pub fn new(embedder: &Embedder, positive: &str, negative: &str) -> Result<Self> {
        if positive == negative {
            return Err(Error::InvalidInput(
                "positive and negative goals must differ".into(),
            ));
        }
        Ok(Self {
            positive: positive.to_string(),
            negative: negative.to_string(),
            positive_embedding: embedder.embed_text(positive)?,
            negative_embedding: embedder.embed_text(negative)?,
        })
    }

    /// The default goal pair.
    pub fn builtin(embedder: &Embedder) -> Result<Self> {
        Self::new(embedder, POSITIVE_GOAL, NEGATIVE_GOAL)
    }

    pub fn positive_text(&self) -> &str {
        &self.positive
    }

    pub fn negative_text(&self) -> &str {
        &self.negative
    }

    pub fn positive_embedding(&self) -> &UnitVector {
        &self.positive_embedding
    }

    pub fn negative_embedding(&self) -> &UnitVector {
        &self.negative_embedding
    }
}

/// Static reward of a scene embedding against a goal pair:
/// `alpha * sim(e, pos) - beta * sim(e, neg)`, bounded in [-1, 1].
pub fn static_reward_from_embedding(
    scene: &UnitVector,
    clg: &ContrastingLanguageGoal,
    w: &ClgWeights,
) -> Result<f64> {
    let pos = cosine_sim(scene, clg.positive_embedding())?;
    let neg = cosine_sim(scene, clg.negative_embedding())?;
    Ok(w.alpha() * pos - w.beta() * neg)
}

/// Static reward of a BEV scene descriptor. Front-view input is rejected.
pub fn static_reward(
    embedder: &Embedder,
    bev: &SceneDescriptor,
    clg: &ContrastingLanguageGoal,
    w: &ClgWeights,
) -> Result<f64> {
    if bev.view != View::Bev {
        return Err(Error::InvalidInput(
            "static reward requires a BEV descriptor".into(),
        ));
    }
    let embedded = embedder.embed_scene(bev)?;
    static_reward_from_embedding(&embedded, clg, w)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for b in bytes {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(0x1000_0000_01b3);
    }
    hash
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn embedder() -> Embedder {
        Embedder::builtin()
    }

    #[test]
    fn embed_text_is_deterministic() {
        let e = embedder();
        let a = e.embed_text(POSITIVE_GOAL).unwrap();
        let b = e.embed_text(POSITIVE_GOAL).unwrap();
        assert_eq!(a, b);
        let x = e.embed_text("an unusual free form risk phrase").unwrap();
        let y = e.embed_text("an unusual free form risk phrase").unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn embed_text_rejects_empty() {
        assert!(matches!(
            embedder().embed_text("  "),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn goal_self_similarity_is_one() {
        let e = embedder();
        let pos = e.embed_text(POSITIVE_GOAL).unwrap();
        assert_abs_diff_eq!(cosine_sim(&pos, &pos).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn goal_pair_similarity_is_negative_quarter() {
        // Oracle: dot of the published anchors, e0 . (-0.25 e0 + sqrt(1-0.0625) e1).
        let e = embedder();
        let pos = e.embed_text(POSITIVE_GOAL).unwrap();
        let neg = e.embed_text(NEGATIVE_GOAL).unwrap();
        let sim = cosine_sim(&pos, &neg).unwrap();
        assert_abs_diff_eq!(sim, -0.25, epsilon = 1e-12);
        assert!((-1.0..0.0).contains(&sim));
    }

    #[test]
    fn cosine_sim_basic_identities() {
        let dim = DEFAULT_DIM;
        let e1 = UnitVector::axis(dim, 0);
        let e2 = UnitVector::axis(dim, 1);
        let neg = UnitVector::normalized(vec![-1.0; 1].into_iter().chain(vec![0.0; dim - 1]).collect())
            .unwrap();
        assert_abs_diff_eq!(cosine_sim(&e1, &e1).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(cosine_sim(&e1, &e2).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(cosine_sim(&e1, &neg).unwrap(), -1.0, epsilon = 1e-12);
    }

    #[test]
    fn cosine_sim_rejects_dimension_mismatch() {
        let a = UnitVector::axis(16, 0);
        let b = UnitVector::axis(8, 0);
        assert!(matches!(cosine_sim(&a, &b), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn clear_scene_embeds_onto_positive_anchor() {
        // Oracle: only the w_clear term contributes, so the embedding is the
        // positive axis itself.
        let e = embedder();
        let scene = SceneDescriptor::clear(View::Bev);
        let v = e.embed_scene(&scene).unwrap();
        let sim = cosine_sim(&v, e.table().positive_anchor()).unwrap();
        assert!(sim > 0.9);
        assert_abs_diff_eq!(sim, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn collided_scene_leans_negative() {
        let e = embedder();
        let scene = SceneDescriptor {
            view: View::Bev,
            road_clear: false,
            collision_present: true,
            hazards: vec![],
            lane_blocked: false,
        };
        let v = e.embed_scene(&scene).unwrap();
        let sim_neg = cosine_sim(&v, e.table().negative_anchor()).unwrap();
        let sim_pos = cosine_sim(&v, e.table().positive_anchor()).unwrap();
        assert!(sim_neg > sim_pos);
        assert_abs_diff_eq!(sim_neg, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn embed_scene_is_deterministic() {
        let e = embedder();
        let scene = SceneDescriptor {
            view: View::Front,
            road_clear: false,
            collision_present: false,
            hazards: vec![Hazard {
                class: AgentClass::Pedestrian,
                distance_m: 12.0,
                closing_speed_mps: 1.0,
                in_ego_lane: true,
            }],
            lane_blocked: false,
        };
        assert_eq!(e.embed_scene(&scene).unwrap(), e.embed_scene(&scene).unwrap());
    }

    #[test]
    fn static_reward_fixture_values() {
        // Oracle: manual evaluation with the builtin anchors.
        //   clear:    0.5 * 1 - 0.5 * (-0.25) = 0.625
        //   collided: 0.5 * (-0.25) - 0.5 * 1 = -0.625
        let e = embedder();
        let clg = ContrastingLanguageGoal::builtin(&e).unwrap();
        let w = ClgWeights::default();
        let clear = SceneDescriptor::clear(View::Bev);
        let collided = SceneDescriptor {
            view: View::Bev,
            road_clear: false,
            collision_present: true,
            hazards: vec![],
            lane_blocked: false,
        };
        let r_clear = static_reward(&e, &clear, &clg, &w).unwrap();
        let r_collided = static_reward(&e, &collided, &clg, &w).unwrap();
        assert_abs_diff_eq!(r_clear, 0.625, epsilon = 1e-12);
        assert_abs_diff_eq!(r_collided, -0.625, epsilon = 1e-12);
        assert!(r_clear > 0.0 && r_collided < 0.0);
    }

    #[test]
    fn static_reward_rejects_front_view() {
        let e = embedder();
        let clg = ContrastingLanguageGoal::builtin(&e).unwrap();
        let scene = SceneDescriptor::clear(View::Front);
        assert!(matches!(
            static_reward(&e, &scene, &clg, &ClgWeights::default()),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn static_reward_extremes() {
        // sim+ = 1, sim- = -1 with alpha = beta = 0.5 reaches the upper bound.
        let e = embedder();
        let clg = ContrastingLanguageGoal::builtin(&e).unwrap();
        let w = ClgWeights::default();
        let neg = clg.negative_embedding().clone();
        let anti_neg = UnitVector::normalized(
            neg.components().iter().map(|c| -c).collect(),
        )
        .unwrap();
        let r = static_reward_from_embedding(&anti_neg, &clg, &w).unwrap();
        // anti-neg has sim- = -1 and sim+ = +0.25.
        assert_abs_diff_eq!(r, 0.5 * 0.25 + 0.5, epsilon = 1e-12);
        // Symmetric similarities cancel exactly.
        let mid = UnitVector::axis(DEFAULT_DIM, 5);
        let r_mid = static_reward_from_embedding(&mid, &clg, &w).unwrap();
        assert_abs_diff_eq!(r_mid, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn clg_requires_distinct_texts() {
        let e = embedder();
        assert!(ContrastingLanguageGoal::new(&e, "same", "same").is_err());
    }

    #[test]
    fn clg_weights_validation() {
        assert!(ClgWeights::new(0.5, 0.5).is_ok());
        assert!(ClgWeights::new(0.3, 0.7).is_ok());
        assert!(ClgWeights::new(0.5, 0.6).is_err());
        assert!(ClgWeights::new(-0.2, 1.2).is_err());
        assert!(ClgWeights::new(0.0, 1.0).is_err());
    }

    #[test]
    fn descriptor_validation_enforces_clear_threshold() {
        let bad = SceneDescriptor {
            view: View::Bev,
            road_clear: true,
            collision_present: false,
            hazards: vec![Hazard {
                class: AgentClass::Pedestrian,
                distance_m: 10.0,
                closing_speed_mps: 0.0,
                in_ego_lane: true,
            }],
            lane_blocked: false,
        };
        assert!(bad.validate().is_err());
        let ok = SceneDescriptor {
            road_clear: true,
            hazards: vec![Hazard {
                class: AgentClass::Pedestrian,
                distance_m: 26.0,
                closing_speed_mps: 0.0,
                in_ego_lane: true,
            }],
            ..SceneDescriptor::clear(View::Bev)
        };
        assert!(ok.validate().is_ok());
    }

    #[test]
    fn anchor_table_csv_round_trip() {
        let table = AnchorTable::builtin();
        let csv = table.to_csv();
        let parsed = AnchorTable::from_csv(&csv).unwrap();
        assert_eq!(table, parsed);
    }

    #[test]
    fn apparatus_counter_ticks_on_embed() {
        let e = embedder();
        assert_eq!(e.counter().count(), 0);
        e.embed_text(POSITIVE_GOAL).unwrap();
        e.embed_scene(&SceneDescriptor::clear(View::Bev)).unwrap();
        assert_eq!(e.counter().count(), 2);
    }
}
