//! Scripted traffic agents living in corridor (Frenet) coordinates.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::embedding::AgentClass;

use super::route::Centerline;

/// Lateral offset of the oncoming lane centerline.
pub const ONCOMING_LAT: f64 = -3.5;
/// Lateral offset of the sidewalks.
pub const SIDEWALK_LAT: f64 = 3.25;
/// Lateral offset bicycles keep toward the lane edge.
pub const BICYCLE_LAT: f64 = 1.1;
/// Rate at which agents adjust lateral position, m/s.
const LAT_RATE: f64 = 1.5;

/// Collision footprint radius per class, meters.
pub fn collision_radius(class: AgentClass) -> f64 {
    match class {
        AgentClass::Vehicle => 1.0,
        AgentClass::Motorcycle | AgentClass::Bicycle => 0.6,
        AgentClass::Pedestrian => 0.35,
    }
}

/// Scripted behavior state of one traffic agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Behavior {
    /// Lane following with gap keeping; `dir` +1 travels with the route,
    /// -1 against it in the oncoming lane.
    LaneFollow { dir: f64, target_speed: f64, gap_m: f64, headway_s: f64 },
    /// Motorcycle with probabilistic cut-ins between the oncoming lane and
    /// the ego lane.
    CutIn {
        target_speed: f64,
        in_ego_lane: bool,
        /// Seconds left before reconsidering the lane choice.
        hold_s: f64,
    },
    /// Sidewalk random walk with Poisson-triggered road crossings.
    Walk {
        walk_speed: f64,
        dir: f64,
        /// Set while crossing: the lateral target on the far side.
        crossing_target: Option<f64>,
    },
}

impl Behavior {
    /// Stable policy id for logs.
    pub fn id(&self) -> &'static str {
        match self {
            Behavior::LaneFollow { .. } => "lane_follow",
            Behavior::CutIn { .. } => "cut_in",
            Behavior::Walk { .. } => "walk",
        }
    }
}

/// One traffic participant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficAgent {
    pub class: AgentClass,
    /// World pose derived from the Frenet coordinates each step.
    pub pose: (f64, f64, f64),
    /// Current speed along the travel direction, m/s.
    pub speed_mps: f64,
    pub behavior: Behavior,
    /// Arc-length position along the corridor.
    pub s: f64,
    /// Signed lateral offset from the corridor centerline.
    pub lat: f64,
    /// World velocity, updated alongside the pose.
    pub velocity: (f64, f64),
}

impl TrafficAgent {
    pub fn radius(&self) -> f64 {
        collision_radius(self.class)
    }

    /// Longitudinal direction of travel: +1 with the route, -1 against.
    pub fn travel_dir(&self) -> f64 {
        match &self.behavior {
            Behavior::LaneFollow { dir, .. } => *dir,
            Behavior::CutIn { .. } => 1.0,
            Behavior::Walk { dir, .. } => *dir,
        }
    }

    pub fn refresh_pose(&mut self, centerline: &Centerline) {
        let p = centerline.frenet_to_world(self.s, self.lat);
        let h = centerline.heading_at(self.s);
        self.pose = (p.x, p.y, h);
    }
}

/// Per-class traffic counts and behavior tunables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrafficConfig {
    pub vehicles: usize,
    pub pedestrians: usize,
    pub bicycles: usize,
    pub motorcycles: usize,
    /// Poisson rate of a pedestrian starting a road crossing, per second.
    pub crossing_rate_hz: f64,
    /// Poisson rate of a motorcycle reconsidering its lane, per second.
    pub cut_in_rate_hz: f64,
    /// Motorcycle following distance, meters.
    pub motorcycle_gap_m: f64,
    /// Half-width of the motorcycle speed variance band around the limit.
    pub motorcycle_speed_variance: f64,
    /// Bicycle cruise speed as a fraction of the speed limit.
    pub bicycle_speed_fraction: f64,
}

impl Default for TrafficConfig {
    fn default() -> Self {
        Self {
            vehicles: 20,
            pedestrians: 20,
            bicycles: 20,
            motorcycles: 20,
            crossing_rate_hz: 0.02,
            cut_in_rate_hz: 0.03,
            motorcycle_gap_m: 2.0,
            motorcycle_speed_variance: 0.3,
            bicycle_speed_fraction: 0.2,
        }
    }
}

impl TrafficConfig {
    pub fn total(&self) -> usize {
        self.vehicles + self.pedestrians + self.bicycles + self.motorcycles
    }
}

/// Sample the initial Frenet placement and behavior of agent `index`.
pub fn spawn_agent(
    index: usize,
    cfg: &TrafficConfig,
    speed_limit_mps: f64,
    ego_s: f64,
    rng: &mut ChaCha8Rng,
) -> TrafficAgent {
    let s = ego_s + rng.gen_range(15.0..280.0);
    let class_order = class_of_index(index, cfg);
    let (lat, speed, behavior) = match class_order {
        AgentClass::Vehicle => {
            let dir = if index % 2 == 0 { 1.0 } else { -1.0 };
            let lat = if dir > 0.0 { 0.0 } else { ONCOMING_LAT };
            let speed = speed_limit_mps * rng.gen_range(0.7..1.0);
            (
                lat,
                speed,
                Behavior::LaneFollow {
                    dir,
                    target_speed: speed_limit_mps,
                    gap_m: 6.0,
                    headway_s: 1.2,
                },
            )
        }
        AgentClass::Motorcycle => {
            let variance = cfg.motorcycle_speed_variance;
            let target = speed_limit_mps * (1.0 + rng.gen_range(-variance..variance));
            (
                0.0,
                target.min(speed_limit_mps * 1.3),
                Behavior::CutIn {
                    target_speed: target,
                    in_ego_lane: true,
                    hold_s: rng.gen_range(1.0..6.0),
                },
            )
        }
        AgentClass::Bicycle => (
            BICYCLE_LAT,
            speed_limit_mps * cfg.bicycle_speed_fraction,
            Behavior::LaneFollow {
                dir: 1.0,
                target_speed: speed_limit_mps * cfg.bicycle_speed_fraction,
                gap_m: 3.0,
                headway_s: 1.0,
            },
        ),
        AgentClass::Pedestrian => {
            let side = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let walk_speed = rng.gen_range(0.8..1.5);
            (
                side * SIDEWALK_LAT,
                walk_speed,
                Behavior::Walk {
                    walk_speed,
                    dir: if rng.gen_bool(0.5) { 1.0 } else { -1.0 },
                    crossing_target: None,
                },
            )
        }
    };
    TrafficAgent {
        class: class_order,
        pose: (0.0, 0.0, 0.0),
        speed_mps: speed,
        behavior,
        s,
        lat,
        velocity: (0.0, 0.0),
    }
}

/// Class of the agent at spawn slot `index`: vehicles first, then
/// pedestrians, motorcycles and bicycles.
pub fn class_of_index(index: usize, cfg: &TrafficConfig) -> AgentClass {
    if index < cfg.vehicles {
        AgentClass::Vehicle
    } else if index < cfg.vehicles + cfg.pedestrians {
        AgentClass::Pedestrian
    } else if index < cfg.vehicles + cfg.pedestrians + cfg.motorcycles {
        AgentClass::Motorcycle
    } else {
        AgentClass::Bicycle
    }
}

/// Snapshot of the ego used by gap keeping.
pub struct EgoView {
    pub s: f64,
    pub lat: f64,
    pub speed_mps: f64,
}

/// Advance agent `i` by `dt`, reading the previous-step positions of the
/// other agents and the ego for gap keeping.
#[allow(clippy::too_many_arguments)]
pub fn step_agent(
    agents: &mut [TrafficAgent],
    i: usize,
    dt: f64,
    speed_limit_mps: f64,
    cfg: &TrafficConfig,
    ego: &EgoView,
    centerline: &Centerline,
    rng: &mut ChaCha8Rng,
) {
    let (s, lat) = (agents[i].s, agents[i].lat);
    let behavior = agents[i].behavior.clone();
    let speed = agents[i].speed_mps;

    let (new_s, new_lat, new_speed, new_behavior) = match behavior {
        Behavior::LaneFollow {
            dir,
            target_speed,
            gap_m,
            headway_s,
        } => {
            let gap = leader_gap(agents, i, dir, ego);
            let speed = follow_speed(speed, target_speed, gap, gap_m, headway_s, dt);
            (
                s + dir * speed * dt,
                lat,
                speed,
                Behavior::LaneFollow {
                    dir,
                    target_speed,
                    gap_m,
                    headway_s,
                },
            )
        }
        Behavior::CutIn {
            target_speed,
            mut in_ego_lane,
            mut hold_s,
        } => {
            hold_s -= dt;
            if hold_s <= 0.0 {
                // Poisson-style reconsideration once the hold expires.
                if rng.gen::<f64>() < cfg.cut_in_rate_hz * dt * 20.0 {
                    in_ego_lane = !in_ego_lane;
                }
                hold_s = rng.gen_range(0.5..2.0);
            }
            let target_lat = if in_ego_lane { 0.0 } else { ONCOMING_LAT };
            let lat = approach(lat, target_lat, LAT_RATE * dt);
            let gap = leader_gap(agents, i, 1.0, ego);
            let speed = follow_speed(speed, target_speed, gap, cfg.motorcycle_gap_m, 0.6, dt);
            (
                s + speed * dt,
                lat,
                speed,
                Behavior::CutIn {
                    target_speed,
                    in_ego_lane,
                    hold_s,
                },
            )
        }
        Behavior::Walk {
            walk_speed,
            mut dir,
            mut crossing_target,
        } => {
            let mut new_s = s;
            let mut new_lat = lat;
            match crossing_target {
                Some(target) => {
                    new_lat = approach(lat, target, walk_speed * dt);
                    if (new_lat - target).abs() < 1e-9 {
                        crossing_target = None;
                    }
                }
                None => {
                    if rng.gen::<f64>() < cfg.crossing_rate_hz * dt {
                        crossing_target = Some(-lat.signum() * SIDEWALK_LAT);
                    } else {
                        if rng.gen::<f64>() < 0.02 * dt {
                            dir = -dir;
                        }
                        new_s = s + dir * walk_speed * dt;
                    }
                }
            }
            (
                new_s,
                new_lat,
                walk_speed,
                Behavior::Walk {
                    walk_speed,
                    dir,
                    crossing_target,
                },
            )
        }
    };

    let agent = &mut agents[i];
    let old_pose = agent.pose;
    agent.s = new_s;
    agent.lat = new_lat;
    agent.speed_mps = new_speed.clamp(0.0, speed_limit_mps * 1.3);
    agent.behavior = new_behavior;
    agent.refresh_pose(centerline);
    agent.velocity = (
        (agent.pose.0 - old_pose.0) / dt,
        (agent.pose.1 - old_pose.1) / dt,
    );
}

/// Distance to the nearest agent or ego ahead in the same lane corridor.
fn leader_gap(agents: &[TrafficAgent], i: usize, dir: f64, ego: &EgoView) -> f64 {
    let me = &agents[i];
    let mut gap = f64::INFINITY;
    for (j, other) in agents.iter().enumerate() {
        if j == i || (other.lat - me.lat).abs() > 1.5 {
            continue;
        }
        let ahead = dir * (other.s - me.s);
        if ahead > 0.0 {
            gap = gap.min(ahead);
        }
    }
    if (ego.lat - me.lat).abs() <= 1.5 {
        let ahead = dir * (ego.s - me.s);
        if ahead > 0.0 {
            gap = gap.min(ahead);
        }
    }
    gap
}

/// Speed controller: track the target but never outrun the stopping gap.
fn follow_speed(speed: f64, target: f64, gap: f64, gap_min: f64, headway_s: f64, dt: f64) -> f64 {
    let safe = ((gap - gap_min) / headway_s).max(0.0);
    let desired = target.min(safe);
    let accel = (desired - speed).clamp(-6.0 * dt, 2.5 * dt);
    (speed + accel).max(0.0)
}

fn approach(value: f64, target: f64, max_step: f64) -> f64 {
    if (target - value).abs() <= max_step {
        target
    } else {
        value + (target - value).signum() * max_step
    }
}
