//! Procedural corridor generation: straights, 90-degree turns and T-junction
//! pass-throughs chained into a polyline centerline.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Spacing of centerline samples in meters.
pub const CENTERLINE_STEP_M: f64 = 1.0;
/// Spacing of route waypoints in meters.
pub const WAYPOINT_STEP_M: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

/// Growable centerline with cumulative arc lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct Centerline {
    points: Vec<Point>,
    cum: Vec<f64>,
    /// Heading at the end of the generated corridor.
    end_heading: f64,
}

impl Centerline {
    pub fn new(start: Point, heading: f64) -> Self {
        Self {
            points: vec![start],
            cum: vec![0.0],
            end_heading: heading,
        }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn total_length(&self) -> f64 {
        *self.cum.last().unwrap()
    }

    fn push(&mut self, p: Point) {
        let last = *self.points.last().unwrap();
        let d = ((p.x - last.x).powi(2) + (p.y - last.y).powi(2)).sqrt();
        self.cum.push(self.total_length() + d);
        self.points.push(p);
    }

    /// Append one randomly shaped segment and return its arc length.
    ///
    /// Straights dominate; turns are quarter-circle arcs; a T-junction is a
    /// short straight followed by a sharper turn.
    pub fn extend_segment(&mut self, rng: &mut ChaCha8Rng) -> f64 {
        let before = self.total_length();
        match rng.gen_range(0..6u32) {
            0 | 1 | 2 => {
                let len = rng.gen_range(40.0..80.0);
                self.extend_straight(len);
            }
            3 | 4 => {
                let radius = rng.gen_range(9.0..14.0);
                let left = rng.gen_bool(0.5);
                self.extend_straight(rng.gen_range(10.0..25.0));
                self.extend_turn(radius, left);
            }
            _ => {
                // T-junction pass-through: stub straight, sharp corner, stub.
                let radius = rng.gen_range(8.0..10.0);
                let left = rng.gen_bool(0.5);
                self.extend_straight(rng.gen_range(6.0..12.0));
                self.extend_turn(radius, left);
                self.extend_straight(rng.gen_range(6.0..12.0));
            }
        }
        self.total_length() - before
    }

    pub fn extend_straight(&mut self, length: f64) {
        let (sin, cos) = self.end_heading.sin_cos();
        let steps = (length / CENTERLINE_STEP_M).round().max(1.0) as usize;
        let start = *self.points.last().unwrap();
        for i in 1..=steps {
            let d = i as f64 * CENTERLINE_STEP_M;
            self.push(Point {
                x: start.x + d * cos,
                y: start.y + d * sin,
            });
        }
    }

    /// Quarter-circle arc of the given radius, sampled at ~1 m arc length.
    pub fn extend_turn(&mut self, radius: f64, left: bool) {
        let arc_len = std::f64::consts::FRAC_PI_2 * radius;
        let steps = (arc_len / CENTERLINE_STEP_M).round().max(2.0) as usize;
        let sign = if left { 1.0 } else { -1.0 };
        let start = *self.points.last().unwrap();
        let h0 = self.end_heading;
        // Arc center sits perpendicular to the current heading.
        let cx = start.x - sign * radius * h0.sin();
        let cy = start.y + sign * radius * h0.cos();
        for i in 1..=steps {
            let phi = sign * std::f64::consts::FRAC_PI_2 * i as f64 / steps as f64;
            let h = h0 + phi;
            self.push(Point {
                x: cx + sign * radius * h.sin(),
                y: cy - sign * radius * h.cos(),
            });
        }
        self.end_heading = wrap_angle(h0 + sign * std::f64::consts::FRAC_PI_2);
    }

    /// Position at arc length `s`, clamped to the generated corridor.
    pub fn sample(&self, s: f64) -> Point {
        let s = s.clamp(0.0, self.total_length());
        let i = match self.cum.partition_point(|c| *c <= s) {
            0 => 0,
            i => i - 1,
        };
        if i + 1 >= self.points.len() {
            return *self.points.last().unwrap();
        }
        let seg = self.cum[i + 1] - self.cum[i];
        let t = if seg > 0.0 { (s - self.cum[i]) / seg } else { 0.0 };
        let a = self.points[i];
        let b = self.points[i + 1];
        Point {
            x: a.x + t * (b.x - a.x),
            y: a.y + t * (b.y - a.y),
        }
    }

    /// Tangent heading at arc length `s`.
    pub fn heading_at(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, self.total_length());
        let i = match self.cum.partition_point(|c| *c <= s) {
            0 => 0,
            i => (i - 1).min(self.points.len().saturating_sub(2)),
        };
        let a = self.points[i];
        let b = self.points[(i + 1).min(self.points.len() - 1)];
        (b.y - a.y).atan2(b.x - a.x)
    }

    /// World position of a Frenet coordinate. Positive `lat` is to the left
    /// of the travel direction.
    pub fn frenet_to_world(&self, s: f64, lat: f64) -> Point {
        let p = self.sample(s);
        let h = self.heading_at(s);
        Point {
            x: p.x - lat * h.sin(),
            y: p.y + lat * h.cos(),
        }
    }

    /// Project a world point onto the corridor near the hinted sample index.
    ///
    /// Returns (arc length, signed lateral offset, tangent heading, index).
    /// Positive lateral offset is to the left of the travel direction.
    pub fn project_near(&self, p: Point, hint: usize, window: usize) -> (f64, f64, f64, usize) {
        let lo = hint.saturating_sub(window);
        let hi = (hint + window).min(self.points.len().saturating_sub(2));
        let mut best_d2 = f64::INFINITY;
        let mut best = (0.0, 0.0, 0.0, lo);
        for i in lo..=hi {
            let a = self.points[i];
            let b = self.points[i + 1];
            let (dx, dy) = (b.x - a.x, b.y - a.y);
            let len2 = dx * dx + dy * dy;
            if len2 <= 0.0 {
                continue;
            }
            let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
            let qx = a.x + t * dx;
            let qy = a.y + t * dy;
            let d2 = (p.x - qx).powi(2) + (p.y - qy).powi(2);
            if d2 < best_d2 {
                best_d2 = d2;
                let cross = dx * (p.y - qy) - dy * (p.x - qx);
                let lat = if cross >= 0.0 { d2.sqrt() } else { -d2.sqrt() };
                best = (self.cum[i] + t * len2.sqrt(), lat, dy.atan2(dx), i);
            }
        }
        best
    }
}

pub fn wrap_angle(a: f64) -> f64 {
    let mut a = a % std::f64::consts::TAU;
    if a > std::f64::consts::PI {
        a -= std::f64::consts::TAU;
    } else if a < -std::f64::consts::PI {
        a += std::f64::consts::TAU;
    }
    a
}
