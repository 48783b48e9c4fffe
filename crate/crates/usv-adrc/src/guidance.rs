//! Waypoint guidance: fillet-style Dubins reference paths, arc-length
//! projection with forward search, an L1 lookahead heading law, and a
//! corner-aware surge setpoint.

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wrap_angle;

pub type Point = Vector2<f64>;

/// One path piece. Arcs carry a signed sweep (positive = counterclockwise).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Segment {
    Line {
        start: Point,
        end: Point,
    },
    Arc {
        center: Point,
        radius: f64,
        start_angle: f64,
        sweep: f64,
    },
}

impl Segment {
    pub fn length(&self) -> f64 {
        match self {
            Segment::Line { start, end } => (end - start).norm(),
            Segment::Arc { radius, sweep, .. } => radius * sweep.abs(),
        }
    }

    pub fn is_arc(&self) -> bool {
        matches!(self, Segment::Arc { .. })
    }

    /// Point and unit tangent at local arc length `s` (clamped to the segment).
    pub fn sample(&self, s: f64) -> (Point, Vector2<f64>) {
        match self {
            Segment::Line { start, end } => {
                let dir = (end - start).normalize();
                let s = s.clamp(0.0, (end - start).norm());
                (start + dir * s, dir)
            }
            Segment::Arc {
                center,
                radius,
                start_angle,
                sweep,
            } => {
                let s = s.clamp(0.0, radius * sweep.abs());
                let angle = start_angle + sweep.signum() * s / radius;
                let point = center + Vector2::new(angle.cos(), angle.sin()) * *radius;
                let tangent =
                    Vector2::new(-angle.sin(), angle.cos()) * sweep.signum();
                (point, tangent)
            }
        }
    }
}

/// Piecewise line/arc reference path with precomputed cumulative lengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DubinsPath {
    pub segments: Vec<Segment>,
    /// cumulative[i] = arc length at the *start* of segment i.
    cumulative: Vec<f64>,
    pub total_length: f64,
    pub turn_radius: f64,
    end_point: Point,
}

/// Per-step guidance command.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuidanceOutput {
    /// Heading setpoint (rad).
    pub psi_sp: f64,
    /// Surge setpoint (m/s).
    pub u_sp: f64,
    /// Signed lateral offset to the path (m, positive port of the tangent).
    pub y_err: f64,
    /// Local path tangent heading (rad).
    pub psi_traj: f64,
    /// Arc-length progress (m).
    pub s: f64,
    /// Vessel is within the capture radius of the final waypoint.
    pub complete: bool,
}

const COLLINEAR_EPS: f64 = 1e-9;

/// Build a fillet path through the waypoints: straight legs joined by
/// tangent arcs of the given radius at every turn.
pub fn build_path(waypoints: &[Point], turn_radius: f64) -> Result<DubinsPath> {
    if waypoints.len() < 2 {
        return Err(Error::Config("need at least 2 waypoints".into()));
    }
    if !(turn_radius > 0.0) {
        return Err(Error::Config("turn radius must be > 0".into()));
    }
    for (i, pair) in waypoints.windows(2).enumerate() {
        let d = (pair[1] - pair[0]).norm();
        if d <= 2.0 * turn_radius {
            return Err(Error::Geometry {
                index: i + 1,
                reason: format!(
                    "waypoints {} and {} are {d:.3} m apart; must exceed twice the turn radius ({:.3} m)",
                    i,
                    i + 1,
                    2.0 * turn_radius
                ),
            });
        }
    }

    let mut segments: Vec<Segment> = Vec::new();
    let mut cursor = waypoints[0];
    // distance already consumed on the incoming leg by the previous fillet
    let mut consumed_prev = 0.0;

    for i in 1..waypoints.len() - 1 {
        let prev = waypoints[i - 1];
        let here = waypoints[i];
        let next = waypoints[i + 1];
        let d_in = (here - prev).normalize();
        let d_out = (next - here).normalize();
        let turn = wrap_angle(d_out.y.atan2(d_out.x) - d_in.y.atan2(d_in.x));

        if turn.abs() < COLLINEAR_EPS {
            // collinear: the leg continues straight through this waypoint
            continue;
        }
        if (std::f64::consts::PI - turn.abs()).abs() < 1e-6 {
            return Err(Error::Geometry {
                index: i,
                reason: "path reverses direction; fillet arc undefined".into(),
            });
        }
        let tangent_len = turn_radius * (turn.abs() / 2.0).tan();
        let leg_in = (here - prev).norm();
        let leg_out = (next - here).norm();
        if tangent_len + consumed_prev >= leg_in || tangent_len >= leg_out {
            return Err(Error::Geometry {
                index: i,
                reason: format!(
                    "fillet tangent length {tangent_len:.3} m does not fit the adjacent legs \
                     ({leg_in:.3} m in, {leg_out:.3} m out)"
                ),
            });
        }

        let entry = here - d_in * tangent_len;
        let exit = here + d_out * tangent_len;
        if (entry - cursor).norm() > COLLINEAR_EPS {
            segments.push(Segment::Line {
                start: cursor,
                end: entry,
            });
        }
        // arc center sits perpendicular to the incoming direction, on the
        // inside of the turn
        let normal = Vector2::new(-d_in.y, d_in.x) * turn.signum();
        let center = entry + normal * turn_radius;
        let start_angle = {
            let v = entry - center;
            v.y.atan2(v.x)
        };
        segments.push(Segment::Arc {
            center,
            radius: turn_radius,
            start_angle,
            sweep: turn,
        });
        cursor = exit;
        consumed_prev = tangent_len;
    }

    let last = *waypoints.last().unwrap();
    if (last - cursor).norm() > COLLINEAR_EPS {
        segments.push(Segment::Line {
            start: cursor,
            end: last,
        });
    }
    if segments.is_empty() {
        return Err(Error::Geometry {
            index: waypoints.len() - 1,
            reason: "degenerate path with no length".into(),
        });
    }

    let mut cumulative = Vec::with_capacity(segments.len());
    let mut total = 0.0;
    for seg in &segments {
        cumulative.push(total);
        total += seg.length();
    }
    Ok(DubinsPath {
        segments,
        cumulative,
        total_length: total,
        turn_radius,
        end_point: last,
    })
}

impl DubinsPath {
    pub fn end_point(&self) -> Point {
        self.end_point
    }

    fn segment_start_s(&self, i: usize) -> f64 {
        self.cumulative[i]
    }

    /// Point and unit tangent at global arc length `s` (clamped to the path).
    pub fn sample(&self, s: f64) -> (Point, Vector2<f64>) {
        let s = s.clamp(0.0, self.total_length);
        let mut idx = match self
            .cumulative
            .binary_search_by(|start| start.partial_cmp(&s).unwrap())
        {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        };
        idx = idx.min(self.segments.len() - 1);
        self.segments[idx].sample(s - self.cumulative[idx])
    }

    /// Project `position` onto the path, searching forward from arc length
    /// `from_s` so progress never moves backwards. Returns
    /// (s, y_err, psi_traj) with y_err signed by the cross product of the
    /// tangent and the offset (positive to port of the tangent).
    pub fn project(&self, position: Point, from_s: f64) -> (f64, f64, f64) {
        let from_s = from_s.clamp(0.0, self.total_length);
        let mut best: Option<(f64, f64)> = None; // (dist2, s)
        for (i, seg) in self.segments.iter().enumerate() {
            let seg_start = self.segment_start_s(i);
            let seg_len = seg.length();
            if seg_start + seg_len < from_s {
                continue;
            }
            let lo = (from_s - seg_start).clamp(0.0, seg_len);
            let local = match seg {
                Segment::Line { start, end } => {
                    let dir = (end - start).normalize();
                    (position - start).dot(&dir).clamp(lo, seg_len)
                }
                Segment::Arc {
                    center,
                    radius,
                    start_angle,
                    sweep,
                } => {
                    let v = position - center;
                    if v.norm() < 1e-12 {
                        lo
                    } else {
                        // angular offset from the arc start toward the point,
                        // measured along the sweep direction
                        let theta = v.y.atan2(v.x);
                        let along = wrap_angle(theta - start_angle) * sweep.signum();
                        let along = if along < 0.0 {
                            // behind the start: closer around to start or end?
                            if along + std::f64::consts::TAU <= sweep.abs() {
                                along + std::f64::consts::TAU
                            } else if (along + std::f64::consts::TAU) - sweep.abs()
                                < -along
                            {
                                sweep.abs()
                            } else {
                                0.0
                            }
                        } else {
                            along.min(sweep.abs())
                        };
                        (along * radius).clamp(lo, seg_len)
                    }
                }
            };
            let (point, _) = seg.sample(local);
            let dist2 = (position - point).norm_squared();
            let s_here = seg_start + local;
            let better = match best {
                None => true,
                Some((d2, _)) => dist2 < d2 - 1e-12,
            };
            if better {
                best = Some((dist2, s_here));
            }
        }
        let (_, s) = best.unwrap_or((0.0, self.total_length));
        let (point, tangent) = self.sample(s);
        let offset = position - point;
        // magnitude is the full distance to the nearest point (the offset is
        // purely lateral except when clamped at a segment end), signed by
        // which side of the tangent the vehicle sits on
        let cross = tangent.x * offset.y - tangent.y * offset.x;
        let y_err = if cross >= 0.0 {
            offset.norm()
        } else {
            -offset.norm()
        };
        let psi_traj = tangent.y.atan2(tangent.x);
        (s, y_err, psi_traj)
    }

    /// L1 lookahead point: the first path point at straight-line distance
    /// `l1_dist` from the vehicle, searching forward from `s`. Falls back to
    /// the nearest point when the vehicle is farther than `l1_dist` from the
    /// path, and to the path end when the path runs out.
    pub fn l1_point(&self, position: Point, s: f64, l1_dist: f64) -> Point {
        let (origin, _) = self.sample(s);
        if (position - origin).norm() >= l1_dist {
            return origin;
        }
        let step = (l1_dist / 64.0).max(1e-3);
        let mut lo = s;
        let mut hi = s;
        loop {
            hi = (hi + step).min(self.total_length);
            let (p, _) = self.sample(hi);
            if (position - p).norm() >= l1_dist {
                break;
            }
            if hi >= self.total_length {
                return self.end_point;
            }
            lo = hi;
        }
        // bisect [lo, hi] to the crossing
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let (p, _) = self.sample(mid);
            if (position - p).norm() >= l1_dist {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        self.sample(hi).0
    }

    /// Heading setpoint: bearing from the vehicle to the L1 lookahead point.
    pub fn l1_heading(&self, position: Point, s: f64, l1_dist: f64) -> f64 {
        let target = self.l1_point(position, s, l1_dist);
        let d = target - position;
        if d.norm() < 1e-9 {
            // sitting on the target: hold the local tangent
            let (_, tangent) = self.sample(s);
            return tangent.y.atan2(tangent.x);
        }
        d.y.atan2(d.x)
    }

    /// Corner-aware surge setpoint: `mission_speed` on straights,
    /// `mission_speed * corner_factor` on arcs, blended linearly over
    /// `blend_dist` on the approach to and exit from every arc.
    pub fn surge_setpoint(
        &self,
        s: f64,
        mission_speed: f64,
        corner_factor: f64,
        blend_dist: f64,
    ) -> f64 {
        let v_corner = mission_speed * corner_factor;
        let dv = mission_speed - v_corner;
        if dv <= 0.0 || blend_dist <= 0.0 {
            return mission_speed;
        }
        let mut speed = mission_speed;
        for (i, seg) in self.segments.iter().enumerate() {
            if !seg.is_arc() {
                continue;
            }
            let a = self.segment_start_s(i);
            let b = a + seg.length();
            let dist = if s < a {
                a - s
            } else if s > b {
                s - b
            } else {
                0.0
            };
            let candidate = v_corner + dv * (dist / blend_dist).min(1.0);
            speed = speed.min(candidate);
        }
        speed
    }
}

/// Guidance parameters resolved from the scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuidanceParams {
    pub mission_speed: f64,
    pub corner_factor: f64,
    pub blend_dist: f64,
    pub l1_dist: f64,
    pub capture_radius: f64,
}

/// Stateful per-run guidance: owns the monotone projection progress.
#[derive(Debug, Clone)]
pub struct Guidance {
    pub path: DubinsPath,
    pub params: GuidanceParams,
    last_s: f64,
}

impl Guidance {
    pub fn new(path: DubinsPath, params: GuidanceParams) -> Self {
        Self {
            path,
            params,
            last_s: 0.0,
        }
    }

    pub fn step(&mut self, position: Point) -> GuidanceOutput {
        let (s, y_err, psi_traj) = self.path.project(position, self.last_s);
        self.last_s = s;
        let psi_sp = self.path.l1_heading(position, s, self.params.l1_dist);
        let u_sp = self.path.surge_setpoint(
            s,
            self.params.mission_speed,
            self.params.corner_factor,
            self.params.blend_dist,
        );
        let complete = (position - self.path.end_point()).norm() <= self.params.capture_radius;
        GuidanceOutput {
            psi_sp,
            u_sp,
            y_err,
            psi_traj,
            s,
            complete,
        }
    }
}

/// Parse a plain-text waypoint file: one `x y` pair per line (meters),
/// `#` comments and blank lines ignored.
pub fn parse_waypoints(text: &str) -> Result<Vec<Point>> {
    let mut points = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let parse = |tok: Option<&str>| -> Result<f64> {
            tok.ok_or_else(|| {
                Error::Config(format!("waypoint line {}: expected `x y`", lineno + 1))
            })?
            .parse::<f64>()
            .map_err(|e| Error::Config(format!("waypoint line {}: {e}", lineno + 1)))
        };
        let x = parse(parts.next())?;
        let y = parse(parts.next())?;
        if parts.next().is_some() {
            return Err(Error::Config(format!(
                "waypoint line {}: expected exactly two values",
                lineno + 1
            )));
        }
        points.push(Point::new(x, y));
    }
    if points.len() < 2 {
        return Err(Error::Config(
            "waypoint file must contain at least 2 waypoints".into(),
        ));
    }
    Ok(points)
}
