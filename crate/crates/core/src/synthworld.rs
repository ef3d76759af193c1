//! Deterministic 2-D synthetic environments and robot sensing.
//!
//! An [`Arena`] is a rectangle of patterned walls plus circular and convex
//! polygonal landmarks, each either tactile-only (invisible to the camera)
//! or visuo-tactile. The robot carries a fan of vision rays and a fan of
//! short whisker rays; both are sampled by exact ray casting, so a fixed
//! seed reproduces every observation bit for bit.
//!
//! The three presets mirror a classic experiment design: `E1` is a
//! visually aliased square room whose four identical corner landmarks
//! alias tactilely as well; `E2` adds free-standing tactile-only landmarks
//! and an asymmetric central rock; `E3` surrounds the rock with an
//! unbroken ring of overlapping tactile-only circles.

use crate::pcnet::SensorySample;
use ndarray::Array1;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WorldError {
    #[error("pose ({x:.3}, {y:.3}) is outside the arena bounds")]
    PoseOutOfBounds { x: f64, y: f64 },
    #[error("a trajectory needs at least two waypoints")]
    TooFewWaypoints,
    #[error("trajectory step length must be > 0")]
    BadStepLength,
    #[error("waypoints describe a zero-length path")]
    DegeneratePath,
    #[error("invalid scene: {0}")]
    InvalidScene(String),
}

/// Periodic 1-D intensity function painted along a surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pattern {
    pub base: f64,
    pub amplitude: f64,
    /// Spatial period in meters along the surface.
    pub period: f64,
    pub phase: f64,
}

impl Pattern {
    pub fn value(&self, arc: f64) -> f64 {
        let v = self.base + self.amplitude * (2.0 * PI * arc / self.period + self.phase).sin();
        v.clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wall {
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub pattern: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LandmarkShape {
    Circle { center: [f64; 2], radius: f64 },
    Polygon { vertices: Vec<[f64; 2]> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Landmark {
    pub shape: LandmarkShape,
    /// Tactile-only landmarks are felt by whiskers but invisible to rays.
    pub tactile_only: bool,
    pub pattern: u32,
}

/// Axis-aligned rectangle, min corner to max corner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Rect {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.min[0] && x <= self.max[0] && y >= self.min[1] && y <= self.max[1]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Arena {
    pub bounds: Rect,
    pub walls: Vec<Wall>,
    pub landmarks: Vec<Landmark>,
    pub patterns: BTreeMap<u32, Pattern>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    /// Heading in radians, kept in (−π, π].
    pub theta: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Pose { x, y, theta: wrap_angle(theta) }
    }

    pub fn position_distance(&self, other: &Pose) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }
}

/// Wrap an angle into (−π, π].
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// The robot's sensor suite.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorRig {
    pub n_rays: usize,
    /// Field of view of the vision fan, centered on the heading.
    pub fov: f64,
    pub max_view_range: f64,
    /// 1/(1+d) distance attenuation on hit intensities; off = pattern only.
    pub distance_attenuation: bool,
    pub n_whiskers: usize,
    pub whisker_length: f64,
    pub visual_noise_sigma: f64,
    pub whisker_noise_sigma: f64,
}

impl Default for SensorRig {
    fn default() -> Self {
        SensorRig {
            n_rays: 60,
            fov: 2.0 * PI / 3.0,
            max_view_range: 8.0,
            distance_attenuation: true,
            n_whiskers: 24,
            whisker_length: 0.25,
            visual_noise_sigma: 0.02,
            whisker_noise_sigma: 0.01,
        }
    }
}

/// One time step of paired sensing with its ground-truth pose.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub visual: Vec<f64>,
    pub tactile: Vec<f64>,
    /// Whisker contact points in the robot frame.
    pub contacts: Vec<[f64; 2]>,
    pub pose: Pose,
    pub trajectory_tag: String,
}

impl From<&Observation> for SensorySample {
    fn from(obs: &Observation) -> Self {
        SensorySample::new(
            Array1::from_vec(obs.visual.clone()),
            Array1::from_vec(obs.tactile.clone()),
        )
    }
}

// ---------------------------------------------------------------------------
// Ray casting
// ---------------------------------------------------------------------------

fn cross(ax: f64, ay: f64, bx: f64, by: f64) -> f64 {
    ax * by - ay * bx
}

/// Ray/segment intersection: returns (t, u) with hit = origin + t·dir,
/// t ≥ 0 and u ∈ [0, 1] along the segment.
fn ray_segment(origin: [f64; 2], dir: [f64; 2], a: [f64; 2], b: [f64; 2]) -> Option<(f64, f64)> {
    let sx = b[0] - a[0];
    let sy = b[1] - a[1];
    let denom = cross(dir[0], dir[1], sx, sy);
    if denom.abs() < 1e-15 {
        return None;
    }
    let qx = a[0] - origin[0];
    let qy = a[1] - origin[1];
    let t = cross(qx, qy, sx, sy) / denom;
    let u = cross(qx, qy, dir[0], dir[1]) / denom;
    if t >= 0.0 && (0.0..=1.0).contains(&u) {
        Some((t, u))
    } else {
        None
    }
}

/// Smallest t ≥ 0 where the ray meets the circle (exit point if the origin
/// is inside).
fn ray_circle(origin: [f64; 2], dir: [f64; 2], center: [f64; 2], radius: f64) -> Option<f64> {
    let ox = origin[0] - center[0];
    let oy = origin[1] - center[1];
    let b = dir[0] * ox + dir[1] * oy;
    let c = ox * ox + oy * oy - radius * radius;
    let disc = b * b - c;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let t1 = -b - sq;
    if t1 >= 0.0 {
        return Some(t1);
    }
    let t2 = -b + sq;
    if t2 >= 0.0 {
        return Some(t2);
    }
    None
}

struct Hit {
    distance: f64,
    /// Arc-length coordinate on the surface, for pattern lookup.
    arc: f64,
    pattern: u32,
}

fn cast_wall(origin: [f64; 2], dir: [f64; 2], wall: &Wall) -> Option<Hit> {
    ray_segment(origin, dir, wall.a, wall.b).map(|(t, u)| {
        let len = ((wall.b[0] - wall.a[0]).powi(2) + (wall.b[1] - wall.a[1]).powi(2)).sqrt();
        Hit { distance: t, arc: u * len, pattern: wall.pattern }
    })
}

fn cast_landmark(origin: [f64; 2], dir: [f64; 2], lm: &Landmark) -> Option<Hit> {
    match &lm.shape {
        LandmarkShape::Circle { center, radius } => {
            ray_circle(origin, dir, *center, *radius).map(|t| {
                let hx = origin[0] + t * dir[0] - center[0];
                let hy = origin[1] + t * dir[1] - center[1];
                let arc = radius * hy.atan2(hx).rem_euclid(2.0 * PI);
                Hit { distance: t, arc, pattern: lm.pattern }
            })
        }
        LandmarkShape::Polygon { vertices } => {
            let mut best: Option<Hit> = None;
            let mut perimeter = 0.0;
            for i in 0..vertices.len() {
                let a = vertices[i];
                let b = vertices[(i + 1) % vertices.len()];
                let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
                if let Some((t, u)) = ray_segment(origin, dir, a, b) {
                    if best.as_ref().map_or(true, |h| t < h.distance) {
                        best = Some(Hit { distance: t, arc: perimeter + u * len, pattern: lm.pattern });
                    }
                }
                perimeter += len;
            }
            best
        }
    }
}

fn nearest_hit(
    arena: &Arena,
    origin: [f64; 2],
    dir: [f64; 2],
    max_range: f64,
    include_tactile_only: bool,
) -> Option<Hit> {
    let mut best: Option<Hit> = None;
    let mut consider = |hit: Option<Hit>| {
        if let Some(h) = hit {
            if h.distance <= max_range && best.as_ref().map_or(true, |b| h.distance < b.distance) {
                best = Some(h);
            }
        }
    };
    for wall in &arena.walls {
        consider(cast_wall(origin, dir, wall));
    }
    for lm in &arena.landmarks {
        if lm.tactile_only && !include_tactile_only {
            continue;
        }
        consider(cast_landmark(origin, dir, lm));
    }
    best
}

fn maybe_noise(rng: &mut ChaCha8Rng, sigma: f64) -> f64 {
    if sigma > 0.0 {
        Normal::new(0.0, sigma).expect("sigma checked > 0").sample(rng)
    } else {
        0.0
    }
}

// ---------------------------------------------------------------------------
// Sensing
// ---------------------------------------------------------------------------

/// Render the 1-D intensity profile seen from a pose.
///
/// Rays are spread uniformly over the field of view with a mid-bin
/// convention (ray i sits at (i + ½)/n of the fov), hit the nearest wall
/// or visible landmark within range, and read the surface pattern at the
/// hit's arc-length coordinate, attenuated by 1/(1+d). Misses read 0.
pub fn render_visual(
    arena: &Arena,
    pose: &Pose,
    rig: &SensorRig,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>, WorldError> {
    if !arena.bounds.contains(pose.x, pose.y) {
        return Err(WorldError::PoseOutOfBounds { x: pose.x, y: pose.y });
    }
    let origin = [pose.x, pose.y];
    let mut out = Vec::with_capacity(rig.n_rays);
    for i in 0..rig.n_rays {
        let bearing =
            pose.theta - rig.fov / 2.0 + (i as f64 + 0.5) * rig.fov / rig.n_rays as f64;
        let dir = [bearing.cos(), bearing.sin()];
        let mut value = match nearest_hit(arena, origin, dir, rig.max_view_range, false) {
            Some(hit) => {
                let pattern = arena.patterns.get(&hit.pattern).copied().unwrap_or(Pattern {
                    base: 0.5,
                    amplitude: 0.0,
                    period: 1.0,
                    phase: 0.0,
                });
                let atten =
                    if rig.distance_attenuation { 1.0 / (1.0 + hit.distance) } else { 1.0 };
                pattern.value(hit.arc) * atten
            }
            None => 0.0,
        };
        value += maybe_noise(rng, rig.visual_noise_sigma);
        out.push(value.clamp(0.0, 1.0));
    }
    Ok(out)
}

/// Sample the whisker fan: deflection magnitudes in [0, 1] and contact
/// points in the robot frame.
///
/// Whisker bearings span ±π/2 around the heading, endpoints included. A
/// whisker that meets any wall or landmark (tactile-only included) at
/// distance d < whisker length deflects by (L − d)/L.
pub fn sense_whiskers(
    arena: &Arena,
    pose: &Pose,
    rig: &SensorRig,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<f64>, Vec<[f64; 2]>), WorldError> {
    if !arena.bounds.contains(pose.x, pose.y) {
        return Err(WorldError::PoseOutOfBounds { x: pose.x, y: pose.y });
    }
    let origin = [pose.x, pose.y];
    let mut deflections = Vec::with_capacity(rig.n_whiskers);
    let mut contacts = Vec::new();
    for j in 0..rig.n_whiskers {
        let rel = if rig.n_whiskers == 1 {
            0.0
        } else {
            -PI / 2.0 + j as f64 * PI / (rig.n_whiskers - 1) as f64
        };
        let bearing = pose.theta + rel;
        let dir = [bearing.cos(), bearing.sin()];
        let mut deflection = 0.0;
        if let Some(hit) = nearest_hit(arena, origin, dir, rig.whisker_length, true) {
            if hit.distance < rig.whisker_length {
                deflection = (rig.whisker_length - hit.distance) / rig.whisker_length;
                // world hit point, then into the robot frame
                let hx = origin[0] + hit.distance * dir[0] - pose.x;
                let hy = origin[1] + hit.distance * dir[1] - pose.y;
                let (s, c) = pose.theta.sin_cos();
                contacts.push([c * hx + s * hy, -s * hx + c * hy]);
            }
        }
        deflection += maybe_noise(rng, rig.whisker_noise_sigma);
        deflections.push(deflection.clamp(0.0, 1.0));
    }
    Ok((deflections, contacts))
}

// ---------------------------------------------------------------------------
// Trajectories and datasets
// ---------------------------------------------------------------------------

/// Walk the waypoint polyline at fixed arc-length steps, heading along the
/// motion direction, with independent Gaussian noise per pose. The final
/// waypoint is always included.
pub fn generate_trajectory(
    waypoints: &[Pose],
    step_length: f64,
    noise: (f64, f64),
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Pose>, WorldError> {
    if waypoints.len() < 2 {
        return Err(WorldError::TooFewWaypoints);
    }
    if !(step_length > 0.0) {
        return Err(WorldError::BadStepLength);
    }

    struct Leg {
        start: [f64; 2],
        dir: [f64; 2],
        heading: f64,
        cum_start: f64,
        len: f64,
    }
    let mut legs = Vec::new();
    let mut total = 0.0;
    for pair in waypoints.windows(2) {
        let dx = pair[1].x - pair[0].x;
        let dy = pair[1].y - pair[0].y;
        let len = (dx * dx + dy * dy).sqrt();
        if len == 0.0 {
            continue;
        }
        legs.push(Leg {
            start: [pair[0].x, pair[0].y],
            dir: [dx / len, dy / len],
            heading: dy.atan2(dx),
            cum_start: total,
            len,
        });
        total += len;
    }
    if legs.is_empty() {
        return Err(WorldError::DegeneratePath);
    }

    let mut arcs: Vec<f64> = Vec::new();
    let mut s = 0.0;
    while s <= total + 1e-12 {
        arcs.push(s.min(total));
        s += step_length;
    }
    if total - arcs.last().unwrap() > 1e-9 {
        arcs.push(total);
    }

    let (sigma_pos, sigma_theta) = noise;
    let mut poses = Vec::with_capacity(arcs.len());
    for s in arcs {
        let leg = legs
            .iter()
            .rev()
            .find(|l| s >= l.cum_start - 1e-12)
            .expect("arc position inside path");
        let along = (s - leg.cum_start).clamp(0.0, leg.len);
        let mut x = leg.start[0] + along * leg.dir[0];
        let mut y = leg.start[1] + along * leg.dir[1];
        let mut theta = leg.heading;
        x += maybe_noise(rng, sigma_pos);
        y += maybe_noise(rng, sigma_pos);
        theta = wrap_angle(theta + maybe_noise(rng, sigma_theta));
        poses.push(Pose { x, y, theta });
    }
    Ok(poses)
}

/// Render both modalities at every pose of a trajectory.
///
/// The sensor noise stream is split per observation: observation i uses
/// stream i of a counter-based RNG seeded with `sensor_seed`, so datasets
/// are bit-identical regardless of evaluation order.
pub fn build_dataset(
    arena: &Arena,
    trajectory: &[Pose],
    rig: &SensorRig,
    sensor_seed: u64,
    tag: &str,
) -> Result<Vec<Observation>, WorldError> {
    let mut out = Vec::with_capacity(trajectory.len());
    for (i, pose) in trajectory.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(sensor_seed);
        rng.set_stream(i as u64);
        let visual = render_visual(arena, pose, rig, &mut rng)?;
        let (tactile, contacts) = sense_whiskers(arena, pose, rig, &mut rng)?;
        out.push(Observation {
            visual,
            tactile,
            contacts,
            pose: *pose,
            trajectory_tag: tag.to_string(),
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

/// Environment presets with increasing tactile landmark density.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvKind {
    E1,
    E2,
    E3,
}

impl EnvKind {
    pub fn name(self) -> &'static str {
        match self {
            EnvKind::E1 => "E1",
            EnvKind::E2 => "E2",
            EnvKind::E3 => "E3",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "E1" | "e1" => Some(EnvKind::E1),
            "E2" | "e2" => Some(EnvKind::E2),
            "E3" | "e3" => Some(EnvKind::E3),
            _ => None,
        }
    }
}

pub const ARENA_SIDE: f64 = 6.0;

/// Default square patrol loop used by the data generator; shared by all
/// three presets so runs stay pose-aligned across environments.
pub fn default_waypoints() -> Vec<Pose> {
    [(1.2, 1.2), (4.8, 1.2), (4.8, 4.8), (1.2, 4.8), (1.2, 1.2)]
        .iter()
        .map(|&(x, y)| Pose::new(x, y, 0.0))
        .collect()
}

fn circle(center: [f64; 2], radius: f64, tactile_only: bool, pattern: u32) -> Landmark {
    Landmark { shape: LandmarkShape::Circle { center, radius }, tactile_only, pattern }
}

/// Build one of the three preset arenas.
///
/// E1: four walls share one repeating pattern (visual aliasing by
/// construction) and four identical visuo-tactile corner landmarks with a
/// constant pattern keep the scene exactly 4-fold symmetric. E2 adds six
/// free-standing tactile-only circles at asymmetric positions and an
/// asymmetric convex rock in the center. E3 further adds a closed ring of
/// fourteen overlapping tactile-only circles around the rock.
pub fn preset_environment(kind: EnvKind) -> Arena {
    let s = ARENA_SIDE;
    let mut patterns = BTreeMap::new();
    patterns.insert(0, Pattern { base: 0.55, amplitude: 0.35, period: 1.6, phase: 0.3 });
    patterns.insert(1, Pattern { base: 0.7, amplitude: 0.0, period: 1.0, phase: 0.0 });

    // Counter-clockwise wall order so the 90° scene rotation maps each
    // wall's arc coordinate onto the next wall exactly.
    let walls = vec![
        Wall { a: [0.0, 0.0], b: [s, 0.0], pattern: 0 },
        Wall { a: [s, 0.0], b: [s, s], pattern: 0 },
        Wall { a: [s, s], b: [0.0, s], pattern: 0 },
        Wall { a: [0.0, s], b: [0.0, 0.0], pattern: 0 },
    ];

    let mut landmarks = vec![
        circle([0.8, 0.8], 0.4, false, 1),
        circle([5.2, 0.8], 0.4, false, 1),
        circle([5.2, 5.2], 0.4, false, 1),
        circle([0.8, 5.2], 0.4, false, 1),
    ];

    if kind != EnvKind::E1 {
        landmarks.push(circle([2.0, 0.94], 0.18, true, 0));
        landmarks.push(circle([4.2, 1.50], 0.25, true, 0));
        landmarks.push(circle([5.06, 2.40], 0.18, true, 0));
        landmarks.push(circle([4.55, 3.60], 0.20, true, 0));
        landmarks.push(circle([3.4, 5.06], 0.18, true, 0));
        landmarks.push(circle([0.95, 3.10], 0.22, true, 0));

        // Asymmetric convex rock at the arena center.
        let spec: [(f64, f64); 6] =
            [(0.0, 0.60), (55.0, 0.52), (110.0, 0.56), (170.0, 0.50), (230.0, 0.58), (300.0, 0.48)];
        let vertices = spec
            .iter()
            .map(|&(deg, r)| {
                let a = deg.to_radians();
                [3.0 + r * a.cos(), 3.0 + r * a.sin()]
            })
            .collect();
        landmarks.push(Landmark {
            shape: LandmarkShape::Polygon { vertices },
            tactile_only: true,
            pattern: 0,
        });
    }

    if kind == EnvKind::E3 {
        let n = 14;
        for k in 0..n {
            let a = 2.0 * PI * k as f64 / n as f64;
            landmarks.push(circle([3.0 + 1.35 * a.cos(), 3.0 + 1.35 * a.sin()], 0.35, true, 0));
        }
    }

    Arena {
        bounds: Rect { min: [0.0, 0.0], max: [s, s] },
        walls,
        landmarks,
        patterns,
    }
}

// ---------------------------------------------------------------------------
// Scene text format
// ---------------------------------------------------------------------------

fn flag(b: bool) -> u8 {
    b as u8
}

/// Serialize an arena to the plain-text scene format: one primitive per
/// line (`bounds`, `pattern`, `wall`, `circle`, `poly`), `#` comments
/// allowed. Landmark lines may carry a trailing pattern id; it defaults
/// to 0 when absent.
pub fn arena_to_scene(arena: &Arena) -> String {
    let mut out = String::from("# scene v1\n");
    out.push_str(&format!(
        "bounds {} {} {} {}\n",
        arena.bounds.min[0], arena.bounds.min[1], arena.bounds.max[0], arena.bounds.max[1]
    ));
    for (id, p) in &arena.patterns {
        out.push_str(&format!("pattern {} {} {} {} {}\n", id, p.base, p.amplitude, p.period, p.phase));
    }
    for w in &arena.walls {
        out.push_str(&format!("wall {} {} {} {} {}\n", w.a[0], w.a[1], w.b[0], w.b[1], w.pattern));
    }
    for lm in &arena.landmarks {
        match &lm.shape {
            LandmarkShape::Circle { center, radius } => {
                out.push_str(&format!(
                    "circle {} {} {} {} {}\n",
                    center[0], center[1], radius, flag(lm.tactile_only), lm.pattern
                ));
            }
            LandmarkShape::Polygon { vertices } => {
                out.push_str(&format!("poly {}", vertices.len()));
                for v in vertices {
                    out.push_str(&format!(" {} {}", v[0], v[1]));
                }
                out.push_str(&format!(" {} {}\n", flag(lm.tactile_only), lm.pattern));
            }
        }
    }
    out
}

/// Parse the scene text format produced by [`arena_to_scene`].
pub fn arena_from_scene(text: &str) -> Result<Arena, WorldError> {
    let bad = |line: usize, msg: &str| WorldError::InvalidScene(format!("line {}: {}", line + 1, msg));
    let mut bounds: Option<Rect> = None;
    let mut walls = Vec::new();
    let mut landmarks = Vec::new();
    let mut patterns = BTreeMap::new();

    for (ln, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let f = |i: usize| -> Result<f64, WorldError> {
            tokens
                .get(i)
                .ok_or_else(|| bad(ln, "missing field"))?
                .parse::<f64>()
                .map_err(|_| bad(ln, "bad number"))
        };
        let u = |i: usize| -> Result<u32, WorldError> {
            tokens
                .get(i)
                .ok_or_else(|| bad(ln, "missing field"))?
                .parse::<u32>()
                .map_err(|_| bad(ln, "bad integer"))
        };
        match tokens[0] {
            "bounds" => {
                bounds = Some(Rect { min: [f(1)?, f(2)?], max: [f(3)?, f(4)?] });
            }
            "pattern" => {
                patterns.insert(
                    u(1)?,
                    Pattern { base: f(2)?, amplitude: f(3)?, period: f(4)?, phase: f(5)? },
                );
            }
            "wall" => {
                walls.push(Wall { a: [f(1)?, f(2)?], b: [f(3)?, f(4)?], pattern: u(5)? });
            }
            "circle" => {
                let tactile_only = u(4)? != 0;
                let pattern = if tokens.len() > 5 { u(5)? } else { 0 };
                landmarks.push(Landmark {
                    shape: LandmarkShape::Circle { center: [f(1)?, f(2)?], radius: f(3)? },
                    tactile_only,
                    pattern,
                });
            }
            "poly" => {
                let n = u(1)? as usize;
                if n < 3 {
                    return Err(bad(ln, "polygon needs at least 3 vertices"));
                }
                let mut vertices = Vec::with_capacity(n);
                for k in 0..n {
                    vertices.push([f(2 + 2 * k)?, f(3 + 2 * k)?]);
                }
                let ti = 2 + 2 * n;
                let tactile_only = u(ti)? != 0;
                let pattern = if tokens.len() > ti + 1 { u(ti + 1)? } else { 0 };
                landmarks.push(Landmark {
                    shape: LandmarkShape::Polygon { vertices },
                    tactile_only,
                    pattern,
                });
            }
            other => return Err(bad(ln, &format!("unknown primitive `{other}`"))),
        }
    }

    let bounds = bounds.ok_or_else(|| WorldError::InvalidScene("missing bounds line".into()))?;
    let arena = Arena { bounds, walls, landmarks, patterns };
    validate_arena(&arena)?;
    Ok(arena)
}

pub fn validate_arena(arena: &Arena) -> Result<(), WorldError> {
    let err = |msg: String| Err(WorldError::InvalidScene(msg));
    if !(arena.bounds.max[0] > arena.bounds.min[0] && arena.bounds.max[1] > arena.bounds.min[1]) {
        return err("bounds rectangle is degenerate".into());
    }
    for (i, w) in arena.walls.iter().enumerate() {
        if w.a == w.b {
            return err(format!("wall {i} is degenerate"));
        }
    }
    for (i, lm) in arena.landmarks.iter().enumerate() {
        match &lm.shape {
            LandmarkShape::Circle { radius, .. } if !(*radius > 0.0) => {
                return err(format!("landmark {i} has non-positive radius"));
            }
            LandmarkShape::Polygon { vertices } if vertices.len() < 3 => {
                return err(format!("landmark {i} has fewer than 3 vertices"));
            }
            _ => {}
        }
    }
    for (id, p) in &arena.patterns {
        if !(p.period > 0.0) {
            return err(format!("pattern {id} has non-positive period"));
        }
    }
    Ok(())
}
