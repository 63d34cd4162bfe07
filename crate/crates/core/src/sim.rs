//! Deterministic world model: procedural obstacle maps, a ray-cast point
//! cloud sensor and bounding-box collision checks.

use std::f64::consts::PI;
use std::path::Path;

use nalgebra::{Isometry3, Point3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::grid::{CloudPoint, PointCloud};

#[derive(Debug, thiserror::Error)]
pub enum MapError {
    #[error("cannot place {requested} obstacles: gave up after {placed} ({retries} retries)")]
    InfeasibleDensity {
        requested: usize,
        placed: usize,
        retries: usize,
    },
    #[error("density must be non-negative, got {0}")]
    NegativeDensity(f64),
    #[error("cannot read map {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed map: {0}")]
    Parse(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Obstacle {
    /// Vertical cylinder standing on `z = 0`.
    Cylinder {
        center: [f64; 2],
        radius: f64,
        height: f64,
    },
    /// Axis-aligned box.
    Box {
        center: [f64; 3],
        half_extents: [f64; 3],
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl Bounds {
    pub fn area(&self) -> f64 {
        (self.max[0] - self.min[0]) * (self.max[1] - self.min[1])
    }

    pub fn contains(&self, p: &Point3<f64>) -> bool {
        (0..3).all(|i| p[i] >= self.min[i] && p[i] <= self.max[i])
    }
}

/// Obstacles plus an optional start pose and goal sequence. With `ground`
/// set, the plane `z = bounds.min.z` is solid and visible to the sensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldMap {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub bounds: Bounds,
    pub seed: u64,
    #[serde(default)]
    pub ground: bool,
    pub obstacles: Vec<Obstacle>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub goals: Vec<[f64; 3]>,
}

impl WorldMap {
    pub fn empty(bounds: Bounds) -> Self {
        Self {
            name: None,
            bounds,
            seed: 0,
            ground: false,
            obstacles: Vec::new(),
            start: None,
            goals: Vec::new(),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, MapError> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|source| MapError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(serde_json::from_slice(&bytes)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("map serializes")
    }

    /// Whether a yaw-rotated box of the given half extents (length, width,
    /// height) centered at `position` touches an obstacle or the ground.
    pub fn collides(&self, position: &Point3<f64>, yaw: f64, half: [f64; 3]) -> bool {
        let [hl, hw, hh] = half;
        if self.ground && position.z - hh < self.bounds.min[2] {
            return true;
        }
        let (s, c) = yaw.sin_cos();
        self.obstacles.iter().any(|ob| match *ob {
            Obstacle::Cylinder {
                center,
                radius,
                height,
            } => {
                if position.z + hh < 0.0 || position.z - hh > height {
                    return false;
                }
                let dx = center[0] - position.x;
                let dy = center[1] - position.y;
                let qx = c * dx + s * dy;
                let qy = -s * dx + c * dy;
                let ex = (qx.abs() - hl).max(0.0);
                let ey = (qy.abs() - hw).max(0.0);
                ex * ex + ey * ey < radius * radius
            }
            Obstacle::Box {
                center,
                half_extents,
            } => {
                // separating axes: world x, world y, robot forward, robot left, z
                let [ax, ay, az] = half_extents;
                let dx = position.x - center[0];
                let dy = position.y - center[1];
                let (ca, sa) = (c.abs(), s.abs());
                (position.z - center[2]).abs() < hh + az
                    && dx.abs() < ax + hl * ca + hw * sa
                    && dy.abs() < ay + hl * sa + hw * ca
                    && (c * dx + s * dy).abs() < hl + ax * ca + ay * sa
                    && (-s * dx + c * dy).abs() < hw + ax * sa + ay * ca
            }
        })
    }

    /// Nearest intersection with an obstacle or the ground plane along a
    /// world-frame ray, if any.
    pub fn raycast(&self, origin: &Point3<f64>, dir: &Vector3<f64>) -> Option<f64> {
        nearest_hit(self.obstacles.iter(), self.ground_level(), origin, dir)
    }

    fn ground_level(&self) -> Option<f64> {
        self.ground.then_some(self.bounds.min[2])
    }
}

fn nearest_hit<'a>(
    obstacles: impl Iterator<Item = &'a Obstacle>,
    ground: Option<f64>,
    origin: &Point3<f64>,
    dir: &Vector3<f64>,
) -> Option<f64> {
    let floor = ground
        .filter(|&g| dir.z < 0.0 && origin.z > g)
        .map(|g| (g - origin.z) / dir.z);
    obstacles
        .filter_map(|ob| ray_obstacle(origin, dir, ob))
        .chain(floor)
        .min_by(f64::total_cmp)
}

const RAY_EPS: f64 = 1e-9;

/// Nearest positive ray parameter hitting `ob`. `dir` need not be unit.
pub fn ray_obstacle(o: &Point3<f64>, d: &Vector3<f64>, ob: &Obstacle) -> Option<f64> {
    match *ob {
        Obstacle::Cylinder {
            center,
            radius,
            height,
        } => {
            let mut best: Option<f64> = None;
            let mut offer = |t: f64| {
                if t > RAY_EPS && best.is_none_or(|b| t < b) {
                    best = Some(t);
                }
            };
            let ox = o.x - center[0];
            let oy = o.y - center[1];
            let a = d.x * d.x + d.y * d.y;
            if a > 0.0 {
                let b = 2.0 * (ox * d.x + oy * d.y);
                let c = ox * ox + oy * oy - radius * radius;
                let disc = b * b - 4.0 * a * c;
                if disc >= 0.0 {
                    let sq = disc.sqrt();
                    for t in [(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)] {
                        let z = o.z + t * d.z;
                        if (0.0..=height).contains(&z) {
                            offer(t);
                        }
                    }
                }
            }
            if d.z != 0.0 {
                for cap in [0.0, height] {
                    let t = (cap - o.z) / d.z;
                    let x = ox + t * d.x;
                    let y = oy + t * d.y;
                    if x * x + y * y <= radius * radius {
                        offer(t);
                    }
                }
            }
            best
        }
        Obstacle::Box {
            center,
            half_extents,
        } => {
            let mut t_near = f64::NEG_INFINITY;
            let mut t_far = f64::INFINITY;
            for i in 0..3 {
                let lo = center[i] - half_extents[i];
                let hi = center[i] + half_extents[i];
                if d[i] == 0.0 {
                    if o[i] < lo || o[i] > hi {
                        return None;
                    }
                } else {
                    let t1 = (lo - o[i]) / d[i];
                    let t2 = (hi - o[i]) / d[i];
                    t_near = t_near.max(t1.min(t2));
                    t_far = t_far.min(t1.max(t2));
                }
            }
            if t_near > t_far || t_far <= RAY_EPS {
                None
            } else if t_near > RAY_EPS {
                Some(t_near)
            } else {
                Some(t_far)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapKind {
    /// Large cylinders in an open arena.
    Cylinders,
    /// Thin tree trunks at a given density.
    Forest,
}

impl std::str::FromStr for MapKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cylinders" => Ok(MapKind::Cylinders),
            "forest" => Ok(MapKind::Forest),
            other => Err(format!("unknown map kind '{other}' (expected cylinders or forest)")),
        }
    }
}

/// Geometry ranges for a map kind.
#[derive(Debug, Clone, Copy)]
struct Shape {
    radius: (f64, f64),
    height: (f64, f64),
    min_gap: f64,
}

impl MapKind {
    fn shape(self) -> Shape {
        match self {
            MapKind::Cylinders => Shape {
                radius: (0.4, 0.9),
                height: (6.0, 10.0),
                min_gap: 1.6,
            },
            MapKind::Forest => Shape {
                radius: (0.15, 0.3),
                height: (6.0, 9.0),
                min_gap: 1.2,
            },
        }
    }
}

/// Inputs for procedural map generation.
#[derive(Debug, Clone)]
pub struct MapRequest {
    pub kind: MapKind,
    pub seed: u64,
    pub bounds: Bounds,
    /// Obstacles per square meter of the bounds footprint.
    pub density: f64,
    /// Points (x, y) that must stay clear, e.g. start and goals.
    pub keep_clear: Vec<[f64; 2]>,
    pub clearance: f64,
}

const PLACEMENT_RETRIES: usize = 20_000;

/// Places `round(density * area)` vertical cylinders by seeded rejection
/// sampling with a minimum gap between neighbours.
pub fn generate_map(req: &MapRequest) -> Result<WorldMap, MapError> {
    if !(req.density >= 0.0) {
        return Err(MapError::NegativeDensity(req.density));
    }
    let count = (req.density * req.bounds.area()).round() as usize;
    let shape = req.kind.shape();
    let mut rng = ChaCha8Rng::seed_from_u64(req.seed);
    let mut obstacles: Vec<Obstacle> = Vec::with_capacity(count);
    let mut placed: Vec<([f64; 2], f64)> = Vec::with_capacity(count);
    let mut retries = 0;
    while placed.len() < count {
        if retries >= PLACEMENT_RETRIES {
            return Err(MapError::InfeasibleDensity {
                requested: count,
                placed: placed.len(),
                retries,
            });
        }
        let radius = rng.random_range(shape.radius.0..=shape.radius.1);
        let height = rng.random_range(shape.height.0..=shape.height.1);
        let x = rng.random_range(req.bounds.min[0] + radius..=req.bounds.max[0] - radius);
        let y = rng.random_range(req.bounds.min[1] + radius..=req.bounds.max[1] - radius);
        let dist = |p: [f64; 2]| ((p[0] - x).powi(2) + (p[1] - y).powi(2)).sqrt();
        let blocks_keep_clear = req
            .keep_clear
            .iter()
            .any(|&p| dist(p) < req.clearance + radius);
        let too_close = placed
            .iter()
            .any(|&(p, r)| dist(p) < r + radius + shape.min_gap);
        if blocks_keep_clear || too_close {
            retries += 1;
            continue;
        }
        placed.push(([x, y], radius));
        obstacles.push(Obstacle::Cylinder {
            center: [x, y],
            radius,
            height,
        });
    }
    Ok(WorldMap {
        name: None,
        bounds: req.bounds,
        seed: req.seed,
        ground: true,
        obstacles,
        start: None,
        goals: Vec::new(),
    })
}

/// 20 x 20 m arena of large cylinders, crossed corner to corner.
pub fn cylinder_arena(seed: u64) -> Result<WorldMap, MapError> {
    let start = [1.0, 1.0, 1.5];
    let goal = [19.0, 19.0, 1.5];
    let mut map = generate_map(&MapRequest {
        kind: MapKind::Cylinders,
        seed,
        bounds: Bounds {
            min: [0.0, 0.0, 0.0],
            max: [20.0, 20.0, 10.0],
        },
        density: 0.04,
        keep_clear: vec![[start[0], start[1]], [goal[0], goal[1]]],
        clearance: 1.5,
    })?;
    map.name = Some("cylinders".into());
    map.start = Some(start);
    map.goals = vec![goal];
    Ok(map)
}

/// 10 x 10 m forest at 0.2 trees per square meter, crossed corner to corner.
pub fn forest(seed: u64) -> Result<WorldMap, MapError> {
    let start = [0.5, 0.5, 1.5];
    let goal = [9.5, 9.5, 1.5];
    let mut map = generate_map(&MapRequest {
        kind: MapKind::Forest,
        seed,
        bounds: Bounds {
            min: [0.0, 0.0, 0.0],
            max: [10.0, 10.0, 10.0],
        },
        density: 0.2,
        keep_clear: vec![[start[0], start[1]], [goal[0], goal[1]]],
        clearance: 1.0,
    })?;
    map.name = Some(format!("forest{seed}"));
    map.start = Some(start);
    map.goals = vec![goal];
    Ok(map)
}

/// Range- and field-of-view-limited depth sensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorModel {
    /// Maximum |x|, |y|, |z| of a returned point in the sensor frame.
    pub range: [f64; 3],
    pub h_fov: f64,
    pub v_fov: f64,
    /// Angular step between rays.
    pub resolution: f64,
    pub min_range: f64,
    pub belief: f64,
    /// Standard deviation of Gaussian range noise; 0 disables it.
    pub noise_sigma: f64,
}

impl Default for SensorModel {
    fn default() -> Self {
        Self {
            range: [10.0, 10.0, 10.0],
            h_fov: PI / 2.0,
            v_fov: PI / 3.0,
            resolution: 0.015,
            min_range: 0.3,
            belief: 1.0,
            noise_sigma: 0.0,
        }
    }
}

impl SensorModel {
    /// The default sensor with the robot's configured range.
    pub fn for_robot(robot: &crate::params::RobotParams) -> Self {
        Self {
            range: robot.sensor_range,
            ..Self::default()
        }
    }

    /// Unit ray directions in the sensor frame, row by row.
    pub fn ray_directions(&self) -> Vec<Vector3<f64>> {
        let steps = |fov: f64| (fov / self.resolution).floor() as usize + 1;
        let az = crate::tentacles::uniform_angles(steps(self.h_fov), self.h_fov);
        let el = crate::tentacles::uniform_angles(steps(self.v_fov), self.v_fov);
        el.iter()
            .flat_map(|&e| az.iter().map(move |&a| crate::tentacles::direction(a, e)))
            .collect()
    }

    fn accepts(&self, p: &Vector3<f64>) -> bool {
        p.norm() >= self.min_range && (0..3).all(|i| p[i].abs() <= self.range[i])
    }
}

/// Casts every sensor ray from `pose` and returns the nearest hits that
/// fall inside the sensor's range limits, expressed in the sensor frame.
pub fn sense(
    world: &WorldMap,
    sensor: &SensorModel,
    pose: &Isometry3<f64>,
    timestamp: f64,
    noise_seed: u64,
) -> PointCloud {
    let origin = Point3::from(pose.translation.vector);
    let reach = sensor.range.iter().map(|r| r * r).sum::<f64>().sqrt();
    let nearby: Vec<&Obstacle> = world
        .obstacles
        .iter()
        .filter(|ob| match **ob {
            Obstacle::Cylinder { center, radius, .. } => {
                let dx = center[0] - origin.x;
                let dy = center[1] - origin.y;
                (dx * dx + dy * dy).sqrt() <= reach + radius
            }
            Obstacle::Box { .. } => true,
        })
        .collect();

    let noise = (sensor.noise_sigma > 0.0)
        .then(|| Normal::new(0.0, sensor.noise_sigma).expect("finite sigma"));
    let mut rng = ChaCha8Rng::seed_from_u64(noise_seed);

    let mut points = Vec::new();
    for dir_s in sensor.ray_directions() {
        let dir_w = pose.rotation * dir_s;
        let Some(mut t) = nearest_hit(nearby.iter().copied(), world.ground_level(), &origin, &dir_w) else {
            continue;
        };
        if let Some(n) = &noise {
            t += n.sample(&mut rng);
        }
        let p = dir_s * t;
        if sensor.accepts(&p) {
            points.push(CloudPoint {
                position: Point3::from(p),
                belief: sensor.belief,
            });
        }
    }
    PointCloud {
        points,
        frame_transform: *pose,
        timestamp,
    }
}
