//! The reactive navigation loop: rebuild the grid, score every tentacle,
//! pick the best one and emit a velocity-limited pose command.

use std::collections::VecDeque;
use std::f64::consts::PI;
use std::io::{self, Write};
use std::sync::Arc;
use std::time::{Duration, Instant};

use nalgebra::{Isometry3, Point3, Translation3, UnitQuaternion, Vector3};
use rayon::prelude::*;
use serde::Serialize;

use crate::grid::{OccupancyGrid, PointCloud};
use crate::heuristics::{
    apply_costs, bin_occupancy, score_tentacle, select_best, HeuristicError, HeuristicScores,
    Navigability, OccupancyBins, ScoringContext,
};
use crate::params::{Config, OnlineParams};
use crate::sim::{sense, SensorModel, WorldMap};
use crate::tentacles::{BankError, TentacleBank};

#[derive(Debug, thiserror::Error)]
pub enum NavError {
    #[error(transparent)]
    Bank(#[from] BankError),
    #[error(transparent)]
    Heuristic(#[from] HeuristicError),
    #[error("at least one goal is required")]
    NoGoals,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotState {
    pub position: Point3<f64>,
    pub yaw: f64,
    /// Positive pitch raises the nose.
    pub pitch: f64,
    pub velocity: Vector3<f64>,
    pub time: f64,
}

impl RobotState {
    pub fn at(position: Point3<f64>, yaw: f64) -> Self {
        Self {
            position,
            yaw,
            pitch: 0.0,
            velocity: Vector3::zeros(),
            time: 0.0,
        }
    }

    /// Robot frame to world frame.
    pub fn pose(&self) -> Isometry3<f64> {
        pose(self.position, self.yaw, self.pitch)
    }
}

pub fn pose(position: Point3<f64>, yaw: f64, pitch: f64) -> Isometry3<f64> {
    Isometry3::from_parts(
        Translation3::from(position.coords),
        UnitQuaternion::from_euler_angles(0.0, -pitch, yaw),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseCommand {
    pub position: Point3<f64>,
    pub yaw: f64,
    pub pitch: f64,
    /// Cycle duration the command is meant to span.
    pub period: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NavState {
    Running,
    GoalReached,
    Blocked,
    TimedOut,
    Collided,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NavStatus {
    pub state: NavState,
    pub goals_remaining: usize,
    pub elapsed: f64,
    pub path_length: f64,
}

/// Wall-clock time spent in each stage of one cycle.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StageTimings {
    pub rebuild: Duration,
    pub occ_info: Duration,
    pub heuristics: Duration,
    pub selection: Duration,
    pub execution: Duration,
}

impl StageTimings {
    pub fn total(&self) -> Duration {
        self.rebuild + self.occ_info + self.heuristics + self.selection + self.execution
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CycleDiagnostics {
    pub selected: Option<usize>,
    pub best_cost: Option<f64>,
    pub best_nav: Option<Navigability>,
    pub drivable: usize,
    pub timings: StageTimings,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub command: PoseCommand,
    pub state: NavState,
    pub diagnostics: CycleDiagnostics,
}

fn wrap_angle(a: f64) -> f64 {
    let mut a = a % (2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    } else if a < -PI {
        a += 2.0 * PI;
    }
    a
}

/// Owns the tentacle bank, the robot-centered grid and the scan history.
pub struct Navigator {
    config: Config,
    bank: Arc<TentacleBank>,
    grid: OccupancyGrid,
    history: VecDeque<PointCloud>,
    previous_best: Option<usize>,
    scores: Vec<HeuristicScores>,
}

impl Navigator {
    pub fn new(config: Config) -> Result<Self, NavError> {
        let bank = Arc::new(TentacleBank::build(&config.offline)?);
        Ok(Self::with_bank(config, bank))
    }

    /// Shares a prebuilt bank, e.g. across benchmark trials.
    pub fn with_bank(config: Config, bank: Arc<TentacleBank>) -> Self {
        let grid = OccupancyGrid::new(*bank.dims());
        Self {
            config,
            bank,
            grid,
            history: VecDeque::new(),
            previous_best: None,
            scores: Vec::new(),
        }
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn bank(&self) -> &Arc<TentacleBank> {
        &self.bank
    }

    pub fn grid(&self) -> &OccupancyGrid {
        &self.grid
    }

    /// Scores from the most recent cycle.
    pub fn scores(&self) -> &[HeuristicScores] {
        &self.scores
    }

    pub fn previous_best(&self) -> Option<usize> {
        self.previous_best
    }

    /// Replaces the online parameters between cycles.
    pub fn set_online(&mut self, online: OnlineParams) {
        self.config.online = online;
    }

    /// Forgets history and the previous selection.
    pub fn reset(&mut self) {
        self.history.clear();
        self.previous_best = None;
        self.scores.clear();
        self.grid.clear();
    }

    /// Runs one navigation cycle for the given state, fresh scan and goal.
    pub fn step(
        &mut self,
        state: &RobotState,
        cloud: PointCloud,
        goal: &Point3<f64>,
    ) -> Result<Step, NavError> {
        let online = self.config.online.clone();
        let robot_pose = state.pose();
        let mut timings = StageTimings::default();

        let clock = Instant::now();
        self.history.push_back(cloud);
        while self.history.len() > online.history_depth {
            self.history.pop_front();
        }
        self.grid.rebuild(self.history.iter(), &robot_pose);
        timings.rebuild = clock.elapsed();

        let clock = Instant::now();
        let bank = &self.bank;
        let grid = &self.grid;
        let bins: Vec<OccupancyBins> = (0..bank.len())
            .into_par_iter()
            .map(|j| bin_occupancy(bank.voxels(j), grid, bank.tentacle(j).samples.len()))
            .collect();
        timings.occ_info = clock.elapsed();

        let clock = Instant::now();
        let ctx = ScoringContext {
            bank,
            online: &online,
            robot_pose: &robot_pose,
            goal,
            previous_best: self.previous_best,
        };
        let mut scores = bins
            .iter()
            .enumerate()
            .map(|(j, b)| score_tentacle(&ctx, j, b))
            .collect::<Result<Vec<_>, _>>()?;
        apply_costs(&mut scores, &online);
        timings.heuristics = clock.elapsed();

        let clock = Instant::now();
        let selected = select_best(&scores, self.previous_best);
        timings.selection = clock.elapsed();

        let clock = Instant::now();
        let command = match selected {
            Some(j) => self.command_toward(state, &robot_pose, j),
            None => PoseCommand {
                position: state.position,
                yaw: state.yaw,
                pitch: state.pitch,
                period: online.cycle_period,
            },
        };
        timings.execution = clock.elapsed();

        if selected.is_some() {
            self.previous_best = selected;
        }
        let best = selected.map(|j| &scores[j]);
        let diagnostics = CycleDiagnostics {
            selected,
            best_cost: best.map(|s| s.cost),
            best_nav: best.map(|s| s.nav),
            drivable: scores.iter().filter(|s| s.nav.is_drivable()).count(),
            timings,
        };
        self.scores = scores;
        Ok(Step {
            command,
            state: if selected.is_some() {
                NavState::Running
            } else {
                NavState::Blocked
            },
            diagnostics,
        })
    }

    /// Moves toward the world position of the selected tentacle's crash
    /// distance sample by at most `v_lat * dt`, turning toward the tentacle
    /// heading within the angular rate limits.
    fn command_toward(&self, state: &RobotState, robot_pose: &Isometry3<f64>, j: usize) -> PoseCommand {
        let robot = &self.config.robot;
        let online = &self.config.online;
        let dt = online.cycle_period;
        let tentacle = self.bank.tentacle(j);
        let target = robot_pose.transform_point(&tentacle.samples[self.crash_sample(j)]);

        let offset = target - state.position;
        let distance = offset.norm();
        let step = (robot.v_lat * dt).min(distance);
        let position = if distance > 0.0 {
            state.position + offset * (step / distance)
        } else {
            state.position
        };

        let heading = robot_pose.rotation * tentacle.heading;
        let want_yaw = heading.y.atan2(heading.x);
        let want_pitch = heading.z.clamp(-1.0, 1.0).asin();
        let max_yaw = robot.omega_yaw * dt;
        let max_pitch = robot.omega_pitch * dt;
        let yaw = wrap_angle(state.yaw + wrap_angle(want_yaw - state.yaw).clamp(-max_yaw, max_yaw));
        let pitch = state.pitch + (want_pitch - state.pitch).clamp(-max_pitch, max_pitch);
        PoseCommand {
            position,
            yaw,
            pitch,
            period: dt,
        }
    }

    /// Zero-based index of the sample at the crash distance of tentacle `j`.
    pub fn crash_sample(&self, j: usize) -> usize {
        let tentacle = self.bank.tentacle(j);
        let n = tentacle.samples.len();
        let crash = self.config.online.crash_distance(tentacle.length);
        let k = (crash / tentacle.spacing() - 1e-9).ceil() as usize;
        k.clamp(1, n) - 1
    }

    /// Drives the robot through `goals` in order until all are reached, a
    /// collision happens or `t_limit` seconds pass.
    pub fn run<W: World + ?Sized>(
        &mut self,
        world: &W,
        start: RobotState,
        goals: &[Point3<f64>],
        t_limit: f64,
    ) -> Result<NavResult, NavError> {
        self.run_observed(world, start, goals, t_limit, |_, _| {})
    }

    /// Like [`Navigator::run`], calling `observe` after every cycle with the
    /// cycle record and that cycle's tentacle scores.
    pub fn run_observed<W, F>(
        &mut self,
        world: &W,
        start: RobotState,
        goals: &[Point3<f64>],
        t_limit: f64,
        mut observe: F,
    ) -> Result<NavResult, NavError>
    where
        W: World + ?Sized,
        F: FnMut(&CycleRecord, &[HeuristicScores]),
    {
        if goals.is_empty() {
            return Err(NavError::NoGoals);
        }
        self.reset();
        let robot = self.config.robot.clone();
        let half = [robot.length / 2.0, robot.width / 2.0, robot.height / 2.0];
        let dt = self.config.online.cycle_period;
        let tolerance = self.config.online.goal_tolerance;

        let mut state = start;
        let mut path_length = 0.0;
        let mut next_goal = 0;
        let mut cycles: Vec<CycleRecord> = Vec::new();
        let mut cycle: u64 = 0;
        let mut last_blocked = false;

        let outcome = loop {
            while next_goal < goals.len() && (state.position - goals[next_goal]).norm() < tolerance {
                next_goal += 1;
            }
            if next_goal == goals.len() {
                break None;
            }
            if state.time >= t_limit {
                break Some(if last_blocked {
                    FailureCause::Blocked
                } else {
                    FailureCause::Timeout
                });
            }

            let cloud = world.sense(&state.pose(), state.time, cycle);
            let step = self.step(&state, cloud, &goals[next_goal])?;
            last_blocked = step.state == NavState::Blocked;

            let cmd = step.command;
            let displacement = cmd.position - state.position;
            path_length += displacement.norm();
            cycle += 1;
            state = RobotState {
                position: cmd.position,
                yaw: cmd.yaw,
                pitch: cmd.pitch,
                velocity: displacement / dt,
                time: cycle as f64 * dt,
            };

            let d = &step.diagnostics;
            let record = CycleRecord {
                time: state.time,
                position: [state.position.x, state.position.y, state.position.z],
                yaw: state.yaw,
                pitch: state.pitch,
                selected: d.selected,
                best_cost: d.best_cost,
                nav_label: d.best_nav.map(Navigability::label),
                timings: d.timings,
            };
            observe(&record, &self.scores);
            cycles.push(record);

            if world.collides(&state, half) {
                break Some(FailureCause::Collision);
            }
        };

        Ok(NavResult {
            success: outcome.is_none(),
            failure: outcome,
            duration: state.time,
            path_length,
            goals_reached: next_goal,
            goals_total: goals.len(),
            final_position: [state.position.x, state.position.y, state.position.z],
            cycles,
        })
    }
}

/// What the navigation loop needs from the environment.
pub trait World {
    fn sense(&self, pose: &Isometry3<f64>, time: f64, cycle: u64) -> PointCloud;
    fn collides(&self, state: &RobotState, half_extents: [f64; 3]) -> bool;
}

/// A [`WorldMap`] observed through a [`SensorModel`].
#[derive(Debug, Clone)]
pub struct Simulation {
    pub map: WorldMap,
    pub sensor: SensorModel,
    pub noise_seed: u64,
}

impl Simulation {
    pub fn new(map: WorldMap, sensor: SensorModel) -> Self {
        Self {
            map,
            sensor,
            noise_seed: 0,
        }
    }
}

impl World for Simulation {
    fn sense(&self, pose: &Isometry3<f64>, time: f64, cycle: u64) -> PointCloud {
        let seed = self
            .noise_seed
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(cycle);
        sense(&self.map, &self.sensor, pose, time, seed)
    }

    fn collides(&self, state: &RobotState, half_extents: [f64; 3]) -> bool {
        self.map.collides(&state.position, state.yaw, half_extents)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureCause {
    Collision,
    Timeout,
    Blocked,
}

impl FailureCause {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureCause::Collision => "collision",
            FailureCause::Timeout => "timeout",
            FailureCause::Blocked => "blocked",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CycleRecord {
    pub time: f64,
    pub position: [f64; 3],
    pub yaw: f64,
    pub pitch: f64,
    pub selected: Option<usize>,
    pub best_cost: Option<f64>,
    pub nav_label: Option<i8>,
    pub timings: StageTimings,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NavResult {
    pub success: bool,
    pub failure: Option<FailureCause>,
    pub duration: f64,
    pub path_length: f64,
    pub goals_reached: usize,
    pub goals_total: usize,
    pub final_position: [f64; 3],
    #[serde(skip)]
    pub cycles: Vec<CycleRecord>,
}

impl NavResult {
    pub fn status(&self) -> NavStatus {
        NavStatus {
            state: match self.failure {
                None => NavState::GoalReached,
                Some(FailureCause::Blocked) => NavState::Blocked,
                Some(FailureCause::Timeout) => NavState::TimedOut,
                Some(FailureCause::Collision) => NavState::Collided,
            },
            goals_remaining: self.goals_total - self.goals_reached,
            elapsed: self.duration,
            path_length: self.path_length,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }

    /// `t,x,y,z,yaw,pitch,selected_tentacle,F_best,nav_label` per cycle.
    pub fn write_trajectory_csv(&self, mut out: impl Write) -> io::Result<()> {
        writeln!(out, "t,x,y,z,yaw,pitch,selected_tentacle,F_best,nav_label")?;
        for c in &self.cycles {
            let opt = |v: Option<String>| v.unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                c.time,
                c.position[0],
                c.position[1],
                c.position[2],
                c.yaw,
                c.pitch,
                opt(c.selected.map(|s| s.to_string())),
                opt(c.best_cost.map(|f| f.to_string())),
                opt(c.nav_label.map(|n| n.to_string())),
            )?;
        }
        Ok(())
    }
}

/// Header and rows for the per-cycle score log.
pub fn write_score_rows(
    mut out: impl Write,
    cycle: u64,
    scores: &[HeuristicScores],
    header: bool,
) -> io::Result<()> {
    if header {
        writeln!(out, "cycle,tentacle,nav,clear,clut,close_raw,smo_raw,F")?;
    }
    for s in scores {
        writeln!(
            out,
            "{cycle},{},{},{},{},{},{},{}",
            s.tentacle,
            s.nav.label(),
            s.clear,
            s.clut,
            s.close_raw,
            s.smo_raw,
            s.cost
        )?;
    }
    Ok(())
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::params::OfflineParams;
    use crate::sim::{Bounds, Obstacle};

    /// Small bank: 9 x 3 tentacles, 5 m long, on a 0.25 m grid.
    pub(crate) fn small_config() -> Config {
        let mut config = Config::default();
        config.offline = OfflineParams {
            voxel_dim: 0.2,
            grid_counts: [60, 50, 30],
            n_yaw: 9,
            n_pitch: 3,
            samples_per_tentacle: 15,
            tentacle_length: 5.0,
            yaw_coverage: 60f64.to_radians(),
            pitch_coverage: 30f64.to_radians(),
            ..OfflineParams::default()
        };
        config.online.alpha_crash = 2.0;
        config.online.history_depth = 20;
        config
    }

    fn empty_sim() -> Simulation {
        Simulation::new(
            WorldMap::empty(Bounds {
                min: [-10.0, -10.0, 0.0],
                max: [30.0, 10.0, 10.0],
            }),
            SensorModel::default(),
        )
    }

    #[test]
    fn straight_goal_in_empty_world_picks_central_tentacle() {
        let config = small_config();
        let mut nav = Navigator::new(config.clone()).unwrap();
        let state = RobotState::at(Point3::new(0.0, 0.0, 1.5), 0.0);
        let cloud = PointCloud::empty(state.pose(), 0.0);
        let step = nav.step(&state, cloud, &Point3::new(20.0, 0.0, 1.5)).unwrap();
        let j = step.diagnostics.selected.unwrap();
        let t = nav.bank().tentacle(j);
        assert_eq!((t.yaw, t.pitch), (0.0, 0.0));
        let moved = step.command.position - state.position;
        assert!((moved - Vector3::new(config.robot.v_lat * 0.1, 0.0, 0.0)).norm() < 1e-12);
        assert_eq!(step.state, NavState::Running);
    }

    #[test]
    fn wall_in_front_blocks() {
        let config = small_config();
        let mut nav = Navigator::new(config).unwrap();
        let mut map = WorldMap::empty(Bounds {
            min: [-10.0, -10.0, 0.0],
            max: [10.0, 10.0, 10.0],
        });
        map.obstacles.push(Obstacle::Box {
            center: [1.0, 0.0, 2.0],
            half_extents: [0.2, 8.0, 8.0],
        });
        let sim = Simulation::new(map, SensorModel::default());
        let state = RobotState::at(Point3::new(0.0, 0.0, 1.5), 0.0);
        let cloud = sim.sense(&state.pose(), 0.0, 0);
        let step = nav.step(&state, cloud, &Point3::new(8.0, 0.0, 1.5)).unwrap();
        assert_eq!(step.state, NavState::Blocked);
        assert_eq!(step.diagnostics.selected, None);
        assert_eq!(step.command.position, state.position);
        assert!(nav.scores().iter().all(|s| s.nav == Navigability::NonNavigable));
    }

    #[test]
    fn crash_sample_index() {
        let nav = Navigator::new(small_config()).unwrap();
        // 15 samples over 5 m, crash distance 2.5 m -> sample number 8
        assert_eq!(nav.crash_sample(0), 7);
    }

    #[test]
    fn goal_at_start_succeeds_immediately() {
        let mut nav = Navigator::new(small_config()).unwrap();
        let start = RobotState::at(Point3::new(0.0, 0.0, 1.5), 0.0);
        let result = nav
            .run(&empty_sim(), start, &[Point3::new(0.2, 0.0, 1.5)], 10.0)
            .unwrap();
        assert!(result.success);
        assert_eq!(result.duration, 0.0);
        assert_eq!(result.path_length, 0.0);
        assert!(result.cycles.is_empty());
    }

    #[test]
    fn empty_world_straight_run() {
        let config = small_config();
        let tol = config.online.goal_tolerance;
        let mut nav = Navigator::new(config).unwrap();
        let start = RobotState::at(Point3::new(0.0, 0.0, 1.5), 0.0);
        let result = nav
            .run(&empty_sim(), start, &[Point3::new(15.0, 0.0, 1.5)], 60.0)
            .unwrap();
        assert!(result.success, "{result:?}");
        // kinematic lower bound (distance minus goal tolerance) and slack above
        assert!(result.duration >= (15.0 - tol) / 1.0 - 1e-9);
        assert!(result.duration <= 1.3 * 15.0);
    }

    #[test]
    fn commands_respect_rate_limits() {
        let config = small_config();
        let dt = config.online.cycle_period;
        let mut nav = Navigator::new(config.clone()).unwrap();
        // goal behind and above forces turning
        let start = RobotState::at(Point3::new(0.0, 0.0, 1.5), 0.0);
        let goals = [Point3::new(-6.0, 4.0, 3.0)];
        let result = nav.run(&empty_sim(), start, &goals, 20.0).unwrap();
        assert!(result.success, "{result:?}");
        let mut prev = (start.position, start.yaw, start.pitch);
        for c in &result.cycles {
            let p = Point3::from(c.position);
            assert!((p - prev.0).norm() <= config.robot.v_lat * dt + 1e-12);
            assert!(wrap_angle(c.yaw - prev.1).abs() <= config.robot.omega_yaw * dt + 1e-12);
            assert!((c.pitch - prev.2).abs() <= config.robot.omega_pitch * dt + 1e-12);
            prev = (p, c.yaw, c.pitch);
        }
    }

    #[test]
    fn walled_goal_times_out() {
        let mut nav = Navigator::new(small_config()).unwrap();
        let mut map = WorldMap::empty(Bounds {
            min: [-10.0, -10.0, 0.0],
            max: [10.0, 10.0, 10.0],
        });
        map.ground = true;
        // closed box around the goal
        for (c, h) in [
            ([6.0, 0.0, 2.0], [0.1, 2.0, 2.0]),
            ([10.0, 0.0, 2.0], [0.1, 2.0, 2.0]),
            ([8.0, 2.0, 2.0], [2.0, 0.1, 2.0]),
            ([8.0, -2.0, 2.0], [2.0, 0.1, 2.0]),
            ([8.0, 0.0, 4.0], [2.0, 2.0, 0.1]),
        ] {
            map.obstacles.push(Obstacle::Box {
                center: c,
                half_extents: h,
            });
        }
        let sim = Simulation::new(map, SensorModel::default());
        let start = RobotState::at(Point3::new(0.0, 0.0, 1.5), 0.0);
        let result = nav.run(&sim, start, &[Point3::new(8.0, 0.0, 1.5)], 15.0).unwrap();
        assert!(!result.success);
        assert!(matches!(
            result.failure,
            Some(FailureCause::Blocked | FailureCause::Timeout)
        ));
        assert_eq!(result.goals_reached, 0);
    }

    #[test]
    fn no_goals_is_an_error() {
        let mut nav = Navigator::new(small_config()).unwrap();
        let start = RobotState::at(Point3::new(0.0, 0.0, 1.5), 0.0);
        assert!(matches!(
            nav.run(&empty_sim(), start, &[], 1.0),
            Err(NavError::NoGoals)
        ));
    }

    #[test]
    fn trajectory_csv_has_a_row_per_cycle() {
        let mut nav = Navigator::new(small_config()).unwrap();
        let start = RobotState::at(Point3::new(0.0, 0.0, 1.5), 0.0);
        let result = nav
            .run(&empty_sim(), start, &[Point3::new(3.0, 0.0, 1.5)], 10.0)
            .unwrap();
        let mut out = Vec::new();
        result.write_trajectory_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), result.cycles.len() + 1);
        let json: serde_json::Value = serde_json::from_str(&result.to_json()).unwrap();
        assert_eq!(json["success"], true);
    }

    #[test]
    fn wrap_angle_range() {
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert!((wrap_angle(-3.0 * PI / 2.0) - PI / 2.0).abs() < 1e-12);
        assert_eq!(wrap_angle(0.3), 0.3);
    }
}
