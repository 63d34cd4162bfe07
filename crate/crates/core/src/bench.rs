//! Seeded benchmark suites and per-stage timing studies.
//!
//! A suite runs every scenario `trials` times. Trial `k` on scenario `m`
//! gets its own seed, which jitters the start pose and seeds sensor noise,
//! so the whole suite is reproducible from the scenario list, the config and
//! the base seed. Trials run in parallel; each record is computed
//! independently, so the worker count never changes the results.

use std::io::{self, Write};
use std::sync::Arc;
use std::time::{Duration, Instant};

use nalgebra::Point3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::grid::OccupancyGrid;
use crate::navigator::{FailureCause, NavError, Navigator, RobotState, Simulation, StageTimings, World};
use crate::params::Config;
use crate::sim::{cylinder_arena, forest, MapError, SensorModel, WorldMap};
use crate::tentacles::{BankError, TentacleBank};

/// A map with the start and goal sequence every trial uses.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub id: String,
    pub map: WorldMap,
    pub start: Point3<f64>,
    pub goals: Vec<Point3<f64>>,
}

impl Scenario {
    /// Takes the start and goals stored in the map. Returns `None` when the
    /// map has no start or no goals.
    pub fn from_map(id: impl Into<String>, map: WorldMap) -> Option<Self> {
        let start = map.start?;
        if map.goals.is_empty() {
            return None;
        }
        let goals = map.goals.iter().map(|g| Point3::from(*g)).collect();
        Some(Self {
            id: id.into(),
            start: Point3::from(start),
            goals,
            map,
        })
    }
}

/// One 20 x 20 m cylinder arena and nine 10 x 10 m forests (seeds 1..=9).
pub fn standard_suite() -> Result<Vec<Scenario>, MapError> {
    let mut maps = vec![cylinder_arena(0)?];
    for seed in 1..=9 {
        maps.push(forest(seed)?);
    }
    Ok(maps
        .into_iter()
        .map(|m| {
            let id = m.name.clone().unwrap_or_default();
            Scenario::from_map(id, m).expect("generated maps carry start and goal")
        })
        .collect())
}

#[derive(Debug, Clone)]
pub struct SuiteOptions {
    pub trials: usize,
    pub t_limit: f64,
    pub base_seed: u64,
    /// Worker threads; 0 uses the global rayon pool.
    pub workers: usize,
    pub sensor: SensorModel,
    /// Largest start offset, meters in x and y.
    pub start_jitter: f64,
    /// Largest start heading offset from the goal bearing, radians.
    pub yaw_jitter: f64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            trials: 10,
            t_limit: 120.0,
            base_seed: 0,
            workers: 0,
            sensor: SensorModel::default(),
            start_jitter: 0.2,
            yaw_jitter: 0.3,
        }
    }
}

/// Mean per-cycle stage times of one trial, milliseconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct StageMeans {
    pub rebuild: f64,
    pub occ_info: f64,
    pub heuristics: f64,
    pub selection: f64,
    pub execution: f64,
}

impl StageMeans {
    pub fn from_cycles<'a>(cycles: impl IntoIterator<Item = &'a StageTimings>) -> Self {
        let mut sum = [Duration::ZERO; 5];
        let mut n = 0u32;
        for t in cycles {
            for (s, d) in sum.iter_mut().zip(stage_array(t)) {
                *s += d;
            }
            n += 1;
        }
        if n == 0 {
            return Self::default();
        }
        let ms = |d: Duration| d.as_secs_f64() * 1e3 / n as f64;
        Self {
            rebuild: ms(sum[0]),
            occ_info: ms(sum[1]),
            heuristics: ms(sum[2]),
            selection: ms(sum[3]),
            execution: ms(sum[4]),
        }
    }

    pub fn total(&self) -> f64 {
        self.rebuild + self.occ_info + self.heuristics + self.selection + self.execution
    }
}

fn stage_array(t: &StageTimings) -> [Duration; 5] {
    [t.rebuild, t.occ_info, t.heuristics, t.selection, t.execution]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub map: String,
    pub seed: u64,
    pub trial: usize,
    pub success: bool,
    pub duration: f64,
    pub path_length: f64,
    pub failure: Option<FailureCause>,
    pub goals_reached: usize,
    pub cycles: usize,
    pub timings: StageMeans,
}

/// Seed of trial `trial` on the scenario at position `map_index`.
pub fn trial_seed(base_seed: u64, map_index: usize, trial: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(((map_index as u64) << 32) | trial as u64);
    rng.random()
}

/// Start state for a trial: the scenario start shifted by up to
/// `start_jitter` and facing the first goal give or take `yaw_jitter`.
pub fn jittered_start(scenario: &Scenario, seed: u64, opts: &SuiteOptions) -> RobotState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut jitter = |a: f64| if a > 0.0 { rng.random_range(-a..=a) } else { 0.0 };
    let mut p = scenario.start;
    p.x += jitter(opts.start_jitter);
    p.y += jitter(opts.start_jitter);
    let to_goal = scenario.goals[0] - p;
    let yaw = to_goal.y.atan2(to_goal.x) + jitter(opts.yaw_jitter);
    RobotState::at(p, yaw)
}

/// Runs one trial with a fresh navigator sharing `bank`.
pub fn run_trial(
    bank: &Arc<TentacleBank>,
    config: &Config,
    scenario: &Scenario,
    trial: usize,
    seed: u64,
    opts: &SuiteOptions,
) -> Result<TrialRecord, NavError> {
    let mut nav = Navigator::with_bank(config.clone(), Arc::clone(bank));
    let mut world = Simulation::new(scenario.map.clone(), opts.sensor.clone());
    world.noise_seed = seed;
    let start = jittered_start(scenario, seed, opts);
    let result = nav.run(&world, start, &scenario.goals, opts.t_limit)?;
    Ok(TrialRecord {
        map: scenario.id.clone(),
        seed,
        trial,
        success: result.success,
        duration: result.duration,
        path_length: result.path_length,
        failure: result.failure,
        goals_reached: result.goals_reached,
        cycles: result.cycles.len(),
        timings: StageMeans::from_cycles(result.cycles.iter().map(|c| &c.timings)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl Stats {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Option<Self> {
        let mut n = 0usize;
        let (mut sum, mut min, mut max) = (0.0, f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            n += 1;
            sum += v;
            min = min.min(v);
            max = max.max(v);
        }
        (n > 0).then(|| Self {
            mean: sum / n as f64,
            min,
            max,
        })
    }
}

/// Duration and path length statistics cover successful trials only.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MapSummary {
    pub map: String,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub duration: Option<Stats>,
    pub path_length: Option<Stats>,
    pub collisions: usize,
    pub timeouts: usize,
    pub blocked: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub mean_duration: Option<f64>,
    pub mean_path_length: Option<f64>,
    pub mean_cycle_ms: Option<f64>,
    pub maps: Vec<MapSummary>,
}

fn rate(successes: usize, trials: usize) -> f64 {
    if trials == 0 {
        0.0
    } else {
        successes as f64 / trials as f64
    }
}

impl Summary {
    pub fn of(records: &[TrialRecord]) -> Self {
        let mut ids: Vec<&str> = Vec::new();
        for r in records {
            if !ids.contains(&r.map.as_str()) {
                ids.push(&r.map);
            }
        }
        let maps = ids
            .into_iter()
            .map(|id| {
                let rs: Vec<&TrialRecord> = records.iter().filter(|r| r.map == id).collect();
                let ok = || rs.iter().filter(|r| r.success);
                let count = |c: FailureCause| rs.iter().filter(|r| r.failure == Some(c)).count();
                let successes = ok().count();
                MapSummary {
                    map: id.to_string(),
                    trials: rs.len(),
                    successes,
                    success_rate: rate(successes, rs.len()),
                    duration: Stats::of(ok().map(|r| r.duration)),
                    path_length: Stats::of(ok().map(|r| r.path_length)),
                    collisions: count(FailureCause::Collision),
                    timeouts: count(FailureCause::Timeout),
                    blocked: count(FailureCause::Blocked),
                }
            })
            .collect();
        let ok = || records.iter().filter(|r| r.success);
        let successes = ok().count();
        Self {
            trials: records.len(),
            successes,
            success_rate: rate(successes, records.len()),
            mean_duration: Stats::of(ok().map(|r| r.duration)).map(|s| s.mean),
            mean_path_length: Stats::of(ok().map(|r| r.path_length)).map(|s| s.mean),
            mean_cycle_ms: Stats::of(records.iter().map(|r| r.timings.total())).map(|s| s.mean),
            maps,
        }
    }

    pub fn map(&self, id: &str) -> Option<&MapSummary> {
        self.maps.iter().find(|m| m.map == id)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub records: Vec<TrialRecord>,
    pub summary: Summary,
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Bank(#[from] BankError),
    #[error(transparent)]
    Nav(#[from] NavError),
    #[error("failed to start worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

/// Runs every scenario `opts.trials` times. Records come back ordered by
/// scenario, then trial index.
pub fn run_suite(
    scenarios: &[Scenario],
    config: &Config,
    opts: &SuiteOptions,
) -> Result<SuiteReport, BenchError> {
    if scenarios.is_empty() || opts.trials == 0 {
        return Ok(SuiteReport {
            records: Vec::new(),
            summary: Summary::of(&[]),
        });
    }
    let bank = Arc::new(TentacleBank::build(&config.offline)?);
    let jobs: Vec<(usize, usize)> = (0..scenarios.len())
        .flat_map(|m| (0..opts.trials).map(move |k| (m, k)))
        .collect();
    let run = || {
        jobs.par_iter()
            .map(|&(m, k)| {
                let seed = trial_seed(opts.base_seed, m, k);
                run_trial(&bank, config, &scenarios[m], k, seed, opts)
            })
            .collect::<Result<Vec<_>, _>>()
    };
    let records = if opts.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(opts.workers)
            .build()?
            .install(run)?
    } else {
        run()?
    };
    let summary = Summary::of(&records);
    Ok(SuiteReport { records, summary })
}

pub const RESULTS_HEADER: &str = "map,seed,trial,success,duration,path_length,failure,goals_reached,cycles,\
rebuild_ms,occ_info_ms,heuristics_ms,selection_ms,execution_ms";

/// Number of leading `results.csv` columns that do not depend on wall-clock time.
pub const RESULTS_STABLE_COLUMNS: usize = 9;

pub fn write_results_csv(records: &[TrialRecord], mut out: impl Write) -> io::Result<()> {
    writeln!(out, "{RESULTS_HEADER}")?;
    for r in records {
        let t = &r.timings;
        writeln!(
            out,
            "{},{},{},{},{:.3},{:.6},{},{},{},{:.4},{:.4},{:.4},{:.4},{:.4}",
            r.map,
            r.seed,
            r.trial,
            r.success,
            r.duration,
            r.path_length,
            r.failure.map_or("", FailureCause::as_str),
            r.goals_reached,
            r.cycles,
            t.rebuild,
            t.occ_info,
            t.heuristics,
            t.selection,
            t.execution,
        )?;
    }
    Ok(())
}

/// A labelled configuration for [`time_stages`].
#[derive(Debug, Clone)]
pub struct TimingVariant {
    pub label: String,
    pub config: Config,
}

/// The three comparisons of the timing study: the given config, the same
/// volume at half the voxel size, and roughly twice the tentacles.
pub fn standard_variants(base: &Config) -> Vec<TimingVariant> {
    let mut fine = base.clone();
    fine.offline.voxel_dim /= 2.0;
    fine.offline.grid_counts = base.offline.grid_counts.map(|n| n * 2);
    let mut dense = base.clone();
    let (ny, np) = (base.offline.n_yaw, base.offline.n_pitch);
    // odd counts keep a straight-ahead tentacle
    dense.offline.n_yaw = ((ny as f64 * std::f64::consts::SQRT_2).round() as usize) | 1;
    dense.offline.n_pitch = (2 * ny * np).div_ceil(dense.offline.n_yaw) | 1;
    vec![
        TimingVariant {
            label: "base".into(),
            config: base.clone(),
        },
        TimingVariant {
            label: "half_voxel".into(),
            config: fine,
        },
        TimingVariant {
            label: "double_tentacles".into(),
            config: dense,
        },
    ]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingOptions {
    pub cycles: usize,
    /// Run precomputation on a single thread.
    pub serial: bool,
    /// Repetitions of the initialization measurements; the median is kept.
    pub repeats: usize,
}

impl Default for TimingOptions {
    fn default() -> Self {
        Self {
            cycles: 120,
            serial: true,
            repeats: 3,
        }
    }
}

/// One row of the timing table. Times in milliseconds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingRow {
    pub label: String,
    pub voxel_dim: f64,
    pub voxels: usize,
    pub tentacles: usize,
    pub grid_init_ms: f64,
    pub precompute_ms: f64,
    pub cycles: usize,
    pub stages: StageMeans,
    pub median_cycle_ms: f64,
}

impl TimingRow {
    /// Per-tentacle work of a cycle: occupancy binning plus scoring.
    pub fn heuristic_ms(&self) -> f64 {
        self.stages.occ_info + self.stages.heuristics
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    match v.len() {
        0 => 0.0,
        n if n % 2 == 1 => v[n / 2],
        n => 0.5 * (v[n / 2 - 1] + v[n / 2]),
    }
}

fn time_ms<T>(f: impl FnOnce() -> T) -> (f64, T) {
    let clock = Instant::now();
    let out = f();
    (clock.elapsed().as_secs_f64() * 1e3, out)
}

/// The fixed scene of the timing study: a forest crossed in a straight line.
pub fn timing_scene() -> Result<WorldMap, MapError> {
    forest(0)
}

/// Measures initialization and per-stage cycle times for each variant. The
/// robot is scripted along a straight line through [`timing_scene`] at
/// `v_lat`, so every variant sees the same sequence of point clouds.
pub fn time_stages(variants: &[TimingVariant], opts: &TimingOptions) -> Result<Vec<TimingRow>, BenchError> {
    let scene = timing_scene().expect("timing scene generates");
    let world = Simulation::new(scene, SensorModel::default());
    let pool = if opts.serial {
        Some(rayon::ThreadPoolBuilder::new().num_threads(1).build()?)
    } else {
        None
    };
    let in_pool = |f: &mut (dyn FnMut() + Send)| match &pool {
        Some(p) => p.install(f),
        None => f(),
    };

    let mut rows = Vec::with_capacity(variants.len());
    for v in variants {
        let offline = &v.config.offline;
        let dims = crate::grid::GridDims::new(offline.grid_counts, offline.voxel_dim);
        let repeats = opts.repeats.max(1);

        let mut init = Vec::with_capacity(repeats);
        for _ in 0..repeats {
            let (ms, grid) = time_ms(|| OccupancyGrid::new(dims));
            std::hint::black_box(&grid);
            init.push(ms);
        }

        let mut pre = Vec::with_capacity(repeats);
        let mut bank = None;
        for _ in 0..repeats {
            let mut built = None;
            in_pool(&mut || built = Some(time_ms(|| TentacleBank::build(offline))));
            let (ms, b) = built.expect("closure ran");
            pre.push(ms);
            bank = Some(b?);
        }
        let bank = Arc::new(bank.expect("at least one repeat"));

        let mut nav = Navigator::with_bank(v.config.clone(), bank);
        let dt = v.config.online.cycle_period;
        let speed = v.config.robot.v_lat;
        let goal = Point3::new(10.0, 5.0, 1.5);
        let mut timings = Vec::with_capacity(opts.cycles);
        let mut step_err = None;
        in_pool(&mut || {
            for k in 0..opts.cycles {
                let t = k as f64 * dt;
                // back and forth across the map at mid height
                let s = (speed * t) % 16.0;
                let x = if s < 8.0 { 1.0 + s } else { 17.0 - s };
                let yaw = if s < 8.0 { 0.0 } else { std::f64::consts::PI };
                let mut state = RobotState::at(Point3::new(x, 5.0, 1.5), yaw);
                state.time = t;
                let cloud = world.sense(&state.pose(), t, k as u64);
                match nav.step(&state, cloud, &goal) {
                    Ok(step) => timings.push(step.diagnostics.timings),
                    Err(e) => {
                        step_err = Some(e);
                        return;
                    }
                }
            }
        });
        if let Some(e) = step_err {
            return Err(e.into());
        }
        rows.push(TimingRow {
            label: v.label.clone(),
            voxel_dim: offline.voxel_dim,
            voxels: offline.voxel_count(),
            tentacles: offline.tentacle_count(),
            grid_init_ms: median(init),
            precompute_ms: median(pre),
            cycles: timings.len(),
            stages: StageMeans::from_cycles(&timings),
            median_cycle_ms: median(timings.iter().map(|t| t.total().as_secs_f64() * 1e3).collect()),
        });
    }
    Ok(rows)
}

pub const TIMINGS_HEADER: &str = "label,voxel_dim,voxels,tentacles,grid_init_ms,precompute_ms,cycles,\
rebuild_ms,occ_info_ms,heuristics_ms,selection_ms,execution_ms,mean_cycle_ms,median_cycle_ms";

pub fn write_timings_csv(rows: &[TimingRow], mut out: impl Write) -> io::Result<()> {
    writeln!(out, "{TIMINGS_HEADER}")?;
    for r in rows {
        let s = &r.stages;
        writeln!(
            out,
            "{},{},{},{},{:.4},{:.3},{},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4}",
            r.label,
            r.voxel_dim,
            r.voxels,
            r.tentacles,
            r.grid_init_ms,
            r.precompute_ms,
            r.cycles,
            s.rebuild,
            s.occ_info,
            s.heuristics,
            s.selection,
            s.execution,
            s.total(),
            r.median_cycle_ms,
        )?;
    }
    Ok(())
}
