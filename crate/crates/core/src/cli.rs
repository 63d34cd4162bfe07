//! `tentacle-nav` command line: map generation, single runs, benchmark
//! suites, timing studies and data dumps. Every output file lands in the
//! `--out` directory; input files are only read.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use nalgebra::Point3;

use crate::bench::{
    run_suite, standard_suite, standard_variants, time_stages, write_results_csv, write_timings_csv, BenchError,
    Scenario, SuiteOptions, TimingOptions,
};
use crate::grid::OccupancyGrid;
use crate::navigator::{write_score_rows, NavError, Navigator, RobotState, Simulation, World};
use crate::params::{load_config, Config, ConfigError};
use crate::sim::{cylinder_arena, forest, generate_map, MapError, MapKind, MapRequest, SensorModel, WorldMap};
use crate::tentacles::{BankError, TentacleBank};

#[derive(Debug, Parser)]
#[command(name = "tentacle-nav", version, about = "Reactive 3D navigation with precomputed tentacles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate an obstacle map as JSON.
    GenMap(GenMapArgs),
    /// Navigate one map and write the trajectory and result.
    Run(RunArgs),
    /// Run seeded trials over a set of maps.
    Bench(BenchArgs),
    /// Time initialization and per-cycle stages for a few config variants.
    Time(TimeArgs),
    /// Write the tentacle bank or a single-scan occupancy grid.
    Dump(DumpArgs),
}

#[derive(Debug, Args)]
pub struct GenMapArgs {
    /// cylinders or forest
    #[arg(long, default_value = "forest")]
    pub kind: MapKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Obstacles per square meter; defaults to the standard map of that kind.
    #[arg(long)]
    pub density: Option<f64>,
    /// Write the ten benchmark maps instead of a single one.
    #[arg(long)]
    pub suite: bool,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub map: PathBuf,
    /// Goal as x,y,z; repeat for a sequence. Defaults to the map's goals.
    #[arg(long = "goal", value_parser = parse_point)]
    pub goals: Vec<Point3<f64>>,
    /// Start as x,y,z. Defaults to the map's start.
    #[arg(long, value_parser = parse_point)]
    pub start: Option<Point3<f64>>,
    /// Start heading, radians. Defaults to facing the first goal.
    #[arg(long)]
    pub yaw: Option<f64>,
    /// Sensor noise seed (only matters with noise enabled).
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Range noise standard deviation, meters.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 120.0)]
    pub t_limit: f64,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Write every tentacle's scores for every cycle to scores.csv.
    #[arg(long)]
    pub log_scores: bool,
    /// Write the final occupancy grid to grid.csv.
    #[arg(long)]
    pub dump_grid: bool,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Directory of map JSON files with start and goals; defaults to the
    /// built-in cylinder arena and nine forests.
    #[arg(long)]
    pub maps: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    /// Base seed for per-trial seeds.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 120.0)]
    pub t_limit: f64,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TimeArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value_t = 120)]
    pub cycles: usize,
    /// Run precomputation and cycles on a single thread.
    #[arg(long)]
    pub timing_serial: bool,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DumpArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Write tentacles.jsonl.
    #[arg(long)]
    pub dump_tentacles: bool,
    /// Write grid.csv from one scan of --map taken at --start.
    #[arg(long)]
    pub dump_grid: bool,
    #[arg(long)]
    pub map: Option<PathBuf>,
    #[arg(long, value_parser = parse_point)]
    pub start: Option<Point3<f64>>,
    #[arg(long, default_value_t = 0.0)]
    pub yaw: f64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

fn parse_point(s: &str) -> Result<Point3<f64>, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected x,y,z, got {s:?}"));
    }
    let mut v = [0.0f64; 3];
    for (slot, p) in v.iter_mut().zip(&parts) {
        *slot = p.parse().map_err(|_| format!("not a number: {p:?}"))?;
        if !slot.is_finite() {
            return Err(format!("not finite: {p:?}"));
        }
    }
    Ok(Point3::from(v))
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Map { path: String, source: MapError },
    #[error(transparent)]
    Generate(MapError),
    #[error(transparent)]
    Bank(#[from] BankError),
    #[error(transparent)]
    Nav(#[from] NavError),
    #[error(transparent)]
    Bench(#[from] BenchError),
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: io::Error },
    #[error("{0}")]
    Usage(String),
}

fn load_map(path: &Path) -> Result<WorldMap, CliError> {
    WorldMap::load(path).map_err(|source| CliError::Map {
        path: path.display().to_string(),
        source,
    })
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>) -> Result<(), CliError> {
    let wrap = |source| CliError::Write {
        path: path.display().to_string(),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(wrap)?);
    f(&mut out).and_then(|_| out.flush()).map_err(wrap)
}

fn out_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Write {
        path: dir.display().to_string(),
        source,
    })
}

fn thread_pool(workers: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Bench(e.into()))
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

pub fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::GenMap(a) => gen_map(a),
        Command::Run(a) => run(a),
        Command::Bench(a) => bench(a),
        Command::Time(a) => time(a),
        Command::Dump(a) => dump(a),
    }
}

fn gen_map(a: GenMapArgs) -> Result<(), CliError> {
    out_dir(&a.out)?;
    let maps = if a.suite {
        standard_suite()
            .map_err(CliError::Generate)?
            .into_iter()
            .map(|s| s.map)
            .collect()
    } else {
        let mut map = match a.kind {
            MapKind::Cylinders => cylinder_arena(a.seed),
            MapKind::Forest => forest(a.seed),
        }
        .map_err(CliError::Generate)?;
        if let Some(density) = a.density {
            let keep_clear: Vec<[f64; 2]> = map
                .start
                .iter()
                .chain(&map.goals)
                .map(|p| [p[0], p[1]])
                .collect();
            let regenerated = generate_map(&MapRequest {
                kind: a.kind,
                seed: a.seed,
                bounds: map.bounds,
                density,
                keep_clear,
                clearance: 1.0,
            })
            .map_err(CliError::Generate)?;
            map.obstacles = regenerated.obstacles;
        }
        vec![map]
    };
    for map in maps {
        let name = map.name.clone().unwrap_or_else(|| format!("map{}", map.seed));
        let path = a.out.join(format!("{name}.json"));
        write_file(&path, |w| writeln!(w, "{}", map.to_json()))?;
        println!("{}", path.display());
    }
    Ok(())
}

fn run(a: RunArgs) -> Result<(), CliError> {
    let config = load_config(&a.config)?;
    let map = load_map(&a.map)?;
    let goals = if a.goals.is_empty() {
        map.goals.iter().map(|g| Point3::from(*g)).collect()
    } else {
        a.goals.clone()
    };
    if goals.is_empty() {
        return Err(CliError::Usage("no goals: pass --goal x,y,z or use a map with goals".into()));
    }
    let start = a
        .start
        .or(map.start.map(Point3::from))
        .ok_or_else(|| CliError::Usage("no start: pass --start x,y,z or use a map with a start".into()))?;
    let yaw = a.yaw.unwrap_or_else(|| {
        let d = goals[0] - start;
        d.y.atan2(d.x)
    });
    out_dir(&a.out)?;

    let sensor = SensorModel {
        noise_sigma: a.noise,
        ..SensorModel::for_robot(&config.robot)
    };
    let mut world = Simulation::new(map, sensor);
    world.noise_seed = a.seed;
    let mut nav = Navigator::new(config)?;

    let mut scores_out = if a.log_scores {
        let path = a.out.join("scores.csv");
        let file = File::create(&path).map_err(|source| CliError::Write {
            path: path.display().to_string(),
            source,
        })?;
        Some((path, BufWriter::new(file), 0u64, None::<io::Error>))
    } else {
        None
    };
    let result = thread_pool(a.workers.max(1))?.install(|| {
        nav.run_observed(&world, RobotState::at(start, yaw), &goals, a.t_limit, |_, scores| {
            if let Some((_, w, cycle, err)) = scores_out.as_mut() {
                if err.is_none() {
                    if let Err(e) = write_score_rows(&mut *w, *cycle, scores, *cycle == 0) {
                        *err = Some(e);
                    }
                }
                *cycle += 1;
            }
        })
    })?;
    if let Some((path, mut w, _, err)) = scores_out {
        if let Some(source) = err.or_else(|| w.flush().err()) {
            return Err(CliError::Write {
                path: path.display().to_string(),
                source,
            });
        }
    }

    write_file(&a.out.join("trajectory.csv"), |w| result.write_trajectory_csv(w))?;
    let json = result.to_json();
    write_file(&a.out.join("result.json"), |w| writeln!(w, "{json}"))?;
    if a.dump_grid {
        write_file(&a.out.join("grid.csv"), |w| nav.grid().write_csv(w))?;
    }
    println!("{json}");
    Ok(())
}

fn load_scenarios(dir: &Path) -> Result<Vec<Scenario>, CliError> {
    let entries = fs::read_dir(dir).map_err(|source| CliError::Map {
        path: dir.display().to_string(),
        source: MapError::Io {
            path: dir.display().to_string(),
            source,
        },
    })?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let id = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let map = load_map(p)?;
            Scenario::from_map(id, map)
                .ok_or_else(|| CliError::Usage(format!("{}: map has no start or no goals", p.display())))
        })
        .collect()
}

fn bench(a: BenchArgs) -> Result<(), CliError> {
    let config = load_config(&a.config)?;
    let scenarios = match &a.maps {
        Some(dir) => load_scenarios(dir)?,
        None => standard_suite().map_err(CliError::Generate)?,
    };
    out_dir(&a.out)?;
    let opts = SuiteOptions {
        trials: a.trials,
        t_limit: a.t_limit,
        base_seed: a.seed,
        workers: a.workers.unwrap_or(0),
        sensor: SensorModel::for_robot(&config.robot),
        ..SuiteOptions::default()
    };
    let report = run_suite(&scenarios, &config, &opts)?;
    write_file(&a.out.join("results.csv"), |w| write_results_csv(&report.records, w))?;
    let json = report.summary.to_json();
    write_file(&a.out.join("summary.json"), |w| writeln!(w, "{json}"))?;
    let s = &report.summary;
    for m in &s.maps {
        println!("{:<12} {:>3}/{:<3} success", m.map, m.successes, m.trials);
    }
    println!("overall      {:>3}/{:<3} success ({:.1}%)", s.successes, s.trials, 100.0 * s.success_rate);
    Ok(())
}

fn time(a: TimeArgs) -> Result<(), CliError> {
    let config = load_config(&a.config)?;
    out_dir(&a.out)?;
    let opts = TimingOptions {
        cycles: a.cycles,
        serial: a.timing_serial,
        ..TimingOptions::default()
    };
    let rows = time_stages(&standard_variants(&config), &opts)?;
    write_file(&a.out.join("timings.csv"), |w| write_timings_csv(&rows, w))?;
    write_timings_csv(&rows, io::stdout().lock()).map_err(|source| CliError::Write {
        path: "stdout".into(),
        source,
    })
}

fn dump(a: DumpArgs) -> Result<(), CliError> {
    let config: Config = load_config(&a.config)?;
    if !a.dump_tentacles && !a.dump_grid {
        return Err(CliError::Usage("nothing to dump: pass --dump-tentacles and/or --dump-grid".into()));
    }
    out_dir(&a.out)?;
    let bank = Arc::new(TentacleBank::build(&config.offline)?);
    if a.dump_tentacles {
        write_file(&a.out.join("tentacles.jsonl"), |w| bank.write_jsonl(w))?;
    }
    if a.dump_grid {
        let path = a
            .map
            .as_ref()
            .ok_or_else(|| CliError::Usage("--dump-grid needs --map".into()))?;
        let map = load_map(path)?;
        let start = a
            .start
            .or(map.start.map(Point3::from))
            .ok_or_else(|| CliError::Usage("no start: pass --start x,y,z".into()))?;
        let state = RobotState::at(start, a.yaw);
        let world = Simulation::new(map, SensorModel::for_robot(&config.robot));
        let cloud = world.sense(&state.pose(), 0.0, 0);
        let mut grid = OccupancyGrid::new(*bank.dims());
        grid.rebuild(std::iter::once(&cloud), &state.pose());
        write_file(&a.out.join("grid.csv"), |w| grid.write_csv(w))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::Bounds;

    #[test]
    fn points_parse() {
        assert_eq!(parse_point("8,8,1.5").unwrap(), Point3::new(8.0, 8.0, 1.5));
        assert_eq!(parse_point(" 1, -2 ,3").unwrap(), Point3::new(1.0, -2.0, 3.0));
        assert!(parse_point("1,2").is_err());
        assert!(parse_point("1,2,x").is_err());
        assert!(parse_point("1,2,inf").is_err());
    }

    #[test]
    fn run_requires_config() {
        let err = Cli::try_parse_from(["tentacle-nav", "run", "--map", "m.json"]).unwrap_err();
        assert!(err.to_string().contains("--config"));
    }

    #[test]
    fn goals_keep_their_order() {
        let cli = Cli::try_parse_from([
            "tentacle-nav", "run", "--config", "c.json", "--map", "m.json", "--goal", "1,0,1", "--goal", "2,0,1",
        ])
        .unwrap();
        let Command::Run(a) = cli.command else {
            panic!("parsed into the wrong subcommand");
        };
        assert_eq!(a.goals, vec![Point3::new(1.0, 0.0, 1.0), Point3::new(2.0, 0.0, 1.0)]);
    }

    #[test]
    fn unknown_flag_is_rejected() {
        assert_ne!(main(["tentacle-nav", "bench", "--config", "c.json", "--bogus"]), 0);
    }

    #[test]
    fn missing_config_file_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let missing = dir.path().join("nope.json");
        let err = dispatch(Command::Time(TimeArgs {
            config: missing,
            cycles: 1,
            timing_serial: false,
            out: dir.path().into(),
        }))
        .unwrap_err();
        assert!(matches!(err, CliError::Config(ConfigError::Io { .. })));
        assert!(err.to_string().starts_with("cannot read config"));
    }

    #[test]
    fn bounds_of_generated_maps_are_kept() {
        let dir = tempfile::tempdir().unwrap();
        gen_map(GenMapArgs {
            kind: MapKind::Forest,
            seed: 2,
            density: Some(0.1),
            suite: false,
            out: dir.path().into(),
        })
        .unwrap();
        let map = WorldMap::load(dir.path().join("forest2.json")).unwrap();
        assert_eq!(map.obstacles.len(), 10);
        assert_eq!(map.bounds, Bounds { min: [0.0, 0.0, 0.0], max: [10.0, 10.0, 10.0] });
    }
}
