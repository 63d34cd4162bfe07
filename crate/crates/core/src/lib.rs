//! Map-free 3D reactive navigation with precomputed tentacles.
//!
//! Each cycle the recent point clouds are projected into a robot-centered
//! voxel grid, every tentacle is scored from the occupancy of its priority
//! and support voxels plus goal closeness and smoothness, and the robot is
//! moved a velocity-limited step along the best drivable tentacle.
//!
//! [`sim`] provides procedural obstacle maps and a ray-cast depth sensor,
//! [`bench`] runs seeded benchmark suites and stage timing studies, and
//! [`cli`] wires everything to the `tentacle-nav` binary.

pub mod bench;
pub mod cli;
pub mod grid;
pub mod heuristics;
pub mod navigator;
pub mod params;
pub mod sim;
pub mod tentacles;

pub use grid::{CloudPoint, GridDims, OccupancyGrid, PointCloud};
pub use heuristics::{HeuristicScores, Navigability};
pub use navigator::{NavResult, Navigator, RobotState, Simulation, World};
pub use params::{load_config, Config, OfflineParams, OnlineParams, RobotParams};
pub use sim::{SensorModel, WorldMap};
pub use tentacles::{ClassifiedVoxel, Tentacle, TentacleBank, VoxelClass};
