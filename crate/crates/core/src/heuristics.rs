//! Per-cycle tentacle scoring: navigability, clearance, nearby clutter, goal
//! closeness and smoothness, the weighted cost and best-tentacle selection.

use nalgebra::{Isometry3, Point3};

use crate::grid::OccupancyGrid;
use crate::params::OnlineParams;
use crate::tentacles::{ClassifiedVoxel, Tentacle, TentacleBank, VoxelClass};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HeuristicError {
    #[error("tentacle has zero total voxel weight")]
    DegenerateBank,
}

/// Ternary navigability label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Navigability {
    /// Clear over the full length.
    Navigable,
    /// Obstructed before the crash distance.
    NonNavigable,
    /// Obstructed beyond the crash distance.
    TemporarilyNavigable,
}

impl Navigability {
    /// Numeric label: 1, 0 or -1.
    pub fn label(self) -> i8 {
        match self {
            Navigability::Navigable => 1,
            Navigability::NonNavigable => 0,
            Navigability::TemporarilyNavigable => -1,
        }
    }

    pub fn is_drivable(self) -> bool {
        self != Navigability::NonNavigable
    }
}

/// Occupancy projected onto one tentacle.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyBins {
    /// Occupied priority voxels per closest sample.
    pub counts: Vec<u32>,
    /// Sum of weights over priority and support voxels.
    pub total_weight: f64,
    /// Belief-weighted sum over priority and support voxels.
    pub occupied_weight: f64,
}

pub fn bin_occupancy(
    voxels: &[ClassifiedVoxel],
    grid: &OccupancyGrid,
    samples: usize,
) -> OccupancyBins {
    let beliefs = grid.beliefs();
    let mut counts = vec![0u32; samples];
    let mut total_weight = 0.0;
    let mut occupied_weight = 0.0;
    for v in voxels {
        let a = beliefs[v.index as usize];
        total_weight += v.beta;
        if a > 0.0 {
            occupied_weight += v.beta * a;
            if v.class == VoxelClass::Priority {
                counts[v.sample as usize] += 1;
            }
        }
    }
    OccupancyBins {
        counts,
        total_weight,
        occupied_weight,
    }
}

/// Navigability label, obstacle distance along the tentacle and the zero-based
/// index of the first flagged sample.
pub fn navigability(
    bins: &OccupancyBins,
    online: &OnlineParams,
    length: f64,
) -> (Navigability, f64, Option<usize>) {
    let samples = bins.counts.len();
    let first = bins.counts.iter().position(|&h| h > online.tau_d_err);
    // an obstruction at the last sample still leaves the full length clear
    let l_obs = match first {
        Some(i) if i + 1 < samples => length * (i + 1) as f64 / samples as f64,
        _ => length,
    };
    let crash = online.crash_distance(length);
    let label = if l_obs == length {
        Navigability::Navigable
    } else if l_obs < crash {
        Navigability::NonNavigable
    } else {
        Navigability::TemporarilyNavigable
    };
    (label, l_obs, first)
}

/// 0 for a fully clear tentacle, 1 when blocked at its origin.
pub fn clearance(l_obs: f64, length: f64) -> f64 {
    (1.0 - l_obs / length).clamp(0.0, 1.0)
}

pub fn clutter(bins: &OccupancyBins) -> Result<f64, HeuristicError> {
    if bins.total_weight <= 0.0 {
        return Err(HeuristicError::DegenerateBank);
    }
    Ok((bins.occupied_weight / bins.total_weight).clamp(0.0, 1.0))
}

/// Distance from the designated sample, placed in the world frame, to the goal.
pub fn goal_closeness(
    tentacle: &Tentacle,
    robot_pose: &Isometry3<f64>,
    goal: &Point3<f64>,
    designated: usize,
) -> f64 {
    (robot_pose.transform_point(&tentacle.samples[designated]) - goal).norm()
}

/// Robot-frame distance between designated samples of this tentacle and the
/// previously selected one.
pub fn smoothness(tentacle: &Tentacle, previous: Option<&Tentacle>, designated: usize) -> f64 {
    match previous {
        Some(prev) if prev.id != tentacle.id => {
            (tentacle.samples[designated] - prev.samples[designated]).norm()
        }
        _ => 0.0,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeuristicScores {
    pub tentacle: usize,
    pub nav: Navigability,
    pub clear: f64,
    pub clut: f64,
    pub close_raw: f64,
    pub close: f64,
    pub smo_raw: f64,
    pub smo: f64,
    pub cost: f64,
    pub l_obs: f64,
    pub k_obs: Option<usize>,
}

/// Everything needed to score a tentacle apart from its occupancy bins.
#[derive(Debug, Clone, Copy)]
pub struct ScoringContext<'a> {
    pub bank: &'a TentacleBank,
    pub online: &'a OnlineParams,
    pub robot_pose: &'a Isometry3<f64>,
    pub goal: &'a Point3<f64>,
    pub previous_best: Option<usize>,
}

/// Raw metrics for one tentacle. Normalized metrics and cost are filled in
/// by [`apply_costs`].
pub fn score_tentacle(
    ctx: &ScoringContext<'_>,
    id: usize,
    bins: &OccupancyBins,
) -> Result<HeuristicScores, HeuristicError> {
    let tentacle = ctx.bank.tentacle(id);
    let designated = ctx.online.designated_index(tentacle.samples.len());
    let (nav, l_obs, k_obs) = navigability(bins, ctx.online, tentacle.length);
    let previous = ctx.previous_best.map(|j| ctx.bank.tentacle(j));
    Ok(HeuristicScores {
        tentacle: id,
        nav,
        clear: clearance(l_obs, tentacle.length),
        clut: clutter(bins)?,
        close_raw: goal_closeness(tentacle, ctx.robot_pose, ctx.goal, designated),
        close: 0.0,
        smo_raw: smoothness(tentacle, previous, designated),
        smo: 0.0,
        cost: 0.0,
        l_obs,
        k_obs,
    })
}

fn min_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    })
}

fn normalize(v: f64, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        (v - lo) / (hi - lo)
    } else {
        0.0
    }
}

/// Min-max normalizes closeness and smoothness across the cycle's tentacles
/// and writes the weighted cost of each.
pub fn apply_costs(scores: &mut [HeuristicScores], online: &OnlineParams) {
    let close_range = min_max(scores.iter().map(|s| s.close_raw));
    let smo_range = min_max(scores.iter().map(|s| s.smo_raw));
    for s in scores.iter_mut() {
        s.close = normalize(s.close_raw, close_range);
        s.smo = normalize(s.smo_raw, smo_range);
        s.cost = online.lambda_clear * s.clear
            + online.lambda_clut * s.clut
            + online.lambda_close * s.close
            + online.lambda_smo * s.smo;
    }
}

/// Lowest-cost drivable tentacle. Ties go to the previous best, then to the
/// lowest id. `None` when every tentacle is non-navigable.
pub fn select_best(scores: &[HeuristicScores], previous_best: Option<usize>) -> Option<usize> {
    let mut best: Option<&HeuristicScores> = None;
    for s in scores.iter().filter(|s| s.nav.is_drivable()) {
        best = match best {
            None => Some(s),
            Some(b) if s.cost < b.cost => Some(s),
            Some(b) if s.cost == b.cost && Some(s.tentacle) == previous_best => Some(s),
            keep => keep,
        };
    }
    best.map(|s| s.tentacle)
}
