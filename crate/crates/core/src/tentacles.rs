//! Tentacle generation and per-tentacle priority/support voxel extraction.
//!
//! Tentacles are straight rays fixed to the robot frame. Each one carries
//! `n` samples at arc distances `k * length / n` for `k = 1..=n`; sample
//! index `i` in the stored vector is sample number `k = i + 1`.

use std::io::{self, Write};

use nalgebra::{Point3, Vector3};
use rayon::prelude::*;
use serde_json::json;

use crate::grid::GridDims;
use crate::params::OfflineParams;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BankError {
    #[error("tentacle {0} has no priority or support voxels inside the grid")]
    Degenerate(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tentacle {
    pub id: usize,
    pub samples: Vec<Point3<f64>>,
    pub yaw: f64,
    pub pitch: f64,
    pub length: f64,
    /// Unit vector along the ray.
    pub heading: Vector3<f64>,
}

impl Tentacle {
    /// Straight tentacle from the robot origin. Positive pitch points up.
    pub fn straight(id: usize, yaw: f64, pitch: f64, length: f64, samples: usize) -> Self {
        let dir = direction(yaw, pitch);
        let spacing = length / samples as f64;
        let samples = (1..=samples)
            .map(|k| Point3::from(dir * (k as f64 * spacing)))
            .collect();
        Self {
            id,
            samples,
            yaw,
            pitch,
            length,
            heading: dir,
        }
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.samples.len() as f64
    }

    /// Index of the sample closest to `p`, lowest index on ties.
    ///
    /// Projects onto the ray and refines among the neighbouring samples,
    /// which is exact for evenly spaced samples on a straight ray.
    pub fn closest_sample(&self, p: &Point3<f64>) -> (usize, f64) {
        let n = self.samples.len();
        let along = p.coords.dot(&self.heading) / self.spacing() - 1.0;
        let guess = along.round().clamp(0.0, (n - 1) as f64) as usize;
        let lo = guess.saturating_sub(1);
        let hi = (guess + 1).min(n - 1);
        let mut best = (lo, (p - self.samples[lo]).norm());
        for k in lo + 1..=hi {
            let d = (p - self.samples[k]).norm();
            if d < best.1 {
                best = (k, d);
            }
        }
        best
    }
}

pub fn direction(yaw: f64, pitch: f64) -> Vector3<f64> {
    Vector3::new(pitch.cos() * yaw.cos(), pitch.cos() * yaw.sin(), pitch.sin())
}

/// `count` angles spread uniformly over `[-coverage / 2, coverage / 2]`,
/// exactly symmetric about zero.
pub fn uniform_angles(count: usize, coverage: f64) -> Vec<f64> {
    if count <= 1 {
        return vec![0.0; count];
    }
    let span = (count - 1) as f64;
    (0..count)
        .map(|i| (2.0 * i as f64 - span) * coverage / (2.0 * span))
        .collect()
}

/// Builds the `n_yaw * n_pitch` tentacles. Ids are `pitch_index * n_yaw +
/// yaw_index`.
pub fn generate_tentacles(offline: &OfflineParams) -> Vec<Tentacle> {
    let yaws = uniform_angles(offline.n_yaw, offline.yaw_coverage);
    let pitches = uniform_angles(offline.n_pitch, offline.pitch_coverage);
    let mut out = Vec::with_capacity(yaws.len() * pitches.len());
    for &pitch in &pitches {
        for &yaw in &yaws {
            out.push(Tentacle::straight(
                out.len(),
                yaw,
                pitch,
                offline.tentacle_length,
                offline.samples_per_tentacle,
            ));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VoxelClass {
    Support = 0,
    Priority = 1,
}

/// A voxel near a tentacle: its linear index, occupancy weight, closest
/// sample index and class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifiedVoxel {
    pub beta: f64,
    pub index: u32,
    pub sample: u16,
    pub class: VoxelClass,
}

/// Thresholds and weights used to classify voxels around a tentacle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyParams {
    pub tau_priority: f64,
    pub tau_support: f64,
    pub beta_max: f64,
    pub alpha_beta: f64,
}

impl From<&OfflineParams> for ClassifyParams {
    fn from(p: &OfflineParams) -> Self {
        Self {
            tau_priority: p.tau_priority,
            tau_support: p.tau_support,
            beta_max: p.beta_max,
            alpha_beta: p.alpha_beta,
        }
    }
}

impl ClassifyParams {
    /// Class and weight of a voxel at `distance` from its closest sample.
    #[inline]
    pub fn classify(&self, distance: f64) -> Option<(VoxelClass, f64)> {
        if distance < self.tau_priority {
            Some((VoxelClass::Priority, self.beta_max))
        } else if distance < self.tau_support {
            Some((VoxelClass::Support, self.beta_max / (self.alpha_beta * distance)))
        } else {
            None
        }
    }
}

/// Priority and support voxels of one tentacle, in ascending index order.
///
/// Only the cells of the sample bounding box inflated by `tau_support` are
/// visited; anything outside it is farther than `tau_support` from every
/// sample.
pub fn classify_voxels(
    tentacle: &Tentacle,
    params: &ClassifyParams,
    dims: &GridDims,
) -> Vec<ClassifiedVoxel> {
    let mut lo = [usize::MAX; 3];
    let mut hi = [0usize; 3];
    for axis in 0..3 {
        let (min, max) = tentacle
            .samples
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
                (a.min(p[axis]), b.max(p[axis]))
            });
        let n = dims.counts[axis] as i64;
        let half = n / 2;
        let first = half + ((min - params.tau_support) / dims.voxel).floor() as i64;
        let last = half + ((max + params.tau_support) / dims.voxel).floor() as i64;
        let first = first.clamp(0, n - 1);
        let last = last.clamp(0, n - 1);
        lo[axis] = first as usize;
        hi[axis] = last as usize;
    }

    let mut out = Vec::new();
    for iz in lo[2]..=hi[2] {
        for iy in lo[1]..=hi[1] {
            for ix in lo[0]..=hi[0] {
                let cell = [ix, iy, iz];
                let center = dims.cell_center(cell);
                let (sample, distance) = tentacle.closest_sample(&center);
                if let Some((class, beta)) = params.classify(distance) {
                    out.push(ClassifiedVoxel {
                        beta,
                        index: dims.index_of_cell(cell) as u32,
                        sample: sample as u16,
                        class,
                    });
                }
            }
        }
    }
    out
}

/// All tentacles with their classified voxels, immutable once built.
#[derive(Debug, Clone)]
pub struct TentacleBank {
    dims: GridDims,
    tentacles: Vec<Tentacle>,
    classified: Vec<Vec<ClassifiedVoxel>>,
}

impl TentacleBank {
    pub fn build(offline: &OfflineParams) -> Result<Self, BankError> {
        let dims = GridDims::new(offline.grid_counts, offline.voxel_dim);
        Self::from_tentacles(generate_tentacles(offline), ClassifyParams::from(offline), dims)
    }

    pub fn from_tentacles(
        tentacles: Vec<Tentacle>,
        params: ClassifyParams,
        dims: GridDims,
    ) -> Result<Self, BankError> {
        let classified: Vec<Vec<ClassifiedVoxel>> = tentacles
            .par_iter()
            .map(|t| classify_voxels(t, &params, &dims))
            .collect();
        if let Some(j) = classified.iter().position(Vec::is_empty) {
            return Err(BankError::Degenerate(j));
        }
        Ok(Self {
            dims,
            tentacles,
            classified,
        })
    }

    pub fn dims(&self) -> &GridDims {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.tentacles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tentacles.is_empty()
    }

    pub fn tentacles(&self) -> &[Tentacle] {
        &self.tentacles
    }

    pub fn tentacle(&self, id: usize) -> &Tentacle {
        &self.tentacles[id]
    }

    pub fn voxels(&self, id: usize) -> &[ClassifiedVoxel] {
        &self.classified[id]
    }

    pub fn classified_count(&self) -> usize {
        self.classified.iter().map(Vec::len).sum()
    }

    /// One JSON object per line: id, angles, samples and voxel counts.
    pub fn write_jsonl(&self, mut out: impl Write) -> io::Result<()> {
        for (t, voxels) in self.tentacles.iter().zip(&self.classified) {
            let priority = voxels
                .iter()
                .filter(|v| v.class == VoxelClass::Priority)
                .count();
            let record = json!({
                "id": t.id,
                "yaw": t.yaw,
                "pitch": t.pitch,
                "length": t.length,
                "samples": t.samples.iter().map(|p| [p.x, p.y, p.z]).collect::<Vec<_>>(),
                "priority_voxels": priority,
                "support_voxels": voxels.len() - priority,
            });
            writeln!(out, "{record}")?;
        }
        Ok(())
    }
}
