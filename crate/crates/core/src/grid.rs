//! Robot-centered occupancy grid stored as a flat array.
//!
//! Voxel `(ix, iy, iz)` lives at `ix + iy * nx + iz * nx * ny`. Along each
//! axis the cell of coordinate `c` is `n / 2 + floor(c / d)`, so with even
//! counts the robot origin sits on a voxel corner.

use std::io::{self, Write};

use nalgebra::{Isometry3, Point3};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GridError {
    #[error("voxel index {index} out of range for a grid of {len} voxels")]
    IndexOutOfRange { index: usize, len: usize },
}

/// Grid layout: voxel counts per axis and the cubic voxel edge length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridDims {
    pub counts: [usize; 3],
    pub voxel: f64,
}

impl GridDims {
    pub fn new(counts: [usize; 3], voxel: f64) -> Self {
        Self { counts, voxel }
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid width, length and height in meters.
    pub fn extents(&self) -> [f64; 3] {
        self.counts.map(|n| n as f64 * self.voxel)
    }

    /// Cell coordinates of a robot-frame point, `None` when outside the grid.
    #[inline]
    pub fn cell_of(&self, p: &Point3<f64>) -> Option<[usize; 3]> {
        let mut cell = [0usize; 3];
        for axis in 0..3 {
            let n = self.counts[axis];
            let c = (n / 2) as i64 + (p[axis] / self.voxel).floor() as i64;
            if c < 0 || c >= n as i64 {
                return None;
            }
            cell[axis] = c as usize;
        }
        Some(cell)
    }

    #[inline]
    pub fn index_of_cell(&self, cell: [usize; 3]) -> usize {
        let [nx, ny, _] = self.counts;
        cell[0] + cell[1] * nx + cell[2] * nx * ny
    }

    #[inline]
    pub fn cell_of_index(&self, index: usize) -> [usize; 3] {
        let [nx, ny, _] = self.counts;
        [index % nx, (index / nx) % ny, index / (nx * ny)]
    }

    /// Linear index of a robot-frame point, `None` when outside the grid.
    #[inline]
    pub fn linearize(&self, p: &Point3<f64>) -> Option<usize> {
        self.cell_of(p).map(|c| self.index_of_cell(c))
    }

    /// Center of a cell given by its integer coordinates.
    #[inline]
    pub fn cell_center(&self, cell: [usize; 3]) -> Point3<f64> {
        let coord = |axis: usize| {
            (cell[axis] as f64 - (self.counts[axis] / 2) as f64 + 0.5) * self.voxel
        };
        Point3::new(coord(0), coord(1), coord(2))
    }

    /// Center of voxel `index` in the robot frame.
    pub fn delinearize(&self, index: usize) -> Result<Point3<f64>, GridError> {
        if index >= self.len() {
            return Err(GridError::IndexOutOfRange {
                index,
                len: self.len(),
            });
        }
        Ok(self.cell_center(self.cell_of_index(index)))
    }
}

/// One occupied point reported by a sensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloudPoint {
    /// Position in the sensor frame.
    pub position: Point3<f64>,
    /// Occupancy belief in `[0, 1]`.
    pub belief: f64,
}

/// A single sensor scan.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    pub points: Vec<CloudPoint>,
    /// Sensor frame to world frame at capture time.
    pub frame_transform: Isometry3<f64>,
    pub timestamp: f64,
}

impl PointCloud {
    pub fn empty(frame_transform: Isometry3<f64>, timestamp: f64) -> Self {
        Self {
            points: Vec::new(),
            frame_transform,
            timestamp,
        }
    }
}

/// Average belief per voxel, rebuilt from the scan history every cycle.
#[derive(Debug, Clone)]
pub struct OccupancyGrid {
    dims: GridDims,
    belief: Vec<f64>,
    counts: Vec<u32>,
    touched: Vec<u32>,
}

impl OccupancyGrid {
    pub fn new(dims: GridDims) -> Self {
        let len = dims.len();
        Self {
            dims,
            belief: vec![0.0; len],
            counts: vec![0; len],
            touched: Vec::new(),
        }
    }

    pub fn dims(&self) -> &GridDims {
        &self.dims
    }

    /// The flat belief array.
    pub fn beliefs(&self) -> &[f64] {
        &self.belief
    }

    #[inline]
    pub fn belief(&self, index: usize) -> f64 {
        self.belief[index]
    }

    /// Indices of voxels holding at least one point, in first-hit order.
    pub fn occupied(&self) -> impl Iterator<Item = usize> + '_ {
        self.touched.iter().map(|&i| i as usize)
    }

    pub fn point_count(&self, index: usize) -> u32 {
        self.counts[index]
    }

    /// Clears the voxels touched by the previous rebuild.
    pub fn clear(&mut self) {
        for &i in &self.touched {
            self.belief[i as usize] = 0.0;
            self.counts[i as usize] = 0;
        }
        self.touched.clear();
    }

    /// Adds one robot-frame point. Returns false when it falls outside.
    #[inline]
    fn accumulate(&mut self, p: &Point3<f64>, belief: f64) -> bool {
        let Some(index) = self.dims.linearize(p) else {
            return false;
        };
        if self.counts[index] == 0 {
            self.touched.push(index as u32);
        }
        self.counts[index] += 1;
        self.belief[index] += belief;
        true
    }

    /// Clears the grid and projects every buffered scan into the current
    /// robot frame, leaving each voxel with the mean belief of its points.
    ///
    /// Cost is linear in the number of buffered points.
    pub fn rebuild<'a>(
        &mut self,
        history: impl IntoIterator<Item = &'a PointCloud>,
        robot_pose: &Isometry3<f64>,
    ) {
        self.clear();
        let world_to_robot = robot_pose.inverse();
        for cloud in history {
            let sensor_to_robot = world_to_robot * cloud.frame_transform;
            for point in &cloud.points {
                let belief = point.belief.clamp(0.0, 1.0);
                if belief.is_nan() {
                    continue;
                }
                let p = sensor_to_robot.transform_point(&point.position);
                self.accumulate(&p, belief);
            }
        }
        for &i in &self.touched {
            let i = i as usize;
            self.belief[i] /= self.counts[i] as f64;
        }
    }

    /// Writes `ix,iy,iz,belief` rows for every voxel that holds points.
    pub fn write_csv(&self, mut out: impl Write) -> io::Result<()> {
        writeln!(out, "ix,iy,iz,belief")?;
        let mut indices: Vec<usize> = self.occupied().collect();
        indices.sort_unstable();
        for index in indices {
            let [ix, iy, iz] = self.dims.cell_of_index(index);
            writeln!(out, "{ix},{iy},{iz},{}", self.belief[index])?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Translation3, UnitQuaternion};
    use proptest::prelude::*;

    fn dims4() -> GridDims {
        GridDims::new([4, 4, 4], 1.0)
    }

    fn cloud(points: &[([f64; 3], f64)], pose: Isometry3<f64>) -> PointCloud {
        PointCloud {
            points: points
                .iter()
                .map(|&(p, belief)| CloudPoint {
                    position: Point3::from(p),
                    belief,
                })
                .collect(),
            frame_transform: pose,
            timestamp: 0.0,
        }
    }

    #[test]
    fn linearize_examples() {
        let d = dims4();
        assert_eq!(d.cell_of(&Point3::origin()), Some([2, 2, 2]));
        assert_eq!(d.linearize(&Point3::origin()), Some(42));
        assert_eq!(d.cell_of(&Point3::new(1.9, -1.7, 0.2)), Some([3, 0, 2]));
        assert_eq!(d.linearize(&Point3::new(1.9, -1.7, 0.2)), Some(35));
        assert_eq!(d.linearize(&Point3::new(2.1, 0.0, 0.0)), None);
        assert_eq!(d.linearize(&Point3::new(0.0, -2.01, 0.0)), None);
    }

    #[test]
    fn delinearize_examples() {
        let d = dims4();
        assert_eq!(d.delinearize(42).unwrap(), Point3::new(0.5, 0.5, 0.5));
        assert_eq!(d.delinearize(0).unwrap(), Point3::new(-1.5, -1.5, -1.5));
        assert_eq!(d.delinearize(63).unwrap(), Point3::new(1.5, 1.5, 1.5));
        assert_eq!(
            d.delinearize(64),
            Err(GridError::IndexOutOfRange { index: 64, len: 64 })
        );
    }

    #[test]
    fn odd_counts_round_trip() {
        let d = GridDims::new([3, 5, 7], 0.3);
        for o in 0..d.len() {
            assert_eq!(d.linearize(&d.delinearize(o).unwrap()), Some(o));
        }
    }

    #[test]
    fn empty_history_gives_empty_grid() {
        let mut grid = OccupancyGrid::new(dims4());
        grid.rebuild(std::iter::empty(), &Isometry3::identity());
        assert!(grid.beliefs().iter().all(|&b| b == 0.0));
        assert_eq!(grid.occupied().count(), 0);
    }

    #[test]
    fn beliefs_in_one_voxel_are_averaged() {
        let mut grid = OccupancyGrid::new(dims4());
        let c = cloud(
            &[([0.1, 0.1, 0.1], 0.4), ([0.7, 0.2, 0.9], 0.8)],
            Isometry3::identity(),
        );
        grid.rebuild([&c], &Isometry3::identity());
        assert!((grid.belief(42) - 0.6).abs() < 1e-12);
        assert_eq!(grid.point_count(42), 2);
        assert_eq!(grid.occupied().count(), 1);
    }

    #[test]
    fn rebuild_clears_previous_contents() {
        let mut grid = OccupancyGrid::new(dims4());
        let c = cloud(&[([1.5, 1.5, 1.5], 1.0)], Isometry3::identity());
        grid.rebuild([&c], &Isometry3::identity());
        assert_eq!(grid.belief(63), 1.0);
        grid.rebuild(std::iter::empty(), &Isometry3::identity());
        assert_eq!(grid.belief(63), 0.0);
        assert_eq!(grid.point_count(63), 0);
    }

    #[test]
    fn old_scan_shifts_back_after_forward_motion() {
        let dims = GridDims::new([10, 10, 10], 0.5);
        let mut grid = OccupancyGrid::new(dims);
        // point 1.2 m ahead of the robot at capture time
        let scan = cloud(&[([1.2, 0.3, 0.1], 1.0)], Isometry3::identity());
        let moved = Isometry3::translation(1.0, 0.0, 0.0);
        grid.rebuild([&scan], &moved);
        // frame-composition oracle: world point minus robot translation
        let expected = Point3::new(1.2 - 1.0, 0.3, 0.1);
        let index = dims.linearize(&expected).unwrap();
        assert_eq!(grid.occupied().collect::<Vec<_>>(), vec![index]);
        assert_eq!(grid.belief(index), 1.0);
    }

    #[test]
    fn rotated_sensor_frame_is_composed() {
        let dims = GridDims::new([10, 10, 10], 0.5);
        let mut grid = OccupancyGrid::new(dims);
        let sensor_pose = Isometry3::from_parts(
            Translation3::new(0.0, 0.0, 0.0),
            UnitQuaternion::from_euler_angles(0.0, 0.0, std::f64::consts::FRAC_PI_2),
        );
        // 1 m along the sensor x axis is 1 m along world y
        let scan = cloud(&[([1.0, 0.0, 0.0], 1.0)], sensor_pose);
        grid.rebuild([&scan], &Isometry3::identity());
        let index = dims.linearize(&Point3::new(0.0, 1.0, 0.0)).unwrap();
        assert_eq!(grid.occupied().collect::<Vec<_>>(), vec![index]);
    }

    #[test]
    fn out_of_bounds_points_are_dropped() {
        let mut grid = OccupancyGrid::new(dims4());
        let c = cloud(&[([5.0, 0.0, 0.0], 1.0)], Isometry3::identity());
        grid.rebuild([&c], &Isometry3::identity());
        assert_eq!(grid.occupied().count(), 0);
    }

    #[test]
    fn csv_dump_lists_occupied_cells() {
        let mut grid = OccupancyGrid::new(dims4());
        let c = cloud(&[([0.5, 0.5, 0.5], 0.5)], Isometry3::identity());
        grid.rebuild([&c], &Isometry3::identity());
        let mut out = Vec::new();
        grid.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "ix,iy,iz,belief\n2,2,2,0.5\n");
    }

    proptest! {
        #[test]
        fn beliefs_stay_in_unit_interval(
            pts in prop::collection::vec(
                ((-2.5f64..2.5, -2.5f64..2.5, -2.5f64..2.5), -0.5f64..1.5), 0..200)
        ) {
            let mut grid = OccupancyGrid::new(dims4());
            let pts: Vec<_> = pts.into_iter().map(|((x, y, z), b)| ([x, y, z], b)).collect();
            let c = cloud(&pts, Isometry3::identity());
            grid.rebuild([&c, &c], &Isometry3::identity());
            prop_assert!(grid.beliefs().iter().all(|&b| (0.0..=1.0).contains(&b)));
        }

        #[test]
        fn rebuild_is_deterministic(
            pts in prop::collection::vec(((-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0), 0f64..1.0), 0..100),
            yaw in -3.0f64..3.0,
        ) {
            let pts: Vec<_> = pts.into_iter().map(|((x, y, z), b)| ([x, y, z], b)).collect();
            let c = cloud(&pts, Isometry3::identity());
            let pose = Isometry3::new(nalgebra::Vector3::new(0.2, -0.1, 0.0), nalgebra::Vector3::z() * yaw);
            let mut a = OccupancyGrid::new(dims4());
            let mut b = OccupancyGrid::new(dims4());
            a.rebuild([&c], &pose);
            b.rebuild([&c], &pose);
            prop_assert_eq!(a.beliefs(), b.beliefs());
        }
    }
}
