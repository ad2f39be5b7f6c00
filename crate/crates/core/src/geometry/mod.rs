//! Sets `E` and their covariograms `g_E(y) = |E ∩ (E + y)|`.

mod covariogram;
mod intervals;
pub mod lattice;
mod shapes;
mod voxel;

pub use covariogram::{
    covariogram, covariogram_exact, covariogram_grid, covariogram_grid_with, intervals_covariogram, CovSource,
    Covariogram, GridMethod, IntervalTable, ShiftFunction,
};
pub use intervals::{shifted_loss, shifted_overlap, IntervalUnion};
pub use lattice::LatticeTable;
pub use shapes::AnalyticShape;
pub use voxel::{VoxelSet, MAX_CELLS};
pub(crate) use voxel::suggest_h;

use crate::error::Result;

/// Any of the supported set representations.
#[derive(Debug, Clone, PartialEq)]
pub enum SetGeometry {
    Intervals(IntervalUnion),
    Shape(AnalyticShape),
    Voxels(VoxelSet),
}

impl SetGeometry {
    pub fn dim(&self) -> usize {
        match self {
            SetGeometry::Intervals(_) => 1,
            SetGeometry::Shape(s) => s.dim(),
            SetGeometry::Voxels(v) => v.dim(),
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            SetGeometry::Intervals(e) => e.total_length(),
            SetGeometry::Shape(s) => s.volume(),
            SetGeometry::Voxels(v) => v.volume(),
        }
    }

    /// Bounding box `(lo, hi)` in the first `dim()` coordinates.
    pub fn bounding_box(&self) -> ([f64; 3], [f64; 3]) {
        match self {
            SetGeometry::Intervals(e) => {
                let (a, b) = e.bounds();
                ([a, 0.0, 0.0], [b, 0.0, 0.0])
            }
            SetGeometry::Shape(s) => s.bounding_box(),
            SetGeometry::Voxels(v) => {
                let (lo, hi) = v.occupied_bounds();
                let o = v.origin();
                let h = v.spacing();
                let mut a = [0.0; 3];
                let mut b = [0.0; 3];
                for i in 0..v.dim() {
                    a[i] = o[i] + lo[i] as f64 * h;
                    b[i] = o[i] + (hi[i] + 1) as f64 * h;
                }
                (a, b)
            }
        }
    }

    pub fn contains(&self, x: &[f64; 3]) -> bool {
        match self {
            SetGeometry::Intervals(e) => e.contains(x[0]),
            SetGeometry::Shape(s) => s.contains(x),
            SetGeometry::Voxels(v) => v.contains(x),
        }
    }
}

/// Classical perimeter `Per(E)`; for voxel sets the perimeter of the union of cells.
pub fn classical_perimeter(set: &SetGeometry) -> f64 {
    match set {
        SetGeometry::Intervals(e) => e.perimeter(),
        SetGeometry::Shape(s) => s.perimeter(),
        SetGeometry::Voxels(v) => v.perimeter(),
    }
}

/// Edge lengths and outward unit normals of a polygon.
pub fn boundary_decomposition(p: &AnalyticShape) -> Result<Vec<(f64, [f64; 2])>> {
    p.boundary_decomposition()
}
