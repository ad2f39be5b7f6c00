use super::lattice::{correlate_direct, correlate_fft, LatticeTable};
use super::{AnalyticShape, IntervalUnion, SetGeometry, VoxelSet};
use crate::error::{Error, Result};
use crate::point::{self, P3};

/// A function `F(y) = F(rθ)` of the shift, vanishing at `y = 0`, Lipschitz,
/// and constant (`far_value`) outside a bounded region.
///
/// Perimeter-type integrals `∫ F dν` only need this interface. For a set
/// `E`, `F = g_E(0) - g_E`; for a function `u`, `F(y) = ½∫|u(x+y) - u(x)|dx`.
pub trait ShiftFunction: Sync {
    fn dim(&self) -> usize;

    /// `F(rθ)` for a unit vector `θ` and `r ≥ 0`, evaluated without
    /// cancellation for small `r`.
    fn deficit(&self, theta: &P3, r: f64) -> f64;

    /// `lim_{r↓0} F(rθ)/r`.
    fn slope(&self, theta: &P3) -> f64;

    /// Radius beyond which `F(rθ) = far_value()` exactly.
    fn support_radius(&self, theta: &P3) -> f64;

    fn far_value(&self) -> f64;

    /// Radii in `(0, support_radius)` where `r ↦ F(rθ)` is not smooth.
    fn breakpoints(&self, theta: &P3) -> Vec<f64>;

    /// Upper bound for `|F(y) - F(y')| / |y - y'|`.
    fn lipschitz(&self) -> f64;

    /// True when `F(rθ)` does not depend on `θ`.
    fn is_isotropic(&self) -> bool {
        false
    }
}

/// Piecewise-linear deficit of an interval union, stored at its kinks.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalTable {
    /// Kink positions `p_k > 0`, increasing, and the deficit there.
    knots: Vec<(f64, f64)>,
    slope0: f64,
    g0: f64,
}

impl IntervalTable {
    pub fn new(e: &IntervalUnion) -> Self {
        let iv = e.intervals();
        let k = iv.len() as f64;
        // second derivative of g is a sum of signed point masses; F'' = -g''
        let mut events: Vec<(f64, f64)> = Vec::with_capacity(4 * iv.len() * iv.len());
        for &(ai, bi) in iv {
            for &(aj, bj) in iv {
                for (p, c) in [(aj - bi, -1.0), (aj - ai, 1.0), (bj - bi, 1.0), (bj - ai, -1.0)] {
                    if p > 0.0 {
                        events.push((p, c));
                    }
                }
            }
        }
        events.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut knots: Vec<(f64, f64)> = Vec::new();
        let mut slope = k;
        let mut f = 0.0;
        let mut prev = 0.0;
        let mut i = 0;
        while i < events.len() {
            let p = events[i].0;
            let mut dc = 0.0;
            while i < events.len() && events[i].0 == p {
                dc += events[i].1;
                i += 1;
            }
            f += slope * (p - prev);
            knots.push((p, f));
            slope += dc;
            prev = p;
        }
        let g0 = e.total_length();
        if let Some(last) = knots.last_mut() {
            last.1 = g0;
        }
        IntervalTable { knots, slope0: k, g0 }
    }

    pub fn eval(&self, s: f64) -> f64 {
        let s = s.abs();
        let i = self.knots.partition_point(|kn| kn.0 <= s);
        if i == 0 {
            return self.slope0 * s;
        }
        if i == self.knots.len() {
            return self.g0;
        }
        let (p0, f0) = self.knots[i - 1];
        let (p1, f1) = self.knots[i];
        f0 + (f1 - f0) * (s - p0) / (p1 - p0)
    }

    pub fn kinks(&self) -> impl Iterator<Item = f64> + '_ {
        self.knots.iter().map(|k| k.0)
    }

    pub fn diameter(&self) -> f64 {
        self.knots.last().map(|k| k.0).unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CovSource {
    Ball { d: usize, radius: f64 },
    Box { sides: Vec<f64> },
    Intervals(IntervalTable),
    Grid(LatticeTable),
}

/// `g_E(y) = |E ∩ (E + y)|`, closed form or sampled on a lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct Covariogram {
    d: usize,
    g0: f64,
    lipschitz: f64,
    source: CovSource,
}

impl Covariogram {
    pub fn volume_at_zero(&self) -> f64 {
        self.g0
    }

    pub fn lipschitz_estimate(&self) -> f64 {
        self.lipschitz
    }

    pub fn source(&self) -> &CovSource {
        &self.source
    }

    pub fn is_sampled(&self) -> bool {
        matches!(self.source, CovSource::Grid(_))
    }

    /// `g(y)`.
    pub fn value(&self, y: &[f64]) -> f64 {
        let y = point::from_slice(y, self.d).expect("shift has the covariogram's dimension");
        let r = point::norm(&y);
        if r == 0.0 {
            return self.g0;
        }
        self.g0 - self.deficit(&point::scale(&y, 1.0 / r), r)
    }

    /// Lattice table behind a sampled covariogram.
    pub fn table(&self) -> Option<&LatticeTable> {
        match &self.source {
            CovSource::Grid(t) => Some(t),
            _ => None,
        }
    }
}

impl ShiftFunction for Covariogram {
    fn dim(&self) -> usize {
        self.d
    }

    fn deficit(&self, theta: &P3, r: f64) -> f64 {
        match &self.source {
            CovSource::Ball { d, radius } => ball_deficit(*d, *radius, r),
            CovSource::Box { sides } => {
                let mut def = 0.0;
                for (i, s) in sides.iter().enumerate() {
                    let u = (r * theta[i].abs() / s).min(1.0);
                    def += u * (1.0 - def);
                }
                self.g0 * def
            }
            CovSource::Intervals(t) => t.eval(r * theta[0]),
            CovSource::Grid(t) => t.at(theta, r),
        }
    }

    fn slope(&self, theta: &P3) -> f64 {
        match &self.source {
            CovSource::Ball { d, radius } => ball_slope(*d, *radius),
            CovSource::Box { sides } => sides.iter().enumerate().map(|(i, s)| self.g0 * theta[i].abs() / s).sum(),
            CovSource::Intervals(t) => t.slope0 * theta[0].abs(),
            CovSource::Grid(t) => t.slope(theta),
        }
    }

    fn support_radius(&self, theta: &P3) -> f64 {
        match &self.source {
            CovSource::Ball { radius, .. } => 2.0 * radius,
            CovSource::Box { sides } => sides
                .iter()
                .enumerate()
                .filter(|(i, _)| theta[*i] != 0.0)
                .map(|(i, s)| s / theta[i].abs())
                .fold(f64::INFINITY, f64::min),
            CovSource::Intervals(t) => t.diameter() / theta[0].abs(),
            CovSource::Grid(t) => t.support_radius(theta),
        }
    }

    fn far_value(&self) -> f64 {
        self.g0
    }

    fn breakpoints(&self, theta: &P3) -> Vec<f64> {
        match &self.source {
            CovSource::Ball { .. } | CovSource::Box { .. } => Vec::new(),
            CovSource::Intervals(t) => {
                let c = theta[0].abs();
                let mut v: Vec<f64> = t.kinks().map(|p| p / c).collect();
                v.pop();
                v
            }
            CovSource::Grid(t) => t.breakpoints(theta),
        }
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    fn is_isotropic(&self) -> bool {
        matches!(self.source, CovSource::Ball { .. }) || self.d == 1 && !self.is_sampled()
    }
}

fn ball_deficit(d: usize, radius: f64, s: f64) -> f64 {
    let s = s.abs().min(2.0 * radius);
    match d {
        1 => s,
        2 => 2.0 * radius * radius * (s / (2.0 * radius)).asin() + 0.5 * s * (4.0 * radius * radius - s * s).max(0.0).sqrt(),
        _ => std::f64::consts::PI * (radius * radius * s - s * s * s / 12.0),
    }
}

fn ball_slope(d: usize, radius: f64) -> f64 {
    match d {
        1 => 1.0,
        2 => 2.0 * radius,
        _ => std::f64::consts::PI * radius * radius,
    }
}

/// Closed-form covariogram of a ball, box or interval union.
pub fn covariogram_exact(set: &SetGeometry) -> Result<Covariogram> {
    match set {
        SetGeometry::Intervals(e) => Ok(intervals_covariogram(e)),
        SetGeometry::Shape(AnalyticShape::Ball { center, radius }) => {
            let d = center.len();
            let g0 = set.volume();
            Ok(Covariogram { d, g0, lipschitz: ball_slope(d, *radius), source: CovSource::Ball { d, radius: *radius } })
        }
        SetGeometry::Shape(AnalyticShape::Box { lo, hi }) => {
            let sides: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| b - a).collect();
            let g0: f64 = sides.iter().product();
            let lipschitz = g0 * sides.iter().map(|s| 1.0 / (s * s)).sum::<f64>().sqrt();
            Ok(Covariogram { d: sides.len(), g0, lipschitz, source: CovSource::Box { sides } })
        }
        SetGeometry::Shape(AnalyticShape::Polygon { .. }) => {
            Err(Error::unsupported("no closed-form covariogram for polygons; rasterize and use the grid path"))
        }
        SetGeometry::Voxels(_) => Err(Error::unsupported("voxel sets only have a sampled covariogram")),
    }
}

pub fn intervals_covariogram(e: &IntervalUnion) -> Covariogram {
    let t = IntervalTable::new(e);
    Covariogram { d: 1, g0: e.total_length(), lipschitz: t.slope0, source: CovSource::Intervals(t) }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridMethod {
    Fft,
    Direct,
}

/// Sampled covariogram of a voxel set from the discrete autocorrelation of its mask.
pub fn covariogram_grid(v: &VoxelSet) -> Result<Covariogram> {
    covariogram_grid_with(v, GridMethod::Fft)
}

pub fn covariogram_grid_with(v: &VoxelSet, method: GridMethod) -> Result<Covariogram> {
    let d = v.dim();
    let (ext, mask) = v.cropped();
    let (half, counts) = match method {
        GridMethod::Fft => correlate_fft(d, ext, &mask, &mask).map_err(|e| match e {
            Error::MemoryBound { requested, limit, .. } => Error::MemoryBound {
                requested,
                limit,
                suggested_h: super::voxel::suggest_h(v.spacing(), requested, d),
            },
            other => other,
        })?,
        GridMethod::Direct => correlate_direct(ext, &mask, &mask),
    };
    let cell = v.cell_volume();
    let c0 = mask.iter().filter(|&&b| b == 1).count() as i64;
    let values: Vec<f64> = counts.iter().map(|&c| (c0 - c) as f64 * cell).collect();
    let table = LatticeTable::new(d, half, v.spacing(), values, c0 as f64 * cell);
    let lipschitz = table.lipschitz();
    Ok(Covariogram { d, g0: c0 as f64 * cell, lipschitz, source: CovSource::Grid(table) })
}

/// Covariogram by the exact route when one exists, otherwise on a grid of spacing `h`.
pub fn covariogram(set: &SetGeometry, h: f64) -> Result<Covariogram> {
    match set {
        SetGeometry::Voxels(v) => covariogram_grid(v),
        SetGeometry::Shape(s @ AnalyticShape::Polygon { .. }) => covariogram_grid(&VoxelSet::rasterize(s, h)?),
        other => covariogram_exact(other),
    }
}
