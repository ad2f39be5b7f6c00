use crate::convex::ConvexBody;
use crate::error::{Error, Result};
use crate::point::{self, P3};
use crate::sphere::{sigma_nodes, SphereGrid, SphereNode};

#[derive(Debug, Clone, PartialEq)]
pub enum SphericalKind {
    /// Normalized surface measure.
    Uniform,
    Atoms(Vec<(P3, f64)>),
    /// Density `‖θ‖_K^{-p}` against the surface measure.
    GaugeWeighted { body: ConvexBody, p: f64 },
}

/// Finite measure on `S^{d-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalMeasure {
    d: usize,
    kind: SphericalKind,
}

impl SphericalMeasure {
    pub fn uniform(d: usize) -> Result<Self> {
        point::check_dim(d)?;
        Ok(SphericalMeasure { d, kind: SphericalKind::Uniform })
    }

    pub fn atoms(d: usize, atoms: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        point::check_dim(d)?;
        let mut out = Vec::with_capacity(atoms.len());
        for (x, w) in atoms {
            let t = point::from_slice(&x, d)?;
            if (point::norm(&t) - 1.0).abs() > 1e-12 {
                return Err(Error::invalid(format!("spherical atom {x:?} is not a unit vector")));
            }
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::invalid("spherical atom weights must be nonnegative and finite"));
            }
            out.push((t, w));
        }
        let m = SphericalMeasure { d, kind: SphericalKind::Atoms(out) };
        if !(m.total_mass()? > 0.0) {
            return Err(Error::invalid("spherical measure has zero mass"));
        }
        Ok(m)
    }

    pub fn gauge_weighted(body: ConvexBody, p: f64) -> Result<Self> {
        if !(p.is_finite()) {
            return Err(Error::invalid("gauge exponent must be finite"));
        }
        Ok(SphericalMeasure { d: body.dim(), kind: SphericalKind::GaugeWeighted { body, p } })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn kind(&self) -> &SphericalKind {
        &self.kind
    }

    pub fn is_uniform(&self) -> bool {
        match &self.kind {
            SphericalKind::Uniform => true,
            SphericalKind::GaugeWeighted { body, .. } => body.is_euclidean_ball(),
            SphericalKind::Atoms(_) => false,
        }
    }

    pub fn total_mass(&self) -> Result<f64> {
        match &self.kind {
            SphericalKind::Uniform => Ok(1.0),
            SphericalKind::Atoms(a) => Ok(a.iter().map(|x| x.1).sum()),
            SphericalKind::GaugeWeighted { body, p } => body.sphere_integral(&[0.0, 0.0, 1.0], 1e-12, |th| body.gauge(th).powf(-p)),
        }
    }

    /// Quadrature nodes carrying the measure.
    pub fn nodes(&self, grid: &SphereGrid) -> Vec<SphereNode> {
        match &self.kind {
            SphericalKind::Uniform => {
                let nodes = sigma_nodes(self.d, grid);
                let area: f64 = nodes.iter().map(|n| n.weight).sum();
                nodes.into_iter().map(|n| SphereNode { weight: n.weight / area, ..n }).collect()
            }
            SphericalKind::Atoms(a) => a.iter().map(|&(theta, weight)| SphereNode { theta, weight }).collect(),
            SphericalKind::GaugeWeighted { body, p } => sigma_nodes(self.d, grid)
                .into_iter()
                .map(|n| SphereNode { weight: n.weight * body.gauge(&n.theta).powf(-p), ..n })
                .collect(),
        }
    }

    /// `∫ f dη` on the quadrature nodes.
    pub fn integrate<F: Fn(&P3) -> f64>(&self, grid: &SphereGrid, f: F) -> f64 {
        self.nodes(grid).iter().map(|n| n.weight * f(&n.theta)).sum()
    }

    /// Same measure scaled to total mass 1.
    pub fn normalized(&self) -> Result<Self> {
        match &self.kind {
            SphericalKind::Uniform => Ok(self.clone()),
            SphericalKind::Atoms(a) => {
                let m: f64 = a.iter().map(|x| x.1).sum();
                Ok(SphericalMeasure { d: self.d, kind: SphericalKind::Atoms(a.iter().map(|&(t, w)| (t, w / m)).collect()) })
            }
            SphericalKind::GaugeWeighted { body, p } => {
                // ‖θ‖_{tK}^{-p} = t^p ‖θ‖_K^{-p}
                let m = self.total_mass()?;
                let t = m.powf(-1.0 / p);
                Ok(SphericalMeasure { d: self.d, kind: SphericalKind::GaugeWeighted { body: body.scaled(t)?, p: *p } })
            }
        }
    }
}
