//! Normalized perimeters along scaling families, their limits, and
//! extrapolation of the former toward the latter.

mod divergence;
mod targets;

pub use divergence::{dyadic_divergence_study, Boundedness, DivergenceStudy, MixtureRow, MixtureRule, MixtureStudy};
pub use targets::{limit_target, LimitTarget, Payload, Regime};

use crate::convex::ConvexBody;
use crate::error::{Error, Result};
use crate::geometry::{covariogram, covariogram_exact, AnalyticShape, Covariogram, SetGeometry};
use crate::measures::{lambda_tail, normalization_constant, MeasureSpec, Normalization, ScalingFamily, ScalingRule};
use crate::perimeter::{f_nu, per_nu, GridFunction, PerimeterResult, QuadratureSpec};
use rayon::prelude::*;
use serde::Serialize;
use std::time::Instant;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    pub quad: QuadratureSpec,
    /// Relative tolerance for the extrapolated limit.
    pub tolerance: f64,
    /// Radii at which the concentration of `λ_ε` is checked.
    pub gate_radii: Vec<f64>,
    /// Base grid spacing for rasterized sets; refined to `param/4` in
    /// kernel and set scalings.
    pub h0: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions { quad: QuadratureSpec::default(), tolerance: 0.02, gate_radii: vec![0.1, 1.0, 10.0], h0: 1.0 / 64.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub param: f64,
    pub c_eps: f64,
    pub per_nu: f64,
    pub normalized: f64,
    pub target: f64,
    pub residual: f64,
    pub err_est: f64,
    pub runtime_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SweepRow {
    pub fn ok(&self) -> bool {
        self.error.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Extrapolation {
    /// Small parameter the linear fit uses: `1-alpha`, `alpha`, `eps` or `1/C_eps`.
    pub variable: &'static str,
    pub limit: f64,
    pub residual: f64,
    pub points: usize,
}

/// Concentration check of `λ_ε(B_R^c)` at both ends of the grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GateReport {
    pub radii: Vec<f64>,
    pub first: Vec<f64>,
    pub last: Vec<f64>,
    /// 0 for local limits, 1 for Lebesgue-type limits.
    pub expected: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub regime: Regime,
    pub target: LimitTarget,
    pub rows: Vec<SweepRow>,
    pub extrapolation: Option<Extrapolation>,
    pub gate: GateReport,
    pub h_rule: String,
    pub tolerance: f64,
    pub passed: Option<bool>,
    /// Residual at the last grid point is below the residual at the first.
    pub residual_decreases: bool,
}

/// Direction of an α sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaDirection {
    AlphaUp,
    AlphaDown,
}

fn check_grid(fam: &ScalingFamily, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid("sweep grid is empty"));
    }
    let inc = grid.windows(2).all(|w| w[1] > w[0]);
    let dec = grid.windows(2).all(|w| w[1] < w[0]);
    if !(inc || dec) {
        return Err(Error::invalid("sweep grid must be strictly monotone"));
    }
    if grid.len() == 1 {
        return Ok(());
    }
    match (fam.rule, fam.normalization) {
        (ScalingRule::AlphaFamily { .. }, Normalization::AlphaUp) if !inc => {
            Err(Error::invalid("alpha_up sweeps need an increasing grid"))
        }
        (ScalingRule::AlphaFamily { .. }, Normalization::AlphaDown) if !dec => {
            Err(Error::invalid("alpha_down sweeps need a decreasing grid"))
        }
        (ScalingRule::AlphaFamily { .. }, _) => Ok(()),
        _ if !dec => Err(Error::invalid("kernel and set scalings need a grid decreasing toward 0")),
        _ => Ok(()),
    }
}

fn small_parameter(fam: &ScalingFamily, grid: &[f64]) -> &'static str {
    match fam.rule {
        ScalingRule::AlphaFamily { .. } => {
            let up = match fam.normalization {
                Normalization::AlphaUp => true,
                Normalization::AlphaDown => false,
                _ => grid.len() < 2 || grid[grid.len() - 1] > grid[0],
            };
            if up {
                "1-alpha"
            } else {
                "alpha"
            }
        }
        _ if fam.normalization == Normalization::BaseTail => "1/C_eps",
        _ => "eps",
    }
}

/// Checks that `λ_ε(B_R^c)` moves toward `expected` (0 or 1) along the grid.
pub fn lambda_gate(fam: &ScalingFamily, grid: &[f64], radii: &[f64], expected: f64) -> Result<GateReport> {
    let (p0, p1) = (grid[0], grid[grid.len() - 1]);
    let mut first = Vec::with_capacity(radii.len());
    let mut last = Vec::with_capacity(radii.len());
    let mut passed = true;
    for &r in radii {
        let a = lambda_tail(fam, p0, r)?;
        let b = lambda_tail(fam, p1, r)?;
        let (da, db) = ((a - expected).abs(), (b - expected).abs());
        passed &= db < da || db <= 1e-3;
        first.push(a);
        last.push(b);
    }
    Ok(GateReport { radii: radii.to_vec(), first, last, expected, passed })
}

fn fit_line(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return my;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    my - sxy / sxx * mx
}

/// Linear fit in the small parameter over the last three successful rows.
fn extrapolate(rows: &[SweepRow], variable: &'static str, target: f64) -> Option<Extrapolation> {
    let good: Vec<&SweepRow> = rows.iter().filter(|r| r.ok()).collect();
    if good.len() < 3 {
        return None;
    }
    let pts: Vec<(f64, f64)> = good[good.len() - 3..]
        .iter()
        .map(|r| {
            let t = match variable {
                "1-alpha" => 1.0 - r.param,
                "1/C_eps" => 1.0 / r.c_eps,
                _ => r.param,
            };
            (t, r.normalized)
        })
        .collect();
    let limit = fit_line(&pts);
    Some(Extrapolation { variable, limit, residual: (limit - target).abs() / target.abs(), points: 3 })
}

type PointEval<'a> = dyn Fn(f64, &MeasureSpec) -> Result<(PerimeterResult, Option<f64>)> + Sync + 'a;

fn run_sweep(fam: &ScalingFamily, target: LimitTarget, grid: &[f64], opts: &SweepOptions, h_rule: String, eval: &PointEval) -> Result<SweepResult> {
    check_grid(fam, grid)?;
    let gate = lambda_gate(fam, grid, &opts.gate_radii, target.regime.lambda_limit())?;
    if !gate.passed {
        return Err(Error::HypothesisViolated(format!(
            "λ_ε(B_R^c) does not approach {} along the grid (R = {:?}: first {:?}, last {:?})",
            gate.expected, gate.radii, gate.first, gate.last
        )));
    }
    let factor = target.constant;
    let tv = target.value;
    let rows: Vec<SweepRow> = grid
        .par_iter()
        .map(|&p| {
            let t0 = Instant::now();
            let res = (|| {
                let m = fam.measure_at(p)?;
                let c = normalization_constant(fam, p)?;
                let (r, h) = eval(p, &m)?;
                Ok::<_, Error>((c, r, h))
            })();
            let runtime_ms = t0.elapsed().as_secs_f64() * 1e3;
            match res {
                Ok((c, r, h)) => {
                    let normalized = factor * r.value / c;
                    SweepRow {
                        param: p,
                        c_eps: c,
                        per_nu: r.value,
                        normalized,
                        target: tv,
                        residual: (normalized - tv).abs() / tv.abs(),
                        err_est: factor * r.err / c,
                        runtime_ms,
                        h,
                        error: None,
                    }
                }
                Err(e) => SweepRow {
                    param: p,
                    c_eps: f64::NAN,
                    per_nu: f64::NAN,
                    normalized: f64::NAN,
                    target: tv,
                    residual: f64::NAN,
                    err_est: f64::NAN,
                    runtime_ms,
                    h: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let variable = small_parameter(fam, grid);
    let extrapolation = extrapolate(&rows, variable, tv);
    let residual_decreases = match (rows.first(), rows.last()) {
        (Some(a), Some(b)) if a.ok() && b.ok() && rows.len() > 1 => b.residual < a.residual,
        _ => false,
    };
    Ok(SweepResult {
        regime: target.regime,
        passed: extrapolation.as_ref().map(|e| e.residual <= opts.tolerance),
        target,
        rows,
        extrapolation,
        gate,
        h_rule,
        tolerance: opts.tolerance,
        residual_decreases,
    })
}

fn fills_payload(payload: &Payload, fam: &ScalingFamily) -> Payload {
    use crate::measures::MeasureKind;
    let mut p = payload.clone();
    match fam.base.kind() {
        MeasureKind::Kernel(k) if p.kernel.is_none() => p.kernel = Some(k.clone()),
        MeasureKind::AnisotropicStable { body, .. } if p.body.is_none() => p.body = Some(body.clone()),
        _ => {}
    }
    p
}

/// `C_ε^{-1} Per_{ν_ε}(E)` along `grid`, with the regime's limit and a
/// linear extrapolation over the last three points.
///
/// For the `j_kernel` and `j_total_mass` regimes the normalized value is
/// multiplied by `C_J` (resp. `‖J‖_{L¹}`), matching the way their targets
/// are stated.
pub fn sweep(fam: &ScalingFamily, payload: &Payload, regime: Regime, grid: &[f64], opts: &SweepOptions) -> Result<SweepResult> {
    if payload.set.dim() != fam.dim() {
        return Err(Error::DimensionMismatch { expected: fam.dim(), got: payload.set.dim() });
    }
    let payload = fills_payload(payload, fam);
    let target = limit_target(regime, &payload, &opts.quad)?;
    let set = &payload.set;
    let exact = covariogram_exact(set).ok();
    let refine = matches!(fam.rule, ScalingRule::KernelShrink | ScalingRule::SetShrink);
    let (h_rule, fixed): (String, Option<Covariogram>) = match exact {
        Some(c) => ("closed-form covariogram".into(), Some(c)),
        None if refine => (format!("h = min({}, param/4)", opts.h0), None),
        None => (format!("h = {}", opts.h0), Some(covariogram(set, opts.h0)?)),
    };
    let eval = |p: f64, m: &MeasureSpec| -> Result<(PerimeterResult, Option<f64>)> {
        match &fixed {
            Some(c) => Ok((per_nu(c, m, &opts.quad)?, c.is_sampled().then_some(opts.h0))),
            None => {
                let h = opts.h0.min(p / 4.0);
                let c = covariogram(set, h)?;
                Ok((per_nu(&c, m, &opts.quad)?, Some(h)))
            }
        }
    };
    run_sweep(fam, target, grid, opts, h_rule, &eval)
}

fn alpha_family(body: &ConvexBody, direction: AlphaDirection) -> Result<ScalingFamily> {
    let norm = match direction {
        AlphaDirection::AlphaUp => Normalization::AlphaUp,
        AlphaDirection::AlphaDown => Normalization::AlphaDown,
    };
    ScalingFamily::new(MeasureSpec::anisotropic_stable(body.clone(), 0.5)?, ScalingRule::AlphaFamily { alpha_weighted: false }, norm)
}

/// `(1-α) Per_α(E, K)` toward `Per(E, ZK)`, or `α Per_α(E, K)` toward `d|K||E|`.
pub fn aniso_sweep(body: &ConvexBody, set: &SetGeometry, direction: AlphaDirection, grid: &[f64], opts: &SweepOptions) -> Result<SweepResult> {
    let fam = alpha_family(body, direction)?;
    let regime = match direction {
        AlphaDirection::AlphaUp => Regime::AnisoMomentBody,
        AlphaDirection::AlphaDown => Regime::AnisoVolume,
    };
    sweep(&fam, &Payload::new(set.clone()).with_body(body.clone()), regime, grid, opts)
}

/// `Per(S, ZK)` of a union of grid cells: each exposed face contributes
/// `h^{d-1} ‖e_a‖_{ZK}`.
fn voxel_moment_perimeter(v: &crate::geometry::VoxelSet, body: &ConvexBody, tol: f64) -> Result<f64> {
    let d = v.dim();
    let faces = v.face_counts();
    let mut s = 0.0;
    for (a, &n) in faces.iter().enumerate().take(d) {
        if n > 0 {
            let mut e = vec![0.0; d];
            e[a] = 1.0;
            s += n as f64 * body.moment_body_norm(&e, tol)?;
        }
    }
    Ok(s * v.spacing().powi(d as i32 - 1))
}

/// `(1-α) ∫∫ |u(x+y) - u(x)| ‖y‖_K^{-d-α} dy dx` toward `2 ‖u‖_{BV, ZK}`,
/// with the target summed over the level sets of `u`.
pub fn aniso_sobolev_sweep(u: &GridFunction, body: &ConvexBody, grid: &[f64], opts: &SweepOptions) -> Result<SweepResult> {
    if u.dim() != body.dim() {
        return Err(Error::DimensionMismatch { expected: body.dim(), got: u.dim() });
    }
    let fam = alpha_family(body, AlphaDirection::AlphaUp)?;
    let tol = 0.1 * opts.quad.rel_tol;
    let mut bv = 0.0;
    for w in u.levels().windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let s = if hi <= 0.0 { u.sublevel(lo)? } else { u.superlevel(hi)? };
        bv += (hi - lo) * voxel_moment_perimeter(&s, body, tol)?;
    }
    let target = LimitTarget {
        regime: Regime::AnisoMomentBody,
        value: 2.0 * bv,
        constant: 1.0,
        detail: "2·Σ_levels gap·Per(S_t, ZK)".into(),
    };
    let eval = |_p: f64, m: &MeasureSpec| -> Result<(PerimeterResult, Option<f64>)> {
        // the double integral is 2 F_ν(u)
        Ok((f_nu(u, m, &opts.quad)?.scaled(2.0), Some(u.spacing())))
    };
    run_sweep(&fam, target, grid, opts, format!("h = {} (grid of u)", u.spacing()), &eval)
}

/// Geometric grid of `n` points from `a` to `b`.
pub fn geometric_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![b];
    }
    (0..n).map(|i| a * (b / a).powf(i as f64 / (n - 1) as f64)).collect()
}

/// Default α grid: `1-α` (α↑1) or `α` (α↓0) geometric from `10^{-1}` to `10^{-3}`, 6 points.
pub fn default_alpha_grid(direction: AlphaDirection) -> Vec<f64> {
    let t = geometric_grid(0.1, 1e-3, 6);
    match direction {
        AlphaDirection::AlphaUp => t.into_iter().map(|x| 1.0 - x).collect(),
        AlphaDirection::AlphaDown => t,
    }
}

/// Unit square `[0,1]^2` as a convenience for examples and tests.
pub fn unit_square() -> SetGeometry {
    SetGeometry::Shape(AnalyticShape::rect([0.0, 0.0], [1.0, 1.0]))
}
