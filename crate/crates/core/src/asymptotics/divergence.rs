//! `Per_{ν_α}` of the dyadic set as α↑1, and the mixtures
//! `ν_n = ν_{1/n} + c_n ν_{1-1/n}`.

use crate::error::{Error, Result};
use crate::perimeter::{dyadic_per_nu, QuadratureSpec};
use serde::Serialize;

/// `c_n = coefficient · n^{-exponent}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixtureRule {
    pub coefficient: f64,
    pub exponent: f64,
}

impl MixtureRule {
    pub fn c(&self, n: usize) -> f64 {
        self.coefficient * (n as f64).powf(-self.exponent)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundedness {
    Bounded,
    Divergent,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixtureRow {
    pub n: usize,
    pub c_n: f64,
    pub per_nu: f64,
    /// `C_n = ∫ (1 ∧ |x|) ν_n(dx)`.
    pub c_norm: f64,
    pub normalized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixtureStudy {
    pub rule: MixtureRule,
    pub rows: Vec<MixtureRow>,
    /// Slope of `log Per_{ν_n}` against `log n` over the upper half of the grid.
    pub loglog_slope: f64,
    pub classification: Boundedness,
    /// `C_n^{-1} Per_{ν_n}` ends within 1% of `|E| = 1` and closer than it started.
    pub normalized_to_one: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceStudy {
    /// `(α, Per_{ν_α}(E))`.
    pub alpha_rows: Vec<(f64, f64)>,
    pub strictly_increasing: bool,
    pub mixture: Option<MixtureStudy>,
}

/// `∫ (1 ∧ |x|) ν_α(dx)` for `ν_α = α|x|^{-1-α}dx/2` on the line.
fn cap_constant(alpha: f64) -> f64 {
    alpha / (1.0 - alpha) + 1.0
}

fn loglog_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Evaluates `Per_{ν_α}` of the dyadic set along `alphas`, and, if given,
/// the mixture family along `ns` with a boundedness classification.
pub fn dyadic_divergence_study(alphas: &[f64], mixture: Option<(MixtureRule, &[usize])>, q: &QuadratureSpec) -> Result<DivergenceStudy> {
    let mut alpha_rows = Vec::with_capacity(alphas.len());
    for &a in alphas {
        alpha_rows.push((a, dyadic_per_nu(a, q)?.value));
    }
    let strictly_increasing = alpha_rows.windows(2).all(|w| w[1].1 > w[0].1);
    let mixture = match mixture {
        None => None,
        Some((rule, ns)) => {
            if ns.len() < 2 || ns.iter().any(|&n| n < 2) || !ns.windows(2).all(|w| w[1] > w[0]) {
                return Err(Error::invalid("mixture needs an increasing grid of n >= 2 with at least two points"));
            }
            let mut rows = Vec::with_capacity(ns.len());
            for &n in ns {
                let (lo, hi) = (1.0 / n as f64, 1.0 - 1.0 / n as f64);
                let c = rule.c(n);
                let per = dyadic_per_nu(lo, q)?.value + c * dyadic_per_nu(hi, q)?.value;
                let cn = cap_constant(lo) + c * cap_constant(hi);
                rows.push(MixtureRow { n, c_n: c, per_nu: per, c_norm: cn, normalized: per / cn });
            }
            let n_last = ns[ns.len() - 1] as f64;
            let upper: Vec<(f64, f64)> = rows.iter().filter(|r| r.n as f64 >= n_last.sqrt()).map(|r| (r.n as f64, r.per_nu)).collect();
            let slope = loglog_slope(if upper.len() >= 2 { &upper } else { &[] });
            let classification = if slope > 0.5 {
                Boundedness::Divergent
            } else if slope.abs() < 0.1 {
                Boundedness::Bounded
            } else {
                Boundedness::Inconclusive
            };
            let (f, l) = (rows[0].normalized, rows[rows.len() - 1].normalized);
            let normalized_to_one = (l - 1.0).abs() < 0.01 && (l - 1.0).abs() < (f - 1.0).abs();
            Some(MixtureStudy { rule, rows, loglog_slope: slope, classification, normalized_to_one })
        }
    };
    Ok(DivergenceStudy { alpha_rows, strictly_increasing, mixture })
}

#[cfg(test)]
mod tests {
    use super::*;

    const NS: [usize; 7] = [10, 20, 50, 100, 200, 500, 1000];

    #[test]
    fn classification() {
        let q = QuadratureSpec::default();
        let div = dyadic_divergence_study(&[0.5, 0.9, 0.99], Some((MixtureRule { coefficient: 1.0, exponent: 1.0 }, &NS)), &q).unwrap();
        assert!(div.strictly_increasing);
        assert_eq!(div.mixture.unwrap().classification, Boundedness::Divergent);
        let b = dyadic_divergence_study(&[], Some((MixtureRule { coefficient: 1.0, exponent: 2.0 }, &NS)), &q).unwrap();
        let m = b.mixture.unwrap();
        assert_eq!(m.classification, Boundedness::Bounded);
        assert!(m.rows.iter().all(|r| r.per_nu < 5.0));
        let c = dyadic_divergence_study(&[], Some((MixtureRule { coefficient: 1.0, exponent: 3.0 }, &NS)), &q).unwrap();
        assert!(c.mixture.unwrap().normalized_to_one);
    }
}
