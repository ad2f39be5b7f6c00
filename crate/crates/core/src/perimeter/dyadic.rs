//! The set `E = ⋃_{n≥1} [n, n + 2^{-n}]`: unit length, infinite classical
//! perimeter, finite `Per_{ν_α}` for every `α ∈ (0, 1)`.

use super::{PerimeterResult, QuadratureSpec};
use crate::error::{Error, Result};
use crate::geometry::IntervalTable;
use crate::geometry::IntervalUnion;
use crate::measures::RadialProfile;
use crate::quadrature::Tolerance;

/// Number of intervals kept when the set is truncated; the dropped mass is `2^{-40}`.
pub const DYADIC_N_MAX: usize = 40;

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("alpha must lie in (0,1), got {alpha}")))
    }
}

/// Closed form of `∫_{|y|≤1} (g_E(0) - g_E(y)) ν_α(dy)` for the dyadic set,
/// using `g_E(0) - g_E(y) = (n-1)y + 2^{-n+1}` on `(2^{-n}, 2^{-n+1})`.
pub fn dyadic_example_inner(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let q = 2f64.powf(alpha - 1.0);
    Ok(alpha / (1.0 - alpha) * q / (1.0 - q) + 2f64.powf(alpha) * (1.0 - 2f64.powf(-alpha)) / (1.0 - q))
}

/// `∫_0^1 Σ_{n≤N} min(y, 2^{-n}) α y^{-1-α} dy`: the same inner integral with
/// only the self-overlap of each interval, summed term by term.
pub fn dyadic_self_term(alpha: f64, n_max: usize) -> Result<f64> {
    check_alpha(alpha)?;
    // α∫_0^1 min(y, L) y^{-1-α} dy = L^{1-α}/(1-α) - L
    Ok((1..=n_max)
        .map(|n| {
            let l = 0.5f64.powi(n as i32);
            l.powf(1.0 - alpha) / (1.0 - alpha) - l
        })
        .sum())
}

/// `Per_{ν_α}(E) = |E| - ∫_{|y|>1} g_E ν_α + inner` with the outer integral
/// computed on the truncated set and the inner one in closed form.
pub fn dyadic_per_nu(alpha: f64, q: &QuadratureSpec) -> Result<PerimeterResult> {
    check_alpha(alpha)?;
    q.validate()?;
    let e = IntervalUnion::dyadic(DYADIC_N_MAX);
    let t = IntervalTable::new(&e);
    let g0 = e.total_length();
    let mut kinks: Vec<f64> = t.kinks().filter(|&p| p > 1.0).collect();
    kinks.dedup();
    // ν_α in one dimension: α r^{-1-α} dr on each half-line, half weight each
    let rho = RadialProfile::power_with(alpha, alpha)?;
    let g = |r: f64| g0 - t.eval(r);
    let outer = rho.integrate(&g, 1.0, t.diameter(), &kinks, Tolerance::new(1e-300, 0.1 * q.rel_tol))?;
    let inner = dyadic_example_inner(alpha)?;
    let tail = 1.0 - g0;
    let value = 1.0 - outer.value + inner;
    Ok(PerimeterResult {
        value,
        err: outer.error + tail,
        rel_err: (outer.error + tail) / value,
        breakdown: super::Breakdown { near: inner, bulk: 1.0 - outer.value, tail: 0.0 },
        method: "dyadic-closed-form".into(),
        converged: outer.converged,
        warnings: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_value() {
        assert!((dyadic_example_inner(0.5).unwrap() - 3.828427124746190).abs() < 1e-12);
    }

    #[test]
    fn self_term_limit() {
        for a in [0.3, 0.5, 0.7] {
            let s = dyadic_self_term(a, 200).unwrap();
            assert!((s - dyadic_example_inner(a).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn grows_toward_one() {
        let q = QuadratureSpec::default();
        let v: Vec<f64> = [0.5, 0.9, 0.99].iter().map(|&a| dyadic_per_nu(a, &q).unwrap().value).collect();
        assert!(v[0] < v[1] && v[1] < v[2]);
    }
}
