use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Finite union of disjoint closed intervals on the line, kept sorted.
/// Touching or overlapping input intervals are merged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalUnion {
    intervals: Vec<(f64, f64)>,
}

impl IntervalUnion {
    pub fn new(mut raw: Vec<(f64, f64)>) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::invalid("interval union must contain at least one interval"));
        }
        for &(a, b) in &raw {
            if !a.is_finite() || !b.is_finite() {
                return Err(Error::InfiniteMeasure);
            }
            if a >= b {
                return Err(Error::invalid(format!("interval [{a}, {b}] is empty or reversed")));
            }
        }
        raw.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
        for (a, b) in raw {
            match merged.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }
        Ok(IntervalUnion { intervals: merged })
    }

    pub fn single(a: f64, b: f64) -> Result<Self> {
        Self::new(vec![(a, b)])
    }

    /// `⋃_{n=1}^{N} [n, n + 2^{-n}]`.
    pub fn dyadic(n_max: usize) -> Self {
        let v = (1..=n_max.max(1)).map(|n| (n as f64, n as f64 + 0.5f64.powi(n as i32))).collect();
        Self::new(v).expect("dyadic intervals are valid")
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn total_length(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    /// Classical perimeter: two boundary points per interval.
    pub fn perimeter(&self) -> f64 {
        2.0 * self.len() as f64
    }

    pub fn contains(&self, x: f64) -> bool {
        let i = self.intervals.partition_point(|iv| iv.1 < x);
        i < self.intervals.len() && self.intervals[i].0 <= x
    }

    pub fn translated(&self, v: f64) -> Self {
        IntervalUnion { intervals: self.intervals.iter().map(|(a, b)| (a + v, b + v)).collect() }
    }

    pub fn scaled(&self, s: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::invalid("scale must be positive"));
        }
        Ok(IntervalUnion { intervals: self.intervals.iter().map(|(a, b)| (a * s, b * s)).collect() })
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.intervals[0].0, self.intervals[self.intervals.len() - 1].1)
    }

    /// Smallest gap between consecutive intervals (`∞` for a single interval).
    pub fn min_gap(&self) -> f64 {
        self.intervals.windows(2).map(|w| w[1].0 - w[0].1).fold(f64::INFINITY, f64::min)
    }
}

/// Length of `A \ (A + r)` for a sorted disjoint list of intervals `A`.
///
/// Sums the pieces of `A` lying in the gaps of `A + r`, each measured from a
/// nearby endpoint, so the result keeps full relative accuracy as `r → 0`
/// (where `|A| - |A ∩ (A + r)|` cancels).
pub fn shifted_loss(a: &[(f64, f64)], r: f64) -> f64 {
    let r = r.abs();
    let n = a.len();
    let (mut i, mut k) = (0, 0);
    let mut s = 0.0;
    while i < n && k <= n {
        let (x, y) = a[i];
        if k == n {
            // last gap (a_{n-1}.1 + r, ∞)
            let p = a[n - 1].1;
            let len = (y - p) - (x - p).max(r);
            if len > 0.0 {
                s += len;
            }
            i += 1;
            continue;
        }
        // gap k is (a_{k-1}.1 + r, a_k.0 + r), measured from q = a_k.0
        let q = a[k].0;
        let lo = if k == 0 { x - q } else { (x - q).max(a[k - 1].1 - q + r) };
        let hi = (y - q).min(r);
        if hi > lo {
            s += hi - lo;
        }
        if y - q < r {
            i += 1;
        } else {
            k += 1;
        }
    }
    s
}

/// `|A ∩ (B + r)|` for sorted disjoint interval lists.
pub fn shifted_overlap(a: &[(f64, f64)], b: &[(f64, f64)], r: f64) -> f64 {
    let (mut i, mut j) = (0, 0);
    let mut s = 0.0;
    while i < a.len() && j < b.len() {
        let (a0, a1) = a[i];
        let (b0, b1) = (b[j].0 + r, b[j].1 + r);
        let lo = a0.max(b0);
        let hi = a1.min(b1);
        if hi > lo {
            s += hi - lo;
        }
        if a1 < b1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loss_without_cancellation() {
        assert_eq!(shifted_loss(&[(1.0, 2.0)], 1e-30), 1e-30);
        assert_eq!(shifted_loss(&[(1.0, 2.0)], -3.0), 1.0);
        let a = [(-1.0, -0.25), (0.0, 1.0), (1.5, 1.75), (3.0, 5.0)];
        let total: f64 = a.iter().map(|(x, y)| y - x).sum();
        for r in [0.01, 0.1, 0.25, 0.3, 0.5, 0.75, 1.0, 1.3, 2.0, 2.5, 4.0, 7.0] {
            for s in [r, -r] {
                let want = total - shifted_overlap(&a, &a, s);
                assert!((shifted_loss(&a, s) - want).abs() < 1e-14, "r={s}: {} vs {want}", shifted_loss(&a, s));
            }
        }
    }

    #[test]
    fn merge_and_sort() {
        let u = IntervalUnion::new(vec![(2.0, 3.0), (0.0, 1.0), (0.5, 1.5)]).unwrap();
        assert_eq!(u.intervals(), &[(0.0, 1.5), (2.0, 3.0)]);
        assert_eq!(u.perimeter(), 4.0);
        assert!(u.contains(1.2) && !u.contains(1.7) && u.contains(2.0));
        assert!(IntervalUnion::new(vec![(0.0, f64::INFINITY)]).is_err());
        assert!(IntervalUnion::new(vec![(1.0, 1.0)]).is_err());
    }

    #[test]
    fn dyadic_set() {
        let e = IntervalUnion::dyadic(40);
        assert_eq!(e.len(), 40);
        assert!((e.total_length() - (1.0 - 0.5f64.powi(40))).abs() < 1e-15);
    }

    #[test]
    fn overlap_sweep() {
        let a = [(0.0, 1.0), (2.0, 3.0)];
        assert!((shifted_overlap(&a, &a, 0.25) - 1.5).abs() < 1e-15);
        assert!((shifted_overlap(&a, &a, 2.0) - 1.0).abs() < 1e-15);
        assert!((shifted_loss(&a, 1.5) - 1.5).abs() < 1e-15);
    }
}
