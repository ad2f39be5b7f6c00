//! One-dimensional quadrature.
//!
//! Adaptive Gauss–Kronrod (7/15) with known breakpoints, a logarithmic
//! substitution for integrands carrying power-law weights, and
//! decade-by-decade integration toward `0` and `∞` that detects divergence.
//! Gauss–Legendre nodes are provided for the product grids on the sphere.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Absolute/relative tolerance pair; a piece is accepted when its error is
/// below `max(abs, rel * |total|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub fn rel(rel: f64) -> Self {
        Tolerance { abs: 1e-300, rel }
    }

    pub fn new(abs: f64, rel: f64) -> Self {
        Tolerance { abs, rel }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evals: usize,
    pub converged: bool,
}

impl QuadResult {
    fn zero() -> Self {
        QuadResult { value: 0.0, error: 0.0, evals: 0, converged: true }
    }

    pub fn add(self, other: QuadResult) -> QuadResult {
        QuadResult {
            value: self.value + other.value,
            error: self.error + other.error,
            evals: self.evals + other.evals,
            converged: self.converged && other.converged,
        }
    }

    pub fn scale(self, c: f64) -> QuadResult {
        QuadResult { value: self.value * c, error: self.error * c.abs(), ..self }
    }
}

/// Single 15-point Kronrod evaluation with the embedded 7-point Gauss error estimate.
pub fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        fv1[j] = f(c - dx);
        fv2[j] = f(c + dx);
        kron += WGK[j] * (fv1[j] + fv2[j]);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (fv1[j] + fv2[j]);
        }
    }
    // QUADPACK error heuristic
    let mean = 0.5 * kron;
    let mut asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let asc = asc * h.abs();
    let value = kron * h;
    let mut err = ((kron - gauss) * h).abs();
    if asc != 0.0 && err != 0.0 {
        err = asc * (200.0 * err / asc).powf(1.5).min(1.0);
    }
    (value, err)
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.partial_cmp(&other.error).unwrap_or(Ordering::Equal)
    }
}

/// Adaptive integration over `[points[0], points[last]]`, starting from the
/// pieces delimited by `points` (which must be sorted ascending).
pub fn adaptive_points<F: Fn(f64) -> f64>(
    f: &F,
    points: &[f64],
    tol: Tolerance,
    max_pieces: usize,
) -> QuadResult {
    if points.len() < 2 {
        return QuadResult::zero();
    }
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    let mut evals = 0;
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let (v, e) = gauss_kronrod(f, a, b);
        evals += 15;
        total += v;
        total_err += e;
        heap.push(Piece { a, b, value: v, error: e });
    }
    let mut converged = true;
    while total_err > tol.target(total) {
        if heap.len() >= max_pieces.max(points.len()) {
            converged = false;
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let m = 0.5 * (worst.a + worst.b);
        if m <= worst.a || m >= worst.b {
            // interval exhausted at machine precision
            heap.push(Piece { error: 0.0, ..worst });
            total_err = heap.iter().map(|p| p.error).sum();
            if total_err > tol.target(total) {
                converged = false;
            }
            break;
        }
        let (v1, e1) = gauss_kronrod(f, worst.a, m);
        let (v2, e2) = gauss_kronrod(f, m, worst.b);
        evals += 30;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Piece { a: worst.a, b: m, value: v1, error: e1 });
        heap.push(Piece { a: m, b: worst.b, value: v2, error: e2 });
    }
    // re-sum to avoid drift from the incremental updates
    let value: f64 = heap.iter().map(|p| p.value).sum();
    let error: f64 = heap.iter().map(|p| p.error).sum();
    QuadResult { value, error, evals, converged }
}

pub fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: Tolerance) -> QuadResult {
    adaptive_points(f, &[a, b], tol, 2000)
}

/// `∫_a^b f(r) dr` with `0 < a < b`, computed in the variable `t = ln r`.
///
/// Interior breakpoints (in `r`) are honoured. Suited to integrands with
/// power-law factors spanning many decades.
pub fn integrate_log<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, breaks: &[f64], tol: Tolerance) -> QuadResult {
    debug_assert!(a > 0.0);
    if b <= a {
        return QuadResult::zero();
    }
    let mut pts: Vec<f64> = Vec::with_capacity(breaks.len() + 2);
    pts.push(a.ln());
    for &x in breaks {
        if x > a && x < b {
            pts.push(x.ln());
        }
    }
    pts.push(b.ln());
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pts.dedup();
    // keep individual pieces at most ~2 e-folds wide
    let mut refined = Vec::with_capacity(pts.len());
    for w in pts.windows(2) {
        let n = ((w[1] - w[0]) / 2.0).ceil().max(1.0) as usize;
        for k in 0..n {
            refined.push(w[0] + (w[1] - w[0]) * k as f64 / n as f64);
        }
    }
    refined.push(*pts.last().unwrap());
    let g = |t: f64| {
        let r = t.exp();
        f(r) * r
    };
    adaptive_points(&g, &refined, tol, 4000 + 4 * refined.len())
}

/// Which end of the half-line a chunked integral runs toward.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Toward {
    Zero,
    Infinity,
}

/// `∫_0^b f` (`Toward::Zero`) or `∫_b^∞ f` (`Toward::Infinity`), summed in
/// chunks of `e^2` in `r` until the chunk contributions become negligible.
///
/// Returns `converged = false` when the chunks never become negligible before
/// reaching the floating-point range; `error` then carries the size of the
/// last chunk times the number of chunks that would remain.
pub fn integrate_half_line<F: Fn(f64) -> f64>(f: &F, b: f64, toward: Toward, tol: Tolerance) -> QuadResult {
    const WIDTH: f64 = 2.0;
    const MAX_CHUNKS: usize = 340;
    let mut acc = QuadResult::zero();
    let mut quiet = 0;
    let mut last = 0.0;
    let mut lt = b.ln();
    for k in 0..MAX_CHUNKS {
        let (lo, hi) = match toward {
            Toward::Zero => (lt - WIDTH, lt),
            Toward::Infinity => (lt, lt + WIDTH),
        };
        let floor = (tol.abs * 1e-3).max(1e-3 * tol.rel * acc.value.abs());
        let mut piece = integrate_log(f, lo.exp(), hi.exp(), &[], Tolerance::new(floor, tol.rel * 0.1));
        if !piece.converged && piece.value.abs() + piece.error <= (0.1 * tol.rel * acc.value.abs()).max(tol.abs) {
            // rounding noise far below what has been accumulated
            piece.converged = true;
        }
        acc = acc.add(piece);
        last = piece.value.abs();
        if !acc.value.is_finite() {
            acc.converged = false;
            acc.error = f64::INFINITY;
            return acc;
        }
        lt = match toward {
            Toward::Zero => lo,
            Toward::Infinity => hi,
        };
        let negligible = last <= 0.1 * tol.rel * acc.value.abs() || last <= tol.abs * 1e-3;
        if negligible {
            quiet += 1;
        } else {
            quiet = 0;
        }
        if quiet >= 3 && k >= 2 {
            return acc;
        }
    }
    acc.converged = false;
    acc.error += last * MAX_CHUNKS as f64;
    acc
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_exact_on_polynomials() {
        let (v, _) = gauss_kronrod(&|x: f64| x.powi(6) - 3.0 * x * x + 1.0, -1.0, 2.0);
        let exact = (2f64.powi(7) + 1.0) / 7.0 - (8.0 + 1.0) + 3.0;
        assert!((v - exact).abs() < 1e-12);
    }

    #[test]
    fn adaptive_handles_kinks_with_breakpoints() {
        let f = |x: f64| (x - 0.3).abs();
        let r = adaptive_points(&f, &[0.0, 0.3, 1.0], Tolerance::rel(1e-12), 100);
        assert!((r.value - (0.045 + 0.245)).abs() < 1e-13);
        assert!(r.converged);
    }

    #[test]
    fn log_substitution_power_law() {
        let alpha = 0.999;
        let f = |r: f64| r.powf(-alpha);
        let r = integrate_log(&f, 1e-6, 1.0, &[], Tolerance::rel(1e-12));
        let exact = (1.0 - 1e-6f64.powf(1.0 - alpha)) / (1.0 - alpha);
        assert!((r.value - exact).abs() / exact < 1e-10);
    }

    #[test]
    fn half_line_converges_and_detects_divergence() {
        let f = |r: f64| r.powf(-0.5);
        let r = integrate_half_line(&f, 1.0, Toward::Zero, Tolerance::rel(1e-10));
        assert!(r.converged);
        assert!((r.value - 2.0).abs() < 1e-8);

        let g = |r: f64| 1.0 / r;
        let d = integrate_half_line(&g, 1.0, Toward::Zero, Tolerance::rel(1e-10));
        assert!(!d.converged);

        let t = integrate_half_line(&|r: f64| r.powf(-1.5), 1.0, Toward::Infinity, Tolerance::rel(1e-10));
        assert!(t.converged && (t.value - 2.0).abs() < 1e-8);
    }

    #[test]
    fn legendre_integrates_degree_2n_minus_1() {
        let (x, w) = gauss_legendre(8);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-13);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }
}
