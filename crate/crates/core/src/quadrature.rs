//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! The integrand may return several components at once (`[S; K]`) so that,
//! for example, the mass and first moment of a Voronoi cell come out of one
//! pass. Infinite endpoints are handled by the rational map
//! `u = a + s·t/(1-t)` onto `[0, 1)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{QuantError, Result};
use crate::scalar::Scalar;

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
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5) and the centre.
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions<S> {
    pub rel_tol: S,
    pub abs_tol: S,
    pub max_intervals: usize,
}

impl<S: Scalar> QuadOptions<S> {
    pub fn relative(rel: f64) -> Self {
        Self { rel_tol: S::tol(rel), abs_tol: S::min_positive_value(), max_intervals: 4000 }
    }

    pub fn with_abs(mut self, abs: S) -> Self {
        self.abs_tol = abs;
        self
    }
}

impl<S: Scalar> Default for QuadOptions<S> {
    fn default() -> Self {
        Self::relative(1e-10)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Integral<S, const K: usize> {
    pub value: [S; K],
    pub error: S,
    pub evaluations: usize,
}

struct Piece<S, const K: usize> {
    a: S,
    b: S,
    value: [S; K],
    error: S,
}

impl<S: Scalar, const K: usize> PartialEq for Piece<S, K> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<S: Scalar, const K: usize> Eq for Piece<S, K> {}
impl<S: Scalar, const K: usize> PartialOrd for Piece<S, K> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<S: Scalar, const K: usize> Ord for Piece<S, K> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.partial_cmp(&other.error).unwrap_or(Ordering::Equal)
    }
}

fn gk15<S: Scalar, F, const K: usize>(f: &F, a: S, b: S) -> ([S; K], S)
where
    F: Fn(S) -> [S; K],
{
    let half = S::lit(0.5);
    let centre = half * (a + b);
    let half_len = half * (b - a);
    let fc = f(centre);
    let mut kron = [S::zero(); K];
    let mut gauss = [S::zero(); K];
    for k in 0..K {
        kron[k] = fc[k] * S::lit(WGK[7]);
        gauss[k] = fc[k] * S::lit(WG[3]);
    }
    for j in 0..7 {
        let dx = half_len * S::lit(XGK[j]);
        let f1 = f(centre - dx);
        let f2 = f(centre + dx);
        let wk = S::lit(WGK[j]);
        for k in 0..K {
            kron[k] += wk * (f1[k] + f2[k]);
        }
        if j % 2 == 1 {
            let wg = S::lit(WG[j / 2]);
            for k in 0..K {
                gauss[k] += wg * (f1[k] + f2[k]);
            }
        }
    }
    let mut err = S::zero();
    for k in 0..K {
        kron[k] *= half_len;
        gauss[k] *= half_len;
        err = err.max((kron[k] - gauss[k]).abs());
    }
    (kron, err)
}

fn adaptive_finite<S: Scalar, F, const K: usize>(f: &F, a: S, b: S, opts: &QuadOptions<S>) -> Result<Integral<S, K>>
where
    F: Fn(S) -> [S; K],
{
    if a == b {
        return Ok(Integral { value: [S::zero(); K], error: S::zero(), evaluations: 0 });
    }
    let (value, error) = gk15(f, a, b);
    let mut total = value;
    let mut total_err = error;
    let mut evaluations = 15;
    let mut heap = BinaryHeap::new();
    heap.push(Piece { a, b, value, error });
    let tiny_width = S::epsilon() * S::lit(64.0);
    loop {
        let scale = total.iter().fold(S::zero(), |m, v| m.max(v.abs()));
        if total_err <= opts.abs_tol.max(opts.rel_tol * scale) {
            break;
        }
        if heap.len() >= opts.max_intervals {
            return Err(QuantError::NonConvergence {
                op: "adaptive quadrature",
                residual: (total_err / scale.max(S::min_positive_value())).as_f64(),
            });
        }
        let worst = heap.pop().expect("heap non-empty");
        let mid = S::lit(0.5) * (worst.a + worst.b);
        if (worst.b - worst.a) <= tiny_width * worst.a.abs().max(worst.b.abs()) || mid <= worst.a || mid >= worst.b {
            // cannot split further; accept the residual uncertainty of this piece
            heap.push(Piece { error: S::zero(), ..worst });
            total_err = heap.iter().map(|p| p.error).fold(S::zero(), |acc, e| acc + e);
            continue;
        }
        let (v1, e1) = gk15(f, worst.a, mid);
        let (v2, e2) = gk15(f, mid, worst.b);
        evaluations += 30;
        for k in 0..K {
            total[k] += v1[k] + v2[k] - worst.value[k];
        }
        total_err += e1 + e2 - worst.error;
        heap.push(Piece { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Piece { a: mid, b: worst.b, value: v2, error: e2 });
        if total_err < S::zero() {
            total_err = heap.iter().map(|p| p.error).fold(S::zero(), |acc, e| acc + e);
        }
    }
    // re-sum from the pieces to shed drift from the incremental updates
    let mut value = [S::zero(); K];
    let mut error = S::zero();
    for p in heap.iter() {
        for (v, &pv) in value.iter_mut().zip(&p.value) {
            *v += pv;
        }
        error += p.error;
    }
    Ok(Integral { value, error, evaluations })
}

/// Integrates a vector-valued function over `[a, b]`; either endpoint may be
/// infinite.
pub fn integrate_vec<S: Scalar, F, const K: usize>(f: F, a: S, b: S, opts: &QuadOptions<S>) -> Result<Integral<S, K>>
where
    F: Fn(S) -> [S; K],
{
    integrate_ref(&f, a, b, opts)
}

fn integrate_ref<S: Scalar, F, const K: usize>(f: &F, a: S, b: S, opts: &QuadOptions<S>) -> Result<Integral<S, K>>
where
    F: Fn(S) -> [S; K],
{
    if a.is_nan() || b.is_nan() {
        return Err(QuantError::DomainError("NaN integration bound".into()));
    }
    if a > b {
        let mut r = integrate_ref(f, b, a, opts)?;
        for v in r.value.iter_mut() {
            *v = -*v;
        }
        return Ok(r);
    }
    let one = S::one();
    match (a.is_finite(), b.is_finite()) {
        (true, true) => adaptive_finite(f, a, b, opts),
        (true, false) => {
            let s = a.abs().max(one);
            let g = |t: S| -> [S; K] {
                let w = one - t;
                let u = a + s * t / w;
                if !u.is_finite() {
                    return [S::zero(); K];
                }
                let jac = s / (w * w);
                let mut v = f(u);
                for x in v.iter_mut() {
                    *x = if x.is_finite() { *x * jac } else { S::zero() };
                }
                v
            };
            adaptive_finite(&g, S::zero(), one, opts)
        }
        (false, true) => {
            let s = b.abs().max(one);
            let g = |t: S| -> [S; K] {
                let w = one - t;
                let u = b - s * t / w;
                if !u.is_finite() {
                    return [S::zero(); K];
                }
                let jac = s / (w * w);
                let mut v = f(u);
                for x in v.iter_mut() {
                    *x = if x.is_finite() { *x * jac } else { S::zero() };
                }
                v
            };
            adaptive_finite(&g, S::zero(), one, opts)
        }
        (false, false) => {
            let left = integrate_ref(f, a, S::zero(), opts)?;
            let right = integrate_ref(f, S::zero(), b, opts)?;
            Ok(combine(left, right))
        }
    }
}

fn combine<S: Scalar, const K: usize>(x: Integral<S, K>, y: Integral<S, K>) -> Integral<S, K> {
    let mut value = x.value;
    for (v, &yv) in value.iter_mut().zip(&y.value) {
        *v += yv;
    }
    Integral { value, error: x.error + y.error, evaluations: x.evaluations + y.evaluations }
}

/// Integrates over `[a, b]` after splitting at every interior breakpoint.
pub fn integrate_vec_split<S: Scalar, F, const K: usize>(
    f: F,
    a: S,
    b: S,
    breakpoints: &[S],
    opts: &QuadOptions<S>,
) -> Result<Integral<S, K>>
where
    F: Fn(S) -> [S; K],
{
    let mut cuts = vec![a];
    cuts.extend(breakpoints.iter().copied().filter(|&p| p > a && p < b));
    cuts.push(b);
    let mut acc = Integral { value: [S::zero(); K], error: S::zero(), evaluations: 0 };
    for w in cuts.windows(2) {
        acc = combine(acc, integrate_ref(&f, w[0], w[1], opts)?);
    }
    Ok(acc)
}

/// Scalar convenience wrapper.
pub fn integrate<S: Scalar, F>(f: F, a: S, b: S, opts: &QuadOptions<S>) -> Result<S>
where
    F: Fn(S) -> S,
{
    integrate_vec(|x| [f(x)], a, b, opts).map(|r| r.value[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate(|x: f64| x.powi(5) - 3.0 * x * x, -1.0, 2.0, &QuadOptions::default()).unwrap();
        let exact = (64.0 - 1.0) / 6.0 - (8.0 + 1.0);
        assert!((v - exact).abs() < 1e-13);
    }

    #[test]
    fn semi_infinite_exponential_and_power() {
        let opts = QuadOptions::relative(1e-12);
        let v = integrate(|x: f64| (-x).exp(), 0.0, f64::INFINITY, &opts).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        let v = integrate(|x: f64| 3.0 * x.powi(-4), 2.0, f64::INFINITY, &opts).unwrap();
        assert!((v - 0.125).abs() < 1e-13);
        let v = integrate(|x: f64| (-x * x / 2.0).exp(), f64::NEG_INFINITY, f64::INFINITY, &opts).unwrap();
        assert!((v - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-11);
        let v = integrate(|x: f64| (-x).exp(), 60.0, f64::INFINITY, &opts).unwrap();
        assert!((v / (-60.0f64).exp() - 1.0).abs() < 1e-11);
    }

    #[test]
    fn endpoint_singularity() {
        // ∫_0^1 x^{-1/2} = 2
        let v = integrate(|x: f64| x.powf(-0.5), 0.0, 1.0, &QuadOptions::relative(1e-10)).unwrap();
        assert!((v - 2.0).abs() < 1e-9);
    }

    #[test]
    fn vector_components_and_reversed_bounds() {
        let r = integrate_vec(|x: f64| [1.0, x], 3.0, 1.0, &QuadOptions::default()).unwrap();
        assert!((r.value[0] + 2.0).abs() < 1e-14);
        assert!((r.value[1] + 4.0).abs() < 1e-14);
    }

    #[test]
    fn split_at_kink() {
        let r = integrate_vec_split(|x: f64| [x.abs()], -1.0, 2.0, &[0.0], &QuadOptions::relative(1e-13)).unwrap();
        assert!((r.value[0] - 2.5).abs() < 1e-14);
    }
}
