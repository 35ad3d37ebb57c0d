//! Bracketed scalar root finding: Illinois regula falsi with a bisection
//! safeguard whenever the bracket stops shrinking.

use crate::error::{QuantError, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy)]
pub struct RootOptions<S> {
    /// Stop once the bracket is narrower than this.
    pub x_tol: S,
    pub max_iter: usize,
    /// After `max_iter`, accept the estimate if `|f(x)|` is below this.
    pub residual_tol: S,
}

impl<S: Scalar> RootOptions<S> {
    pub fn new(x_tol: f64) -> Self {
        Self { x_tol: S::lit(x_tol), max_iter: 200, residual_tol: S::lit(1e-10) }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Root<S> {
    pub x: S,
    pub residual: S,
    pub iterations: usize,
}

/// Finds a zero of `f` in `[lo, hi]`, which must bracket a sign change.
pub fn bracketed_root<S: Scalar, F>(f: F, lo: S, hi: S, opts: &RootOptions<S>) -> Result<Root<S>>
where
    F: Fn(S) -> S,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == S::zero() {
        return Ok(Root { x: a, residual: S::zero(), iterations: 0 });
    }
    if fb == S::zero() {
        return Ok(Root { x: b, residual: S::zero(), iterations: 0 });
    }
    if fa.is_nan() || fb.is_nan() || fa.signum() == fb.signum() {
        return Err(QuantError::DomainError(format!("no sign change on [{a}, {b}] (f = {fa}, {fb})")));
    }
    let half = S::lit(0.5);
    // which endpoint was retained last: -1 left, +1 right
    let mut side = 0i8;
    let mut width_before = b - a;
    let mut best = if fa.abs() < fb.abs() { (a, fa) } else { (b, fb) };
    for it in 1..=opts.max_iter {
        if b - a <= opts.x_tol {
            return Ok(Root { x: best.0, residual: best.1.abs(), iterations: it - 1 });
        }
        let mut x = (a * fb - b * fa) / (fb - fa);
        if it % 3 == 0 {
            if b - a > half * width_before {
                x = half * (a + b);
            }
            width_before = b - a;
        }
        if !(x > a && x < b) {
            x = half * (a + b);
        }
        let fx = f(x);
        if fx.abs() < best.1.abs() {
            best = (x, fx);
        }
        if fx == S::zero() {
            return Ok(Root { x, residual: S::zero(), iterations: it });
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
            if side == -1 {
                fb *= half;
            }
            side = -1;
        } else {
            b = x;
            fb = fx;
            if side == 1 {
                fa *= half;
            }
            side = 1;
        }
    }
    if best.1.abs() <= opts.residual_tol {
        Ok(Root { x: best.0, residual: best.1.abs(), iterations: opts.max_iter })
    } else {
        Err(QuantError::NonConvergence { op: "bracketed root", residual: best.1.abs().as_f64() })
    }
}

/// Grows `hi` geometrically (from `start`) until `f` changes sign relative to
/// `f(lo)`. Returns the bracket.
pub fn expand_upper<S: Scalar, F>(f: F, lo: S, start: S, max_doublings: usize) -> Result<(S, S)>
where
    F: Fn(S) -> S,
{
    let flo = f(lo);
    let mut a = lo;
    let mut b = start.max(lo + S::epsilon() * lo.abs().max(S::one()));
    for _ in 0..max_doublings {
        let fb = f(b);
        if fb == S::zero() || fb.signum() != flo.signum() {
            return Ok((a, b));
        }
        a = b;
        b = if b > S::zero() { b * S::lit(2.0) } else { b + (b - lo).abs().max(S::one()) };
    }
    Err(QuantError::NonConvergence { op: "bracket expansion", residual: f64::INFINITY })
}
