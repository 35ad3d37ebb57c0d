//! One-dimensional stationary quantizers by quadrature.
//!
//! The Lloyd map `T` sends each point to the stationary point of its
//! Voronoi cell. [`solve_stationary_1d`] looks for a fixed point of `T` with
//! Newton steps on `T(x) - x`, using the tridiagonal Jacobian of `T`, and
//! falls back to a plain Lloyd step whenever the Newton step does not reduce
//! the residual.

use crate::codebook::{Codebook, CodebookMeta, Method};
use crate::distributions::DistributionSpec;
use crate::error::{QuantError, Result};
use crate::quadrature::{integrate_vec_split, QuadOptions};
use crate::roots::{bracketed_root, RootOptions};
use crate::scalar::Scalar;

use super::init::{init_grid, InitStrategy};
use super::{DistortionMethod, DistortionReport};

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions<S> {
    /// Stop once `max_i |T(x)_i - x_i| / max(1, |x_i|)` falls below this.
    pub tol: S,
    pub max_iterations: usize,
    /// Newton acceleration; plain Lloyd iteration when false.
    pub accelerate: bool,
}

impl<S: Scalar> Default for SolveOptions<S> {
    fn default() -> Self {
        Self { tol: S::tol(1e-11), max_iterations: 10_000, accelerate: true }
    }
}

/// Midpoints between consecutive points.
pub fn voronoi_boundaries_1d<S: Scalar>(points: &[S]) -> Result<Vec<S>> {
    check_sorted(points)?;
    Ok(points.windows(2).map(|w| S::lit(0.5) * (w[0] + w[1])).collect())
}

fn check_sorted<S: Scalar>(points: &[S]) -> Result<()> {
    if points.is_empty() {
        return Err(QuantError::EmptyCodebook);
    }
    if points.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(QuantError::NotSorted);
    }
    Ok(())
}

fn check_order<S: Scalar>(spec: &DistributionSpec<S>, r: S) -> Result<()> {
    spec.require_1d()?;
    spec.check_order(r)?;
    if r < S::one() {
        return Err(QuantError::InvalidParameter(format!("Lloyd iteration needs r >= 1, got {r}")));
    }
    Ok(())
}

fn cell_quad<S: Scalar>() -> QuadOptions<S> {
    QuadOptions::relative(1e-12)
}

#[derive(Debug, Clone, Copy)]
struct Cell<S> {
    lo: S,
    hi: S,
    /// Whether each end is a Voronoi midpoint inside the support (and so
    /// moves with the neighbouring points).
    lo_moves: bool,
    hi_moves: bool,
}

fn cells<S: Scalar>(spec: &DistributionSpec<S>, x: &[S]) -> Vec<Cell<S>> {
    let (slo, shi) = spec.support_1d();
    let n = x.len();
    let half = S::lit(0.5);
    let mid = |i: usize| half * (x[i] + x[i + 1]);
    (0..n)
        .map(|i| {
            let (lo, lo_moves) = if i == 0 {
                (slo, false)
            } else {
                let m = mid(i - 1);
                (m.max(slo), m > slo && m < shi)
            };
            let (hi, hi_moves) = if i + 1 == n {
                (shi, false)
            } else {
                let m = mid(i);
                (m.min(shi), m > slo && m < shi)
            };
            Cell { lo, hi, lo_moves, hi_moves }
        })
        .collect()
}

/// Lloyd image and the partial derivatives of each image point with respect
/// to its two cell boundaries.
struct MapEval<S> {
    t: Vec<S>,
    d_lo: Vec<S>,
    d_hi: Vec<S>,
}

fn mass_floor<S: Scalar>() -> S {
    S::lit(1e-300).max(S::min_positive_value())
}

fn psi<S: Scalar>(t: S, r: S) -> S {
    if t == S::zero() {
        S::zero()
    } else {
        t.signum() * t.abs().powf(r - S::one())
    }
}

/// `∫_cell ψ(α - u) f(u) du` with `ψ(t) = sign(t)|t|^{r-1}`.
fn cell_gradient<S: Scalar>(spec: &DistributionSpec<S>, cell: &Cell<S>, alpha: S, r: S) -> Result<S> {
    let res = spec.expect_1d(cell.lo, cell.hi, &[alpha], |u| [psi(alpha - u, r)], &cell_quad())?;
    Ok(res.value[0])
}

fn lloyd_map<S: Scalar>(spec: &DistributionSpec<S>, x: &[S], r: S) -> Result<MapEval<S>> {
    let n = x.len();
    let mut t = Vec::with_capacity(n);
    let mut d_lo = Vec::with_capacity(n);
    let mut d_hi = Vec::with_capacity(n);
    let two = S::lit(2.0);
    for (i, cell) in cells(spec, x).iter().enumerate() {
        let (ti, glo, ghi) =
            if r == two { quadratic_cell(spec, cell, x[i], i)? } else { general_cell(spec, cell, x[i], i, r)? };
        t.push(ti);
        d_lo.push(glo);
        d_hi.push(ghi);
    }
    Ok(MapEval { t, d_lo, d_hi })
}

fn quadratic_cell<S: Scalar>(spec: &DistributionSpec<S>, cell: &Cell<S>, c: S, index: usize) -> Result<(S, S, S)> {
    let one = S::one();
    let res = spec.expect_1d(cell.lo, cell.hi, &[], |u| [one, u - c], &cell_quad())?;
    let m0 = res.value[0];
    if !(m0 > mass_floor()) {
        return Err(QuantError::EmptyCell { index });
    }
    let mut t = c + res.value[1] / m0;
    t = t.max(cell.lo).min(cell.hi);
    let d_lo = if cell.lo_moves { spec.pdf_1d(cell.lo) * (t - cell.lo) / m0 } else { S::zero() };
    let d_hi = if cell.hi_moves { spec.pdf_1d(cell.hi) * (cell.hi - t) / m0 } else { S::zero() };
    Ok((t, d_lo, d_hi))
}

fn general_cell<S: Scalar>(
    spec: &DistributionSpec<S>,
    cell: &Cell<S>,
    start: S,
    index: usize,
    r: S,
) -> Result<(S, S, S)> {
    let one = S::one();
    let mass = spec.expect_1d(cell.lo, cell.hi, &[], |_| [one], &cell_quad())?.value[0];
    if !(mass > mass_floor()) {
        return Err(QuantError::EmptyCell { index });
    }
    let g = |a: S| cell_gradient(spec, cell, a, r).unwrap_or_else(|_| S::nan());
    let centre = start.max(cell.lo).min(cell.hi);
    let mut a = if cell.lo.is_finite() { cell.lo } else { centre - one };
    let mut step = one;
    while g(a) > S::zero() {
        a -= step;
        step *= S::lit(2.0);
        if !a.is_finite() {
            return Err(QuantError::NonConvergence { op: "cell root bracket", residual: f64::INFINITY });
        }
    }
    let mut b = if cell.hi.is_finite() { cell.hi } else { centre + one };
    let mut step = one;
    while g(b) < S::zero() {
        b += step;
        step *= S::lit(2.0);
        if !b.is_finite() {
            return Err(QuantError::NonConvergence { op: "cell root bracket", residual: f64::INFINITY });
        }
    }
    let scale = a.abs().max(b.abs()).max(one);
    let opts = RootOptions { x_tol: S::tol(1e-13) * scale, residual_tol: S::tol(1e-12), ..RootOptions::new(1e-13) };
    let alpha = bracketed_root(g, a, b, &opts)?.x;
    // ∂G/∂α where G is the cell gradient
    let g_alpha = if r == one {
        S::lit(2.0) * spec.pdf_1d(alpha)
    } else {
        // in t = u - α so the singularity of |t|^{r-2} sits exactly at 0
        let rm2 = r - S::lit(2.0);
        let mut cuts: Vec<S> = spec.breakpoints_1d().iter().map(|&b| b - alpha).collect();
        cuts.push(S::zero());
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        let h = |t: S| [if t == S::zero() { S::zero() } else { t.abs().powf(rm2) * spec.pdf_1d(alpha + t) }];
        let res = integrate_vec_split(h, cell.lo - alpha, cell.hi - alpha, &cuts, &cell_quad())?;
        (r - one) * res.value[0]
    };
    let rm1 = r - one;
    let (mut d_lo, mut d_hi) = (S::zero(), S::zero());
    if g_alpha > S::zero() && g_alpha.is_finite() {
        if cell.lo_moves {
            d_lo = (alpha - cell.lo).powf(rm1) * spec.pdf_1d(cell.lo) / g_alpha;
        }
        if cell.hi_moves {
            d_hi = (cell.hi - alpha).powf(rm1) * spec.pdf_1d(cell.hi) / g_alpha;
        }
    }
    Ok((alpha, d_lo, d_hi))
}

/// `Σ_i ∫_{C_i} |u - x_i|^r f(u) du`.
pub fn distortion_quadrature_1d<S: Scalar>(
    spec: &DistributionSpec<S>,
    points: &[S],
    r: S,
) -> Result<DistortionReport<S>> {
    spec.require_1d()?;
    spec.check_order(r)?;
    check_sorted(points)?;
    let mut total = crate::scalar::CompensatedSum::new();
    for (i, cell) in cells(spec, points).iter().enumerate() {
        let c = points[i];
        let res = spec.expect_1d(cell.lo, cell.hi, &[c], |u| [(u - c).abs().powf(r)], &cell_quad())?;
        total.add(res.value[0]);
    }
    Ok(DistortionReport {
        value: total.value(),
        r,
        method: DistortionMethod::Quadrature,
        std_error: S::zero(),
        samples: None,
        workers: 1,
    })
}

/// One Lloyd step: each point moves to the stationary point of its cell.
pub fn lloyd_step_1d<S: Scalar>(spec: &DistributionSpec<S>, points: &[S], r: S) -> Result<Vec<S>> {
    check_order(spec, r)?;
    check_sorted(points)?;
    let mut t = lloyd_map(spec, points, r)?.t;
    t.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    Ok(t)
}

/// Gradient of the distortion, `r ∫_{C_i} (x_i - u)|u - x_i|^{r-2} f(u) du`.
pub fn stationarity_gradient<S: Scalar>(spec: &DistributionSpec<S>, points: &[S], r: S) -> Result<Vec<S>> {
    spec.require_1d()?;
    spec.check_order(r)?;
    check_sorted(points)?;
    cells(spec, points).iter().zip(points).map(|(cell, &x)| Ok(r * cell_gradient(spec, cell, x, r)?)).collect()
}

/// `max_i |∂D/∂x_i|`.
pub fn stationarity_residual<S: Scalar>(spec: &DistributionSpec<S>, points: &[S], r: S) -> Result<S> {
    Ok(stationarity_gradient(spec, points, r)?.into_iter().fold(S::zero(), |m, g| m.max(g.abs())))
}

fn scaled_move<S: Scalar>(x: &[S], t: &[S]) -> S {
    x.iter().zip(t).fold(S::zero(), |m, (&a, &b)| m.max((b - a).abs() / a.abs().max(S::one())))
}

/// Solves `A z = rhs` for tridiagonal `A` (sub-, main and super-diagonal).
fn thomas<S: Scalar>(sub: &[S], diag: &[S], sup: &[S], rhs: &[S]) -> Option<Vec<S>> {
    let n = diag.len();
    let mut c = vec![S::zero(); n];
    let mut d = vec![S::zero(); n];
    let mut denom = diag[0];
    if denom == S::zero() {
        return None;
    }
    c[0] = sup[0] / denom;
    d[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - sub[i] * c[i - 1];
        if denom == S::zero() || !denom.is_finite() {
            return None;
        }
        c[i] = sup[i] / denom;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        d[i] = d[i] - c[i] * d[i + 1];
    }
    d.iter().all(|v| v.is_finite()).then_some(d)
}

fn newton_direction<S: Scalar>(x: &[S], eval: &MapEval<S>) -> Option<Vec<S>> {
    let n = x.len();
    let half = S::lit(0.5);
    // (J_T - I) Δ = x - T
    let sub: Vec<S> = (0..n).map(|i| if i > 0 { half * eval.d_lo[i] } else { S::zero() }).collect();
    let sup: Vec<S> = (0..n).map(|i| if i + 1 < n { half * eval.d_hi[i] } else { S::zero() }).collect();
    let diag: Vec<S> = (0..n).map(|i| half * (eval.d_lo[i] + eval.d_hi[i]) - S::one()).collect();
    let rhs: Vec<S> = x.iter().zip(&eval.t).map(|(&a, &b)| a - b).collect();
    thomas(&sub, &diag, &sup, &rhs)
}

fn admissible<S: Scalar>(spec: &DistributionSpec<S>, x: &[S]) -> bool {
    let (lo, hi) = spec.support_1d();
    x.iter().all(|v| v.is_finite() && *v > lo && *v < hi) && x.windows(2).all(|w| w[0] < w[1])
}

/// Stationary quantizer of level `n` for a one-dimensional law.
pub fn solve_stationary_1d<S: Scalar>(
    spec: &DistributionSpec<S>,
    n: usize,
    r: S,
    init: Option<&[S]>,
    opts: &SolveOptions<S>,
) -> Result<Codebook<S>> {
    check_order(spec, r)?;
    if n == 0 {
        return Err(QuantError::InvalidParameter("level must be positive".into()));
    }
    let mut x = match init {
        Some(p) => {
            if p.len() != n {
                return Err(QuantError::InvalidParameter(format!("init has {} points, level is {n}", p.len())));
            }
            check_sorted(p)?;
            p.to_vec()
        }
        None => match init_grid(spec, n, &InitStrategy::Companding { r }, 0) {
            Ok(p) if admissible(spec, &p) => p,
            _ => init_grid(spec, n, &InitStrategy::Quantile, 0)?,
        },
    };
    let mut eval = lloyd_map(spec, &x, r)?;
    let mut residual = scaled_move(&x, &eval.t);
    for it in 1..=opts.max_iterations {
        if residual < opts.tol {
            let mut polished = eval.t;
            polished.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
            return finish(spec, polished, r, it);
        }
        let mut next = None;
        if opts.accelerate {
            if let Some(delta) = newton_direction(&x, &eval) {
                let mut lambda = S::one();
                for _ in 0..4 {
                    let cand: Vec<S> = x.iter().zip(&delta).map(|(&a, &d)| a + lambda * d).collect();
                    if admissible(spec, &cand) {
                        if let Ok(e) = lloyd_map(spec, &cand, r) {
                            let res = scaled_move(&cand, &e.t);
                            if res < residual {
                                next = Some((cand, e, res));
                                break;
                            }
                        }
                    }
                    lambda *= S::lit(0.5);
                }
            }
        }
        let (nx, ne, nr) = match next {
            Some(v) => v,
            None => {
                let mut t = eval.t.clone();
                t.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
                let e = lloyd_map(spec, &t, r)?;
                let res = scaled_move(&t, &e.t);
                (t, e, res)
            }
        };
        x = nx;
        eval = ne;
        residual = nr;
    }
    Err(QuantError::MaxIterations { iterations: opts.max_iterations, residual: residual.as_f64() })
}

fn finish<S: Scalar>(spec: &DistributionSpec<S>, points: Vec<S>, r: S, iterations: usize) -> Result<Codebook<S>> {
    let meta = CodebookMeta { method: Method::Lloyd1d, r, seed: None, iterations, spec: Some(spec.clone()) };
    let cb = Codebook::from_1d(points, meta)?;
    let grad = stationarity_residual(spec, cb.flat(), r)?;
    if !(grad < S::tol(1e-8)) {
        return Err(QuantError::NonConvergence { op: "stationary solve", residual: grad.as_f64() });
    }
    Ok(cb)
}
