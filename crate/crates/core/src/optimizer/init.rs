//! Starting codebooks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::distributions::{derive_seed, DistributionSpec, Family};
use crate::error::{QuantError, Result};
use crate::quadrature::{integrate_vec_split, QuadOptions};
use crate::roots::{bracketed_root, RootOptions};
use crate::scalar::Scalar;

use super::montecarlo::{solve_mc, McOptions};
use super::one_dim::{solve_stationary_1d, SolveOptions};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitStrategy<S> {
    /// Points at the `(k - 1/2)/n` quantiles (of `|X|`, with random
    /// directions, when `d ≥ 2`).
    Quantile,
    /// The stationary grid of level `n - 1` plus a perturbed copy of its
    /// outermost point.
    Splitting { r: S },
    /// `n` points on the sphere of the given radius (`d ≥ 2`).
    Hypersphere { radius: S },
    /// Quantiles of the density `∝ f^{d/(d+r)}`, the asymptotic point
    /// density of optimal grids. Random draws from that law when `d ≥ 2`.
    Companding { r: S },
}

/// Initial points, row-major.
pub fn init_grid<S: Scalar>(
    spec: &DistributionSpec<S>,
    n: usize,
    strategy: &InitStrategy<S>,
    seed: u64,
) -> Result<Vec<S>> {
    if n == 0 {
        return Err(QuantError::InvalidParameter("level must be positive".into()));
    }
    let d = spec.dimension();
    match *strategy {
        InitStrategy::Quantile if d == 1 => {
            let nf = S::from_usize_lossy(n);
            (0..n).map(|k| spec.quantile((S::from_usize_lossy(k) + S::lit(0.5)) / nf)).collect()
        }
        InitStrategy::Quantile => {
            let nf = S::from_usize_lossy(n);
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0));
            let mut out = Vec::with_capacity(n * d);
            for k in 0..n {
                let p = (S::from_usize_lossy(k) + S::lit(0.5)) / nf;
                let rho = spec.survival_inverse(S::one() - p)?;
                out.extend(random_direction::<S, _>(&mut rng, d).into_iter().map(|u| u * rho));
            }
            Ok(out)
        }
        InitStrategy::Hypersphere { radius } => {
            if d == 1 {
                return Err(QuantError::UnsupportedStrategy("hypersphere needs dimension >= 2".into()));
            }
            let mut out = Vec::with_capacity(n * d);
            if d == 2 {
                for k in 0..n {
                    let angle = S::lit(2.0) * S::PI() * S::from_usize_lossy(k) / S::from_usize_lossy(n);
                    out.push(radius * angle.cos());
                    out.push(radius * angle.sin());
                }
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0));
                for _ in 0..n {
                    out.extend(random_direction::<S, _>(&mut rng, d).into_iter().map(|u| u * radius));
                }
            }
            Ok(out)
        }
        InitStrategy::Splitting { r } => splitting(spec, n, r, seed),
        InitStrategy::Companding { r } if d == 1 => companding_1d(spec, n, r),
        InitStrategy::Companding { r } => {
            let df = S::from_usize_lossy(d);
            let tilt = df / (df + r);
            let tilted = match *spec.family() {
                Family::ExponentialPower { c, theta, kappa } => {
                    DistributionSpec::exponential_power(c * tilt, theta * tilt, kappa, d)?
                }
                Family::LogPolynomial { beta, c } => DistributionSpec::log_polynomial(beta * tilt, c * tilt, d)?,
                _ => unreachable!("only radial families have d >= 2"),
            };
            Ok(tilted.sample(derive_seed(seed, 1), n))
        }
    }
}

fn random_direction<S: Scalar, R: rand::Rng>(rng: &mut R, d: usize) -> Vec<S> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            return v.into_iter().map(|x| S::lit(x / norm)).collect();
        }
    }
}

fn splitting<S: Scalar>(spec: &DistributionSpec<S>, n: usize, r: S, seed: u64) -> Result<Vec<S>> {
    if n == 1 {
        return init_grid(spec, 1, &InitStrategy::Quantile, seed);
    }
    let d = spec.dimension();
    if d == 1 {
        let base = solve_stationary_1d(spec, n - 1, r, None, &SolveOptions::default())?;
        let mut x = base.flat().to_vec();
        let last = x.len() - 1;
        let (lo, hi) = spec.support_1d();
        let outer_right = x[last].abs() >= x[0].abs();
        let gap = if last > 0 { x[last] - x[last - 1] } else { x[0].abs().max(S::one()) };
        let delta = S::lit(0.1) * gap;
        let extra = if outer_right {
            let p = x[last] + delta;
            if p < hi {
                p
            } else {
                S::lit(0.5) * (x[last] + hi)
            }
        } else {
            let p = x[0] - delta;
            if p > lo {
                p
            } else {
                S::lit(0.5) * (x[0] + lo)
            }
        };
        x.push(extra);
        x.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        return Ok(x);
    }
    if r != S::lit(2.0) {
        return Err(QuantError::UnsupportedStrategy("splitting in dimension >= 2 needs r = 2".into()));
    }
    let opts = McOptions { samples: (100 * n).max(10_000), seed: derive_seed(seed, 2), ..McOptions::default() };
    let base = solve_mc(spec, n - 1, None, &opts)?;
    let mut pts = base.flat().to_vec();
    let norm = |p: &[S]| p.iter().map(|&v| v * v).sum::<S>().sqrt();
    let outer = (0..n - 1)
        .max_by(|&i, &j| norm(&pts[i * d..(i + 1) * d]).partial_cmp(&norm(&pts[j * d..(j + 1) * d])).unwrap())
        .expect("nonempty base");
    let copy: Vec<S> = pts[outer * d..(outer + 1) * d].iter().map(|&v| v * S::lit(1.05)).collect();
    pts.extend(copy);
    Ok(pts)
}

/// Quantiles of `f^{1/(1+r)}` by marching outward from the median.
fn companding_1d<S: Scalar>(spec: &DistributionSpec<S>, n: usize, r: S) -> Result<Vec<S>> {
    let expo = (S::one() + r).recip();
    let w = |u: S| {
        let v = spec.pdf_1d(u);
        if v > S::zero() && v.is_finite() {
            v.powf(expo)
        } else {
            S::zero()
        }
    };
    let (slo, shi) = spec.support_1d();
    let cuts = spec.breakpoints_1d();
    let opts = QuadOptions::relative(1e-9);
    let mass = |a: S, b: S| -> Result<S> { Ok(integrate_vec_split(|u| [w(u)], a, b, &cuts, &opts)?.value[0]) };
    let anchor = spec.quantile(S::lit(0.5))?;
    let left_mass = mass(slo, anchor)?;
    let total = left_mass + mass(anchor, shi)?;
    if !total.is_finite() || !(total > S::zero()) {
        return Err(QuantError::NonConvergence { op: "companding normaliser", residual: f64::INFINITY });
    }
    let h = total / S::from_usize_lossy(n);
    let targets: Vec<S> = (0..n).map(|k| (S::from_usize_lossy(k) + S::lit(0.5)) * h).collect();
    let mut out = vec![S::zero(); n];
    // march right from the anchor
    let mut pos = anchor;
    let mut acc = left_mass;
    for (k, &t) in targets.iter().enumerate().filter(|(_, &t)| t >= left_mass) {
        pos = march(&w, &mass, pos, t - acc, true, shi)?;
        acc = t;
        out[k] = pos;
    }
    let mut pos = anchor;
    let mut acc = left_mass;
    for (k, &t) in targets.iter().enumerate().rev().filter(|(_, &t)| t < left_mass) {
        pos = march(&w, &mass, pos, acc - t, false, slo)?;
        acc = t;
        out[k] = pos;
    }
    if out.windows(2).any(|p| !(p[0] < p[1])) {
        return Err(QuantError::NonConvergence { op: "companding init", residual: 0.0 });
    }
    Ok(out)
}

/// The point `x` beyond `from` (rightward or leftward) with
/// `|∫_from^x w| = need`, never passing `limit`.
fn march<S: Scalar, W, M>(w: &W, mass: &M, from: S, need: S, right: bool, limit: S) -> Result<S>
where
    W: Fn(S) -> S,
    M: Fn(S, S) -> Result<S>,
{
    let sgn = if right { S::one() } else { -S::one() };
    let local = w(from);
    let mut step = if local > S::zero() { need / local } else { S::one() };
    if !step.is_finite() || step <= S::zero() {
        step = S::one();
    }
    let seg = |x: S| -> S {
        let m = if right { mass(from, x) } else { mass(x, from) };
        m.unwrap_or(S::nan()) - need
    };
    let mut far;
    let mut tries = 0;
    loop {
        far = from + sgn * step;
        if (right && far >= limit) || (!right && far <= limit) {
            far = limit;
            if seg(far) < S::zero() {
                // rounding left no room before the end of the support
                return Ok(S::lit(0.5) * (from + limit));
            }
            break;
        }
        if seg(far) >= S::zero() {
            break;
        }
        step *= S::lit(2.0);
        tries += 1;
        if tries > 200 {
            return Err(QuantError::NonConvergence { op: "companding march", residual: f64::INFINITY });
        }
    }
    let scale = from.abs().max(far.abs()).max(S::one());
    let opts = RootOptions { x_tol: S::tol(1e-12) * scale, residual_tol: S::tol(1e-8), ..RootOptions::new(1e-12) };
    Ok(bracketed_root(seg, from, far, &opts)?.x)
}
