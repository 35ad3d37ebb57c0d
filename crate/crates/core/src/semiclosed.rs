//! Exact `L^r`-optimal grids for the exponential and Pareto laws, built from
//! the weight sequences `a_1 > a_2 > …` defined by `φ(-a_{k+1}) = φ(a_k)`,
//! `a_0 = +∞`.

use crate::codebook::{Codebook, CodebookMeta, Method};
use crate::distributions::DistributionSpec;
use crate::error::{QuantError, Result};
use crate::optimizer::{solve_stationary_1d, stationarity_residual, SolveOptions};
use crate::quadrature::{integrate, QuadOptions};
use crate::roots::{bracketed_root, expand_upper, RootOptions};
use crate::scalar::{Extended, Scalar};
use crate::special::{beta, beta_inc, gamma, lower_gamma, lower_gamma_growing};

/// `φ_r(x) = ∫_0^{x/2} |u|^{r-1} sign(u) e^{-u} du`.
pub fn phi_exponential<S: Scalar>(r: S, x: Extended<S>) -> Result<S> {
    if !(r > S::zero()) {
        return Err(QuantError::InvalidParameter(format!("r must be positive, got {r}")));
    }
    let half = S::lit(0.5);
    match x {
        Extended::PosInf => Ok(gamma(r)),
        Extended::NegInf => Ok(S::infinity()),
        Extended::Finite(v) if v >= S::zero() => lower_gamma(r, half * v),
        // u = -t turns the integral into ∫_0^{|x|/2} t^{r-1} e^{t} dt
        Extended::Finite(v) => lower_gamma_growing(r, -half * v),
    }
}

/// `φ_γ(x) = ∫_0^{x/2} γ |u|^{r-1} sign(u) (1+u)^{-(γ+1)} du` for `x > -2`.
pub fn phi_pareto<S: Scalar>(r: S, gamma_: S, x: Extended<S>) -> Result<S> {
    if !(r > S::zero()) || !(gamma_ > r - S::one()) {
        return Err(QuantError::InvalidParameter(format!(
            "phi_pareto needs r > 0 and γ > r - 1, got r={r}, γ={gamma_}"
        )));
    }
    let one = S::one();
    let half = S::lit(0.5);
    let b = gamma_ + one - r;
    match x {
        Extended::PosInf => Ok(gamma_ * beta(r, b)),
        Extended::NegInf => Err(QuantError::DomainError("phi_pareto at -∞".into())),
        Extended::Finite(v) if v >= S::zero() => {
            // τ = u/(1+u) maps the integral onto an incomplete beta
            let y = half * v;
            Ok(gamma_ * beta_inc(r, b, y / (one + y))?)
        }
        Extended::Finite(v) if v > -S::lit(2.0) => {
            let s = -half * v;
            if s <= half {
                pareto_negative_series(r, gamma_, s)
            } else {
                let opts = QuadOptions::relative(1e-12);
                let g = |t: S| gamma_ * t.powf(r - one) * (-(gamma_ + one) * (-t).ln_1p()).exp();
                integrate(g, S::zero(), s, &opts)
            }
        }
        Extended::Finite(v) => Err(QuantError::DomainError(format!("phi_pareto needs x > -2, got {v}"))),
    }
}

/// `γ ∫_0^s t^{r-1} (1-t)^{-(γ+1)} dt = γ Σ_k (γ+1)_k/k! · s^{r+k}/(r+k)`,
/// all terms positive.
fn pareto_negative_series<S: Scalar>(r: S, gamma_: S, s: S) -> Result<S> {
    if s == S::zero() {
        return Ok(S::zero());
    }
    let one = S::one();
    let mut coef = one;
    let mut power = one;
    let mut sum = r.recip();
    for k in 1..10_000 {
        let kf = S::from_usize_lossy(k);
        coef = coef * (gamma_ + kf) / kf;
        power *= s;
        let term = coef * power / (r + kf);
        sum += term;
        if term <= sum * S::epsilon() {
            return Ok(gamma_ * s.powf(r) * sum);
        }
    }
    Err(QuantError::NonConvergence { op: "pareto kernel series", residual: s.as_f64() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightFamily<S> {
    Exponential,
    Pareto { gamma: S },
}

/// `a_1, …, a_n` for one family and order.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSequence<S> {
    pub r: S,
    pub family: WeightFamily<S>,
    pub weights: Vec<S>,
}

impl<S: Scalar> WeightSequence<S> {
    pub fn compute(family: WeightFamily<S>, r: S, n: usize) -> Result<Self> {
        if let WeightFamily::Pareto { gamma } = family {
            if !(gamma > r) {
                return Err(QuantError::MomentUnavailable { r: r.as_f64() });
            }
        }
        let mut weights = Vec::with_capacity(n);
        let mut prev = Extended::PosInf;
        for _ in 0..n {
            let a = match family {
                WeightFamily::Exponential => next_weight_exponential(r, prev)?,
                WeightFamily::Pareto { gamma } => next_weight_pareto(r, gamma, prev)?,
            };
            weights.push(a);
            prev = Extended::Finite(a);
        }
        Ok(Self { r, family, weights })
    }

    /// `a_k`, 1-based.
    pub fn get(&self, k: usize) -> S {
        self.weights[k - 1]
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `lim k a_k`: `r+1`, or `(r+1)/(γ-r)`.
    pub fn limit(&self) -> S {
        match self.family {
            WeightFamily::Exponential => self.r + S::one(),
            WeightFamily::Pareto { gamma } => (self.r + S::one()) / (gamma - self.r),
        }
    }
}

fn root_tolerance<S: Scalar>() -> RootOptions<S> {
    RootOptions { x_tol: S::tol(1e-13), max_iter: 200, residual_tol: S::tol(1e-10) }
}

/// The `a > 0` with `φ_r(-a) = φ_r(a_prev)`.
pub fn next_weight_exponential<S: Scalar>(r: S, a_prev: Extended<S>) -> Result<S> {
    let target = match a_prev {
        Extended::Finite(v) if v > S::zero() => phi_exponential(r, a_prev)?,
        Extended::PosInf => phi_exponential(r, a_prev)?,
        _ => return Err(QuantError::DomainError("previous weight must be positive".into())),
    };
    let f = |a: S| phi_exponential(r, Extended::Finite(-a)).unwrap_or(S::infinity()) - target;
    let (lo, hi) = match a_prev {
        Extended::Finite(v) => (S::zero(), v),
        _ => expand_upper(f, S::zero(), S::one(), 200)?,
    };
    Ok(bracketed_root(f, lo, hi, &root_tolerance())?.x)
}

/// The `a > 0` with `φ_γ(-a/(1+a)) = φ_γ(a_prev)`.
pub fn next_weight_pareto<S: Scalar>(r: S, gamma_: S, a_prev: Extended<S>) -> Result<S> {
    if !(gamma_ > r) {
        return Err(QuantError::MomentUnavailable { r: r.as_f64() });
    }
    let one = S::one();
    let target = match a_prev {
        Extended::Finite(v) if v > S::zero() => phi_pareto(r, gamma_, a_prev)?,
        Extended::PosInf => phi_pareto(r, gamma_, a_prev)?,
        _ => return Err(QuantError::DomainError("previous weight must be positive".into())),
    };
    // solve for σ = a/(1+a) ∈ (0, 1)
    let f = |s: S| phi_pareto(r, gamma_, Extended::Finite(-s)).unwrap_or(S::infinity()) - target;
    let hi = match a_prev {
        Extended::Finite(v) => v / (one + v),
        _ => one,
    };
    if f(hi) < S::zero() {
        return Err(QuantError::NonConvergence { op: "pareto weight (no root below 1)", residual: (-f(hi)).as_f64() });
    }
    let s = bracketed_root(f, S::zero(), hi, &root_tolerance())?.x;
    Ok(s / (one - s))
}

fn semiclosed_meta<S: Scalar>(spec: DistributionSpec<S>, r: S) -> CodebookMeta<S> {
    CodebookMeta { method: Method::Semiclosed, r, seed: None, iterations: 0, spec: Some(spec) }
}

/// Exponential grid of level `n` from precomputed weights (at least `n`).
pub fn exponential_grid_from_weights<S: Scalar>(
    weights: &WeightSequence<S>,
    lambda: S,
    n: usize,
) -> Result<Codebook<S>> {
    if n == 0 || n > weights.len() {
        return Err(QuantError::InvalidParameter(format!("level {n} outside 1..={}", weights.len())));
    }
    // α_{n,k} = (a_n/2 + Σ_{i=n+1-k}^{n-1} a_i)/λ
    let mut pts = Vec::with_capacity(n);
    let mut acc = S::lit(0.5) * weights.get(n);
    pts.push(acc / lambda);
    for k in 2..=n {
        acc += weights.get(n + 1 - k);
        pts.push(acc / lambda);
    }
    let spec = DistributionSpec::exponential(lambda)?;
    Codebook::from_1d(pts, semiclosed_meta(spec, weights.r))
}

pub fn exponential_grid<S: Scalar>(r: S, lambda: S, n: usize) -> Result<Codebook<S>> {
    let w = WeightSequence::compute(WeightFamily::Exponential, r, n)?;
    exponential_grid_from_weights(&w, lambda, n)
}

/// How the Pareto weight products are turned into grid points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParetoReading {
    /// `α_{n,k} = (1+a_n)^{-1} ∏_{i=n-k+1}^{n-1} (1+a_i)`.
    Literal,
    /// `α_{n,k} = (1+a_n)/(1+a_n/2) · ∏_{i=n-k+1}^{n-1} (1+a_i)`: the
    /// innermost point is the stationary point of `(1, 1+a_n)`.
    Stationary,
}

impl ParetoReading {
    fn prefactor<S: Scalar>(self, a_n: S) -> S {
        let one = S::one();
        match self {
            ParetoReading::Literal => (one + a_n).recip(),
            ParetoReading::Stationary => (one + a_n) / (one + S::lit(0.5) * a_n),
        }
    }
}

fn pareto_points<S: Scalar>(weights: &WeightSequence<S>, n: usize, reading: ParetoReading) -> Vec<S> {
    let one = S::one();
    let mut pts = Vec::with_capacity(n);
    let mut acc = reading.prefactor(weights.get(n));
    pts.push(acc);
    for k in 2..=n {
        acc *= one + weights.get(n + 1 - k);
        pts.push(acc);
    }
    pts
}

/// Checks both readings at levels 1..=3 against a direct stationary solve
/// (or, for `r < 1`, against the distortion gradient) and returns the one
/// that agrees.
pub fn resolve_pareto_reading<S: Scalar>(r: S, gamma_: S) -> Result<ParetoReading> {
    let spec = DistributionSpec::pareto(gamma_)?;
    spec.check_order(r)?;
    let weights = WeightSequence::compute(WeightFamily::Pareto { gamma: gamma_ }, r, 3)?;
    let tol = S::tol(1e-6);
    let mut worst = (0usize, S::zero());
    'reading: for reading in [ParetoReading::Literal, ParetoReading::Stationary] {
        let mut dev_max = (0usize, S::zero());
        for n in 1..=3 {
            let pts = pareto_points(&weights, n, reading);
            let dev = if r >= S::one() {
                let oracle = solve_stationary_1d(&spec, n, r, None, &SolveOptions::default())?;
                pts.iter()
                    .zip(oracle.flat())
                    .fold(S::zero(), |m, (&a, &b)| m.max((a - b).abs() / b.abs().max(S::one())))
            } else if pts.iter().all(|&x| x > S::one()) && pts.windows(2).all(|w| w[0] < w[1]) {
                stationarity_residual(&spec, &pts, r)?
            } else {
                S::infinity()
            };
            if dev > dev_max.1 {
                dev_max = (n, dev);
            }
            if !(dev <= tol) {
                if worst.0 == 0 || dev_max.1 < worst.1 {
                    worst = dev_max;
                }
                continue 'reading;
            }
        }
        return Ok(reading);
    }
    Err(QuantError::OrientationMismatch { level: worst.0, deviation: worst.1.as_f64() })
}

/// Pareto grid of level `n` from precomputed weights, using a reading
/// obtained from [`resolve_pareto_reading`].
pub fn pareto_grid_from_weights<S: Scalar>(
    weights: &WeightSequence<S>,
    n: usize,
    reading: ParetoReading,
) -> Result<Codebook<S>> {
    let WeightFamily::Pareto { gamma } = weights.family else {
        return Err(QuantError::InvalidParameter("not a Pareto weight sequence".into()));
    };
    if n == 0 || n > weights.len() {
        return Err(QuantError::InvalidParameter(format!("level {n} outside 1..={}", weights.len())));
    }
    let spec = DistributionSpec::pareto(gamma)?;
    Codebook::from_1d(pareto_points(weights, n, reading), semiclosed_meta(spec, weights.r))
}

pub fn pareto_grid<S: Scalar>(r: S, gamma_: S, n: usize) -> Result<Codebook<S>> {
    let reading = resolve_pareto_reading(r, gamma_)?;
    let w = WeightSequence::compute(WeightFamily::Pareto { gamma: gamma_ }, r, n)?;
    pareto_grid_from_weights(&w, n, reading)
}

#[cfg(test)]
mod tests {
    use super::*;

    const INF: Extended<f64> = Extended::PosInf;

    fn fin(x: f64) -> Extended<f64> {
        Extended::Finite(x)
    }

    #[test]
    fn phi_exponential_examples() {
        assert!((phi_exponential(2.0, INF).unwrap() - 1.0).abs() < 1e-15);
        assert!((phi_exponential(1.0, fin(2.0)).unwrap() - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert!((phi_exponential(2.0, fin(-2.0)).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(phi_exponential(2.0, fin(0.0)).unwrap(), 0.0);
    }

    /// r = 2 closed-form antiderivatives as an independent oracle (they cancel
    /// for small x, hence the absolute slack).
    #[test]
    fn phi_exponential_matches_closed_forms_r2() {
        for &x in &[1e-6f64, 0.01, 0.3, 2.0, 7.5, 40.0] {
            let s = x / 2.0;
            let pos = 1.0 - (-s).exp() * (s + 1.0);
            let neg = s.exp() * (s - 1.0) + 1.0;
            let p = phi_exponential(2.0, fin(x)).unwrap();
            let m = phi_exponential(2.0, fin(-x)).unwrap();
            assert!((p - pos).abs() <= 1e-13 * pos + 1e-15, "x={x}: {p} vs {pos}");
            assert!((m - neg).abs() <= 1e-12 * neg + 1e-15, "x={x}: {m} vs {neg}");
        }
    }

    #[test]
    fn phi_pareto_examples() {
        assert!((phi_pareto(1.0, 2.0, INF).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(phi_pareto(2.0, 5.0, fin(0.0)).unwrap(), 0.0);
        assert!((phi_pareto(1.0, 2.0, fin(-1.0)).unwrap() - 3.0).abs() < 1e-13);
        assert!(phi_pareto(1.0, 2.0, fin(-2.0)).is_err());
        // beyond the series range, quadrature
        let v = phi_pareto(1.0, 2.0, fin(-1.6)).unwrap();
        assert!((v - (0.2f64.powi(-2) - 1.0)).abs() < 1e-10);
    }

    #[test]
    fn phi_pareto_against_quadrature() {
        let opts = QuadOptions::relative(1e-13);
        for &(r, g) in &[(2.0, 5.0), (2.0, 3.0), (0.7, 1.5), (3.5, 4.0)] {
            for &x in &[0.2, 3.0, 50.0, -0.3, -0.9] {
                let y: f64 = x / 2.0;
                let direct = integrate(
                    |u: f64| g * u.abs().powf(r - 1.0) * u.signum() * (1.0 + u).powf(-(g + 1.0)),
                    0.0,
                    y,
                    &opts,
                )
                .unwrap();
                let v = phi_pareto(r, g, fin(x)).unwrap();
                assert!((v - direct).abs() < 1e-11 * direct.abs().max(1e-3), "r={r} γ={g} x={x}: {v} vs {direct}");
            }
        }
    }

    #[test]
    fn exponential_weights() {
        assert!((next_weight_exponential(2.0, INF).unwrap() - 2.0).abs() < 1e-12);
        let a2 = next_weight_exponential(2.0, fin(2.0)).unwrap();
        // e^s(s-1) + 1 = 1 - 2/e with a = 2s
        let s = bracketed_root(|s: f64| s.exp() * (s - 1.0) + 2.0 / 1f64.exp(), 0.0, 1.0, &RootOptions::new(1e-15))
            .unwrap()
            .x;
        assert!((a2 - 2.0 * s).abs() < 1e-12);
        assert!((a2 - 1.1871).abs() < 5e-4);
        for &prev in &[0.01, 0.5, 3.0, 20.0] {
            assert!(next_weight_exponential(2.0, fin(prev)).unwrap() < prev);
        }
    }

    #[test]
    fn exponential_grid_examples() {
        assert!((exponential_grid(2.0f64, 1.0, 1).unwrap().flat()[0] - 1.0).abs() < 1e-12);
        assert!((exponential_grid(2.0f64, 2.0, 1).unwrap().flat()[0] - 0.5).abs() < 1e-12);
        let g = exponential_grid(2.0f64, 1.0, 2).unwrap();
        let m = 1.593_624_260_206_9f64;
        assert!((g.flat()[0] - (m - 1.0)).abs() < 1e-9 && (g.flat()[1] - (m + 1.0)).abs() < 1e-9);
        assert_eq!(g.meta.method, Method::Semiclosed);
    }

    #[test]
    fn pareto_weights() {
        let a1 = next_weight_pareto(2.0, 5.0, INF).unwrap();
        assert!(a1.is_finite() && a1 > 0.0);
        for &prev in &[0.01, 0.5, 3.0, 20.0] {
            assert!(next_weight_pareto(2.0, 5.0, fin(prev)).unwrap() < prev);
        }
        // γ = 3: the first weight is 2
        assert!((next_weight_pareto(2.0, 3.0, INF).unwrap() - 2.0).abs() < 1e-10);
    }

    #[test]
    fn pareto_reading_and_grid() {
        assert_eq!(resolve_pareto_reading(2.0, 5.0).unwrap(), ParetoReading::Stationary);
        assert!((pareto_grid(2.0f64, 3.0, 1).unwrap().flat()[0] - 1.5).abs() < 1e-10);
        assert!((pareto_grid(2.0f64, 5.0, 1).unwrap().flat()[0] - 1.25).abs() < 1e-10);
        let g = pareto_grid(2.0f64, 5.0, 2).unwrap();
        assert!(g.flat()[0] > 1.0 && g.flat()[0] < g.flat()[1]);
    }

    #[test]
    fn semiclosed_matches_stationary_solve() {
        let e = DistributionSpec::<f64>::exponential(1.0).unwrap();
        let w = WeightSequence::compute(WeightFamily::Exponential, 2.0, 10).unwrap();
        for n in 1..=10 {
            let a = exponential_grid_from_weights(&w, 1.0, n).unwrap();
            let b = solve_stationary_1d(&e, n, 2.0, None, &SolveOptions::default()).unwrap();
            for (x, y) in a.flat().iter().zip(b.flat()) {
                assert!((x - y).abs() < 1e-6, "n={n}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn single_precision_weights() {
        let w = WeightSequence::<f32>::compute(WeightFamily::Exponential, 2.0, 50).unwrap();
        assert!((w.get(1) - 2.0).abs() < 1e-5);
        assert!(w.weights.windows(2).all(|p| p[1] < p[0]));
    }
}
