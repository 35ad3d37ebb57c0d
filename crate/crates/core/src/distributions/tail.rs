//! Tail indices and the radius growth constants they predict.
//!
//! The index arithmetic is written over any `num_traits::Num` type so that it
//! can be checked exactly with rationals; [`tail_indices`] runs the same code
//! on floats.

use num_traits::Num;
use serde::Serialize;

use super::{DistributionSpec, Family};
use crate::error::{QuantError, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TailKind {
    /// `F̄(x) ≈ exp(-θ x^κ)`; radii grow like `(log n)^{1/κ}`.
    ExponentialTail,
    /// `F̄(x) ≈ x^{-ζ}`; `log ρ_n` grows like `log n`.
    PolynomialTail,
}

/// Exponential-tail indices of a radial density `|x|^c e^{-θ|x|^κ}` in `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentialTailExponents<T> {
    pub theta_upper: T,
    pub theta_lower: T,
    pub nu_star: T,
    /// `(r+d)/(dθ*)`; the sharp radius constant is its `1/κ`-th power.
    pub sharp_base: T,
    /// `(r+ν*)/(dθ_*)`; the proven lower constant is its `1/κ`-th power.
    pub lower_base: T,
}

pub fn exponential_tail_exponents<T: Num + Clone>(r: T, d: T, theta: T) -> ExponentialTailExponents<T> {
    let nu_star = d.clone();
    let sharp_base = (r.clone() + d.clone()) / (d.clone() * theta.clone());
    let lower_base = (r + nu_star.clone()) / (d * theta.clone());
    ExponentialTailExponents { theta_upper: theta.clone(), theta_lower: theta, nu_star, sharp_base, lower_base }
}

/// Polynomial-tail indices of a radial density `(log|x|)^β |x|^{-c}` in `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialTailExponents<T> {
    pub zeta_upper: T,
    pub zeta_lower: T,
    pub nu_star: T,
    /// `(r+d)/(d(c-r-d))`, the limit of `log ρ_n / log n`.
    pub log_rate: T,
    /// `(r+ν*)/(d(ζ_*-r-ν*))`, the lower-bound form of the same limit.
    pub lower_log_rate: T,
}

pub fn polynomial_tail_exponents<T: Num + Clone>(r: T, d: T, c: T) -> PolynomialTailExponents<T> {
    let zeta = c.clone() - d.clone();
    let nu_star = d.clone() * (T::one() - (r.clone() + d.clone()) / c.clone());
    let log_rate = (r.clone() + d.clone()) / (d.clone() * (c - r.clone() - d.clone()));
    let lower_log_rate = (r.clone() + nu_star.clone()) / (d * (zeta.clone() - r - nu_star.clone()));
    PolynomialTailExponents { zeta_upper: zeta.clone(), zeta_lower: zeta, nu_star, log_rate, lower_log_rate }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailReport<S> {
    pub kind: TailKind,
    pub r: S,
    pub dimension: usize,
    pub kappa: Option<S>,
    pub theta_star_upper: Option<S>,
    pub theta_star_lower: Option<S>,
    pub zeta_star_upper: Option<S>,
    pub zeta_star_lower: Option<S>,
    pub nu_star: S,
    /// Conjectured limit of `ρ_n / (log n)^{1/κ}` or of `log ρ_n / log n`.
    pub predicted_sharp_constant: S,
    pub lower_constant: S,
    pub upper_constant: S,
    /// Constants inherited from an equivalent density rather than derived
    /// for this family directly.
    pub by_equivalence: bool,
}

impl<S: Scalar> TailReport<S> {
    /// The normalised radius: `ρ / (K (log n)^{1/κ})` or `log ρ / (L log n)`.
    pub fn ratio(&self, rho: S, n: usize) -> S {
        let ln_n = S::from_usize_lossy(n).ln();
        match self.kind {
            TailKind::ExponentialTail => {
                let kappa = self.kappa.expect("exponential tail has κ");
                rho / (self.predicted_sharp_constant * ln_n.powf(kappa.recip()))
            }
            TailKind::PolynomialTail => rho.ln() / (self.predicted_sharp_constant * ln_n),
        }
    }
}

/// Tail indices of `spec` at order `r`.
pub fn tail_indices<S: Scalar>(spec: &DistributionSpec<S>, r: S) -> Result<TailReport<S>> {
    spec.check_order(r)?;
    let d_usize = spec.dimension();
    let d = S::from_usize_lossy(d_usize);
    let one = S::one();
    let (theta, kappa, by_equivalence) = match *spec.family() {
        Family::Uniform { .. } => return Err(QuantError::BoundedSupport),
        Family::Exponential { lambda } => (lambda, one, false),
        Family::Gamma { lambda, .. } | Family::DoubleGamma { lambda, .. } => (lambda, one, false),
        Family::Weibull { kappa } => (one, kappa, false),
        Family::Logistic => (one, one, true),
        Family::ExponentialPower { theta, kappa, .. } => (theta, kappa, false),
        Family::Pareto { gamma } => return Ok(polynomial_report(r, one, gamma + one, 1)),
        Family::LogPolynomial { c, .. } => return Ok(polynomial_report(r, d, c, d_usize)),
    };
    let e = exponential_tail_exponents(r, d, theta);
    let inv_kappa = kappa.recip();
    let sharp = e.sharp_base.powf(inv_kappa);
    let lower = e.lower_base.powf(inv_kappa);
    let c_rd = if d_usize == 1 && r >= one { one } else { S::lit(2.0) };
    Ok(TailReport {
        kind: TailKind::ExponentialTail,
        r,
        dimension: d_usize,
        kappa: Some(kappa),
        theta_star_upper: Some(e.theta_upper),
        theta_star_lower: Some(e.theta_lower),
        zeta_star_upper: None,
        zeta_star_lower: None,
        nu_star: e.nu_star,
        predicted_sharp_constant: sharp,
        lower_constant: lower,
        upper_constant: c_rd * sharp,
        by_equivalence,
    })
}

fn polynomial_report<S: Scalar>(r: S, d: S, c: S, d_usize: usize) -> TailReport<S> {
    let p = polynomial_tail_exponents(r, d, c);
    TailReport {
        kind: TailKind::PolynomialTail,
        r,
        dimension: d_usize,
        kappa: None,
        theta_star_upper: None,
        theta_star_lower: None,
        zeta_star_upper: Some(p.zeta_upper),
        zeta_star_lower: Some(p.zeta_lower),
        nu_star: p.nu_star,
        predicted_sharp_constant: p.log_rate,
        lower_constant: p.lower_log_rate,
        upper_constant: p.log_rate,
        by_equivalence: false,
    }
}
