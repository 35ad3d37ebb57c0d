//! Densities, (generalized) survival functions, distribution functions and
//! quantiles.

use super::{DistributionSpec, Family};
use crate::error::{QuantError, Result};
use crate::quadrature::{integrate, QuadOptions};
use crate::roots::{bracketed_root, expand_upper, RootOptions};
use crate::scalar::Scalar;
use crate::special::{gamma_pq, gamma_q, ln_gamma};

impl<S: Scalar> DistributionSpec<S> {
    /// Density at a point of `R^d`.
    pub fn pdf(&self, x: &[S]) -> Result<S> {
        if x.len() != self.dimension {
            return Err(QuantError::DimensionMismatch { expected: self.dimension, got: x.len() });
        }
        if self.is_radial() {
            let rho = x.iter().map(|&v| v * v).sum::<S>().sqrt();
            Ok(self.radial_profile(rho))
        } else {
            Ok(self.pdf_1d(x[0]))
        }
    }

    /// Density of a radial family at any point of norm `rho`.
    pub(crate) fn radial_profile(&self, rho: S) -> S {
        match self.family {
            Family::ExponentialPower { c, theta, kappa } => {
                if rho == S::zero() {
                    return if c == S::zero() {
                        self.log_norm.exp()
                    } else if c > S::zero() {
                        S::zero()
                    } else {
                        S::infinity()
                    };
                }
                (self.log_norm + c * rho.ln() - theta * rho.powf(kappa)).exp()
            }
            Family::LogPolynomial { beta, c } => {
                if rho <= S::one() {
                    return S::zero();
                }
                let l = rho.ln();
                (self.log_norm + beta * l.ln() - c * l).exp()
            }
            _ => unreachable!("radial_profile on a scalar family"),
        }
    }

    /// Density on the real line (only meaningful when `dimension == 1`).
    pub(crate) fn pdf_1d(&self, u: S) -> S {
        let zero = S::zero();
        match self.family {
            Family::Uniform { a, b } => {
                if u >= a && u <= b {
                    (b - a).recip()
                } else {
                    zero
                }
            }
            Family::Exponential { lambda } => {
                if u < zero {
                    zero
                } else {
                    lambda * (-lambda * u).exp()
                }
            }
            Family::Gamma { a, lambda } => {
                if u < zero {
                    zero
                } else {
                    gamma_density(a, lambda, u)
                }
            }
            Family::DoubleGamma { a, lambda } => S::lit(0.5) * gamma_density(a, lambda, u.abs()),
            Family::Weibull { kappa } => {
                if u < zero {
                    zero
                } else if u == zero {
                    if kappa == S::one() {
                        S::one()
                    } else if kappa > S::one() {
                        zero
                    } else {
                        S::infinity()
                    }
                } else {
                    kappa * ((kappa - S::one()) * u.ln() - u.powf(kappa)).exp()
                }
            }
            Family::Pareto { gamma } => {
                if u <= S::one() {
                    zero
                } else {
                    gamma * (-(gamma + S::one()) * u.ln()).exp()
                }
            }
            Family::Logistic => {
                let e = (-u.abs()).exp();
                e / ((S::one() + e) * (S::one() + e))
            }
            Family::ExponentialPower { .. } | Family::LogPolynomial { .. } => self.radial_profile(u.abs()),
        }
    }

    /// `F̄(x) = P(|X| > x)` for `x ≥ 0`.
    pub fn survival(&self, x: S) -> Result<S> {
        check_nonneg(x)?;
        let one = S::one();
        Ok(match self.family {
            Family::Uniform { a, b } => {
                let pos = (b - a.max(x)).max(S::zero());
                let neg = (b.min(-x) - a).max(S::zero());
                (pos + neg) / (b - a)
            }
            Family::Exponential { lambda } => (-lambda * x).exp(),
            Family::Gamma { a, lambda } | Family::DoubleGamma { a, lambda } => gamma_q(a, lambda * x)?,
            Family::Weibull { kappa } => (-x.powf(kappa)).exp(),
            Family::Pareto { gamma } => {
                if x <= one {
                    one
                } else {
                    (-gamma * x.ln()).exp()
                }
            }
            Family::Logistic => {
                let e = (-x).exp();
                S::lit(2.0) * e / (one + e)
            }
            Family::ExponentialPower { c, theta, kappa } => {
                let d = S::from_usize_lossy(self.dimension);
                gamma_q((c + d) / kappa, theta * x.powf(kappa))?
            }
            Family::LogPolynomial { beta, c } => {
                if x <= one {
                    one
                } else {
                    let d = S::from_usize_lossy(self.dimension);
                    gamma_q(beta + one, (c - d) * x.ln())?
                }
            }
        })
    }

    /// `F̄_r(x) = E[|X|^r 1{|X| > x}]` for `x ≥ 0`.
    pub fn generalized_survival(&self, r: S, x: S) -> Result<S> {
        self.check_order(r)?;
        check_nonneg(x)?;
        let one = S::one();
        Ok(match self.family {
            Family::Uniform { a, b } => {
                let r1 = r + one;
                let power_integral = |lo: S, hi: S| {
                    if hi > lo {
                        (hi.powf(r1) - lo.powf(r1)) / r1
                    } else {
                        S::zero()
                    }
                };
                let pos = power_integral(a.max(x).max(S::zero()), b);
                let neg = power_integral(x.max(-b).max(S::zero()), -a);
                (pos + neg) / (b - a)
            }
            Family::Exponential { lambda } => {
                (ln_gamma(r + one) - r * lambda.ln()).exp() * gamma_q(r + one, lambda * x)?
            }
            Family::Gamma { a, lambda } | Family::DoubleGamma { a, lambda } => {
                (ln_gamma(a + r) - ln_gamma(a) - r * lambda.ln()).exp() * gamma_q(a + r, lambda * x)?
            }
            Family::Weibull { kappa } => {
                let s = one + r / kappa;
                ln_gamma(s).exp() * gamma_q(s, x.powf(kappa))?
            }
            Family::Pareto { gamma } => gamma / (gamma - r) * x.max(one).powf(r - gamma),
            Family::Logistic => {
                // 2 ∫_x^∞ u^r e^{-u} / (1 + e^{-u})² du
                let opts = QuadOptions::relative(1e-12);
                let g = |u: S| {
                    let e = (-u).exp();
                    S::lit(2.0) * u.powf(r) * e / ((one + e) * (one + e))
                };
                integrate(g, x, S::infinity(), &opts)?
            }
            Family::ExponentialPower { c, theta, kappa } => {
                let d = S::from_usize_lossy(self.dimension);
                let s0 = (c + d) / kappa;
                let s = (r + c + d) / kappa;
                (ln_gamma(s) - ln_gamma(s0) - r / kappa * theta.ln()).exp() * gamma_q(s, theta * x.powf(kappa))?
            }
            Family::LogPolynomial { beta, c } => {
                let d = S::from_usize_lossy(self.dimension);
                let lead = ((c - d) / (c - r - d)).powf(beta + one);
                lead * gamma_q(beta + one, (c - r - d) * x.max(one).ln())?
            }
        })
    }

    /// `E|X|^r`.
    pub fn moment(&self, r: S) -> Result<S> {
        self.generalized_survival(r, S::zero())
    }

    /// Distribution function on the real line.
    pub fn cdf(&self, x: S) -> Result<S> {
        self.require_1d()?;
        let one = S::one();
        let half = S::lit(0.5);
        if x.is_nan() {
            return Err(QuantError::DomainError("cdf at NaN".into()));
        }
        Ok(match self.family {
            Family::Uniform { a, b } => ((x - a) / (b - a)).max(S::zero()).min(one),
            Family::Exponential { lambda } => {
                if x <= S::zero() {
                    S::zero()
                } else {
                    -(-lambda * x).exp_m1()
                }
            }
            Family::Gamma { a, lambda } => {
                if x <= S::zero() {
                    S::zero()
                } else {
                    gamma_pq(a, lambda * x)?.0
                }
            }
            Family::Weibull { kappa } => {
                if x <= S::zero() {
                    S::zero()
                } else {
                    -(-x.powf(kappa)).exp_m1()
                }
            }
            Family::Pareto { gamma } => {
                if x <= one {
                    S::zero()
                } else {
                    -(-gamma * x.ln()).exp_m1()
                }
            }
            Family::Logistic => one / (one + (-x).exp()),
            Family::DoubleGamma { a, lambda } => {
                let (p, q) = gamma_pq(a, lambda * x.abs())?;
                if x >= S::zero() {
                    half + half * p
                } else {
                    half * q
                }
            }
            Family::ExponentialPower { .. } | Family::LogPolynomial { .. } => {
                let tail = half * self.survival(x.abs())?;
                if x >= S::zero() {
                    one - tail
                } else {
                    tail
                }
            }
        })
    }

    /// Inverse distribution function on the real line, `p ∈ (0, 1)`.
    pub fn quantile(&self, p: S) -> Result<S> {
        self.require_1d()?;
        let one = S::one();
        if !(p > S::zero() && p < one) {
            return Err(QuantError::DomainError(format!("quantile level {p} outside (0, 1)")));
        }
        let q = one - p;
        Ok(match self.family {
            Family::Uniform { a, b } => a + p * (b - a),
            Family::Exponential { lambda } => -(-p).ln_1p() / lambda,
            Family::Weibull { kappa } => (-(-p).ln_1p()).powf(kappa.recip()),
            Family::Pareto { gamma } => (-(-p).ln_1p() / gamma).exp(),
            Family::Logistic => (p / q).ln(),
            Family::Gamma { .. } => {
                // P(|X| > x) = 1 - p on the positive half-line
                self.survival_inverse(q)?
            }
            Family::DoubleGamma { .. } | Family::ExponentialPower { .. } | Family::LogPolynomial { .. } => {
                let half = S::lit(0.5);
                if p >= half {
                    self.survival_inverse(S::lit(2.0) * q)?
                } else {
                    -self.survival_inverse(S::lit(2.0) * p)?
                }
            }
        })
    }

    /// The `x ≥ 0` with `F̄(x) = q`, for `q ∈ (0, 1]`.
    pub fn survival_inverse(&self, q: S) -> Result<S> {
        let one = S::one();
        if !(q > S::zero() && q <= one) {
            return Err(QuantError::DomainError(format!("survival level {q} outside (0, 1]")));
        }
        let d = S::from_usize_lossy(self.dimension);
        Ok(match self.family {
            Family::Exponential { lambda } => -q.ln() / lambda,
            Family::Weibull { kappa } => (-q.ln()).powf(kappa.recip()),
            Family::Pareto { gamma } => (-q.ln() / gamma).exp(),
            Family::Logistic => {
                // 2/(1+e^x) = q
                ((S::lit(2.0) - q) / q).ln()
            }
            Family::Gamma { a, lambda } | Family::DoubleGamma { a, lambda } => inverse_gamma_q(a, q)? / lambda,
            Family::ExponentialPower { c, theta, kappa } => {
                (inverse_gamma_q((c + d) / kappa, q)? / theta).powf(kappa.recip())
            }
            Family::LogPolynomial { beta, c } => (inverse_gamma_q(beta + one, q)? / (c - d)).exp(),
            Family::Uniform { .. } => {
                if q == one {
                    return Ok(S::zero());
                }
                let hi = self.support_radius();
                let opts = RootOptions::new(1e-15);
                bracketed_root(|x| self.survival(x).unwrap_or(S::zero()) - q, S::zero(), hi, &opts)?.x
            }
        })
    }

    pub(crate) fn require_1d(&self) -> Result<()> {
        if self.dimension == 1 {
            Ok(())
        } else {
            Err(QuantError::DimensionMismatch { expected: 1, got: self.dimension })
        }
    }
}

fn check_nonneg<S: Scalar>(x: S) -> Result<()> {
    if x >= S::zero() {
        Ok(())
    } else {
        Err(QuantError::DomainError(format!("survival argument must be nonnegative, got {x}")))
    }
}

fn gamma_density<S: Scalar>(a: S, lambda: S, u: S) -> S {
    if u == S::zero() {
        return if a == S::one() {
            lambda
        } else if a > S::one() {
            S::zero()
        } else {
            S::infinity()
        };
    }
    (a * lambda.ln() + (a - S::one()) * u.ln() - lambda * u - ln_gamma(a)).exp()
}

/// The `y ≥ 0` with `Q(s, y) = q`.
pub(crate) fn inverse_gamma_q<S: Scalar>(s: S, q: S) -> Result<S> {
    if q >= S::one() {
        return Ok(S::zero());
    }
    let target = q.ln();
    let f = |y: S| match gamma_q(s, y) {
        Ok(v) if v > S::zero() => v.ln() - target,
        _ => -S::infinity(),
    };
    let (lo, hi) = expand_upper(f, S::zero(), s.max(S::one()), 200)?;
    let opts = RootOptions { x_tol: S::tol(1e-15) * hi.max(S::one()), ..RootOptions::new(1e-15) };
    Ok(bracketed_root(f, lo, hi, &opts)?.x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_vec;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn pdf_examples() {
        let e = DistributionSpec::<f64>::exponential(1.0).unwrap();
        assert!(close(e.pdf(&[0.0]).unwrap(), 1.0, 1e-15));
        let n = DistributionSpec::<f64>::normal(1).unwrap();
        assert!(close(n.pdf(&[0.0]).unwrap(), 0.398_942_280_401_432_7, 1e-14));
        let p = DistributionSpec::<f64>::pareto(3.0).unwrap();
        assert!(close(p.pdf(&[2.0]).unwrap(), 0.1875, 1e-15));
        assert_eq!(n.pdf(&[0.0, 1.0]), Err(QuantError::DimensionMismatch { expected: 1, got: 2 }));
    }

    #[test]
    fn multivariate_normal_density() {
        let n3 = DistributionSpec::<f64>::normal(3).unwrap();
        let x = [0.3, -1.0, 0.5];
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let expect = (2.0 * std::f64::consts::PI).powf(-1.5) * (-r2 / 2.0).exp();
        assert!(close(n3.pdf(&x).unwrap(), expect, 1e-15));
    }

    #[test]
    fn survival_examples() {
        let e = DistributionSpec::<f64>::exponential(1.0).unwrap();
        assert!(close(e.survival(2.0).unwrap(), (-2.0f64).exp(), 1e-15));
        let p = DistributionSpec::<f64>::pareto(3.0).unwrap();
        assert!(close(p.survival(2.0).unwrap(), 0.125, 1e-15));
        let n2 = DistributionSpec::<f64>::normal(2).unwrap();
        assert!(close(n2.survival(1.0).unwrap(), (-0.5f64).exp(), 1e-14));
        assert!(e.survival(-1.0).is_err());
    }

    #[test]
    fn generalized_survival_examples() {
        let e = DistributionSpec::<f64>::exponential(1.0).unwrap();
        assert!(close(e.generalized_survival(1.0, 0.0).unwrap(), 1.0, 1e-14));
        assert!(close(e.generalized_survival(1.0, 1.0).unwrap(), 2.0 * (-1.0f64).exp(), 1e-14));
        let p = DistributionSpec::<f64>::pareto(3.0).unwrap();
        assert!(close(p.generalized_survival(1.0, 2.0).unwrap(), 0.375, 1e-15));
        assert_eq!(p.generalized_survival(3.0, 1.0), Err(QuantError::MomentUnavailable { r: 3.0 }));
    }

    fn all_specs() -> Vec<DistributionSpec<f64>> {
        vec![
            DistributionSpec::uniform(-0.5, 2.0).unwrap(),
            DistributionSpec::exponential(1.5).unwrap(),
            DistributionSpec::gamma(2.5, 0.7).unwrap(),
            DistributionSpec::double_gamma(0.6, 1.2).unwrap(),
            DistributionSpec::weibull(2.0).unwrap(),
            DistributionSpec::weibull(0.7).unwrap(),
            DistributionSpec::pareto(4.0).unwrap(),
            DistributionSpec::logistic(),
            DistributionSpec::normal(1).unwrap(),
            DistributionSpec::exponential_power(1.5, 2.0, 1.5, 1).unwrap(),
            DistributionSpec::log_polynomial(0.5, 5.0, 1).unwrap(),
            DistributionSpec::normal(3).unwrap(),
            DistributionSpec::exponential_power(-0.5, 1.0, 0.8, 2).unwrap(),
            DistributionSpec::log_polynomial(1.0, 7.0, 2).unwrap(),
        ]
    }

    /// Closed forms against direct radial quadrature of the density.
    #[test]
    fn closed_forms_match_radial_quadrature() {
        let opts = QuadOptions::relative(1e-12);
        let r = 1.7;
        for spec in all_specs() {
            let radial = |rho: f64| -> f64 {
                if spec.is_radial() {
                    let d = spec.dimension();
                    crate::special::unit_sphere_area::<f64>(d) * rho.powi(d as i32 - 1) * spec.radial_profile(rho)
                } else {
                    spec.pdf_1d(rho) + spec.pdf_1d(-rho)
                }
            };
            let lower = match spec.family() {
                Family::Pareto { .. } | Family::LogPolynomial { .. } => 1.0,
                _ => 0.0,
            };
            let upper = spec.support_radius();
            for &x in &[0.0, 0.4, 1.3, 2.6] {
                let from = if x > lower { x } else { lower };
                let v = integrate_vec(
                    |u| {
                        let w = radial(u);
                        [w, w * u.powf(r)]
                    },
                    from,
                    upper,
                    &opts,
                )
                .unwrap()
                .value;
                let sv = spec.survival(x).unwrap();
                let gv = spec.generalized_survival(r, x).unwrap();
                assert!((sv - v[0]).abs() < 1e-9, "{spec:?} survival at {x}: {sv} vs {}", v[0]);
                assert!((gv - v[1]).abs() < 1e-9 * v[1].max(1.0), "{spec:?} F_r at {x}: {gv} vs {}", v[1]);
            }
        }
    }

    #[test]
    fn densities_are_normalised() {
        let opts = QuadOptions::relative(1e-12);
        for spec in all_specs().into_iter().filter(|s| s.dimension() == 1) {
            let (lo, hi) = spec.support_1d();
            let mass = spec.expect_1d(lo, hi, &[], |_| [1.0], &opts).unwrap().value[0];
            assert!((mass - 1.0).abs() < 1e-10, "{spec:?}: {mass}");
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        for spec in all_specs().into_iter().filter(|s| s.dimension() == 1) {
            for &p in &[1e-6, 0.1, 0.5, 0.77, 0.999_999] {
                let x = spec.quantile(p).unwrap();
                let back = spec.cdf(x).unwrap();
                assert!((back - p).abs() < 1e-11, "{spec:?} p={p}: x={x}, cdf={back}");
            }
        }
    }

    #[test]
    fn survival_inverse_deep_tail() {
        for spec in all_specs().into_iter().filter(|s| s.support_radius().is_infinite()) {
            for &q in &[1.0, 0.5, 1e-3, 1e-12] {
                let x = spec.survival_inverse(q).unwrap();
                let back = spec.survival(x).unwrap();
                assert!((back / q - 1.0).abs() < 1e-9, "{spec:?} q={q}: x={x}, survival={back}");
            }
        }
    }

    #[test]
    fn single_precision_survival() {
        let e = DistributionSpec::<f32>::exponential(1.0).unwrap();
        assert!((e.survival(2.0).unwrap() - (-2.0f32).exp()).abs() < 1e-6);
        let n = DistributionSpec::<f32>::normal(2).unwrap();
        assert!((n.generalized_survival(2.0, 0.0).unwrap() - 2.0).abs() < 1e-5);
    }
}
