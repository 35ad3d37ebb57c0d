//! Distribution families with closed-form densities, survival functions,
//! generalized survival functions, samplers and tail indices.

mod density;
mod sampling;
pub mod tail;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{QuantError, Result};
use crate::quadrature::{integrate_vec_split, Integral, QuadOptions};
use crate::scalar::Scalar;
use crate::special::{ln_gamma, unit_sphere_area};

pub use sampling::derive_seed;
pub use tail::{
    exponential_tail_exponents, polynomial_tail_exponents, tail_indices, ExponentialTailExponents,
    PolynomialTailExponents, TailKind, TailReport,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family<S> {
    /// Uniform on `[a, b]`.
    Uniform { a: S, b: S },
    /// Rate `lambda`.
    Exponential { lambda: S },
    /// Shape `a`, rate `lambda`, on `[0, ∞)`.
    Gamma { a: S, lambda: S },
    /// Symmetrised gamma on `R`: `λ^a |x|^{a-1} e^{-λ|x|} / (2Γ(a))`.
    DoubleGamma { a: S, lambda: S },
    /// Unit-scale Weibull with shape `kappa`.
    Weibull { kappa: S },
    /// `γ x^{-(γ+1)}` on `(1, ∞)`.
    Pareto { gamma: S },
    /// Standard logistic.
    Logistic,
    /// Radial density `∝ |x|^c e^{-θ|x|^κ}` on `R^d`.
    ExponentialPower { c: S, theta: S, kappa: S },
    /// Radial density `∝ (log|x|)^β |x|^{-c}` on `{|x| > 1} ⊂ R^d`.
    LogPolynomial { beta: S, c: S },
}

/// A validated distribution together with its dimension and cached
/// normalising constant.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionSpec<S> {
    family: Family<S>,
    dimension: usize,
    /// Log of the density normalising constant for the radial families.
    log_norm: S,
}

impl<S: Scalar> DistributionSpec<S> {
    pub fn new(family: Family<S>, dimension: usize) -> Result<Self> {
        let bad = |msg: String| Err(QuantError::InvalidParameter(msg));
        if dimension == 0 {
            return bad("dimension must be positive".into());
        }
        let positive = |name: &str, v: S| -> Result<()> {
            if v > S::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(QuantError::InvalidParameter(format!("{name} must be positive and finite, got {v}")))
            }
        };
        let d = S::from_usize_lossy(dimension);
        let mut log_norm = S::zero();
        match family {
            Family::ExponentialPower { c, theta, kappa } => {
                positive("theta", theta)?;
                positive("kappa", kappa)?;
                if !(c > -d) || !c.is_finite() {
                    return bad(format!("exponential-power requires c > -d, got c={c}, d={dimension}"));
                }
                // ∫_0^∞ ρ^{c+d-1} e^{-θρ^κ} dρ = Γ((c+d)/κ) / (κ θ^{(c+d)/κ})
                let s = (c + d) / kappa;
                let radial = ln_gamma(s) - kappa.ln() - s * theta.ln();
                log_norm = -(unit_sphere_area::<S>(dimension).ln() + radial);
            }
            Family::LogPolynomial { beta, c } => {
                if !(c > d) || !c.is_finite() {
                    return bad(format!("log-polynomial requires c > d, got c={c}, d={dimension}"));
                }
                if !(beta > -S::one()) || !beta.is_finite() {
                    return bad(format!("log-polynomial requires beta > -1, got {beta}"));
                }
                // ∫_1^∞ (log ρ)^β ρ^{d-1-c} dρ = Γ(β+1) / (c-d)^{β+1}
                let radial = ln_gamma(beta + S::one()) - (beta + S::one()) * (c - d).ln();
                log_norm = -(unit_sphere_area::<S>(dimension).ln() + radial);
            }
            _ if dimension != 1 => {
                return bad(format!("{} is one-dimensional", family_tag(&family)));
            }
            Family::Uniform { a, b } => {
                if !(a < b) || !a.is_finite() || !b.is_finite() {
                    return bad(format!("uniform requires finite a < b, got [{a}, {b}]"));
                }
            }
            Family::Exponential { lambda } => positive("lambda", lambda)?,
            Family::Gamma { a, lambda } | Family::DoubleGamma { a, lambda } => {
                positive("a", a)?;
                positive("lambda", lambda)?;
            }
            Family::Weibull { kappa } => positive("kappa", kappa)?,
            Family::Pareto { gamma } => positive("gamma", gamma)?,
            Family::Logistic => {}
        }
        Ok(Self { family, dimension, log_norm })
    }

    pub fn uniform(a: S, b: S) -> Result<Self> {
        Self::new(Family::Uniform { a, b }, 1)
    }
    pub fn exponential(lambda: S) -> Result<Self> {
        Self::new(Family::Exponential { lambda }, 1)
    }
    pub fn gamma(a: S, lambda: S) -> Result<Self> {
        Self::new(Family::Gamma { a, lambda }, 1)
    }
    pub fn double_gamma(a: S, lambda: S) -> Result<Self> {
        Self::new(Family::DoubleGamma { a, lambda }, 1)
    }
    pub fn weibull(kappa: S) -> Result<Self> {
        Self::new(Family::Weibull { kappa }, 1)
    }
    pub fn pareto(gamma: S) -> Result<Self> {
        Self::new(Family::Pareto { gamma }, 1)
    }
    pub fn logistic() -> Self {
        Self::new(Family::Logistic, 1).expect("logistic has no parameters")
    }
    pub fn exponential_power(c: S, theta: S, kappa: S, dimension: usize) -> Result<Self> {
        Self::new(Family::ExponentialPower { c, theta, kappa }, dimension)
    }
    pub fn log_polynomial(beta: S, c: S, dimension: usize) -> Result<Self> {
        Self::new(Family::LogPolynomial { beta, c }, dimension)
    }
    /// Standard normal on `R^d`.
    pub fn normal(dimension: usize) -> Result<Self> {
        Self::exponential_power(S::zero(), S::lit(0.5), S::lit(2.0), dimension)
    }

    pub fn family(&self) -> &Family<S> {
        &self.family
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Short lowercase name, also used in file names.
    pub fn family_name(&self) -> &'static str {
        if self.is_normal() {
            "normal"
        } else {
            family_tag(&self.family)
        }
    }

    fn is_normal(&self) -> bool {
        matches!(self.family, Family::ExponentialPower { c, theta, kappa }
            if c == S::zero() && theta == S::lit(0.5) && kappa == S::lit(2.0))
    }

    pub fn is_radial(&self) -> bool {
        matches!(self.family, Family::ExponentialPower { .. } | Family::LogPolynomial { .. })
    }

    pub fn is_symmetric(&self) -> bool {
        match self.family {
            Family::Uniform { a, b } => a == -b,
            Family::DoubleGamma { .. }
            | Family::Logistic
            | Family::ExponentialPower { .. }
            | Family::LogPolynomial { .. } => true,
            _ => false,
        }
    }

    /// Closed convex hull of the support along the real line (`d = 1`).
    pub fn support_1d(&self) -> (S, S) {
        let inf = S::infinity();
        match self.family {
            Family::Uniform { a, b } => (a, b),
            Family::Exponential { .. } | Family::Gamma { .. } | Family::Weibull { .. } => (S::zero(), inf),
            Family::Pareto { .. } => (S::one(), inf),
            _ => (-inf, inf),
        }
    }

    /// `sup{|x| : x ∈ supp}`.
    pub fn support_radius(&self) -> S {
        match self.family {
            Family::Uniform { a, b } => a.abs().max(b.abs()),
            _ => S::infinity(),
        }
    }

    /// Points where the 1-D density is not smooth.
    pub(crate) fn breakpoints_1d(&self) -> Vec<S> {
        match self.family {
            Family::DoubleGamma { .. } | Family::ExponentialPower { .. } | Family::Logistic => vec![S::zero()],
            Family::LogPolynomial { .. } => vec![-S::one(), S::one()],
            _ => Vec::new(),
        }
    }

    /// Rejects orders `r` for which `E|X|^r` is infinite.
    pub fn check_order(&self, r: S) -> Result<()> {
        if !(r > S::zero()) || !r.is_finite() {
            return Err(QuantError::InvalidParameter(format!("order r must be positive, got {r}")));
        }
        let d = S::from_usize_lossy(self.dimension);
        let finite = match self.family {
            Family::Pareto { gamma } => gamma > r,
            Family::LogPolynomial { c, .. } => c > r + d,
            _ => true,
        };
        if finite {
            Ok(())
        } else {
            Err(QuantError::MomentUnavailable { r: r.as_f64() })
        }
    }

    /// `∫_lo^hi g(u) f(u) du` for a one-dimensional spec, restricted to the
    /// support and split at kinks of the density and at `extra` points.
    pub fn expect_1d<F, const K: usize>(
        &self,
        lo: S,
        hi: S,
        extra: &[S],
        g: F,
        opts: &QuadOptions<S>,
    ) -> Result<Integral<S, K>>
    where
        F: Fn(S) -> [S; K],
    {
        let (slo, shi) = self.support_1d();
        let a = lo.max(slo);
        let b = hi.min(shi);
        if !(a < b) {
            return Ok(Integral { value: [S::zero(); K], error: S::zero(), evaluations: 0 });
        }
        let mut cuts = self.breakpoints_1d();
        cuts.extend_from_slice(extra);
        cuts.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
        let f = |u: S| {
            let w = self.pdf_1d(u);
            let mut v = g(u);
            for x in v.iter_mut() {
                *x *= w;
            }
            v
        };
        integrate_vec_split(f, a, b, &cuts, opts)
    }

    /// The JSON object form, e.g. `{"family":"exponential","lambda":1.0,"dimension":1}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self.to_record()).expect("spec record serialises")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let rec: SpecRecord = serde_json::from_value(value.clone()).map_err(|e| QuantError::Parse(e.to_string()))?;
        Self::from_record(&rec)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| QuantError::Parse(e.to_string()))?;
        Self::from_json(&value)
    }

    /// `key → value` pairs (family name first), as written into codebook headers.
    pub fn to_params(&self) -> Vec<(String, String)> {
        let rec = self.to_record();
        let value = serde_json::to_value(&rec).expect("spec record serialises");
        let mut out = vec![("family".to_string(), rec.family.clone())];
        if let serde_json::Value::Object(map) = value {
            for key in PARAM_ORDER {
                if let Some(v) = map.get(*key) {
                    out.push((key.to_string(), v.to_string()));
                }
            }
        }
        out
    }

    pub fn from_params(params: &BTreeMap<String, String>) -> Result<Self> {
        let mut map = serde_json::Map::new();
        for (k, v) in params {
            if k == "family" {
                map.insert(k.clone(), serde_json::Value::String(v.clone()));
            } else if PARAM_ORDER.contains(&k.as_str()) {
                let parsed: serde_json::Value =
                    serde_json::from_str(v).map_err(|_| QuantError::Parse(format!("bad value for {k}: {v}")))?;
                map.insert(k.clone(), parsed);
            }
        }
        Self::from_json(&serde_json::Value::Object(map))
    }

    fn to_record(&self) -> SpecRecord {
        let f = |x: S| Some(x.as_f64());
        let mut rec = SpecRecord { family: self.family_name().to_string(), ..Default::default() };
        rec.dimension = Some(self.dimension);
        if self.is_normal() {
            return rec;
        }
        match self.family {
            Family::Uniform { a, b } => {
                rec.a = f(a);
                rec.b = f(b);
            }
            Family::Exponential { lambda } => rec.lambda = f(lambda),
            Family::Gamma { a, lambda } | Family::DoubleGamma { a, lambda } => {
                rec.a = f(a);
                rec.lambda = f(lambda);
            }
            Family::Weibull { kappa } => rec.kappa = f(kappa),
            Family::Pareto { gamma } => rec.gamma = f(gamma),
            Family::Logistic => {}
            Family::ExponentialPower { c, theta, kappa } => {
                rec.c = f(c);
                rec.theta = f(theta);
                rec.kappa = f(kappa);
            }
            Family::LogPolynomial { beta, c } => {
                rec.beta = f(beta);
                rec.c = f(c);
            }
        }
        rec
    }

    fn from_record(rec: &SpecRecord) -> Result<Self> {
        let need = |name: &str, v: Option<f64>| -> Result<S> {
            v.map(S::lit).ok_or_else(|| QuantError::Parse(format!("family {} needs field `{name}`", rec.family)))
        };
        let dim = rec.dimension.unwrap_or(1);
        let family = match rec.family.as_str() {
            "uniform" => Family::Uniform { a: need("a", rec.a)?, b: need("b", rec.b)? },
            "exponential" => Family::Exponential { lambda: need("lambda", rec.lambda)? },
            "gamma" => Family::Gamma { a: need("a", rec.a)?, lambda: need("lambda", rec.lambda)? },
            "double_gamma" => Family::DoubleGamma { a: need("a", rec.a)?, lambda: need("lambda", rec.lambda)? },
            "weibull" => Family::Weibull { kappa: need("kappa", rec.kappa)? },
            "pareto" => Family::Pareto { gamma: need("gamma", rec.gamma)? },
            "logistic" => Family::Logistic,
            "normal" => return Self::normal(dim),
            "exponential_power" => Family::ExponentialPower {
                c: need("c", rec.c)?,
                theta: need("theta", rec.theta)?,
                kappa: need("kappa", rec.kappa)?,
            },
            "log_polynomial" => Family::LogPolynomial { beta: need("beta", rec.beta)?, c: need("c", rec.c)? },
            other => return Err(QuantError::Parse(format!("unknown family `{other}`"))),
        };
        Self::new(family, dim)
    }
}

fn family_tag<S>(family: &Family<S>) -> &'static str {
    match family {
        Family::Uniform { .. } => "uniform",
        Family::Exponential { .. } => "exponential",
        Family::Gamma { .. } => "gamma",
        Family::DoubleGamma { .. } => "double_gamma",
        Family::Weibull { .. } => "weibull",
        Family::Pareto { .. } => "pareto",
        Family::Logistic => "logistic",
        Family::ExponentialPower { .. } => "exponential_power",
        Family::LogPolynomial { .. } => "log_polynomial",
    }
}

const PARAM_ORDER: &[&str] = &["lambda", "gamma", "kappa", "a", "b", "beta", "c", "theta", "dimension"];

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecRecord {
    family: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dimension: Option<usize>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructor_validation() {
        assert!(DistributionSpec::<f64>::exponential(0.0).is_err());
        assert!(DistributionSpec::<f64>::uniform(1.0, 1.0).is_err());
        assert!(DistributionSpec::<f64>::exponential_power(-2.0, 1.0, 1.0, 2).is_err());
        assert!(DistributionSpec::<f64>::exponential_power(-1.5, 1.0, 1.0, 2).is_ok());
        assert!(DistributionSpec::<f64>::log_polynomial(0.0, 2.0, 2).is_err());
        assert!(DistributionSpec::<f64>::log_polynomial(0.0, 2.5, 2).is_ok());
        assert!(DistributionSpec::<f64>::new(Family::Pareto { gamma: 2.0 }, 2).is_err());
    }

    #[test]
    fn order_checks() {
        let p = DistributionSpec::<f64>::pareto(3.0).unwrap();
        assert!(p.check_order(2.0).is_ok());
        assert_eq!(p.check_order(3.0), Err(QuantError::MomentUnavailable { r: 3.0 }));
        let lp = DistributionSpec::<f64>::log_polynomial(1.0, 5.0, 2).unwrap();
        assert!(lp.check_order(2.9).is_ok());
        assert!(lp.check_order(3.0).is_err());
    }

    #[test]
    fn json_round_trip_and_normal_alias() {
        let n = DistributionSpec::<f64>::normal(3).unwrap();
        let v = n.to_json();
        assert_eq!(v["family"], "normal");
        assert_eq!(DistributionSpec::from_json(&v).unwrap(), n);
        let parsed = DistributionSpec::<f64>::from_json_str(r#"{"family":"gamma","a":2.5,"lambda":0.5}"#).unwrap();
        assert_eq!(parsed, DistributionSpec::gamma(2.5, 0.5).unwrap());
        assert!(DistributionSpec::<f64>::from_json_str(r#"{"family":"pareto"}"#).is_err());
        assert!(DistributionSpec::<f64>::from_json_str(r#"{"family":"pareto","gamma":3,"zeta":1}"#).is_err());
    }

    #[test]
    fn params_round_trip() {
        let s = DistributionSpec::<f64>::log_polynomial(0.5, 4.25, 2).unwrap();
        let map: BTreeMap<String, String> = s.to_params().into_iter().collect();
        assert_eq!(DistributionSpec::from_params(&map).unwrap(), s);
    }
}
