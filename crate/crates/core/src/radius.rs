//! Maximal radii of grids, their normalised growth, rate regressions and the
//! random-quantization lower bound.

use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::codebook::Codebook;
use crate::distributions::{derive_seed, tail_indices, DistributionSpec, Family, TailKind, TailReport};
use crate::error::{QuantError, Result};
use crate::scalar::{CompensatedSum, Scalar};
use crate::special::{harmonic, ln_gamma, ln_gamma_ratio};

/// `max |a|` over the points of `codebook`.
pub fn max_radius<S: Scalar>(codebook: &Codebook<S>) -> Result<S> {
    if codebook.level() == 0 {
        return Err(QuantError::EmptyCodebook);
    }
    Ok(codebook
        .flat()
        .chunks(codebook.dimension())
        .map(|p| p.iter().map(|&x| x * x).sum::<S>().sqrt())
        .fold(S::zero(), S::max))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadiusEntry<S> {
    pub n: usize,
    pub rho: S,
    /// Undefined at `n = 1`.
    pub ratio: Option<S>,
    pub lower_pred: Option<S>,
    pub upper_pred: Option<S>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadiusSeries<S> {
    pub spec: DistributionSpec<S>,
    pub r: S,
    pub tail: TailReport<S>,
    pub entries: Vec<RadiusEntry<S>>,
}

/// Predicted bracket for `ρ_n`: `[c_low, c_up]·(log n)^{1/κ}`, or
/// `n^{L_low}`, `n^{L_up}` for polynomial tails (additive constants dropped).
fn bracket<S: Scalar>(tail: &TailReport<S>, n: usize) -> (S, S) {
    let ln_n = S::from_usize_lossy(n).ln();
    match tail.kind {
        TailKind::ExponentialTail => {
            let g = ln_n.powf(tail.kappa.unwrap_or(S::one()).recip());
            (tail.lower_constant * g, tail.upper_constant * g)
        }
        TailKind::PolynomialTail => ((tail.lower_constant * ln_n).exp(), (tail.upper_constant * ln_n).exp()),
    }
}

pub fn radius_series<S: Scalar>(spec: &DistributionSpec<S>, r: S, grids: &[Codebook<S>]) -> Result<RadiusSeries<S>> {
    let tail = tail_indices(spec, r)?;
    let mut entries = Vec::with_capacity(grids.len());
    for g in grids {
        let same_spec = g.meta.spec.as_ref().is_none_or(|s| s == spec);
        if !same_spec || g.meta.r != r || g.dimension() != spec.dimension() {
            return Err(QuantError::MixedSpecs);
        }
        let n = g.level();
        let rho = max_radius(g)?;
        let (ratio, lower, upper) = if n >= 2 {
            let (lo, up) = bracket(&tail, n);
            (Some(tail.ratio(rho, n)), Some(lo), Some(up))
        } else {
            (None, None, None)
        };
        entries.push(RadiusEntry { n, rho, ratio, lower_pred: lower, upper_pred: upper });
    }
    entries.sort_by_key(|e| e.n);
    if entries.windows(2).any(|w| w[0].n == w[1].n) {
        return Err(QuantError::InvalidParameter("duplicate grid level".into()));
    }
    Ok(RadiusSeries { spec: spec.clone(), r, tail, entries })
}

const CSV_HEADER: [&str; 5] = ["n", "rho", "ratio", "lower_pred", "upper_pred"];

fn opt_field<S: Scalar>(x: Option<S>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn parse_field<S: Scalar>(s: &str) -> Result<Option<S>> {
    if s.is_empty() {
        return Ok(None);
    }
    S::from_str(s).map(Some).map_err(|_| QuantError::Parse(format!("bad number {s:?}")))
}

impl<S: Scalar> RadiusSeries<S> {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let io = |e: csv::Error| QuantError::Parse(e.to_string());
        let mut out = csv::Writer::from_writer(w);
        out.write_record(CSV_HEADER).map_err(io)?;
        for e in &self.entries {
            out.write_record([
                e.n.to_string(),
                e.rho.to_string(),
                opt_field(e.ratio),
                opt_field(e.lower_pred),
                opt_field(e.upper_pred),
            ])
            .map_err(io)?;
        }
        out.flush().map_err(|e| QuantError::Parse(e.to_string()))
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| QuantError::Parse(format!("{}: {e}", path.display())))?;
        self.write_csv(std::io::BufWriter::new(f))
    }
}

/// Reads the rows written by [`RadiusSeries::write_csv`].
pub fn read_radius_csv<S: Scalar, R: Read>(r: R) -> Result<Vec<RadiusEntry<S>>> {
    let mut rdr = csv::Reader::from_reader(r);
    let header = rdr.headers().map_err(|e| QuantError::Parse(e.to_string()))?;
    if header.iter().ne(CSV_HEADER) {
        return Err(QuantError::Parse(format!("unexpected header {header:?}")));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| QuantError::Parse(e.to_string()))?;
        let n = usize::from_str(&rec[0]).map_err(|_| QuantError::Parse(format!("bad level {:?}", &rec[0])))?;
        let rho = parse_field(&rec[1])?.ok_or_else(|| QuantError::Parse("missing rho".into()))?;
        out.push(RadiusEntry {
            n,
            rho,
            ratio: parse_field(&rec[2])?,
            lower_pred: parse_field(&rec[3])?,
            upper_pred: parse_field(&rec[4])?,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateModel {
    RhoVsLogn,
    LogrhoVsLogn,
}

impl FromStr for RateModel {
    type Err = QuantError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rho_vs_logn" => Ok(RateModel::RhoVsLogn),
            "logrho_vs_logn" => Ok(RateModel::LogrhoVsLogn),
            _ => Err(QuantError::Parse(format!("unknown model {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit<S> {
    pub model: RateModel,
    pub slope: S,
    pub intercept: S,
    pub slope_stderr: S,
    pub window: [usize; 2],
}

/// Ordinary least squares of `ρ_n` (or `log ρ_n`) on `log n` over the
/// entries with `n` in `window`.
pub fn fit_rate<S: Scalar>(series: &[RadiusEntry<S>], model: RateModel, window: [usize; 2]) -> Result<RateFit<S>> {
    let [lo, hi] = window;
    if !(lo >= 2 && hi > lo) {
        return Err(QuantError::InvalidParameter(format!("window [{lo}, {hi}] needs n_max > n_min >= 2")));
    }
    let (xs, ys): (Vec<S>, Vec<S>) = series
        .iter()
        .filter(|e| e.n >= lo && e.n <= hi)
        .map(|e| {
            let y = match model {
                RateModel::RhoVsLogn => e.rho,
                RateModel::LogrhoVsLogn => e.rho.ln(),
            };
            (S::from_usize_lossy(e.n).ln(), y)
        })
        .unzip();
    let (slope, intercept, slope_stderr) = least_squares(&xs, &ys)?;
    Ok(RateFit { model, slope, intercept, slope_stderr, window })
}

/// `(slope, intercept, slope standard error)` of `y ≈ slope·x + intercept`.
pub fn least_squares<S: Scalar>(xs: &[S], ys: &[S]) -> Result<(S, S, S)> {
    const NEED: usize = 10;
    if xs.len() < NEED {
        return Err(QuantError::InsufficientData { have: xs.len(), need: NEED });
    }
    let k = S::from_usize_lossy(xs.len());
    let mean = |v: &[S]| {
        let mut s = CompensatedSum::new();
        v.iter().for_each(|&x| s.add(x));
        s.value() / k
    };
    let (mx, my) = (mean(xs), mean(ys));
    let (mut sxx, mut sxy) = (CompensatedSum::new(), CompensatedSum::new());
    for (&x, &y) in xs.iter().zip(ys) {
        sxx.add((x - mx) * (x - mx));
        sxy.add((x - mx) * (y - my));
    }
    let sxx = sxx.value();
    if !(sxx > S::zero()) {
        return Err(QuantError::InsufficientData { have: 1, need: 2 });
    }
    let slope = sxy.value() / sxx;
    let intercept = my - slope * mx;
    let mut sse = CompensatedSum::new();
    for (&x, &y) in xs.iter().zip(ys) {
        let e = y - slope * x - intercept;
        sse.add(e * e);
    }
    let stderr = (sse.value() / (k - S::lit(2.0)) / sxx).sqrt();
    Ok((slope, intercept, stderr))
}

/// `E max_{k ≤ m} |X_k|` in closed form.
pub fn emax_exact<S: Scalar>(spec: &DistributionSpec<S>, m: u64) -> Result<S> {
    if m == 0 {
        return Err(QuantError::InvalidParameter("block size must be positive".into()));
    }
    let one = S::one();
    match *spec.family() {
        Family::Exponential { lambda } => Ok(harmonic::<S>(m) / lambda),
        Family::Pareto { gamma } => {
            if !(gamma > one) {
                return Err(QuantError::MomentUnavailable { r: 1.0 });
            }
            // m B(1 − 1/γ, m) = Γ(1 − 1/γ) Γ(m+1) / Γ(m+1−1/γ)
            let g = gamma.recip();
            let mp1 = S::from_u64(m).expect("u64 representable") + one;
            Ok((ln_gamma(one - g) + ln_gamma_ratio(mp1, mp1 - g)).exp())
        }
        _ => Err(QuantError::UnsupportedFamily(spec.family_name().into())),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RandomQuantizationBound<S> {
    /// `[n^{(r+ν)/d}]`, exact up to the precision of `S`.
    pub m: S,
    pub emax_estimate: S,
    pub emax_stderr: S,
    pub emax_exact_opt: Option<S>,
}

/// Monte-Carlo estimate of `E max_{k ≤ m} |X_k|`, `m = [n^{(r+ν)/d}]`, over
/// `trials` independent blocks. Each block maximum is drawn directly from
/// `P(max ≤ x) = F(x)^m`.
pub fn random_quantization_bound<S: Scalar>(
    spec: &DistributionSpec<S>,
    r: S,
    nu: S,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<RandomQuantizationBound<S>> {
    let tail = tail_indices(spec, r)?;
    if !(nu > S::zero() && nu < tail.nu_star) {
        return Err(QuantError::NuOutOfRange { nu: nu.as_f64(), nu_star: tail.nu_star.as_f64() });
    }
    if n == 0 || trials < 2 {
        return Err(QuantError::InvalidParameter("need n >= 1 and at least two trials".into()));
    }
    let exponent = (r + nu) / S::from_usize_lossy(spec.dimension());
    let log_m = exponent * S::from_usize_lossy(n).ln();
    if log_m > S::lit(700.0) || !log_m.exp().is_finite() {
        return Err(QuantError::Overflow);
    }
    let m = log_m.exp().floor().max(S::one());
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0));
    let mut sum = CompensatedSum::new();
    let mut sq = CompensatedSum::new();
    for _ in 0..trials {
        let u: f64 = rng.sample(Open01);
        let q = -(S::lit(u).ln() / m).exp_m1();
        let x = spec.survival_inverse(q.max(S::min_positive_value()))?;
        sum.add(x);
        sq.add(x * x);
    }
    let t = S::from_usize_lossy(trials);
    let mean = sum.value() / t;
    let var = ((sq.value() - t * mean * mean) / (t - S::one())).max(S::zero());
    let exact = match m.to_u64() {
        Some(mi) if S::from_u64(mi) == Some(m) => emax_exact(spec, mi).ok(),
        _ => None,
    };
    Ok(RandomQuantizationBound { m, emax_estimate: mean, emax_stderr: (var / t).sqrt(), emax_exact_opt: exact })
}

/// `Q_s(U[a, b]) = J_{s,1} (b − a)^s` with `J_{s,1} = 2^{-s}/(s+1)`: the
/// one-dimensional Zador constant of a uniform law. Diagnostic only.
pub fn uniform_zador_constant_1d<S: Scalar>(s: S, a: S, b: S) -> S {
    let j = S::lit(2.0).powf(-s) / (s + S::one());
    j * (b - a).powf(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::CodebookMeta;
    use crate::semiclosed::{exponential_grid_from_weights, WeightFamily, WeightSequence};

    fn cb(d: usize, pts: Vec<f64>) -> Codebook<f64> {
        Codebook::from_flat(d, pts, CodebookMeta::explicit(2.0)).unwrap()
    }

    #[test]
    fn max_radius_examples() {
        assert_eq!(max_radius(&cb(1, vec![-1.2, 0.5, 3.0])).unwrap(), 3.0);
        assert_eq!(max_radius(&cb(2, vec![3.0, 4.0])).unwrap(), 5.0);
        assert_eq!(max_radius(&cb(1, vec![0.0])).unwrap(), 0.0);
    }

    fn exp_series(n_max: usize) -> RadiusSeries<f64> {
        let w = WeightSequence::compute(WeightFamily::Exponential, 2.0, n_max).unwrap();
        let grids: Vec<_> = (1..=n_max).map(|n| exponential_grid_from_weights(&w, 1.0, n).unwrap()).collect();
        radius_series(&DistributionSpec::exponential(1.0).unwrap(), 2.0, &grids).unwrap()
    }

    #[test]
    fn exponential_series_ratio_and_csv() {
        let s = exp_series(50);
        assert_eq!(s.entries[0].ratio, None);
        for e in &s.entries[1..] {
            assert!((e.ratio.unwrap() - e.rho / (3.0 * (e.n as f64).ln())).abs() < 1e-14);
        }
        assert!(s.entries.windows(2).all(|w| w[1].rho > w[0].rho));
        let text = s.to_csv();
        assert!(text.starts_with("n,rho,ratio,lower_pred,upper_pred\n"));
        let back: Vec<RadiusEntry<f64>> = read_radius_csv(text.as_bytes()).unwrap();
        assert_eq!(back, s.entries);
    }

    #[test]
    fn mixed_specs_rejected() {
        let e = DistributionSpec::<f64>::exponential(1.0).unwrap();
        let w = WeightSequence::compute(WeightFamily::Exponential, 2.0, 3).unwrap();
        let g = exponential_grid_from_weights(&w, 1.0, 3).unwrap();
        let other = crate::semiclosed::exponential_grid(2.0, 2.0, 2).unwrap();
        assert_eq!(radius_series(&e, 2.0, &[g.clone(), other]), Err(QuantError::MixedSpecs));
        assert_eq!(radius_series(&e, 3.0, &[g]), Err(QuantError::MixedSpecs));
    }

    #[test]
    fn fit_examples() {
        let flat: Vec<_> =
            (2..40).map(|n| RadiusEntry { n, rho: 4.0f64, ratio: None, lower_pred: None, upper_pred: None }).collect();
        let f = fit_rate(&flat, RateModel::RhoVsLogn, [2, 100]).unwrap();
        assert!(f.slope.abs() < 1e-14 && (f.intercept - 4.0).abs() < 1e-13);
        assert!(matches!(fit_rate(&flat, RateModel::RhoVsLogn, [2, 8]), Err(QuantError::InsufficientData { .. })));
        let s = exp_series(2000);
        let f = fit_rate(&s.entries, RateModel::RhoVsLogn, [100, 2000]).unwrap();
        assert!((f.slope / 3.0 - 1.0).abs() < 0.02, "slope {}", f.slope);
        let json = serde_json::to_string(&f).unwrap();
        assert!(json.contains("\"model\":\"rho_vs_logn\""));
        assert_eq!(serde_json::from_str::<RateFit<f64>>(&json).unwrap(), f);
    }

    #[test]
    fn emax_examples() {
        let e = DistributionSpec::<f64>::exponential(1.0).unwrap();
        assert!((emax_exact(&e, 3).unwrap() - 11.0 / 6.0).abs() < 1e-14);
        let p = DistributionSpec::<f64>::pareto(2.0).unwrap();
        assert!((emax_exact(&p, 1).unwrap() - 2.0).abs() < 1e-13);
        assert!((emax_exact(&p, 4).unwrap() - 384.0 / 105.0).abs() < 1e-12);
        let p5 = DistributionSpec::<f64>::pareto(5.0).unwrap();
        let big = emax_exact(&p5, 1_000_000).unwrap();
        let asym = ln_gamma(0.8f64).exp() * 1e6f64.powf(0.2);
        assert!((big / asym - 1.0).abs() < 0.01);
        assert!(matches!(
            emax_exact(&DistributionSpec::<f64>::normal(1).unwrap(), 3),
            Err(QuantError::UnsupportedFamily(_))
        ));
    }

    #[test]
    fn bound_examples() {
        let e = DistributionSpec::<f64>::exponential(1.0).unwrap();
        let b = random_quantization_bound(&e, 2.0, 0.9, 20, 10_000, 5).unwrap();
        assert_eq!(b.m, 20f64.powf(2.9).floor());
        let exact = b.emax_exact_opt.unwrap();
        assert!((b.emax_estimate - exact).abs() < 4.0 * b.emax_stderr);
        assert!(b.emax_estimate >= 2.9 * 20f64.ln() - 1.0);
        // m = 1: plain E|X|
        let b1 = random_quantization_bound(&e, 2.0, 0.9, 1, 10_000, 5).unwrap();
        assert_eq!(b1.m, 1.0);
        assert!((b1.emax_estimate - 1.0).abs() < 4.0 * b1.emax_stderr);
        assert!(matches!(random_quantization_bound(&e, 2.0, 1.0, 20, 100, 5), Err(QuantError::NuOutOfRange { .. })));
        assert_eq!(random_quantization_bound(&e, 20.0, 0.9, usize::MAX, 100, 5), Err(QuantError::Overflow));
        assert_eq!(b, random_quantization_bound(&e, 2.0, 0.9, 20, 10_000, 5).unwrap());
    }

    #[test]
    fn uniform_constant() {
        assert!((uniform_zador_constant_1d(2.0f64, 0.0, 1.0) - 1.0 / 12.0).abs() < 1e-15);
    }
}
