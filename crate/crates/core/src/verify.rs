//! The end-to-end acceptance suite, shared by the `acceptance` test target
//! and `qlab verify`. Reports carry no timings, so two runs with the same
//! configuration serialise to identical bytes.

use std::time::{Duration, Instant};

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::codebook::Codebook;
use crate::distributions::{derive_seed, polynomial_tail_exponents, tail_indices, DistributionSpec, TailKind};
use crate::error::{QuantError, Result};
use crate::optimizer::{
    distortion_mc, distortion_quadrature_1d, init_grid, lloyd_step_1d, solve_mc, solve_stationary_1d, InitStrategy,
    McOptions, SolveOptions,
};
use crate::quadrature::{integrate, QuadOptions};
use crate::radius::{emax_exact, fit_rate, radius_series, random_quantization_bound, RadiusEntry, RateModel};
use crate::roots::{bracketed_root, RootOptions};
use crate::scalar::CompensatedSum;
use crate::semiclosed::{
    exponential_grid, exponential_grid_from_weights, pareto_grid_from_weights, resolve_pareto_reading, WeightFamily,
    WeightSequence,
};
use crate::special::harmonic;

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub seed: u64,
    /// `J_{2,1}` in the Zador limit check.
    pub zador_j: f64,
    pub lloyd_starts: usize,
    pub weibull_level: usize,
    pub d2_levels: Vec<usize>,
    pub d2_samples_per_point: usize,
    pub d2_max_iterations: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            zador_j: 1.0 / 12.0,
            lloyd_starts: 100,
            weibull_level: 3000,
            d2_levels: vec![100, 200, 500],
            d2_samples_per_point: 400,
            d2_max_iterations: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub criterion_id: String,
    pub description: String,
    pub measured: Value,
    pub expected: Value,
    pub tolerance: Value,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub criteria: Vec<CriterionResult>,
    pub all_passed: bool,
}

impl VerifyReport {
    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

struct Outcome {
    measured: Value,
    expected: Value,
    tolerance: Value,
    pass: bool,
}

pub const CRITERIA: [(&str, &str); 11] = [
    ("1", "exponential semiclosed exactness"),
    ("2", "weight asymptotics"),
    ("3", "sharp exponential radius law"),
    ("4", "sharp Pareto log-radius law"),
    ("5", "exponential normalised radius ratio"),
    ("6", "Weibull ratio anchor at n = 3000"),
    ("7", "Gaussian stationary grids and Zador limit"),
    ("8", "tail indices, exact"),
    ("9", "random-quantization bound"),
    ("10", "property suites"),
    ("d2", "reduced d = 2 Gaussian bracket run"),
];

/// Runs one criterion; errors become a failing entry.
pub fn run_criterion(id: &str, cfg: &VerifyConfig) -> CriterionResult {
    let description = CRITERIA.iter().find(|c| c.0 == id).map(|c| c.1).unwrap_or("unknown").to_string();
    let out = match id {
        "1" => criterion_1(),
        "2" => criterion_2(),
        "3" => criterion_3(),
        "4" => criterion_4(),
        "5" => criterion_5(),
        "6" => criterion_6(cfg),
        "7" => criterion_7(cfg),
        "8" => criterion_8(),
        "9" => criterion_9(cfg),
        "10" => criterion_10(cfg),
        "d2" => criterion_d2(cfg),
        _ => Err(QuantError::InvalidParameter(format!("unknown criterion {id}"))),
    };
    match out {
        Ok(o) => CriterionResult {
            criterion_id: id.into(),
            description,
            measured: o.measured,
            expected: o.expected,
            tolerance: o.tolerance,
            pass: o.pass,
        },
        Err(e) => CriterionResult {
            criterion_id: id.into(),
            description,
            measured: json!({ "error": e.to_string() }),
            expected: Value::Null,
            tolerance: Value::Null,
            pass: false,
        },
    }
}

pub fn run_all(cfg: &VerifyConfig) -> VerifyReport {
    let ids: Vec<&str> = CRITERIA.iter().map(|c| c.0).collect();
    run_selected(cfg, &ids)
}

pub fn run_selected(cfg: &VerifyConfig, ids: &[&str]) -> VerifyReport {
    let criteria: Vec<_> = ids.iter().map(|id| run_criterion(id, cfg)).collect();
    let all_passed = criteria.iter().all(|c| c.pass);
    VerifyReport { criteria, all_passed }
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, Duration)> {
    let t = Instant::now();
    let v = f()?;
    Ok((v, t.elapsed()))
}

fn exp1() -> DistributionSpec<f64> {
    DistributionSpec::exponential(1.0).expect("valid")
}

fn exponential_series(n_max: usize) -> Result<Vec<RadiusEntry<f64>>> {
    let w = WeightSequence::compute(WeightFamily::Exponential, 2.0, n_max)?;
    let grids = (1..=n_max).map(|n| exponential_grid_from_weights(&w, 1.0, n)).collect::<Result<Vec<_>>>()?;
    Ok(radius_series(&exp1(), 2.0, &grids)?.entries)
}

fn criterion_1() -> Result<Outcome> {
    let ((one, two), elapsed) = timed(|| Ok((exponential_grid(2.0f64, 1.0, 1)?, exponential_grid(2.0f64, 1.0, 2)?)))?;
    // cell boundary m of the two-point grid: 2 − m = 2e^{−m}
    let m = bracketed_root(|m: f64| 2.0 - m - 2.0 * (-m).exp(), 1.0, 2.0, &RootOptions::new(1e-15))?.x;
    let dev1 = (one.flat()[0] - 1.0).abs();
    let dev2 = (two.flat()[0] - (m - 1.0)).abs().max((two.flat()[1] - (m + 1.0)).abs());
    let fast = elapsed < Duration::from_secs(1);
    Ok(Outcome {
        measured: json!({ "n1": one.flat(), "n2": two.flat(), "n1_dev": dev1, "n2_dev": dev2, "within_runtime": fast }),
        expected: json!({ "n1": [1.0], "n2": [m - 1.0, m + 1.0], "runtime_s": 1 }),
        tolerance: json!({ "n1": 1e-9, "n2": 1e-6 }),
        pass: dev1 <= 1e-9 && dev2 <= 1e-6 && fast,
    })
}

fn criterion_2() -> Result<Outcome> {
    let ((e, p), elapsed) = timed(|| {
        Ok((
            WeightSequence::<f64>::compute(WeightFamily::Exponential, 2.0, 1000)?,
            WeightSequence::<f64>::compute(WeightFamily::Pareto { gamma: 5.0 }, 2.0, 500)?,
        ))
    })?;
    let ke = 1000.0 * e.get(1000);
    let kp = 500.0 * p.get(500);
    let fast = elapsed < Duration::from_secs(10);
    Ok(Outcome {
        measured: json!({ "exponential_k1000": ke, "pareto5_k500": kp, "within_runtime": fast }),
        expected: json!({ "exponential_k1000": 3.0, "pareto5_k500": 1.0, "runtime_s": 10 }),
        tolerance: json!({ "exponential_k1000": 0.03, "pareto5_k500": 0.02 }),
        pass: (ke - 3.0).abs() < 0.03 && (kp - 1.0).abs() < 0.02 && fast,
    })
}

fn criterion_3() -> Result<Outcome> {
    let series = exponential_series(2000)?;
    let fit = fit_rate(&series, RateModel::RhoVsLogn, [100, 2000])?;
    let residual = |e: &RadiusEntry<f64>| e.rho - fit.slope * (e.n as f64).ln() - fit.intercept;
    let res_2000 = residual(&series[1999]).abs();
    let res_tail = series[499..].iter().map(|e| residual(e).abs()).fold(0.0, f64::max);
    let slope_ok = (fit.slope / 3.0 - 1.0).abs() < 0.02;
    let decay_ok = res_tail < 10.0 * res_2000;
    Ok(Outcome {
        measured: json!({ "slope": fit.slope, "intercept": fit.intercept, "max_residual_n_ge_500": res_tail, "residual_n2000": res_2000 }),
        expected: json!({ "slope": 3.0, "max_residual_n_ge_500": "< 10 * residual_n2000" }),
        tolerance: json!({ "slope_rel": 0.02 }),
        pass: slope_ok && decay_ok,
    })
}

fn criterion_4() -> Result<Outcome> {
    let mut measured = serde_json::Map::new();
    let mut pass = true;
    for gamma in [5.0f64, 4.0] {
        let r = 2.0;
        let reading = resolve_pareto_reading(r, gamma)?;
        let w = WeightSequence::compute(WeightFamily::Pareto { gamma }, r, 2000)?;
        let grids = (1..=2000).map(|n| pareto_grid_from_weights(&w, n, reading)).collect::<Result<Vec<_>>>()?;
        let spec = DistributionSpec::pareto(gamma)?;
        let series = radius_series(&spec, r, &grids)?;
        let fit = fit_rate(&series.entries, RateModel::LogrhoVsLogn, [100, 2000])?;
        let target = (r + 1.0) / (gamma - r);
        let ok = (fit.slope / target - 1.0).abs() < 0.03;
        pass &= ok;
        measured.insert(
            format!("gamma{gamma}"),
            json!({ "slope": fit.slope, "target": target, "reading": format!("{reading:?}"), "pass": ok }),
        );
    }
    Ok(Outcome {
        measured: Value::Object(measured),
        expected: json!({ "gamma5": 1.0, "gamma4": 1.5 }),
        tolerance: json!({ "slope_rel": 0.03 }),
        pass,
    })
}

fn criterion_5() -> Result<Outcome> {
    let series = exponential_series(2000)?;
    let ratios: Vec<f64> = series[49..].iter().map(|e| e.ratio.expect("n >= 2")).collect();
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(Outcome {
        measured: json!({ "min_ratio": lo, "max_ratio": hi, "ratio_n50": ratios[0], "ratio_n2000": ratios[ratios.len() - 1] }),
        expected: json!({ "interval": [0.9, 1.1] }),
        tolerance: Value::Null,
        pass: lo >= 0.9 && hi <= 1.1,
    })
}

fn criterion_6(cfg: &VerifyConfig) -> Result<Outcome> {
    let spec = DistributionSpec::weibull(2.0)?;
    let n = cfg.weibull_level;
    let (grid, elapsed) = timed(|| solve_stationary_1d(&spec, n, 2.0, None, &SolveOptions::default()))?;
    let series = radius_series(&spec, 2.0, std::slice::from_ref(&grid))?;
    let ratio = series.entries[0].ratio.ok_or(QuantError::InsufficientData { have: 1, need: 2 })?;
    let fast = elapsed < Duration::from_secs(600);
    Ok(Outcome {
        measured: json!({ "n": n, "rho": series.entries[0].rho, "ratio": ratio, "iterations": grid.meta.iterations, "within_runtime": fast }),
        expected: json!({ "interval": [0.90, 0.96], "runtime_s": 600 }),
        tolerance: Value::Null,
        pass: (0.90..=0.96).contains(&ratio) && fast,
    })
}

fn criterion_7(cfg: &VerifyConfig) -> Result<Outcome> {
    let spec = DistributionSpec::normal(1)?;
    let opts = SolveOptions::default();
    let two = solve_stationary_1d(&spec, 2, 2.0, None, &opts)?;
    let half_normal_mean = (2.0 / std::f64::consts::PI).sqrt();
    let point_dev = (two.flat()[0] + half_normal_mean).abs().max((two.flat()[1] - half_normal_mean).abs());
    let d2 = distortion_quadrature_1d(&spec, two.flat(), 2.0)?.value;
    let d2_target = 1.0 - 2.0 / std::f64::consts::PI;
    let g200 = solve_stationary_1d(&spec, 200, 2.0, None, &opts)?;
    let scaled = 200.0 * 200.0 * distortion_quadrature_1d(&spec, g200.flat(), 2.0)?.value;
    // Q_2 = J (∫ f^{1/3})^3
    let norm = integrate(|x: f64| spec.pdf(&[x]).unwrap_or(0.0).cbrt(), -60.0, 60.0, &QuadOptions::relative(1e-13))?;
    let zador = cfg.zador_j * norm.powi(3);
    let zador_rel = (scaled / zador - 1.0).abs();
    Ok(Outcome {
        measured: json!({ "n2_points": two.flat(), "n2_distortion": d2, "n200_scaled_distortion": scaled }),
        expected: json!({ "n2_points": [-half_normal_mean, half_normal_mean], "n2_distortion": d2_target, "zador_limit": zador, "zador_j": cfg.zador_j }),
        tolerance: json!({ "points": 1e-4, "distortion": 1e-6, "zador_rel": 0.02 }),
        pass: point_dev <= 1e-4 && (d2 - d2_target).abs() <= 1e-6 && zador_rel <= 0.02,
    })
}

type Q = Ratio<i64>;

fn q_to_f64(x: Q) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

fn criterion_8() -> Result<Outcome> {
    let mut checks = serde_json::Map::new();
    let mut pass = true;
    let mut check = |name: String, got: f64, want: f64| {
        let ok = got == want;
        checks.insert(name, json!({ "got": got, "want": want, "pass": ok }));
        ok
    };

    let normal = tail_indices(&DistributionSpec::<f64>::normal(1)?, 2.0)?;
    pass &= check("normal_theta_star".into(), normal.theta_star_upper.unwrap_or(f64::NAN), 0.5);
    pass &= check("normal_kappa".into(), normal.kappa.unwrap_or(f64::NAN), 2.0);

    for (r, gamma) in [(2i64, 5i64), (2, 4), (1, 3), (3, 7)] {
        let (rq, gq) = (Q::from_integer(r), Q::from_integer(gamma));
        // Pareto(γ) as a log-polynomial law with c = γ + 1, d = 1
        let exact = polynomial_tail_exponents(rq, Q::from_integer(1), gq + Q::from_integer(1));
        let want_nu = (gq - rq) / (gq + Q::from_integer(1));
        let want_rate = (rq + Q::from_integer(1)) / (gq - rq);
        pass &= exact.nu_star == want_nu && exact.log_rate == want_rate;
        let rep = tail_indices(&DistributionSpec::<f64>::pareto(gamma as f64)?, r as f64)?;
        pass &= check(format!("pareto_r{r}_g{gamma}_nu_star"), rep.nu_star, q_to_f64(want_nu));
        pass &= check(format!("pareto_r{r}_g{gamma}_log_rate"), rep.predicted_sharp_constant, q_to_f64(want_rate));
    }
    for (r, d, c) in [(2i64, 1usize, 6i64), (2, 2, 9), (1, 3, 8)] {
        let (rq, dq, cq) = (Q::from_integer(r), Q::from_integer(d as i64), Q::from_integer(c));
        let exact = polynomial_tail_exponents(rq, dq, cq);
        let want = dq * (Q::from_integer(1) - (rq + dq) / cq);
        pass &= exact.nu_star == want;
        let rep = tail_indices(&DistributionSpec::<f64>::log_polynomial(1.0, c as f64, d)?, r as f64)?;
        let poly = rep.kind == TailKind::PolynomialTail;
        pass &= poly;
        pass &= check(format!("logpoly_r{r}_d{d}_c{c}_nu_star"), rep.nu_star, q_to_f64(want));
    }
    Ok(Outcome {
        measured: Value::Object(checks),
        expected: json!("exact rational values"),
        tolerance: json!(0.0),
        pass,
    })
}

fn criterion_9(cfg: &VerifyConfig) -> Result<Outcome> {
    let exp = exp1();
    // harmonic numbers by plain reverse summation as the oracle
    let mut worst: f64 = 0.0;
    for m in [1u64, 2, 3, 10, 100, 1000, 9_999, 10_000, 10_001, 100_000, 1_000_000] {
        let mut s = CompensatedSum::new();
        for k in (1..=m).rev() {
            s.add(1.0 / k as f64);
        }
        worst = worst.max((emax_exact(&exp, m)? - s.value()).abs());
    }
    let exact_ok = worst <= 1e-12;

    let b = random_quantization_bound(&exp, 2.0, 0.9, 20, 10_000, derive_seed(cfg.seed, 9))?;
    let h = b.emax_exact_opt.ok_or(QuantError::UnsupportedFamily("exponential".into()))?;
    let mc_ok = (b.emax_estimate - h).abs() <= 4.0 * b.emax_stderr;

    // ρ_n ≥ H_m − C with m = [n^{2.9}], C fitted on n ∈ [10, 100]
    let series = exponential_series(2000)?;
    let gap = |e: &RadiusEntry<f64>| -> f64 {
        let m = (2.9 * (e.n as f64).ln()).exp().floor() as u64;
        harmonic::<f64>(m) - e.rho
    };
    let c = series[9..100].iter().map(gap).fold(f64::NEG_INFINITY, f64::max);
    let worst_gap = series[9..].iter().map(gap).fold(f64::NEG_INFINITY, f64::max);
    let ineq_ok = worst_gap <= c;
    Ok(Outcome {
        measured: json!({
            "harmonic_max_abs_error": worst,
            "mc_m": b.m, "mc_estimate": b.emax_estimate, "mc_stderr": b.emax_stderr,
            "fitted_c": c, "max_gap_n10_2000": worst_gap,
        }),
        expected: json!({ "mc_exact": h, "inequality": "H_m - rho_n <= C for all n in [10, 2000]" }),
        tolerance: json!({ "harmonic": 1e-12, "mc_stderrs": 4.0 }),
        pass: exact_ok && mc_ok && ineq_ok,
    })
}

fn property_families() -> Result<Vec<DistributionSpec<f64>>> {
    Ok(vec![
        DistributionSpec::uniform(0.0, 1.0)?,
        DistributionSpec::exponential(1.5)?,
        DistributionSpec::gamma(2.5, 1.0)?,
        DistributionSpec::double_gamma(0.7, 2.0)?,
        DistributionSpec::weibull(0.8)?,
        DistributionSpec::weibull(2.0)?,
        DistributionSpec::pareto(5.0)?,
        DistributionSpec::logistic(),
        DistributionSpec::normal(1)?,
        DistributionSpec::normal(3)?,
        DistributionSpec::exponential_power(1.0, 0.7, 1.5, 2)?,
        DistributionSpec::log_polynomial(0.5, 9.0, 2)?,
    ])
}

fn criterion_10(cfg: &VerifyConfig) -> Result<Outcome> {
    // F̄_r(x) ≥ x^r F̄(x)
    let mut survival_ok = true;
    let mut survival_checked = 0;
    for spec in property_families()? {
        for r in [1.0, 2.0] {
            for i in 0..50 {
                let x = 10f64.powf(-2.0 + 4.0 * i as f64 / 49.0);
                let lhs = spec.generalized_survival(r, x)?;
                let rhs = x.powf(r) * spec.survival(x)?;
                survival_ok &= lhs >= rhs * (1.0 - 1e-10);
                survival_checked += 1;
            }
        }
    }

    // Lloyd monotonicity from random starts
    let lloyd_specs = [
        (DistributionSpec::normal(1)?, 2.0),
        (DistributionSpec::exponential(1.0)?, 2.0),
        (DistributionSpec::weibull(1.5)?, 2.0),
        (DistributionSpec::gamma(2.0, 1.0)?, 3.0),
        (DistributionSpec::uniform(-1.0, 2.0)?, 2.0),
        (DistributionSpec::logistic(), 1.5),
        (DistributionSpec::double_gamma(1.5, 1.0)?, 2.0),
        (DistributionSpec::pareto(5.0)?, 2.0),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 10));
    let mut lloyd_worst = f64::NEG_INFINITY;
    for start in 0..cfg.lloyd_starts {
        let (spec, r) = &lloyd_specs[start % lloyd_specs.len()];
        let n = rng.random_range(2..=12);
        let mut pts = spec.sample(rng.random(), n);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let before = distortion_quadrature_1d(spec, &pts, *r)?.value;
        let next = lloyd_step_1d(spec, &pts, *r)?;
        let after = distortion_quadrature_1d(spec, &next, *r)?.value;
        lloyd_worst = lloyd_worst.max(after - before);
    }
    let lloyd_ok = lloyd_worst <= 1e-12;

    // support containment
    let mut grids: Vec<(DistributionSpec<f64>, Codebook<f64>)> = Vec::new();
    for n in [1, 2, 5, 50] {
        grids.push((exp1(), exponential_grid(2.0, 1.0, n)?));
        let w = WeightSequence::compute(WeightFamily::Pareto { gamma: 5.0 }, 2.0, n)?;
        let reading = resolve_pareto_reading(2.0, 5.0)?;
        grids.push((DistributionSpec::pareto(5.0)?, pareto_grid_from_weights(&w, n, reading)?));
    }
    for spec in
        [DistributionSpec::uniform(0.0, 1.0)?, DistributionSpec::pareto(5.0)?, DistributionSpec::gamma(0.5, 1.0)?]
    {
        for n in [1, 3, 10] {
            grids.push((spec.clone(), solve_stationary_1d(&spec, n, 2.0, None, &SolveOptions::default())?));
        }
    }
    let mc_opts = McOptions { samples: 20_000, seed: derive_seed(cfg.seed, 11), max_iterations: 50, tol: 1e-6 };
    let u1 = DistributionSpec::uniform(0.0, 1.0)?;
    grids.push((u1.clone(), solve_mc(&u1, 8, None, &mc_opts)?));
    let ep2 = DistributionSpec::exponential_power(0.0, 1.0, 1.0, 2)?;
    grids.push((ep2.clone(), solve_mc(&ep2, 16, None, &mc_opts)?));
    let hull_ok = grids.iter().all(|(s, g)| g.within_support_hull(s));

    // bit-determinism of seeded operations
    let deterministic = seeded_fingerprint(cfg.seed)? == seeded_fingerprint(cfg.seed)?;

    Ok(Outcome {
        measured: json!({
            "survival_checks": survival_checked, "survival_ok": survival_ok,
            "lloyd_starts": cfg.lloyd_starts, "lloyd_max_increase": lloyd_worst,
            "grids_checked": grids.len(), "support_ok": hull_ok,
            "deterministic": deterministic,
        }),
        expected: json!({ "survival_ok": true, "lloyd_max_increase": "<= 1e-12", "support_ok": true, "deterministic": true }),
        tolerance: json!({ "lloyd": 1e-12 }),
        pass: survival_ok && lloyd_ok && hull_ok && deterministic,
    })
}

/// Bit patterns of every seeded operation at `seed`.
fn seeded_fingerprint(seed: u64) -> Result<Vec<u64>> {
    let n2 = DistributionSpec::<f64>::normal(2)?;
    let lp = DistributionSpec::<f64>::log_polynomial(1.0, 7.0, 3)?;
    let e = exp1();
    let mut out: Vec<f64> = Vec::new();
    out.extend(n2.sample(seed, 40_000));
    out.extend(lp.sample(seed, 1000));
    out.extend(init_grid(&DistributionSpec::normal(3)?, 10, &InitStrategy::Hypersphere { radius: 2.0 }, seed)?);
    let opts = McOptions { samples: 5_000, seed, max_iterations: 20, tol: 1e-9 };
    out.extend(solve_mc(&n2, 12, None, &opts)?.flat());
    let d = distortion_mc(&n2, &[0.0, 0.0], 2.0, 10_000, seed)?;
    out.extend([d.value, d.std_error]);
    let b = random_quantization_bound(&e, 2.0, 0.5, 30, 1000, seed)?;
    out.extend([b.emax_estimate, b.emax_stderr]);
    Ok(out.into_iter().map(f64::to_bits).collect())
}

fn criterion_d2(cfg: &VerifyConfig) -> Result<Outcome> {
    let spec = DistributionSpec::normal(2)?;
    let mut ratios = Vec::new();
    for (i, &n) in cfg.d2_levels.iter().enumerate() {
        let opts = McOptions {
            samples: cfg.d2_samples_per_point * n,
            seed: derive_seed(cfg.seed, 100 + i as u64),
            max_iterations: cfg.d2_max_iterations,
            tol: 1e-4,
        };
        let grid = solve_mc(&spec, n, None, &opts)?;
        let series = radius_series(&spec, 2.0, std::slice::from_ref(&grid))?;
        ratios.push(series.entries[0].ratio.ok_or(QuantError::InsufficientData { have: 1, need: 2 })?);
    }
    let in_bracket = ratios.iter().all(|r| (0.75..=2.0).contains(r));
    let nondecreasing = ratios.windows(2).all(|w| w[1] >= w[0] - 0.02);
    let below_one = ratios.iter().any(|&r| r < 1.0);
    Ok(Outcome {
        measured: json!({ "levels": cfg.d2_levels, "ratios": ratios, "below_asymptotic_bracket": below_one }),
        expected: json!({ "interval": [0.75, 2.0], "nondecreasing_slack": 0.02 }),
        tolerance: Value::Null,
        pass: in_bracket && nondecreasing,
    })
}
