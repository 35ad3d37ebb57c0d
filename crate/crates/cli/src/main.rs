//! `qlab`: generate grids, measure distortion and radii, report tail indices
//! and run the verification suite.
//!
//! Exit codes: 0 success, 1 verification failure, 2 configuration error,
//! 3 numerical failure, 4 missing inputs.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qlab::optimizer::{
    distortion_mc, distortion_quadrature_1d, solve_mc, solve_stationary_1d, McOptions, SolveOptions,
};
use qlab::radius::{fit_rate, radius_series, random_quantization_bound, RateModel};
use qlab::semiclosed::{
    exponential_grid_from_weights, pareto_grid_from_weights, resolve_pareto_reading, WeightFamily, WeightSequence,
};
use qlab::verify::{run_all, run_selected, VerifyConfig, CRITERIA};
use qlab::{Codebook, Family, QuantError, SpecF64, TailKind};

#[derive(Parser)]
#[command(name = "qlab", version, about = "Optimal quantization grids and their maximal radii")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write one codebook file per level.
    Grid(GridArgs),
    /// Distortion of a codebook file.
    Distortion(DistortionArgs),
    /// Radius series and rate fit from previously written grids.
    Radius(RadiusArgs),
    /// Tail indices of a distribution.
    Tail(TailArgs),
    /// Random-quantization lower bound on the expected block maximum.
    Bound(BoundArgs),
    /// Run the acceptance suite and write verify_report.json.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct SpecArgs {
    /// Distribution as inline JSON or a path to a JSON file.
    #[arg(long)]
    spec: String,
    /// Order of the distortion.
    #[arg(long, default_value_t = 2.0)]
    r: f64,
}

#[derive(Args)]
struct OutArgs {
    /// Output directory (QLAB_OUT overrides).
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum GridMethod {
    Semiclosed,
    Lloyd1d,
    Lloydmc,
}

#[derive(Args)]
struct GridArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Levels, e.g. `1..100`, `2,5,10` or `10..2000:10`.
    #[arg(long)]
    levels: String,
    #[arg(long, value_enum)]
    method: GridMethod,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Monte-Carlo sample size; defaults to max(10^6, 1000 n).
    #[arg(long)]
    samples: Option<usize>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum DistortionMethod {
    Quadrature,
    Montecarlo,
}

#[derive(Args)]
struct DistortionArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Codebook file.
    #[arg(long)]
    grid: PathBuf,
    #[arg(long, value_enum, default_value = "quadrature")]
    method: DistortionMethod,
    #[arg(long, default_value_t = 1_000_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    RhoVsLogn,
    LogrhoVsLogn,
}

#[derive(Args)]
struct RadiusArgs {
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long)]
    levels: String,
    /// Regression window `lo..hi`; defaults to `100..n_max`.
    #[arg(long)]
    window: Option<String>,
    /// Defaults to the model matching the tail kind.
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct TailArgs {
    #[command(flatten)]
    spec: SpecArgs,
}

#[derive(Args)]
struct BoundArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Defaults to 0.9 ν*.
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    levels: String,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    seed: Option<u64>,
    /// Override of the uniform Zador coefficient J_{2,1}.
    #[arg(long)]
    zador_j: Option<f64>,
    /// Comma-separated criterion ids to run instead of the whole suite.
    #[arg(long)]
    only: Option<String>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Numerical(String),
    Missing(String),
    Verification,
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verification => 1,
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Missing(_) => 4,
        }
    }
}

impl From<QuantError> for Failure {
    fn from(e: QuantError) -> Self {
        match e {
            QuantError::InsufficientData { .. } => Failure::Missing(e.to_string()),
            e if e.is_numerical() => Failure::Numerical(e.to_string()),
            e => Failure::Config(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match cli.command {
        Command::Grid(a) => cmd_grid(a),
        Command::Distortion(a) => cmd_distortion(a),
        Command::Radius(a) => cmd_radius(a),
        Command::Tail(a) => cmd_tail(a),
        Command::Bound(a) => cmd_bound(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match out {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Config(m) => eprintln!("qlab: configuration error: {m}"),
                Failure::Numerical(m) => eprintln!("qlab: numerical failure: {m}"),
                Failure::Missing(m) => eprintln!("qlab: missing input: {m}"),
                Failure::Verification => eprintln!("qlab: verification failed"),
            }
            ExitCode::from(f.code())
        }
    }
}

fn load_spec(arg: &str) -> CliResult<SpecF64> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        fs::read_to_string(arg).map_err(|e| Failure::Config(format!("{arg}: {e}")))?
    };
    Ok(SpecF64::from_json_str(&text)?)
}

fn out_dir(args: &OutArgs) -> CliResult<PathBuf> {
    let dir = std::env::var_os("QLAB_OUT").map(PathBuf::from).unwrap_or_else(|| args.out_dir.clone());
    fs::create_dir_all(&dir).map_err(|e| Failure::Config(format!("{}: {e}", dir.display())))?;
    Ok(dir)
}

/// Parses `a..b`, `a..b:step` and comma-separated lists into sorted,
/// deduplicated levels.
fn parse_levels(s: &str) -> CliResult<Vec<usize>> {
    let bad = || Failure::Config(format!("bad level list {s:?}"));
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
    let mut out = Vec::new();
    for item in s.split(',').filter(|t| !t.trim().is_empty()) {
        if let Some((lo, rest)) = item.split_once("..") {
            let (hi, step) = match rest.split_once(':') {
                Some((hi, step)) => (num(hi)?, num(step)?),
                None => (num(rest)?, 1),
            };
            let lo = num(lo)?;
            if step == 0 || hi < lo {
                return Err(bad());
            }
            out.extend((lo..=hi).step_by(step));
        } else {
            out.push(num(item)?);
        }
    }
    out.sort_unstable();
    out.dedup();
    if out.is_empty() || out[0] == 0 {
        return Err(bad());
    }
    Ok(out)
}

fn grid_name(spec: &SpecF64, r: f64, n: usize) -> String {
    format!("grid_{}_r{r}_n{n}.cb", spec.family_name())
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn cmd_grid(a: GridArgs) -> CliResult<()> {
    let spec = load_spec(&a.spec.spec)?;
    let r = a.spec.r;
    let levels = parse_levels(&a.levels)?;
    let dir = out_dir(&a.out)?;
    spec.check_order(r)?;
    let n_max = *levels.last().expect("nonempty");
    let grids: Vec<Codebook<f64>> = match a.method {
        GridMethod::Semiclosed => match *spec.family() {
            Family::Exponential { lambda } => {
                let w = WeightSequence::compute(WeightFamily::Exponential, r, n_max)?;
                levels.iter().map(|&n| exponential_grid_from_weights(&w, lambda, n)).collect::<Result<_, _>>()?
            }
            Family::Pareto { gamma } => {
                let reading = resolve_pareto_reading(r, gamma)?;
                let w = WeightSequence::compute(WeightFamily::Pareto { gamma }, r, n_max)?;
                levels.iter().map(|&n| pareto_grid_from_weights(&w, n, reading)).collect::<Result<_, _>>()?
            }
            _ => {
                return Err(Failure::Config(format!(
                    "semiclosed grids exist only for exponential and pareto, not {}",
                    spec.family_name()
                )))
            }
        },
        GridMethod::Lloyd1d => {
            if spec.dimension() != 1 {
                return Err(Failure::Config("lloyd1d needs a one-dimensional spec".into()));
            }
            let opts = SolveOptions::default();
            levels.iter().map(|&n| solve_stationary_1d(&spec, n, r, None, &opts)).collect::<Result<_, _>>()?
        }
        GridMethod::Lloydmc => {
            if r != 2.0 {
                return Err(Failure::Config(format!("lloydmc supports r = 2 only, got {r}")));
            }
            let mut out = Vec::with_capacity(levels.len());
            for &n in &levels {
                let opts = McOptions {
                    samples: a.samples.unwrap_or(1_000_000.max(1000 * n)),
                    seed: a.seed,
                    ..McOptions::default()
                };
                out.push(solve_mc(&spec, n, None, &opts)?);
            }
            out
        }
    };
    for g in &grids {
        write_file(&dir.join(grid_name(&spec, r, g.level())), &g.to_text())?;
    }
    println!("wrote {} grid file(s) to {}", grids.len(), dir.display());
    Ok(())
}

fn cmd_distortion(a: DistortionArgs) -> CliResult<()> {
    let spec = load_spec(&a.spec.spec)?;
    if !a.grid.exists() {
        return Err(Failure::Missing(a.grid.display().to_string()));
    }
    let grid = Codebook::load(&a.grid)?;
    let report = match a.method {
        DistortionMethod::Quadrature => distortion_quadrature_1d(&spec, grid.flat(), a.spec.r)?,
        DistortionMethod::Montecarlo => distortion_mc(&spec, grid.flat(), a.spec.r, a.samples, a.seed)?,
    };
    println!("{}", serde_json::to_string_pretty(&report).expect("report serialises"));
    Ok(())
}

fn parse_window(s: &str) -> CliResult<[usize; 2]> {
    let bad = || Failure::Config(format!("bad window {s:?}"));
    let (lo, hi) = s.split_once("..").ok_or_else(bad)?;
    Ok([lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?])
}

fn cmd_radius(a: RadiusArgs) -> CliResult<()> {
    let spec = load_spec(&a.spec.spec)?;
    let r = a.spec.r;
    let levels = parse_levels(&a.levels)?;
    let dir = out_dir(&a.out)?;
    let mut grids = Vec::with_capacity(levels.len());
    for &n in &levels {
        let path = dir.join(grid_name(&spec, r, n));
        if !path.exists() {
            return Err(Failure::Missing(format!("grid file {}", path.display())));
        }
        grids.push(Codebook::load(&path)?);
    }
    let series = radius_series(&spec, r, &grids)?;
    let stem = format!("{}_r{r}", spec.family_name());
    series.save_csv(&dir.join(format!("radius_{stem}.csv")))?;

    let model = match a.model {
        Some(ModelArg::RhoVsLogn) => RateModel::RhoVsLogn,
        Some(ModelArg::LogrhoVsLogn) => RateModel::LogrhoVsLogn,
        None => match series.tail.kind {
            TailKind::ExponentialTail => RateModel::RhoVsLogn,
            TailKind::PolynomialTail => RateModel::LogrhoVsLogn,
        },
    };
    let n_max = *levels.last().expect("nonempty");
    let window = match &a.window {
        Some(w) => parse_window(w)?,
        None if n_max > 100 && levels[0] <= 100 => [100, n_max],
        None => [levels[0].max(2), n_max],
    };
    if window[1] <= window[0] {
        return Err(Failure::Missing(format!("only level {n_max} available, no regression window")));
    }
    let fit = fit_rate(&series.entries, model, window)?;
    let json = serde_json::to_string_pretty(&fit).expect("fit serialises");
    write_file(&dir.join(format!("ratefit_{stem}.json")), &json)?;
    println!("{json}");
    Ok(())
}

fn cmd_tail(a: TailArgs) -> CliResult<()> {
    let spec = load_spec(&a.spec.spec)?;
    let report = qlab::distributions::tail_indices(&spec, a.spec.r)?;
    println!("{}", serde_json::to_string_pretty(&report).expect("report serialises"));
    Ok(())
}

fn cmd_bound(a: BoundArgs) -> CliResult<()> {
    let spec = load_spec(&a.spec.spec)?;
    let r = a.spec.r;
    let nu = match a.nu {
        Some(nu) => nu,
        None => 0.9 * qlab::distributions::tail_indices(&spec, r)?.nu_star,
    };
    let mut rows = Vec::new();
    for n in parse_levels(&a.levels)? {
        let b = random_quantization_bound(&spec, r, nu, n, a.trials, a.seed)?;
        rows.push(serde_json::json!({ "n": n, "nu": nu, "bound": b }));
    }
    println!("{}", serde_json::to_string_pretty(&rows).expect("rows serialise"));
    Ok(())
}

fn cmd_verify(a: VerifyArgs) -> CliResult<()> {
    let dir = out_dir(&a.out)?;
    let mut cfg = VerifyConfig::default();
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    if let Some(j) = a.zador_j {
        cfg.zador_j = j;
    }
    let report = match &a.only {
        Some(list) => {
            let ids: Vec<&str> = list.split(',').map(str::trim).collect();
            if let Some(bad) = ids.iter().find(|id| !CRITERIA.iter().any(|c| c.0 == **id)) {
                return Err(Failure::Config(format!("unknown criterion {bad:?}")));
            }
            run_selected(&cfg, &ids)
        }
        None => run_all(&cfg),
    };
    write_file(&dir.join("verify_report.json"), &report.to_json_pretty())?;
    for c in &report.criteria {
        println!("{} {:>2} {}", if c.pass { "PASS" } else { "FAIL" }, c.criterion_id, c.description);
    }
    if report.all_passed {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_lists() {
        assert_eq!(parse_levels("1..5").unwrap(), vec![1, 2, 3, 4, 5]);
        assert_eq!(parse_levels("10..30:10,2").unwrap(), vec![2, 10, 20, 30]);
        assert_eq!(parse_levels("7").unwrap(), vec![7]);
        assert!(parse_levels("0..3").is_err());
        assert!(parse_levels("5..2").is_err());
        assert!(parse_levels("a").is_err());
    }

    #[test]
    fn windows() {
        assert_eq!(parse_window("100..2000").unwrap(), [100, 2000]);
        assert!(parse_window("100").is_err());
    }
}
