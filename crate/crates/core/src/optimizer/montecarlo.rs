//! Seeded Monte-Carlo Lloyd iteration (`r = 2`) and distortion estimates.

use crate::codebook::{Codebook, CodebookMeta, Method};
use crate::distributions::DistributionSpec;
use crate::error::{QuantError, Result};
use crate::scalar::{CompensatedSum, Scalar};

use super::init::{init_grid, InitStrategy};
use super::kdtree::KdTree;
use super::{DistortionMethod, DistortionReport};

#[derive(Debug, Clone, PartialEq)]
pub struct McStep<S> {
    pub points: Vec<S>,
    /// Cells that received no sample and kept their point.
    pub empty_cells: Vec<usize>,
}

fn check_points<S: Scalar>(spec: &DistributionSpec<S>, points: &[S]) -> Result<usize> {
    let d = spec.dimension();
    if points.is_empty() {
        return Err(QuantError::EmptyCodebook);
    }
    if !points.len().is_multiple_of(d) {
        return Err(QuantError::DimensionMismatch { expected: d, got: points.len() % d });
    }
    Ok(points.len() / d)
}

/// Replaces each point by the mean of the samples nearest to it.
fn centroid_step<S: Scalar>(samples: &[S], d: usize, points: &[S]) -> (McStep<S>, S) {
    let n = points.len() / d;
    let tree = KdTree::new(points, d);
    let mut sums: Vec<CompensatedSum<S>> = vec![CompensatedSum::new(); n * d];
    let mut counts = vec![0usize; n];
    for q in samples.chunks(d) {
        let (i, _) = tree.nearest(q);
        counts[i] += 1;
        for k in 0..d {
            sums[i * d + k].add(q[k]);
        }
    }
    let mut next = points.to_vec();
    let mut empty = Vec::new();
    let mut movement = S::zero();
    for i in 0..n {
        if counts[i] == 0 {
            empty.push(i);
            continue;
        }
        let c = S::from_usize_lossy(counts[i]);
        for k in 0..d {
            let v = sums[i * d + k].value() / c;
            movement = movement.max((v - points[i * d + k]).abs());
            next[i * d + k] = v;
        }
    }
    (McStep { points: next, empty_cells: empty }, movement)
}

/// One Lloyd step against `samples` fresh draws from `spec`.
pub fn lloyd_step_mc<S: Scalar>(
    spec: &DistributionSpec<S>,
    points: &[S],
    samples: usize,
    seed: u64,
) -> Result<McStep<S>> {
    let n = check_points(spec, points)?;
    if samples < 10 * n {
        return Err(QuantError::InvalidParameter(format!("need at least {} samples for {n} points", 10 * n)));
    }
    let xs = spec.sample(seed, samples);
    Ok(centroid_step(&xs, spec.dimension(), points).0)
}

#[derive(Debug, Clone, Copy)]
pub struct McOptions<S> {
    pub samples: usize,
    pub seed: u64,
    pub max_iterations: usize,
    /// Stop once no coordinate moves by more than this.
    pub tol: S,
}

impl<S: Scalar> Default for McOptions<S> {
    fn default() -> Self {
        Self { samples: 1_000_000, seed: 0, max_iterations: 500, tol: S::tol(1e-6) }
    }
}

/// Lloyd iteration on one fixed sample set of `opts.samples` draws, i.e.
/// k-means on the empirical measure. Starts from the companding grid unless
/// `init` is given.
pub fn solve_mc<S: Scalar>(
    spec: &DistributionSpec<S>,
    n: usize,
    init: Option<&[S]>,
    opts: &McOptions<S>,
) -> Result<Codebook<S>> {
    let d = spec.dimension();
    let two = S::lit(2.0);
    let mut points = match init {
        Some(p) => p.to_vec(),
        None => init_grid(spec, n, &InitStrategy::Companding { r: two }, opts.seed)?,
    };
    if check_points(spec, &points)? != n {
        return Err(QuantError::InvalidParameter(format!("init has {} points, level is {n}", points.len() / d)));
    }
    if opts.samples < 10 * n {
        return Err(QuantError::InvalidParameter(format!("need at least {} samples for {n} points", 10 * n)));
    }
    let xs = spec.sample(opts.seed, opts.samples);
    let mut iterations = 0;
    for _ in 0..opts.max_iterations {
        let (step, movement) = centroid_step(&xs, d, &points);
        points = step.points;
        iterations += 1;
        if movement < opts.tol {
            break;
        }
    }
    if d == 1 {
        points.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    }
    let meta =
        CodebookMeta { method: Method::Lloydmc, r: two, seed: Some(opts.seed), iterations, spec: Some(spec.clone()) };
    Codebook::from_flat(d, points, meta)
}

/// Monte-Carlo estimate of `E min_i |X - x_i|^r`.
pub fn distortion_mc<S: Scalar>(
    spec: &DistributionSpec<S>,
    points: &[S],
    r: S,
    samples: usize,
    seed: u64,
) -> Result<DistortionReport<S>> {
    check_points(spec, points)?;
    spec.check_order(r)?;
    if samples < 1000 {
        return Err(QuantError::InvalidParameter("distortion_mc needs at least 1000 samples".into()));
    }
    let d = spec.dimension();
    let tree = KdTree::new(points, d);
    let half_r = r * S::lit(0.5);
    let xs = spec.sample(seed, samples);
    let values: Vec<S> = xs.chunks(d).map(|q| tree.nearest(q).1.powf(half_r)).collect();
    let nf = S::from_usize_lossy(samples);
    let mut sum = CompensatedSum::new();
    values.iter().for_each(|&v| sum.add(v));
    let mean = sum.value() / nf;
    let mut ss = CompensatedSum::new();
    values.iter().for_each(|&v| ss.add((v - mean) * (v - mean)));
    let var = ss.value() / (nf - S::one());
    Ok(DistortionReport {
        value: mean,
        r,
        method: DistortionMethod::MonteCarlo,
        std_error: (var / nf).sqrt(),
        samples: Some(samples),
        workers: 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::distortion_quadrature_1d;

    #[test]
    fn single_point_goes_to_mean() {
        let n2 = DistributionSpec::<f64>::normal(2).unwrap();
        let s = lloyd_step_mc(&n2, &[0.5, -0.5], 100_000, 3).unwrap();
        assert!(s.points[0].abs() < 0.02 && s.points[1].abs() < 0.02);
        assert!(s.empty_cells.is_empty());
    }

    #[test]
    fn uniform_fixed_point() {
        let u = DistributionSpec::<f64>::uniform(0.0, 1.0).unwrap();
        let s = lloyd_step_mc(&u, &[0.25, 0.75], 1_000_000, 1).unwrap();
        assert!((s.points[0] - 0.25).abs() < 2e-3 && (s.points[1] - 0.75).abs() < 2e-3);
        assert_eq!(s, lloyd_step_mc(&u, &[0.25, 0.75], 1_000_000, 1).unwrap());
    }

    #[test]
    fn empty_cells_are_flagged() {
        let u = DistributionSpec::<f64>::uniform(0.0, 1.0).unwrap();
        let s = lloyd_step_mc(&u, &[0.5, 50.0], 1000, 1).unwrap();
        assert_eq!(s.empty_cells, vec![1]);
        assert_eq!(s.points[1], 50.0);
    }

    #[test]
    fn distortion_examples() {
        let n = DistributionSpec::<f64>::normal(1).unwrap();
        let rep = distortion_mc(&n, &[0.0], 2.0, 1_000_000, 2).unwrap();
        assert!((rep.value - 1.0).abs() < 3.0 * rep.std_error);
        let u = DistributionSpec::<f64>::uniform(0.0, 1.0).unwrap();
        let rep = distortion_mc(&u, &[0.5], 2.0, 1_000_000, 2).unwrap();
        assert!((rep.value - 1.0 / 12.0).abs() < 3.0 * rep.std_error);
        let e = DistributionSpec::<f64>::exponential(1.0).unwrap();
        let pts = [0.593_62, 2.593_62];
        let mc = distortion_mc(&e, &pts, 2.0, 1_000_000, 2).unwrap();
        let q = distortion_quadrature_1d(&e, &pts, 2.0).unwrap();
        assert!((mc.value - q.value).abs() < 3.0 * mc.std_error);
    }

    #[test]
    fn too_few_samples_rejected() {
        let u = DistributionSpec::<f64>::uniform(0.0, 1.0).unwrap();
        assert!(lloyd_step_mc(&u, &[0.25, 0.75], 19, 1).is_err());
        assert!(distortion_mc(&u, &[0.5], 2.0, 999, 1).is_err());
    }
}
