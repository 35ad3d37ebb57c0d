//! Quantizer codebooks and their text file format.
//!
//! ```text
//! # family=exponential
//! # lambda=1.0
//! # dimension=1
//! # level=2
//! # r=2
//! # method=semiclosed
//! # iterations=0
//! 0.5936242…
//! 2.5936242…
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::distributions::DistributionSpec;
use crate::error::{QuantError, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Semiclosed,
    Lloyd1d,
    Lloydmc,
    Explicit,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Semiclosed => "semiclosed",
            Method::Lloyd1d => "lloyd1d",
            Method::Lloydmc => "lloydmc",
            Method::Explicit => "explicit",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = QuantError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "semiclosed" => Ok(Method::Semiclosed),
            "lloyd1d" => Ok(Method::Lloyd1d),
            "lloydmc" => Ok(Method::Lloydmc),
            "explicit" => Ok(Method::Explicit),
            other => Err(QuantError::Parse(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CodebookMeta<S> {
    pub method: Method,
    pub r: S,
    pub seed: Option<u64>,
    pub iterations: usize,
    pub spec: Option<DistributionSpec<S>>,
}

impl<S: Scalar> CodebookMeta<S> {
    pub fn explicit(r: S) -> Self {
        Self { method: Method::Explicit, r, seed: None, iterations: 0, spec: None }
    }
}

/// `n` distinct points in `R^d`, stored row-major. One-dimensional codebooks
/// are kept strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook<S> {
    dimension: usize,
    points: Vec<S>,
    pub meta: CodebookMeta<S>,
}

impl<S: Scalar> Codebook<S> {
    /// Builds a codebook from row-major coordinates.
    pub fn from_flat(dimension: usize, points: Vec<S>, meta: CodebookMeta<S>) -> Result<Self> {
        if dimension == 0 {
            return Err(QuantError::InvalidParameter("dimension must be positive".into()));
        }
        if points.is_empty() {
            return Err(QuantError::EmptyCodebook);
        }
        if !points.len().is_multiple_of(dimension) {
            return Err(QuantError::DimensionMismatch { expected: dimension, got: points.len() % dimension });
        }
        if let Some(spec) = &meta.spec {
            if spec.dimension() != dimension {
                return Err(QuantError::DimensionMismatch { expected: spec.dimension(), got: dimension });
            }
        }
        if points.iter().any(|v| !v.is_finite()) {
            return Err(QuantError::InvalidParameter("codebook coordinates must be finite".into()));
        }
        let cb = Self { dimension, points, meta };
        if dimension == 1 {
            if cb.points.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(QuantError::NotSorted);
            }
        } else if !cb.distinct() {
            return Err(QuantError::InvalidParameter("codebook points must be pairwise distinct".into()));
        }
        Ok(cb)
    }

    /// One-dimensional codebook; `points` must be strictly increasing.
    pub fn from_1d(points: Vec<S>, meta: CodebookMeta<S>) -> Result<Self> {
        Self::from_flat(1, points, meta)
    }

    pub fn from_points(points: &[Vec<S>], meta: CodebookMeta<S>) -> Result<Self> {
        let d = points.first().map(Vec::len).ok_or(QuantError::EmptyCodebook)?;
        if let Some(p) = points.iter().find(|p| p.len() != d) {
            return Err(QuantError::DimensionMismatch { expected: d, got: p.len() });
        }
        Self::from_flat(d, points.concat(), meta)
    }

    fn distinct(&self) -> bool {
        let mut idx: Vec<usize> = (0..self.level()).collect();
        idx.sort_by(|&i, &j| self.point(i).partial_cmp(self.point(j)).unwrap_or(std::cmp::Ordering::Equal));
        idx.windows(2).all(|w| self.point(w[0]) != self.point(w[1]))
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn level(&self) -> usize {
        self.points.len() / self.dimension
    }

    pub fn point(&self, i: usize) -> &[S] {
        &self.points[i * self.dimension..(i + 1) * self.dimension]
    }

    pub fn points(&self) -> impl Iterator<Item = &[S]> {
        self.points.chunks(self.dimension)
    }

    /// Row-major coordinates; for `d = 1` this is the sorted point list.
    pub fn flat(&self) -> &[S] {
        &self.points
    }

    /// True when every point lies in the closed convex hull of the support.
    pub fn within_support_hull(&self, spec: &DistributionSpec<S>) -> bool {
        if self.dimension != 1 {
            let rmax = spec.support_radius();
            return self.points().all(|p| p.iter().map(|&v| v * v).sum::<S>().sqrt() <= rmax);
        }
        let (lo, hi) = spec.support_1d();
        self.points.iter().all(|&x| x >= lo && x <= hi)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(spec) = &self.meta.spec {
            for (k, v) in spec.to_params() {
                if k != "dimension" {
                    let _ = writeln!(out, "# {k}={v}");
                }
            }
        }
        let _ = writeln!(out, "# dimension={}", self.dimension);
        let _ = writeln!(out, "# level={}", self.level());
        let _ = writeln!(out, "# r={}", self.meta.r);
        let _ = writeln!(out, "# method={}", self.meta.method.as_str());
        if let Some(seed) = self.meta.seed {
            let _ = writeln!(out, "# seed={seed}");
        }
        let _ = writeln!(out, "# iterations={}", self.meta.iterations);
        for p in self.points() {
            let row: Vec<String> = p.iter().map(|v| v.to_string()).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut meta = BTreeMap::new();
        let mut coords = Vec::new();
        let mut rows = 0usize;
        let mut width = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((k, v)) = rest.trim().split_once('=') {
                    meta.insert(k.trim().to_string(), v.trim().to_string());
                }
                continue;
            }
            let before = coords.len();
            for field in line.split(',') {
                let v: S = field
                    .trim()
                    .parse()
                    .map_err(|_| QuantError::Parse(format!("line {}: bad coordinate `{field}`", lineno + 1)))?;
                coords.push(v);
            }
            let w = coords.len() - before;
            if *width.get_or_insert(w) != w {
                return Err(QuantError::Parse(format!("line {}: ragged row", lineno + 1)));
            }
            rows += 1;
        }
        let get = |k: &str| meta.get(k).ok_or_else(|| QuantError::Parse(format!("missing `{k}` header")));
        let dimension: usize = get("dimension")?.parse().map_err(|_| QuantError::Parse("bad dimension".into()))?;
        let level: usize = get("level")?.parse().map_err(|_| QuantError::Parse("bad level".into()))?;
        if width.unwrap_or(dimension) != dimension || rows != level {
            return Err(QuantError::Parse(format!(
                "header says {level} points in dimension {dimension}, body has {rows} rows of width {}",
                width.unwrap_or(0)
            )));
        }
        let r: S = get("r")?.parse().map_err(|_| QuantError::Parse("bad r".into()))?;
        let method: Method = get("method")?.parse()?;
        let seed = match meta.get("seed") {
            Some(s) => Some(s.parse().map_err(|_| QuantError::Parse("bad seed".into()))?),
            None => None,
        };
        let iterations = match meta.get("iterations") {
            Some(s) => s.parse().map_err(|_| QuantError::Parse("bad iterations".into()))?,
            None => 0,
        };
        let spec = if meta.contains_key("family") { Some(DistributionSpec::from_params(&meta)?) } else { None };
        Self::from_flat(dimension, coords, CodebookMeta { method, r, seed, iterations, spec })
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_text())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| QuantError::Parse(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta() -> CodebookMeta<f64> {
        CodebookMeta {
            method: Method::Lloydmc,
            r: 2.0,
            seed: Some(17),
            iterations: 12,
            spec: Some(DistributionSpec::normal(2).unwrap()),
        }
    }

    #[test]
    fn text_round_trip() {
        let cb = Codebook::from_points(&[vec![0.1, -3.0], vec![1.0 / 3.0, 2e-300], vec![5.5, 1e10]], meta()).unwrap();
        let back = Codebook::parse(&cb.to_text()).unwrap();
        assert_eq!(back, cb);
        let one = Codebook::from_1d(
            vec![0.593_624_260_206_9, 2.593_624_260_206_9],
            CodebookMeta {
                method: Method::Semiclosed,
                r: 2.0,
                seed: None,
                iterations: 0,
                spec: Some(DistributionSpec::exponential(1.0).unwrap()),
            },
        )
        .unwrap();
        assert_eq!(Codebook::parse(&one.to_text()).unwrap(), one);
        assert!(!one.to_text().contains("seed"));
    }

    #[test]
    fn validation() {
        assert_eq!(Codebook::from_1d(vec![1.0, 0.0], CodebookMeta::explicit(2.0)), Err(QuantError::NotSorted));
        assert_eq!(Codebook::<f64>::from_1d(vec![], CodebookMeta::explicit(2.0)), Err(QuantError::EmptyCodebook));
        assert!(Codebook::from_points(&[vec![1.0, 1.0], vec![1.0, 1.0]], CodebookMeta::explicit(2.0)).is_err());
        assert!(Codebook::from_flat(3, vec![1.0, 2.0], CodebookMeta::explicit(2.0)).is_err());
    }

    #[test]
    fn parse_rejects_inconsistent_header() {
        let text = "# dimension=1\n# level=3\n# r=2\n# method=explicit\n1\n2\n";
        assert!(matches!(Codebook::<f64>::parse(text), Err(QuantError::Parse(_))));
    }

    #[test]
    fn hull_check() {
        let p = DistributionSpec::<f64>::pareto(3.0).unwrap();
        let good = Codebook::from_1d(vec![1.2, 2.0], CodebookMeta::explicit(2.0)).unwrap();
        let bad = Codebook::from_1d(vec![0.8, 2.0], CodebookMeta::explicit(2.0)).unwrap();
        assert!(good.within_support_hull(&p));
        assert!(!bad.within_support_hull(&p));
    }
}
