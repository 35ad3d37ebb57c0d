//! Exact nearest-neighbour search over a small codebook.

use crate::scalar::Scalar;

const LEAF: usize = 8;

enum Node<S> {
    Leaf { start: usize, end: usize },
    Split { dim: usize, value: S, left: usize, right: usize },
}

pub struct KdTree<'a, S> {
    points: &'a [S],
    dim: usize,
    order: Vec<usize>,
    nodes: Vec<Node<S>>,
}

impl<'a, S: Scalar> KdTree<'a, S> {
    /// `points` is row-major with `dim` coordinates per point.
    pub fn new(points: &'a [S], dim: usize) -> Self {
        let n = points.len() / dim;
        let mut tree = Self { points, dim, order: (0..n).collect(), nodes: Vec::new() };
        if n > 0 {
            tree.build(0, n);
        }
        tree
    }

    fn coord(&self, i: usize, k: usize) -> S {
        self.points[i * self.dim + k]
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let mut best = (0, S::zero());
        for k in 0..self.dim {
            let (mut lo, mut hi) = (S::infinity(), S::neg_infinity());
            for &i in &self.order[start..end] {
                let v = self.coord(i, k);
                lo = lo.min(v);
                hi = hi.max(v);
            }
            if hi - lo > best.1 {
                best = (k, hi - lo);
            }
        }
        let dim = best.0;
        let mid = start + (end - start) / 2;
        let (pts, d) = (self.points, self.dim);
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            pts[a * d + dim].partial_cmp(&pts[b * d + dim]).unwrap_or(std::cmp::Ordering::Equal)
        });
        let value = self.coord(self.order[mid], dim);
        self.nodes.push(Node::Leaf { start: 0, end: 0 });
        let left = self.build(start, mid);
        let right = self.build(mid, end);
        self.nodes[id] = Node::Split { dim, value, left, right };
        id
    }

    /// Index of the nearest point and its squared distance; ties go to the
    /// lowest index.
    pub fn nearest(&self, q: &[S]) -> (usize, S) {
        let mut best = (usize::MAX, S::infinity());
        if !self.nodes.is_empty() {
            self.search(0, q, &mut best);
        }
        best
    }

    fn search(&self, node: usize, q: &[S], best: &mut (usize, S)) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let p = &self.points[i * self.dim..(i + 1) * self.dim];
                    let d2 = p.iter().zip(q).map(|(&a, &b)| (a - b) * (a - b)).sum::<S>();
                    if d2 < best.1 || (d2 == best.1 && i < best.0) {
                        *best = (i, d2);
                    }
                }
            }
            Node::Split { dim, value, left, right } => {
                let diff = q[dim] - value;
                let (near, far) = if diff < S::zero() { (left, right) } else { (right, left) };
                self.search(near, q, best);
                if diff * diff <= best.1 {
                    self.search(far, q, best);
                }
            }
        }
    }
}
