//! Exact Euclidean nearest-neighbor search over a fixed point set.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

#[allow(unused_imports)] // needed without std, shadowed by inherent methods with it
use num_traits::Float;

use crate::linalg::Matrix;
use crate::{Error, Result};

const LEAF_SIZE: usize = 8;

/// Set of excluded (already claimed) point indices.
#[derive(Debug, Clone)]
pub struct ClaimSet {
    claimed: Vec<bool>,
    count: usize,
}

impl ClaimSet {
    pub fn new(n: usize) -> Self {
        Self {
            claimed: vec![false; n],
            count: 0,
        }
    }

    pub fn from_indices(n: usize, indices: &[usize]) -> Self {
        let mut s = Self::new(n);
        for &i in indices {
            s.insert(i);
        }
        s
    }

    /// Returns false if `i` was already present.
    pub fn insert(&mut self, i: usize) -> bool {
        if self.claimed[i] {
            return false;
        }
        self.claimed[i] = true;
        self.count += 1;
        true
    }

    pub fn contains(&self, i: usize) -> bool {
        self.claimed[i]
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub distance: f64,
}

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        dim: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

/// Balanced k-d tree. Splits on the widest coordinate at the median.
#[derive(Debug, Clone)]
pub struct PointIndex {
    points: Matrix,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl PointIndex {
    pub fn build(points: Matrix) -> Self {
        let n = points.rows();
        let mut index = Self {
            order: (0..n).collect(),
            nodes: Vec::new(),
            points,
        };
        index.build_node(0, n);
        index
    }

    pub fn len(&self) -> usize {
        self.points.rows()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> &Matrix {
        &self.points
    }

    fn build_node(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let dim = self.widest_dim(start, end);
        let mid = start + (end - start) / 2;
        let pts = &self.points;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            pts[(a, dim)].total_cmp(&pts[(b, dim)])
        });
        let value = self.points[(self.order[mid], dim)];
        self.nodes.push(Node::Leaf { start, end });
        let left = self.build_node(start, mid);
        let right = self.build_node(mid, end);
        self.nodes[id] = Node::Split {
            dim,
            value,
            left,
            right,
        };
        id
    }

    fn widest_dim(&self, start: usize, end: usize) -> usize {
        let p = self.points.cols();
        let mut best = (0, f64::NEG_INFINITY);
        for d in 0..p {
            let (lo, hi) = self.order[start..end].iter().fold(
                (f64::INFINITY, f64::NEG_INFINITY),
                |(lo, hi), &i| {
                    let v = self.points[(i, d)];
                    (lo.min(v), hi.max(v))
                },
            );
            if hi - lo > best.1 {
                best = (d, hi - lo);
            }
        }
        best.0
    }

    /// Nearest point to `query` that is not in `excluded`; ties go to the
    /// smallest original index.
    pub fn nearest(&self, query: &[f64], excluded: &ClaimSet) -> Result<Neighbor> {
        if query.len() != self.points.cols() {
            return Err(Error::Dimension("query dimension differs from index"));
        }
        if excluded.len() >= self.len() {
            return Err(Error::Exhausted);
        }
        let mut best: Option<(f64, usize)> = None;
        self.search(0, query, excluded, &mut best);
        let (d2, index) = best.ok_or(Error::Exhausted)?;
        Ok(Neighbor {
            index,
            distance: d2.sqrt(),
        })
    }

    fn search(&self, node: usize, q: &[f64], excluded: &ClaimSet, best: &mut Option<(f64, usize)>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    if excluded.contains(i) {
                        continue;
                    }
                    let d2 = squared_distance(self.points.row(i), q);
                    if better(d2, i, *best) {
                        *best = Some((d2, i));
                    }
                }
            }
            Node::Split {
                dim,
                value,
                left,
                right,
            } => {
                let diff = q[dim] - value;
                let (near, far) = if diff <= 0.0 { (left, right) } else { (right, left) };
                self.search(near, q, excluded, best);
                // Equal distances must still be visited for the index tie rule.
                if best.is_none_or(|(d2, _)| diff * diff <= d2) {
                    self.search(far, q, excluded, best);
                }
            }
        }
    }
}

fn better(d2: f64, i: usize, best: Option<(f64, usize)>) -> bool {
    match best {
        None => true,
        Some((bd, bi)) => match d2.total_cmp(&bd) {
            Ordering::Less => true,
            Ordering::Equal => i < bi,
            Ordering::Greater => false,
        },
    }
}

/// Squared Euclidean distance, summed in coordinate order.
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
