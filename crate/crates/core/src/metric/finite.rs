use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use crate::{Error, Result};

const METRIC_TOL: f64 = 1e-9;

/// Distance table over labelled points.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMetric {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    d: Vec<f64>,
}

impl FiniteMetric {
    /// Validates zero diagonal, symmetry, non-negativity and the triangle inequality.
    pub fn from_matrix(labels: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::input("matrix metric needs at least one point"));
        }
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::input(format!("distance matrix must be {n}x{n}")));
        }
        let mut d = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::input(format!("d[{i}][{j}] = {v} is not a finite non-negative distance")));
                }
                if (i == j && v != 0.0) || (v - rows[j][i]).abs() > METRIC_TOL {
                    return Err(Error::input(format!("d[{i}][{j}] breaks symmetry or zero diagonal")));
                }
                d.push(v);
            }
        }
        let m = Self::assemble(labels, d)?;
        if let Some((a, b, c, slack)) = m.worst_triangle() {
            if slack < -METRIC_TOL {
                return Err(Error::NonMetric { a, b, c, slack });
            }
        }
        Ok(m)
    }

    /// Shortest-path distances of a connected graph with positive weights.
    pub fn from_graph(edges: &[(String, String, f64)]) -> Result<Self> {
        let mut labels: Vec<String> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut id = |s: &str, labels: &mut Vec<String>| -> usize {
            *index.entry(s.to_string()).or_insert_with(|| {
                labels.push(s.to_string());
                labels.len() - 1
            })
        };
        let mut adj: Vec<Vec<(usize, f64)>> = Vec::new();
        for (a, b, w) in edges {
            if !(w.is_finite() && *w > 0.0) {
                return Err(Error::input(format!("edge {a}-{b} needs a positive weight, got {w}")));
            }
            let i = id(a, &mut labels);
            let j = id(b, &mut labels);
            adj.resize(labels.len(), Vec::new());
            adj[i].push((j, *w));
            adj[j].push((i, *w));
        }
        let n = labels.len();
        if n == 0 {
            return Err(Error::input("graph metric needs at least one edge"));
        }
        let rows = crate::par::map_range(n, |s| dijkstra(&adj, s));
        let mut d = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if let Some(j) = row.iter().position(|v| v.is_infinite()) {
                return Err(Error::input(format!("graph is disconnected: {} cannot reach {}", labels[i], labels[j])));
            }
            d.extend(row);
        }
        // Dijkstra sums in path order; symmetrize so d(a,b) == d(b,a) bit-for-bit.
        for i in 0..n {
            for j in 0..i {
                let v = d[i * n + j].min(d[j * n + i]);
                d[i * n + j] = v;
                d[j * n + i] = v;
            }
        }
        Self::assemble(labels, d)
    }

    /// Wraps an already validated table, such as a recovered quotient metric.
    pub fn from_table(labels: Vec<String>, d: Vec<f64>) -> Result<Self> {
        if d.len() != labels.len() * labels.len() {
            return Err(Error::input("distance table size does not match labels"));
        }
        Self::assemble(labels, d)
    }

    fn assemble(labels: Vec<String>, d: Vec<f64>) -> Result<Self> {
        let mut index = HashMap::new();
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(Error::input(format!("duplicate point label {l:?}")));
            }
        }
        Ok(FiniteMetric { labels, index, d })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.len() + j]
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn diameter(&self) -> f64 {
        self.d.iter().copied().fold(0.0, f64::max)
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.d.chunks(self.len()).map(<[f64]>::to_vec).collect()
    }

    /// The triple with the most negative `d(a,b) + d(b,c) − d(a,c)`.
    pub fn worst_triangle(&self) -> Option<(usize, usize, usize, f64)> {
        let n = self.len();
        let per_a = crate::par::map_range(n, |a| {
            let mut worst: Option<(usize, usize, usize, f64)> = None;
            for b in 0..n {
                for c in 0..n {
                    let slack = self.dist(a, b) + self.dist(b, c) - self.dist(a, c);
                    if worst.is_none_or(|w| slack < w.3) {
                        worst = Some((a, b, c, slack));
                    }
                }
            }
            worst
        });
        per_a.into_iter().flatten().fold(None, |acc, w| match acc {
            Some(a) if a.3 <= w.3 => Some(a),
            _ => Some(w),
        })
    }
}

fn dijkstra(adj: &[Vec<(usize, f64)>], s: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adj.len()];
    dist[s] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((OrdF64(0.0), s)));
    while let Some(Reverse((OrdF64(d), u))) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, w) in &adj[u] {
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Reverse((OrdF64(nd), v)));
            }
        }
    }
    dist
}

#[derive(Copy, Clone, PartialEq)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}
