//! Positive-weighted simple graphs, edge-weight perturbations and the real
//! matrices built from them (adjacency, Laplacian, perturbation Laplacian).
//!
//! File format (UTF-8, whitespace-delimited, `#` starts a comment, blank
//! lines ignored):
//!
//! ```text
//! # graph file: first line is n, then one edge per line "u v w"
//! 3
//! 1 2 1.0
//! 2 3 1.0
//! 1 3 1.0
//! ```
//!
//! Perturbation files list `u v Δw` for edges of an existing graph; edges not
//! listed get `Δw = 0`. Vertices are 1-based in files.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::{RealMatrix, RealVector};

/// Simple undirected graph with strictly positive edge weights.
///
/// Edges are stored 0-based with `u < v`. The order edges were supplied in is
/// the canonical coordinate order for weight vectors, perturbations and
/// Hessians.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    weights: Vec<f64>,
    index: HashMap<(usize, usize), usize>,
}

impl WeightedGraph {
    /// Builds a graph from 0-based `(u, v, w)` triples, validating every edge.
    pub fn new(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut g = WeightedGraph {
            n,
            edges: Vec::with_capacity(edges.len()),
            weights: Vec::with_capacity(edges.len()),
            index: HashMap::with_capacity(edges.len()),
        };
        for &(u, v, w) in edges {
            g.push_edge(u, v, w)?;
        }
        Ok(g)
    }

    fn push_edge(&mut self, u: usize, v: usize, w: f64) -> Result<()> {
        for vertex in [u, v] {
            if vertex >= self.n {
                return Err(Error::VertexOutOfRange { vertex: vertex + 1, n: self.n });
            }
        }
        if u == v {
            return Err(Error::SelfLoop { vertex: u + 1 });
        }
        let key = (u.min(v), u.max(v));
        if self.index.contains_key(&key) {
            return Err(Error::DuplicateEdge { u: key.0 + 1, v: key.1 + 1 });
        }
        let k = self.edges.len();
        if !(w > 0.0) || !w.is_finite() {
            return Err(Error::NonPositiveWeight { edge: k + 1, weight: w });
        }
        self.index.insert(key, k);
        self.edges.push(key);
        self.weights.push(w);
        Ok(())
    }

    /// Complete graph `Kₙ` with unit weights, edges in lexicographic order.
    pub fn complete(n: usize) -> Self {
        let edges: Vec<_> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v, 1.0))).collect();
        WeightedGraph::new(n, &edges).expect("complete graph is valid")
    }

    /// Same topology with a new weight vector.
    pub fn with_weights(&self, weights: &[f64]) -> Result<Self> {
        check_len(self.edge_count(), weights.len())?;
        let triples: Vec<_> = self.edges.iter().zip(weights).map(|(&(u, v), &w)| (u, v, w)).collect();
        WeightedGraph::new(self.n, &triples)
    }

    /// Applies `x + dx`, requiring every perturbed weight to stay positive.
    pub fn perturbed(&self, p: &Perturbation) -> Result<Self> {
        self.check_perturbation(p)?;
        let x: Vec<f64> = self.weights.iter().zip(p.as_slice()).map(|(x, d)| x + d).collect();
        self.with_weights(&x)
    }

    /// Validates `|dx| = m` and `x + dx > 0`.
    pub fn check_perturbation(&self, p: &Perturbation) -> Result<()> {
        check_len(self.edge_count(), p.len())?;
        for (k, (x, d)) in self.weights.iter().zip(p.as_slice()).enumerate() {
            let w = x + d;
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::InvalidPerturbation { edge: k + 1, weight: w });
            }
        }
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Canonical index of the edge joining `u` and `v` (0-based, either order).
    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        self.index.get(&(u.min(v), u.max(v))).copied()
    }

    /// Unweighted degree of every vertex.
    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for &(u, v) in &self.edges {
            d[u] += 1;
            d[v] += 1;
        }
        d
    }

    /// Maximum unweighted degree of the underlying graph.
    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    /// Maximum weighted degree `max_i Σ_j w_ij`.
    pub fn max_weighted_degree(&self) -> f64 {
        let mut d = vec![0.0; self.n];
        for (&(u, v), &w) in self.edges.iter().zip(&self.weights) {
            d[u] += w;
            d[v] += w;
        }
        d.into_iter().fold(0.0, f64::max)
    }

    pub fn max_weight(&self) -> f64 {
        self.weights.iter().copied().fold(0.0, f64::max)
    }

    pub fn min_weight(&self) -> f64 {
        self.weights.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// True when no two edges with a nonzero entry in `dx` share a vertex.
    pub fn is_matching(&self, p: &Perturbation) -> bool {
        let mut seen = vec![false; self.n];
        for (&(u, v), &d) in self.edges.iter().zip(p.as_slice()) {
            if d == 0.0 {
                continue;
            }
            if seen[u] || seen[v] {
                return false;
            }
            seen[u] = true;
            seen[v] = true;
        }
        true
    }

    /// Parses the graph text format.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = content_lines(text);
        let (line_no, header) = lines.next().ok_or(Error::Parse { line: 0, message: "missing vertex count".into() })?;
        let n = match header.as_slice() {
            [n] => n
                .parse::<usize>()
                .map_err(|e| Error::Parse { line: line_no, message: format!("invalid vertex count {n:?}: {e}") })?,
            _ => {
                return Err(Error::Parse {
                    line: line_no,
                    message: "first line must hold only the vertex count".into(),
                })
            }
        };
        let mut g = WeightedGraph { n, edges: Vec::new(), weights: Vec::new(), index: HashMap::new() };
        for (line_no, fields) in lines {
            let (u, v, w) = parse_triple(line_no, &fields)?;
            if u == 0 || v == 0 {
                return Err(Error::VertexOutOfRange { vertex: 0, n });
            }
            g.push_edge(u - 1, v - 1, w)?;
        }
        Ok(g)
    }
}

/// Edge-weight perturbation `Δx`, aligned with the canonical edge order.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation(Vec<f64>);

impl Perturbation {
    pub fn new(dx: Vec<f64>) -> Self {
        Perturbation(dx)
    }

    pub fn zeros(m: usize) -> Self {
        Perturbation(vec![0.0; m])
    }

    /// Unit direction `e_k`.
    pub fn unit(m: usize, k: usize) -> Self {
        let mut dx = vec![0.0; m];
        dx[k] = 1.0;
        Perturbation(dx)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn norm_squared(&self) -> f64 {
        self.0.iter().map(|d| d * d).sum()
    }

    /// Parses `u v Δw` lines against the edges of `g`.
    pub fn parse(text: &str, g: &WeightedGraph) -> Result<Self> {
        let mut dx = vec![0.0; g.edge_count()];
        for (line_no, fields) in content_lines(text) {
            let (u, v, d) = parse_triple(line_no, &fields)?;
            let k =
                (u > 0 && v > 0).then(|| g.edge_index(u - 1, v - 1)).flatten().ok_or(Error::UnknownEdge { u, v })?;
            if !d.is_finite() {
                return Err(Error::Parse { line: line_no, message: format!("non-finite perturbation {d}") });
            }
            dx[k] = d;
        }
        Ok(Perturbation(dx))
    }
}

impl From<Vec<f64>> for Perturbation {
    fn from(dx: Vec<f64>) -> Self {
        Perturbation(dx)
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let body = line.split('#').next().unwrap_or("");
        let fields: Vec<&str> = body.split_whitespace().collect();
        (!fields.is_empty()).then_some((i + 1, fields))
    })
}

fn parse_triple(line: usize, fields: &[&str]) -> Result<(usize, usize, f64)> {
    let [u, v, w] = fields else {
        return Err(Error::Parse { line, message: format!("expected \"u v w\", found {} fields", fields.len()) });
    };
    let vertex =
        |s: &str| s.parse::<usize>().map_err(|e| Error::Parse { line, message: format!("invalid vertex {s:?}: {e}") });
    let w = w.parse::<f64>().map_err(|e| Error::Parse { line, message: format!("invalid number {w:?}: {e}") })?;
    Ok((vertex(u)?, vertex(v)?, w))
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Weighted adjacency matrix `A`.
pub fn build_adjacency(g: &WeightedGraph) -> RealMatrix {
    let mut a = RealMatrix::zeros(g.n, g.n);
    for (&(u, v), &w) in g.edges.iter().zip(&g.weights) {
        a[(u, v)] = w;
        a[(v, u)] = w;
    }
    a
}

/// Laplacian `L = D − A` of the weighted graph.
pub fn build_laplacian(g: &WeightedGraph) -> RealMatrix {
    edge_laplacian(g, &g.weights)
}

/// Perturbation block `L₁ = D₁ − A₁ = Σ_k dx_k g_k g_kᵀ`.
///
/// No sign constraint is placed on `dx`; quadratic-form probes use arbitrary
/// directions.
pub fn build_l1(g: &WeightedGraph, p: &Perturbation) -> Result<RealMatrix> {
    check_len(g.edge_count(), p.len())?;
    Ok(edge_laplacian(g, p.as_slice()))
}

fn edge_laplacian(g: &WeightedGraph, w: &[f64]) -> RealMatrix {
    let mut l = RealMatrix::zeros(g.n, g.n);
    for (&(u, v), &w) in g.edges.iter().zip(w) {
        l[(u, v)] -= w;
        l[(v, u)] -= w;
        l[(u, u)] += w;
        l[(v, v)] += w;
    }
    l
}

/// Incidence vector `g_k = 1_u − 1_v` of edge `k = {u, v}` (`u < v`).
pub fn edge_vector(g: &WeightedGraph, k: usize) -> Result<RealVector> {
    let &(u, v) = g.edges.get(k).ok_or(Error::EdgeIndexOutOfRange { index: k, m: g.edge_count() })?;
    let mut e = RealVector::zeros(g.n);
    e[u] = 1.0;
    e[v] = -1.0;
    Ok(e)
}

/// `1_i − 1_j`.
pub fn pair_vector(n: usize, i: usize, j: usize) -> RealVector {
    let mut b = RealVector::zeros(n);
    b[i] += 1.0;
    b[j] -= 1.0;
    b
}
