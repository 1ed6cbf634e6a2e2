//! Weighted spring-connection graphs and their Laplacian matrices.
//!
//! Every constructor returns an immutable [`WeightedGraph`]. Graphs built by
//! the family constructors remember their family so that closed-form spectra
//! can be used downstream; graphs read back from JSON recover the circulant
//! family by inspection of the edge set.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest vertex count for which a dense Laplacian is assembled.
pub const DENSE_CAP: usize = 4096;
/// Largest vertex count a graph constructor will build.
pub const CONSTRUCTION_CAP: usize = 1 << 16;
/// Largest hypercube dimension.
pub const HYPERCUBE_MAX_DIMS: u32 = 14;

/// Trapezoid points used to Fourier-invert the repulsive shape.
const REPULSIVE_GRID: usize = 4096;

/// A spring between vertices `i < j` with constant `kappa` (units 1/time).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub kappa: f64,
}

/// Structural family a graph was built from.
#[derive(Clone, Debug, PartialEq, Default)]
pub enum Family {
    #[default]
    General,
    /// Circulant chain: vertex `i` joined to `i ± j` with weight `kappas[j - 1]`.
    Circulant {
        kappas: Vec<f64>,
        repulsive: bool,
    },
    Complete {
        kappa: f64,
    },
    Hypercube {
        dims: u32,
        kappa: f64,
    },
    /// Cartesian product; vertex `(a, b)` has index `a * n_b + b`.
    Product {
        factors: Vec<(usize, Family)>,
    },
}

impl Family {
    fn is_vertex_transitive(&self) -> bool {
        match self {
            Family::General => false,
            Family::Circulant { .. } | Family::Complete { .. } | Family::Hypercube { .. } => true,
            Family::Product { factors } => factors.iter().all(|(_, f)| f.is_vertex_transitive()),
        }
    }
}

/// Vertex count plus symmetric spring weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GraphDoc", into = "GraphDoc")]
pub struct WeightedGraph {
    label: String,
    n_vertices: usize,
    edges: Vec<Edge>,
    family: Family,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphDoc {
    label: String,
    n_vertices: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl From<WeightedGraph> for GraphDoc {
    fn from(g: WeightedGraph) -> Self {
        GraphDoc {
            label: g.label,
            n_vertices: g.n_vertices,
            edges: g.edges.iter().map(|e| (e.i, e.j, e.kappa)).collect(),
        }
    }
}

impl TryFrom<GraphDoc> for WeightedGraph {
    type Error = Error;

    fn try_from(doc: GraphDoc) -> Result<Self> {
        let mut g = WeightedGraph::from_edges(doc.label, doc.n_vertices, doc.edges)?;
        if let Some(kappas) = g.detect_circulant() {
            let repulsive = kappas.iter().any(|&k| k < 0.0);
            g.family = Family::Circulant { kappas, repulsive };
        } else if g.edges.iter().any(|e| e.kappa < 0.0) {
            return Err(Error::invalid(
                "negative spring constants are only accepted for circulant (repulsive) graphs",
            ));
        }
        Ok(g)
    }
}

impl WeightedGraph {
    /// Builds a general graph from `(i, j, kappa)` triples.
    ///
    /// Pairs are unordered; self-loops, out-of-range indices, duplicate pairs
    /// and non-finite weights are rejected. Zero weights are dropped.
    pub fn from_edges(
        label: impl Into<String>,
        n_vertices: usize,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        if n_vertices == 0 {
            return Err(Error::invalid("graph needs at least one vertex"));
        }
        if n_vertices > CONSTRUCTION_CAP {
            return Err(Error::resource(format!(
                "{n_vertices} vertices exceeds the construction cap of {CONSTRUCTION_CAP}"
            )));
        }
        let mut seen = BTreeMap::new();
        for (a, b, kappa) in edges {
            if a >= n_vertices || b >= n_vertices {
                return Err(Error::invalid(format!(
                    "edge ({a}, {b}) out of range for {n_vertices} vertices"
                )));
            }
            if a == b {
                return Err(Error::invalid(format!("self-loop at vertex {a}")));
            }
            if !kappa.is_finite() {
                return Err(Error::invalid(format!(
                    "non-finite weight on edge ({a}, {b})"
                )));
            }
            let key = (a.min(b), a.max(b));
            if seen.insert(key, kappa).is_some() {
                return Err(Error::invalid(format!("duplicate edge {key:?}")));
            }
        }
        let edges = seen
            .into_iter()
            .filter(|&(_, kappa)| kappa != 0.0)
            .map(|((i, j), kappa)| Edge { i, j, kappa })
            .collect();
        Ok(WeightedGraph {
            label: label.into(),
            n_vertices,
            edges,
            family: Family::General,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn has_negative_weights(&self) -> bool {
        self.edges.iter().any(|e| e.kappa < 0.0)
    }

    /// True when every bead sees the same environment (exchangeable beads).
    pub fn is_vertex_transitive(&self) -> bool {
        self.family.is_vertex_transitive() || self.detect_circulant().is_some()
    }

    /// Sum of spring constants at each vertex.
    pub fn degrees(&self) -> Vec<f64> {
        let mut deg = vec![0.0; self.n_vertices];
        for e in &self.edges {
            deg[e.i] += e.kappa;
            deg[e.j] += e.kappa;
        }
        deg
    }

    /// Number of incident edges at each vertex.
    pub fn edge_counts(&self) -> Vec<usize> {
        let mut count = vec![0; self.n_vertices];
        for e in &self.edges {
            count[e.i] += 1;
            count[e.j] += 1;
        }
        count
    }

    /// If the weights depend only on the cyclic offset `j - i`, returns them
    /// indexed by offset `1..=K` (with `K < n/2`).
    pub fn detect_circulant(&self) -> Option<Vec<f64>> {
        let n = self.n_vertices;
        if n < 3 {
            return None;
        }
        let mut by_offset: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
        for e in &self.edges {
            let fwd = (e.j + n - e.i) % n;
            let off = fwd.min(n - fwd);
            if 2 * off >= n {
                return None;
            }
            let entry = by_offset.entry(off).or_insert((e.kappa, 0));
            if entry.0 != e.kappa {
                return None;
            }
            entry.1 += 1;
        }
        if by_offset.values().any(|&(_, count)| count != n) {
            return None;
        }
        let k_max = by_offset.keys().next_back().copied().unwrap_or(1);
        let mut kappas = vec![0.0; k_max];
        for (off, (kappa, _)) in by_offset {
            kappas[off - 1] = kappa;
        }
        Some(kappas)
    }

    /// Dense Laplacian `L = A - D` (nonpositive diagonal for attractive springs).
    pub fn laplacian(&self) -> Result<LaplacianMatrix> {
        if self.n_vertices > DENSE_CAP {
            return Err(Error::resource(format!(
                "dense Laplacian for {} vertices exceeds the cap of {DENSE_CAP}",
                self.n_vertices
            )));
        }
        let n = self.n_vertices;
        let mut m = DMatrix::zeros(n, n);
        for e in &self.edges {
            m[(e.i, e.j)] += e.kappa;
            m[(e.j, e.i)] += e.kappa;
        }
        let mut row = Vec::with_capacity(n);
        for r in 0..n {
            row.clear();
            row.extend(
                (0..n)
                    .filter(|&c| c != r && m[(r, c)] != 0.0)
                    .map(|c| m[(r, c)]),
            );
            row.sort_by(f64::total_cmp);
            m[(r, r)] = -row.iter().sum::<f64>();
        }
        Ok(LaplacianMatrix { entries: m })
    }

    /// `out = L x` computed from the edge list.
    pub fn apply_laplacian(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for e in &self.edges {
            let flow = e.kappa * (x[e.j] - x[e.i]);
            out[e.i] += flow;
            out[e.j] -= flow;
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Dense symmetric Laplacian matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct LaplacianMatrix {
    entries: DMatrix<f64>,
}

impl LaplacianMatrix {
    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.entries.row(i).iter().copied().collect()
    }

    pub fn max_abs_row_sum(&self) -> f64 {
        self.entries
            .row_iter()
            .map(|r| r.sum().abs())
            .fold(0.0, f64::max)
    }

    pub fn is_symmetric(&self) -> bool {
        self.entries == self.entries.transpose()
    }

    /// Wraps an arbitrary symmetric matrix; used when a Laplacian comes from
    /// outside the graph constructors.
    pub fn from_matrix(entries: DMatrix<f64>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::invalid("Laplacian must be square"));
        }
        if entries != entries.transpose() {
            return Err(Error::invalid("Laplacian must be symmetric"));
        }
        Ok(LaplacianMatrix { entries })
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

/// Nearest-neighbour ring of `n` beads, each spring `kappa`.
pub fn rouse_cycle(n: usize, kappa: f64) -> Result<WeightedGraph> {
    if n < 3 {
        return Err(Error::invalid(format!(
            "a cycle needs at least 3 vertices, got {n}"
        )));
    }
    positive("kappa", kappa)?;
    let mut g = circulant_chain(n, &[kappa])?;
    g.label = format!("rouse(n={n},kappa={kappa})");
    Ok(g)
}

/// Ring with springs of every range `j = 1..=K`, weight `kappas[j - 1]`.
pub fn circulant_chain(n: usize, kappas: &[f64]) -> Result<WeightedGraph> {
    validate_circulant(n, kappas)?;
    if let Some(k) = kappas.iter().find(|k| **k < 0.0) {
        return Err(Error::invalid(format!(
            "circulant_chain takes attractive (nonnegative) springs, got {k}; use repulsive_circulant"
        )));
    }
    let mut g = build_circulant(n, kappas, format!("circulant(n={n},kappas={kappas:?})"))?;
    g.family = Family::Circulant {
        kappas: kappas.to_vec(),
        repulsive: false,
    };
    Ok(g)
}

pub(crate) fn validate_circulant(n: usize, kappas: &[f64]) -> Result<()> {
    if kappas.is_empty() {
        return Err(Error::invalid(
            "circulant weights must list at least kappa_1",
        ));
    }
    if 2 * kappas.len() >= n {
        return Err(Error::invalid(format!(
            "range K = {} must satisfy K < n/2 for n = {n}",
            kappas.len()
        )));
    }
    if let Some(k) = kappas.iter().find(|k| !k.is_finite()) {
        return Err(Error::invalid(format!("non-finite circulant weight {k}")));
    }
    Ok(())
}

fn build_circulant(n: usize, kappas: &[f64], label: String) -> Result<WeightedGraph> {
    let edges = (0..n).flat_map(|i| {
        kappas
            .iter()
            .enumerate()
            .map(move |(j, &k)| (i, (i + j + 1) % n, k))
    });
    WeightedGraph::from_edges(label, n, edges)
}

/// Circulant weights whose shape function is `4^order · sin^(2·order)(πx)`.
///
/// The weights are obtained by Fourier-inverting the target shape on a
/// trapezoid grid, which is exact for this trigonometric polynomial. Odd
/// ranges carry attractive springs and even ranges repulsive ones.
pub fn repulsive_weights(order: usize) -> Result<Vec<f64>> {
    if order == 0 {
        return Err(Error::invalid("repulsive order must be at least 1"));
    }
    let m = REPULSIVE_GRID;
    let scale = 4f64.powi(order as i32);
    let target: Vec<f64> = (0..m)
        .map(|i| scale * (PI * i as f64 / m as f64).sin().powi(2 * order as i32))
        .collect();
    let coeff = |j: usize| -> f64 {
        target
            .iter()
            .enumerate()
            .map(|(i, g)| g * (2.0 * PI * (j * i) as f64 / m as f64).cos())
            .sum::<f64>()
            / m as f64
    };
    // φ(x) = 2 Σ κ_j − 2 Σ κ_j cos(2πjx), so κ_j is minus the j-th cosine coefficient.
    let kappas: Vec<f64> = (1..=order).map(|j| -coeff(j)).collect();
    let leak = coeff(order + 1).abs();
    if leak > 1e-9 * scale {
        return Err(Error::numeric(format!(
            "Fourier inversion leaked {leak:e} beyond range {order}"
        )));
    }
    Ok(kappas)
}

/// Circulant network with alternating attractive/repulsive springs whose
/// shape function vanishes to order `2·order` at zero.
pub fn repulsive_circulant(n: usize, order: usize) -> Result<WeightedGraph> {
    if order == 0 || 4 * order >= n {
        return Err(Error::invalid(format!(
            "repulsive order {order} needs 2·order < n/2 (n = {n})"
        )));
    }
    let kappas = repulsive_weights(order)?;
    validate_circulant(n, &kappas)?;
    let mut g = build_circulant(n, &kappas, format!("repulsive(n={n},order={order})"))?;
    g.family = Family::Circulant {
        kappas,
        repulsive: true,
    };
    Ok(g)
}

/// All pairs joined with the same spring constant.
pub fn complete_graph(n: usize, kappa: f64) -> Result<WeightedGraph> {
    if n < 2 {
        return Err(Error::invalid(format!(
            "complete graph needs n >= 2, got {n}"
        )));
    }
    positive("kappa", kappa)?;
    let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j, kappa)));
    let mut g = WeightedGraph::from_edges(format!("complete(n={n},kappa={kappa})"), n, edges)?;
    g.family = Family::Complete { kappa };
    Ok(g)
}

/// Complete graph with unit total spring constant per bead, so the nonzero
/// eigenvalue is `n/(n-1)`.
pub fn complete_graph_normalized(n: usize) -> Result<WeightedGraph> {
    complete_graph(n, 1.0 / (n.max(2) - 1) as f64)
}

/// `dims`-cube: bitstring vertices, edges at Hamming distance one.
pub fn hypercube(dims: u32, kappa: f64) -> Result<WeightedGraph> {
    if dims == 0 {
        return Err(Error::invalid("hypercube needs at least one dimension"));
    }
    if dims > HYPERCUBE_MAX_DIMS {
        return Err(Error::resource(format!(
            "hypercube of dimension {dims} exceeds the cap of {HYPERCUBE_MAX_DIMS}"
        )));
    }
    positive("kappa", kappa)?;
    let n = 1usize << dims;
    let edges = (0..n).flat_map(|v| {
        (0..dims).filter_map(move |b| {
            let w = v ^ (1 << b);
            (v < w).then_some((v, w, kappa))
        })
    });
    let mut g =
        WeightedGraph::from_edges(format!("hypercube(dims={dims},kappa={kappa})"), n, edges)?;
    g.family = Family::Hypercube { dims, kappa };
    Ok(g)
}

/// Hypercube with spring constant `1/dims`, giving eigenvalues `2k/dims`.
pub fn hypercube_normalized(dims: u32) -> Result<WeightedGraph> {
    hypercube(dims, 1.0 / dims.max(1) as f64)
}

/// Cartesian product; its Laplacian is the Kronecker sum `L1 ⊗ I + I ⊗ L2`.
pub fn cartesian_product(g1: &WeightedGraph, g2: &WeightedGraph) -> Result<WeightedGraph> {
    let (n1, n2) = (g1.n_vertices, g2.n_vertices);
    let n = n1
        .checked_mul(n2)
        .filter(|&n| n <= CONSTRUCTION_CAP)
        .ok_or_else(|| {
            Error::resource(format!(
                "product of {n1} and {n2} vertices exceeds the cap of {CONSTRUCTION_CAP}"
            ))
        })?;
    let mut edges = Vec::with_capacity(n1 * g2.edges.len() + n2 * g1.edges.len());
    for a in 0..n1 {
        for e in &g2.edges {
            edges.push((a * n2 + e.i, a * n2 + e.j, e.kappa));
        }
    }
    for e in &g1.edges {
        for b in 0..n2 {
            edges.push((e.i * n2 + b, e.j * n2 + b, e.kappa));
        }
    }
    let label = format!("({}) x ({})", g1.label, g2.label);
    let mut g = WeightedGraph::from_edges(label, n, edges)?;
    let mut factors = Vec::new();
    for (n_f, fam) in [(n1, &g1.family), (n2, &g2.family)] {
        match fam {
            Family::Product { factors: inner } => factors.extend(inner.iter().cloned()),
            other => factors.push((n_f, other.clone())),
        }
    }
    g.family = Family::Product { factors };
    Ok(g)
}
