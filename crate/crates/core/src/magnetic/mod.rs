//! Magnetic perturbations `(h_a)_rs = e^{i a_rs} h_rs` of a real symmetric
//! matrix supported on a graph, and the torus of their gauge classes.

mod derivatives;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::graph::{ordered, whole_partition, Edge, Graph, GraphError, SupportPartition};
use crate::linalg::{CMat, HermMatrix, LinalgError, MatrixJson, RMat, C64};
use crate::linkage::wrap;
use crate::tol;

pub use derivatives::{
    critical_residual, eigenpair, gradient, hessian, hessian_blocks, hessian_matrix, is_critical, nodal_count,
    nodal_surplus, Criticality, Eigenpair, HessianBlocks,
};

/// Refusal threshold for [`enumerate_signings`].
pub const DEFAULT_SIGNING_CAP: usize = 26;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MagneticError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("invalid base matrix: {0}")]
    InvalidMatrix(String),
    #[error("point does not belong to this graph: {0}")]
    Mismatch(String),
    #[error("eigenvalue label {k} out of range 1..={n}")]
    Label { k: usize, n: usize },
    #[error("nonsmooth point: eigenvalue {k} is not simple (gap {gap:.3e})")]
    NonSmooth { k: usize, gap: f64 },
    #[error("point is not critical (residual {residual:.3e})")]
    NotCritical { residual: f64 },
    #[error("degenerate normal data: lambda is within {distance:.3e} of the residual-subgraph spectrum")]
    DegenerateNormalData { distance: f64 },
    #[error("eigenvector support {found:?} differs from the partition support {expected:?}")]
    SupportMismatch { found: Vec<usize>, expected: Vec<usize> },
    #[error("2^{beta} signings exceed the cap 2^{cap}")]
    TooManySignings { beta: usize, cap: usize },
    #[error("malformed input: {0}")]
    Format(String),
}

/// Real symmetric matrix strictly supported on a graph.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseMatrix {
    graph: Graph,
    h: RMat,
}

impl BaseMatrix {
    pub fn new(graph: Graph, h: RMat) -> Result<Self, MagneticError> {
        let n = graph.n();
        if h.rows() != n || h.cols() != n {
            return Err(MagneticError::InvalidMatrix(format!("matrix is {}x{}, graph has {n} vertices", h.rows(), h.cols())));
        }
        for r in 0..n {
            if !h[(r, r)].is_finite() {
                return Err(MagneticError::InvalidMatrix(format!("diagonal entry {} is not finite", r + 1)));
            }
            for s in r + 1..n {
                let (a, b) = (h[(r, s)], h[(s, r)]);
                if a != b {
                    return Err(MagneticError::InvalidMatrix(format!("entry {}-{} is not symmetric", r + 1, s + 1)));
                }
                let on_edge = graph.has_edge(r, s);
                if on_edge && !(a.abs() > tol::STRICT_SUPPORT) {
                    return Err(MagneticError::InvalidMatrix(format!("edge {}-{} has vanishing entry", r + 1, s + 1)));
                }
                if !on_edge && a != 0.0 {
                    return Err(MagneticError::InvalidMatrix(format!("entry {}-{} is nonzero off the graph", r + 1, s + 1)));
                }
            }
        }
        Ok(Self { graph, h })
    }

    /// `adjacency + diag(d)`.
    pub fn adjacency_plus_diagonal(graph: Graph, d: &[f64]) -> Result<Self, MagneticError> {
        let n = graph.n();
        let h = RMat::from_fn(n, n, |r, c| if r == c { d[r] } else if graph.has_edge(r, c) { 1.0 } else { 0.0 });
        Self::new(graph, h)
    }

    /// Degree on the diagonal, `-1` on edges.
    pub fn standard_laplacian(graph: Graph) -> Self {
        let n = graph.n();
        let h = RMat::from_fn(n, n, |r, c| {
            if r == c {
                graph.degree(r) as f64
            } else if graph.has_edge(r, c) {
                -1.0
            } else {
                0.0
            }
        });
        Self { graph, h }
    }

    pub fn from_json(graph: Graph, m: &MatrixJson) -> Result<Self, MagneticError> {
        let h = m.to_real()?;
        Self::new(graph, h)
    }

    pub fn to_json(&self) -> MatrixJson {
        MatrixJson::from_real(&self.h)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn matrix(&self) -> &RMat {
        &self.h
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn entry(&self, r: usize, s: usize) -> f64 {
        self.h[(r, s)]
    }

    pub fn frobenius(&self) -> f64 {
        let n = self.n();
        (0..n).flat_map(|r| (0..n).map(move |c| (r, c))).map(|(r, c)| self.h[(r, c)].powi(2)).sum::<f64>().sqrt()
    }

    /// Absolute criticality tolerance.
    pub fn critical_tol(&self) -> f64 {
        tol::CRITICAL_REL * tol::scale(self.frobenius())
    }

    /// Replaces the nonzero pattern's values, keeping the graph.
    pub fn with_matrix(&self, h: RMat) -> Result<Self, MagneticError> {
        Self::new(self.graph.clone(), h)
    }
}

/// Antisymmetric edge function, stored on `(r, s)` with `r < s`.
#[derive(Debug, Clone, PartialEq)]
pub struct OneForm {
    edges: Vec<Edge>,
    values: Vec<f64>,
}

impl OneForm {
    pub fn zero(g: &Graph) -> Self {
        Self { edges: g.edges().to_vec(), values: vec![0.0; g.num_edges()] }
    }

    /// Values in the order of [`Graph::edges`], each for the orientation `r < s`.
    pub fn from_values(g: &Graph, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), g.num_edges());
        Self { edges: g.edges().to_vec(), values }
    }

    /// `(d theta)_rs = theta_r - theta_s`.
    pub fn coboundary(g: &Graph, theta: &[f64]) -> Self {
        let values = g.edges().iter().map(|&(r, s)| theta[r] - theta[s]).collect();
        Self { edges: g.edges().to_vec(), values }
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn index(&self, e: Edge) -> Option<usize> {
        self.edges.binary_search(&e).ok()
    }

    /// Oriented value `a_rs`; zero off the edge set.
    pub fn value(&self, r: usize, s: usize) -> f64 {
        match self.index(ordered(r, s)) {
            Some(i) if r < s => self.values[i],
            Some(i) => -self.values[i],
            None => 0.0,
        }
    }

    pub fn set(&mut self, r: usize, s: usize, v: f64) {
        let i = self.index(ordered(r, s)).expect("not an edge");
        self.values[i] = if r < s { v } else { -v };
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.edges, other.edges);
        Self { edges: self.edges.clone(), values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect() }
    }

    /// Flux `sum a_{v_i v_{i+1}}` along a closed walk given as consecutive pairs.
    pub fn flux(&self, walk: &[(usize, usize)]) -> f64 {
        walk.iter().map(|&(a, b)| self.value(a, b)).sum()
    }
}

/// A point of the magnetic torus in a tree gauge: one angle per free edge.
#[derive(Debug, Clone, PartialEq)]
pub struct MagneticPoint {
    free_edges: Vec<Edge>,
    angles: Vec<f64>,
}

impl MagneticPoint {
    /// Angles are reduced to `[0, 2 pi)`.
    pub fn new(free_edges: Vec<Edge>, angles: Vec<f64>) -> Self {
        assert_eq!(free_edges.len(), angles.len());
        let angles = angles.into_iter().map(wrap).collect();
        Self { free_edges, angles }
    }

    pub fn zero(partition: &SupportPartition) -> Self {
        let free = partition.free_edges();
        let n = free.len();
        Self::new(free, vec![0.0; n])
    }

    pub fn free_edges(&self) -> &[Edge] {
        &self.free_edges
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn dim(&self) -> usize {
        self.angles.len()
    }

    pub fn angle(&self, r: usize, s: usize) -> Option<f64> {
        let i = self.free_edges.iter().position(|&e| e == ordered(r, s))?;
        Some(if r < s { self.angles[i] } else { wrap(-self.angles[i]) })
    }

    pub fn with_angles(&self, angles: Vec<f64>) -> Self {
        Self::new(self.free_edges.clone(), angles)
    }

    pub fn to_one_form(&self, g: &Graph) -> Result<OneForm, MagneticError> {
        let mut a = OneForm::zero(g);
        for (&(r, s), &t) in self.free_edges.iter().zip(&self.angles) {
            if !g.has_edge(r, s) {
                return Err(MagneticError::Mismatch(format!("{}-{} is not an edge", r + 1, s + 1)));
            }
            a.set(r, s, t);
        }
        Ok(a)
    }

    /// Euclidean distance on the torus, coordinates compared pairwise.
    pub fn torus_distance(&self, other: &Self) -> f64 {
        assert_eq!(self.free_edges, other.free_edges, "points in different gauges");
        self.angles.iter().zip(&other.angles).map(|(a, b)| circle_distance(*a, *b).powi(2)).sum::<f64>().sqrt()
    }

    /// Same class expressed in another tree gauge.
    pub fn in_gauge(&self, g: &Graph, partition: &SupportPartition) -> Result<Self, MagneticError> {
        Ok(gauge_reduce(&self.to_one_form(g)?, partition))
    }

    /// Serialized form `{"r-s": angle}` with 1-based labels.
    pub fn to_json_map(&self) -> BTreeMap<String, f64> {
        self.free_edges.iter().zip(&self.angles).map(|(&(r, s), &t)| (format!("{}-{}", r + 1, s + 1), t)).collect()
    }

    /// Parses `{"r-s": angle}`; the keys must be exactly the partition's free edges.
    pub fn from_json_map(partition: &SupportPartition, map: &BTreeMap<String, f64>) -> Result<Self, MagneticError> {
        let free = partition.free_edges();
        let mut angles = vec![0.0; free.len()];
        let mut seen = vec![false; free.len()];
        for (key, &t) in map {
            let (r, s) = parse_edge_key(key)?;
            let i = free
                .iter()
                .position(|&e| e == ordered(r, s))
                .ok_or_else(|| MagneticError::Format(format!("{key} is not a free edge of this gauge")))?;
            angles[i] = if r < s { t } else { -t };
            seen[i] = true;
        }
        if let Some(i) = seen.iter().position(|&x| !x) {
            return Err(MagneticError::Format(format!("missing angle for free edge {}-{}", free[i].0 + 1, free[i].1 + 1)));
        }
        Ok(Self::new(free, angles))
    }
}

fn parse_edge_key(key: &str) -> Result<Edge, MagneticError> {
    let bad = || MagneticError::Format(format!("edge key {key:?} is not of the form \"r-s\""));
    let (a, b) = key.split_once('-').ok_or_else(bad)?;
    let r: usize = a.trim().parse().map_err(|_| bad())?;
    let s: usize = b.trim().parse().map_err(|_| bad())?;
    if r == 0 || s == 0 {
        return Err(bad());
    }
    Ok((r - 1, s - 1))
}

pub fn circle_distance(a: f64, b: f64) -> f64 {
    let d = wrap(a - b);
    d.min(2.0 * PI - d)
}

/// Hermitian matrix `h_a` with `(h_a)_rs = e^{i a_rs} h_rs`.
pub fn assemble_form(h: &BaseMatrix, alpha: &OneForm) -> HermMatrix {
    let n = h.n();
    let mut m = CMat::from_real(h.matrix());
    for (&(r, s), &a) in alpha.edges().iter().zip(alpha.values()) {
        if a != 0.0 {
            let z = C64::from_polar(h.entry(r, s), a);
            m[(r, s)] = z;
            m[(s, r)] = z.conj();
        }
    }
    debug_assert_eq!(m.rows(), n);
    HermMatrix::symmetrize(m)
}

pub fn assemble(h: &BaseMatrix, p: &MagneticPoint) -> Result<HermMatrix, MagneticError> {
    Ok(assemble_form(h, &p.to_one_form(h.graph())?))
}

/// Representative of `[alpha]` vanishing on the partition's tree, as free-edge angles.
pub fn gauge_reduce(alpha: &OneForm, partition: &SupportPartition) -> MagneticPoint {
    let n = partition.n;
    let mut theta = vec![0.0; n];
    for &w in partition.tree.bfs_order() {
        if let Some(v) = partition.tree.parent(w) {
            // a'_vw = a_vw + theta_v - theta_w = 0
            theta[w] = theta[v] + alpha.value(v, w);
        }
    }
    let free = partition.free_edges();
    let angles = free.iter().map(|&(r, s)| alpha.value(r, s) + theta[r] - theta[s]).collect();
    MagneticPoint::new(free, angles)
}

/// A real member of the family: a sign per free edge, `true` meaning `-`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Signing {
    free_edges: Vec<Edge>,
    minus: Vec<bool>,
}

impl Signing {
    pub fn new(free_edges: Vec<Edge>, minus: Vec<bool>) -> Self {
        assert_eq!(free_edges.len(), minus.len());
        Self { free_edges, minus }
    }

    /// Signing number `index` in lexicographic order (first free edge most significant).
    pub fn from_index(free_edges: Vec<Edge>, index: u64) -> Self {
        let b = free_edges.len();
        let minus = (0..b).map(|j| (index >> (b - 1 - j)) & 1 == 1).collect();
        Self { free_edges, minus }
    }

    pub fn free_edges(&self) -> &[Edge] {
        &self.free_edges
    }

    pub fn minus(&self) -> &[bool] {
        &self.minus
    }

    pub fn to_point(&self) -> MagneticPoint {
        let angles = self.minus.iter().map(|&m| if m { PI } else { 0.0 }).collect();
        MagneticPoint::new(self.free_edges.clone(), angles)
    }

    /// `'0'` for `+`, `'1'` for `-`, in free-edge order.
    pub fn bitstring(&self) -> String {
        self.minus.iter().map(|&m| if m { '1' } else { '0' }).collect()
    }

    pub fn from_bitstring(free_edges: Vec<Edge>, bits: &str) -> Result<Self, MagneticError> {
        if bits.len() != free_edges.len() {
            return Err(MagneticError::Format(format!("bitstring has {} bits, expected {}", bits.len(), free_edges.len())));
        }
        let minus = bits
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(MagneticError::Format(format!("invalid bit {c:?}"))),
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { free_edges, minus })
    }
}

/// All `2^b` signings over the given free edges, lexicographically.
pub fn signings_over(free_edges: &[Edge], cap: usize) -> Result<Vec<Signing>, MagneticError> {
    let beta = free_edges.len();
    if beta > cap {
        return Err(MagneticError::TooManySignings { beta, cap });
    }
    Ok((0..1u64 << beta).map(|i| Signing::from_index(free_edges.to_vec(), i)).collect())
}

/// Signings of `h` in the whole-graph gauge.
pub fn enumerate_signings(h: &BaseMatrix) -> Result<Vec<Signing>, MagneticError> {
    signings_over(&whole_partition(h.graph()).free_edges(), DEFAULT_SIGNING_CAP)
}
