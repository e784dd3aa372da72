//! Small named graphs and matrices used by tests, benches and the CLI.

use std::f64::consts::PI;

use crate::graph::{Graph, VertexSet};
use crate::linalg::RMat;
use crate::magnetic::{BaseMatrix, MagneticPoint};

fn graph(n: usize, edges: &[(usize, usize)]) -> Graph {
    Graph::new(n, edges).expect("fixture graph is valid")
}

pub fn path(n: usize) -> Graph {
    graph(n, &(1..n).map(|i| (i - 1, i)).collect::<Vec<_>>())
}

pub fn cycle(n: usize) -> Graph {
    assert!(n >= 3);
    graph(n, &(0..n).map(|i| (i, (i + 1) % n)).collect::<Vec<_>>())
}

pub fn complete(n: usize) -> Graph {
    let edges: Vec<_> = (0..n).flat_map(|r| (r + 1..n).map(move |s| (r, s))).collect();
    graph(n, &edges)
}

/// `petals` cycles of length `len` glued at vertex 0.
pub fn flower(petals: usize, len: usize) -> Graph {
    assert!(petals >= 1 && len >= 3);
    let mut edges = Vec::new();
    let mut next = 1;
    for _ in 0..petals {
        let first = next;
        for i in 0..len - 2 {
            edges.push((first + i, first + i + 1));
        }
        edges.push((0, first));
        edges.push((0, first + len - 2));
        next += len - 1;
    }
    graph(next, &edges)
}

/// Two triangles sharing a vertex.
pub fn figure_eight() -> Graph {
    flower(2, 3)
}

/// `count` cycles of length `len`, consecutive ones sharing a single vertex.
pub fn cycle_chain(count: usize, len: usize) -> Graph {
    assert!(count >= 1 && len >= 3);
    let mut edges = Vec::new();
    let mut start = 0;
    let mut n = 1;
    for _ in 0..count {
        let mut prev = start;
        for _ in 0..len - 1 {
            edges.push((prev, n));
            prev = n;
            n += 1;
        }
        edges.push((prev, start));
        // the next cycle hangs off the middle of this one
        start = n - len / 2;
    }
    graph(n, &edges)
}

/// Diagonal entries `sqrt(2) * s mod 1`, `s` 1-based.
pub fn irrational_diagonal(n: usize) -> Vec<f64> {
    (1..=n).map(|s| (std::f64::consts::SQRT_2 * s as f64).fract()).collect()
}

/// Adjacency plus [`irrational_diagonal`].
pub fn default_matrix(g: Graph) -> BaseMatrix {
    let d = irrational_diagonal(g.n());
    BaseMatrix::adjacency_plus_diagonal(g, &d).expect("adjacency is strictly supported")
}

fn signed_matrix(n: usize, diag: &[f64], off: &[((usize, usize), f64)]) -> RMat {
    let mut h = RMat::zeros(n, n);
    for (i, &d) in diag.iter().enumerate() {
        h[(i, i)] = d;
    }
    for &((r, s), v) in off {
        h[(r, s)] = v;
        h[(s, r)] = v;
    }
    h
}

/// A support with one boundary vertex and a residual triangle, on seven
/// vertices. The eigenvalue 0 of the support block is the second eigenvalue
/// of `h_a` on the critical set, whose index switches with the residual
/// spectrum.
pub struct IndexJump;

impl IndexJump {
    pub const LAMBDA: f64 = 0.0;
    pub const K: usize = 2;

    pub fn graph() -> Graph {
        Graph::from_one_based(7, &[(1, 2), (1, 4), (2, 3), (2, 4), (3, 4), (4, 5), (5, 6), (5, 7), (6, 7)])
            .expect("fixture graph is valid")
    }

    pub fn matrix() -> BaseMatrix {
        let g = Self::graph();
        let off: Vec<_> = g.edges().iter().map(|&e| (e, -1.0)).collect();
        let h = signed_matrix(7, &[1.0, 2.0, 1.0, 4.0, 1.0, 2.0, 2.0], &off);
        BaseMatrix::new(g, h).expect("fixture matrix is valid")
    }

    pub fn support() -> VertexSet {
        VertexSet::from_one_based(&[1, 2, 3])
    }

    pub fn psi_n() -> Vec<f64> {
        vec![1.0 / 3f64.sqrt(); 3]
    }

    /// Flux on the residual triangle at which 0 enters its spectrum:
    /// `det(h_a|ZZ) = -1 - 2 cos a` vanishes at `2 pi / 3`.
    pub fn critical_flux() -> f64 {
        2.0 * PI / 3.0
    }

    /// Point on the critical set in the gauge of [`Self::support`]: free edges
    /// 2-4, 3-4 and 6-7 carry `(a1, a2, a3)`.
    pub fn point(sign: f64, a3: f64) -> MagneticPoint {
        let t = 2.0 * PI / 3.0;
        MagneticPoint::new(vec![(1, 3), (2, 3), (5, 6)], vec![sign * t, -sign * t, a3])
    }
}

/// A support with a single boundary vertex of degree four whose linkage is a
/// circle; for `gamma = 3` the critical circle passes through a double
/// eigenvalue.
pub struct Multiplicity;

impl Multiplicity {
    pub const LAMBDA: f64 = 0.0;

    pub fn graph() -> Graph {
        Graph::from_one_based(5, &[(1, 2), (2, 3), (3, 4), (4, 5), (1, 5), (2, 5), (3, 5)])
            .expect("fixture graph is valid")
    }

    pub fn matrix(gamma: f64) -> BaseMatrix {
        let h = signed_matrix(
            5,
            &[1.0, 3.0, 10.0, 2.0, gamma],
            &[((0, 1), -1.0), ((1, 2), -2.0), ((2, 3), -4.0), ((3, 4), -1.0), ((0, 4), -1.0), ((1, 4), -1.0), ((2, 4), -1.0)],
        );
        BaseMatrix::new(Self::graph(), h).expect("fixture matrix is valid")
    }

    pub fn support() -> VertexSet {
        VertexSet::from_one_based(&[1, 2, 3, 4])
    }

    pub fn psi_n() -> Vec<f64> {
        let s = 7f64.sqrt();
        vec![1.0 / s, 1.0 / s, 1.0 / s, 2.0 / s]
    }

    /// The point with phases `(a1, a2, a3)` on edges 1-5, 2-5, 3-5 and edge
    /// 4-5 unperturbed. Its free edges are not a tree gauge of this graph; use
    /// `in_gauge` to move it.
    pub fn raw_point(a: [f64; 3]) -> MagneticPoint {
        MagneticPoint::new(vec![(0, 4), (1, 4), (2, 4)], a.to_vec())
    }

    pub fn double_point() -> MagneticPoint {
        Self::raw_point([2.0 * PI / 3.0, PI, -2.0 * PI / 3.0])
    }
}

/// Thirteen vertices with a support whose boundary and residual parts are
/// both nonempty. The support block is disconnected (vertex 3 has no
/// neighbour inside it), so the set is not admissible.
pub fn mixed_classes() -> (Graph, VertexSet) {
    let g = Graph::from_one_based(
        13,
        &[
            (2, 4),
            (2, 1),
            (2, 6),
            (1, 4),
            (1, 5),
            (1, 6),
            (1, 7),
            (8, 2),
            (8, 3),
            (8, 4),
            (9, 3),
            (9, 4),
            (9, 5),
            (9, 6),
            (10, 5),
            (10, 6),
            (10, 7),
            (8, 9),
            (9, 12),
            (12, 11),
            (10, 13),
        ],
    )
    .expect("fixture graph is valid");
    (g, VertexSet::from_one_based(&[1, 2, 3, 4, 5, 6, 7]))
}
