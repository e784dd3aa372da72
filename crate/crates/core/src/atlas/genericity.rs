//! Numerical check of the genericity conditions on induced subgraphs.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::graph::{enumerate_admissible_supports, induced_subgraph, support_classes, VertexSet};
use crate::linalg::{eig_herm, HermMatrix, RMat};
use crate::magnetic::BaseMatrix;
use crate::tol;

/// Subgraphs visited by [`check_genericity`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GenericityScope {
    /// Every nonempty vertex subset.
    AllSubgraphs,
    /// Support blocks of admissible supports and their residual blocks.
    SupportsAndResiduals,
}

#[derive(Debug, Clone, Serialize)]
pub struct GenericityReport {
    pub pass: bool,
    pub scope: GenericityScope,
    pub subgraphs_checked: usize,
    /// Subgraphs dropped because the budget ran out.
    pub subgraphs_skipped: usize,
    pub signings_checked: usize,
    /// Smallest `|h_rs|` over edges.
    pub min_edge_weight: f64,
    /// Smallest eigenvalue gap, relative to `max(1, spectral radius)`.
    pub min_relative_gap: f64,
    /// Smallest eigenvector entry on the component carrying it.
    pub min_support_entry: f64,
    pub failure_count: usize,
    /// The first few failures, in visiting order.
    pub failures: Vec<String>,
}

const MAX_LISTED: usize = 20;
const MAX_SUBGRAPH_BETA: usize = 20;

#[derive(Default)]
struct Tally {
    signings: usize,
    min_gap: f64,
    min_entry: f64,
    failures: Vec<String>,
    failure_count: usize,
}

impl Tally {
    fn new() -> Self {
        Self { min_gap: f64::INFINITY, min_entry: f64::INFINITY, ..Default::default() }
    }

    fn fail(&mut self, msg: String) {
        self.failure_count += 1;
        if self.failures.len() < MAX_LISTED {
            self.failures.push(msg);
        }
    }

    fn merge(mut self, other: Self) -> Self {
        self.signings += other.signings;
        self.min_gap = self.min_gap.min(other.min_gap);
        self.min_entry = self.min_entry.min(other.min_entry);
        self.failure_count += other.failure_count;
        for f in other.failures {
            if self.failures.len() < MAX_LISTED {
                self.failures.push(f);
            }
        }
        self
    }
}

/// Free edges of a BFS spanning forest of the induced subgraph, in local labels.
fn forest_free_edges(sub: &crate::graph::InducedSubgraph) -> Vec<(usize, usize)> {
    let mut seen = vec![false; sub.n()];
    let mut tree = BTreeSet::new();
    for root in 0..sub.n() {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            for &w in sub.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    tree.insert((v.min(w), v.max(w)));
                    stack.push(w);
                }
            }
        }
    }
    sub.edges.iter().copied().filter(|e| !tree.contains(e)).collect()
}

fn check_subgraph(h: &BaseMatrix, vs: &VertexSet) -> Tally {
    let mut t = Tally::new();
    let sub = induced_subgraph(h.graph(), vs);
    let mut comps = sub.components();
    for c in &mut comps {
        c.sort_unstable();
    }
    let mut comp_of = vec![0; sub.n()];
    for (c, members) in comps.iter().enumerate() {
        for &v in members {
            comp_of[v] = c;
        }
    }
    let free = forest_free_edges(&sub);
    if free.len() > MAX_SUBGRAPH_BETA {
        t.fail(format!("subgraph {:?}: 2^{} signings not checked", vs.one_based(), free.len()));
        return t;
    }
    let base = h.matrix().select(&sub.vertices, &sub.vertices);
    for index in 0..1u64 << free.len() {
        let mut m: RMat = base.clone();
        for (j, &(a, b)) in free.iter().enumerate() {
            if (index >> (free.len() - 1 - j)) & 1 == 1 {
                m[(a, b)] = -m[(a, b)];
                m[(b, a)] = -m[(b, a)];
            }
        }
        t.signings += 1;
        let sys = match HermMatrix::from_real(&m).and_then(|hm| eig_herm(&hm)) {
            Ok(s) => s,
            Err(e) => {
                t.fail(format!("subgraph {:?}: {e}", vs.one_based()));
                continue;
            }
        };
        let scale = sys.scale();
        for k in 0..sys.dim() {
            let gap = sys.min_gap(k);
            if gap.is_finite() {
                t.min_gap = t.min_gap.min(gap / scale);
            }
            if !sys.is_simple(k) {
                t.fail(format!("subgraph {:?}, signing {index}: eigenvalue {} is not simple", vs.one_based(), k + 1));
                continue;
            }
            let support: Vec<usize> = (0..sys.dim()).filter(|&r| sys.vectors[(r, k)].norm() > tol::SUPPORT_ZERO).collect();
            let c = comp_of[support[0]];
            if support != comps[c] {
                t.fail(format!(
                    "subgraph {:?}, signing {index}: eigenvector {} is not nowhere-vanishing on one component",
                    vs.one_based(),
                    k + 1
                ));
                continue;
            }
            let entry = support.iter().map(|&r| sys.vectors[(r, k)].norm()).fold(f64::INFINITY, f64::min);
            t.min_entry = t.min_entry.min(entry);
        }
    }
    t
}

/// Checks simplicity and the one-component support property for every
/// signing of every subgraph in scope.
///
/// With `n <= 12` and `2^n - 1 <= subgraph_budget` every vertex subset is
/// visited; otherwise the support blocks of the admissible supports and their
/// residual blocks are, up to `subgraph_budget` of them.
pub fn check_genericity(h: &BaseMatrix, subgraph_budget: usize) -> GenericityReport {
    let g = h.graph();
    let n = g.n();
    let (scope, mut sets): (GenericityScope, Vec<VertexSet>) = if n <= 12 && (1usize << n) - 1 <= subgraph_budget {
        let all = (1u32..1 << n).map(|mask| VertexSet::new((0..n).filter(|&v| mask >> v & 1 == 1).collect())).collect();
        (GenericityScope::AllSubgraphs, all)
    } else {
        let mut seen = BTreeSet::new();
        for v_n in enumerate_admissible_supports(g) {
            let zz = support_classes(g, &v_n).v_zz;
            seen.insert(v_n);
            if !zz.is_empty() {
                seen.insert(zz);
            }
        }
        (GenericityScope::SupportsAndResiduals, seen.into_iter().collect())
    };
    let skipped = sets.len().saturating_sub(subgraph_budget);
    sets.truncate(subgraph_budget);

    let tally =
        sets.par_iter().map(|vs| check_subgraph(h, vs)).collect::<Vec<_>>().into_iter().fold(Tally::new(), Tally::merge);
    let min_edge_weight = g.edges().iter().map(|&(r, s)| h.entry(r, s).abs()).fold(f64::INFINITY, f64::min);
    let mut failures = tally.failures;
    let mut failure_count = tally.failure_count;
    if min_edge_weight <= tol::STRICT_SUPPORT {
        failure_count += 1;
        failures.insert(0, format!("edge weight {min_edge_weight:.3e} violates strict support"));
    }
    GenericityReport {
        pass: failure_count == 0,
        scope,
        subgraphs_checked: sets.len(),
        subgraphs_skipped: skipped,
        signings_checked: tally.signings,
        min_edge_weight,
        min_relative_gap: tally.min_gap,
        min_support_entry: tally.min_entry,
        failure_count,
        failures,
    }
}
