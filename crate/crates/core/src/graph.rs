//! Simple connected graphs, admissible supports and adapted spanning trees.
//!
//! Vertices are `0..n` in code and `1..=n` in every serialized form.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

/// Undirected edge `(r, s)` with `r < s`.
pub type Edge = (usize, usize);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("graph has no vertices")]
    Empty,
    #[error("edge {}-{} has an endpoint outside 1..={n}", .edge.0 + 1, .edge.1 + 1)]
    OutOfRange { edge: Edge, n: usize },
    #[error("loop at vertex {}", .0 + 1)]
    Loop(usize),
    #[error("duplicate edge {}-{}", .0.0 + 1, .0.1 + 1)]
    Duplicate(Edge),
    #[error("graph is disconnected; vertex {} is not reachable from vertex 1", .unreached + 1)]
    Disconnected { unreached: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("support is not admissible: {0}")]
    Inadmissible(String),
}

pub(crate) fn ordered(r: usize, s: usize) -> Edge {
    if r < s {
        (r, s)
    } else {
        (s, r)
    }
}

/// Ordered simple connected graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
    index: HashMap<Edge, usize>,
}

impl Graph {
    /// Builds a graph from 0-based edges, rejecting loops, duplicates and disconnected input.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut list = Vec::with_capacity(edges.len());
        let mut index = HashMap::new();
        for &(r, s) in edges {
            if r >= n || s >= n {
                return Err(GraphError::OutOfRange { edge: (r, s), n });
            }
            if r == s {
                return Err(GraphError::Loop(r));
            }
            let e = ordered(r, s);
            if index.insert(e, 0).is_some() {
                return Err(GraphError::Duplicate(e));
            }
            list.push(e);
        }
        list.sort_unstable();
        let g = Self::assemble(n, list);
        if let Some(unreached) = g.first_unreached() {
            return Err(GraphError::Disconnected { unreached });
        }
        Ok(g)
    }

    pub fn from_one_based(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut zero = Vec::with_capacity(edges.len());
        for &(r, s) in edges {
            if r == 0 || s == 0 {
                return Err(GraphError::InvalidInput(format!("label 0 in edge {r}-{s}; labels are 1-based")));
            }
            zero.push((r - 1, s - 1));
        }
        Self::new(n, &zero)
    }

    fn assemble(n: usize, edges: Vec<Edge>) -> Self {
        let mut adj = vec![Vec::new(); n];
        for &(r, s) in &edges {
            adj[r].push(s);
            adj[s].push(r);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        let index = edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        Self { n, edges, adj, index }
    }

    fn first_unreached(&self) -> Option<usize> {
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &self.adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.iter().position(|&s| !s)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Edges sorted lexicographically.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Neighbours in ascending order.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, r: usize, s: usize) -> bool {
        self.index.contains_key(&ordered(r, s))
    }

    /// Position of the edge in [`Graph::edges`].
    pub fn edge_index(&self, r: usize, s: usize) -> Option<usize> {
        self.index.get(&ordered(r, s)).copied()
    }

    pub fn betti(&self) -> usize {
        self.edges.len() + 1 - self.n
    }

    pub fn is_regular(&self, d: usize) -> bool {
        self.adj.iter().all(|a| a.len() == d)
    }

    pub fn vertices(&self) -> VertexSet {
        VertexSet((0..self.n).collect())
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson { n: self.n, edges: self.edges.iter().map(|&(r, s)| [r + 1, s + 1]).collect() }
    }
}

/// Serialized graph with 1-based labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
}

impl GraphJson {
    pub fn to_graph(&self) -> Result<Graph, GraphError> {
        let edges: Vec<(usize, usize)> = self.edges.iter().map(|e| (e[0], e[1])).collect();
        Graph::from_one_based(self.n, &edges)
    }
}

pub fn betti(g: &Graph) -> usize {
    g.betti()
}

/// Sorted set of 0-based vertices; orders lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct VertexSet(Vec<usize>);

impl VertexSet {
    pub fn new(mut vs: Vec<usize>) -> Self {
        vs.sort_unstable();
        vs.dedup();
        Self(vs)
    }

    pub fn from_one_based(vs: &[usize]) -> Self {
        Self::new(vs.iter().map(|v| v - 1).collect())
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|v| v + 1).collect()
    }

    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for &v in &self.0 {
            m[v] = true;
        }
        m
    }

    pub fn complement(&self, n: usize) -> Self {
        let m = self.mask(n);
        Self((0..n).filter(|&v| !m[v]).collect())
    }

    /// Position of `v` within the set.
    pub fn position(&self, v: usize) -> Option<usize> {
        self.0.binary_search(&v).ok()
    }
}

/// Subgraph induced on a vertex set; may be disconnected or empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InducedSubgraph {
    /// Original labels, ascending; local index `i` is `vertices[i]`.
    pub vertices: Vec<usize>,
    /// Local edges `(i, j)`, `i < j`, sorted.
    pub edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
}

impl InducedSubgraph {
    pub fn n(&self) -> usize {
        self.vertices.len()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    /// Connected components as sorted lists of local indices, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.n();
        let mut comp = vec![usize::MAX; n];
        let mut out = Vec::new();
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = vec![start];
            comp[start] = id;
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                for &w in &self.adj[v] {
                    if comp[w] == usize::MAX {
                        comp[w] = id;
                        members.push(w);
                        stack.push(w);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.n() > 0 && self.components().len() == 1
    }

    /// `|E| - |V| + #components`.
    pub fn betti(&self) -> usize {
        self.edges.len() + self.components().len() - self.n()
    }

    /// Original-label edges.
    pub fn original_edges(&self) -> Vec<Edge> {
        self.edges.iter().map(|&(i, j)| (self.vertices[i], self.vertices[j])).collect()
    }

    /// Converts to a [`Graph`] on local labels when connected.
    pub fn to_graph(&self) -> Result<Graph, GraphError> {
        Graph::new(self.n(), &self.edges)
    }
}

pub fn induced_subgraph(g: &Graph, vs: &VertexSet) -> InducedSubgraph {
    let vertices = vs.as_slice().to_vec();
    let mut edges = Vec::new();
    let mut adj = vec![Vec::new(); vertices.len()];
    for (i, &v) in vertices.iter().enumerate() {
        for &w in g.neighbors(v) {
            if let Some(j) = vs.position(w) {
                adj[i].push(j);
                if i < j {
                    edges.push((i, j));
                }
            }
        }
    }
    edges.sort_unstable();
    InducedSubgraph { vertices, edges, adj }
}

/// Number of neighbours of `v` inside the set given by `mask`.
fn inside_count(g: &Graph, v: usize, mask: &[bool]) -> usize {
    g.neighbors(v).iter().filter(|&&w| mask[w]).count()
}

pub fn is_admissible_support(g: &Graph, v_n: &VertexSet) -> Result<bool, GraphError> {
    if v_n.is_empty() {
        return Err(GraphError::InvalidInput("empty support".into()));
    }
    if v_n.as_slice().iter().any(|&v| v >= g.n()) {
        return Err(GraphError::InvalidInput("support vertex out of range".into()));
    }
    Ok(admissibility_failure(g, v_n).is_none())
}

fn admissibility_failure(g: &Graph, v_n: &VertexSet) -> Option<String> {
    let mask = v_n.mask(g.n());
    for v in 0..g.n() {
        if !mask[v] {
            let c = inside_count(g, v, &mask);
            if c == 1 || c == 2 {
                return Some(format!("vertex {} has {c} neighbours in the support", v + 1));
            }
        }
    }
    if !induced_subgraph(g, v_n).is_connected() {
        return Some("induced subgraph is disconnected".into());
    }
    None
}

/// All admissible supports, largest first, lexicographic within a size.
///
/// Backtracks over the complement one vertex at a time; a branch dies as soon
/// as some outside vertex with an inside neighbour can no longer reach three.
pub fn enumerate_admissible_supports(g: &Graph) -> Vec<VertexSet> {
    let n = g.n();
    // 0 = undecided, 1 = inside, 2 = outside
    let mut state = vec![0u8; n];
    let mut out = Vec::new();
    backtrack(g, 0, &mut state, &mut out);
    sort_supports(&mut out);
    out
}

fn violates(g: &Graph, state: &[u8], v: usize) -> bool {
    if state[v] != 2 {
        return false;
    }
    let (mut inside, mut open) = (0, 0);
    for &w in g.neighbors(v) {
        match state[w] {
            0 => open += 1,
            1 => inside += 1,
            _ => {}
        }
    }
    inside >= 1 && inside + open < 3
}

fn backtrack(g: &Graph, v: usize, state: &mut Vec<u8>, out: &mut Vec<VertexSet>) {
    if v == g.n() {
        let vs = VertexSet((0..g.n()).filter(|&i| state[i] == 1).collect());
        if !vs.is_empty() && induced_subgraph(g, &vs).is_connected() {
            out.push(vs);
        }
        return;
    }
    for choice in [1u8, 2u8] {
        state[v] = choice;
        let bad = violates(g, state, v) || g.neighbors(v).iter().any(|&w| violates(g, state, w));
        if !bad {
            backtrack(g, v + 1, state, out);
        }
    }
    state[v] = 0;
}

fn sort_supports(v: &mut [VertexSet]) {
    v.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
}

/// Supports of a 3-regular graph: complements of independent sets whose
/// removal leaves a connected graph.
pub fn enumerate_supports_3regular(g: &Graph) -> Result<Vec<VertexSet>, GraphError> {
    if !g.is_regular(3) {
        return Err(GraphError::InvalidInput("graph is not 3-regular".into()));
    }
    let n = g.n();
    let mut out = Vec::new();
    let mut chosen = vec![false; n];
    fn rec(g: &Graph, v: usize, chosen: &mut Vec<bool>, out: &mut Vec<VertexSet>) {
        if v == g.n() {
            let vs = VertexSet((0..g.n()).filter(|&i| !chosen[i]).collect());
            if !vs.is_empty() && induced_subgraph(g, &vs).is_connected() {
                out.push(vs);
            }
            return;
        }
        rec(g, v + 1, chosen, out);
        if g.neighbors(v).iter().all(|&w| !chosen[w]) {
            chosen[v] = true;
            rec(g, v + 1, chosen, out);
            chosen[v] = false;
        }
    }
    rec(g, 0, &mut chosen, &mut out);
    sort_supports(&mut out);
    Ok(out)
}

/// Spanning tree with parent pointers, rooted at vertex 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanningTree {
    pub edges: Vec<Edge>,
    parent: Vec<Option<usize>>,
    depth: Vec<usize>,
    /// Vertices in BFS order from the root.
    order: Vec<usize>,
}

impl SpanningTree {
    fn from_edges(n: usize, edges: Vec<Edge>) -> Self {
        let mut adj = vec![Vec::new(); n];
        for &(r, s) in &edges {
            adj[r].push(s);
            adj[s].push(r);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        let mut parent = vec![None; n];
        let mut depth = vec![0; n];
        let mut seen = vec![false; n];
        let mut order = Vec::with_capacity(n);
        let mut q = VecDeque::from([0]);
        seen[0] = true;
        while let Some(v) = q.pop_front() {
            order.push(v);
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some(v);
                    depth[w] = depth[v] + 1;
                    q.push_back(w);
                }
            }
        }
        let mut edges = edges;
        edges.sort_unstable();
        Self { edges, parent, depth, order }
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    /// Vertices in breadth-first order from the root.
    pub fn bfs_order(&self) -> &[usize] {
        &self.order
    }

    pub fn contains(&self, e: Edge) -> bool {
        self.edges.binary_search(&e).is_ok()
    }

    /// Vertex path from `a` to `b` inside the tree.
    pub fn path(&self, a: usize, b: usize) -> Vec<usize> {
        let (mut x, mut y) = (a, b);
        let mut left = vec![x];
        let mut right = vec![y];
        while x != y {
            if self.depth[x] >= self.depth[y] {
                x = self.parent[x].expect("root reached");
                left.push(x);
            } else {
                y = self.parent[y].expect("root reached");
                right.push(y);
            }
        }
        right.pop();
        left.extend(right.into_iter().rev());
        left
    }

    /// Fundamental cycle of the free edge `(r, s)`: the closed walk
    /// `r -> s -> (tree) -> r`, as consecutive vertex pairs.
    pub fn fundamental_cycle(&self, free: Edge) -> Vec<(usize, usize)> {
        let (r, s) = free;
        let mut walk = vec![(r, s)];
        let p = self.path(s, r);
        walk.extend(p.windows(2).map(|w| (w[0], w[1])));
        walk
    }
}

/// Vertex and edge classes induced by an admissible support, with the adapted spanning tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportPartition {
    pub n: usize,
    pub v_n: VertexSet,
    pub v_zn: VertexSet,
    pub v_zz: VertexSet,
    pub e_nn: Vec<Edge>,
    pub e_zn: Vec<Edge>,
    pub e_zz: Vec<Edge>,
    pub tree: SpanningTree,
    pub free_nn: Vec<Edge>,
    pub free_zn: Vec<Edge>,
    pub free_zz: Vec<Edge>,
    /// For each vertex of `v_zn` (same order), its tree edge into `v_n`.
    pub zn_tree_edge: Vec<Edge>,
}

impl SupportPartition {
    pub fn tree_edges(&self) -> &[Edge] {
        &self.tree.edges
    }

    /// All free edges in lexicographic order; this is the coordinate order of the torus.
    pub fn free_edges(&self) -> Vec<Edge> {
        let mut all: Vec<Edge> =
            self.free_nn.iter().chain(&self.free_zn).chain(&self.free_zz).copied().collect();
        all.sort_unstable();
        all
    }

    pub fn is_whole(&self) -> bool {
        self.v_n.len() == self.n
    }

    /// `beta(G_N) = |E_NN| - |V_N| + 1`.
    pub fn betti_n(&self) -> usize {
        self.free_nn.len()
    }

    /// Neighbours of a `v_zn` vertex inside `v_n`, with its tree link last.
    pub fn zn_links(&self, g: &Graph, r: usize) -> Vec<usize> {
        let i = self.v_zn.position(r).expect("vertex not in V_ZN");
        let anchor = self.zn_tree_edge[i];
        let t = if anchor.0 == r { anchor.1 } else { anchor.0 };
        let mut out: Vec<usize> =
            g.neighbors(r).iter().copied().filter(|&s| self.v_n.contains(s) && s != t).collect();
        out.push(t);
        out
    }
}

/// Vertex and edge classes of an arbitrary vertex set, admissible or not.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportClasses {
    pub v_n: VertexSet,
    pub v_zn: VertexSet,
    pub v_zz: VertexSet,
    pub e_nn: Vec<Edge>,
    pub e_zn: Vec<Edge>,
    pub e_zz: Vec<Edge>,
}

pub fn support_classes(g: &Graph, v_n: &VertexSet) -> SupportClasses {
    let n = g.n();
    let in_n = v_n.mask(n);
    let v_zn = VertexSet((0..n).filter(|&v| !in_n[v] && inside_count(g, v, &in_n) > 0).collect());
    let in_zn = v_zn.mask(n);
    let v_zz = VertexSet((0..n).filter(|&v| !in_n[v] && !in_zn[v]).collect());
    let (mut e_nn, mut e_zn, mut e_zz) = (Vec::new(), Vec::new(), Vec::new());
    for &(r, s) in g.edges() {
        match (in_n[r], in_n[s]) {
            (true, true) => e_nn.push((r, s)),
            (false, false) => e_zz.push((r, s)),
            _ => e_zn.push((r, s)),
        }
    }
    SupportClasses { v_n: v_n.clone(), v_zn, v_zz, e_nn, e_zn, e_zz }
}

pub fn partition_for_support(g: &Graph, v_n: &VertexSet) -> Result<SupportPartition, GraphError> {
    if v_n.is_empty() {
        return Err(GraphError::InvalidInput("empty support".into()));
    }
    if let Some(why) = admissibility_failure(g, v_n) {
        return Err(GraphError::Inadmissible(why));
    }
    let n = g.n();
    let SupportClasses { v_zn, v_zz, e_nn, e_zn, e_zz, .. } = support_classes(g, v_n);
    let in_n = v_n.mask(n);

    let mut seen = vec![false; n];
    let mut tree = Vec::with_capacity(n - 1);
    // Step 1: BFS tree of G_N from its smallest vertex.
    let root = v_n.as_slice()[0];
    seen[root] = true;
    let mut q = VecDeque::from([root]);
    while let Some(v) = q.pop_front() {
        for &w in g.neighbors(v) {
            if in_n[w] && !seen[w] {
                seen[w] = true;
                tree.push(ordered(v, w));
                q.push_back(w);
            }
        }
    }
    // Step 2: each boundary vertex hangs off its smallest support neighbour.
    let mut zn_tree_edge = Vec::with_capacity(v_zn.len());
    for &r in v_zn.as_slice() {
        let s = *g.neighbors(r).iter().find(|&&s| in_n[s]).expect("boundary vertex without support neighbour");
        let e = ordered(r, s);
        tree.push(e);
        zn_tree_edge.push(e);
        seen[r] = true;
    }
    // Step 3: multi-source BFS from V_ZN through E_ZZ.
    let mut q: VecDeque<usize> = v_zn.as_slice().iter().copied().collect();
    while let Some(v) = q.pop_front() {
        for &w in g.neighbors(v) {
            if !in_n[w] && !seen[w] {
                seen[w] = true;
                tree.push(ordered(v, w));
                q.push_back(w);
            }
        }
    }
    debug_assert_eq!(tree.len(), n - 1);
    let tree = SpanningTree::from_edges(n, tree);
    let free = |es: &[Edge]| es.iter().copied().filter(|&e| !tree.contains(e)).collect::<Vec<_>>();
    let (free_nn, free_zn, free_zz) = (free(&e_nn), free(&e_zn), free(&e_zz));
    Ok(SupportPartition {
        n,
        v_n: v_n.clone(),
        v_zn,
        v_zz,
        e_nn,
        e_zn,
        e_zz,
        tree,
        free_nn,
        free_zn,
        free_zz,
        zn_tree_edge,
    })
}

/// Partition for the whole vertex set: the default gauge of the torus.
pub fn whole_partition(g: &Graph) -> SupportPartition {
    partition_for_support(g, &g.vertices()).expect("the full vertex set of a connected graph is admissible")
}

/// Kirchhoff count via an exact fraction-free determinant of a reduced Laplacian.
pub fn spanning_tree_count(g: &Graph) -> u128 {
    let m = g.n() - 1;
    if m == 0 {
        return 1;
    }
    let mut a = vec![vec![0i128; m]; m];
    for v in 0..m {
        a[v][v] = g.degree(v) as i128;
    }
    for &(r, s) in g.edges() {
        if r < m && s < m {
            a[r][s] = -1;
            a[s][r] = -1;
        }
    }
    // Bareiss elimination.
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..m {
        if a[k][k] == 0 {
            let Some(p) = (k + 1..m).find(|&i| a[i][k] != 0) else {
                return 0;
            };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..m {
            for j in k + 1..m {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    (sign * a[m - 1][m - 1]) as u128
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Graph {
        Graph::new(3, &[(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    fn k4() -> Graph {
        Graph::new(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap()
    }

    fn path(n: usize) -> Graph {
        Graph::new(n, &(0..n - 1).map(|i| (i, i + 1)).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn loader_rejects_bad_input() {
        assert_eq!(Graph::new(2, &[(0, 0)]), Err(GraphError::Loop(0)));
        assert_eq!(Graph::new(2, &[(0, 1), (1, 0)]), Err(GraphError::Duplicate((0, 1))));
        assert_eq!(Graph::new(3, &[(0, 1)]), Err(GraphError::Disconnected { unreached: 2 }));
        assert!(matches!(Graph::new(2, &[(0, 5)]), Err(GraphError::OutOfRange { .. })));
        let msg = Graph::new(3, &[(0, 1)]).unwrap_err().to_string();
        assert!(msg.contains("vertex 3"), "{msg}");
    }

    #[test]
    fn betti_numbers() {
        assert_eq!(triangle().betti(), 1);
        assert_eq!(path(5).betti(), 0);
        assert_eq!(k4().betti(), 3);
    }

    #[test]
    fn admissibility_examples() {
        let g = path(3);
        assert!(is_admissible_support(&g, &g.vertices()).unwrap());
        assert!(!is_admissible_support(&g, &VertexSet::new(vec![0, 2])).unwrap());
        assert!(is_admissible_support(&g, &VertexSet::default()).is_err());
        let k = k4();
        for skip in 0..4 {
            let vs = VertexSet::new((0..4).filter(|&v| v != skip).collect());
            assert!(is_admissible_support(&k, &vs).unwrap());
        }
    }

    #[test]
    fn k4_supports() {
        let s = enumerate_admissible_supports(&k4());
        assert_eq!(s.len(), 5);
        assert_eq!(s[0].len(), 4);
        assert_eq!(s[1], VertexSet::new(vec![0, 1, 2]));
        assert_eq!(s[4], VertexSet::new(vec![1, 2, 3]));
        assert_eq!(enumerate_supports_3regular(&k4()).unwrap(), s);
    }

    #[test]
    fn tree_has_only_full_support() {
        let g = Graph::new(6, &[(0, 1), (0, 2), (0, 3), (3, 4), (3, 5)]).unwrap();
        assert_eq!(enumerate_admissible_supports(&g), vec![g.vertices()]);
    }

    #[test]
    fn whole_partition_is_trivial() {
        let g = k4();
        let p = whole_partition(&g);
        assert!(p.v_zn.is_empty() && p.v_zz.is_empty());
        assert!(p.e_zn.is_empty() && p.e_zz.is_empty());
        assert_eq!(p.free_nn.len(), g.betti());
        assert_eq!(p.tree_edges(), &[(0, 1), (0, 2), (0, 3)]);
    }

    #[test]
    fn k4_three_vertex_partition() {
        let p = partition_for_support(&k4(), &VertexSet::new(vec![0, 1, 2])).unwrap();
        assert_eq!(p.e_zn.len(), 3);
        assert_eq!(p.free_zn.len(), 2);
        assert!(p.e_zz.is_empty());
        assert_eq!(p.zn_tree_edge, vec![(0, 3)]);
        assert_eq!(p.zn_links(&k4(), 3), vec![1, 2, 0]);
    }

    #[test]
    fn inadmissible_partition_rejected() {
        assert!(matches!(
            partition_for_support(&path(3), &VertexSet::new(vec![0, 2])),
            Err(GraphError::Inadmissible(_))
        ));
    }

    #[test]
    fn induced_subgraph_cases() {
        let g = k4();
        let full = induced_subgraph(&g, &g.vertices());
        assert_eq!(full.original_edges(), g.edges());
        let one = induced_subgraph(&g, &VertexSet::new(vec![2]));
        assert_eq!((one.n(), one.edges.len()), (1, 0));
        let none = induced_subgraph(&g, &VertexSet::default());
        assert_eq!(none.n(), 0);
        assert!(!none.is_connected());
    }

    #[test]
    fn spanning_tree_counts() {
        assert_eq!(spanning_tree_count(&triangle()), 3);
        assert_eq!(spanning_tree_count(&path(6)), 1);
        assert_eq!(spanning_tree_count(&k4()), 16);
        let k5: Vec<_> = (0..5).flat_map(|i| (i + 1..5).map(move |j| (i, j))).collect();
        assert_eq!(spanning_tree_count(&Graph::new(5, &k5).unwrap()), 125);
    }

    #[test]
    fn fundamental_cycle_closes() {
        let g = k4();
        let p = whole_partition(&g);
        for e in p.free_edges() {
            let c = p.tree.fundamental_cycle(e);
            assert_eq!(c.first().unwrap().0, c.last().unwrap().1);
            assert!(c.iter().all(|&(a, b)| g.has_edge(a, b)));
            assert_eq!(c.len(), 3);
        }
    }

    #[test]
    fn json_is_one_based() {
        let g = triangle();
        let j = g.to_json();
        assert_eq!(j.edges[0], [1, 2]);
        assert_eq!(j.to_graph().unwrap(), g);
        assert!(GraphJson { n: 2, edges: vec![[0, 1]] }.to_graph().is_err());
    }
}
