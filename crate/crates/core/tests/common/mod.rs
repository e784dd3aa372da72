#![allow(dead_code)]

use std::collections::BTreeSet;

use magcrit::atlas::check_genericity;
use magcrit::graph::Graph;
use magcrit::linalg::{CMat, HermMatrix, RMat, C64};
use magcrit::magnetic::BaseMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_cmat(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

pub fn random_rmat(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> RMat {
    RMat::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

pub fn random_herm(rng: &mut ChaCha8Rng, n: usize) -> HermMatrix {
    let a = random_cmat(rng, n, n);
    HermMatrix::symmetrize(a.add(&a.adjoint()))
}

/// Orthonormalized random columns (modified Gram-Schmidt), optionally with a
/// prescribed first column.
pub fn random_unitary(rng: &mut ChaCha8Rng, n: usize, first: Option<&[C64]>) -> CMat {
    let mut q = random_cmat(rng, n, n);
    if let Some(v) = first {
        q.set_column(0, v);
    }
    for c in 0..n {
        let mut v = q.column(c);
        for p in 0..c {
            let u = q.column(p);
            let dot: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in v.iter_mut().zip(&u) {
                *x -= dot * y;
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        for x in &mut v {
            *x /= norm;
        }
        q.set_column(c, &v);
    }
    q
}

/// `U diag(values) U*` for a random unitary `U` with the given first column.
pub fn herm_with_spectrum(rng: &mut ChaCha8Rng, values: &[f64], first: Option<&[C64]>) -> HermMatrix {
    let n = values.len();
    let u = random_unitary(rng, n, first);
    let d = CMat::from_fn(n, n, |r, c| if r == c { C64::new(values[r], 0.0) } else { C64::new(0.0, 0.0) });
    HermMatrix::symmetrize(u.matmul(&d).matmul(&u.adjoint()))
}

/// Random connected graph: a random tree plus `beta` extra edges.
pub fn random_connected_graph(rng: &mut ChaCha8Rng, n: usize, beta: usize) -> Graph {
    assert!(beta <= n * (n - 1) / 2 - (n - 1));
    let mut edges = BTreeSet::new();
    for v in 1..n {
        let u = rng.random_range(0..v);
        edges.insert((u, v));
    }
    let mut rest: Vec<(usize, usize)> =
        (0..n).flat_map(|r| (r + 1..n).map(move |s| (r, s))).filter(|e| !edges.contains(e)).collect();
    rest.shuffle(rng);
    edges.extend(rest.into_iter().take(beta));
    let edges: Vec<_> = edges.into_iter().collect();
    Graph::new(n, &edges).unwrap()
}

/// Random real symmetric matrix supported on `g`: edge weights of either sign
/// with modulus in [0.5, 1.5], diagonal in [-2, 2].
pub fn random_matrix(rng: &mut ChaCha8Rng, g: &Graph) -> BaseMatrix {
    let n = g.n();
    let mut m = RMat::zeros(n, n);
    for r in 0..n {
        m[(r, r)] = rng.random_range(-2.0..2.0);
    }
    for &(r, s) in g.edges() {
        let w = rng.random_range(0.5..1.5) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        m[(r, s)] = w;
        m[(s, r)] = w;
    }
    BaseMatrix::new(g.clone(), m).unwrap()
}

/// Draws random matrices on `g` until one passes the full genericity check.
pub fn random_generic_matrix(rng: &mut ChaCha8Rng, g: &Graph) -> BaseMatrix {
    for _ in 0..100 {
        let h = random_matrix(rng, g);
        if check_genericity(&h, 1 << 12).pass {
            return h;
        }
    }
    panic!("no generic matrix found in 100 draws");
}

/// Random generic instance on a connected graph with `n` vertices and first Betti number `beta`.
pub fn random_instance(rng: &mut ChaCha8Rng, n: usize, beta: usize) -> BaseMatrix {
    let g = random_connected_graph(rng, n, beta);
    random_generic_matrix(rng, &g)
}

pub fn herm_close(a: &CMat, b: &CMat, tol: f64) -> bool {
    a.sub(b).max_abs() <= tol * (1.0 + a.max_abs().max(b.max_abs()))
}

/// Monte Carlo closure test: with the last link fixed, random angles on the
/// others give radii on both sides of its length iff the polygon closes
/// (intermediate values on the connected torus). Returns (below, above) hits.
pub fn mc_closure(b: &[f64], trials: usize, rng: &mut ChaCha8Rng) -> (bool, bool) {
    let d = b.len();
    let target = b[d - 1];
    let (mut below, mut above) = (false, false);
    for _ in 0..trials {
        let mut w = C64::new(0.0, 0.0);
        for &bj in &b[..d - 1] {
            let t: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            w += C64::from_polar(bj, t);
        }
        let r = w.norm();
        below |= r <= target;
        above |= r >= target;
        if below && above {
            break;
        }
    }
    (below, above)
}

/// Components of a four-bar linkage space by sweeping the first angle: runs
/// of closable angles each carry one circle (both triangle branches meet at
/// the run ends), and a closable full turn carries two.
pub struct FourBarSweep {
    pub components: usize,
    /// Run index per grid point, `None` where the remaining triangle cannot close.
    runs: Vec<Option<usize>>,
    full_turn: bool,
}

impl FourBarSweep {
    pub fn new(b: &[f64], grid: usize) -> Self {
        assert_eq!(b.len(), 4);
        let ok: Vec<bool> = (0..grid)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / grid as f64;
                let r = (C64::new(b[3], 0.0) - C64::from_polar(b[0], t)).norm();
                (b[1] - b[2]).abs() < r && r < b[1] + b[2]
            })
            .collect();
        if ok.iter().all(|&x| x) {
            return Self { components: 2, runs: vec![Some(0); grid], full_turn: true };
        }
        let start = ok.iter().position(|&x| !x).unwrap();
        let mut runs = vec![None; grid];
        let mut count = 0;
        let mut in_run = false;
        for j in 1..=grid {
            let i = (start + j) % grid;
            if ok[i] {
                if !in_run {
                    count += 1;
                    in_run = true;
                }
                runs[i] = Some(count - 1);
            } else {
                in_run = false;
            }
        }
        Self { components: count, runs, full_turn: false }
    }

    /// Oracle component of a closed configuration in the gauge `theta_4 = pi`.
    pub fn component_of(&self, b: &[f64], thetas: &[f64]) -> usize {
        let grid = self.runs.len();
        let t = thetas[0].rem_euclid(std::f64::consts::TAU);
        let i = ((t / std::f64::consts::TAU * grid as f64).round() as usize) % grid;
        if self.full_turn {
            let w = C64::new(b[3], 0.0) - C64::from_polar(b[0], thetas[0]);
            usize::from((thetas[1] - w.arg()).sin() < 0.0)
        } else {
            self.runs[i].or(self.runs[(i + 1) % grid]).or(self.runs[(i + grid - 1) % grid]).expect("point off the sweep")
        }
    }
}

/// Random lengths in [0.2, 2] whose longest link is at least `margin * sum`
/// away from half the perimeter.
pub fn random_lengths(rng: &mut ChaCha8Rng, d: usize, margin: f64) -> Vec<f64> {
    loop {
        let b: Vec<f64> = (0..d).map(|_| rng.random_range(0.2..2.0)).collect();
        let sum: f64 = b.iter().sum();
        let max = b.iter().copied().fold(0.0, f64::max);
        let mut s = b.clone();
        s.sort_by(|x, y| y.total_cmp(x));
        let pair = if d >= 3 { s[1] + s[2] } else { 0.0 };
        if (sum - 2.0 * max).abs() > margin * sum && (sum - 2.0 * pair).abs() > margin * sum {
            return b;
        }
    }
}

/// Standard normal CDF by composite Simpson quadrature of the density.
pub fn phi(x: f64) -> f64 {
    let steps = 40_000;
    let h = x / steps as f64;
    let f = |t: f64| (-t * t / 2.0).exp() / std::f64::consts::TAU.sqrt();
    let mut s = f(0.0) + f(x);
    for i in 1..steps {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    0.5 + s * h / 3.0
}

pub fn binomial(n: u64) -> Vec<u64> {
    let mut row = vec![1u64];
    for _ in 0..n {
        let mut next = vec![1u64; row.len() + 1];
        for i in 1..row.len() {
            next[i] = row[i - 1] + row[i];
        }
        row = next;
    }
    row
}

/// KS distance of the standardized Bin(n, 1/2) to N(0, 1), from the step
/// function's one-sided limits at each atom.
pub fn binomial_ks(n: u64) -> f64 {
    let counts = binomial(n);
    let total = (1u64 << n) as f64;
    let (mean, std) = (n as f64 / 2.0, (n as f64).sqrt() / 2.0);
    let mut cum = 0.0;
    let mut sup = 0.0f64;
    for (s, &c) in counts.iter().enumerate() {
        let p = phi((s as f64 - mean) / std);
        sup = sup.max((p - cum / total).abs());
        cum += c as f64;
        sup = sup.max((cum / total - p).abs());
    }
    sup
}
