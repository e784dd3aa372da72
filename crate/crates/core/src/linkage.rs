//! Planar polygon spaces: solutions of `sum_j b_j e^{i theta_j} = 0` modulo rotation.
//!
//! The rotation is fixed by putting the last link on the negative real axis
//! (`theta_d = pi`), so a point is determined by its first `d - 1` angles.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::{svd, RMat, C64};
use crate::tol;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinkageError {
    #[error("link lengths must be positive and finite, got {0:?}")]
    InvalidLength(Vec<f64>),
    #[error("linkage is degenerate: a signed sum of {0:?} vanishes")]
    Degenerate(Vec<f64>),
    #[error("linkage space is empty")]
    Empty,
    #[error("no triangle with sides {0:?}")]
    NoTriangle([f64; 3]),
    #[error("sampling exhausted after {attempts} attempts ({found} of {wanted} points found)")]
    SamplingExhausted { attempts: usize, found: usize, wanted: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkageSpec {
    b: Vec<f64>,
}

impl LinkageSpec {
    pub fn new(b: Vec<f64>) -> Result<Self, LinkageError> {
        if b.is_empty() || b.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(LinkageError::InvalidLength(b));
        }
        Ok(Self { b })
    }

    pub fn lengths(&self) -> &[f64] {
        &self.b
    }

    pub fn d(&self) -> usize {
        self.b.len()
    }

    pub fn sum(&self) -> f64 {
        self.b.iter().sum()
    }

    /// Lengths sorted descending, padded with zeros to at least three entries.
    pub fn sorted_desc(&self) -> Vec<f64> {
        let mut s = self.b.clone();
        s.sort_by(|a, b| b.total_cmp(a));
        while s.len() < 3 {
            s.push(0.0);
        }
        s
    }

    /// Indices of the two longest links, ties broken by position.
    fn two_longest(&self, among: &[usize]) -> (usize, usize) {
        let mut idx = among.to_vec();
        idx.sort_by(|&i, &j| self.b[j].total_cmp(&self.b[i]).then(i.cmp(&j)));
        (idx[0], idx[1])
    }
}

/// Point of the linkage space in the gauge `theta_d = pi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkagePoint {
    pub thetas: Vec<f64>,
    pub residual: C64,
    /// Component label: always 0 for a connected space, 0 or 1 otherwise.
    pub component: usize,
}

impl LinkagePoint {
    /// The conjugate configuration `theta -> -theta`.
    pub fn conjugate(&self, spec: &LinkageSpec) -> Self {
        let thetas: Vec<f64> = self.thetas.iter().map(|&t| wrap(-t)).collect();
        finish(spec, thetas)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    Empty,
    Nonempty { dim: usize, components: usize },
}

impl Classification {
    pub fn is_nonempty(&self) -> bool {
        matches!(self, Self::Nonempty { .. })
    }

    pub fn components(&self) -> usize {
        match self {
            Self::Empty => 0,
            Self::Nonempty { components, .. } => *components,
        }
    }
}

pub(crate) fn wrap(t: f64) -> f64 {
    let r = t.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

pub fn residual(b: &[f64], thetas: &[f64]) -> C64 {
    b.iter().zip(thetas).map(|(&bj, &t)| C64::from_polar(bj, t)).sum()
}

/// True iff no signed sum `sum eps_j b_j` vanishes (relative slack `LINKAGE_SLACK`).
pub fn is_generic(spec: &LinkageSpec) -> bool {
    let b = &spec.b;
    let slack = tol::LINKAGE_SLACK * spec.sum();
    let d = b.len();
    // Fixing eps_0 = +1 covers every pattern up to global sign.
    let rest = &b[1..];
    let mut sums = vec![b[0]];
    for &x in rest {
        let mut next = Vec::with_capacity(sums.len() * 2);
        for s in sums {
            next.push(s + x);
            next.push(s - x);
        }
        sums = next;
    }
    debug_assert_eq!(sums.len(), 1 << (d - 1));
    sums.iter().all(|s| s.abs() > slack)
}

pub fn classify(spec: &LinkageSpec) -> Result<Classification, LinkageError> {
    if !is_generic(spec) {
        return Err(LinkageError::Degenerate(spec.b.clone()));
    }
    let half = spec.sum() / 2.0;
    let m = spec.sorted_desc();
    if spec.d() < 3 || m[0] >= half {
        return Ok(Classification::Empty);
    }
    let components = if m[1] + m[2] < half { 1 } else { 2 };
    Ok(Classification::Nonempty { dim: spec.d() - 3, components })
}

fn finish(spec: &LinkageSpec, mut thetas: Vec<f64>) -> LinkagePoint {
    let d = thetas.len();
    thetas[d - 1] = PI;
    for t in &mut thetas {
        *t = wrap(*t);
    }
    let residual = residual(&spec.b, &thetas);
    let component = component_label(spec, &thetas);
    LinkagePoint { thetas, residual, component }
}

/// 0/1 label from the orientation of the two longest links. On a space with two
/// components those links are never parallel, so the sign is constant on each.
pub fn component_label(spec: &LinkageSpec, thetas: &[f64]) -> usize {
    if spec.d() < 3 {
        return 0;
    }
    let m = spec.sorted_desc();
    if m[1] + m[2] < spec.sum() / 2.0 {
        return 0;
    }
    let all: Vec<usize> = (0..spec.d()).collect();
    let (i, j) = spec.two_longest(&all);
    if (thetas[j] - thetas[i]).sin() > 0.0 {
        0
    } else {
        1
    }
}

/// Both closed triangles with sides `b` (third link on the negative real axis),
/// upper one first.
pub fn solve_triangle(b: [f64; 3]) -> Result<[LinkagePoint; 2], LinkageError> {
    let spec = LinkageSpec::new(b.to_vec())?;
    let slack = tol::LINKAGE_SLACK * spec.sum();
    let [b1, b2, b3] = b;
    if b1 + b2 - b3 <= slack || b1 + b3 - b2 <= slack || b2 + b3 - b1 <= slack {
        return Err(LinkageError::NoTriangle(b));
    }
    let (t1, t2) = triangle_angles(b1, b2, C64::new(b3, 0.0));
    let up = finish(&spec, vec![t1, t2, PI]);
    let down = finish(&spec, vec![-t1, -t2, PI]);
    Ok([up, down])
}

/// Angles `(t1, t2)` with `b1 e^{i t1} + b2 e^{i t2} = w` and `t1` above `arg w`.
/// Caller guarantees `|b1 - b2| <= |w| <= b1 + b2`.
fn triangle_angles(b1: f64, b2: f64, w: C64) -> (f64, f64) {
    let r = w.norm();
    let c = ((b1 * b1 + r * r - b2 * b2) / (2.0 * b1 * r)).clamp(-1.0, 1.0);
    let t1 = w.arg() + c.acos();
    let rest = w - C64::from_polar(b1, t1);
    (t1, rest.arg())
}

/// Random points of the space, at least `count` on every component.
///
/// All but two of the free links get uniform random angles; the two longest
/// free links then close the polygon when the triangle inequality allows.
pub fn sample_points(spec: &LinkageSpec, count: usize, seed: u64) -> Result<Vec<LinkagePoint>, LinkageError> {
    let class = classify(spec)?;
    let Classification::Nonempty { components, .. } = class else {
        return Err(LinkageError::Empty);
    };
    let d = spec.d();
    if d == 3 {
        let b = [spec.b[0], spec.b[1], spec.b[2]];
        return Ok(solve_triangle(b)?.to_vec());
    }
    let free: Vec<usize> = (0..d - 1).collect();
    let (i, j) = spec.two_longest(&free);
    let others: Vec<usize> = free.iter().copied().filter(|&k| k != i && k != j).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut per = vec![0usize; components];
    let mut out = Vec::new();
    let budget = 2000 + 500 * count * components;
    let slack = tol::LINKAGE_SLACK * spec.sum();
    for _ in 0..budget {
        if per.iter().all(|&c| c >= count) {
            return Ok(out);
        }
        let mut thetas = vec![0.0; d];
        thetas[d - 1] = PI;
        let mut w = C64::new(spec.b[d - 1], 0.0);
        for &k in &others {
            thetas[k] = rng.random_range(0.0..TAU);
            w -= C64::from_polar(spec.b[k], thetas[k]);
        }
        let r = w.norm();
        let (bi, bj) = (spec.b[i], spec.b[j]);
        if r <= (bi - bj).abs() + slack || r >= bi + bj - slack {
            continue;
        }
        let (ti, tj) = triangle_angles(bi, bj, w);
        let mirror_i = 2.0 * w.arg() - ti;
        let mirror_j = 2.0 * w.arg() - tj;
        for (a, c) in [(ti, tj), (mirror_i, mirror_j)] {
            let mut th = thetas.clone();
            th[i] = a;
            th[j] = c;
            let p = finish(spec, th);
            if per[p.component] < count {
                per[p.component] += 1;
                out.push(p);
            }
        }
    }
    if per.iter().all(|&c| c >= count) {
        return Ok(out);
    }
    Err(LinkageError::SamplingExhausted { attempts: budget, found: out.len(), wanted: count * components })
}

/// Real 2 x (d-1) Jacobian of `theta -> sum b_j e^{i theta_j}` in the free angles.
pub fn jacobian(b: &[f64], thetas: &[f64]) -> RMat {
    let d = b.len();
    RMat::from_fn(2, d - 1, |r, c| if r == 0 { -b[c] * thetas[c].sin() } else { b[c] * thetas[c].cos() })
}

/// Smallest singular value of [`jacobian`].
pub fn jacobian_min_singular(b: &[f64], thetas: &[f64]) -> f64 {
    let s = svd(&jacobian(b, thetas).transpose());
    s.singular_values[1]
}

/// Gauss-Newton minimum-norm projection of arbitrary free angles onto the space.
/// Returns `None` when the iteration does not reach the residual tolerance.
pub fn project(spec: &LinkageSpec, start: &[f64]) -> Option<LinkagePoint> {
    let d = spec.d();
    let mut th: Vec<f64> = start.to_vec();
    th.resize(d, 0.0);
    th[d - 1] = PI;
    let target = 1e-13 * spec.sum();
    for _ in 0..100 {
        let f = residual(&spec.b, &th);
        if f.norm() <= target {
            return Some(finish(spec, th));
        }
        let j = jacobian(&spec.b, &th);
        // min-norm step: dx = -J^T (J J^T)^{-1} f
        let jjt = j.matmul(&j.transpose());
        let det = jjt[(0, 0)] * jjt[(1, 1)] - jjt[(0, 1)] * jjt[(1, 0)];
        if det.abs() < 1e-300 {
            return None;
        }
        let y0 = (jjt[(1, 1)] * f.re - jjt[(0, 1)] * f.im) / det;
        let y1 = (-jjt[(1, 0)] * f.re + jjt[(0, 0)] * f.im) / det;
        for c in 0..d - 1 {
            th[c] -= j[(0, c)] * y0 + j[(1, c)] * y1;
        }
    }
    let f = residual(&spec.b, &th);
    (f.norm() <= 1e-10 * spec.sum()).then(|| finish(spec, th))
}
