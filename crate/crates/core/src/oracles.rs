//! Brute-force checks that do not go through the critical-set construction:
//! finite differences, a torus grid search and exhaustive small instances.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde_json::json;

use crate::atlas::ManifoldReport;
use crate::graph::whole_partition;
use crate::linalg::{eig_symmetric, Inertia, RMat};
use crate::magnetic::{
    assemble, circle_distance, eigenpair, enumerate_signings, gradient, hessian_matrix, nodal_surplus, BaseMatrix,
    MagneticError, MagneticPoint,
};
use crate::tol;

/// Default step for second differences, meant for use with Richardson
/// extrapolation. Round-off grows like `eps / step^2` and the extrapolated
/// truncation error like `step^4 / gap^5`; this balances the two for gaps
/// down to about 0.1.
pub const HESSIAN_STEP: f64 = 2e-3;

/// Eigenvalues of a finite-difference Hessian within this multiple of
/// `max(1, |H|)` count as zero.
pub const FD_INERTIA_REL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error(transparent)]
    Magnetic(#[from] MagneticError),
    #[error("eigenvalue {k} is not simple inside the stencil")]
    GapCollapse { k: usize },
    #[error("instance too large: n = {n}, beta = {beta}")]
    TooLarge { n: usize, beta: usize },
}

fn lambda_at(h: &BaseMatrix, p: &MagneticPoint, k: usize) -> Result<f64, OracleError> {
    let m = assemble(h, p)?;
    match eigenpair(&m, k) {
        Ok(ep) => Ok(ep.lambda),
        Err(MagneticError::NonSmooth { .. }) => Err(OracleError::GapCollapse { k }),
        Err(e) => Err(e.into()),
    }
}

fn shifted(p: &MagneticPoint, moves: &[(usize, f64)]) -> MagneticPoint {
    let mut a = p.angles().to_vec();
    for &(j, d) in moves {
        a[j] += d;
    }
    p.with_angles(a)
}

fn central_gradient(h: &BaseMatrix, p: &MagneticPoint, k: usize, step: f64) -> Result<Vec<f64>, OracleError> {
    (0..p.dim())
        .map(|j| {
            let up = lambda_at(h, &shifted(p, &[(j, step)]), k)?;
            let down = lambda_at(h, &shifted(p, &[(j, -step)]), k)?;
            Ok((up - down) / (2.0 * step))
        })
        .collect()
}

/// Central-difference gradient of `lambda_k` in the free-edge coordinates of
/// `p`; with `richardson` the step-halved estimate is extrapolated.
pub fn fd_gradient(
    h: &BaseMatrix,
    p: &MagneticPoint,
    k: usize,
    step: f64,
    richardson: bool,
) -> Result<Vec<f64>, OracleError> {
    let coarse = central_gradient(h, p, k, step)?;
    if !richardson {
        return Ok(coarse);
    }
    let fine = central_gradient(h, p, k, step / 2.0)?;
    Ok(fine.iter().zip(&coarse).map(|(f, c)| (4.0 * f - c) / 3.0).collect())
}

fn central_hessian(h: &BaseMatrix, p: &MagneticPoint, k: usize, step: f64) -> Result<RMat, OracleError> {
    let b = p.dim();
    let f0 = lambda_at(h, p, k)?;
    let mut out = RMat::zeros(b, b);
    for i in 0..b {
        let up = lambda_at(h, &shifted(p, &[(i, step)]), k)?;
        let down = lambda_at(h, &shifted(p, &[(i, -step)]), k)?;
        out[(i, i)] = (up - 2.0 * f0 + down) / (step * step);
        for j in i + 1..b {
            let pp = lambda_at(h, &shifted(p, &[(i, step), (j, step)]), k)?;
            let pm = lambda_at(h, &shifted(p, &[(i, step), (j, -step)]), k)?;
            let mp = lambda_at(h, &shifted(p, &[(i, -step), (j, step)]), k)?;
            let mm = lambda_at(h, &shifted(p, &[(i, -step), (j, -step)]), k)?;
            let v = (pp - pm - mp + mm) / (4.0 * step * step);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    Ok(out)
}

/// Second-difference Hessian of `lambda_k`, symmetric by construction.
pub fn fd_hessian(
    h: &BaseMatrix,
    p: &MagneticPoint,
    k: usize,
    step: f64,
    richardson: bool,
) -> Result<RMat, OracleError> {
    let coarse = central_hessian(h, p, k, step)?;
    if !richardson {
        return Ok(coarse);
    }
    let fine = central_hessian(h, p, k, step / 2.0)?;
    Ok(RMat::from_fn(coarse.rows(), coarse.cols(), |r, c| (4.0 * fine[(r, c)] - coarse[(r, c)]) / 3.0))
}

/// Inertia of a finite-difference Hessian under [`FD_INERTIA_REL`].
pub fn fd_inertia(hess: &RMat) -> Inertia {
    if hess.rows() == 0 {
        return Inertia::default();
    }
    let (values, _) = eig_symmetric(hess).expect("symmetric eigensolver converges on small matrices");
    let t = FD_INERTIA_REL * tol::scale(hess.max_abs());
    let mut i = Inertia::default();
    for v in values {
        if v > t {
            i.n_plus += 1;
        } else if v < -t {
            i.n_minus += 1;
        } else {
            i.n_zero += 1;
        }
    }
    i
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateKind {
    Signing,
    OnManifold,
    Nonsmooth,
    Unmatched,
}

#[derive(Debug, Clone)]
pub struct Candidate {
    /// In the whole-graph gauge.
    pub point: MagneticPoint,
    pub gradient_norm: f64,
    /// Gap of `lambda_k` to the rest of the spectrum (0 when it collapsed).
    pub gap: f64,
    pub iterations: usize,
    pub kind: CandidateKind,
}

#[derive(Debug, Clone)]
pub struct GridSearchResult {
    pub k: usize,
    pub resolution: usize,
    pub cells: usize,
    pub seeds: usize,
    pub candidates: Vec<Candidate>,
}

impl GridSearchResult {
    pub fn to_json(&self) -> serde_json::Value {
        let c: Vec<_> = self
            .candidates
            .iter()
            .map(|c| {
                json!({
                    "point": c.point.to_json_map(),
                    "gradient_norm": c.gradient_norm,
                    "gap": c.gap,
                    "iterations": c.iterations,
                    "kind": c.kind,
                })
            })
            .collect();
        json!({"k": self.k, "resolution": self.resolution, "cells": self.cells, "seeds": self.seeds, "candidates": c})
    }

    /// Smooth candidates off the signings.
    pub fn off_signing(&self) -> impl Iterator<Item = &Candidate> {
        self.candidates.iter().filter(|c| matches!(c.kind, CandidateKind::OnManifold | CandidateKind::Unmatched))
    }

    /// Reclassifies every unmatched candidate lying within `dist` of a signing
    /// or of some critical set (measured to its projection).
    pub fn match_reports(&mut self, h: &BaseMatrix, reports: &[ManifoldReport], dist: f64) -> Result<(), MagneticError> {
        for c in self.candidates.iter_mut().filter(|c| c.kind == CandidateKind::Unmatched) {
            if c.point.torus_distance(&nearest_signing(&c.point)) < dist {
                c.kind = CandidateKind::Signing;
                continue;
            }
            for rep in reports.iter().filter(|r| r.nonempty && r.data.lambda.is_finite()) {
                let Ok(Some(q)) = rep.project(h, &c.point) else {
                    continue;
                };
                let q = q.in_gauge(h.graph(), &whole_partition(h.graph()))?;
                if q.torus_distance(&c.point) < dist {
                    c.kind = CandidateKind::OnManifold;
                    break;
                }
            }
        }
        Ok(())
    }
}

fn grad_sq(h: &BaseMatrix, p: &MagneticPoint, k: usize) -> Option<f64> {
    gradient(h, p, k).ok().map(|g| g.iter().map(|x| x * x).sum())
}

fn nearest_signing(p: &MagneticPoint) -> MagneticPoint {
    p.with_angles(p.angles().iter().map(|&a| if circle_distance(a, PI) < PI / 2.0 { PI } else { 0.0 }).collect())
}

fn is_signing(p: &MagneticPoint) -> bool {
    p.angles().iter().all(|&a| circle_distance(a, 0.0) < 1e-6 || circle_distance(a, PI) < 1e-6)
}

/// Damped Gauss-Newton on `|grad|^2`, using the pseudoinverse of the Hessian
/// so that it also converges onto positive-dimensional critical sets.
fn refine(h: &BaseMatrix, start: MagneticPoint, k: usize, refine_tol: f64) -> Candidate {
    let mut p = start;
    let nonsmooth = |p: MagneticPoint, it| Candidate {
        point: p,
        gradient_norm: f64::NAN,
        gap: 0.0,
        iterations: it,
        kind: CandidateKind::Nonsmooth,
    };
    for it in 0..=50 {
        let Ok(g) = gradient(h, &p, k) else {
            return nonsmooth(p, it);
        };
        let f: f64 = g.iter().map(|x| x * x).sum();
        if f.sqrt() <= refine_tol || it == 50 {
            let gap = assemble(h, &p).ok().and_then(|m| eigenpair(&m, k).ok()).map_or(0.0, |e| e.gap);
            let kind = if f.sqrt() > refine_tol {
                CandidateKind::Unmatched
            } else if is_signing(&p) {
                CandidateKind::Signing
            } else {
                CandidateKind::Unmatched
            };
            return Candidate { point: p, gradient_norm: f.sqrt(), gap, iterations: it, kind };
        }
        let Ok(hess) = hessian_matrix(h, &p, k) else {
            return nonsmooth(p, it);
        };
        let (vals, vecs) = eig_symmetric(&hess).expect("small symmetric matrix");
        let cut = 1e-8 * vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let b = g.len();
        let mut step = vec![0.0; b];
        for (c, &v) in vals.iter().enumerate() {
            if v.abs() > cut {
                let coef: f64 = (0..b).map(|r| vecs[(r, c)] * g[r]).sum::<f64>() / v;
                for r in 0..b {
                    step[r] -= coef * vecs[(r, c)];
                }
            }
        }
        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..30 {
            let q = p.with_angles(p.angles().iter().zip(&step).map(|(a, d)| a + t * d).collect());
            if let Some(fq) = grad_sq(h, &q, k) {
                if fq <= (1.0 - 1e-4 * t) * f {
                    p = q;
                    moved = true;
                    break;
                }
            }
            t /= 2.0;
        }
        if !moved {
            let gap = assemble(h, &p).ok().and_then(|m| eigenpair(&m, k).ok()).map_or(0.0, |e| e.gap);
            let kind = if gap == 0.0 { CandidateKind::Nonsmooth } else { CandidateKind::Unmatched };
            return Candidate { point: p, gradient_norm: f.sqrt(), gap, iterations: it, kind };
        }
    }
    unreachable!("loop returns by iteration 50")
}

/// Scans the torus (whole-graph gauge) at `resolution` points per circle,
/// refines every grid local minimum of `|grad lambda_k|^2`, and keeps the
/// converged points (`|grad| <= refine_tol`) and the nonsmooth ones.
pub fn grid_search_critical(
    h: &BaseMatrix,
    k: usize,
    resolution: usize,
    refine_tol: f64,
) -> Result<GridSearchResult, OracleError> {
    let g = h.graph();
    let free = whole_partition(g).free_edges();
    let beta = free.len();
    if beta > 4 {
        return Err(OracleError::TooLarge { n: g.n(), beta });
    }
    if k == 0 || k > g.n() {
        return Err(MagneticError::Label { k, n: g.n() }.into());
    }
    let cells = resolution.pow(beta as u32);
    let coords = |mut i: usize| -> Vec<usize> {
        let mut c = vec![0; beta];
        for slot in c.iter_mut().rev() {
            *slot = i % resolution;
            i /= resolution;
        }
        c
    };
    let index = |c: &[usize]| c.iter().fold(0, |acc, &x| acc * resolution + x);
    let point = |c: &[usize]| MagneticPoint::new(free.clone(), c.iter().map(|&x| TAU * x as f64 / resolution as f64).collect());
    let values: Vec<Option<f64>> = (0..cells).into_par_iter().map(|i| grad_sq(h, &point(&coords(i)), k)).collect();

    let seeds: Vec<usize> = (0..cells)
        .filter(|&i| {
            let Some(v) = values[i] else {
                return true;
            };
            let c = coords(i);
            (0..beta).all(|j| {
                [1, resolution - 1].iter().all(|&d| {
                    let mut nb = c.clone();
                    nb[j] = (nb[j] + d) % resolution;
                    values[index(&nb)].is_none_or(|w| v <= w)
                })
            })
        })
        .collect();

    let refined: Vec<Candidate> = seeds.par_iter().map(|&i| refine(h, point(&coords(i)), k, refine_tol)).collect();
    let mut candidates: Vec<Candidate> = Vec::new();
    for c in refined {
        let keep = match c.kind {
            CandidateKind::Nonsmooth => true,
            _ => c.gradient_norm <= refine_tol,
        };
        if keep && !candidates.iter().any(|o| o.kind == c.kind && o.point.torus_distance(&c.point) < tol::DEDUP_DIST) {
            candidates.push(c);
        }
    }
    Ok(GridSearchResult { k, resolution, cells, seeds: seeds.len(), candidates })
}

#[derive(Debug, Clone)]
pub struct SigningCheck {
    pub signing: String,
    pub k: usize,
    pub surplus: isize,
    pub hessian: Inertia,
}

#[derive(Debug, Clone)]
pub struct ExhaustiveReport {
    pub beta: usize,
    pub checks: Vec<SigningCheck>,
    /// `histograms[k - 1][sigma]` over signings.
    pub histograms: Vec<Vec<usize>>,
    /// Eigenpairs that are not simple or vanish somewhere.
    pub genericity_failures: Vec<String>,
    pub mismatches: Vec<String>,
}

impl ExhaustiveReport {
    pub fn pass(&self) -> bool {
        self.genericity_failures.is_empty() && self.mismatches.is_empty()
    }
}

/// For every signing and label: the finite-difference Hessian has index equal
/// to the nodal surplus and no kernel.
pub fn exhaustive_small_verify(h: &BaseMatrix) -> Result<ExhaustiveReport, OracleError> {
    let g = h.graph();
    let beta = g.betti();
    if g.n() > 8 || beta > 3 {
        return Err(OracleError::TooLarge { n: g.n(), beta });
    }
    let mut report = ExhaustiveReport {
        beta,
        checks: Vec::new(),
        histograms: vec![vec![0; beta + 1]; g.n()],
        genericity_failures: Vec::new(),
        mismatches: Vec::new(),
    };
    for s in enumerate_signings(h)? {
        let p = s.to_point();
        let m = assemble(h, &p)?;
        for k in 1..=g.n() {
            let ep = match eigenpair(&m, k) {
                Ok(ep) => ep,
                Err(e) => {
                    report.genericity_failures.push(format!("signing {}, k = {k}: {e}", s.bitstring()));
                    continue;
                }
            };
            if ep.psi.iter().any(|z| z.norm() <= tol::SUPPORT_ZERO) {
                report.genericity_failures.push(format!("signing {}, k = {k}: eigenvector vanishes", s.bitstring()));
                continue;
            }
            let surplus = nodal_surplus(&m, k, &ep.psi)?;
            let hess = fd_hessian(h, &p, k, HESSIAN_STEP, true)?;
            let inertia = fd_inertia(&hess);
            if inertia.n_minus as isize != surplus || inertia.n_zero != 0 {
                report.mismatches.push(format!(
                    "signing {}, k = {k}: surplus {surplus}, Hessian inertia {inertia}",
                    s.bitstring()
                ));
            }
            if (0..=beta as isize).contains(&surplus) {
                report.histograms[k - 1][surplus as usize] += 1;
            } else {
                report.mismatches.push(format!("signing {}, k = {k}: surplus {surplus} outside 0..={beta}", s.bitstring()));
            }
            report.checks.push(SigningCheck { signing: s.bitstring(), k, surplus, hessian: inertia });
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn fd_gradient_vanishes_at_signings() {
        let h = fixtures::default_matrix(fixtures::complete(4));
        for s in enumerate_signings(&h).unwrap() {
            for k in 1..=4 {
                let g = fd_gradient(&h, &s.to_point(), k, tol::FD_STEP, false).unwrap();
                assert!(g.iter().all(|x| x.abs() < 1e-7), "{g:?}");
            }
        }
    }

    #[test]
    fn tree_surpluses_are_zero() {
        let h = fixtures::default_matrix(fixtures::path(5));
        let r = exhaustive_small_verify(&h).unwrap();
        assert!(r.pass(), "{:?}", r.mismatches);
        assert!(r.checks.iter().all(|c| c.surplus == 0));
    }

    #[test]
    fn cycle_surpluses_are_binomial() {
        let h = fixtures::default_matrix(fixtures::cycle(5));
        let r = exhaustive_small_verify(&h).unwrap();
        assert!(r.pass(), "{:?} {:?}", r.mismatches, r.genericity_failures);
        for hist in &r.histograms {
            assert_eq!(hist, &vec![1, 1]);
        }
    }
}
