//! Critical sets of eigenvalues on the magnetic torus.
//!
//! Every critical point of a simple eigenvalue comes from critical data: a
//! support `V_N`, a signing of `h` on it, and a simple eigenpair of that
//! signing. The rest of the point is a product of polygon spaces, one per
//! boundary vertex, times a torus of free residual edges.

mod existence;
mod genericity;

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::graph::{enumerate_admissible_supports, partition_for_support, GraphError, SupportPartition, VertexSet};
use crate::linalg::{eig_herm, EigenSystem, HermMatrix, LinalgError, RMat, C64};
use crate::linkage::{self, classify, LinkageError, LinkagePoint, LinkageSpec};
use crate::magnetic::{
    assemble_form, critical_residual, signings_over, BaseMatrix, MagneticError, MagneticPoint, OneForm, Signing,
    DEFAULT_SIGNING_CAP,
};
use crate::tol;

pub use existence::{
    construct_existence_instance, stability_probe, ExistenceBlocks, ExistenceInstance, StabilityReport, StabilityTrial,
};
pub use genericity::{check_genericity, GenericityReport, GenericityScope};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AtlasError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Magnetic(#[from] MagneticError),
    #[error(transparent)]
    Linkage(#[from] LinkageError),
    #[error("matrix is not generic: {0}")]
    NotGeneric(String),
    #[error("invalid critical data: {0}")]
    InvalidData(String),
    #[error("eigenpair residual {residual:.3e} exceeds {tolerance:.3e}")]
    EigenResidual { residual: f64, tolerance: f64 },
    #[error("lambda = {lambda} lies in the spectrum of the {block} block")]
    SpectralClash { lambda: f64, block: &'static str },
    #[error("graph is not 3-regular")]
    NotCubic,
    #[error("{0}")]
    Construction(String),
}

/// `(V_N, signing of h on G_N, k_N)` with the resulting eigenpair.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalData {
    pub v_n: VertexSet,
    /// Signs on the free edges of `G_N` in the support's own gauge.
    pub signing_n: Signing,
    /// 1-based label of `lambda` in the signed support block.
    pub k_n: usize,
    pub lambda: f64,
    /// Unit eigenvector on `V_N`, in the order of `v_n`.
    pub psi_n: Vec<f64>,
}

impl CriticalData {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "v_n": self.v_n.one_based(),
            "signing_n": self.signing_n.bitstring(),
            "k_n": self.k_n,
            "lambda": self.lambda,
            "psi_n": self.psi_n,
        })
    }
}

/// `h` on `G_N` with the signing applied, indexed by position in `v_n`.
pub fn support_block(h: &BaseMatrix, v_n: &VertexSet, signing: &Signing) -> RMat {
    let idx = v_n.as_slice();
    let mut m = h.matrix().select(idx, idx);
    for (&(r, s), &minus) in signing.free_edges().iter().zip(signing.minus()) {
        if minus {
            let (a, b) = (v_n.position(r).expect("edge in support"), v_n.position(s).expect("edge in support"));
            m[(a, b)] = -m[(a, b)];
            m[(b, a)] = -m[(b, a)];
        }
    }
    m
}

fn real_system(m: &RMat) -> Result<EigenSystem, AtlasError> {
    Ok(eig_herm(&HermMatrix::from_real(m)?)?)
}

/// Why an eigenpair of a signed block fails genericity, if it does.
pub(crate) fn eigenpair_defect(sys: &EigenSystem, k: usize) -> Option<String> {
    if !sys.is_simple(k) {
        return Some(format!("eigenvalue {} is not simple (gap {:.3e})", k + 1, sys.min_gap(k)));
    }
    let small = (0..sys.dim()).map(|r| sys.vectors[(r, k)].norm()).fold(f64::INFINITY, f64::min);
    if small <= tol::SUPPORT_ZERO {
        return Some(format!("eigenvector {} has a vanishing entry ({small:.3e})", k + 1));
    }
    None
}

fn data_for_support(h: &BaseMatrix, v_n: &VertexSet) -> Result<Vec<CriticalData>, AtlasError> {
    let p = partition_for_support(h.graph(), v_n)?;
    let mut out = Vec::new();
    for signing in signings_over(&p.free_nn, DEFAULT_SIGNING_CAP)? {
        let sys = real_system(&support_block(h, v_n, &signing))?;
        for k in 0..sys.dim() {
            if let Some(why) = eigenpair_defect(&sys, k) {
                return Err(AtlasError::NotGeneric(format!(
                    "support {:?}, signing {}: {why}",
                    v_n.one_based(),
                    signing.bitstring()
                )));
            }
            out.push(CriticalData {
                v_n: v_n.clone(),
                signing_n: signing.clone(),
                k_n: k + 1,
                lambda: sys.values[k],
                psi_n: (0..sys.dim()).map(|r| sys.vectors[(r, k)].re).collect(),
            });
        }
    }
    Ok(out)
}

/// Critical data for one support, signing (index into the lexicographic
/// signings of its free edges) and 1-based label.
pub fn critical_data_for(
    h: &BaseMatrix,
    v_n: &VertexSet,
    signing_index: u64,
    k_n: usize,
) -> Result<CriticalData, AtlasError> {
    let p = partition_for_support(h.graph(), v_n)?;
    if signing_index >> p.free_nn.len() != 0 {
        return Err(AtlasError::InvalidData(format!("signing {signing_index} out of range")));
    }
    let signing = Signing::from_index(p.free_nn.clone(), signing_index);
    let sys = real_system(&support_block(h, v_n, &signing))?;
    if k_n == 0 || k_n > sys.dim() {
        return Err(AtlasError::InvalidData(format!("k_n = {k_n} out of range")));
    }
    if let Some(why) = eigenpair_defect(&sys, k_n - 1) {
        return Err(AtlasError::NotGeneric(why));
    }
    Ok(CriticalData {
        v_n: v_n.clone(),
        signing_n: signing,
        k_n,
        lambda: sys.values[k_n - 1],
        psi_n: (0..sys.dim()).map(|r| sys.vectors[(r, k_n - 1)].re).collect(),
    })
}

/// Critical data for every admissible support, signing and label, ordered by
/// support (largest first), then signing index, then label.
pub fn enumerate_critical_data(h: &BaseMatrix) -> Result<Vec<CriticalData>, AtlasError> {
    let supports = enumerate_admissible_supports(h.graph());
    let per: Vec<_> = supports.par_iter().map(|v_n| data_for_support(h, v_n)).collect::<Result<_, _>>()?;
    Ok(per.into_iter().flatten().collect())
}

/// Extremal type of a critical point in the directions normal to its critical set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Extremum {
    Min,
    Max,
    Saddle,
    #[serde(rename = "n/a")]
    NotApplicable,
}

impl std::fmt::Display for Extremum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Extremum::Min => "min",
            Extremum::Max => "max",
            Extremum::Saddle => "saddle",
            Extremum::NotApplicable => "n/a",
        })
    }
}

/// Label data that determine the normal Morse index of a critical point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MorseLabels {
    pub sigma_n: usize,
    pub beta_n: usize,
    pub v_zn: usize,
    pub k: usize,
    pub k_zz: usize,
    pub k_n: usize,
}

impl MorseLabels {
    pub fn index(&self) -> isize {
        self.sigma_n as isize + 2 * self.v_zn as isize - 2 * (self.k as isize - self.k_zz as isize - self.k_n as isize)
    }
}

/// Min, max or saddle from the labels; `None` when the index is undefined.
pub fn classify_extremum(labels: Option<&MorseLabels>) -> Extremum {
    let Some(l) = labels else {
        return Extremum::NotApplicable;
    };
    if l.sigma_n == 0 && l.k == l.v_zn + l.k_zz + l.k_n {
        Extremum::Min
    } else if l.sigma_n == l.beta_n && l.k == l.k_zz + l.k_n {
        Extremum::Max
    } else {
        Extremum::Saddle
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkageEntry {
    /// Boundary vertex (0-based).
    pub vertex: usize,
    /// Its support neighbours, tree link last.
    pub links: Vec<usize>,
    pub spec: LinkageSpec,
    pub nonempty: bool,
    pub components: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldSample {
    pub point: MagneticPoint,
    /// Index of the product component the point was drawn from.
    pub component: usize,
    /// 1-based label of `lambda` in `h_a`; the lowest one when it is multiple.
    pub k: usize,
    pub k_zz: usize,
    pub simple: bool,
    pub zz_resonant: bool,
    pub morse_index: Option<isize>,
    pub extremum: Extremum,
    /// `max |Im((h_a)_rs conj(psi_r) psi_s)|` for the constructed eigenvector.
    pub critical_residual: f64,
}

impl ManifoldSample {
    fn to_json(&self) -> serde_json::Value {
        json!({
            "point": self.point.to_json_map(),
            "component": self.component,
            "k": self.k,
            "k_zz": self.k_zz,
            "simple": self.simple,
            "zz_resonant": self.zz_resonant,
            "morse_index": self.morse_index,
            "extremum": self.extremum,
            "critical_residual": self.critical_residual,
        })
    }
}

#[derive(Debug, Clone)]
pub struct ManifoldReport {
    pub data: CriticalData,
    pub partition: SupportPartition,
    pub nonempty: bool,
    pub dim: usize,
    pub codim: usize,
    pub components: usize,
    pub sigma_n: usize,
    pub linkages: Vec<LinkageEntry>,
    pub samples: Vec<ManifoldSample>,
    /// Eigenvector on all of `V`, zero off the support.
    pub psi: Vec<f64>,
}

pub const CSV_HEADER: &str = "support_size,beta_GN,k_N,lambda,nonempty,dim,components,sample_count,min_index,max_index";

impl ManifoldReport {
    pub fn beta_n(&self) -> usize {
        self.partition.betti_n()
    }

    pub fn min_index(&self) -> Option<isize> {
        self.samples.iter().filter_map(|s| s.morse_index).min()
    }

    pub fn max_index(&self) -> Option<isize> {
        self.samples.iter().filter_map(|s| s.morse_index).max()
    }

    pub fn csv_row(&self) -> String {
        let opt = |x: Option<isize>| x.map(|v| v.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{:.12e},{},{},{},{},{},{}",
            self.data.v_n.len(),
            self.beta_n(),
            self.data.k_n,
            self.data.lambda,
            self.nonempty,
            self.dim,
            self.components,
            self.samples.len(),
            opt(self.min_index()),
            opt(self.max_index()),
        )
    }

    pub fn to_json(&self) -> serde_json::Value {
        let linkages: Vec<_> = self
            .linkages
            .iter()
            .map(|l| {
                json!({
                    "vertex": l.vertex + 1,
                    "links": l.links.iter().map(|s| s + 1).collect::<Vec<_>>(),
                    "lengths": l.spec.lengths(),
                    "nonempty": l.nonempty,
                    "components": l.components,
                })
            })
            .collect();
        json!({
            "data": self.data.to_json(),
            "nonempty": self.nonempty,
            "dim": self.dim,
            "codim": self.codim,
            "components": self.components,
            "sigma_n": self.sigma_n,
            "linkages": linkages,
            "samples": self.samples.iter().map(ManifoldSample::to_json).collect::<Vec<_>>(),
        })
    }

    fn labels(&self, k: usize, k_zz: usize) -> MorseLabels {
        MorseLabels {
            sigma_n: self.sigma_n,
            beta_n: self.beta_n(),
            v_zn: self.partition.v_zn.len(),
            k,
            k_zz,
            k_n: self.data.k_n,
        }
    }

    /// Edge weights `h_rs psi_s` of boundary vertex number `i`, in link order.
    fn link_weights(&self, h: &BaseMatrix, i: usize) -> Vec<f64> {
        let l = &self.linkages[i];
        l.links.iter().map(|&s| h.entry(l.vertex, s) * self.psi[s]).collect()
    }

    /// Base one-form: the signing on `G_N`, zero elsewhere.
    fn base_form(&self, h: &BaseMatrix) -> OneForm {
        let mut a = OneForm::zero(h.graph());
        for (&(r, s), &m) in self.data.signing_n.free_edges().iter().zip(self.data.signing_n.minus()) {
            if m {
                a.set(r, s, PI);
            }
        }
        a
    }

    fn write_linkage(&self, h: &BaseMatrix, a: &mut OneForm, i: usize, thetas: &[f64]) {
        write_polygon(a, self.linkages[i].vertex, &self.linkages[i].links, &self.link_weights(h, i), thetas);
    }

    fn read_linkage(&self, h: &BaseMatrix, a: &OneForm, i: usize) -> Vec<f64> {
        let l = &self.linkages[i];
        let c = self.link_weights(h, i);
        let flip = |x: f64| if x < 0.0 { PI } else { 0.0 };
        let mut th: Vec<f64> = l.links.iter().zip(&c).map(|(&s, &cs)| a.value(l.vertex, s) + flip(cs)).collect();
        let shift = th[th.len() - 1] - PI;
        for t in &mut th {
            *t -= shift;
        }
        th
    }

    /// Nearest point of the critical set to `p` (any gauge), reached by
    /// projecting each boundary polygon; `None` if a projection fails.
    pub fn project(&self, h: &BaseMatrix, p: &MagneticPoint) -> Result<Option<MagneticPoint>, AtlasError> {
        if !self.nonempty {
            return Ok(None);
        }
        let g = h.graph();
        let local = p.in_gauge(g, &self.partition)?.to_one_form(g)?;
        let mut a = self.base_form(h);
        for &(r, s) in &self.partition.free_zz {
            a.set(r, s, local.value(r, s));
        }
        for i in 0..self.linkages.len() {
            let th = self.read_linkage(h, &local, i);
            let Some(q) = linkage::project(&self.linkages[i].spec, &th[..th.len() - 1]) else {
                return Ok(None);
            };
            self.write_linkage(h, &mut a, i, &q.thetas);
        }
        Ok(Some(crate::magnetic::gauge_reduce(&a, &self.partition)))
    }

    /// Spectral bookkeeping for one point of the critical set.
    fn evaluate(&self, h: &BaseMatrix, a: &OneForm, component: usize) -> Result<ManifoldSample, AtlasError> {
        let m = assemble_form(h, a);
        let lambda = self.data.lambda;
        let psi: Vec<C64> = self.psi.iter().map(|&x| C64::new(x, 0.0)).collect();
        let hv = m.mul_vec(&psi);
        let residual = hv.iter().zip(&psi).map(|(a, b)| (a - b * lambda).norm_sqr()).sum::<f64>().sqrt();
        let sys = eig_herm(&m)?;
        let tolerance = tol::CRITICAL_REL * tol::scale(h.frobenius());
        if residual > tolerance {
            return Err(AtlasError::EigenResidual { residual, tolerance });
        }
        let near = sys.indices_near(lambda);
        let k = sys.count_below(lambda) + 1;
        let simple = near.len() == 1 && sys.is_simple(near[0]);
        let (k_zz, zz_resonant) = if self.partition.v_zz.is_empty() {
            (0, false)
        } else {
            let zsys = eig_herm(&m.principal(self.partition.v_zz.as_slice()))?;
            let dist = zsys.values.iter().map(|v| (v - lambda).abs()).fold(f64::INFINITY, f64::min);
            let resonant = dist <= tol::ZZ_RESONANCE_REL * zsys.scale().max(sys.scale());
            (zsys.values.iter().filter(|&&v| v < lambda).count(), resonant)
        };
        let labels = self.labels(k, k_zz);
        let defined = simple && !zz_resonant;
        let morse_index = defined.then(|| labels.index());
        let extremum = classify_extremum(defined.then_some(&labels));
        Ok(ManifoldSample {
            point: crate::magnetic::gauge_reduce(a, &self.partition),
            component,
            k,
            k_zz,
            simple,
            zz_resonant,
            morse_index,
            extremum,
            critical_residual: critical_residual(&m, h.graph(), &psi),
        })
    }

    /// Morse data at a point of the critical set given in any gauge.
    pub fn evaluate_point(&self, h: &BaseMatrix, p: &MagneticPoint) -> Result<ManifoldSample, AtlasError> {
        let g = h.graph();
        let a = p.in_gauge(g, &self.partition)?.to_one_form(g)?;
        let comp = (0..self.linkages.len()).fold(0, |acc, i| {
            let th = self.read_linkage(h, &a, i);
            acc * self.linkages[i].components + linkage::component_label(&self.linkages[i].spec, &th)
        });
        self.evaluate(h, &a, comp)
    }

    /// Evaluates the point with the given polygon angles per boundary vertex
    /// and residual free-edge angles (in `partition.free_zz` order).
    pub fn point_from_parts(
        &self,
        h: &BaseMatrix,
        polygons: &[Vec<f64>],
        zz_angles: &[f64],
    ) -> Result<ManifoldSample, AtlasError> {
        let mut a = self.base_form(h);
        for (i, th) in polygons.iter().enumerate() {
            self.write_linkage(h, &mut a, i, th);
        }
        for (&(r, s), &t) in self.partition.free_zz.iter().zip(zz_angles) {
            a.set(r, s, t);
        }
        let comp = polygons
            .iter()
            .enumerate()
            .fold(0, |acc, (i, th)| acc * self.linkages[i].components + linkage::component_label(&self.linkages[i].spec, th));
        self.evaluate(h, &a, comp)
    }
}

/// Sets `a_rs` on the links of boundary vertex `r` so that
/// `sum_s e^{i a_rs} c_s = 0`, given a polygon `thetas` for the lengths `|c_s|`.
/// The last link (the tree edge) gets phase 0.
pub(crate) fn write_polygon(a: &mut OneForm, r: usize, links: &[usize], c: &[f64], thetas: &[f64]) {
    let flip = |x: f64| if x < 0.0 { PI } else { 0.0 };
    let d = links.len();
    let delta = flip(c[d - 1]) - thetas[d - 1];
    for (j, &s) in links.iter().enumerate() {
        a.set(r, s, thetas[j] + delta - flip(c[j]));
    }
}

fn nodal_count_real(m: &RMat, psi: &[f64]) -> usize {
    let n = psi.len();
    (0..n).flat_map(|r| (r + 1..n).map(move |s| (r, s))).filter(|&(r, s)| m[(r, s)] * psi[r] * psi[s] > 0.0).count()
}

/// Mixed-radix digits of `i` with the given bases, most significant first.
fn digits(mut i: usize, bases: &[usize]) -> Vec<usize> {
    let mut out = vec![0; bases.len()];
    for j in (0..bases.len()).rev() {
        out[j] = i % bases[j];
        i /= bases[j];
    }
    out
}

/// Critical set of `data`: its topology from the boundary polygons, and
/// sampled points with their Morse data.
///
/// Zero-dimensional sets are listed completely. Otherwise
/// `max(samples, components)` points are drawn, cycling through components.
pub fn build_manifold(
    h: &BaseMatrix,
    data: &CriticalData,
    samples: usize,
    seed: u64,
) -> Result<ManifoldReport, AtlasError> {
    let g = h.graph();
    let partition = partition_for_support(g, &data.v_n)?;
    if data.signing_n.free_edges() != partition.free_nn.as_slice() {
        return Err(AtlasError::InvalidData("signing is not over the support's free edges".into()));
    }
    let block = support_block(h, &data.v_n, &data.signing_n);
    let nv = data.v_n.len();
    if data.psi_n.len() != nv {
        return Err(AtlasError::InvalidData("eigenvector length differs from the support size".into()));
    }
    let res = (0..nv)
        .map(|r| ((0..nv).map(|s| block[(r, s)] * data.psi_n[s]).sum::<f64>() - data.lambda * data.psi_n[r]).powi(2))
        .sum::<f64>()
        .sqrt();
    if res > tol::CRITICAL_REL * tol::scale(h.frobenius()) {
        return Err(AtlasError::InvalidData(format!("(h_N - lambda) psi_N has norm {res:.3e}")));
    }
    let nodal = nodal_count_real(&block, &data.psi_n);
    let sigma_n = (nodal + 1).checked_sub(data.k_n).ok_or_else(|| {
        AtlasError::InvalidData(format!("nodal count {nodal} is below k_N - 1 = {}", data.k_n - 1))
    })?;

    let mut psi = vec![0.0; g.n()];
    for (i, &v) in data.v_n.as_slice().iter().enumerate() {
        psi[v] = data.psi_n[i];
    }

    let mut linkages = Vec::with_capacity(partition.v_zn.len());
    for &r in partition.v_zn.as_slice() {
        let links = partition.zn_links(g, r);
        let spec = LinkageSpec::new(links.iter().map(|&s| (h.entry(r, s) * psi[s]).abs()).collect())?;
        let class = classify(&spec)?;
        linkages.push(LinkageEntry {
            vertex: r,
            links,
            spec,
            nonempty: class.is_nonempty(),
            components: class.components(),
        });
    }
    let nonempty = linkages.iter().all(|l| l.nonempty);
    let components = if nonempty { linkages.iter().map(|l| l.components).product() } else { 0 };
    let (ezn, ezz, vzn, vzz) =
        (partition.e_zn.len(), partition.e_zz.len(), partition.v_zn.len(), partition.v_zz.len());
    let dim = (ezn + ezz) - 3 * vzn - vzz;
    let codim = partition.betti_n() + 2 * vzn;

    let mut report = ManifoldReport {
        data: data.clone(),
        partition,
        nonempty,
        dim,
        codim,
        components,
        sigma_n,
        linkages,
        samples: Vec::new(),
        psi,
    };
    if !nonempty {
        return Ok(report);
    }

    let bases: Vec<usize> = report.linkages.iter().map(|l| l.components).collect();
    let count = if dim == 0 { components } else { samples.max(components) };
    let per_component = count.div_ceil(components).max(1);
    // pools[i][c] = sampled polygons of vertex i on component c
    let mut pools = Vec::with_capacity(report.linkages.len());
    for (i, l) in report.linkages.iter().enumerate() {
        let want = if l.spec.d() == 3 { 1 } else { per_component };
        let pts = linkage::sample_points(&l.spec, want, seed.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(i as u64 + 1)))?;
        let mut by: Vec<Vec<LinkagePoint>> = vec![Vec::new(); l.components];
        for p in pts {
            by[p.component].push(p);
        }
        pools.push(by);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zz = report.partition.free_zz.len();
    let mut out: Vec<ManifoldSample> = Vec::with_capacity(count);
    for j in 0..count {
        let comp = digits(j % components, &bases);
        let round = j / components;
        let polygons: Vec<Vec<f64>> = comp
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let pool = &pools[i][c];
                pool[round % pool.len()].thetas.clone()
            })
            .collect();
        let zz_angles: Vec<f64> = (0..zz).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
        let s = report.point_from_parts(h, &polygons, &zz_angles)?;
        if dim == 0 && out.iter().any(|o| o.point.torus_distance(&s.point) < tol::DEDUP_DIST) {
            continue;
        }
        out.push(s);
    }
    report.samples = out;
    Ok(report)
}

/// Number of critical points of a zero-dimensional critical set in a cubic
/// graph: `2^{n - |V_N|}` when every boundary triangle closes, else 0.
pub fn count_3regular_points(h: &BaseMatrix, data: &CriticalData) -> Result<u64, AtlasError> {
    let g = h.graph();
    if !g.is_regular(3) {
        return Err(AtlasError::NotCubic);
    }
    let p = partition_for_support(g, &data.v_n)?;
    let mut psi = vec![0.0; g.n()];
    for (i, &v) in data.v_n.as_slice().iter().enumerate() {
        psi[v] = data.psi_n[i];
    }
    for &r in p.v_zn.as_slice() {
        let b: Vec<f64> = p.zn_links(g, r).iter().map(|&s| (h.entry(r, s) * psi[s]).abs()).collect();
        if !triangle_closes(&b) {
            return Ok(0);
        }
    }
    Ok(1u64 << (g.n() - data.v_n.len()))
}

/// Strict triangle inequality for three lengths.
pub(crate) fn triangle_closes(b: &[f64]) -> bool {
    let sum: f64 = b.iter().sum();
    let max = b.iter().copied().fold(0.0, f64::max);
    b.len() == 3 && sum - 2.0 * max > tol::LINKAGE_SLACK * sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, IndexJump, Multiplicity};

    fn data_for(h: &BaseMatrix, v_n: VertexSet, k_n: usize) -> CriticalData {
        critical_data_for(h, &v_n, 0, k_n).unwrap()
    }

    #[test]
    fn index_jump_topology() {
        let h = IndexJump::matrix();
        let d = data_for(&h, IndexJump::support(), 1);
        assert!(d.lambda.abs() < 1e-12);
        let rep = build_manifold(&h, &d, 16, 7).unwrap();
        assert!(rep.nonempty);
        assert_eq!((rep.dim, rep.codim, rep.components), (1, 2, 2));
        assert_eq!(rep.dim + rep.codim, h.graph().betti());
        for s in &rep.samples {
            assert!(s.critical_residual < 1e-12);
            assert_eq!(s.point.free_edges(), &[(1, 3), (2, 3), (5, 6)]);
            let a = s.point.angles();
            let t = 2.0 * PI / 3.0;
            assert!(crate::magnetic::circle_distance(a[0], -a[1]) < 1e-9);
            assert!(crate::magnetic::circle_distance(a[0], t) < 1e-9 || crate::magnetic::circle_distance(a[0], -t) < 1e-9);
        }
    }

    #[test]
    fn index_jump_morse_labels() {
        let h = IndexJump::matrix();
        let d = data_for(&h, IndexJump::support(), 1);
        let rep = build_manifold(&h, &d, 2, 1).unwrap();
        let t = 2.0 * PI / 3.0;
        let at = |a3: f64| {
            let p = IndexJump::point(1.0, a3);
            let local = p.to_one_form(h.graph()).unwrap();
            rep.evaluate(&h, &local, 0).unwrap()
        };
        let top = at(0.0);
        assert_eq!((top.k, top.k_zz, top.morse_index, top.extremum), (2, 1, Some(2), Extremum::Max));
        let bottom = at(PI);
        assert_eq!((bottom.k, bottom.k_zz, bottom.morse_index, bottom.extremum), (2, 0, Some(0), Extremum::Min));
        let edge = at(t);
        assert!(edge.zz_resonant && edge.morse_index.is_none());
    }

    #[test]
    fn multiplicity_circle() {
        let h = Multiplicity::matrix(3.0);
        let d = data_for(&h, Multiplicity::support(), 1);
        let rep = build_manifold(&h, &d, 12, 3).unwrap();
        assert!(rep.nonempty);
        assert_eq!((rep.dim, rep.components), (1, 1));
    }

    #[test]
    fn full_support_is_a_point() {
        let h = fixtures::default_matrix(fixtures::complete(4));
        let all = enumerate_critical_data(&h).unwrap();
        let full: Vec<_> = all.iter().filter(|d| d.v_n.len() == 4).collect();
        assert_eq!(full.len(), 8 * 4);
        assert_eq!(all.len() - full.len(), 4 * 2 * 3);
        let rep = build_manifold(&h, full[5], 4, 0).unwrap();
        assert_eq!((rep.dim, rep.components, rep.samples.len()), (0, 1, 1));
        assert_eq!(rep.samples[0].morse_index, Some(rep.sigma_n as isize));
    }

    #[test]
    fn digits_mixed_radix() {
        assert_eq!(digits(5, &[2, 3]), vec![1, 2]);
        assert_eq!(digits(0, &[]), Vec::<usize>::new());
    }
}
