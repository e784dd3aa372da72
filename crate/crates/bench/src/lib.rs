//! Deterministic inputs shared by the benchmarks.

use magcrit::experiments::random_3regular;
use magcrit::fixtures;
use magcrit::linalg::{CMat, HermMatrix, C64};
use magcrit::magnetic::BaseMatrix;

/// Dense Hermitian matrix with trigonometric entries and a spread diagonal.
pub fn hermitian(n: usize) -> HermMatrix {
    let m = CMat::from_fn(n, n, |r, s| {
        let (a, b) = (r.min(s) as f64, r.max(s) as f64);
        if r == s {
            C64::new(r as f64 + (a * 1.7).sin(), 0.0)
        } else {
            let z = C64::new((a + 2.0 * b).cos(), (3.0 * a - b).sin());
            if r < s { z } else { z.conj() }
        }
    });
    HermMatrix::new(m).expect("constructed Hermitian")
}

/// Adjacency plus the irrational diagonal on a random cubic graph.
pub fn cubic(n: usize, seed: u64) -> BaseMatrix {
    fixtures::default_matrix(random_3regular(n, seed).expect("even n >= 4"))
}
