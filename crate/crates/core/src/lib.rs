pub mod atlas;
pub mod experiments;
pub mod fixtures;
pub mod graph;
pub mod linalg;
pub mod linkage;
pub mod magnetic;
pub mod oracles;
pub mod tol;
