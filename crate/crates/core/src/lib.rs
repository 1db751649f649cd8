//! Projection value decompositions over restricted unit domains.
//!
//! A PVD greedily peels rank-one elements off a matrix (or tensor), drawing
//! each element from a fixed domain of vector pairs such as normalized cut
//! vectors, and records how much Frobenius mass every step removes. The
//! crate also builds regularity partitions, graph-class statistics, and a
//! column-row decomposition on top of the greedy engine.

pub mod cur;
pub mod cut;
pub mod domain;
pub mod error;
pub mod graph;
pub mod linalg;
mod parallel;
pub mod pvd;
pub mod regularity;
pub mod simplex;
pub mod subset;
pub mod tensor;
pub mod tolerance;

pub use domain::{CutMaximizer, DomainPair, PairLabel, UnitDomain};
pub use error::{PvdError, Result};
pub use linalg::{DenseMatrix, DiagonalInnerProduct, InnerProductPair};
pub use parallel::is_parallel;
pub use pvd::{best_truncation, compute_pvd, truncate, verify_pvd, PvdConfig, PvdResult};
pub use tolerance::{Certificate, Tolerance};
