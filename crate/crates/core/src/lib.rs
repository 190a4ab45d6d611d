//! Canonical fingerprinted trees over dynamic byte strings, and two
//! combinatorial solvers built on top of them.
//!
//! The tree layer ([`ddt`]) maintains persistent strings whose shape is a
//! pure function of content and hash seed: equal strings always share one
//! root fingerprint, so equality is O(1) and longest-common-prefix runs in
//! time proportional to tree height. Edits (split, concatenate, set,
//! rotate) rebuild only the seam between reused subtrees.
//!
//! On top of that, [`modsum`] computes all reachable modular subset sums of
//! a weighted value multiset in near-linear time — the strings are
//! reachability bitmasks, and cheap equality/LCP make each closure step
//! cost proportional to actual progress. [`egz`] uses that solver to find,
//! among any 2n-1 residues mod n, exactly n summing to a multiple of n.
//!
//! [`oracle`] holds small brute-force references used across the test
//! suites; [`dot`] renders trees for inspection.

pub mod ddt;
pub mod dot;
pub mod egz;
pub mod error;
pub mod fingerprint;
pub mod modsum;
pub mod oracle;

pub use ddt::{equal, lcp, Collection, CollectionStats, Node, NodeKind, StringHandle, Symbol};
pub use egz::{
    contiguous_zero_sum, egz, egz_prime, egz_with_stats, verify_egz, EgzCertificate, EgzError,
    EgzInput,
};
pub use error::DdtError;
pub use fingerprint::{Fingerprint, FingerprintTable, HashSeed, Preimage};
pub use modsum::{
    decide, reconstruct, solve_all, solve_all_with, verify_witness, Instance, Pred,
    ReachabilityResult, SolveError, SolveStats, SolverOptions, Witness,
};
