//! Tsallis-q entropies, two-qubit concurrence and concurrence of
//! assistance, Tsallis-q entanglement, and checkers for the multi-qubit
//! monogamy and polygamy inequalities built on them.

// `!(x >= 0.0)` style checks deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod concurrence;
pub mod entropy;
pub mod cli;
pub mod inequalities;
pub mod qmat;
pub mod report;
pub mod states;
pub mod tsallis;

pub use entropy::QParam;
pub use qmat::{CMatrix, DensityMatrix, EigenSystem};
pub use report::{Bound, InequalityReport, Verdict};
pub use states::{Bipartition, PureState, Seed};
