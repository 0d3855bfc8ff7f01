//! Best uniform and best convex polynomial approximation on [-1, 1] at
//! configurable precision, and the scaled error sequences
//! `n^lambda * E_n(|x|^lambda)` built from them.

pub mod cli;
pub mod convex;
pub mod error;
pub mod grid;
pub mod limits;
pub mod lp;
pub mod options;
pub mod poly;
pub mod remez;
pub mod scalar;
pub mod scan;
pub mod sweep;
pub mod target;

pub use error::{Error, Result};
pub use poly::ChebPoly;
pub use scalar::Scalar;
pub use target::{TargetKind, TargetSpec};
pub use options::SolverOptions;
pub use remez::{best_approx, en_value, ApproxResult, Reference};
pub use convex::{best_convex_approx, en_convex_value, ConvexApproxResult};
pub use limits::{
    boundedness_report, build_sequence, extrapolate_limit, ls_inequality_check, oq2_scaled_error,
    ExtrapolationReport, SequenceTable,
};
pub use sweep::Execution;
