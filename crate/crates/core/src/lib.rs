//! Densities of sets of positive integers and averages of bounded sequences.

pub mod config;
pub mod densities;
pub mod error;
pub mod expr;
pub mod extremal;
pub mod natset;
pub mod polya;
pub mod powersum;
pub mod report;
pub mod scalar;
pub mod seq;
pub mod verify;

pub use config::{EstimatorConfig, Extrapolation};
pub use densities::Side;
pub use error::{Error, Result};
pub use expr::{parse_seq_expr, parse_set_expr};
pub use extremal::{Atom, Surrogate};
pub use natset::NatSet;
pub use polya::ThetaEvaluation;
pub use powersum::{Approx, Progression, Real, SumMode};
pub use report::{DensityReport, Estimate, Warning};
pub use scalar::{theta_of, Rational, Scalar};
pub use seq::{BoundedSeq, StepSeq};

/// Double-precision sequences.
pub type Seq = BoundedSeq<f64>;
/// Single-precision sequences.
pub type Seq32 = BoundedSeq<f32>;
/// Exact rational sequences.
pub type ExactSeq = BoundedSeq<Rational>;
