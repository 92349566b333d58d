//! Scheduling unit-length jobs with precedence constraints on identical
//! machines: exact search, list scheduling, the time-indexed LP, its
//! Sherali-Adams lift and a recursive rounding scheme over a laminar family.

pub mod baseline;
pub mod harness;
pub mod instance;
pub mod laminar;
pub mod lp;
pub mod oracle;
pub mod qptas;
pub mod sa;
pub mod scalar;
pub mod top_matching;

pub use num_rational::BigRational;

/// Exact rational scalar used throughout.
pub type Rational = BigRational;
pub type ExactLp = lp::LinearProgram<Rational>;
pub type FloatLp = lp::LinearProgram<f64>;

pub use instance::{Instance, InstanceError};
pub use oracle::{exact_makespan, validate, Schedule};
pub use scalar::Scalar;
pub type ExactSaSolution = sa::SaSolution<Rational>;
pub type ExactMixture = sa::Mixture<Rational>;
