//! Termination analysis for nondeterministic recursive probabilistic programs.
//!
//! The crate parses a small imperative language with recursion, sampling
//! variables and demonic choice, lowers it to a control-flow graph, executes
//! the resulting Markov decision process, checks termination certificates
//! over finite verification boxes and turns verified certificates into
//! bounds on the termination time.
//!
//! ```
//! use probterm::{lang, cfg};
//!
//! let prog = lang::parse("f(n) { skip }").unwrap();
//! let graph = cfg::build_cfg(&prog).unwrap();
//! assert_eq!(graph.function("f").unwrap().l_out, 2);
//! ```

pub mod bounds;
pub mod cert;
pub mod cfg;
pub mod lab;
pub mod lang;
pub mod mdp;
pub mod prob;
pub mod scalar;
pub mod stats;

pub use scalar::Scalar;

/// Exact rational numbers used for probabilities and certificate values.
pub type Rational = num_rational::BigRational;
/// Arbitrary precision integers used for program values.
pub type Integer = num_bigint::BigInt;
/// Extended nonnegative reals over exact rationals.
pub type ExactExtReal = prob::ExtReal<Rational>;
/// Extended nonnegative reals over `f64`, for fast approximate checks.
pub type FloatExtReal = prob::ExtReal<f64>;
/// Single precision variant of [`FloatExtReal`].
pub type Float32ExtReal = prob::ExtReal<f32>;

/// Tool version embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
