//! Exact, certificate-producing tools for negatively dependent distributions
//! over small ground sets.
//!
//! Distributions and set functions are dense tables indexed by bitmask
//! (element `i` is bit `i`). Every checker returns either "holds" or a concrete
//! witness that can be re-verified against the raw definition:
//!
//! * [`dependence`]: weak negative regression, negative association, negative
//!   regression, negative cylinder dependence, and stochastic dominance on the
//!   subset lattice (via monotone couplings and max-flow).
//! * [`dominance`]: submodular dominance decided by a linear program whose
//!   optimizer is a violating submodular function.
//! * [`optimize`]: matroids, continuous greedy, swap rounding, and the
//!   sample-and-round maximization pipeline.
//! * [`spi`]: the submodular prophet inequality pipeline with online
//!   contention resolution.
//! * [`crs`]: optimal offline contention resolution schemes by LP.
//! * [`probing`]: adaptive versus non-adaptive stochastic probing.
//!
//! All numeric code is generic over [`Scalar`]: [`Rational`] for exact
//! certificates and `f64` for speed.

pub mod crs;
pub mod dependence;
pub mod dist;
pub mod dominance;
pub mod error;
pub mod fixtures;
pub mod flow;
pub mod json;
pub mod lp;
pub mod multilinear;
pub mod optimize;
pub mod parallel;
pub mod probing;
pub mod scalar;
pub mod set;
pub mod setfn;
pub mod spi;
pub mod sweep;

pub use dist::{Distribution, Marginals};
pub use error::{Error, Result};
pub use multilinear::{multilinear, partial_derivative};
pub use scalar::{q, Rational, Scalar};
pub use set::Mask;
pub use setfn::SetFunction;
