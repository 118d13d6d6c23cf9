//! Matroid-constrained submodular maximization: independence systems,
//! continuous greedy, base decompositions and swap rounding.

mod greedy;
mod polytope;
mod sampler;
mod swap;
mod system;

pub use greedy::{continuous_greedy, FractionalSolution, DEFAULT_STEPS};
pub use polytope::{combination_point, decompose_into_bases, in_base_polytope, in_independence_polytope, rank_violation};
pub use sampler::{brute_force_max, maximize_submodular, MaximizationPlan, WnrSampler};
pub use swap::{swap_round, swap_round_pmf};
pub use system::{IndependenceSystem, Matroid, SetSystem, System, SystemJson};
