//! The submodular prophet inequality pipeline: item models, the prophet
//! benchmark, a fractional solution over the element-space polytope, greedy
//! OCRSs, online rounding (Algorithm 1) and competitive-ratio reports.

mod fractional;
mod model;
mod ocrs;
mod report;
mod rounding;

pub use fractional::{p2_oracle, solve_fractional, ElementFractional};
pub use model::{
    element_items, for_each_realization, item_elements, product_of_singletons, prophet_value, random_spi_instance,
    single_choice, verify_pos_decomposition, ItemModel, SpiInstance, SpiInstanceJson, PROPHET_CAP,
};
pub use ocrs::{greedy_ocrs_partition, greedy_ocrs_uniform, measured_selectability, run_greedy, Decision, GreedyOcrs, OcrsState};
pub use report::{dominance_step, evaluate, orderings, spi_competitive_ratio, OrderingMode, SpiConfig, SpiReport, WORST_CASE_MAX_N};
pub use rounding::{active_law, algorithm1, estimate_value, expected_value, permutations, EXACT_PATTERN_CAP};
