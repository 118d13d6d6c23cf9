//! End-to-end competitive-ratio measurement.

use rand::seq::SliceRandom;
use serde::Serialize;

use super::fractional::{solve_fractional, ElementFractional};
use super::model::{prophet_value, SpiInstance};
use super::ocrs::{measured_selectability, GreedyOcrs};
use super::rounding::{expected_value, permutations};
use crate::error::{Error, Result};
use crate::parallel::{map_slice, stream_rng, Execution};
use crate::scalar::Scalar;
use crate::setfn::SetFunction;

/// Exhaustive ordering enumeration is used up to this many items.
pub const WORST_CASE_MAX_N: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub enum OrderingMode {
    /// All `n!` orders when `n <= WORST_CASE_MAX_N`; beyond that a heuristic
    /// adversary plus `fallback_random` random orders (not a worst case).
    WorstCase { fallback_random: usize },
    Fixed(Vec<usize>),
    Random { count: usize },
}

#[derive(Debug, Clone)]
pub struct SpiConfig {
    pub b: f64,
    pub steps: usize,
    /// Slack in the floor `c · (1 - e^{-b} - eps)`.
    pub eps: f64,
    pub ordering: OrderingMode,
    /// Non-monotone path: 1/2-subsampled OCRS with a `c/4` contract.
    pub subsample: bool,
    pub seed: u64,
    pub exec: Execution,
}

impl Default for SpiConfig {
    fn default() -> Self {
        Self {
            b: std::f64::consts::LN_2,
            steps: 200,
            eps: 0.05,
            ordering: OrderingMode::WorstCase { fallback_random: 8 },
            subsample: false,
            seed: 0,
            exec: Execution::Parallel,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpiReport {
    pub prophet: f64,
    #[serde(rename = "F_x")]
    pub f_x: f64,
    pub c_measured: f64,
    pub ratio_worst: f64,
    pub floor: f64,
    /// `min_order E[f(T_ALG)]`.
    pub worst_value: f64,
    pub worst_ordering: Vec<usize>,
    pub orderings_checked: usize,
    pub exhaustive: bool,
    /// `E[f(T_ALG)] >= c · F(x)` (or `c/4 · F(x)` when subsampling) on every
    /// checked order, decided in the instance's scalar type.
    pub inner_holds: bool,
    pub b: f64,
    pub steps: usize,
    pub eps: f64,
    pub subsample: bool,
}

impl SpiReport {
    pub fn passes(&self) -> bool {
        self.inner_holds && self.ratio_worst >= self.floor - 1e-12
    }

    pub const CSV_HEADER: &'static str = "prophet,F_x,c_measured,ratio_worst,floor";

    pub fn csv_row(&self) -> String {
        format!("{},{},{},{},{}", self.prophet, self.f_x, self.c_measured, self.ratio_worst, self.floor)
    }
}

/// The orders to evaluate and whether they are exhaustive.
pub fn orderings<T: Scalar>(
    inst: &SpiInstance<T>,
    frac: &ElementFractional<T>,
    mode: &OrderingMode,
    seed: u64,
) -> Result<(Vec<Vec<usize>>, bool)> {
    let n = inst.n();
    let random = |count: usize| -> Vec<Vec<usize>> {
        (0..count)
            .map(|t| {
                let mut p: Vec<usize> = (0..n).collect();
                p.shuffle(&mut stream_rng(seed, t as u64));
                p
            })
            .collect()
    };
    Ok(match mode {
        OrderingMode::WorstCase { .. } if n <= WORST_CASE_MAX_N => (permutations(n), true),
        OrderingMode::WorstCase { fallback_random } => {
            // weakest items first, so they use up capacity; and the reverse
            let m = inst.m();
            let score: Vec<f64> = (0..n)
                .map(|i| (0..m).map(|j| frac.x[i * m + j].to_f64() * inst.objective.value(1 << (i * m + j)).to_f64()).sum())
                .collect();
            let mut weak_first: Vec<usize> = (0..n).collect();
            weak_first.sort_by(|&a, &b| score[a].partial_cmp(&score[b]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)));
            let mut all = vec![weak_first.clone(), weak_first.into_iter().rev().collect()];
            all.extend(random(*fallback_random));
            (all, false)
        }
        OrderingMode::Fixed(order) => (vec![order.clone()], n <= 1),
        OrderingMode::Random { count } => (random(*count), false),
    })
}

/// Solves the fractional problem in floating point, converts it to `T`
/// (exactly, for rationals, after certification), measures the greedy OCRS's
/// selectability over the same orders, and evaluates Algorithm 1 exactly on
/// each order.
pub fn spi_competitive_ratio<T: Scalar>(inst: &SpiInstance<T>, cfg: &SpiConfig) -> Result<SpiReport> {
    if !(0.0..=1.0).contains(&cfg.b) {
        return Err(Error::InvalidTable(format!("horizon b = {} must lie in [0, 1]", cfg.b)));
    }
    let float_inst: SpiInstance<f64> = inst.convert();
    let float_frac = solve_fractional(&float_inst, cfg.b, cfg.steps)?;
    let frac: ElementFractional<T> = if T::EXACT {
        let exact = float_frac.to_exact(&inst.convert())?;
        ElementFractional { m: exact.m, x: exact.x.iter().map(T::from_rational).collect(), b: T::from_rational(&exact.b), steps: exact.steps }
    } else {
        ElementFractional { m: float_frac.m, x: float_frac.x.iter().map(|&v| T::from_f64(v)).collect(), b: T::from_f64(cfg.b), steps: cfg.steps }
    };
    evaluate(inst, &frac, cfg)
}

/// [`spi_competitive_ratio`] for a given fractional solution.
pub fn evaluate<T: Scalar>(inst: &SpiInstance<T>, frac: &ElementFractional<T>, cfg: &SpiConfig) -> Result<SpiReport> {
    frac.validate(inst)?;
    let prophet = prophet_value(inst)?;
    let f_x = frac.value(inst)?;
    let ocrs = GreedyOcrs::new(inst.system.clone()).with_subsampling(cfg.subsample);
    let (orders, exhaustive) = orderings(inst, frac, &cfg.ordering, cfg.seed)?;
    let c = measured_selectability(&ocrs, &frac.item_marginals(), &orders)?;
    let contract = if cfg.subsample { c.clone() / T::from_usize(4) } else { c.clone() };
    let target = contract.clone() * f_x.clone();
    let values: Vec<Result<T>> = map_slice(&orders, cfg.exec, |o| expected_value(inst, frac, &ocrs, o));
    let mut worst: Option<(usize, T)> = None;
    let mut inner_holds = true;
    for (k, v) in values.into_iter().enumerate() {
        let v = v?;
        if target.gt_tol(&v) {
            inner_holds = false;
        }
        if worst.as_ref().map_or(true, |(_, w)| v < *w) {
            worst = Some((k, v));
        }
    }
    let (wk, worst_value) = worst.ok_or_else(|| Error::InvalidTable("no orderings to evaluate".into()))?;
    let ratio = if prophet.is_zero() { 1.0 } else { (worst_value.clone() / prophet.clone()).to_f64() };
    let floor = contract.to_f64() * (1.0 - (-cfg.b).exp() - cfg.eps);
    Ok(SpiReport {
        prophet: prophet.to_f64(),
        f_x: f_x.to_f64(),
        c_measured: c.to_f64(),
        ratio_worst: ratio,
        floor,
        worst_value: worst_value.to_f64(),
        worst_ordering: orders[wk].clone(),
        orderings_checked: orders.len(),
        exhaustive,
        inner_holds,
        b: cfg.b,
        steps: cfg.steps,
        eps: cfg.eps,
        subsample: cfg.subsample,
    })
}

/// `E[f(S)] >= F(x)` with `S` the product of singletons of `frac`: the
/// dominance step inside the analysis. Returns `(E[f(S)], F(x))`.
pub fn dominance_step<T: Scalar>(f: &SetFunction<T>, frac: &ElementFractional<T>) -> Result<(T, T)> {
    let d = super::model::product_of_singletons(frac.m, &frac.x)?;
    let lhs = d.expect(f)?;
    let rhs = crate::multilinear::multilinear(f, &crate::dist::Marginals::new(frac.x.clone())?)?;
    Ok((lhs, rhs))
}
