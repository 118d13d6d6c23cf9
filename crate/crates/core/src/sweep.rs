//! Randomized sweeps behind the acceptance suite, the CLI experiments and the
//! benchmarks. Each trial draws from its own seeded stream, so results do not
//! depend on the execution mode or the number of workers.

use rand::Rng;
use serde::Serialize;

use crate::crs::{verify_crs_theorem, CrsSweep};
use crate::dependence::{check_na, check_ncd, check_nr, check_wnr, random_distribution, random_wnr, WNR_ATTEMPT_BUDGET};
use crate::dist::{product_stacked, Distribution, Marginals};
use crate::dominance::check_dominance;
use crate::error::Result;
use crate::optimize::{brute_force_max, Matroid, MaximizationPlan, System};
use crate::parallel::{map_indexed, stream_rng, Execution};
use crate::probing::{adaptivity_gap_report, random_probing_instance, GapReport, ProbingInstance};
use crate::scalar::{Rational, Scalar};
use crate::set;
use crate::setfn::SetFunction;
use crate::spi::{random_spi_instance, single_choice, spi_competitive_ratio, SpiConfig, SpiReport};

/// Seed of trial `index` under base seed `seed`.
pub fn trial_seed(seed: u64, index: usize) -> u64 {
    stream_rng(seed, index as u64).gen()
}

#[derive(Debug, Clone, Serialize)]
pub struct DominanceSweep {
    pub n: usize,
    pub trials: usize,
    pub passed: usize,
    /// Smallest dominance gap seen (negative means a violation).
    pub min_gap: f64,
    /// `(holds, gap)` per trial.
    pub per_trial: Vec<(bool, f64)>,
}

impl DominanceSweep {
    pub const CSV_HEADER: &'static str = "trial,holds,gap";

    pub fn all_pass(&self) -> bool {
        self.passed == self.trials
    }

    pub fn csv(&self) -> String {
        let mut out = format!("{}\n", Self::CSV_HEADER);
        for (t, (holds, gap)) in self.per_trial.iter().enumerate() {
            out.push_str(&format!("{t},{holds},{gap}\n"));
        }
        out
    }
}

/// `check_dominance` on `trials` rejection-sampled WNR distributions over
/// `n` elements, in exact arithmetic.
pub fn dominance_sweep(n: usize, trials: usize, seed: u64, exec: Execution) -> Result<DominanceSweep> {
    let gaps: Vec<Result<(bool, f64)>> = map_indexed(trials, exec, |t| {
        let d: Distribution<Rational> = random_wnr(n, trial_seed(seed, t), WNR_ATTEMPT_BUDGET)?;
        let v = check_dominance(&d)?;
        Ok((v.holds, v.gap.to_f64()))
    });
    let per_trial = gaps.into_iter().collect::<Result<Vec<_>>>()?;
    let passed = per_trial.iter().filter(|t| t.0).count();
    let min_gap = per_trial.iter().map(|t| t.1).fold(f64::INFINITY, f64::min);
    Ok(DominanceSweep { n, trials, passed, min_gap, per_trial })
}

/// How trial `t` of [`hierarchy_sweep`] draws its distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Draw {
    /// Independent uniform integer weights on every set.
    Arbitrary,
    /// Rejection-sampled WNR (arbitrary at `n = 5`, where acceptance is rare).
    Wnr,
    /// Product of random marginals.
    Product,
}

pub fn hierarchy_draw<T: Scalar>(t: usize, max_n: usize, seed: u64) -> Result<(Draw, Distribution<T>)> {
    let n = 2 + t % (max_n - 1);
    let s = trial_seed(seed, t);
    match (t / (max_n - 1)) % 3 {
        1 if n <= 4 => Ok((Draw::Wnr, random_wnr(n, s, WNR_ATTEMPT_BUDGET)?)),
        2 => {
            let mut rng = stream_rng(s, 1);
            let x: Vec<T> = (0..n).map(|_| T::from_ratio(rng.gen_range(1..=9), 10)).collect();
            Ok((Draw::Product, Distribution::product(&Marginals::new(x)?)))
        }
        _ => Ok((Draw::Arbitrary, random_distribution(n, s)?)),
    }
}

#[derive(Debug, Clone, Copy, Default, Serialize, PartialEq, Eq)]
pub struct HierarchyCounts {
    pub na: usize,
    pub nr: usize,
    pub wnr: usize,
    pub ncd: usize,
    pub dominance: usize,
    pub na_not_wnr: usize,
    pub nr_not_wnr: usize,
    pub wnr_not_ncd: usize,
    pub dominance_not_ncd: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct HierarchySweep {
    pub trials: usize,
    pub max_n: usize,
    pub counts: HierarchyCounts,
}

impl HierarchySweep {
    pub fn counterexamples(&self) -> usize {
        let c = &self.counts;
        c.na_not_wnr + c.nr_not_wnr + c.wnr_not_ncd + c.dominance_not_ncd
    }
}

/// All five checkers on `trials` distributions over `2..=max_n` elements,
/// counting violations of NA ⇒ WNR, NR ⇒ WNR, WNR ⇒ NCD and
/// dominance ⇒ NCD.
pub fn hierarchy_sweep(trials: usize, max_n: usize, seed: u64, exec: Execution) -> Result<HierarchySweep> {
    let rows: Vec<Result<[bool; 5]>> = map_indexed(trials, exec, |t| {
        let (_, d) = hierarchy_draw::<Rational>(t, max_n, seed)?;
        Ok([check_na(&d)?.holds, check_nr(&d).holds, check_wnr(&d).holds, check_ncd(&d).holds, check_dominance(&d)?.holds])
    });
    let mut c = HierarchyCounts::default();
    for r in rows {
        let [na, nr, wnr, ncd, dom] = r?;
        c.na += na as usize;
        c.nr += nr as usize;
        c.wnr += wnr as usize;
        c.ncd += ncd as usize;
        c.dominance += dom as usize;
        c.na_not_wnr += (na && !wnr) as usize;
        c.nr_not_wnr += (nr && !wnr) as usize;
        c.wnr_not_ncd += (wnr && !ncd) as usize;
        c.dominance_not_ncd += (dom && !ncd) as usize;
    }
    Ok(HierarchySweep { trials, max_n, counts: c })
}

#[derive(Debug, Clone, Serialize)]
pub struct ClosureSweep {
    pub trials: usize,
    pub projections_checked: usize,
    pub projection_failures: usize,
    pub products_checked: usize,
    pub product_failures: usize,
}

impl ClosureSweep {
    pub fn all_pass(&self) -> bool {
        self.projection_failures == 0 && self.product_failures == 0
    }
}

/// WNR is kept by every projection of a random WNR distribution over `n`
/// elements, and by its product with an independent random WNR distribution
/// over two elements.
pub fn closure_sweep(n: usize, trials: usize, seed: u64, exec: Execution) -> Result<ClosureSweep> {
    let rows: Vec<Result<(usize, usize, bool)>> = map_indexed(trials, exec, |t| {
        let s = trial_seed(seed, t);
        let d: Distribution<Rational> = random_wnr(n, s, WNR_ATTEMPT_BUDGET)?;
        let mut checked = 0;
        let mut failed = 0;
        for keep in 1..set::full_mask(n) {
            checked += 1;
            failed += !check_wnr(&d.project(keep)?).holds as usize;
        }
        let other: Distribution<Rational> = random_wnr(2, s ^ 0x5eed, WNR_ATTEMPT_BUDGET)?;
        let product_ok = check_wnr(&product_stacked(&d, &other)?).holds;
        Ok((checked, failed, product_ok))
    });
    let mut out = ClosureSweep { trials, projections_checked: 0, projection_failures: 0, products_checked: 0, product_failures: 0 };
    for r in rows {
        let (checked, failed, product_ok) = r?;
        out.projections_checked += checked;
        out.projection_failures += failed;
        out.products_checked += 1;
        out.product_failures += !product_ok as usize;
    }
    Ok(out)
}

/// [`verify_crs_theorem`] on the rank-`rank` uniform matroid over `n`.
pub fn crs_sweep(n: usize, rank: usize, trials: usize, seed: u64, exec: Execution) -> Result<CrsSweep> {
    verify_crs_theorem(&Matroid::uniform(n, rank)?, trials, seed, exec)
}

/// Random probing instances with `n` cycling over `1..=max_n`.
pub fn probing_instances(trials: usize, max_n: usize, seed: u64) -> Result<Vec<ProbingInstance<Rational>>> {
    (0..trials).map(|t| random_probing_instance(1 + t % max_n, trial_seed(seed, t))).collect()
}

pub fn probing_sweep(trials: usize, max_n: usize, steps: usize, slack: f64, seed: u64, exec: Execution) -> Result<GapReport> {
    adaptivity_gap_report(&probing_instances(trials, max_n, seed)?, steps, slack, seed, exec)
}

/// Random monotone SPI instances on a single-choice system, `n` cycling over
/// `2..=max_n` items with `m` cycling over `1..=max_m` outcomes.
pub fn spi_sweep(trials: usize, max_n: usize, max_m: usize, cfg: &SpiConfig) -> Result<Vec<SpiReport>> {
    let insts = (0..trials)
        .map(|t| {
            let n = 2 + t % (max_n - 1);
            let m = 1 + (t / (max_n - 1)) % max_m;
            random_spi_instance::<Rational>(n, m, single_choice(n)?, trial_seed(cfg.seed, t))
        })
        .collect::<Result<Vec<_>>>()?;
    // the reports parallelize over orderings internally
    insts.iter().map(|inst| spi_competitive_ratio(inst, cfg)).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct MaximizeRow {
    pub instance_id: usize,
    pub n: usize,
    pub optimum: f64,
    pub mean: f64,
    /// Half-width of the normal 95% interval for the mean.
    pub ci95: f64,
    /// `E[f(S)]` under the exact rounding law.
    pub exact_mean: f64,
    pub ratio_lower: f64,
    pub pass: bool,
}

/// Random coverage instance over `n` elements: element `i` covers a random
/// nonempty subset of `n + 2` weighted items.
pub fn random_coverage<T: Scalar>(n: usize, seed: u64) -> Result<SetFunction<T>> {
    let mut rng = stream_rng(seed, 0);
    let universe = n + 2;
    let covers: Vec<set::Mask> = (0..n).map(|_| rng.gen_range(1..=set::full_mask(universe))).collect();
    let weights: Vec<T> = (0..universe).map(|_| T::from_usize(rng.gen_range(1..=10usize))).collect();
    SetFunction::coverage(&covers, &weights)
}

/// Continuous greedy plus swap rounding on random coverage instances over a
/// rank-2 uniform matroid (`n` cycling over `3..=max_n`). Each instance is
/// sampled `samples` times; it passes when the lower 95% bound on the mean
/// reaches `threshold · OPT`.
pub fn maximize_sweep(
    instances: usize,
    max_n: usize,
    samples: usize,
    steps: usize,
    threshold: f64,
    seed: u64,
    exec: Execution,
) -> Result<Vec<MaximizeRow>> {
    let rows: Vec<Result<MaximizeRow>> = map_indexed(instances, exec, |t| {
        let n = 3 + t % (max_n - 2);
        let f: SetFunction<f64> = random_coverage(n, trial_seed(seed, t))?;
        let system: System = Matroid::uniform(n, 2)?.into();
        let (_, optimum) = brute_force_max(&f, &system)?;
        let plan = MaximizationPlan::new(&f, &system, steps)?;
        let base = trial_seed(seed ^ 0xa11ce, t);
        let mut values = Vec::with_capacity(samples);
        for s in 0..samples {
            values.push(*f.value(plan.sample(base.wrapping_add(s as u64))?));
        }
        let mean = values.iter().sum::<f64>() / samples as f64;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (samples.max(2) - 1) as f64;
        let ci95 = 1.96 * (var / samples as f64).sqrt();
        let ratio_lower = if optimum == 0.0 { 1.0 } else { (mean - ci95) / optimum };
        Ok(MaximizeRow {
            instance_id: t,
            n,
            optimum,
            mean,
            ci95,
            exact_mean: plan.expected_value(&f)?,
            ratio_lower,
            pass: ratio_lower >= threshold,
        })
    });
    rows.into_iter().collect()
}
