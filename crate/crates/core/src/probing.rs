//! Stochastic probing: the optimal adaptive policy by dynamic programming
//! against the non-adaptive policy that probes a WNR sample.

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dist::Marginals;
use crate::error::{Error, Result};
use crate::json::{scalars_from_json, scalars_to_json, SetFunctionJson};
use crate::multilinear::multilinear;
use crate::optimize::{continuous_greedy, IndependenceSystem, Matroid, System, WnrSampler};
use crate::parallel::{map_slice, stream_rng, Execution};
use crate::scalar::Scalar;
use crate::set::{self, Mask};
use crate::setfn::SetFunction;

pub const AUXILIARY_MAX_N: usize = 12;
pub const ADAPTIVE_MAX_N: usize = 10;
/// The sampler's law is enumerated up to this size; Monte Carlo beyond.
pub const EXACT_SAMPLER_MAX_N: usize = 4;
pub const MONTE_CARLO_SAMPLES: usize = 20_000;

/// Item `i` contains element `i` with probability `p_i`, independently.
#[derive(Debug, Clone)]
pub struct ProbingInstance<T: Scalar> {
    pub p: Vec<T>,
    pub f: SetFunction<T>,
    pub system: System,
}

impl<T: Scalar> ProbingInstance<T> {
    pub fn new(p: Vec<T>, f: SetFunction<T>, system: System) -> Result<Self> {
        let n = p.len();
        if n > AUXILIARY_MAX_N {
            return Err(Error::SizeCap { what: "probing instance", detail: format!("n = {n} exceeds {AUXILIARY_MAX_N}") });
        }
        for (what, got) in [("f", f.n()), ("system", system.n())] {
            if got != n {
                return Err(Error::InvalidTable(format!("{what} has n = {got}, p has {n} entries")));
            }
        }
        if let Some(i) = p.iter().position(|v| T::zero().gt_tol(v) || v.gt_tol(&T::one())) {
            return Err(Error::InvalidTable(format!("p[{i}] = {} outside [0, 1]", p[i])));
        }
        if !f.is_monotone() {
            return Err(Error::NotMonotone);
        }
        if !f.is_nonnegative() {
            return Err(Error::InvalidTable("f must be nonnegative".into()));
        }
        Ok(Self { p, f, system })
    }

    pub fn n(&self) -> usize {
        self.p.len()
    }

    pub fn convert<U: Scalar>(&self) -> ProbingInstance<U> {
        ProbingInstance { p: self.p.iter().map(|v| U::from_rational(&v.to_rational())).collect(), f: self.f.convert(), system: self.system.clone() }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let raw: ProbingInstanceJson = serde_json::from_str(text)?;
        raw.try_into()
    }
}

/// `{"n","p":[...],"f":{"n","values"},"system":{..}}`
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbingInstanceJson {
    pub n: usize,
    pub p: Vec<Value>,
    pub f: SetFunctionJson,
    pub system: System,
}

impl<T: Scalar> TryFrom<ProbingInstanceJson> for ProbingInstance<T> {
    type Error = Error;

    fn try_from(raw: ProbingInstanceJson) -> Result<Self> {
        if raw.p.len() != raw.n {
            return Err(Error::Parse(format!("p: {} entries, expected n = {}", raw.p.len(), raw.n)));
        }
        let p = scalars_from_json(&raw.p, "p")?;
        let f = SetFunction::try_from(raw.f).map_err(|e| Error::Parse(format!("f.{e}")))?;
        ProbingInstance::new(p, f, raw.system).map_err(|e| Error::Parse(e.to_string()))
    }
}

impl<T: Scalar> From<&ProbingInstance<T>> for ProbingInstanceJson {
    fn from(inst: &ProbingInstance<T>) -> Self {
        Self { n: inst.n(), p: scalars_to_json(&inst.p), f: inst.f.clone().into(), system: inst.system.clone() }
    }
}

/// `f'(S) = E[f(S ∩ X)]`, the expected value of probing every item of `S`.
pub fn auxiliary_function<T: Scalar>(inst: &ProbingInstance<T>) -> Result<SetFunction<T>> {
    let n = inst.n();
    let mut g = inst.f.values().to_vec();
    // condition on one item at a time
    for (i, pi) in inst.p.iter().enumerate() {
        let qi = T::one() - pi.clone();
        for s in 0..1u32 << n {
            if set::contains(s, i) {
                let without = g[(s & !(1 << i)) as usize].clone();
                let v = &mut g[s as usize];
                *v = v.clone() * pi.clone() + without * qi.clone();
            }
        }
    }
    SetFunction::new(n, g)
}

/// Index of `r ⊆ p` among the submasks of `p` (bit extraction).
fn compress(r: Mask, p: Mask) -> usize {
    let mut out = 0usize;
    for (k, i) in set::elements(p).enumerate() {
        if set::contains(r, i) {
            out |= 1 << k;
        }
    }
    out
}

/// Value of the optimal adaptive policy: probe items one at a time, the
/// probed set always independent, and keep whatever was realized.
pub fn adaptive_optimum<T: Scalar>(inst: &ProbingInstance<T>) -> Result<T> {
    let n = inst.n();
    if n > ADAPTIVE_MAX_N {
        return Err(Error::SizeCap { what: "adaptive_optimum", detail: format!("n = {n} exceeds {ADAPTIVE_MAX_N}") });
    }
    let full = set::full_mask(n);
    let mut value: Vec<Vec<T>> = vec![Vec::new(); 1 << n];
    // supersets have larger masks, so descending order sees them first
    for probed in (0..=full).rev() {
        if !inst.system.is_independent(probed) {
            continue;
        }
        let extend: Vec<usize> = (0..n).filter(|&i| !set::contains(probed, i) && inst.system.is_independent(probed | 1 << i)).collect();
        let mut row = vec![T::zero(); 1 << set::popcount(probed)];
        for realized in set::submasks(probed) {
            let mut best = inst.f.value(realized).clone();
            for &i in &extend {
                let next = probed | 1 << i;
                let hit = &value[next as usize][compress(realized | 1 << i, next)];
                let miss = &value[next as usize][compress(realized, next)];
                let v = inst.p[i].clone() * hit.clone() + (T::one() - inst.p[i].clone()) * miss.clone();
                if v > best {
                    best = v;
                }
            }
            row[compress(realized, probed)] = best;
        }
        value[probed as usize] = row;
    }
    Ok(value[0][0].clone())
}

#[derive(Debug, Clone)]
pub struct NonadaptiveOutcome<T: Scalar> {
    /// `E_{S~D}[f'(S)]`, exact when `exact` is set.
    pub value: T,
    /// `F'(x)`, the multilinear extension of `f'` at the greedy point.
    pub multilinear: T,
    pub x: Marginals<T>,
    pub exact: bool,
}

/// Continuous greedy on `f'` (`b = 1`, `steps` steps), then the value of
/// probing a sample of the resulting WNR sampler.
pub fn nonadaptive_value<T: Scalar>(inst: &ProbingInstance<T>, steps: usize, seed: u64) -> Result<NonadaptiveOutcome<T>> {
    let aux = auxiliary_function(inst)?;
    if inst.f.is_submodular() && !(aux.is_submodular() && aux.is_monotone()) {
        return Err(Error::Invariant("f' lost monotonicity or submodularity".into()));
    }
    let sol = continuous_greedy(&aux, &inst.system, T::one(), steps)?;
    let sampler = WnrSampler::from_solution(&inst.system, &sol)?;
    let multilinear = multilinear(&aux, &sol.x)?;
    let (value, exact) = if inst.n() <= EXACT_SAMPLER_MAX_N {
        (sampler.distribution()?.expect(&aux)?, true)
    } else {
        let mut rng = stream_rng(seed, 0);
        let mut total = T::zero();
        for _ in 0..MONTE_CARLO_SAMPLES {
            total += aux.value(sampler.sample(&mut rng)?);
        }
        (total / T::from_usize(MONTE_CARLO_SAMPLES), false)
    };
    Ok(NonadaptiveOutcome { value, multilinear, x: sol.x, exact })
}

#[derive(Debug, Clone, Serialize)]
pub struct GapRow {
    pub instance_id: usize,
    pub adaptive: f64,
    pub nonadaptive: f64,
    pub ratio: f64,
    /// `E_D[f'] >= F'(x)`, decided in the instance's scalar type.
    pub dominance_holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    pub rows: Vec<GapRow>,
    pub max_ratio: f64,
    pub bound: f64,
    /// Every ratio is within `bound` and adaptivity never loses.
    pub all_pass: bool,
}

impl GapReport {
    pub const CSV_HEADER: &'static str = "instance_id,adaptive,nonadaptive,ratio";

    pub fn csv(&self) -> String {
        let mut out = format!("{}\n", Self::CSV_HEADER);
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{}\n", r.instance_id, r.adaptive, r.nonadaptive, r.ratio));
        }
        out
    }
}

/// `e / (e - 1)`.
pub fn gap_bound() -> f64 {
    let e = std::f64::consts::E;
    e / (e - 1.0)
}

/// Ratio `adaptive / nonadaptive` for each instance (`0/0 = 1`), checked
/// against `e/(e-1) + slack`.
pub fn adaptivity_gap_report<T: Scalar>(
    instances: &[ProbingInstance<T>],
    steps: usize,
    slack: f64,
    seed: u64,
    exec: Execution,
) -> Result<GapReport> {
    let rows: Vec<Result<GapRow>> = map_slice(instances, exec, |inst| {
        let adaptive = adaptive_optimum(inst)?;
        let non = nonadaptive_value(inst, steps, seed)?;
        let ratio = if adaptive.is_zero() && non.value.is_zero() {
            1.0
        } else {
            (adaptive.clone() / non.value.clone()).to_f64()
        };
        let dominance_holds = !non.multilinear.gt_tol(&non.value);
        let (adaptive, nonadaptive) = (adaptive.to_f64(), non.value.to_f64());
        Ok(GapRow { instance_id: 0, adaptive, nonadaptive, ratio, dominance_holds })
    });
    let mut out = Vec::with_capacity(rows.len());
    for (id, r) in rows.into_iter().enumerate() {
        out.push(GapRow { instance_id: id, ..r? });
    }
    let bound = gap_bound() + slack;
    let max_ratio = out.iter().map(|r| r.ratio).fold(1.0, f64::max);
    let all_pass = out.iter().all(|r| r.ratio <= bound && r.ratio >= 1.0 - 1e-9 && r.dominance_holds);
    Ok(GapReport { rows: out, max_ratio, bound, all_pass })
}

/// Random instance over `n` items: `p_i` in `{1/10, ..., 10/10}`, a weighted
/// coverage objective, and either a uniform matroid of random rank or a
/// two-block partition matroid.
pub fn random_probing_instance<T: Scalar>(n: usize, seed: u64) -> Result<ProbingInstance<T>> {
    let mut rng = stream_rng(seed, 0);
    let p: Vec<T> = (0..n).map(|_| T::from_ratio(rng.gen_range(1..=10), 10)).collect();
    let universe = (n + 1).max(2);
    let covers: Vec<Mask> = (0..n).map(|_| rng.gen_range(1..=set::full_mask(universe))).collect();
    let weights: Vec<T> = (0..universe).map(|_| T::from_usize(rng.gen_range(1..=10usize))).collect();
    let f = SetFunction::coverage(&covers, &weights)?;
    let system: System = if n >= 2 && rng.gen_bool(0.5) {
        let split = rng.gen_range(1..n);
        let low = set::full_mask(split);
        Matroid::partition(n, vec![low, set::full_mask(n) & !low], vec![1, 1])?.into()
    } else {
        Matroid::uniform(n, rng.gen_range(1..=n.max(1)))?.into()
    };
    ProbingInstance::new(p, f, system)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimize::brute_force_max;
    use crate::scalar::{q, Rational};

    fn inst(p: &[(i64, i64)], f: SetFunction<Rational>, system: System) -> ProbingInstance<Rational> {
        ProbingInstance::new(p.iter().map(|&(a, b)| q(a, b)).collect(), f, system).unwrap()
    }

    #[test]
    fn auxiliary_extremes() {
        let f = SetFunction::coverage(&[0b01, 0b11, 0b10], &[q(2, 1), q(3, 1)]).unwrap();
        let sure = inst(&[(1, 1); 3], f.clone(), Matroid::uniform(3, 3).unwrap().into());
        assert_eq!(auxiliary_function(&sure).unwrap(), f);
        let never = inst(&[(0, 1); 3], f.clone(), Matroid::uniform(3, 3).unwrap().into());
        assert!(auxiliary_function(&never).unwrap().values().iter().all(|v| v == f.value(0)));
    }

    #[test]
    fn auxiliary_of_cardinality_is_linear() {
        let i = inst(&[(1, 2), (1, 2)], SetFunction::cardinality(2).unwrap(), Matroid::uniform(2, 2).unwrap().into());
        let aux = auxiliary_function(&i).unwrap();
        for s in 0..4u32 {
            assert_eq!(*aux.value(s), q(set::popcount(s) as i64, 2));
        }
    }

    #[test]
    fn single_item() {
        let f = SetFunction::modular(&[q(5, 1)]).unwrap();
        let i = inst(&[(2, 5)], f, Matroid::uniform(1, 1).unwrap().into());
        assert_eq!(adaptive_optimum(&i).unwrap(), q(2, 1));
    }

    #[test]
    fn certain_items_reduce_to_brute_force() {
        for seed in 0..5 {
            let mut i = random_probing_instance::<Rational>(4, seed).unwrap();
            i.p = vec![q(1, 1); 4];
            let (_, best) = brute_force_max(&i.f, &i.system).unwrap();
            assert_eq!(adaptive_optimum(&i).unwrap(), best);
        }
    }

    /// Every decision tree over the items, evaluated on every realization.
    fn best_tree_value(i: &ProbingInstance<Rational>) -> Rational {
        #[derive(Clone)]
        enum Tree {
            Stop,
            Probe(usize, Box<Tree>, Box<Tree>),
        }
        fn trees(i: &ProbingInstance<Rational>, probed: Mask) -> Vec<Tree> {
            let mut out = vec![Tree::Stop];
            for e in 0..i.n() {
                if set::contains(probed, e) || !i.system.is_independent(probed | 1 << e) {
                    continue;
                }
                let subs = trees(i, probed | 1 << e);
                for a in &subs {
                    for b in &subs {
                        out.push(Tree::Probe(e, Box::new(a.clone()), Box::new(b.clone())));
                    }
                }
            }
            out
        }
        fn walk(t: &Tree, world: Mask, got: Mask) -> Mask {
            match t {
                Tree::Stop => got,
                Tree::Probe(e, hit, _) if set::contains(world, *e) => walk(hit, world, got | 1 << e),
                Tree::Probe(_, _, miss) => walk(miss, world, got),
            }
        }
        let n = i.n();
        let world_prob = |w: Mask| -> Rational {
            (0..n).fold(q(1, 1), |acc, e| acc * if set::contains(w, e) { i.p[e].clone() } else { q(1, 1) - i.p[e].clone() })
        };
        trees(i, 0)
            .iter()
            .map(|t| (0..1u32 << n).fold(q(0, 1), |acc, w| acc + world_prob(w) * i.f.value(walk(t, w, 0)).clone()))
            .max()
            .unwrap()
    }

    #[test]
    fn dynamic_program_matches_tree_enumeration() {
        for seed in 0..12 {
            let n = 1 + (seed as usize % 3);
            let i = random_probing_instance::<Rational>(n, seed).unwrap();
            assert_eq!(adaptive_optimum(&i).unwrap(), best_tree_value(&i), "seed {seed}");
        }
    }

    #[test]
    fn nonadaptive_on_certain_modular_instance_is_optimal() {
        let f = SetFunction::modular(&[q(3, 1), q(1, 1), q(2, 1)]).unwrap();
        let i = inst(&[(1, 1); 3], f, Matroid::uniform(3, 2).unwrap().into());
        let out = nonadaptive_value(&i, 10, 0).unwrap();
        assert!(out.exact);
        assert_eq!(out.value, adaptive_optimum(&i).unwrap());
        assert_eq!(out.value, q(5, 1));
    }

    #[test]
    fn coverage_rank_two_is_within_the_gap() {
        let covers = [0b0011, 0b0110, 0b1100];
        let f = SetFunction::coverage(&covers, &[q(1, 1), q(2, 1), q(3, 1), q(1, 1)]).unwrap();
        let i = inst(&[(1, 2), (3, 4), (2, 5)], f, Matroid::uniform(3, 2).unwrap().into());
        let adaptive = adaptive_optimum(&i).unwrap().to_f64();
        let non = nonadaptive_value(&i, 50, 0).unwrap();
        assert!(non.value >= non.multilinear);
        let e = std::f64::consts::E;
        assert!(non.value.to_f64() >= (1.0 - 1.0 / e - 0.02) * adaptive);
        assert!(non.value.to_f64() <= adaptive + 1e-12);
    }

    #[test]
    fn degenerate_instance_has_ratio_one() {
        let i = inst(&[(0, 1); 2], SetFunction::cardinality(2).unwrap(), Matroid::uniform(2, 1).unwrap().into());
        let r = adaptivity_gap_report(&[i], 10, 0.03, 0, Execution::Sequential).unwrap();
        assert_eq!(r.rows[0].ratio, 1.0);
        assert!(r.all_pass);
        assert!(r.csv().starts_with("instance_id,adaptive,nonadaptive,ratio\n0,0,0,1\n"));
    }

    #[test]
    fn json_round_trip() {
        let i = random_probing_instance::<Rational>(3, 4).unwrap();
        let text = serde_json::to_string(&ProbingInstanceJson::from(&i)).unwrap();
        let back = ProbingInstance::<Rational>::from_json_str(&text).unwrap();
        assert_eq!(back.p, i.p);
        assert_eq!(back.f, i.f);
        let bad = text.replace("\"p\":[", "\"p\":[\"7/2\",");
        assert!(ProbingInstance::<Rational>::from_json_str(&bad).is_err());
    }
}
