//! WNR samplers with prescribed marginals and the sample-and-round
//! maximization pipeline.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::greedy::{continuous_greedy, FractionalSolution};
use super::polytope::{decompose_into_bases, in_base_polytope, in_independence_polytope};
use super::swap::{swap_round, swap_round_pmf};
use super::system::{IndependenceSystem, Matroid, System};
use crate::dependence::check_wnr;
use crate::dist::{Distribution, Marginals};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::set::{self, Mask};
use crate::setfn::SetFunction;

/// A distribution over independent sets with marginals `x` that is weakly
/// negatively regressed.
#[derive(Debug, Clone)]
pub enum WnrSampler<T: Scalar> {
    /// Swap rounding of a base decomposition. `matroid` may carry padding
    /// elements above bit `n - 1`, which are dropped from every sample.
    SwapRound { matroid: Matroid, parts: Vec<(Mask, T)>, n: usize },
    /// A caller-supplied distribution, validated on construction.
    Explicit(Distribution<T>),
}

impl<T: Scalar> WnrSampler<T> {
    /// Built-in sampler for a matroid and `x` in its independence polytope.
    ///
    /// Points of the base polytope are swap-rounded directly. Other points of
    /// a uniform or partition matroid are first padded to a base-polytope
    /// point with free dummy elements (one per unit of capacity), and the
    /// dummies are discarded after rounding; discarding coordinates preserves
    /// WNR.
    pub fn for_system(system: &System, x: &Marginals<T>) -> Result<Self> {
        let m = system.as_matroid().ok_or_else(|| {
            Error::InvalidSystem("no built-in WNR sampler for a non-matroid family; supply a distribution".into())
        })?;
        if x.n() != m.n() {
            return Err(Error::DimensionMismatch { expected: m.n(), got: x.n() });
        }
        if !in_independence_polytope(m, x) {
            return Err(Error::OutsidePolytope("marginals violate a rank inequality".into()));
        }
        if in_base_polytope(m, x) {
            let parts = decompose_into_bases(m, x)?;
            return Ok(WnrSampler::SwapRound { matroid: m.clone(), parts, n: m.n() });
        }
        let (padded, px) = pad_to_base(m, x)?;
        let parts = decompose_into_bases(&padded, &px)?;
        Ok(WnrSampler::SwapRound { matroid: padded, parts, n: m.n() })
    }

    /// Uses the decomposition computed by continuous greedy (`b = 1`).
    pub fn from_solution(system: &System, sol: &FractionalSolution<T>) -> Result<Self> {
        match system.as_matroid() {
            Some(m) if sol.b.approx_eq(&T::one()) => {
                Ok(WnrSampler::SwapRound { matroid: m.clone(), parts: sol.decomposition.clone(), n: m.n() })
            }
            _ => Self::for_system(system, &sol.x),
        }
    }

    /// Wraps `d` after checking support, marginals and WNR.
    pub fn explicit<S: IndependenceSystem>(system: &S, x: &Marginals<T>, d: Distribution<T>) -> Result<Self> {
        if d.n() != system.n() {
            return Err(Error::DimensionMismatch { expected: system.n(), got: d.n() });
        }
        if let Some(s) = d.support().find(|&s| !system.is_independent(s)) {
            return Err(Error::InvalidSystem(format!("support contains dependent set {}", set::display(s))));
        }
        let got = d.marginals();
        if got.as_slice().iter().zip(x.as_slice()).any(|(a, b)| !a.approx_eq(b)) {
            return Err(Error::InvalidTable("distribution marginals differ from x".into()));
        }
        if !check_wnr(&d).holds {
            return Err(Error::InvalidTable("supplied distribution is not WNR".into()));
        }
        Ok(WnrSampler::Explicit(d))
    }

    pub fn n(&self) -> usize {
        match self {
            WnrSampler::SwapRound { n, .. } => *n,
            WnrSampler::Explicit(d) => d.n(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Mask> {
        match self {
            WnrSampler::SwapRound { matroid, parts, n } => Ok(swap_round(matroid, parts, rng)? & set::full_mask(*n)),
            WnrSampler::Explicit(d) => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                let mut last = 0;
                for s in d.support() {
                    acc += d.prob(s).to_f64();
                    last = s;
                    if u < acc {
                        return Ok(s);
                    }
                }
                Ok(last)
            }
        }
    }

    /// The exact law of [`Self::sample`].
    pub fn distribution(&self) -> Result<Distribution<T>> {
        match self {
            WnrSampler::SwapRound { matroid, parts, n } => {
                let d = swap_round_pmf(matroid, parts)?;
                if d.n() == *n {
                    Ok(d)
                } else {
                    d.project(set::full_mask(*n))
                }
            }
            WnrSampler::Explicit(d) => Ok(d.clone()),
        }
    }
}

fn pad_to_base<T: Scalar>(m: &Matroid, x: &Marginals<T>) -> Result<(Matroid, Marginals<T>)> {
    let n = m.n();
    let mut px = x.as_slice().to_vec();
    // (block over the original elements, effective capacity)
    let groups: Vec<(Mask, usize)> = match m {
        Matroid::Uniform { n, k } => vec![(set::full_mask(*n), *k)],
        Matroid::Partition { blocks, caps, .. } => {
            blocks.iter().zip(caps).map(|(&b, &c)| (b, c.min(set::popcount(b)))).collect()
        }
        Matroid::Explicit(_) => {
            return Err(Error::OutsidePolytope(
                "explicit matroids are only sampled from points of the base polytope".into(),
            ))
        }
    };
    let extra: usize = groups.iter().map(|g| g.1).sum();
    if n + extra > set::MAX_N {
        return Err(Error::SizeCap { what: "padding to the base polytope", detail: format!("n + rank = {} > {}", n + extra, set::MAX_N) });
    }
    let mut next = n;
    let mut blocks = Vec::new();
    let mut caps = Vec::new();
    for (b, c) in groups {
        let mut block = b;
        if c > 0 {
            let used = crate::scalar::sum(set::elements(b).map(|i| x[i].clone()));
            let each = (T::from_usize(c) - used) / T::from_usize(c);
            for _ in 0..c {
                block |= 1 << next;
                px.push(each.clone());
                next += 1;
            }
        }
        blocks.push(block);
        caps.push(c);
    }
    let padded = match m {
        Matroid::Uniform { k, .. } => Matroid::uniform(next, *k)?,
        _ => Matroid::partition(next, blocks, caps)?,
    };
    Ok((padded, Marginals::new(px)?))
}

/// Continuous greedy (`b = 1`) plus its sampler; draw with [`Self::sample`].
#[derive(Debug, Clone)]
pub struct MaximizationPlan<T: Scalar> {
    pub solution: FractionalSolution<T>,
    pub sampler: WnrSampler<T>,
}

impl<T: Scalar> MaximizationPlan<T> {
    pub fn new(f: &SetFunction<T>, system: &System, steps: usize) -> Result<Self> {
        let solution = continuous_greedy(f, system, T::one(), steps)?;
        let sampler = WnrSampler::from_solution(system, &solution)?;
        Ok(Self { solution, sampler })
    }

    pub fn sample(&self, seed: u64) -> Result<Mask> {
        self.sampler.sample(&mut ChaCha8Rng::seed_from_u64(seed))
    }

    /// `E[f(S)]` under the exact rounding law.
    pub fn expected_value(&self, f: &SetFunction<T>) -> Result<T> {
        self.sampler.distribution()?.expect(f)
    }
}

/// Continuous greedy followed by one swap-rounded sample.
pub fn maximize_submodular<T: Scalar>(f: &SetFunction<T>, system: &System, steps: usize, seed: u64) -> Result<Mask> {
    MaximizationPlan::new(f, system, steps)?.sample(seed)
}

/// Best independent set by enumeration (ties to the lowest mask).
pub fn brute_force_max<T: Scalar, S: IndependenceSystem>(f: &SetFunction<T>, system: &S) -> Result<(Mask, T)> {
    if f.n() != system.n() {
        return Err(Error::DimensionMismatch { expected: system.n(), got: f.n() });
    }
    let mut best = (0, f.value(0).clone());
    for s in 1..=set::full_mask(system.n()) {
        if system.is_independent(s) && *f.value(s) > best.1 {
            best = (s, f.value(s).clone());
        }
    }
    Ok(best)
}
