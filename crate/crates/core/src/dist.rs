//! Explicit probability mass tables over `2^U`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{self, Scalar};
use crate::set::{self, GroundSet, Mask};
use crate::setfn::SetFunction;

/// A point of `[0,1]^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginals<T: Scalar>(Vec<T>);

impl<T: Scalar> Marginals<T> {
    pub fn new(x: Vec<T>) -> Result<Self> {
        for (i, v) in x.iter().enumerate() {
            if T::zero().gt_tol(v) || v.gt_tol(&T::one()) || !v.is_finite_val() {
                return Err(Error::InvalidTable(format!("marginal x[{i}] = {v} outside [0,1]")));
            }
        }
        Ok(Self(x))
    }

    pub fn indicator(n: usize, s: Mask) -> Self {
        Self((0..n).map(|i| if set::contains(s, i) { T::one() } else { T::zero() }).collect())
    }

    pub fn uniform(n: usize, v: T) -> Result<Self> {
        Self::new(vec![v; n])
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<T> {
        self.0
    }

    pub fn get(&self, i: usize) -> &T {
        &self.0[i]
    }

    pub fn with(&self, i: usize, v: T) -> Self {
        let mut x = self.0.clone();
        x[i] = v;
        Self(x)
    }
}

impl<T: Scalar> std::ops::Index<usize> for Marginals<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "", deserialize = ""))]
#[serde(into = "crate::json::DistributionJson", try_from = "crate::json::DistributionJson")]
pub struct Distribution<T: Scalar> {
    ground: GroundSet,
    pmf: Vec<T>,
}

impl<T: Scalar> Distribution<T> {
    /// Validates nonnegativity and total mass 1 (exact for rationals, 1e-12
    /// for floats).
    pub fn new(n: usize, pmf: Vec<T>) -> Result<Self> {
        let ground = GroundSet::new(n)?;
        if pmf.len() != ground.size() {
            return Err(Error::InvalidTable(format!(
                "pmf has {} entries, expected 2^{} = {}",
                pmf.len(),
                n,
                ground.size()
            )));
        }
        for (m, p) in pmf.iter().enumerate() {
            if !p.is_finite_val() || T::zero().gt_tol(p) {
                return Err(Error::InvalidTable(format!("pmf[{m}] = {p} is negative or not finite")));
            }
        }
        let total = scalar::sum(pmf.iter().cloned());
        if !total.approx_eq(&T::one()) {
            return Err(Error::InvalidTable(format!("pmf sums to {total}, expected 1")));
        }
        Ok(Self { ground, pmf })
    }

    /// Normalizes nonnegative weights into a distribution.
    pub fn from_weights(n: usize, weights: Vec<T>) -> Result<Self> {
        let total = scalar::sum(weights.iter().cloned());
        if !(total > T::zero()) {
            return Err(Error::InvalidTable("weights have zero total mass".into()));
        }
        let pmf = weights.into_iter().map(|w| w / total.clone()).collect();
        Self::new(n, pmf)
    }

    pub fn point_mass(n: usize, s: Mask) -> Result<Self> {
        let ground = GroundSet::new(n)?;
        let mut pmf = vec![T::zero(); ground.size()];
        pmf[(s & ground.full()) as usize] = T::one();
        Self::new(n, pmf)
    }

    /// Uniform over the listed sets (repetitions add mass).
    pub fn uniform_over(n: usize, sets: &[Mask]) -> Result<Self> {
        let ground = GroundSet::new(n)?;
        let mut weights = vec![T::zero(); ground.size()];
        for &s in sets {
            if s & !ground.full() != 0 {
                return Err(Error::InvalidTable(format!("set {s:#b} outside ground set of size {n}")));
            }
            weights[s as usize] += &T::one();
        }
        Self::from_weights(n, weights)
    }

    /// `pmf(S) = Π_{i∈S} x_i Π_{j∉S} (1 - x_j)`
    pub fn product(x: &Marginals<T>) -> Self {
        let n = x.n();
        let mut pmf = vec![T::one()];
        for i in 0..n {
            let xi = x[i].clone();
            let yi = T::one() - xi.clone();
            let mut next = Vec::with_capacity(pmf.len() * 2);
            next.extend(pmf.iter().map(|p| p.clone() * yi.clone()));
            next.extend(pmf.iter().map(|p| p.clone() * xi.clone()));
            pmf = next;
        }
        Self { ground: GroundSet::new(n).expect("n checked by caller"), pmf }
    }

    pub fn n(&self) -> usize {
        self.ground.n()
    }

    pub fn ground(&self) -> GroundSet {
        self.ground
    }

    pub fn pmf(&self) -> &[T] {
        &self.pmf
    }

    #[inline]
    pub fn prob(&self, s: Mask) -> &T {
        &self.pmf[s as usize]
    }

    /// Sets with positive probability.
    pub fn support(&self) -> impl Iterator<Item = Mask> + '_ {
        self.pmf.iter().enumerate().filter(|(_, p)| **p > T::zero()).map(|(m, _)| m as Mask)
    }

    pub fn convert<U: Scalar>(&self) -> Distribution<U> {
        Distribution { ground: self.ground, pmf: self.pmf.iter().map(|p| U::from_rational(&p.to_rational())).collect() }
    }

    /// `x_i = Σ_{S ∋ i} pmf(S)`
    pub fn marginals(&self) -> Marginals<T> {
        let n = self.n();
        let mut x = vec![T::zero(); n];
        for (m, p) in self.pmf.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            for i in set::elements(m as Mask) {
                x[i] += p;
            }
        }
        Marginals(x)
    }

    /// `Pr[S ∈ family]` for a predicate on masks.
    pub fn prob_where(&self, mut pred: impl FnMut(Mask) -> bool) -> T {
        scalar::sum(self.pmf.iter().enumerate().filter(|(m, _)| pred(*m as Mask)).map(|(_, p)| p.clone()))
    }

    /// `Σ_S pmf(S) f(S)`
    pub fn expect(&self, f: &SetFunction<T>) -> Result<T> {
        f.check_same_n(self.n())?;
        let mut acc = T::zero();
        for (p, v) in self.pmf.iter().zip(f.values()) {
            acc.add_mul_assign(p, v);
        }
        Ok(acc)
    }

    /// Law of `S ∩ keep`, re-indexed onto `|keep|` bits.
    pub fn project(&self, keep: Mask) -> Result<Self> {
        let keep = keep & self.ground.full();
        let k = set::popcount(keep);
        let mut pmf = vec![T::zero(); 1 << k];
        for (m, p) in self.pmf.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            pmf[set::compress(m as Mask, keep) as usize] += p;
        }
        Ok(Self { ground: GroundSet::new(k)?, pmf })
    }

    /// Law of `S ∖ i` given `i ∈ S` (or `i ∉ S`), over `U ∖ i` re-indexed onto
    /// `n - 1` bits.
    pub fn condition_on_element(&self, i: usize, present: bool) -> Result<Self> {
        self.ground.check_element(i)?;
        let rest = self.ground.full() & !(1 << i);
        let mut pmf = vec![T::zero(); 1 << (self.n() - 1)];
        let mut mass = T::zero();
        for (m, p) in self.pmf.iter().enumerate() {
            if set::contains(m as Mask, i) != present || p.is_zero() {
                continue;
            }
            pmf[set::compress(m as Mask, rest) as usize] += p;
            mass += p;
        }
        if !(mass > T::zero()) {
            return Err(Error::ZeroProbabilityEvent { element: i, present });
        }
        for p in &mut pmf {
            *p /= &mass;
        }
        Ok(Self { ground: GroundSet::new(self.n() - 1)?, pmf })
    }

    /// Law of `S ∖ cond` given `S ∩ cond = fixed`, over `U ∖ cond` re-indexed.
    /// Returns `None` when the conditioning event has probability zero.
    pub fn condition_on_pattern(&self, cond: Mask, fixed: Mask) -> Option<Self> {
        let rest = self.ground.full() & !cond;
        let mut pmf = vec![T::zero(); 1 << set::popcount(rest)];
        let mut mass = T::zero();
        for (m, p) in self.pmf.iter().enumerate() {
            if (m as Mask) & cond != fixed || p.is_zero() {
                continue;
            }
            pmf[set::compress(m as Mask, rest) as usize] += p;
            mass += p;
        }
        if !(mass > T::zero()) {
            return None;
        }
        for p in &mut pmf {
            *p /= &mass;
        }
        Some(Self { ground: GroundSet::new(set::popcount(rest)).ok()?, pmf })
    }
}

/// Independent product of `a` and `b`, placed on the disjoint element sets
/// `a_domain` and `b_domain` of an `n`-element ground set. Element `k` of `a`
/// maps to the `k`-th lowest bit of `a_domain` (likewise for `b`).
pub fn product<T: Scalar>(
    a: &Distribution<T>,
    a_domain: Mask,
    b: &Distribution<T>,
    b_domain: Mask,
    n: usize,
) -> Result<Distribution<T>> {
    let ground = GroundSet::new(n)?;
    if a_domain & b_domain != 0 {
        return Err(Error::OverlappingGroundSets(a_domain & b_domain));
    }
    for (d, dom) in [(a, a_domain), (b, b_domain)] {
        if set::popcount(dom) != d.n() || dom & !ground.full() != 0 {
            return Err(Error::InvalidTable(format!(
                "domain {dom:#b} does not embed a ground set of size {} into n = {n}",
                d.n()
            )));
        }
    }
    let mut pmf = vec![T::zero(); ground.size()];
    for (sa, pa) in a.pmf.iter().enumerate() {
        if pa.is_zero() {
            continue;
        }
        let ea = set::expand(sa as Mask, a_domain);
        for (sb, pb) in b.pmf.iter().enumerate() {
            if pb.is_zero() {
                continue;
            }
            pmf[(ea | set::expand(sb as Mask, b_domain)) as usize] = pa.clone() * pb.clone();
        }
    }
    Ok(Distribution { ground, pmf })
}

/// `a` on the low bits, `b` on the next `b.n()` bits.
pub fn product_stacked<T: Scalar>(a: &Distribution<T>, b: &Distribution<T>) -> Result<Distribution<T>> {
    let n = a.n() + b.n();
    product(a, set::full_mask(a.n()), b, set::full_mask(n) & !set::full_mask(a.n()), n)
}
