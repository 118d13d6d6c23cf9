//! Dense set functions `f : 2^U -> R` indexed by bitmask.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::set::{self, GroundSet, Mask};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "", deserialize = ""))]
#[serde(into = "crate::json::SetFunctionJson", try_from = "crate::json::SetFunctionJson")]
pub struct SetFunction<T: Scalar> {
    ground: GroundSet,
    values: Vec<T>,
}

impl<T: Scalar> SetFunction<T> {
    pub fn new(n: usize, values: Vec<T>) -> Result<Self> {
        let ground = GroundSet::new(n)?;
        if values.len() != ground.size() {
            return Err(Error::InvalidTable(format!(
                "set function table has {} entries, expected 2^{} = {}",
                values.len(),
                n,
                ground.size()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite_val()) {
            return Err(Error::InvalidTable(format!("non-finite value at index {pos}")));
        }
        Ok(Self { ground, values })
    }

    pub fn from_fn(n: usize, f: impl FnMut(Mask) -> T) -> Result<Self> {
        let ground = GroundSet::new(n)?;
        let values = ground.subsets().map(f).collect();
        Ok(Self { ground, values })
    }

    pub fn constant(n: usize, c: T) -> Result<Self> {
        Self::from_fn(n, |_| c.clone())
    }

    /// `f(S) = |S|`
    pub fn cardinality(n: usize) -> Result<Self> {
        Self::from_fn(n, |s| T::from_usize(set::popcount(s)))
    }

    /// `f(S) = min(cap, |S ∩ within|)`, the rank function of a uniform matroid on `within`.
    pub fn capped_count(n: usize, within: Mask, cap: usize) -> Result<Self> {
        Self::from_fn(n, |s| T::from_usize(set::popcount(s & within).min(cap)))
    }

    /// `f(S) = Σ_{i ∈ S} w_i`
    pub fn modular(weights: &[T]) -> Result<Self> {
        Self::from_fn(weights.len(), |s| crate::scalar::sum(set::elements(s).map(|i| weights[i].clone())))
    }

    /// Weighted coverage: element `i` covers the universe items in `covers[i]`
    /// (a bitmask over items with weights `item_weights`).
    pub fn coverage(covers: &[Mask], item_weights: &[T]) -> Result<Self> {
        Self::from_fn(covers.len(), |s| {
            let covered = set::elements(s).fold(0, |acc, i| acc | covers[i]);
            crate::scalar::sum(set::elements(covered).map(|k| item_weights[k].clone()))
        })
    }

    pub fn n(&self) -> usize {
        self.ground.n()
    }

    pub fn ground(&self) -> GroundSet {
        self.ground
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    #[inline]
    pub fn value(&self, s: Mask) -> &T {
        &self.values[s as usize]
    }

    pub fn map(&self, mut g: impl FnMut(Mask, &T) -> T) -> Self {
        let values = self.values.iter().enumerate().map(|(m, v)| g(m as Mask, v)).collect();
        Self { ground: self.ground, values }
    }

    pub fn scaled(&self, c: &T) -> Self {
        self.map(|_, v| v.clone() * c.clone())
    }

    pub fn shifted(&self, c: &T) -> Self {
        self.map(|_, v| v.clone() + c.clone())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_n(other.n())?;
        Ok(self.map(|m, v| v.clone() + other.value(m).clone()))
    }

    pub fn negated(&self) -> Self {
        self.map(|_, v| -v.clone())
    }

    /// Changes backend, e.g. rational -> float.
    pub fn convert<U: Scalar>(&self) -> SetFunction<U> {
        SetFunction { ground: self.ground, values: self.values.iter().map(|v| U::from_rational(&v.to_rational())).collect() }
    }

    pub(crate) fn check_same_n(&self, n: usize) -> Result<()> {
        if self.n() != n {
            return Err(Error::DimensionMismatch { expected: self.n(), got: n });
        }
        Ok(())
    }

    /// First local submodularity violation `(S, i, j)` with
    /// `f(S+i) + f(S+j) < f(S+i+j) + f(S)` beyond tolerance.
    pub fn submodularity_violation(&self) -> Option<(Mask, usize, usize)> {
        let n = self.n();
        for s in self.ground.subsets() {
            for i in 0..n {
                if set::contains(s, i) {
                    continue;
                }
                for j in (i + 1)..n {
                    if set::contains(s, j) {
                        continue;
                    }
                    let lhs = self.value(s | 1 << i).clone() + self.value(s | 1 << j).clone();
                    let rhs = self.value(s | 1 << i | 1 << j).clone() + self.value(s).clone();
                    if rhs.gt_tol(&lhs) {
                        return Some((s, i, j));
                    }
                }
            }
        }
        None
    }

    /// Local characterization: `f(S+i) + f(S+j) >= f(S+i+j) + f(S)` for all
    /// `S` and distinct `i, j ∉ S`.
    pub fn is_submodular(&self) -> bool {
        self.submodularity_violation().is_none()
    }

    pub fn is_monotone(&self) -> bool {
        let n = self.n();
        self.ground.subsets().all(|s| {
            (0..n).filter(|&i| !set::contains(s, i)).all(|i| !self.value(s).gt_tol(self.value(s | 1 << i)))
        })
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|v| !T::zero().gt_tol(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, Rational};

    #[test]
    fn cardinality_is_submodular_and_monotone() {
        let f = SetFunction::<Rational>::cardinality(4).unwrap();
        assert!(f.is_submodular());
        assert!(f.is_monotone());
    }

    #[test]
    fn capped_count_is_submodular() {
        let f = SetFunction::<Rational>::capped_count(4, 0b1111, 2).unwrap();
        assert!(f.is_submodular());
        assert!(f.is_monotone());
    }

    #[test]
    fn square_of_size_is_not_submodular() {
        let f = SetFunction::<Rational>::from_fn(2, |s| q((s.count_ones() * s.count_ones()) as i64, 1)).unwrap();
        assert!(!f.is_submodular());
        assert_eq!(f.submodularity_violation(), Some((0, 0, 1)));
    }

    #[test]
    fn max_of_two_indicators_is_monotone() {
        let f = SetFunction::<Rational>::from_fn(3, |s| q((s & 0b11 != 0) as i64, 1)).unwrap();
        assert!(f.is_monotone());
        assert!(f.is_submodular());
    }

    #[test]
    fn negative_cardinality_is_not_monotone() {
        let f = SetFunction::<f64>::cardinality(3).unwrap().negated();
        assert!(!f.is_monotone());
        assert!(f.is_submodular());
    }

    #[test]
    fn table_length_is_checked() {
        assert!(SetFunction::<f64>::new(2, vec![0.0; 3]).is_err());
        assert!(SetFunction::<f64>::new(1, vec![0.0, f64::NAN]).is_err());
    }

    #[test]
    fn coverage_function() {
        let f = SetFunction::<Rational>::coverage(&[0b011, 0b110, 0b100], &[q(1, 1), q(2, 1), q(3, 1)]).unwrap();
        assert_eq!(*f.value(0b001), q(3, 1));
        assert_eq!(*f.value(0b011), q(6, 1));
        assert_eq!(*f.value(0b110), q(5, 1));
        assert!(f.is_submodular() && f.is_monotone());
    }
}
