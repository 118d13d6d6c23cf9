//! Greedy online contention resolution over items.

use crate::error::{Error, Result};
use crate::optimize::{IndependenceSystem, Matroid, System};
use crate::scalar::Scalar;
use crate::set::{self, Mask};

/// Accepts an active item whenever the accepted set stays independent. On a
/// uniform matroid of rank `k` this is "accept while fewer than `k` are
/// accepted"; on a partition matroid it fills each block up to its cap.
///
/// With `subsample` set, every active item is first kept with probability
/// 1/2 (the surrogate for non-monotone objectives).
#[derive(Debug, Clone)]
pub struct GreedyOcrs {
    system: System,
    pub subsample: bool,
}

impl GreedyOcrs {
    pub fn new(system: System) -> Self {
        Self { system, subsample: false }
    }

    pub fn with_subsampling(mut self, on: bool) -> Self {
        self.subsample = on;
        self
    }

    pub fn n(&self) -> usize {
        self.system.n()
    }

    pub fn system(&self) -> &System {
        &self.system
    }

    pub fn admits(&self, accepted: Mask, i: usize) -> bool {
        self.system.is_independent(accepted | 1 << i)
    }

    pub fn start(&self) -> OcrsState {
        OcrsState::default()
    }
}

pub fn greedy_ocrs_uniform(n: usize, k: usize) -> Result<GreedyOcrs> {
    Ok(GreedyOcrs::new(Matroid::uniform(n, k)?.into()))
}

pub fn greedy_ocrs_partition(n: usize, blocks: Vec<Mask>, caps: Vec<usize>) -> Result<GreedyOcrs> {
    Ok(GreedyOcrs::new(Matroid::partition(n, blocks, caps)?.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decision {
    pub item: usize,
    pub active: bool,
    pub accepted: bool,
}

/// Per-run state: the accepted set and a log of every arrival.
#[derive(Debug, Clone, Default)]
pub struct OcrsState {
    pub accepted: Mask,
    pub log: Vec<Decision>,
}

impl OcrsState {
    /// Presents item `i`; returns whether it was accepted.
    pub fn offer(&mut self, ocrs: &GreedyOcrs, i: usize, active: bool) -> bool {
        let accepted = active && ocrs.admits(self.accepted, i);
        if accepted {
            self.accepted |= 1 << i;
        }
        self.log.push(Decision { item: i, active, accepted });
        accepted
    }
}

/// Items accepted by the greedy OCRS when `active` arrive in `order`.
pub fn run_greedy(ocrs: &GreedyOcrs, order: &[usize], active: Mask) -> Mask {
    let mut acc: Mask = 0;
    for &i in order {
        if set::contains(active, i) && ocrs.admits(acc, i) {
            acc |= 1 << i;
        }
    }
    acc
}

/// `min_i Pr[i accepted] / x_i` over items with `x_i > 0` and over the given
/// orders, with items active independently with probabilities `x`, computed
/// exactly over all `2^n` activation patterns. Subsampling is not applied:
/// this is the selectability of the plain greedy scheme.
pub fn measured_selectability<T: Scalar>(ocrs: &GreedyOcrs, x: &[T], orders: &[Vec<usize>]) -> Result<T> {
    let n = ocrs.n();
    if x.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x.len() });
    }
    let pmf = crate::dist::Distribution::product(&crate::dist::Marginals::new(x.to_vec())?);
    let mut worst = T::one();
    for order in orders {
        let mut accept = vec![T::zero(); n];
        for (s, p) in pmf.pmf().iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            for i in set::elements(run_greedy(ocrs, order, s as Mask)) {
                accept[i] += p;
            }
        }
        for i in 0..n {
            if x[i] > T::zero() {
                let ratio = accept[i].clone() / x[i].clone();
                if ratio < worst {
                    worst = ratio;
                }
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, Rational};

    fn all_orders(n: usize) -> Vec<Vec<usize>> {
        super::super::rounding::permutations(n)
    }

    #[test]
    fn large_rank_accepts_everything() {
        let o = greedy_ocrs_uniform(3, 3).unwrap();
        let x = vec![q(1, 2), q(1, 3), q(1, 4)];
        assert_eq!(measured_selectability(&o, &x, &all_orders(3)).unwrap(), q(1, 1));
    }

    #[test]
    fn rank_one_two_items() {
        let b = q(2, 5);
        let o = greedy_ocrs_uniform(2, 1).unwrap();
        let x = vec![b.clone() / q(2, 1), b.clone() / q(2, 1)];
        let c: Rational = measured_selectability(&o, &x, &all_orders(2)).unwrap();
        assert_eq!(c, q(1, 1) - b.clone() / q(2, 1));
        assert!(c >= q(1, 1) - b);
        let single = vec![q(2, 5), q(0, 1)];
        assert_eq!(measured_selectability(&o, &single, &all_orders(2)).unwrap(), q(1, 1));
    }

    #[test]
    fn selectability_improves_with_rank() {
        let n = 6;
        let b = 0.5;
        let mut last = 0.0;
        for k in 1..=3 {
            let o = greedy_ocrs_uniform(n, k).unwrap();
            let x = vec![b * k as f64 / n as f64; n];
            let c = measured_selectability(&o, &x, &[(0..n).collect()]).unwrap();
            assert!(c >= 1.0 - b - 1e-12);
            assert!(c > last);
            last = c;
        }
    }

    #[test]
    fn state_log_and_partition() {
        let o = greedy_ocrs_partition(4, vec![0b0011, 0b1100], vec![1, 1]).unwrap();
        let mut st = o.start();
        assert!(st.offer(&o, 0, true));
        assert!(!st.offer(&o, 1, true));
        assert!(!st.offer(&o, 2, false));
        assert!(st.offer(&o, 3, true));
        assert_eq!(st.accepted, 0b1001);
        assert_eq!(st.log.len(), 4);
        assert!(o.system().is_independent(st.accepted));
    }
}
