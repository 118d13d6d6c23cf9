//! Matroid polytopes: membership by rank inequalities and decomposition of
//! base-polytope points into convex combinations of bases.

use super::system::{IndependenceSystem, Matroid};
use crate::dist::Marginals;
use crate::error::{Error, Result};
use crate::lp::{LinearProgram, Relation};
use crate::scalar::{self, Scalar};
use crate::set::{self, Mask};

fn mass<T: Scalar>(x: &[T], a: Mask) -> T {
    scalar::sum(set::elements(a).map(|i| x[i].clone()))
}

/// A set `A` with `x(A) > r(A)` (beyond tolerance), if any.
pub fn rank_violation<T: Scalar, S: IndependenceSystem>(system: &S, x: &[T]) -> Option<Mask> {
    (1..=set::full_mask(system.n())).find(|&a| mass(x, a).gt_tol(&T::from_usize(system.rank_of(a))))
}

/// `x ≥ 0` and `x(A) ≤ r(A)` for every `A`: the independence polytope of a
/// matroid (the convex hull of its independent sets).
pub fn in_independence_polytope<T: Scalar>(m: &Matroid, x: &Marginals<T>) -> bool {
    x.n() == m.n() && rank_violation(m, x.as_slice()).is_none()
}

/// Independence polytope plus `x(U) = r(U)`: the hull of the bases.
pub fn in_base_polytope<T: Scalar>(m: &Matroid, x: &Marginals<T>) -> bool {
    in_independence_polytope(m, x) && mass(x.as_slice(), set::full_mask(m.n())).approx_eq(&T::from_usize(m.rank()))
}

/// Writes `x` (in the base polytope) as `Σ λ_k 1_{B_k}` with bases `B_k` and
/// `Σ λ_k = 1`.
///
/// Each round takes a max-weight base under the residual and removes the
/// largest multiple that keeps the rescaled residual in the base polytope,
/// which makes a new rank inequality tight; at most `n + 1` rounds in exact
/// arithmetic. If a round makes no progress (float ties), an LP over all bases
/// finishes the job.
pub fn decompose_into_bases<T: Scalar>(m: &Matroid, x: &Marginals<T>) -> Result<Vec<(Mask, T)>> {
    if x.n() != m.n() {
        return Err(Error::DimensionMismatch { expected: m.n(), got: x.n() });
    }
    if !in_base_polytope(m, x) {
        return Err(Error::OutsidePolytope("marginals are not a convex combination of bases".into()));
    }
    let n = m.n();
    let full = set::full_mask(n);
    let ranks: Vec<T> = (0..=full).map(|a| T::from_usize(m.rank_of(a))).collect();
    let mut y: Vec<T> = x.as_slice().to_vec();
    let mut remaining = T::one();
    let mut parts: Vec<(Mask, T)> = Vec::new();
    for _ in 0..=n + 1 {
        if !remaining.gt_tol(&T::zero()) {
            break;
        }
        let b = m.linear_oracle(&y);
        let mut lambda = remaining.clone();
        for i in set::elements(b) {
            lambda = scalar::min_of(lambda, y[i].clone());
        }
        for a in 1..=full {
            let slack_rank = ranks[a as usize].clone() - T::from_usize(set::popcount(a & b));
            if slack_rank > T::zero() {
                let room = remaining.clone() * ranks[a as usize].clone() - mass(&y, a);
                lambda = scalar::min_of(lambda, room / slack_rank);
            }
        }
        if !lambda.gt_tol(&T::zero()) {
            return decompose_by_lp(m, x);
        }
        for i in set::elements(b) {
            y[i] -= &lambda;
        }
        remaining -= &lambda;
        match parts.iter_mut().find(|(s, _)| *s == b) {
            Some((_, w)) => *w += &lambda,
            None => parts.push((b, lambda)),
        }
    }
    if remaining.gt_tol(&T::zero()) {
        return decompose_by_lp(m, x);
    }
    Ok(parts)
}

fn decompose_by_lp<T: Scalar>(m: &Matroid, x: &Marginals<T>) -> Result<Vec<(Mask, T)>> {
    let bases = m.maximal_sets();
    let mut lp = LinearProgram::new(bases.len());
    for i in 0..m.n() {
        let coeffs = bases.iter().enumerate().filter(|(_, &b)| set::contains(b, i)).map(|(k, _)| (k, T::one())).collect();
        lp.add_row(coeffs, Relation::Eq, x[i].clone());
    }
    lp.add_row((0..bases.len()).map(|k| (k, T::one())).collect(), Relation::Eq, T::one());
    let sol = lp
        .minimize()?
        .optimal()
        .map_err(|_| Error::OutsidePolytope("no convex combination of bases matches the marginals".into()))?;
    Ok(bases.into_iter().zip(sol.x).filter(|(_, w)| w.gt_tol(&T::zero())).collect())
}

/// `Σ λ_k 1_{B_k}`.
pub fn combination_point<T: Scalar>(n: usize, parts: &[(Mask, T)]) -> Vec<T> {
    let mut x = vec![T::zero(); n];
    for (b, w) in parts {
        for i in set::elements(*b) {
            x[i] += w;
        }
    }
    x
}
