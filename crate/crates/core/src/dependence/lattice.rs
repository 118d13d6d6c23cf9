//! Stochastic dominance on the subset lattice and upset utilities.
//!
//! `upper ⪰ lower` iff there is a coupling `(A, B)` with `A ~ lower`,
//! `B ~ upper` and `A ⊆ B` almost surely (Strassen). Feasibility of the
//! coupling is a transportation problem: the source feeds each support set of
//! `lower` with its mass, `A → B` edges are uncapacitated for `A ⊆ B`, and each
//! support set of `upper` drains its mass into the sink. Dominance holds iff
//! the maximum flow saturates the source. Otherwise the residual-reachable
//! left nodes generate an upset `U` with
//! `Pr_lower[U] - Pr_upper[U] >= 1 - flow > 0`.

use std::sync::OnceLock;

use super::{CertificateKind, Upset, Verdict};
use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::flow::FlowNetwork;
use crate::scalar::Scalar;
use crate::set::{self, Mask};

/// Decides `d1 ⪰ d2`. On failure the witness upset `U` satisfies
/// `Pr_{d2}[U] > Pr_{d1}[U]` and the margin is that difference.
pub fn stochastic_dominance<T: Scalar>(d1: &Distribution<T>, d2: &Distribution<T>) -> Result<Verdict<T>> {
    if d1.n() != d2.n() {
        return Err(Error::DimensionMismatch { expected: d1.n(), got: d2.n() });
    }
    Ok(match stochastic_dominance_pmf(d1.pmf(), d2.pmf()) {
        None => Verdict::holds(),
        Some((upset, margin)) => Verdict::fails(CertificateKind::Dominance { upset }, margin),
    })
}

/// Table-level version of [`stochastic_dominance`] on `log2(len)` bits.
/// Returns `None` when `upper ⪰ lower`, else the witness upset and its margin.
pub fn stochastic_dominance_pmf<T: Scalar>(upper: &[T], lower: &[T]) -> Option<(Upset, T)> {
    let up: Vec<Mask> = support(upper);
    let lo: Vec<Mask> = support(lower);
    let source = 0;
    let sink = 1;
    let left = |k: usize| 2 + k;
    let right = |k: usize| 2 + lo.len() + k;
    let mut g = FlowNetwork::new(2 + lo.len() + up.len());
    let mut lower_mass = T::zero();
    for (k, &a) in lo.iter().enumerate() {
        g.add_edge(source, left(k), lower[a as usize].clone());
        lower_mass += &lower[a as usize];
    }
    for (k, &b) in up.iter().enumerate() {
        g.add_edge(right(k), sink, upper[b as usize].clone());
    }
    let unbounded = T::from_usize(2) + lower_mass.clone();
    for (ka, &a) in lo.iter().enumerate() {
        for (kb, &b) in up.iter().enumerate() {
            if a & b == a {
                g.add_edge(left(ka), right(kb), unbounded.clone());
            }
        }
    }
    let flow = g.max_flow(source, sink);
    let deficit = lower_mass - flow;
    if !deficit.gt_tol(&T::zero()) {
        return None;
    }
    let reach = g.residual_reachable(source);
    let upset = Upset::generated_by(lo.iter().enumerate().filter(|(k, _)| reach[left(*k)]).map(|(_, &a)| a));
    let margin = upset_mass(lower, &upset) - upset_mass(upper, &upset);
    Some((upset, margin))
}

fn support<T: Scalar>(pmf: &[T]) -> Vec<Mask> {
    pmf.iter().enumerate().filter(|(_, p)| !p.is_zero()).map(|(m, _)| m as Mask).collect()
}

pub(crate) fn upset_mass<T: Scalar>(pmf: &[T], upset: &Upset) -> T {
    let mut acc = T::zero();
    for (m, p) in pmf.iter().enumerate() {
        if upset.contains(m as Mask) {
            acc += p;
        }
    }
    acc
}

/// Largest `k` for which [`enumerate_upsets`] is supported (7581 upsets at 5).
pub const MAX_ENUMERATED_UPSET_BITS: usize = 5;

/// All upward-closed families of `2^[k]`, each as a bitset over the `2^k`
/// subsets (bit `m` set iff subset `m` is in the family). Includes the empty
/// and the full family.
pub fn enumerate_upsets(k: usize) -> &'static [u64] {
    static CACHE: [OnceLock<Vec<u64>>; MAX_ENUMERATED_UPSET_BITS + 1] =
        [OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new()];
    assert!(k <= MAX_ENUMERATED_UPSET_BITS, "upset enumeration supports at most {MAX_ENUMERATED_UPSET_BITS} bits");
    CACHE[k].get_or_init(|| {
        // Decide subsets from the top down; a set may join only if all of its
        // one-larger supersets already have.
        let mut order: Vec<Mask> = (0..1u32 << k).collect();
        order.sort_by_key(|&m| std::cmp::Reverse(set::popcount(m)));
        let mut out = Vec::new();
        extend_upsets(&order, 0, 0, k, &mut out);
        out
    })
}

fn extend_upsets(order: &[Mask], pos: usize, family: u64, k: usize, out: &mut Vec<u64>) {
    if pos == order.len() {
        out.push(family);
        return;
    }
    let s = order[pos];
    extend_upsets(order, pos + 1, family, k, out);
    let closed = (0..k).filter(|&j| !set::contains(s, j)).all(|j| family >> (s | 1 << j) & 1 == 1);
    if closed {
        extend_upsets(order, pos + 1, family | 1 << s, k, out);
    }
}

/// Converts a family bitset from [`enumerate_upsets`] to an [`Upset`].
pub fn family_to_upset(family: u64, k: usize) -> Upset {
    Upset::generated_by((0..1u32 << k).filter(|&m| family >> m & 1 == 1))
}

/// Maximizes `Σ_{S ∈ U} w(S)` over upsets `U` of `2^[k]` (`w.len() == 2^k`)
/// as a maximum-weight closure problem. Returns the optimal value and the
/// inclusion-minimal optimal upset.
pub fn max_weight_upset<T: Scalar>(w: &[T], k: usize) -> (T, Upset) {
    let size = 1usize << k;
    assert_eq!(w.len(), size);
    let source = size;
    let sink = size + 1;
    let mut g = FlowNetwork::new(size + 2);
    let mut unbounded = T::one();
    for v in w {
        unbounded += &v.abs_val();
    }
    for (m, v) in w.iter().enumerate() {
        if *v > T::zero() {
            g.add_edge(source, m, v.clone());
        } else if *v < T::zero() {
            g.add_edge(m, sink, -v.clone());
        }
        for j in 0..k {
            if !set::contains(m as Mask, j) {
                g.add_edge(m, m | 1 << j, unbounded.clone());
            }
        }
    }
    g.max_flow(source, sink);
    let reach = g.residual_reachable(source);
    let members: Vec<Mask> = (0..size).filter(|&m| reach[m]).map(|m| m as Mask).collect();
    let mut value = T::zero();
    for &m in &members {
        value += &w[m as usize];
    }
    (value, Upset::generated_by(members))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, Rational};

    #[test]
    fn upset_counts_are_dedekind_numbers() {
        let counts: Vec<usize> = (0..=5).map(|k| enumerate_upsets(k).len()).collect();
        assert_eq!(counts, vec![2, 3, 6, 20, 168, 7581]);
    }

    #[test]
    fn enumerated_families_are_upward_closed() {
        for &fam in enumerate_upsets(3) {
            for m in 0..8u32 {
                for j in 0..3 {
                    if fam >> m & 1 == 1 {
                        assert_eq!(fam >> (m | 1 << j) & 1, 1);
                    }
                }
            }
        }
    }

    #[test]
    fn dominance_fails_with_top_upset() {
        // elements {2,3} as bits 0,1
        let d1 = Distribution::<Rational>::uniform_over(2, &[0b00, 0b01]).unwrap();
        let d2 = Distribution::<Rational>::uniform_over(2, &[0b00, 0b01, 0b11]).unwrap();
        let v = stochastic_dominance(&d1, &d2).unwrap();
        assert!(!v.holds);
        let w = v.witness.unwrap();
        assert_eq!(w.kind, CertificateKind::Dominance { upset: Upset::generated_by([0b11]) });
        assert_eq!(w.margin, q(1, 3));
        assert!(stochastic_dominance(&d2, &d1).unwrap().holds);
    }

    #[test]
    fn reflexive_and_top() {
        let d = Distribution::<Rational>::uniform_over(3, &[0, 0b011, 0b101, 0b110]).unwrap();
        assert!(stochastic_dominance(&d, &d).unwrap().holds);
        let top = Distribution::<Rational>::point_mass(3, 0b111).unwrap();
        assert!(stochastic_dominance(&top, &d).unwrap().holds);
        assert!(!stochastic_dominance(&d, &top).unwrap().holds);
    }

    #[test]
    fn closure_matches_enumeration() {
        let w: Vec<Rational> = [3, -2, 1, -4, 5, -1, -2, 2].iter().map(|&v| q(v, 1)).collect();
        let best = enumerate_upsets(3)
            .iter()
            .map(|&fam| (0..8).filter(|&m| fam >> m & 1 == 1).map(|m| w[m].clone()).sum::<Rational>())
            .max()
            .unwrap();
        let (value, upset) = max_weight_upset(&w, 3);
        assert_eq!(value, best);
        let recomputed: Rational = (0..8u32).filter(|&m| upset.contains(m)).map(|m| w[m as usize].clone()).sum();
        assert_eq!(recomputed, value);
    }
}
