//! Randomized swap rounding of a convex combination of bases.

use std::collections::BTreeMap;

use rand::Rng;

use super::system::{IndependenceSystem, Matroid};
use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::scalar::{self, Scalar};
use crate::set::{self, Mask};

fn validate<T: Scalar>(m: &Matroid, parts: &[(Mask, T)]) -> Result<()> {
    if parts.is_empty() {
        return Err(Error::InvalidTable("swap rounding needs a nonempty decomposition".into()));
    }
    for (b, w) in parts {
        if !m.is_maximal(*b) {
            return Err(Error::InvalidSystem(format!("{} is not a base", set::display(*b))));
        }
        if !(*w > T::zero()) {
            return Err(Error::InvalidTable(format!("nonpositive weight {w} in decomposition")));
        }
    }
    let total = scalar::sum(parts.iter().map(|(_, w)| w.clone()));
    if !total.approx_eq(&T::one()) {
        return Err(Error::InvalidTable(format!("decomposition weights sum to {total}, expected 1")));
    }
    Ok(())
}

/// Lowest `i ∈ B1 ∖ B2` and the lowest `j ∈ B2 ∖ B1` with both `B1 - i + j`
/// and `B2 - j + i` bases (strong exchange guarantees one exists).
fn exchange_pair(m: &Matroid, b1: Mask, b2: Mask) -> Result<(usize, usize)> {
    let i = set::elements(b1 & !b2).next().expect("bases differ");
    set::elements(b2 & !b1)
        .find(|&j| m.is_independent(b1 & !(1 << i) | 1 << j) && m.is_independent(b2 & !(1 << j) | 1 << i))
        .map(|j| (i, j))
        .ok_or_else(|| Error::Invariant("no symmetric exchange between bases".into()))
}

/// One draw: bases are merged left to right; in each exchange the first base
/// absorbs `j` with probability `β2 / (β1 + β2)`, otherwise the second absorbs `i`.
pub fn swap_round<T: Scalar, R: Rng + ?Sized>(m: &Matroid, parts: &[(Mask, T)], rng: &mut R) -> Result<Mask> {
    validate(m, parts)?;
    let (mut c, mut beta) = (parts[0].0, parts[0].1.to_f64());
    for (b, w) in &parts[1..] {
        let (mut b1, mut b2, w) = (c, *b, w.to_f64());
        while b1 != b2 {
            let (i, j) = exchange_pair(m, b1, b2)?;
            if rng.gen::<f64>() < beta / (beta + w) {
                b2 = b2 & !(1 << j) | 1 << i;
            } else {
                b1 = b1 & !(1 << i) | 1 << j;
            }
        }
        c = b1;
        beta += w;
    }
    Ok(c)
}

/// The exact output law of [`swap_round`]. The merged base after each stage
/// is a Markov state, so the law is propagated stage by stage.
pub fn swap_round_pmf<T: Scalar>(m: &Matroid, parts: &[(Mask, T)]) -> Result<Distribution<T>> {
    validate(m, parts)?;
    let mut frontier: BTreeMap<Mask, T> = BTreeMap::from([(parts[0].0, T::one())]);
    let mut beta = parts[0].1.clone();
    for (b, w) in &parts[1..] {
        let mut next: BTreeMap<Mask, T> = BTreeMap::new();
        let keep = beta.clone() / (beta.clone() + w.clone());
        for (c, p) in frontier {
            merge_law(m, c, *b, &keep, p, &mut next)?;
        }
        frontier = next;
        beta += w;
    }
    let mut pmf = vec![T::zero(); 1 << m.n()];
    for (c, p) in frontier {
        pmf[c as usize] += &p;
    }
    Distribution::new(m.n(), pmf)
}

fn merge_law<T: Scalar>(m: &Matroid, b1: Mask, b2: Mask, keep: &T, p: T, out: &mut BTreeMap<Mask, T>) -> Result<()> {
    if b1 == b2 {
        *out.entry(b1).or_insert_with(T::zero) += &p;
        return Ok(());
    }
    let (i, j) = exchange_pair(m, b1, b2)?;
    let pk = p.clone() * keep.clone();
    let pa = p - pk.clone();
    merge_law(m, b1, b2 & !(1 << j) | 1 << i, keep, pk, out)?;
    merge_law(m, b1 & !(1 << i) | 1 << j, b2, keep, pa, out)
}

#[cfg(test)]
mod tests {
    use super::super::polytope::decompose_into_bases;
    use super::*;
    use crate::dependence::check_wnr;
    use crate::dist::Marginals;
    use crate::scalar::{q, Rational};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn point_decomposition_is_deterministic() {
        let m = Matroid::uniform(3, 2).unwrap();
        let parts = vec![(0b011, q(1, 1))];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(swap_round(&m, &parts, &mut rng).unwrap(), 0b011);
        assert_eq!(*swap_round_pmf(&m, &parts).unwrap().prob(0b011), q(1, 1));
    }

    #[test]
    fn exact_law_preserves_marginals_and_is_wnr() {
        let m = Matroid::uniform(4, 2).unwrap();
        let x = Marginals::new(vec![q(7, 10), q(3, 5), q(1, 2), q(1, 5)]).unwrap();
        let parts = decompose_into_bases(&m, &x).unwrap();
        let d = swap_round_pmf(&m, &parts).unwrap();
        assert_eq!(d.marginals(), x);
        assert!(d.support().all(|s| m.is_maximal(s)));
        assert!(check_wnr(&d).holds);
    }

    #[test]
    fn sampling_matches_exact_law() {
        let m = Matroid::uniform(3, 1).unwrap();
        let parts: Vec<(Mask, Rational)> = vec![(0b001, q(1, 2)), (0b010, q(1, 3)), (0b100, q(1, 6))];
        let d = swap_round_pmf(&m, &parts).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let trials = 20_000;
        let mut counts = [0usize; 8];
        for _ in 0..trials {
            counts[swap_round(&m, &parts, &mut rng).unwrap() as usize] += 1;
        }
        for s in [0b001u32, 0b010, 0b100] {
            let freq = counts[s as usize] as f64 / trials as f64;
            assert!((freq - d.prob(s).to_f64()).abs() < 0.02, "{s:b}: {freq}");
        }
    }

    #[test]
    fn rejects_bad_decompositions() {
        let m = Matroid::uniform(3, 1).unwrap();
        assert!(swap_round_pmf(&m, &[(0b011, q(1, 1))]).is_err());
        assert!(swap_round_pmf(&m, &[(0b001, q(1, 2))]).is_err());
    }
}
