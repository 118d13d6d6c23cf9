//! Negative regression.
//!
//! For every `T` and every pair `R- ⊊ R+ ⊆ T` of positive-probability
//! patterns, the law of `S ∖ T` given `S ∩ T = R-` must dominate the law given
//! `S ∩ T = R+`. Pairs are visited in order of increasing `|R+ ∖ R-|`. A pair
//! with some positive-probability pattern strictly between its ends follows
//! from two shorter pairs by transitivity and is skipped; every other pair is
//! checked directly. Restricting to pairs differing in one element would miss
//! violations whose intermediate patterns all have probability zero.

use super::lattice::stochastic_dominance_pmf;
use super::{CertificateKind, Verdict};
use crate::dist::Distribution;
use crate::scalar::Scalar;
use crate::set::{self, Mask};

pub fn check_nr<T: Scalar>(d: &Distribution<T>) -> Verdict<T> {
    let full = d.ground().full();
    for t in 1..full {
        let rest = full & !t;
        let laws: Vec<Option<Distribution<T>>> =
            (0..1u32 << set::popcount(t)).map(|r| d.condition_on_pattern(t, set::expand(r, t))).collect();
        let positive = |r: Mask| laws[set::compress(r, t) as usize].is_some();
        let mut pairs: Vec<(Mask, Mask)> = Vec::new();
        for r_plus in set::submasks(t) {
            if !positive(r_plus) {
                continue;
            }
            for r_minus in set::submasks(r_plus) {
                if r_minus != r_plus && positive(r_minus) {
                    pairs.push((r_minus, r_plus));
                }
            }
        }
        pairs.sort_by_key(|&(lo, hi)| (set::popcount(hi & !lo), hi, lo));
        for (r_minus, r_plus) in pairs {
            let gap = r_plus & !r_minus;
            let bridged = set::submasks(gap).any(|g| g != 0 && g != gap && positive(r_minus | g));
            if bridged {
                continue;
            }
            let upper = laws[set::compress(r_minus, t) as usize].as_ref().unwrap();
            let lower = laws[set::compress(r_plus, t) as usize].as_ref().unwrap();
            if let Some((upset, margin)) = stochastic_dominance_pmf(upper.pmf(), lower.pmf()) {
                return Verdict::fails(CertificateKind::Nr { t, r_minus, r_plus, upset: upset.expanded(rest) }, margin);
            }
        }
    }
    Verdict::holds()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::Marginals;
    use crate::scalar::{q, Rational};

    #[test]
    fn singletons_are_nr() {
        let d = Distribution::<Rational>::uniform_over(2, &[0b01, 0b10]).unwrap();
        assert!(check_nr(&d).holds);
    }

    #[test]
    fn products_are_nr() {
        let x = Marginals::new(vec![q(1, 3), q(1, 2), q(2, 3)]).unwrap();
        assert!(check_nr(&Distribution::product(&x)).holds);
    }

    #[test]
    fn violation_hidden_behind_zero_probability_patterns() {
        // S ∩ {1,2} is either ∅ or {1,2}; element 3 is positively tied to it.
        let d = Distribution::<Rational>::uniform_over(3, &[0b000, 0b111]).unwrap();
        let v = check_nr(&d);
        let w = v.witness.unwrap();
        assert!(w.margin > q(0, 1));
        assert_eq!(w.reverify(&d), w.margin);
        // the only positive pattern pair on T = {1,2} skips a level
        let d = Distribution::<Rational>::uniform_over(3, &[0b000, 0b011, 0b100]).unwrap();
        let w = check_nr(&d).witness.unwrap();
        assert_eq!(w.reverify(&d), w.margin);
    }
}
