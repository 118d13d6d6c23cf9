//! Weak negative regression, decided two independent ways.
//!
//! The direct route compares the conditional laws of `S ∖ i` given `i ∉ S`
//! and `i ∈ S` by stochastic dominance. The covariance route maximizes
//! `Cov[1{S∖i ∈ U}, 1{i ∈ S}]` over upsets `U`, by explicit enumeration when
//! `n - 1 <= 5` and as a maximum-weight closure otherwise. For `0 < x_i < 1`
//!
//! `Cov = x_i (1 - x_i) (Pr[S∖i ∈ U | i ∈ S] - Pr[S∖i ∈ U | i ∉ S])`,
//!
//! so the two routes agree on every input.

use super::lattice::{enumerate_upsets, family_to_upset, max_weight_upset, stochastic_dominance_pmf, MAX_ENUMERATED_UPSET_BITS};
use super::{CertificateKind, Verdict};
use crate::dist::Distribution;
use crate::scalar::Scalar;
use crate::set::{self, Mask};

/// Elements whose conditionals are both defined. Elements with `x_i ∈ {0,1}`
/// (up to tolerance for floats) satisfy the condition vacuously.
fn informative_elements<T: Scalar>(d: &Distribution<T>) -> Vec<usize> {
    let x = d.marginals();
    (0..d.n())
        .filter(|&i| x[i].gt_tol(&T::zero()) && T::one().gt_tol(&x[i]))
        .collect()
}

pub fn check_wnr<T: Scalar>(d: &Distribution<T>) -> Verdict<T> {
    for i in informative_elements(d) {
        let rest = d.ground().full() & !(1 << i);
        let absent = d.condition_on_element(i, false).expect("x_i < 1");
        let present = d.condition_on_element(i, true).expect("x_i > 0");
        if let Some((upset, margin)) = stochastic_dominance_pmf(absent.pmf(), present.pmf()) {
            return Verdict::fails(CertificateKind::Wnr { element: i, upset: upset.expanded(rest) }, margin);
        }
    }
    Verdict::holds()
}

pub fn check_wnr_covariance<T: Scalar>(d: &Distribution<T>) -> Verdict<T> {
    let n = d.n();
    let x = d.marginals();
    for i in informative_elements(d) {
        let rest = d.ground().full() & !(1 << i);
        // w(T) = Pr[S∖i = T, i ∈ S] - x_i Pr[S∖i = T]; Cov over U is Σ_{T ∈ U} w(T)
        let mut w = vec![T::zero(); 1 << (n - 1)];
        for (m, p) in d.pmf().iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            let t = set::compress(m as Mask, rest) as usize;
            if set::contains(m as Mask, i) {
                w[t] += p;
            }
            w[t].sub_mul_assign(&x[i], p);
        }
        let (cov, upset) = if n - 1 <= MAX_ENUMERATED_UPSET_BITS {
            let mut best = T::zero();
            let mut best_family = 0u64;
            for &fam in enumerate_upsets(n - 1) {
                let mut c = T::zero();
                for (t, wt) in w.iter().enumerate() {
                    if fam >> t & 1 == 1 {
                        c += wt;
                    }
                }
                if c > best {
                    best = c;
                    best_family = fam;
                }
            }
            (best, family_to_upset(best_family, n - 1))
        } else {
            max_weight_upset(&w, n - 1)
        };
        if cov.gt_tol(&T::zero()) {
            return Verdict::fails(CertificateKind::WnrCovariance { element: i, upset: upset.expanded(rest) }, cov);
        }
    }
    Verdict::holds()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dependence::Upset;
    use crate::dist::Marginals;
    use crate::scalar::{q, Rational};

    fn comp_ineq() -> Distribution<Rational> {
        Distribution::uniform_over(3, &[0, 0b001, 0b010, 0b011, 0b101, 0b110]).unwrap()
    }

    #[test]
    fn comp_ineq_fails_at_third_element() {
        let d = comp_ineq();
        let v = check_wnr(&d);
        let w = v.witness.clone().unwrap();
        assert_eq!(w.kind, CertificateKind::Wnr { element: 2, upset: Upset::generated_by([0b001, 0b010]) });
        assert_eq!(w.margin, q(1, 4));
        assert_eq!(w.reverify(&d), q(1, 4));

        let c = check_wnr_covariance(&d);
        let cw = c.witness.clone().unwrap();
        assert_eq!(cw.kind, CertificateKind::WnrCovariance { element: 2, upset: Upset::generated_by([0b001, 0b010]) });
        // E[f 1_{3∈S}] - E[f] x_3 = 2/6 - (5/6)(2/6)
        assert_eq!(cw.margin, q(1, 18));
        assert_eq!(cw.reverify(&d), q(1, 18));
    }

    #[test]
    fn products_are_wnr_both_ways() {
        let x = Marginals::new(vec![q(1, 3), q(1, 2), q(3, 4), q(1, 5)]).unwrap();
        let d = Distribution::product(&x);
        assert!(check_wnr(&d).holds);
        assert!(check_wnr_covariance(&d).holds);
    }

    #[test]
    fn degenerate_marginals_are_skipped() {
        let d = Distribution::<Rational>::uniform_over(3, &[0b100, 0b101, 0b110]).unwrap();
        assert!(check_wnr(&d).holds);
        assert!(check_wnr_covariance(&d).holds);
    }

    #[test]
    fn closure_route_agrees_beyond_enumeration() {
        // n = 7 exercises the max-closure branch
        let sets: Vec<Mask> = vec![0, 0b0000011, 0b1100000, 0b0011100, 0b1111111];
        let d = Distribution::<Rational>::uniform_over(7, &sets).unwrap();
        let a = check_wnr(&d);
        let b = check_wnr_covariance(&d);
        assert_eq!(a.holds, b.holds);
        assert!(!a.holds);
        let w = b.witness.unwrap();
        assert_eq!(w.reverify(&d), w.margin);
    }
}
