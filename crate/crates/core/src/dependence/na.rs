//! Negative association.
//!
//! Covariance is bilinear, and every monotone function on `2^A` is a
//! constant plus a nonnegative combination of upset indicators (layer-cake
//! decomposition). Hence NA holds iff
//! `Cov[1{S∩A ∈ U_A}, 1{S∩B ∈ U_B}] <= 0` for all disjoint `A`, `B` and upsets
//! `U_A`, `U_B`. For each split we enumerate the upsets of the smaller side and
//! maximize over the other side as a maximum-weight closure.

use super::lattice::{enumerate_upsets, family_to_upset, max_weight_upset, MAX_ENUMERATED_UPSET_BITS};
use super::{CertificateKind, Certificate, Verdict};
use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::set::{self, Mask};

/// Largest ground set accepted by [`check_na`].
pub const NA_MAX_N: usize = 2 * MAX_ENUMERATED_UPSET_BITS;

/// Returns the split and upset pair of maximum covariance when it is positive.
pub fn check_na<T: Scalar>(d: &Distribution<T>) -> Result<Verdict<T>> {
    let n = d.n();
    if n > NA_MAX_N {
        return Err(Error::SizeCap { what: "check_na", detail: format!("n = {n} exceeds {NA_MAX_N}") });
    }
    let full = d.ground().full();
    let mut best: Option<Certificate<T>> = None;
    // A is the enumerated side: nonempty with |A| <= |B|, B ⊆ U ∖ A nonempty.
    // It suffices to take B = U ∖ A: an upset of 2^B lifts to an upset of
    // 2^{U∖A} that ignores the extra coordinates.
    for a in 1..full {
        let b = full & !a;
        let ka = set::popcount(a);
        let kb = set::popcount(b);
        if ka > kb || (ka == kb && a > b) {
            continue;
        }
        let joint = joint_table(d, a, b);
        let pa_marg: Vec<T> = (0..1usize << ka).map(|sa| sum_row(&joint[sa])).collect();
        let pb_marg: Vec<T> = (0..1usize << kb).map(|sb| sum_col(&joint, sb)).collect();
        for &fam in enumerate_upsets(ka) {
            // trivial families give zero covariance
            if fam == 0 || fam.count_ones() as usize == 1 << ka {
                continue;
            }
            let mut p_ua = T::zero();
            let mut w = vec![T::zero(); 1 << kb];
            for sa in 0..1usize << ka {
                if fam >> sa & 1 == 1 {
                    p_ua += &pa_marg[sa];
                    for (sb, cell) in joint[sa].iter().enumerate() {
                        w[sb] += cell;
                    }
                }
            }
            for (sb, pb) in pb_marg.iter().enumerate() {
                w[sb].sub_mul_assign(&p_ua, pb);
            }
            let (cov, upset_b) = max_weight_upset(&w, kb);
            if cov.gt_tol(&T::zero()) && best.as_ref().map_or(true, |c| cov > c.margin) {
                best = Some(Certificate {
                    kind: CertificateKind::Na {
                        a,
                        upset_a: family_to_upset(fam, ka).expanded(a),
                        b,
                        upset_b: upset_b.expanded(b),
                    },
                    margin: cov,
                });
            }
        }
    }
    Ok(match best {
        None => Verdict::holds(),
        Some(c) => Verdict { holds: false, witness: Some(c) },
    })
}

/// `joint[sa][sb] = Pr[S∩A = sa, S∩B = sb]` in packed coordinates.
fn joint_table<T: Scalar>(d: &Distribution<T>, a: Mask, b: Mask) -> Vec<Vec<T>> {
    let mut joint = vec![vec![T::zero(); 1 << set::popcount(b)]; 1 << set::popcount(a)];
    for (m, p) in d.pmf().iter().enumerate() {
        if p.is_zero() {
            continue;
        }
        let m = m as Mask;
        joint[set::compress(m, a) as usize][set::compress(m, b) as usize] += p;
    }
    joint
}

fn sum_row<T: Scalar>(row: &[T]) -> T {
    let mut acc = T::zero();
    for v in row {
        acc += v;
    }
    acc
}

fn sum_col<T: Scalar>(joint: &[Vec<T>], col: usize) -> T {
    let mut acc = T::zero();
    for row in joint {
        acc += &row[col];
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::Marginals;
    use crate::scalar::{q, Rational};

    #[test]
    fn singletons_are_na() {
        let d = Distribution::<Rational>::uniform_over(2, &[0b01, 0b10]).unwrap();
        assert!(check_na(&d).unwrap().holds);
    }

    #[test]
    fn products_are_na() {
        let x = Marginals::new(vec![q(1, 3), q(1, 2), q(2, 3)]).unwrap();
        assert!(check_na(&Distribution::product(&x)).unwrap().holds);
    }

    #[test]
    fn positive_correlation_is_caught() {
        let d = Distribution::<Rational>::uniform_over(2, &[0b00, 0b11]).unwrap();
        let v = check_na(&d).unwrap();
        let w = v.witness.unwrap();
        assert_eq!(w.margin, q(1, 4));
        assert_eq!(w.reverify(&d), q(1, 4));
    }

    #[test]
    fn witness_maximizes_over_brute_force() {
        // all upset pairs on a 3-element ground set, by direct enumeration
        let sets: Vec<Mask> = vec![0b000, 0b011, 0b011, 0b110, 0b111, 0b100];
        let d = Distribution::<Rational>::from_weights(3, {
            let mut w = vec![q(0, 1); 8];
            for s in &sets {
                w[*s as usize] += q(1, 1);
            }
            w
        })
        .unwrap();
        let mut best = q(0, 1);
        for a in 1..7u32 {
            let b = 7 & !a;
            let ka = set::popcount(a);
            let kb = set::popcount(b);
            for &fa in enumerate_upsets(ka) {
                for &fb in enumerate_upsets(kb) {
                    let ua = family_to_upset(fa, ka).expanded(a);
                    let ub = family_to_upset(fb, kb).expanded(b);
                    let ina = |s: Mask| fa != 0 && ua.contains(s & a);
                    let inb = |s: Mask| fb != 0 && ub.contains(s & b);
                    let cov = d.prob_where(|s| ina(s) && inb(s)) - d.prob_where(ina) * d.prob_where(inb);
                    if cov > best {
                        best = cov;
                    }
                }
            }
        }
        let v = check_na(&d).unwrap();
        assert_eq!(v.margin().cloned().unwrap_or(q(0, 1)), best);
    }
}
