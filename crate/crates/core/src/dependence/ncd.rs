//! Negative cylinder dependence.

use super::{CertificateKind, CylinderSide, Verdict};
use crate::dist::Distribution;
use crate::scalar::Scalar;
use crate::set::{self, Mask};

/// Checks every `T` with `|T| >= 2` on both sides; the witness is the cylinder
/// with the largest violation (ties to the lowest mask, inclusion first).
pub fn check_ncd<T: Scalar>(d: &Distribution<T>) -> Verdict<T> {
    let n = d.n();
    let full = d.ground().full();
    let x = d.marginals();
    // up[T] = Pr[T ⊆ S] (superset sums), down[T] = Pr[S ⊆ T] (subset sums)
    let mut up: Vec<T> = d.pmf().to_vec();
    let mut down: Vec<T> = d.pmf().to_vec();
    for i in 0..n {
        for m in 0..=full {
            if !set::contains(m, i) {
                let hi = (m | 1 << i) as usize;
                let (a, b) = (up[hi].clone(), down[m as usize].clone());
                up[m as usize] += &a;
                down[hi] += &b;
            }
        }
    }
    let mut best: Option<(Mask, CylinderSide, T)> = None;
    for t in 0..=full {
        if set::popcount(t) < 2 {
            continue;
        }
        let mut incl = T::one();
        let mut excl = T::one();
        for i in set::elements(t) {
            incl *= &x[i];
            excl *= &(T::one() - x[i].clone());
        }
        let candidates = [
            (CylinderSide::Inclusion, up[t as usize].clone() - incl),
            (CylinderSide::Exclusion, down[(full & !t) as usize].clone() - excl),
        ];
        for (side, violation) in candidates {
            if violation.gt_tol(&T::zero()) && best.as_ref().map_or(true, |b| violation > b.2) {
                best = Some((t, side, violation));
            }
        }
    }
    match best {
        None => Verdict::holds(),
        Some((t, side, margin)) => Verdict::fails(CertificateKind::Ncd { t, side }, margin),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, Rational};

    #[test]
    fn positive_pair_fails_inclusion() {
        let d = Distribution::<Rational>::uniform_over(2, &[0b00, 0b11]).unwrap();
        let v = check_ncd(&d);
        let w = v.witness.unwrap();
        assert_eq!(w.kind, CertificateKind::Ncd { t: 0b11, side: CylinderSide::Inclusion });
        assert_eq!(w.margin, q(1, 4));
        assert_eq!(w.reverify(&d), q(1, 4));
    }

    #[test]
    fn exclusion_side_is_checked() {
        // complements of {{1,2,3},{1},{2},{3}}: pairs are tight, the triple is not
        let d = Distribution::<Rational>::uniform_over(3, &[0b000, 0b110, 0b101, 0b011]).unwrap();
        let w = check_ncd(&d).witness.unwrap();
        assert_eq!(w.kind, CertificateKind::Ncd { t: 0b111, side: CylinderSide::Exclusion });
        assert_eq!(w.margin, q(1, 8));
        assert_eq!(w.reverify(&d), w.margin);
    }

    #[test]
    fn ncd_counterexample_holds() {
        let sets: Vec<Mask> = (0..4).flat_map(|i| [1 << i, 0b1111 & !(1 << i)]).collect();
        let d = Distribution::<Rational>::uniform_over(4, &sets).unwrap();
        assert!(check_ncd(&d).holds);
    }
}
