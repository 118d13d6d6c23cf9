//! Negative dependence checkers with re-verifiable certificates.
//!
//! Each checker decides its property exactly (rational backend) or up to the
//! float tolerance, and on failure returns the witness that maximizes, or at
//! least exhibits, the violated inequality. [`Certificate::reverify`]
//! recomputes the violation from the raw definition, independently of the
//! search that found it.

mod lattice;
mod na;
mod ncd;
mod nr;
mod random;
mod wnr;

use serde_json::{json, Value};

use crate::dist::Distribution;
use crate::scalar::Scalar;
use crate::set::{self, Mask};

pub use lattice::{enumerate_upsets, max_weight_upset, stochastic_dominance, stochastic_dominance_pmf};
pub use na::check_na;
pub use ncd::check_ncd;
pub use nr::check_nr;
pub use random::{random_distribution, random_wnr, WNR_ATTEMPT_BUDGET};
pub use wnr::{check_wnr, check_wnr_covariance};

/// An upward-closed family of subsets, stored by its minimal sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Upset {
    generators: Vec<Mask>,
}

impl Upset {
    /// Keeps only the inclusion-minimal sets of `sets`.
    pub fn generated_by(sets: impl IntoIterator<Item = Mask>) -> Self {
        let mut all: Vec<Mask> = sets.into_iter().collect();
        all.sort_by_key(|&m| (set::popcount(m), m));
        all.dedup();
        let mut generators: Vec<Mask> = Vec::new();
        for m in all {
            if !generators.iter().any(|&g| g & m == g) {
                generators.push(m);
            }
        }
        generators.sort_unstable();
        Self { generators }
    }

    pub fn generators(&self) -> &[Mask] {
        &self.generators
    }

    pub fn contains(&self, s: Mask) -> bool {
        self.generators.iter().any(|&g| g & s == g)
    }

    /// Maps generators from packed bits onto `domain` (see [`set::expand`]).
    pub fn expanded(&self, domain: Mask) -> Self {
        Self::generated_by(self.generators.iter().map(|&g| set::expand(g, domain)))
    }

    pub fn to_json(&self) -> Value {
        json!(self.generators)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CylinderSide {
    /// `Pr[T ⊆ S] > Π x_i`
    Inclusion,
    /// `Pr[T ⊆ S^c] > Π (1 - x_i)`
    Exclusion,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CertificateKind {
    /// `Pr_lower[S ∈ U] > Pr_upper[S ∈ U]` for the two laws being compared.
    Dominance { upset: Upset },
    /// `Pr[S∖i ∈ U | i ∈ S] > Pr[S∖i ∈ U | i ∉ S]`; generators avoid bit `i`.
    Wnr { element: usize, upset: Upset },
    /// `Cov[1{S∖i ∈ U}, 1{i ∈ S}] > 0`.
    WnrCovariance { element: usize, upset: Upset },
    /// `Cov[1{S∩A ∈ U_A}, 1{S∩B ∈ U_B}] > 0` with `A`, `B` disjoint.
    Na { a: Mask, upset_a: Upset, b: Mask, upset_b: Upset },
    /// `Pr[S∖T ∈ U | S∩T = R+] > Pr[S∖T ∈ U | S∩T = R-]`.
    Nr { t: Mask, r_minus: Mask, r_plus: Mask, upset: Upset },
    Ncd { t: Mask, side: CylinderSide },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate<T: Scalar> {
    pub kind: CertificateKind,
    /// Amount by which the defining inequality is violated (> 0).
    pub margin: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict<T: Scalar> {
    pub holds: bool,
    pub witness: Option<Certificate<T>>,
}

impl<T: Scalar> Verdict<T> {
    pub fn holds() -> Self {
        Self { holds: true, witness: None }
    }

    pub fn fails(kind: CertificateKind, margin: T) -> Self {
        Self { holds: false, witness: Some(Certificate { kind, margin }) }
    }

    pub fn margin(&self) -> Option<&T> {
        self.witness.as_ref().map(|w| &w.margin)
    }

    pub fn to_json(&self) -> Value {
        match &self.witness {
            None => json!({ "holds": self.holds, "witness": null }),
            Some(w) => json!({ "holds": self.holds, "witness": w.to_json() }),
        }
    }
}

impl<T: Scalar> Certificate<T> {
    pub fn to_json(&self) -> Value {
        let (kind, data) = match &self.kind {
            CertificateKind::Dominance { upset } => ("dominance", json!({ "upset": upset.to_json() })),
            CertificateKind::Wnr { element, upset } => {
                ("wnr", json!({ "element": element, "upset": upset.to_json() }))
            }
            CertificateKind::WnrCovariance { element, upset } => {
                ("wnr-covariance", json!({ "element": element, "upset": upset.to_json() }))
            }
            CertificateKind::Na { a, upset_a, b, upset_b } => (
                "na",
                json!({ "a": a, "upset_a": upset_a.to_json(), "b": b, "upset_b": upset_b.to_json() }),
            ),
            CertificateKind::Nr { t, r_minus, r_plus, upset } => (
                "nr",
                json!({ "t": t, "r_minus": r_minus, "r_plus": r_plus, "upset": upset.to_json() }),
            ),
            CertificateKind::Ncd { t, side } => (
                "ncd",
                json!({ "t": t, "side": match side { CylinderSide::Inclusion => "inclusion", CylinderSide::Exclusion => "exclusion" } }),
            ),
        };
        json!({ "kind": kind, "data": data, "margin": self.margin.to_json() })
    }

    /// Recomputes the violation amount of this witness directly from `d`.
    /// For [`CertificateKind::Dominance`] use [`reverify_dominance`] instead.
    pub fn reverify(&self, d: &Distribution<T>) -> T {
        match &self.kind {
            CertificateKind::Dominance { .. } => T::zero(),
            CertificateKind::Wnr { element, upset } => {
                let i = *element;
                let present = d.prob_where(|s| set::contains(s, i));
                let absent = T::one() - present.clone();
                let hit_present = d.prob_where(|s| set::contains(s, i) && upset.contains(s & !(1 << i)));
                let hit_absent = d.prob_where(|s| !set::contains(s, i) && upset.contains(s));
                hit_present / present - hit_absent / absent
            }
            CertificateKind::WnrCovariance { element, upset } => {
                let i = *element;
                let xi = d.prob_where(|s| set::contains(s, i));
                let joint = d.prob_where(|s| set::contains(s, i) && upset.contains(s & !(1 << i)));
                let ef = d.prob_where(|s| upset.contains(s & !(1 << i)));
                joint - ef * xi
            }
            CertificateKind::Na { a, upset_a, b, upset_b } => {
                let fa = |s: Mask| upset_a.contains(s & a);
                let fb = |s: Mask| upset_b.contains(s & b);
                let joint = d.prob_where(|s| fa(s) && fb(s));
                joint - d.prob_where(fa) * d.prob_where(fb)
            }
            CertificateKind::Nr { t, r_minus, r_plus, upset } => {
                let cond = |r: Mask| {
                    let mass = d.prob_where(|s| s & t == r);
                    d.prob_where(|s| s & t == r && upset.contains(s & !t)) / mass
                };
                cond(*r_plus) - cond(*r_minus)
            }
            CertificateKind::Ncd { t, side } => {
                let x = d.marginals();
                match side {
                    CylinderSide::Inclusion => {
                        let joint = d.prob_where(|s| s & t == *t);
                        joint - scalar_product(set::elements(*t).map(|i| x[i].clone()))
                    }
                    CylinderSide::Exclusion => {
                        let joint = d.prob_where(|s| s & t == 0);
                        joint - scalar_product(set::elements(*t).map(|i| T::one() - x[i].clone()))
                    }
                }
            }
        }
    }
}

/// Recomputes `Pr_lower[U] - Pr_upper[U]` for a stochastic-dominance witness.
pub fn reverify_dominance<T: Scalar>(upset: &Upset, upper: &Distribution<T>, lower: &Distribution<T>) -> T {
    lower.prob_where(|s| upset.contains(s)) - upper.prob_where(|s| upset.contains(s))
}

fn scalar_product<T: Scalar>(items: impl IntoIterator<Item = T>) -> T {
    items.into_iter().fold(T::one(), |acc, v| acc * v)
}
