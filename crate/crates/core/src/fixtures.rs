//! Built-in example distributions with known checker outcomes.

use serde_json::{json, Value};

use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::json::scalars_to_json;
use crate::scalar::{q, Rational};
use crate::set::Mask;

#[derive(Debug, Clone, Copy)]
pub struct Fixture {
    pub name: &'static str,
    pub summary: &'static str,
    /// Provenance and encoding notes, emitted as the `note` field.
    pub note: &'static str,
    build: fn() -> Distribution<Rational>,
}

impl Fixture {
    pub fn distribution(&self) -> Distribution<Rational> {
        (self.build)()
    }

    /// `{"name", "note", "n", "pmf"}`; loads as an ordinary distribution file.
    pub fn to_json(&self) -> Value {
        let d = self.distribution();
        json!({
            "name": self.name,
            "note": self.note,
            "n": d.n(),
            "pmf": scalars_to_json(d.pmf()),
        })
    }
}

pub const CATALOG: [Fixture; 4] = [
    Fixture {
        name: "table2-wnr",
        summary: "WNR but neither NA nor NR (four Bernoulli coordinates)",
        note: "X1..X4 are bits 0..3. Cells as printed: 0.0577 when (X1,X2) and (X3,X4) each agree, \
               0.0623 when exactly one pair disagrees, 0.0677 when both disagree. The printed cells \
               sum to exactly 1, so no renormalization is applied.",
        build: table2_wnr,
    },
    Fixture {
        name: "dominance-not-wnr",
        summary: "uniform over {}, {1}, {2}, {1,2}, {1,3}, {2,3}: dominant but not WNR",
        note: "elements 1..3 are bits 0..2",
        build: dominance_not_wnr,
    },
    Fixture {
        name: "ncd-counterexample-4",
        summary: "uniform i in [4], then i or [4]\\i with probability 1/2: NCD but not dominant",
        note: "elements 1..4 are bits 0..3; violated by f(S) = min(2, |S|)",
        build: ncd_counterexample_4,
    },
    Fixture {
        name: "ncd-homogeneous-8",
        summary: "homogeneous (size-4) NCD distribution that is not dominant",
        note: "A = {1..4} are bits 0..3, B = {5..8} bits 4..7; uniform i in A, j in B, then \
               i + (B\\j) or (A\\i) + j with probability 1/2; violated by f(S) = min(2, |S & A|)",
        build: ncd_homogeneous_8,
    },
];

pub fn names() -> Vec<&'static str> {
    CATALOG.iter().map(|f| f.name).collect()
}

pub fn find(name: &str) -> Result<&'static Fixture> {
    CATALOG
        .iter()
        .find(|f| f.name == name)
        .ok_or_else(|| Error::Parse(format!("unknown fixture `{name}` (known: {})", names().join(", "))))
}

pub fn table2_wnr() -> Distribution<Rational> {
    let pmf = (0..16u32)
        .map(|m| {
            let differ = |a: u32, b: u32| (m >> a & 1) != (m >> b & 1);
            match differ(0, 1) as u8 + differ(2, 3) as u8 {
                0 => q(577, 10_000),
                1 => q(623, 10_000),
                _ => q(677, 10_000),
            }
        })
        .collect();
    Distribution::new(4, pmf).expect("cells sum to one")
}

pub fn dominance_not_wnr() -> Distribution<Rational> {
    Distribution::uniform_over(3, &[0b000, 0b001, 0b010, 0b011, 0b101, 0b110]).expect("valid support")
}

pub fn ncd_counterexample_4() -> Distribution<Rational> {
    let sets: Vec<Mask> = (0..4).flat_map(|i| [1 << i, 0b1111 & !(1 << i)]).collect();
    Distribution::uniform_over(4, &sets).expect("valid support")
}

pub fn ncd_homogeneous_8() -> Distribution<Rational> {
    let (a, b): (Mask, Mask) = (0x0f, 0xf0);
    let mut sets = Vec::new();
    for i in 0..4 {
        for j in 4..8 {
            sets.push(1 << i | (b & !(1 << j)));
            sets.push((a & !(1 << i)) | 1 << j);
        }
    }
    Distribution::uniform_over(8, &sets).expect("valid support")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;
    use crate::set;

    #[test]
    fn table2_layout() {
        let d = table2_wnr();
        // row (X3,X4) = (0,0), columns (X1,X2) = (0,0),(0,1),(1,0),(1,1)
        let cell = |x1: u32, x2: u32, x3: u32, x4: u32| d.prob(x1 | x2 << 1 | x3 << 2 | x4 << 3).clone();
        assert_eq!(cell(0, 0, 0, 0), q(577, 10_000));
        assert_eq!(cell(0, 1, 0, 0), q(623, 10_000));
        assert_eq!(cell(1, 0, 0, 1), q(677, 10_000));
        assert_eq!(cell(1, 1, 1, 1), q(577, 10_000));
        assert_eq!(d.marginals().as_slice(), vec![q(1, 2); 4].as_slice());
        // printed marginal of (X3,X4) = (0,0) row
        assert_eq!(d.prob_where(|s| s & 0b1100 == 0), q(24, 100));
    }

    #[test]
    fn homogeneous_fixture_is_homogeneous() {
        let d = ncd_homogeneous_8();
        assert!(d.support().all(|s| set::popcount(s) == 4));
        assert_eq!(d.marginals().as_slice(), vec![q(1, 2); 8].as_slice());
    }

    #[test]
    fn emitted_json_round_trips() {
        for f in &CATALOG {
            let text = f.to_json().to_string();
            let back: Distribution<Rational> = crate::json::distribution_from_str(&text).unwrap();
            assert_eq!(back, f.distribution(), "{}", f.name);
        }
        let pmf = &CATALOG[0].to_json()["pmf"];
        assert_eq!(pmf[0], json!(0.0577));
        assert_eq!(pmf[2], json!(0.0623));
        assert_eq!(pmf[6], json!(0.0677));
        assert!(find("nope").is_err());
        assert_eq!(Rational::from_f64(0.5), q(1, 2));
    }
}
