//! Offline contention resolution: the best CRS for a (matroid, distribution)
//! pair, by linear programming.

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::dependence::{check_wnr, random_wnr, WNR_ATTEMPT_BUDGET};
use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::lp::{LinearProgram, Relation};
use crate::optimize::{in_independence_polytope, IndependenceSystem, Matroid};
use crate::parallel::{map_indexed, Execution};
use crate::scalar::{self, Rational, Scalar};
use crate::set::{self, Mask};

/// Largest ground set accepted by [`optimal_crs`].
pub const CRS_MAX_N: usize = 5;

/// `1 - 1/e`.
pub fn one_minus_inv_e() -> f64 {
    1.0 - (-1.0f64).exp()
}

/// For each support set `S`, a distribution over independent `T ⊆ S`.
#[derive(Debug, Clone, PartialEq)]
pub struct CrsScheme<T: Scalar> {
    n: usize,
    rows: BTreeMap<Mask, Vec<(Mask, T)>>,
}

impl<T: Scalar> CrsScheme<T> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, s: Mask) -> Option<&[(Mask, T)]> {
        self.rows.get(&s).map(Vec::as_slice)
    }

    pub fn rows(&self) -> impl Iterator<Item = (Mask, &[(Mask, T)])> {
        self.rows.iter().map(|(s, r)| (*s, r.as_slice()))
    }

    /// `Pr[i ∈ π(S)]` under `d`.
    pub fn survival(&self, d: &Distribution<T>, i: usize) -> T {
        let mut total = T::zero();
        for (s, row) in &self.rows {
            for (t, q) in row {
                if set::contains(*t, i) {
                    total.add_mul_assign(d.prob(*s), q);
                }
            }
        }
        total
    }

    /// Every row sums to one and only uses independent subsets of its set.
    pub fn is_valid(&self, m: &Matroid) -> bool {
        self.rows.iter().all(|(s, row)| {
            let total = scalar::sum(row.iter().map(|(_, q)| q.clone()));
            total.approx_eq(&T::one()) && row.iter().all(|(t, q)| t & !s == 0 && m.is_independent(*t) && !T::zero().gt_tol(q))
        })
    }

    /// `{"<S>": [{"T": mask, "prob": p}, ...]}`, zero entries omitted.
    pub fn to_json(&self) -> Value {
        let mut map = Map::new();
        for (s, row) in &self.rows {
            let entries: Vec<Value> =
                row.iter().filter(|(_, q)| !q.is_zero()).map(|(t, q)| json!({"T": t, "prob": q.to_json()})).collect();
            map.insert(s.to_string(), Value::Array(entries));
        }
        Value::Object(map)
    }
}

/// Maximizes `c` subject to `Pr_{S~D}[i ∈ π(S)] >= c · x_i` over all CRSs.
///
/// Each row only mixes over maximal independent subsets of `S`: enlarging
/// the kept set never lowers any survival probability, so this loses nothing.
pub fn optimal_crs<T: Scalar>(m: &Matroid, d: &Distribution<T>) -> Result<(T, CrsScheme<T>)> {
    let n = m.n();
    if d.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: d.n() });
    }
    if n > CRS_MAX_N {
        return Err(Error::SizeCap { what: "optimal_crs", detail: format!("n = {n} exceeds {CRS_MAX_N}") });
    }
    let x = d.marginals();
    if !in_independence_polytope(m, &x) {
        return Err(Error::OutsidePolytope("marginals of D violate a rank inequality".into()));
    }
    let support: Vec<Mask> = d.support().collect();
    // column 0 is c; then one column per (S, T)
    let mut columns: Vec<(Mask, Mask)> = Vec::new();
    for &s in &support {
        let r = m.rank_of(s);
        for t in set::submasks(s) {
            if set::popcount(t) == r && m.is_independent(t) {
                columns.push((s, t));
            }
        }
    }
    let mut lp = LinearProgram::new(1 + columns.len());
    lp.set_cost(0, T::one());
    for &s in &support {
        let coeffs = columns.iter().enumerate().filter(|(_, c)| c.0 == s).map(|(k, _)| (1 + k, T::one())).collect();
        lp.add_row(coeffs, Relation::Eq, T::one());
    }
    for i in 0..n {
        if x[i].is_zero() {
            continue;
        }
        let mut coeffs: Vec<(usize, T)> = columns
            .iter()
            .enumerate()
            .filter(|(_, (_, t))| set::contains(*t, i))
            .map(|(k, (s, _))| (1 + k, d.prob(*s).clone()))
            .collect();
        coeffs.push((0, -x[i].clone()));
        lp.add_row(coeffs, Relation::Ge, T::zero());
    }
    lp.add_row(vec![(0, T::one())], Relation::Le, T::one());
    let sol = lp.maximize()?.optimal()?;
    let mut rows: BTreeMap<Mask, Vec<(Mask, T)>> = BTreeMap::new();
    for (k, &(s, t)) in columns.iter().enumerate() {
        let q = sol.x[1 + k].clone();
        let entry = rows.entry(s).or_default();
        if q > T::zero() {
            entry.push((t, q));
        }
    }
    Ok((sol.x[0].clone(), CrsScheme { n, rows }))
}

/// Draws `π(S)`. Sets outside the scheme's support map to `∅`.
pub fn apply_crs<T: Scalar, R: Rng + ?Sized>(scheme: &CrsScheme<T>, s: Mask, rng: &mut R) -> Mask {
    let Some(row) = scheme.row(s) else {
        log::warn!("set {} is not in the scheme's support; returning the empty set", set::display(s));
        return 0;
    };
    let mut u: f64 = rng.gen();
    for (t, q) in row {
        u -= q.to_f64();
        if u < 0.0 {
            return *t;
        }
    }
    row.last().map_or(0, |(t, _)| *t)
}

/// Keeps each element of `S ~ d` independently with probability `lambda`.
pub fn thin<T: Scalar>(d: &Distribution<T>, lambda: &T) -> Result<Distribution<T>> {
    let n = d.n();
    let drop = T::one() - lambda.clone();
    let mut pmf = d.pmf().to_vec();
    for i in 0..n {
        for s in 0..1u32 << n {
            if set::contains(s, i) {
                let moved = pmf[s as usize].clone() * drop.clone();
                pmf[s as usize] -= &moved;
                pmf[(s & !(1 << i)) as usize] += &moved;
            }
        }
    }
    Distribution::new(n, pmf)
}

/// Largest `λ <= 1` with `λ·x` in the independence polytope.
pub fn polytope_scale<T: Scalar>(m: &Matroid, x: &[T]) -> T {
    let mut lambda = T::one();
    for a in 1..=set::full_mask(m.n()) {
        let mass = scalar::sum(set::elements(a).map(|i| x[i].clone()));
        let r = T::from_usize(m.rank_of(a));
        if mass > r {
            lambda = scalar::min_of(lambda, r / mass);
        }
    }
    lambda
}

#[derive(Debug, Clone, Serialize)]
pub struct CrsSweep {
    pub trials: usize,
    pub c_stars: Vec<f64>,
    pub min: f64,
    pub median: f64,
    /// Thinned proposals that were no longer WNR (resampled).
    pub rejected_after_thinning: usize,
    pub all_pass: bool,
}

impl CrsSweep {
    pub const CSV_HEADER: &'static str = "trial,c_star";
}

/// For `trials` random WNR distributions over the matroid's ground set
/// (`n <= 4`), thinned into the independence polytope when needed, checks
/// that the optimal CRS is `(1 - 1/e)`-selectable. Exact arithmetic.
pub fn verify_crs_theorem(m: &Matroid, trials: usize, seed: u64, exec: Execution) -> Result<CrsSweep> {
    let n = m.n();
    if n > 4 {
        return Err(Error::SizeCap { what: "verify_crs_theorem", detail: format!("n = {n} exceeds 4") });
    }
    let results: Vec<Result<(Rational, usize)>> = map_indexed(trials, exec, |t| {
        let mut rejected = 0;
        for attempt in 0..64u64 {
            let stream = seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ ((t as u64) << 8 | attempt);
            let d: Distribution<Rational> = random_wnr(n, stream, WNR_ATTEMPT_BUDGET)?;
            let lambda = polytope_scale(m, d.marginals().as_slice());
            let fitted = if lambda < Rational::from_ratio(1, 1) { thin(&d, &lambda)? } else { d };
            if !check_wnr(&fitted).holds {
                rejected += 1;
                continue;
            }
            return Ok((optimal_crs(m, &fitted)?.0, rejected));
        }
        Err(Error::AttemptsExhausted(64))
    });
    let mut c_stars = Vec::with_capacity(trials);
    let mut rejected_after_thinning = 0;
    for r in results {
        let (c, rej) = r?;
        c_stars.push(c.to_f64());
        rejected_after_thinning += rej;
    }
    let mut sorted = c_stars.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let min = sorted.first().copied().unwrap_or(f64::NAN);
    let median = if sorted.is_empty() { f64::NAN } else { sorted[sorted.len() / 2] };
    let all_pass = c_stars.iter().all(|&c| c >= one_minus_inv_e() - 1e-9);
    Ok(CrsSweep { trials, c_stars, min, median, rejected_after_thinning, all_pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::Marginals;
    use crate::scalar::q;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn point_mass_on_independent_set() {
        let m = Matroid::uniform(3, 2).unwrap();
        let d = Distribution::<Rational>::point_mass(3, 0b101).unwrap();
        let (c, scheme) = optimal_crs(&m, &d).unwrap();
        assert_eq!(c, q(1, 1));
        assert_eq!(scheme.row(0b101).unwrap(), &[(0b101, q(1, 1))]);
    }

    #[test]
    fn no_contention_means_full_selectability() {
        let m = Matroid::uniform(2, 1).unwrap();
        let d = Distribution::<Rational>::uniform_over(2, &[0b01, 0b10]).unwrap();
        assert_eq!(optimal_crs(&m, &d).unwrap().0, q(1, 1));
    }

    #[test]
    fn product_on_rank_one_beats_the_bound() {
        let m = Matroid::uniform(2, 1).unwrap();
        let d = Distribution::product(&Marginals::new(vec![q(1, 2), q(1, 2)]).unwrap());
        let (c, scheme) = optimal_crs(&m, &d).unwrap();
        // {1,2} w.p. 1/4 must drop one element: best split gives 3/4
        assert_eq!(c, q(3, 4));
        assert!(c.to_f64() >= one_minus_inv_e());
        assert!(scheme.is_valid(&m));
        for i in 0..2 {
            assert!(scheme.survival(&d, i) >= c.clone() * q(1, 2));
        }
    }

    #[test]
    fn outside_polytope_is_rejected() {
        let m = Matroid::uniform(2, 1).unwrap();
        let d = Distribution::<Rational>::point_mass(2, 0b11).unwrap();
        assert!(matches!(optimal_crs(&m, &d), Err(Error::OutsidePolytope(_))));
    }

    #[test]
    fn apply_respects_contract_and_frequencies() {
        let m = Matroid::uniform(2, 1).unwrap();
        let d = Distribution::product(&Marginals::new(vec![q(1, 2), q(1, 2)]).unwrap());
        let (_, scheme) = optimal_crs(&m, &d).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert_eq!(apply_crs(&scheme, 0, &mut rng), 0);
        let draws = 100_000;
        let mut first = 0usize;
        for _ in 0..draws {
            let t = apply_crs(&scheme, 0b11, &mut rng);
            assert!(t & !0b11 == 0 && m.is_independent(t));
            first += (t == 0b01) as usize;
        }
        let p = scheme.row(0b11).unwrap().iter().find(|(t, _)| *t == 0b01).map_or(0.0, |(_, q)| q.to_f64());
        let sigma = (p * (1.0 - p) / draws as f64).sqrt();
        assert!((first as f64 / draws as f64 - p).abs() <= 3.0 * sigma + 1e-12);
    }

    #[test]
    fn thinning_scales_marginals() {
        let d = Distribution::<Rational>::uniform_over(3, &[0b011, 0b110, 0b101]).unwrap();
        let m = Matroid::uniform(3, 1).unwrap();
        let lambda = polytope_scale(&m, d.marginals().as_slice());
        assert_eq!(lambda, q(1, 2));
        let t = thin(&d, &lambda).unwrap();
        assert_eq!(t.marginals().as_slice(), vec![q(1, 3); 3].as_slice());
        assert!(in_independence_polytope(&m, &t.marginals()));
    }

    #[test]
    fn json_is_sparse() {
        let m = Matroid::uniform(2, 1).unwrap();
        let d = Distribution::product(&Marginals::new(vec![q(1, 2), q(1, 2)]).unwrap());
        let (_, scheme) = optimal_crs(&m, &d).unwrap();
        let j = scheme.to_json();
        assert_eq!(j["0"], json!([{"T": 0, "prob": 1}]));
        assert_eq!(j["1"], json!([{"T": 1, "prob": 1}]));
        assert!(j["3"].as_array().unwrap().iter().all(|e| e["prob"] != json!(0)));
    }

    #[test]
    fn small_sweep_passes() {
        let m = Matroid::uniform(3, 1).unwrap();
        let sweep = verify_crs_theorem(&m, 5, 1, Execution::Sequential).unwrap();
        assert!(sweep.all_pass, "{sweep:?}");
        assert!(sweep.min <= sweep.median);
    }

    #[test]
    fn products_always_pass() {
        let m = Matroid::uniform(3, 2).unwrap();
        for x in [[q(1, 2), q(1, 2), q(1, 2)], [q(2, 3), q(2, 3), q(2, 3)], [q(1, 1), q(1, 2), q(1, 3)]] {
            let d = Distribution::product(&Marginals::new(x.to_vec()).unwrap());
            assert!(optimal_crs(&m, &d).unwrap().0.to_f64() >= one_minus_inv_e() - 1e-9);
        }
    }

    #[test]
    fn ncd_counterexample_c_star_recorded() {
        let d = crate::fixtures::ncd_counterexample_4();
        let m = Matroid::uniform(4, 2).unwrap();
        let lambda = polytope_scale(&m, d.marginals().as_slice());
        let fitted = thin(&d, &lambda).unwrap();
        let (c, scheme) = optimal_crs(&m, &fitted).unwrap();
        assert!(scheme.is_valid(&m));
        assert!(c > q(0, 1) && c <= q(1, 1));
        eprintln!("ncd-counterexample-4 (lambda = {lambda}): c_star = {c}");
    }

    #[test]
    fn mixing_does_not_lower_c_star_below_the_worse_part() {
        let m = Matroid::uniform(2, 1).unwrap();
        let d1 = Distribution::<Rational>::uniform_over(2, &[0b01, 0b10]).unwrap();
        let d2 = Distribution::product(&Marginals::new(vec![q(1, 2), q(1, 2)]).unwrap());
        let d3 = Distribution::<Rational>::uniform_over(2, &[0, 0b11]).unwrap();
        for (a, b) in [(&d1, &d2), (&d2, &d3), (&d1, &d3)] {
            let mix: Vec<Rational> = a.pmf().iter().zip(b.pmf()).map(|(u, v)| (u.clone() + v.clone()) * q(1, 2)).collect();
            let mix = Distribution::new(2, mix).unwrap();
            let ca = optimal_crs(&m, a).unwrap().0;
            let cb = optimal_crs(&m, b).unwrap().0;
            assert!(optimal_crs(&m, &mix).unwrap().0 >= scalar::min_of(ca, cb));
        }
    }
}
