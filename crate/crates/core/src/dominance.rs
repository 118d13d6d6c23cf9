//! Submodular dominance: `E_D[f] >= F(x)` for every submodular `f`.
//!
//! The worst normalized violation is the linear program
//!
//! ```text
//! minimize   Σ_S (pmf_D(S) - pmf_x(S)) f(S)
//! subject to f(S+i) + f(S+j) - f(S+i+j) - f(S) >= 0   (i, j ∉ S, i < j)
//!            -1 <= f(S) <= 1
//! ```
//!
//! with `pmf_x` the product distribution on the marginals of `D`. It is solved
//! through its dual, `min ‖c - Aᵀy‖₁` over `y >= 0`, which has only `2^n`
//! equality rows and an all-slack starting basis. The optimal `f` is read off
//! the row multipliers. Dominance holds iff the optimum is zero, in which case
//! `c` is a nonnegative combination of submodularity rows.

use serde_json::{json, Value};

use crate::dependence::check_ncd;
use crate::dist::{self, Distribution, Marginals};
use crate::error::{Error, Result};
use crate::lp::{LinearProgram, Relation};
use crate::multilinear::multilinear;
use crate::scalar::{self, Rational, Scalar};
use crate::set::{self, Mask};
use crate::setfn::SetFunction;

/// Largest ground set accepted by [`check_dominance`].
pub const DOMINANCE_MAX_N: usize = 8;

/// From this size on the exact backend first solves in floating point and
/// certifies the rounded optimizer exactly; see [`check_dominance`].
pub const HYBRID_FROM_N: usize = 7;

#[derive(Debug, Clone, PartialEq)]
pub struct DominanceVerdict<T: Scalar> {
    pub holds: bool,
    /// `min_f E_D[f] - F(x)` over submodular `f` with values in `[-1, 1]`
    /// (the certificate's own gap when it was certified after a float solve).
    pub gap: T,
    pub certificate: Option<SetFunction<T>>,
}

impl<T: Scalar> DominanceVerdict<T> {
    pub fn to_json(&self) -> Value {
        json!({
            "holds": self.holds,
            "gap": self.gap.to_json(),
            "certificate": self.certificate.as_ref().map(|f| json!({
                "n": f.n(),
                "values": crate::json::scalars_to_json(f.values()),
            })),
        })
    }
}

/// `E_D[f] - F(marginals(D))`.
pub fn dominance_gap<T: Scalar>(d: &Distribution<T>, f: &SetFunction<T>) -> Result<T> {
    let e = d.expect(f)?;
    Ok(e - multilinear(f, &d.marginals())?)
}

/// Decides submodular dominance for `d` (`n <= 8`).
///
/// With the rational backend and `n >= HYBRID_FROM_N`, the program is first
/// solved in floating point. If that reports a violation, the optimizer is
/// snapped to nearby small-denominator rationals and accepted only after an
/// exact check of submodularity, the box, and the sign of its gap; otherwise
/// the exact program is solved.
pub fn check_dominance<T: Scalar>(d: &Distribution<T>) -> Result<DominanceVerdict<T>> {
    let n = d.n();
    if n > DOMINANCE_MAX_N {
        return Err(Error::SizeCap { what: "check_dominance", detail: format!("n = {n} exceeds {DOMINANCE_MAX_N}") });
    }
    if T::EXACT && n >= HYBRID_FROM_N {
        if let Some(v) = certified_from_float(d)? {
            return Ok(v);
        }
    }
    solve_exactly_in(d)
}

fn cost_vector<T: Scalar>(d: &Distribution<T>) -> Vec<T> {
    let prod = Distribution::product(&d.marginals());
    d.pmf().iter().zip(prod.pmf()).map(|(a, b)| a.clone() - b.clone()).collect()
}

/// Local submodularity rows as `(S, i, j)` with `i < j`, `i, j ∉ S`.
fn submodularity_rows(n: usize) -> Vec<(Mask, usize, usize)> {
    let mut rows = Vec::new();
    for s in 0..1u32 << n {
        for i in 0..n {
            for j in i + 1..n {
                if !set::contains(s, i) && !set::contains(s, j) {
                    rows.push((s, i, j));
                }
            }
        }
    }
    rows
}

fn solve_exactly_in<T: Scalar>(d: &Distribution<T>) -> Result<DominanceVerdict<T>> {
    let (gap, f) = solve_gap_lp(d)?;
    if !(gap < -T::lp_tol()) {
        return Ok(DominanceVerdict { holds: true, gap: scalar::min_of(gap, T::zero()), certificate: None });
    }
    Ok(DominanceVerdict { holds: false, gap, certificate: Some(f) })
}

/// Returns the optimum and an optimal `f`.
fn solve_gap_lp<T: Scalar>(d: &Distribution<T>) -> Result<(T, SetFunction<T>)> {
    let n = d.n();
    let size = 1usize << n;
    let c = cost_vector(d);
    let rows = submodularity_rows(n);
    // columns: y_r for each submodularity row, then u_S, v_S
    let ny = rows.len();
    let mut lp = LinearProgram::new(ny + 2 * size);
    let mut by_set: Vec<Vec<(usize, T)>> = vec![Vec::new(); size];
    for (r, &(s, i, j)) in rows.iter().enumerate() {
        let (si, sj, sij) = (s | 1 << i, s | 1 << j, s | 1 << i | 1 << j);
        by_set[si as usize].push((r, T::one()));
        by_set[sj as usize].push((r, T::one()));
        by_set[sij as usize].push((r, -T::one()));
        by_set[s as usize].push((r, -T::one()));
    }
    for s in 0..size {
        lp.set_cost(ny + s, T::one());
        lp.set_cost(ny + size + s, T::one());
        let mut coeffs = std::mem::take(&mut by_set[s]);
        coeffs.push((ny + s, T::one()));
        coeffs.push((ny + size + s, -T::one()));
        lp.add_row(coeffs, Relation::Eq, c[s].clone());
    }
    let sol = lp.minimize()?.optimal()?;
    let one = T::one();
    let values: Vec<T> = sol
        .duals
        .iter()
        .map(|p| {
            // f = -π, clipped against float drift
            let f = -p.clone();
            scalar::max_of(scalar::min_of(f, one.clone()), -one.clone())
        })
        .collect();
    let f = SetFunction::new(n, values)?;
    let gap = -sol.objective;
    Ok((gap, f))
}

fn certified_from_float<T: Scalar>(d: &Distribution<T>) -> Result<Option<DominanceVerdict<T>>> {
    let df: Distribution<f64> = d.convert();
    let (gap, f) = solve_gap_lp(&df)?;
    if !(gap < -1e-9) {
        return Ok(None);
    }
    let snapped: Vec<Rational> = f.values().iter().map(|&v| scalar::snap_rational(v, 1 << 12)).collect();
    let candidates = [snapped, f.values().iter().map(|&v| <Rational as Scalar>::from_f64(v)).collect()];
    for values in candidates {
        let cert = SetFunction::new(d.n(), values)?;
        let bounded = cert.values().iter().all(|v| v.abs_val() <= Rational::from_ratio(1, 1));
        if !bounded || !cert.is_submodular() {
            continue;
        }
        let exact_d: Distribution<Rational> = d.convert();
        let exact_gap = dominance_gap(&exact_d, &cert)?;
        if exact_gap < <Rational as num_traits::Zero>::zero() {
            let cert_t = SetFunction::new(d.n(), cert.values().iter().map(T::from_rational).collect())?;
            return Ok(Some(DominanceVerdict { holds: false, gap: T::from_rational(&exact_gap), certificate: Some(cert_t) }));
        }
    }
    Ok(None)
}

/// `f_T(S) = 1 - 1{T ⊆ S^c}` and `g_T(S) = |S ∩ T| - 1{T ⊆ S}`: the rank
/// functions of the uniform matroids of rank 1 and `|T| - 1` on `T`.
pub fn rank_certificates<T: Scalar>(t: Mask, n: usize) -> Result<(SetFunction<T>, SetFunction<T>)> {
    if t == 0 {
        return Err(Error::InvalidSystem("rank certificates need a nonempty T".into()));
    }
    if t & !set::full_mask(n) != 0 {
        return Err(Error::InvalidElement { index: 31 - t.leading_zeros() as usize, n });
    }
    let f = SetFunction::from_fn(n, |s| if s & t == 0 { T::zero() } else { T::one() })?;
    let g = SetFunction::from_fn(n, |s| {
        let hit = T::from_usize(set::popcount(s & t));
        if s & t == t {
            hit - T::one()
        } else {
            hit
        }
    })?;
    Ok((f, g))
}

/// `check_dominance(d).holds ⇒ check_ncd(d).holds`.
pub fn verify_necessity<T: Scalar>(d: &Distribution<T>) -> Result<bool> {
    Ok(!check_dominance(d)?.holds || check_ncd(d).holds)
}

/// `D` with element `k` resampled independently with its own marginal.
pub fn resample_independently<T: Scalar>(d: &Distribution<T>, k: usize) -> Result<Distribution<T>> {
    d.ground().check_element(k)?;
    let n = d.n();
    let rest = d.ground().full() & !(1 << k);
    let xk = d.marginals()[k].clone();
    let coin = Distribution::product(&Marginals::new(vec![xk])?);
    dist::product(&d.project(rest)?, rest, &coin, 1 << k, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::q;

    fn ncd4() -> Distribution<Rational> {
        let sets: Vec<Mask> = (0..4).flat_map(|i| [1 << i, 0b1111 & !(1 << i)]).collect();
        Distribution::uniform_over(4, &sets).unwrap()
    }

    #[test]
    fn ncd_counterexample_is_not_dominant() {
        let d = ncd4();
        let v = check_dominance(&d).unwrap();
        assert!(!v.holds);
        // min(2,|S|) - 1 already reaches -1/8
        assert!(v.gap <= q(-1, 8));
        let cert = v.certificate.unwrap();
        assert!(cert.is_submodular());
        assert_eq!(dominance_gap(&d, &cert).unwrap(), v.gap);
    }

    #[test]
    fn products_hold_with_zero_gap() {
        let x = Marginals::new(vec![q(1, 3), q(1, 2), q(1, 5)]).unwrap();
        let v = check_dominance(&Distribution::product(&x)).unwrap();
        assert!(v.holds);
        assert_eq!(v.gap, q(0, 1));
        assert!(v.certificate.is_none());
    }

    #[test]
    fn float_backend_agrees() {
        let v = check_dominance(&ncd4().convert::<f64>()).unwrap();
        assert!(!v.holds);
        assert!(v.gap <= -0.125 + 1e-9);
    }

    #[test]
    fn rank_certificate_shapes() {
        let (f, g) = rank_certificates::<Rational>(0b1, 3).unwrap();
        assert_eq!(f.values(), SetFunction::from_fn(3, |s| q((s & 1) as i64, 1)).unwrap().values());
        assert!(g.values().iter().all(|v| *v == q(0, 1)));
        let (f, g) = rank_certificates::<Rational>(0b11, 2).unwrap();
        assert_eq!(*g.value(0b11), q(1, 1));
        assert_eq!(*f.value(0b11), q(1, 1));
        assert!(f.is_submodular() && g.is_submodular());
        assert!(rank_certificates::<Rational>(0, 2).is_err());
    }

    #[test]
    fn resampling_keeps_marginals_and_independence() {
        let d = ncd4();
        let dk = resample_independently(&d, 2).unwrap();
        assert_eq!(dk.marginals(), d.marginals());
        assert_eq!(dk.project(0b1011).unwrap(), d.project(0b1011).unwrap());
        let joint = dk.prob_where(|s| s & 0b101 == 0b101);
        assert_eq!(joint, dk.prob_where(|s| s & 1 == 1) * q(1, 2));
    }
}
