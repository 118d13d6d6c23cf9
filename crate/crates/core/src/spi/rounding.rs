//! Algorithm 1: online rounding of an element-space fractional solution
//! through an item-space OCRS.

use rand::Rng;

use super::fractional::ElementFractional;
use super::model::{element_items, item_elements, SpiInstance};
use super::ocrs::{run_greedy, GreedyOcrs, OcrsState};
use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::optimize::IndependenceSystem;
use crate::parallel::stream_rng;
use crate::scalar::Scalar;
use crate::set::{self, Mask};

/// Largest number of active patterns (times subsampling branches) that
/// [`expected_value`] enumerates.
pub const EXACT_PATTERN_CAP: usize = 1 << 22;

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut p: Vec<usize> = (0..n).collect();
    let mut out = vec![p.clone()];
    loop {
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| p[j] > p[i - 1]).expect("successor exists");
        p.swap(i - 1, j);
        p[i..].reverse();
        out.push(p.clone());
    }
}

fn check_coins<T: Scalar>(inst: &SpiInstance<T>, frac: &ElementFractional<T>) -> Result<()> {
    let m = inst.m();
    if frac.x.len() != inst.n() * m || frac.m != m {
        return Err(Error::DimensionMismatch { expected: inst.n() * m, got: frac.x.len() });
    }
    for (e, v) in frac.x.iter().enumerate() {
        if v.gt_tol(inst.items.prob(e / m, e % m)) {
            return Err(Error::Invariant(format!("x[{}][{}] = {v} exceeds p", e / m, e % m)));
        }
    }
    Ok(())
}

fn check_order(order: &[usize], n: usize) -> Result<()> {
    let mut seen: Mask = 0;
    for &i in order {
        if i >= n || set::contains(seen, i) {
            return Err(Error::InvalidTable(format!("ordering {order:?} is not a permutation of 0..{n}")));
        }
        seen |= 1 << i;
    }
    if order.len() != n {
        return Err(Error::InvalidTable(format!("ordering {order:?} is not a permutation of 0..{n}")));
    }
    Ok(())
}

/// One run: each arriving item draws its realization `ij`, is revealed active
/// with probability `x_ij / p_ij`, and `ij` joins the output iff the OCRS
/// accepts. Returns the accepted elements and the OCRS log.
pub fn algorithm1<T: Scalar, R: Rng + ?Sized>(
    inst: &SpiInstance<T>,
    frac: &ElementFractional<T>,
    ocrs: &GreedyOcrs,
    order: &[usize],
    rng: &mut R,
) -> Result<(Mask, OcrsState)> {
    check_coins(inst, frac)?;
    check_order(order, inst.n())?;
    let m = inst.m();
    let mut state = ocrs.start();
    let mut out: Mask = 0;
    for &i in order {
        let mut u = rng.gen::<f64>();
        let mut realized = None;
        for j in 0..m {
            let p = inst.items.prob(i, j).to_f64();
            if u < p {
                realized = Some(j);
                break;
            }
            u -= p;
        }
        let active = match realized {
            Some(j) => {
                let p = inst.items.prob(i, j).to_f64();
                rng.gen::<f64>() < frac.x[i * m + j].to_f64() / p && (!ocrs.subsample || rng.gen::<bool>())
            }
            None => false,
        };
        if state.offer(ocrs, i, active) {
            out |= 1 << (i * m + realized.expect("active items are realized"));
        }
        debug_assert!(ocrs.system().is_independent(state.accepted));
    }
    Ok((out, state))
}

/// Law of the active elements of Algorithm 1, enumerated over realizations
/// and coins separately (no subsampling).
pub fn active_law<T: Scalar>(inst: &SpiInstance<T>, frac: &ElementFractional<T>) -> Result<Distribution<T>> {
    check_coins(inst, frac)?;
    let (n, m) = (inst.n(), inst.m());
    let mut pmf = vec![T::zero(); 1 << (n * m)];
    super::model::for_each_realization(&inst.items, |r, p| {
        // each realized element flips its own coin
        let realized: Vec<usize> = set::elements(r).collect();
        for heads in set::submasks(set::full_mask(realized.len())) {
            let mut q = p.clone();
            let mut active: Mask = 0;
            for (k, &e) in realized.iter().enumerate() {
                let coin = frac.x[e].clone() / inst.items.prob(e / m, e % m).clone();
                if set::contains(heads, k) {
                    q *= &coin;
                    active |= 1 << e;
                } else {
                    q *= &(T::one() - coin);
                }
            }
            pmf[active as usize] += &q;
        }
    });
    Distribution::new(n * m, pmf)
}

/// Calls `visit(active elements, probability)` over the product of
/// singletons with rows of `frac`.
fn for_each_active<T: Scalar>(frac: &ElementFractional<T>, mut visit: impl FnMut(Mask, &T)) {
    let m = frac.m;
    let n = frac.n();
    let rows: Vec<Vec<(Option<usize>, T)>> = (0..n)
        .map(|i| {
            let row = &frac.x[i * m..(i + 1) * m];
            let none = T::one() - crate::scalar::sum(row.iter().cloned());
            let mut out: Vec<(Option<usize>, T)> =
                row.iter().enumerate().filter(|(_, v)| **v > T::zero()).map(|(j, v)| (Some(i * m + j), v.clone())).collect();
            if none > T::zero() {
                out.push((None, none));
            }
            out
        })
        .collect();
    fn go<T: Scalar>(k: usize, mask: Mask, p: T, rows: &[Vec<(Option<usize>, T)>], visit: &mut impl FnMut(Mask, &T)) {
        if k == rows.len() {
            visit(mask, &p);
            return;
        }
        for (e, q) in &rows[k] {
            go(k + 1, e.map_or(mask, |e| mask | 1 << e), p.clone() * q.clone(), rows, visit);
        }
    }
    go(0, 0, T::one(), &rows, &mut visit);
}

/// `E[f(T_ALG)]` for one arrival order, exact over realizations, coins and
/// (if enabled) subsampling. The active elements follow the product of
/// singletons of `frac`, and given them the greedy OCRS is deterministic.
pub fn expected_value<T: Scalar>(
    inst: &SpiInstance<T>,
    frac: &ElementFractional<T>,
    ocrs: &GreedyOcrs,
    order: &[usize],
) -> Result<T> {
    check_coins(inst, frac)?;
    check_order(order, inst.n())?;
    let m = inst.m();
    let patterns: usize = (0..inst.n()).map(|i| frac.x[i * m..(i + 1) * m].iter().filter(|v| **v > T::zero()).count() + 1).product();
    let branches = if ocrs.subsample { patterns.saturating_mul(1 << inst.n()) } else { patterns };
    if branches > EXACT_PATTERN_CAP {
        return Err(Error::SizeCap { what: "exact Algorithm 1 expectation", detail: format!("{branches} branches") });
    }
    let f = &inst.objective;
    let mut total = T::zero();
    let half = T::from_ratio(1, 2);
    for_each_active(frac, |active, p| {
        let items = element_items(active, m);
        if ocrs.subsample {
            let k = set::popcount(items);
            let mut weight = p.clone();
            for _ in 0..k {
                weight *= &half;
            }
            for kept in set::submasks(items) {
                let acc = run_greedy(ocrs, order, kept);
                total.add_mul_assign(&weight, f.value(active & item_elements(acc, m)));
            }
        } else {
            let acc = run_greedy(ocrs, order, items);
            total.add_mul_assign(p, f.value(active & item_elements(acc, m)));
        }
    });
    Ok(total)
}

/// Monte Carlo estimate of `E[f(T_ALG)]` from `trials` independent runs
/// (stream `t` of `seed` for run `t`).
pub fn estimate_value<T: Scalar>(
    inst: &SpiInstance<T>,
    frac: &ElementFractional<T>,
    ocrs: &GreedyOcrs,
    order: &[usize],
    trials: usize,
    seed: u64,
) -> Result<f64> {
    let mut sum = 0.0;
    for t in 0..trials {
        let (out, _) = algorithm1(inst, frac, ocrs, order, &mut stream_rng(seed, t as u64))?;
        sum += inst.objective.value(out).to_f64();
    }
    Ok(sum / trials.max(1) as f64)
}

#[cfg(test)]
mod tests {
    use super::super::model::{product_of_singletons, random_spi_instance, single_choice, ItemModel};
    use super::super::ocrs::greedy_ocrs_uniform;
    use super::*;
    use crate::optimize::Matroid;
    use crate::scalar::{q, Rational};
    use crate::setfn::SetFunction;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn frac_of(inst: &SpiInstance<Rational>, x: Vec<Rational>) -> ElementFractional<Rational> {
        ElementFractional { m: inst.m(), x, b: q(1, 1), steps: 0 }
    }

    #[test]
    fn permutations_are_lexicographic() {
        let p = permutations(3);
        assert_eq!(p.len(), 6);
        assert_eq!(p[0], vec![0, 1, 2]);
        assert_eq!(p[1], vec![0, 2, 1]);
        assert_eq!(p[5], vec![2, 1, 0]);
        assert_eq!(permutations(0), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn zero_solution_returns_nothing() {
        let inst = random_spi_instance::<Rational>(3, 2, single_choice(3).unwrap(), 3).unwrap();
        let frac = frac_of(&inst, vec![q(0, 1); 6]);
        let ocrs = GreedyOcrs::new(inst.system.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..20 {
            assert_eq!(algorithm1(&inst, &frac, &ocrs, &[0, 1, 2], &mut rng).unwrap().0, 0);
        }
        assert_eq!(expected_value(&inst, &frac, &ocrs, &[2, 1, 0]).unwrap(), *inst.objective.value(0));
    }

    #[test]
    fn full_coins_and_free_system_take_all_realized() {
        let rows = vec![vec![q(1, 2), q(1, 2)], vec![q(1, 3), q(2, 3)]];
        let items = ItemModel::new(rows.clone()).unwrap();
        let f = SetFunction::cardinality(4).unwrap();
        let inst = SpiInstance::new(items, f, Matroid::uniform(2, 2).unwrap().into()).unwrap();
        let frac = frac_of(&inst, rows.concat());
        let ocrs = GreedyOcrs::new(inst.system.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let (out, state) = algorithm1(&inst, &frac, &ocrs, &[1, 0], &mut rng).unwrap();
            assert_eq!(set::popcount(out), 2);
            assert_eq!(element_items(out, 2), 0b11);
            assert_eq!(state.accepted, 0b11);
        }
    }

    #[test]
    fn active_law_is_product_of_singletons() {
        let inst = random_spi_instance::<Rational>(3, 2, single_choice(3).unwrap(), 11).unwrap();
        let x: Vec<Rational> = (0..6).map(|e| inst.items.prob(e / 2, e % 2).clone() * q(2, 3)).collect();
        let frac = frac_of(&inst, x.clone());
        assert_eq!(active_law(&inst, &frac).unwrap(), product_of_singletons(2, &x).unwrap());
    }

    #[test]
    fn exact_value_matches_simulation() {
        let inst = random_spi_instance::<Rational>(3, 2, single_choice(3).unwrap(), 21).unwrap();
        let x: Vec<Rational> = (0..6).map(|e| inst.items.prob(e / 2, e % 2).clone() * q(1, 2)).collect();
        let frac = frac_of(&inst, x);
        let ocrs = greedy_ocrs_uniform(3, 1).unwrap();
        let exact = expected_value(&inst, &frac, &ocrs, &[0, 1, 2]).unwrap().to_f64();
        let est = estimate_value(&inst, &frac, &ocrs, &[0, 1, 2], 40_000, 3).unwrap();
        assert!((exact - est).abs() < 0.05 * exact.max(1.0), "{exact} vs {est}");
        let sub = ocrs.clone().with_subsampling(true);
        let exact_sub = expected_value(&inst, &frac, &sub, &[0, 1, 2]).unwrap().to_f64();
        let est_sub = estimate_value(&inst, &frac, &sub, &[0, 1, 2], 40_000, 4).unwrap();
        assert!((exact_sub - est_sub).abs() < 0.05 * exact_sub.max(1.0));
    }

    #[test]
    fn rejects_coins_above_one() {
        let inst = random_spi_instance::<Rational>(2, 1, single_choice(2).unwrap(), 1).unwrap();
        let x = vec![inst.items.prob(0, 0).clone() + q(1, 100), q(0, 1)];
        let frac = frac_of(&inst, x);
        let ocrs = GreedyOcrs::new(inst.system.clone());
        assert!(matches!(expected_value(&inst, &frac, &ocrs, &[0, 1]), Err(Error::Invariant(_))));
    }
}
