//! Item models, instances, the prophet benchmark and product-of-singletons
//! distributions.

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dist::{Distribution, Marginals};
use crate::error::{Error, Result};
use crate::json::{scalars_from_json, scalars_to_json, SetFunctionJson};
use crate::optimize::{IndependenceSystem, Matroid, System};
use crate::parallel::stream_rng;
use crate::scalar::{self, Scalar};
use crate::set::{self, Mask};
use crate::setfn::SetFunction;

/// Largest `realizations × candidate sets` product enumerated by
/// [`prophet_value`].
pub const PROPHET_CAP: usize = 1 << 26;

/// `n` items with `m` possible elements each; item `i` realizes element
/// `ij` (bit `i·m + j`) with probability `p[i][j]`. A row may sum to less than
/// one: the remainder realizes nothing, which is the same as a zero-value
/// padding element.
#[derive(Debug, Clone, PartialEq)]
pub struct ItemModel<T: Scalar> {
    n: usize,
    m: usize,
    p: Vec<T>,
}

impl<T: Scalar> ItemModel<T> {
    pub fn new(rows: Vec<Vec<T>>) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        check_element_space(n, m)?;
        let mut p = Vec::with_capacity(n * m);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != m {
                return Err(Error::InvalidTable(format!("p[{i}] has {} entries, expected {m}", row.len())));
            }
            validate_row(&row, i, "p")?;
            p.extend(row);
        }
        Ok(Self { n, m, p })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn prob(&self, i: usize, j: usize) -> &T {
        &self.p[i * self.m + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.p[i * self.m..(i + 1) * self.m]
    }

    /// Probability that item `i` realizes nothing.
    pub fn null_prob(&self, i: usize) -> T {
        T::one() - scalar::sum(self.row(i).iter().cloned())
    }

    /// Per item, the possible realizations `(element bit or None, probability)`
    /// with positive probability.
    pub fn outcomes(&self, i: usize) -> Vec<(Option<usize>, T)> {
        let mut out: Vec<(Option<usize>, T)> =
            (0..self.m).filter(|&j| *self.prob(i, j) > T::zero()).map(|j| (Some(i * self.m + j), self.prob(i, j).clone())).collect();
        let rest = self.null_prob(i);
        if rest.gt_tol(&T::zero()) {
            out.push((None, rest));
        }
        out
    }

    pub fn convert<U: Scalar>(&self) -> ItemModel<U> {
        ItemModel { n: self.n, m: self.m, p: self.p.iter().map(|v| U::from_rational(&v.to_rational())).collect() }
    }
}

fn check_element_space(n: usize, m: usize) -> Result<()> {
    if n * m > set::MAX_N {
        return Err(Error::SizeCap { what: "element space", detail: format!("n·m = {} > {}", n * m, set::MAX_N) });
    }
    Ok(())
}

fn validate_row<T: Scalar>(row: &[T], i: usize, field: &str) -> Result<()> {
    if let Some(j) = row.iter().position(|v| T::zero().gt_tol(v)) {
        return Err(Error::InvalidTable(format!("{field}[{i}][{j}] is negative")));
    }
    let total = scalar::sum(row.iter().cloned());
    if total.gt_tol(&T::one()) {
        return Err(Error::InvalidTable(format!("{field}[{i}] sums to {total} > 1")));
    }
    Ok(())
}

/// Mask of the elements belonging to the items in `items`.
pub fn item_elements(items: Mask, m: usize) -> Mask {
    let block = set::full_mask(m);
    set::elements(items).fold(0, |acc, i| acc | block << (i * m))
}

/// Items owning at least one element of `elements`.
pub fn element_items(elements: Mask, m: usize) -> Mask {
    set::elements(elements).fold(0, |acc, e| acc | 1 << (e / m))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpiInstance<T: Scalar> {
    pub items: ItemModel<T>,
    /// Over the `n·m` elements.
    pub objective: SetFunction<T>,
    /// Over the `n` items.
    pub system: System,
}

impl<T: Scalar> SpiInstance<T> {
    pub fn new(items: ItemModel<T>, objective: SetFunction<T>, system: System) -> Result<Self> {
        let nm = items.n() * items.m();
        if objective.n() != nm {
            return Err(Error::DimensionMismatch { expected: nm, got: objective.n() });
        }
        if system.n() != items.n() {
            return Err(Error::DimensionMismatch { expected: items.n(), got: system.n() });
        }
        if !objective.is_nonnegative() {
            return Err(Error::InvalidTable("objective must be nonnegative".into()));
        }
        Ok(Self { items, objective, system })
    }

    pub fn n(&self) -> usize {
        self.items.n()
    }

    pub fn m(&self) -> usize {
        self.items.m()
    }

    pub fn convert<U: Scalar>(&self) -> SpiInstance<U> {
        SpiInstance { items: self.items.convert(), objective: self.objective.convert(), system: self.system.clone() }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let raw: SpiInstanceJson = serde_json::from_str(text)?;
        raw.try_into()
    }
}

/// `{"n","m","p":[[..]],"objective":{"n","values"},"system":{..}}`
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpiInstanceJson {
    pub n: usize,
    pub m: usize,
    pub p: Vec<Vec<Value>>,
    pub objective: SetFunctionJson,
    pub system: System,
}

impl<T: Scalar> TryFrom<SpiInstanceJson> for SpiInstance<T> {
    type Error = Error;

    fn try_from(raw: SpiInstanceJson) -> Result<Self> {
        if raw.p.len() != raw.n {
            return Err(Error::Parse(format!("p: {} rows, expected n = {}", raw.p.len(), raw.n)));
        }
        let rows = raw
            .p
            .iter()
            .enumerate()
            .map(|(i, r)| {
                if r.len() != raw.m {
                    return Err(Error::Parse(format!("p[{i}]: {} entries, expected m = {}", r.len(), raw.m)));
                }
                scalars_from_json(r, &format!("p[{i}]"))
            })
            .collect::<Result<Vec<Vec<T>>>>()?;
        let items = ItemModel::new(rows).map_err(|e| Error::Parse(format!("p: {e}")))?;
        let objective = SetFunction::try_from(raw.objective).map_err(|e| Error::Parse(format!("objective.{e}")))?;
        SpiInstance::new(items, objective, raw.system).map_err(|e| Error::Parse(e.to_string()))
    }
}

impl<T: Scalar> From<&SpiInstance<T>> for SpiInstanceJson {
    fn from(inst: &SpiInstance<T>) -> Self {
        SpiInstanceJson {
            n: inst.n(),
            m: inst.m(),
            p: (0..inst.n()).map(|i| scalars_to_json(inst.items.row(i))).collect(),
            objective: inst.objective.clone().into(),
            system: inst.system.clone(),
        }
    }
}

/// Calls `visit(realized elements, probability)` for every joint realization
/// of the items with positive probability.
pub fn for_each_realization<T: Scalar>(items: &ItemModel<T>, mut visit: impl FnMut(Mask, &T)) {
    let outcomes: Vec<_> = (0..items.n()).map(|i| items.outcomes(i)).collect();
    fn go<T: Scalar>(k: usize, mask: Mask, p: T, outcomes: &[Vec<(Option<usize>, T)>], visit: &mut impl FnMut(Mask, &T)) {
        if k == outcomes.len() {
            visit(mask, &p);
            return;
        }
        for (e, q) in &outcomes[k] {
            let next = e.map_or(mask, |e| mask | 1 << e);
            go(k + 1, next, p.clone() * q.clone(), outcomes, visit);
        }
    }
    go(0, 0, T::one(), &outcomes, &mut visit);
}

fn is_modular<T: Scalar>(f: &SetFunction<T>) -> bool {
    let base = f.value(0).clone();
    (1..=set::full_mask(f.n())).all(|s| {
        let v = base.clone() + scalar::sum(set::elements(s).map(|e| f.value(1 << e).clone() - base.clone()));
        v.approx_eq(f.value(s))
    })
}

/// `E_u[max_{I ∈ system} f({i u_i : i ∈ I})]`, exactly.
///
/// Modular objectives over a matroid take the greedy maximum per realization;
/// otherwise every independent set (every maximal one, for monotone `f`) is
/// scanned.
pub fn prophet_value<T: Scalar>(inst: &SpiInstance<T>) -> Result<T> {
    let (n, m) = (inst.n(), inst.m());
    let f = &inst.objective;
    if !(inst.system.is_matroid() && is_modular(f)) {
        return prophet_by_scan(inst);
    }
    let mut total = T::zero();
    let base = f.value(0).clone();
    for_each_realization(&inst.items, |r, p| {
        let mut w = vec![T::zero(); n];
        for e in set::elements(r) {
            w[e / m] = f.value(1 << e).clone() - base.clone();
        }
        let picked = inst.system.linear_oracle(&w);
        let gain = scalar::sum(set::elements(picked).map(|i| scalar::max_of(w[i].clone(), T::zero())));
        total.add_mul_assign(p, &(base.clone() + gain));
    });
    Ok(total)
}

fn prophet_by_scan<T: Scalar>(inst: &SpiInstance<T>) -> Result<T> {
    let (n, m) = (inst.n(), inst.m());
    let f = &inst.objective;
    let realizations: usize = (0..n).map(|i| inst.items.outcomes(i).len()).product();
    let candidates: Vec<Mask> = if f.is_monotone() {
        inst.system.maximal_sets()
    } else {
        (0..=set::full_mask(n)).filter(|&s| inst.system.is_independent(s)).collect()
    };
    if realizations.saturating_mul(candidates.len()) > PROPHET_CAP {
        return Err(Error::SizeCap {
            what: "prophet_value",
            detail: format!("{realizations} realizations × {} sets > {PROPHET_CAP}", candidates.len()),
        });
    }
    let reach: Vec<Mask> = candidates.iter().map(|&c| item_elements(c, m)).collect();
    let mut total = T::zero();
    for_each_realization(&inst.items, |r, p| {
        let best = reach.iter().map(|&e| f.value(r & e)).fold(None::<&T>, |b, v| match b {
            Some(b) if b >= v => Some(b),
            _ => Some(v),
        });
        total.add_mul_assign(p, best.expect("the empty set is independent"));
    });
    Ok(total)
}

/// Per item independently: element `ij` with probability `x[i][j]`, nothing
/// with the remaining probability.
pub fn product_of_singletons<T: Scalar>(m: usize, x: &[T]) -> Result<Distribution<T>> {
    if m == 0 || x.len() % m != 0 {
        return Err(Error::InvalidTable(format!("{} values do not form rows of length {m}", x.len())));
    }
    let n = x.len() / m;
    check_element_space(n, m)?;
    let mut pmf = vec![T::one()];
    let mut width = 0;
    for i in 0..n {
        let row = &x[i * m..(i + 1) * m];
        validate_row(row, i, "x")?;
        let none = T::one() - scalar::sum(row.iter().cloned());
        let mut next = vec![T::zero(); pmf.len() << m];
        for (s, p) in pmf.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            next[s] = p.clone() * none.clone();
            for (j, xij) in row.iter().enumerate() {
                next[s | 1 << (width + j)] = p.clone() * xij.clone();
            }
        }
        pmf = next;
        width += m;
    }
    Distribution::new(n * m, pmf)
}

/// Both sides of the product-of-singletons decomposition
/// `E_{S~D}[g] = Σ_u E_{S~D_u}[g] Π_i x_{i,u_i} / x_i`, where `D_u` is the
/// product distribution putting marginal `x_i = Σ_j x_{ij}` on element
/// `i u_i` and zero elsewhere.
pub fn verify_pos_decomposition<T: Scalar>(m: usize, x: &[T], g: &SetFunction<T>) -> Result<(T, T)> {
    let d = product_of_singletons(m, x)?;
    if g.n() != d.n() {
        return Err(Error::DimensionMismatch { expected: d.n(), got: g.n() });
    }
    let n = x.len() / m;
    let agg: Vec<T> = (0..n).map(|i| scalar::sum(x[i * m..(i + 1) * m].iter().cloned())).collect();
    if let Some(i) = agg.iter().position(|v| v.is_zero()) {
        return Err(Error::InvalidTable(format!("item {i} has zero aggregate marginal")));
    }
    let lhs = d.expect(g)?;
    let mut rhs = T::zero();
    let mut u = vec![0usize; n];
    loop {
        let mut weight = T::one();
        let mut xs = vec![T::zero(); n * m];
        for i in 0..n {
            weight *= &(x[i * m + u[i]].clone() / agg[i].clone());
            xs[i * m + u[i]] = agg[i].clone();
        }
        if !weight.is_zero() {
            let du = Distribution::product(&Marginals::new(xs)?);
            rhs.add_mul_assign(&weight, &du.expect(g)?);
        }
        // next u in [m]^n
        let mut k = 0;
        while k < n && u[k] + 1 == m {
            u[k] = 0;
            k += 1;
        }
        if k == n {
            break;
        }
        u[k] += 1;
    }
    Ok((lhs, rhs))
}

/// Random instance: each item's row is a random split of a random mass in
/// `[1/2, 1]`, and the objective is a weighted coverage function whose
/// elements each cover a random nonempty subset of `n·m` items of weight
/// `1..=10`.
pub fn random_spi_instance<T: Scalar>(n: usize, m: usize, system: System, seed: u64) -> Result<SpiInstance<T>> {
    check_element_space(n, m)?;
    let mut rng = stream_rng(seed, 0);
    let rows = (0..n)
        .map(|_| {
            let total = rng.gen_range(50..=100usize);
            let cuts: Vec<usize> = (0..m).map(|_| rng.gen_range(1..=10usize)).collect();
            let sum: usize = cuts.iter().sum();
            cuts.iter().map(|&c| T::from_usize(c * total) / T::from_usize(sum * 100)).collect()
        })
        .collect();
    let universe = (n * m).max(1);
    let covers: Vec<Mask> = (0..n * m).map(|_| rng.gen_range(1..=set::full_mask(universe))).collect();
    let weights: Vec<T> = (0..universe).map(|_| T::from_usize(rng.gen_range(1..=10usize))).collect();
    let objective = SetFunction::coverage(&covers, &weights)?;
    SpiInstance::new(ItemModel::new(rows)?, objective, system)
}

/// Rank-1 uniform matroid over `n` items.
pub fn single_choice(n: usize) -> Result<System> {
    Ok(Matroid::uniform(n, 1)?.into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, Rational};

    fn additive(weights: &[i64]) -> SetFunction<Rational> {
        SetFunction::modular(&weights.iter().map(|&w| q(w, 1)).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn deterministic_items_realize_first_elements() {
        let items = ItemModel::new(vec![vec![q(1, 1), q(0, 1)]; 2]).unwrap();
        let f = SetFunction::coverage(&[0b01, 0b10, 0b10, 0b11], &[q(1, 1), q(1, 1)]).unwrap();
        let inst = SpiInstance::new(items, f, Matroid::uniform(2, 2).unwrap().into()).unwrap();
        // first elements 0 and 2 cover both items
        assert_eq!(prophet_value(&inst).unwrap(), q(2, 1));
    }

    #[test]
    fn single_item_two_values() {
        let items = ItemModel::new(vec![vec![q(1, 3), q(2, 3)]]).unwrap();
        let f = SetFunction::from_fn(2, |s| q((s.count_ones() * 2 + (s & 1)) as i64, 1)).unwrap();
        let inst = SpiInstance::new(items, f.clone(), single_choice(1).unwrap()).unwrap();
        let expected = q(1, 3) * f.value(0b01).clone() + q(2, 3) * f.value(0b10).clone();
        assert_eq!(prophet_value(&inst).unwrap(), expected);
    }

    #[test]
    fn prophet_matches_direct_enumeration() {
        let rows = vec![vec![q(1, 2), q(1, 4)], vec![q(1, 3), q(1, 3)], vec![q(1, 5), q(3, 5)]];
        let weights = [3, 7, 2, 5, 4, 1];
        let f = additive(&weights);
        let inst = SpiInstance::new(ItemModel::new(rows.clone()).unwrap(), f.clone(), single_choice(3).unwrap()).unwrap();
        // oracle: enumerate (m + 1)^n outcome vectors, take the best realized value
        let mut oracle = q(0, 1);
        for code in 0..27 {
            let u = [code % 3, code / 3 % 3, code / 9];
            let mut p = q(1, 1);
            let mut best = q(0, 1);
            for i in 0..3 {
                if u[i] == 2 {
                    p *= q(1, 1) - rows[i][0].clone() - rows[i][1].clone();
                } else {
                    p *= rows[i][u[i]].clone();
                    best = best.max(q(weights[i * 2 + u[i]], 1));
                }
            }
            oracle += p * best;
        }
        assert_eq!(prophet_value(&inst).unwrap(), oracle);
        // the scan agrees with the greedy shortcut
        assert_eq!(prophet_by_scan(&inst).unwrap(), oracle);
    }

    #[test]
    fn product_of_singletons_examples() {
        let d = product_of_singletons(2, &[q(3, 10), q(1, 5)]).unwrap();
        assert_eq!(*d.prob(0), q(1, 2));
        assert_eq!(*d.prob(0b01), q(3, 10));
        assert_eq!(*d.prob(0b10), q(1, 5));
        assert_eq!(*d.prob(0b11), q(0, 1));
        let x = vec![q(1, 3), q(1, 4), q(1, 5)];
        assert_eq!(product_of_singletons(1, &x).unwrap(), Distribution::product(&Marginals::new(x).unwrap()));
        assert!(product_of_singletons(2, &[q(2, 3), q(1, 2)]).is_err());
    }

    #[test]
    fn decomposition_identity_trivial_cases() {
        let x = vec![q(1, 3), q(1, 6), q(1, 2), q(1, 4)];
        let one = SetFunction::constant(4, q(1, 1)).unwrap();
        assert_eq!(verify_pos_decomposition(2, &x, &one).unwrap(), (q(1, 1), q(1, 1)));
        let g = SetFunction::from_fn(2, |s| q((s * s) as i64, 1)).unwrap();
        let (l, r) = verify_pos_decomposition(1, &x[..2], &g).unwrap();
        assert_eq!(l, r);
        assert!(verify_pos_decomposition(2, &[q(0, 1), q(0, 1)], &SetFunction::constant(2, q(1, 1)).unwrap()).is_err());
    }

    #[test]
    fn json_round_trip() {
        let inst = random_spi_instance::<Rational>(3, 2, single_choice(3).unwrap(), 4).unwrap();
        let text = serde_json::to_string(&SpiInstanceJson::from(&inst)).unwrap();
        assert_eq!(SpiInstance::<Rational>::from_json_str(&text).unwrap(), inst);
        let bad = text.replace("\"m\":2", "\"m\":3");
        assert!(SpiInstance::<Rational>::from_json_str(&bad).unwrap_err().to_string().contains("p[0]"));
    }
}
