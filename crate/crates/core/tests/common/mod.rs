//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use negdep::optimize::IndependenceSystem;
use negdep::probing::ProbingInstance;
use negdep::set::{self, Mask};
use negdep::{q, Distribution, Rational, SetFunction};

/// `E_D[f]` by summing over the table.
pub fn expectation(d: &Distribution<Rational>, f: &SetFunction<Rational>) -> Rational {
    (0..1u32 << d.n()).fold(q(0, 1), |acc, s| acc + d.prob(s).clone() * f.value(s).clone())
}

/// `F(x)` by summing over all sets with product weights.
pub fn multilinear_by_sum(f: &SetFunction<Rational>, x: &[Rational]) -> Rational {
    (0..1u32 << x.len()).fold(q(0, 1), |acc, s| {
        let w = (0..x.len()).fold(q(1, 1), |w, i| w * if set::contains(s, i) { x[i].clone() } else { q(1, 1) - x[i].clone() });
        acc + w * f.value(s).clone()
    })
}

#[derive(Clone)]
enum Tree {
    Stop,
    Probe(usize, Box<Tree>, Box<Tree>),
}

fn trees(inst: &ProbingInstance<Rational>, probed: Mask) -> Vec<Tree> {
    let mut out = vec![Tree::Stop];
    for e in 0..inst.n() {
        if set::contains(probed, e) || !inst.system.is_independent(probed | 1 << e) {
            continue;
        }
        let subs = trees(inst, probed | 1 << e);
        for a in &subs {
            for b in &subs {
                out.push(Tree::Probe(e, Box::new(a.clone()), Box::new(b.clone())));
            }
        }
    }
    out
}

fn walk(t: &Tree, world: Mask, got: Mask) -> Mask {
    match t {
        Tree::Stop => got,
        Tree::Probe(e, hit, _) if set::contains(world, *e) => walk(hit, world, got | 1 << e),
        Tree::Probe(_, _, miss) => walk(miss, world, got),
    }
}

/// Best adaptive probing value by enumerating every decision tree and
/// averaging it over every realization. Practical for `n <= 3`.
pub fn best_decision_tree(inst: &ProbingInstance<Rational>) -> Rational {
    let n = inst.n();
    let world = |w: Mask| -> Rational {
        (0..n).fold(q(1, 1), |acc, e| acc * if set::contains(w, e) { inst.p[e].clone() } else { q(1, 1) - inst.p[e].clone() })
    };
    trees(inst, 0)
        .iter()
        .map(|t| (0..1u32 << n).fold(q(0, 1), |acc, w| acc + world(w) * inst.f.value(walk(t, w, 0)).clone()))
        .max()
        .expect("the empty tree always exists")
}

/// `E[g]` when each item independently picks element `ij` with probability
/// `x[i·m + j]` or nothing, by walking every choice vector.
pub fn singletons_expectation(m: usize, x: &[Rational], g: &SetFunction<Rational>) -> Rational {
    fn go(i: usize, m: usize, x: &[Rational], g: &SetFunction<Rational>, s: Mask, w: Rational) -> Rational {
        if i * m == x.len() {
            return w * g.value(s).clone();
        }
        let row = &x[i * m..(i + 1) * m];
        let none = row.iter().fold(q(1, 1), |acc, v| acc - v.clone());
        let mut total = go(i + 1, m, x, g, s, w.clone() * none);
        for (j, xij) in row.iter().enumerate() {
            total += go(i + 1, m, x, g, s | 1 << (i * m + j), w.clone() * xij.clone());
        }
        total
    }
    go(0, m, x, g, 0, q(1, 1))
}
