//! Continuous greedy over the polytope of an independence system.

use serde_json::{json, Value};

use super::system::IndependenceSystem;
use crate::dist::Marginals;
use crate::error::{Error, Result};
use crate::multilinear::gradient;
use crate::scalar::Scalar;
use crate::set::{self, Mask};
use crate::setfn::SetFunction;

/// Default number of continuous-greedy steps.
pub const DEFAULT_STEPS: usize = 100;

/// `x = Σ_k λ_k 1_{B_k}` with maximal sets `B_k` and `Σ λ_k = b`.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalSolution<T: Scalar> {
    pub x: Marginals<T>,
    pub decomposition: Vec<(Mask, T)>,
    pub b: T,
    pub steps: usize,
}

impl<T: Scalar> FractionalSolution<T> {
    /// The decomposition rescaled to total weight 1.
    pub fn normalized_decomposition(&self) -> Vec<(Mask, T)> {
        self.decomposition.iter().map(|(m, w)| (*m, w.clone() / self.b.clone())).collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "x": crate::json::scalars_to_json(self.x.as_slice()),
            "b": self.b.to_json(),
            "steps": self.steps,
            "decomposition": self.decomposition.iter().map(|(m, w)| json!({
                "set": set::elements(*m).collect::<Vec<_>>(),
                "weight": w.to_json(),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Moves `x` from 0 in `steps` equal steps of length `b / steps`, each toward
/// the maximal set chosen by the linear oracle on `∇F(x)`. For monotone
/// submodular `f` and a matroid, `F(x) >= (1 - e^{-b} - O(1/steps)) · OPT`
/// relative to `b · P_I`.
pub fn continuous_greedy<T: Scalar, S: IndependenceSystem>(
    f: &SetFunction<T>,
    system: &S,
    b: T,
    steps: usize,
) -> Result<FractionalSolution<T>> {
    let n = system.n();
    if f.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: f.n() });
    }
    if !f.is_monotone() {
        return Err(Error::NotMonotone);
    }
    if !(b > T::zero()) || b.gt_tol(&T::one()) {
        return Err(Error::InvalidTable(format!("step budget b = {b} must lie in (0, 1]")));
    }
    if steps == 0 {
        return Err(Error::InvalidTable("continuous greedy needs at least one step".into()));
    }
    let step = b.clone() / T::from_usize(steps);
    let mut x = Marginals::uniform(n, T::zero())?;
    let mut decomposition: Vec<(Mask, T)> = Vec::new();
    for _ in 0..steps {
        let grad = gradient(f, &x)?;
        let chosen = system.linear_oracle(&grad);
        let mut next = x.as_slice().to_vec();
        for i in set::elements(chosen) {
            next[i] += &step;
        }
        x = Marginals::new(next)?;
        match decomposition.iter_mut().find(|(m, _)| *m == chosen) {
            Some((_, w)) => *w += &step,
            None => decomposition.push((chosen, step.clone())),
        }
    }
    decomposition.sort_by_key(|(m, _)| *m);
    Ok(FractionalSolution { x, decomposition, b, steps })
}
