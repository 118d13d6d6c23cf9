//! Dense two-phase simplex over any [`Scalar`].
//!
//! Entering columns are chosen by Dantzig's rule; after a run of degenerate
//! pivots the solver switches to Bland's rule until the objective moves again,
//! so the exact backend cannot cycle. Row duals are recovered from the reduced
//! costs of each row's initial basic column.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
struct Row<T> {
    coeffs: Vec<(usize, T)>,
    rel: Relation,
    rhs: T,
}

/// `minimize c·x` subject to linear rows and `x >= 0`.
#[derive(Debug, Clone)]
pub struct LinearProgram<T: Scalar> {
    costs: Vec<T>,
    rows: Vec<Row<T>>,
}

#[derive(Debug, Clone)]
pub struct LpSolution<T> {
    pub objective: T,
    pub x: Vec<T>,
    /// One multiplier per row, in the sign convention of the rows as given:
    /// `c_j - Σ_r duals[r] a_rj >= 0` at a minimization optimum.
    pub duals: Vec<T>,
    pub pivots: usize,
}

#[derive(Debug, Clone)]
pub enum LpOutcome<T> {
    Optimal(LpSolution<T>),
    Infeasible,
    Unbounded,
}

impl<T> LpOutcome<T> {
    pub fn optimal(self) -> Result<LpSolution<T>> {
        match self {
            LpOutcome::Optimal(s) => Ok(s),
            LpOutcome::Infeasible => Err(Error::Lp("is infeasible".into())),
            LpOutcome::Unbounded => Err(Error::Lp("is unbounded".into())),
        }
    }
}

const DEGENERATE_RUN: usize = 25;

impl<T: Scalar> LinearProgram<T> {
    pub fn new(num_vars: usize) -> Self {
        Self { costs: vec![T::zero(); num_vars], rows: Vec::new() }
    }

    pub fn num_vars(&self) -> usize {
        self.costs.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn set_cost(&mut self, var: usize, c: T) {
        self.costs[var] = c;
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, T)>, rel: Relation, rhs: T) -> usize {
        debug_assert!(coeffs.iter().all(|(j, _)| *j < self.costs.len()));
        self.rows.push(Row { coeffs, rel, rhs });
        self.rows.len() - 1
    }

    pub fn max_iterations(&self) -> usize {
        50 * (self.costs.len() + 2 * self.rows.len()) + 1000
    }

    /// Solves `max c·x`; objective and duals are reported for the max form.
    pub fn maximize(&self) -> Result<LpOutcome<T>> {
        let mut neg = self.clone();
        neg.costs.iter_mut().for_each(|c| *c = -c.clone());
        Ok(match neg.minimize()? {
            LpOutcome::Optimal(mut s) => {
                s.objective = -s.objective;
                s.duals.iter_mut().for_each(|d| *d = -d.clone());
                LpOutcome::Optimal(s)
            }
            other => other,
        })
    }

    pub fn minimize(&self) -> Result<LpOutcome<T>> {
        Tableau::build(self).solve(self)
    }
}

struct Tableau<T> {
    // m rows of width cols + 1 (last entry is the rhs)
    rows: Vec<Vec<T>>,
    obj: Vec<T>,
    basis: Vec<usize>,
    cols: usize,
    n_struct: usize,
    first_artificial: usize,
    // per row: (column that formed the initial basis, its coefficient in the
    // row as originally given)
    identity: Vec<(usize, T)>,
    pivots: usize,
}

impl<T: Scalar> Tableau<T> {
    fn build(lp: &LinearProgram<T>) -> Self {
        let m = lp.rows.len();
        let n = lp.costs.len();
        let n_slack = lp.rows.iter().filter(|r| r.rel != Relation::Eq).count();

        // sign flips so every rhs is nonnegative
        let flips: Vec<bool> = lp.rows.iter().map(|r| r.rhs < T::zero()).collect();

        // structural columns that are unit vectors with a positive entry after
        // flipping can seed the basis without an artificial
        let mut col_rows: Vec<Vec<(usize, T)>> = vec![Vec::new(); n];
        for (r, row) in lp.rows.iter().enumerate() {
            for (j, a) in &row.coeffs {
                if !a.is_zero() {
                    col_rows[*j].push((r, a.clone()));
                }
            }
        }
        let mut crash: Vec<Option<(usize, T)>> = vec![None; m];
        for (j, entries) in col_rows.iter().enumerate() {
            if let [(r, a)] = entries.as_slice() {
                let positive = if flips[*r] { *a < T::zero() } else { *a > T::zero() };
                if positive && crash[*r].is_none() {
                    crash[*r] = Some((j, a.clone()));
                }
            }
        }

        let mut identity: Vec<Option<(usize, T)>> = vec![None; m];
        let mut slack_col = n;
        let mut slack_of = vec![None; m];
        for (r, row) in lp.rows.iter().enumerate() {
            if row.rel != Relation::Eq {
                let coeff = if row.rel == Relation::Le { T::one() } else { -T::one() };
                slack_of[r] = Some((slack_col, coeff.clone()));
                let usable = if flips[r] { coeff < T::zero() } else { coeff > T::zero() };
                if usable {
                    identity[r] = Some((slack_col, coeff));
                }
                slack_col += 1;
            }
        }
        for r in 0..m {
            if identity[r].is_none() {
                identity[r] = crash[r].clone();
            }
        }
        let first_artificial = n + n_slack;
        let n_art = identity.iter().filter(|c| c.is_none()).count();
        let cols = first_artificial + n_art;

        let mut rows = vec![vec![T::zero(); cols + 1]; m];
        let mut art = first_artificial;
        let mut ident = Vec::with_capacity(m);
        for (r, row) in lp.rows.iter().enumerate() {
            let sign = if flips[r] { -T::one() } else { T::one() };
            let t = &mut rows[r];
            for (j, a) in &row.coeffs {
                t[*j] += &(a.clone() * sign.clone());
            }
            if let Some((c, a)) = &slack_of[r] {
                t[*c] = a.clone() * sign.clone();
            }
            t[cols] = row.rhs.clone() * sign.clone();
            let id = match identity[r].take() {
                Some(id) => id,
                None => {
                    t[art] = T::one();
                    art += 1;
                    (art - 1, sign.clone())
                }
            };
            ident.push(id);
        }
        // normalize crash columns to coefficient 1
        for r in 0..m {
            let (c, _) = ident[r];
            let piv = rows[r][c].clone();
            if !piv.is_one() {
                for v in rows[r].iter_mut() {
                    if !v.is_zero() {
                        *v /= &piv;
                    }
                }
            }
        }
        let basis = ident.iter().map(|(c, _)| *c).collect();
        Self { rows, obj: vec![T::zero(); cols + 1], basis, cols, n_struct: n, first_artificial, identity: ident, pivots: 0 }
    }

    fn set_objective(&mut self, costs: &[T]) {
        // reduced costs: c_j - c_B B^{-1} A_j ; last entry holds -z
        let mut obj: Vec<T> = costs.to_vec();
        obj.resize(self.cols + 1, T::zero());
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = obj[b].clone();
            if cb.is_zero() {
                continue;
            }
            for (j, v) in self.rows[r].iter().enumerate() {
                obj[j].sub_mul_assign(&cb, v);
            }
        }
        self.obj = obj;
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let piv = self.rows[pr][pc].clone();
        if !piv.is_one() {
            for v in self.rows[pr].iter_mut() {
                if !v.is_zero() {
                    *v /= &piv;
                }
            }
        }
        let nz: Vec<usize> = (0..=self.cols).filter(|&j| !self.rows[pr][j].is_zero()).collect();
        let prow = std::mem::take(&mut self.rows[pr]);
        for (r, row) in self.rows.iter_mut().enumerate() {
            if r == pr {
                continue;
            }
            let factor = row[pc].clone();
            if factor.is_zero() {
                continue;
            }
            for &j in &nz {
                row[j].sub_mul_assign(&factor, &prow[j]);
            }
            row[pc] = T::zero();
        }
        let factor = self.obj[pc].clone();
        if !factor.is_zero() {
            for &j in &nz {
                self.obj[j].sub_mul_assign(&factor, &prow[j]);
            }
            self.obj[pc] = T::zero();
        }
        self.rows[pr] = prow;
        self.basis[pr] = pc;
        self.pivots += 1;
    }

    /// Runs simplex iterations on the current objective over columns `< allowed`.
    fn optimize(&mut self, allowed: usize, limit: usize) -> Result<bool> {
        let tol = T::lp_tol();
        let neg_tol = -tol.clone();
        let piv_tol = T::eq_tol();
        let mut degenerate = 0usize;
        loop {
            if self.pivots > limit {
                return Err(Error::Lp(format!("did not converge within {limit} pivots")));
            }
            let bland = degenerate >= DEGENERATE_RUN;
            let mut enter = None;
            let mut best = neg_tol.clone();
            for j in 0..allowed {
                let r = &self.obj[j];
                if *r < best {
                    enter = Some(j);
                    if bland {
                        break;
                    }
                    best = r.clone();
                }
            }
            let Some(pc) = enter else { return Ok(true) };

            let mut leave: Option<(usize, T)> = None;
            for (r, row) in self.rows.iter().enumerate() {
                let a = &row[pc];
                if *a > piv_tol {
                    let ratio = row[self.cols].clone() / a.clone();
                    let better = match &leave {
                        None => true,
                        Some((lr, best_ratio)) => {
                            ratio < *best_ratio || (ratio == *best_ratio && self.basis[r] < self.basis[*lr])
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            let Some((pr, ratio)) = leave else { return Ok(false) };
            if ratio <= tol {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(pr, pc);
        }
    }

    fn solve(mut self, lp: &LinearProgram<T>) -> Result<LpOutcome<T>> {
        let limit = lp.max_iterations();
        if self.first_artificial < self.cols {
            let mut phase1 = vec![T::zero(); self.cols];
            for c in phase1.iter_mut().skip(self.first_artificial) {
                *c = T::one();
            }
            self.set_objective(&phase1);
            self.optimize(self.cols, limit)?;
            let infeasibility = -self.obj[self.cols].clone();
            if infeasibility > T::lp_tol() {
                return Ok(LpOutcome::Infeasible);
            }
            // drive zero-level artificials out of the basis where possible
            for r in 0..self.rows.len() {
                if self.basis[r] >= self.first_artificial {
                    let pc = (0..self.first_artificial).find(|&j| self.rows[r][j].abs_val() > T::lp_tol());
                    if let Some(pc) = pc {
                        self.pivot(r, pc);
                    }
                }
            }
        }
        let mut costs = lp.costs.clone();
        costs.resize(self.cols, T::zero());
        self.set_objective(&costs);
        if !self.optimize(self.first_artificial, limit)? {
            return Ok(LpOutcome::Unbounded);
        }

        let mut x = vec![T::zero(); self.n_struct];
        for (r, &b) in self.basis.iter().enumerate() {
            if b < self.n_struct {
                x[b] = self.rows[r][self.cols].clone();
            }
        }
        let objective = -self.obj[self.cols].clone();
        // r_j = c_j - y·A_j for the initial identity column of each row
        let duals = self
            .identity
            .iter()
            .map(|(c, a)| {
                let cost = if *c < self.n_struct { lp.costs[*c].clone() } else { T::zero() };
                (cost - self.obj[*c].clone()) / a.clone()
            })
            .collect();
        Ok(LpOutcome::Optimal(LpSolution { objective, x, duals, pivots: self.pivots }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, Rational};

    fn r(n: i64) -> Rational {
        q(n, 1)
    }

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y : x <= 4, 2y <= 12, 3x + 2y <= 18 -> 36 at (2, 6)
        let mut lp = LinearProgram::<Rational>::new(2);
        lp.set_cost(0, r(3));
        lp.set_cost(1, r(5));
        lp.add_row(vec![(0, r(1))], Relation::Le, r(4));
        lp.add_row(vec![(1, r(2))], Relation::Le, r(12));
        lp.add_row(vec![(0, r(3)), (1, r(2))], Relation::Le, r(18));
        let s = lp.maximize().unwrap().optimal().unwrap();
        assert_eq!(s.objective, r(36));
        assert_eq!(s.x, vec![r(2), r(6)]);
        assert_eq!(s.duals, vec![r(0), q(3, 2), r(1)]);
    }

    #[test]
    fn equality_and_ge_rows_need_phase_one() {
        // min x + y : x + y >= 2, x - y = 1 -> (3/2, 1/2)
        let mut lp = LinearProgram::<Rational>::new(2);
        lp.set_cost(0, r(1));
        lp.set_cost(1, r(1));
        lp.add_row(vec![(0, r(1)), (1, r(1))], Relation::Ge, r(2));
        lp.add_row(vec![(0, r(1)), (1, r(-1))], Relation::Eq, r(1));
        let s = lp.minimize().unwrap().optimal().unwrap();
        assert_eq!(s.objective, r(2));
        assert_eq!(s.x, vec![q(3, 2), q(1, 2)]);
        // strong duality: b·y = c·x
        assert_eq!(s.duals[0].clone() * r(2) + s.duals[1].clone(), r(2));
    }

    #[test]
    fn negative_rhs_rows_are_flipped() {
        // min x : -x <= -3  -> 3
        let mut lp = LinearProgram::<Rational>::new(1);
        lp.set_cost(0, r(1));
        lp.add_row(vec![(0, r(-1))], Relation::Le, r(-3));
        let s = lp.minimize().unwrap().optimal().unwrap();
        assert_eq!(s.objective, r(3));
        assert_eq!(s.duals, vec![r(-1)]);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::<Rational>::new(1);
        lp.add_row(vec![(0, r(1))], Relation::Le, r(1));
        lp.add_row(vec![(0, r(1))], Relation::Ge, r(2));
        assert!(matches!(lp.minimize().unwrap(), LpOutcome::Infeasible));

        let mut lp = LinearProgram::<Rational>::new(2);
        lp.set_cost(0, r(-1));
        lp.add_row(vec![(0, r(1)), (1, r(-1))], Relation::Le, r(1));
        assert!(matches!(lp.minimize().unwrap(), LpOutcome::Unbounded));
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Beale's cycling example (cycles under Dantzig without anti-cycling)
        let mut lp = LinearProgram::<Rational>::new(4);
        lp.set_cost(0, q(-3, 4));
        lp.set_cost(1, r(150));
        lp.set_cost(2, q(-1, 50));
        lp.set_cost(3, r(6));
        lp.add_row(vec![(0, q(1, 4)), (1, r(-60)), (2, q(-1, 25)), (3, r(9))], Relation::Le, r(0));
        lp.add_row(vec![(0, q(1, 2)), (1, r(-90)), (2, q(-1, 50)), (3, r(3))], Relation::Le, r(0));
        lp.add_row(vec![(2, r(1))], Relation::Le, r(1));
        let s = lp.minimize().unwrap().optimal().unwrap();
        assert_eq!(s.objective, q(-1, 20));
    }

    #[test]
    fn redundant_equalities() {
        // x + y = 1 twice; min -x
        let mut lp = LinearProgram::<f64>::new(2);
        lp.set_cost(0, -1.0);
        lp.add_row(vec![(0, 1.0), (1, 1.0)], Relation::Eq, 1.0);
        lp.add_row(vec![(0, 2.0), (1, 2.0)], Relation::Eq, 2.0);
        let s = lp.minimize().unwrap().optimal().unwrap();
        assert!((s.objective + 1.0).abs() < 1e-12);
    }
}
