//! Bound propagation ahead of the simplex.
//!
//! Every deduction here is implied by the rows and the `[0,1]` box, so the
//! feasible set is unchanged: single-variable rows become bounds, activity
//! bounds tighten variable bounds, variables with equal bounds are substituted
//! out, and rows that can no longer bind are dropped.

use std::collections::{HashSet, VecDeque};

use super::{Constraint, LinearProgram, Relation};
use crate::scalar::Scalar;

pub(super) struct Reduced<S> {
    pub lb: Vec<S>,
    pub ub: Vec<S>,
    /// Rows over free variables only (`lb < ub`), fixed ones substituted.
    pub rows: Vec<Constraint<S>>,
}

impl<S: Scalar> Reduced<S> {
    pub fn is_fixed(&self, v: usize) -> bool {
        self.lb[v].near_eq(&self.ub[v])
    }
}

/// Cap on row re-examinations, as a multiple of the row count.
const PROPAGATION_ROUNDS: usize = 30;

struct Bounds<S> {
    lb: Vec<S>,
    ub: Vec<S>,
}

/// `(min, max)` of `Σ a·y` over the box `[lb, ub]`.
fn activity_range<S: Scalar>(lb: &[S], ub: &[S], coeffs: &[(usize, S)]) -> (S, S) {
    let mut lo = S::zero();
    let mut hi = S::zero();
    for (v, a) in coeffs {
        let (l, u) = (a.clone() * lb[*v].clone(), a.clone() * ub[*v].clone());
        if a.is_pos() {
            lo = lo + l;
            hi = hi + u;
        } else {
            lo = lo + u;
            hi = hi + l;
        }
    }
    (lo, hi)
}

impl<S: Scalar> Bounds<S> {
    fn activity_range(&self, coeffs: &[(usize, S)]) -> (S, S) {
        activity_range(&self.lb, &self.ub, coeffs)
    }

    /// Tightens bounds from `Σ a·y ≤ b`. Returns the variables whose bounds
    /// moved, or `Err(())` if the row cannot be met.
    fn tighten_le(&mut self, coeffs: &[(usize, S)], rhs: &S) -> Result<Vec<usize>, ()> {
        let (lo, _) = self.activity_range(coeffs);
        let slack = rhs.clone() - lo;
        if slack.is_neg() {
            return Err(());
        }
        let mut moved = Vec::new();
        for (v, a) in coeffs {
            let v = *v;
            if a.is_pos() {
                let cand = self.lb[v].clone() + slack.clone() / a.clone();
                if (self.ub[v].clone() - cand.clone()).is_pos() {
                    self.ub[v] = cand;
                    moved.push(v);
                }
            } else {
                let cand = self.ub[v].clone() + slack.clone() / a.clone();
                if (cand.clone() - self.lb[v].clone()).is_pos() {
                    self.lb[v] = cand;
                    moved.push(v);
                }
            }
            if (self.lb[v].clone() - self.ub[v].clone()).is_pos() {
                return Err(());
            }
        }
        Ok(moved)
    }

    fn apply_single(&mut self, v: usize, a: &S, rel: Relation, rhs: &S) -> Result<(), ()> {
        let val = rhs.clone() / a.clone();
        let upper = |b: &mut Self| {
            if val < b.ub[v] {
                b.ub[v] = val.clone();
            }
        };
        let lower = |b: &mut Self| {
            if val > b.lb[v] {
                b.lb[v] = val.clone();
            }
        };
        match (rel, a.is_pos()) {
            (Relation::Eq, _) => {
                upper(self);
                lower(self);
            }
            (Relation::Le, true) | (Relation::Ge, false) => upper(self),
            (Relation::Le, false) | (Relation::Ge, true) => lower(self),
        }
        if (self.lb[v].clone() - self.ub[v].clone()).is_pos() {
            Err(())
        } else {
            Ok(())
        }
    }
}

fn negate<S: Scalar>(coeffs: &[(usize, S)]) -> Vec<(usize, S)> {
    coeffs.iter().map(|(v, a)| (*v, -a.clone())).collect()
}

/// `None` when infeasibility is already proven.
pub(super) fn presolve<S: Scalar>(lp: &LinearProgram<S>) -> Option<Reduced<S>> {
    let mut bounds = Bounds { lb: vec![S::zero(); lp.varcount], ub: vec![S::one(); lp.varcount] };
    let mut multi: Vec<&Constraint<S>> = Vec::new();
    for row in &lp.constraints {
        match row.coeffs.as_slice() {
            [] => {
                let ok = match row.relation {
                    Relation::Le => !row.rhs.is_neg(),
                    Relation::Ge => !row.rhs.is_pos(),
                    Relation::Eq => row.rhs.near_zero(),
                };
                if !ok {
                    return None;
                }
            }
            [(v, a)] => bounds.apply_single(*v, a, row.relation, &row.rhs).ok()?,
            _ => multi.push(row),
        }
    }

    let mut rows_of_var: Vec<Vec<usize>> = vec![Vec::new(); lp.varcount];
    for (r, row) in multi.iter().enumerate() {
        for (v, _) in &row.coeffs {
            rows_of_var[*v].push(r);
        }
    }
    let mut queued = vec![true; multi.len()];
    let mut queue: VecDeque<usize> = (0..multi.len()).collect();
    let mut budget = PROPAGATION_ROUNDS * multi.len().max(1);
    while let Some(r) = queue.pop_front() {
        queued[r] = false;
        if budget == 0 {
            break;
        }
        budget -= 1;
        let row = multi[r];
        let mut moved = Vec::new();
        if matches!(row.relation, Relation::Le | Relation::Eq) {
            moved.extend(bounds.tighten_le(&row.coeffs, &row.rhs).ok()?);
        }
        if matches!(row.relation, Relation::Ge | Relation::Eq) {
            moved.extend(bounds.tighten_le(&negate(&row.coeffs), &-row.rhs.clone()).ok()?);
        }
        for v in moved {
            if bounds.ub[v].near_eq(&bounds.lb[v]) {
                bounds.ub[v] = bounds.lb[v].clone();
            }
            for &other in &rows_of_var[v] {
                if !queued[other] {
                    queued[other] = true;
                    queue.push_back(other);
                }
            }
        }
    }

    let Bounds { lb, ub } = bounds;
    let mut reduced = Reduced { lb, ub, rows: Vec::new() };
    let mut seen: HashSet<String> = HashSet::new();
    for row in multi {
        let mut rhs = row.rhs.clone();
        let mut free = Vec::new();
        for (v, a) in &row.coeffs {
            if reduced.is_fixed(*v) {
                rhs = rhs - a.clone() * reduced.lb[*v].clone();
            } else {
                free.push((*v, a.clone()));
            }
        }
        let (lo, hi) = activity_range(&reduced.lb, &reduced.ub, &free);
        let (can_fail_le, can_fail_ge) = ((hi.clone() - rhs.clone()).is_pos(), (rhs.clone() - lo.clone()).is_pos());
        let (violated, binding) = match row.relation {
            Relation::Le => ((lo - rhs.clone()).is_pos(), can_fail_le),
            Relation::Ge => ((rhs.clone() - hi).is_pos(), can_fail_ge),
            Relation::Eq => ((lo - rhs.clone()).is_pos() || (rhs.clone() - hi).is_pos(), can_fail_le || can_fail_ge),
        };
        if violated {
            return None;
        }
        if !binding || free.is_empty() {
            continue;
        }
        let key = format!("{:?}|{:?}|{:?}", free, row.relation, rhs);
        if seen.insert(key) {
            reduced.rows.push(Constraint { coeffs: free, relation: row.relation, rhs });
        }
    }
    Some(reduced)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn q(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    #[test]
    fn contradicting_bounds_are_infeasible() {
        let mut lp = LinearProgram::new(1);
        lp.push(Constraint::new([(0, q(1))], Relation::Le, q(1)));
        lp.push(Constraint::new([(0, q(1))], Relation::Ge, q(2)));
        assert!(presolve(&lp).is_none());
    }

    #[test]
    fn zero_sum_fixes_all_terms() {
        // y0 + y1 <= 0 forces both to zero, after which y0 + y1 + y2 = 1 fixes y2.
        let mut lp = LinearProgram::new(3);
        lp.push(Constraint::new([(0, q(1)), (1, q(1))], Relation::Le, q(0)));
        lp.push(Constraint::new([(0, q(1)), (1, q(1)), (2, q(1))], Relation::Eq, q(1)));
        let r = presolve(&lp).unwrap();
        assert!(r.rows.is_empty());
        assert_eq!((r.lb[2].clone(), r.ub[2].clone()), (q(1), q(1)));
        assert_eq!(r.ub[0], q(0));
    }

    #[test]
    fn redundant_rows_dropped_binding_rows_kept() {
        let mut lp = LinearProgram::new(2);
        lp.push(Constraint::new([(0, q(1)), (1, q(1))], Relation::Le, q(2)));
        lp.push(Constraint::new([(0, q(1)), (1, q(1))], Relation::Le, q(1)));
        lp.push(Constraint::new([(0, q(1)), (1, q(1))], Relation::Le, q(1)));
        let r = presolve(&lp).unwrap();
        assert_eq!(r.rows.len(), 1);
    }
}
