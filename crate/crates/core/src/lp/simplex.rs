//! Phase-1 bounded-variable primal simplex with Bland's rule.
//!
//! After presolve every remaining row `Σ a·x (≤|=|≥) b` gets a slack
//! `s = b − Σ a·x` with bounds `[0,∞)`, `[0,0]` or `(−∞,0]`. Structurals start
//! at their lower bounds; rows whose slack is then out of range get an
//! artificial variable. The phase-1 objective is the sum of artificials and the
//! program is feasible iff it reaches zero. The dictionary is stored as sparse
//! rows over the nonbasic columns.

use super::presolve::presolve;
use super::{LinearProgram, LpOutcome, LpPoint, Relation};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub rows_after_presolve: usize,
    pub free_vars_after_presolve: usize,
    pub artificials: usize,
    pub pivots: usize,
    pub bound_flips: usize,
}

/// Exact feasibility for `S` exact; tolerance-based for floats.
pub fn solve_feasibility<S: Scalar>(lp: &LinearProgram<S>) -> LpOutcome<S> {
    solve_feasibility_with_stats(lp).0
}

pub fn solve_feasibility_with_stats<S: Scalar>(lp: &LinearProgram<S>) -> (LpOutcome<S>, SolveStats) {
    let mut stats = SolveStats::default();
    let Some(reduced) = presolve(lp) else {
        return (LpOutcome::Infeasible, stats);
    };
    let free: Vec<usize> = (0..lp.varcount).filter(|&v| !reduced.is_fixed(v)).collect();
    stats.rows_after_presolve = reduced.rows.len();
    stats.free_vars_after_presolve = free.len();
    let mut values: Vec<S> = reduced.lb.clone();
    if !reduced.rows.is_empty() {
        let mut col_of = vec![usize::MAX; lp.varcount];
        for (c, &v) in free.iter().enumerate() {
            col_of[v] = c;
        }
        let mut tab = Tableau::new(&reduced.rows, &col_of, &free, &reduced.lb, &reduced.ub);
        stats.artificials = tab.artificials;
        let feasible = tab.run(&mut stats);
        if !feasible {
            return (LpOutcome::Infeasible, stats);
        }
        for (c, &v) in free.iter().enumerate() {
            values[v] = tab.value[c].clone();
        }
    }
    let point = LpPoint { values };
    let bad = lp.violations(&point);
    assert!(bad.is_empty() || !S::is_exact(), "simplex returned a point violating rows {bad:?}");
    (LpOutcome::Feasible(point), stats)
}

/// Variable ids: `0..nstruct` structurals, then one slack per row, then artificials.
struct Tableau<S> {
    lb: Vec<Option<S>>,
    ub: Vec<Option<S>>,
    value: Vec<S>,
    /// `basic[r]` is the variable of row `r`; row `r` reads
    /// `x_basic + Σ_c rows[r][c] · x_{nonbasic[c]} = const`.
    basic: Vec<usize>,
    nonbasic: Vec<usize>,
    rows: Vec<Vec<(usize, S)>>,
    /// Phase-1 reduced costs over nonbasic columns.
    cost: Vec<S>,
    first_artificial: usize,
    artificials: usize,
}

fn lookup<S: Clone>(row: &[(usize, S)], col: usize) -> Option<&S> {
    row.binary_search_by_key(&col, |(c, _)| *c).ok().map(|i| &row[i].1)
}

impl<S: Scalar> Tableau<S> {
    fn new(
        rows: &[super::Constraint<S>],
        col_of: &[usize],
        free: &[usize],
        lb0: &[S],
        ub0: &[S],
    ) -> Self {
        let nstruct = free.len();
        let nrows = rows.len();
        let mut lb: Vec<Option<S>> = free.iter().map(|&v| Some(lb0[v].clone())).collect();
        let mut ub: Vec<Option<S>> = free.iter().map(|&v| Some(ub0[v].clone())).collect();
        let mut value: Vec<S> = free.iter().map(|&v| lb0[v].clone()).collect();
        for row in rows {
            let (l, u) = match row.relation {
                Relation::Le => (Some(S::zero()), None),
                Relation::Eq => (Some(S::zero()), Some(S::zero())),
                Relation::Ge => (None, Some(S::zero())),
            };
            lb.push(l);
            ub.push(u);
            value.push(S::zero());
        }
        let first_artificial = nstruct + nrows;
        let mut basic = Vec::with_capacity(nrows);
        let mut nonbasic: Vec<usize> = (0..nstruct).collect();
        let mut tab_rows = Vec::with_capacity(nrows);
        let mut art_rows = Vec::new();
        for (r, row) in rows.iter().enumerate() {
            let slack = nstruct + r;
            let mut coeffs: Vec<(usize, S)> = row.coeffs.iter().map(|(v, a)| (col_of[*v], a.clone())).collect();
            coeffs.sort_by_key(|(c, _)| *c);
            let residual = coeffs
                .iter()
                .fold(row.rhs.clone(), |acc, (c, a)| acc - a.clone() * value[*c].clone());
            let in_range = lb[slack].as_ref().map_or(true, |l| l.le_tol(&residual))
                && ub[slack].as_ref().map_or(true, |u| residual.le_tol(u));
            if in_range {
                value[slack] = residual;
                basic.push(slack);
                tab_rows.push(coeffs);
            } else {
                // σ·art + slack + Σ a·x = b with the slack parked at 0.
                let sign = if residual.is_pos() { S::one() } else { -S::one() };
                let art = first_artificial + art_rows.len();
                lb.push(Some(S::zero()));
                ub.push(None);
                value.push(residual.abs());
                let slack_col = nonbasic.len();
                nonbasic.push(slack);
                let mut scaled: Vec<(usize, S)> = coeffs.into_iter().map(|(c, a)| (c, a * sign.clone())).collect();
                scaled.push((slack_col, sign));
                basic.push(art);
                tab_rows.push(scaled);
                art_rows.push(r);
            }
        }
        let mut cost = vec![S::zero(); nonbasic.len()];
        for &r in &art_rows {
            for (c, a) in &tab_rows[r] {
                cost[*c] = cost[*c].clone() - a.clone();
            }
        }
        Tableau { lb, ub, value, basic, nonbasic, rows: tab_rows, cost, first_artificial, artificials: art_rows.len() }
    }

    fn objective(&self) -> S {
        self.value[self.first_artificial..].iter().fold(S::zero(), |acc, v| acc + v.clone())
    }

    fn can_increase(&self, var: usize) -> bool {
        self.ub[var].as_ref().map_or(true, |u| (u.clone() - self.value[var].clone()).is_pos())
    }

    fn can_decrease(&self, var: usize) -> bool {
        self.lb[var].as_ref().map_or(true, |l| (self.value[var].clone() - l.clone()).is_pos())
    }

    /// Entering column and direction (+1 increase, −1 decrease) by Bland's
    /// rule: the eligible nonbasic variable with the smallest id.
    fn entering(&self) -> Option<(usize, bool)> {
        let mut best: Option<(usize, usize, bool)> = None;
        for (c, d) in self.cost.iter().enumerate() {
            let var = self.nonbasic[c];
            let dir = if d.is_neg() && self.can_increase(var) {
                true
            } else if d.is_pos() && self.can_decrease(var) {
                false
            } else {
                continue;
            };
            if best.map_or(true, |(v, _, _)| var < v) {
                best = Some((var, c, dir));
            }
        }
        best.map(|(_, c, dir)| (c, dir))
    }

    fn run(&mut self, stats: &mut SolveStats) -> bool {
        while let Some((col, increase)) = self.entering() {
            let entering = self.nonbasic[col];
            // Candidate limits: (step, variable id, row or None for a bound flip).
            let mut limit: Option<(S, usize, Option<usize>)> = None;
            let consider = |step: S, var: usize, row: Option<usize>, limit: &mut Option<(S, usize, Option<usize>)>| {
                let better = match limit {
                    None => true,
                    Some((s, v, _)) => step < *s || (step == *s && var < *v),
                };
                if better {
                    *limit = Some((step, var, row));
                }
            };
            if let (Some(l), Some(u)) = (&self.lb[entering], &self.ub[entering]) {
                consider(u.clone() - l.clone(), entering, None, &mut limit);
            }
            for (r, row) in self.rows.iter().enumerate() {
                let Some(alpha) = lookup(row, col) else { continue };
                let b = self.basic[r];
                // Basic moves by −alpha per unit of entering movement (signed).
                let rate = if increase { -alpha.clone() } else { alpha.clone() };
                let step = if rate.is_neg() {
                    self.lb[b].as_ref().map(|l| (self.value[b].clone() - l.clone()) / -rate.clone())
                } else if rate.is_pos() {
                    self.ub[b].as_ref().map(|u| (u.clone() - self.value[b].clone()) / rate.clone())
                } else {
                    None
                };
                if let Some(step) = step {
                    let step = if step.is_neg() { S::zero() } else { step };
                    consider(step, b, Some(r), &mut limit);
                }
            }
            let (step, _, leaving_row) = limit.expect("phase-1 objective is bounded below");
            let delta = if increase { step.clone() } else { -step.clone() };
            if !delta.is_zero() {
                self.value[entering] = self.value[entering].clone() + delta.clone();
                for (r, row) in self.rows.iter().enumerate() {
                    if let Some(alpha) = lookup(row, col) {
                        let b = self.basic[r];
                        self.value[b] = self.value[b].clone() - alpha.clone() * delta.clone();
                    }
                }
            }
            match leaving_row {
                None => stats.bound_flips += 1,
                Some(r) => {
                    self.pivot(r, col);
                    stats.pivots += 1;
                }
            }
            if self.objective().near_zero() {
                break;
            }
        }
        self.objective().near_zero()
    }

    fn pivot(&mut self, r: usize, col: usize) {
        let leaving = self.basic[r];
        let entering = self.nonbasic[col];
        // Snap the leaving variable onto the bound it reached.
        if let Some(l) = &self.lb[leaving] {
            if self.value[leaving].near_eq(l) {
                self.value[leaving] = l.clone();
            }
        }
        if let Some(u) = &self.ub[leaving] {
            if self.value[leaving].near_eq(u) {
                self.value[leaving] = u.clone();
            }
        }
        let pivot_row = std::mem::take(&mut self.rows[r]);
        let alpha = lookup(&pivot_row, col).cloned().expect("pivot element present");
        // New row r: x_entering + Σ_{c≠col} (α_c/α) x_c + (1/α) x_leaving = …
        let new_row: Vec<(usize, S)> = pivot_row
            .iter()
            .map(|(c, a)| if *c == col { (*c, S::one() / alpha.clone()) } else { (*c, a.clone() / alpha.clone()) })
            .collect();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let Some(factor) = lookup(row, col).cloned() else { continue };
            *row = eliminate(row, &new_row, col, &factor);
        }
        let factor = self.cost[col].clone();
        if !factor.is_zero() {
            for (c, a) in &new_row {
                if *c == col {
                    self.cost[col] = -factor.clone() * a.clone();
                } else {
                    self.cost[*c] = self.cost[*c].clone() - factor.clone() * a.clone();
                }
            }
        }
        self.rows[r] = new_row;
        self.basic[r] = entering;
        self.nonbasic[col] = leaving;
        // Artificials never re-enter once they leave.
        if leaving >= self.first_artificial {
            self.ub[leaving] = Some(S::zero());
            self.value[leaving] = S::zero();
        }
    }
}

/// `row − factor · new_row`, except that column `col` (now the leaving
/// variable) gets `−factor · new_row[col]`.
fn eliminate<S: Scalar>(row: &[(usize, S)], new_row: &[(usize, S)], col: usize, factor: &S) -> Vec<(usize, S)> {
    let mut out = Vec::with_capacity(row.len() + new_row.len());
    let (mut i, mut j) = (0, 0);
    while i < row.len() || j < new_row.len() {
        let ci = row.get(i).map_or(usize::MAX, |x| x.0);
        let cj = new_row.get(j).map_or(usize::MAX, |x| x.0);
        if ci < cj {
            out.push(row[i].clone());
            i += 1;
        } else if cj < ci {
            out.push((cj, -factor.clone() * new_row[j].1.clone()));
            j += 1;
        } else {
            let v = if ci == col {
                -factor.clone() * new_row[j].1.clone()
            } else {
                row[i].1.clone() - factor.clone() * new_row[j].1.clone()
            };
            if !v.is_zero() {
                out.push((ci, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Instance;
    use crate::lp::{build_time_indexed_lp, Constraint};
    use crate::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn contradictory_single_var_is_infeasible() {
        let mut lp = LinearProgram::new(1);
        lp.push(Constraint::new([(0, q(1, 1))], Relation::Le, q(1, 1)));
        lp.push(Constraint::new([(0, q(1, 1))], Relation::Ge, q(2, 1)));
        assert_eq!(solve_feasibility(&lp), LpOutcome::Infeasible);
    }

    #[test]
    fn empty_system_is_feasible() {
        let lp: LinearProgram<Rational> = LinearProgram::new(1);
        let point = solve_feasibility(&lp).point().cloned().unwrap();
        assert_eq!(point.values.len(), 1);
    }

    #[test]
    fn diamond_lp_is_feasible_at_three() {
        let inst = Instance::new(4, 2, [(1, 2), (1, 3), (2, 4), (3, 4)]).unwrap();
        let (lp, _) = build_time_indexed_lp::<Rational>(&inst, 3);
        let out = solve_feasibility(&lp);
        assert!(lp.is_feasible_point(out.point().unwrap()));
        let (lp2, _) = build_time_indexed_lp::<Rational>(&inst, 2);
        assert_eq!(solve_feasibility(&lp2), LpOutcome::Infeasible);
    }

    #[test]
    fn needs_real_pivots() {
        // x + y = 3/2, x − y ≥ 1/4, 2x + y ≤ 5/2 leaves x in [7/8, 1].
        let mut lp = LinearProgram::new(2);
        lp.push(Constraint::new([(0, q(1, 1)), (1, q(1, 1))], Relation::Eq, q(3, 2)));
        lp.push(Constraint::new([(0, q(1, 1)), (1, q(-1, 1))], Relation::Ge, q(1, 4)));
        lp.push(Constraint::new([(0, q(2, 1)), (1, q(1, 1))], Relation::Le, q(5, 2)));
        let (out, stats) = solve_feasibility_with_stats(&lp);
        assert!(lp.is_feasible_point(out.point().unwrap()));
        assert!(stats.rows_after_presolve > 0 || stats.free_vars_after_presolve == 0);
        // Tightening the last row to 2x + y ≤ 2 leaves no solution.
        lp.constraints[2].rhs = q(2, 1);
        assert_eq!(solve_feasibility(&lp), LpOutcome::Infeasible);
    }

    #[test]
    fn float_route_agrees_on_small_lps() {
        for n in 2..6 {
            let inst = Instance::new(n, 2, (1..n).map(|j| (j, j + 1)).take(n / 2)).unwrap();
            for horizon in 1..=n {
                let (exact, _) = build_time_indexed_lp::<Rational>(&inst, horizon);
                let (float, _) = build_time_indexed_lp::<f64>(&inst, horizon);
                assert_eq!(
                    solve_feasibility(&exact).is_feasible(),
                    solve_feasibility(&float).is_feasible(),
                    "n={n} T={horizon}"
                );
            }
        }
    }
}
