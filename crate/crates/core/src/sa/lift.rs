//! Construction of the level-`s` lifted program.
//!
//! Each base row is first brought to the form `a·y ≤ b` (a `≥` row is negated,
//! an equality becomes two rows). For every pair of disjoint variable sets
//! `S, T` with `|S| + |T| ≤ s` the lift contains
//!
//! ```text
//! Σ_{T' ⊆ T} (−1)^{|T'|} ( Σ_i a_i · y_{S ∪ T' ∪ {i}} − b · y_{S ∪ T'} ) ≤ 0
//! ```
//!
//! which is the linearisation of `(a·y − b) · Π_S y · Π_T (1 − y) ≤ 0` under
//! `y_i² = y_i`. The normalisation `y_∅ = 1` is added as its own row.

use std::collections::HashMap;

use super::key::{subsets_up_to, SubsetKey};
use super::SaError;
use crate::lp::{Constraint, LinearProgram, Relation};
use crate::scalar::Scalar;

pub const DEFAULT_MAX_LIFTED_VARS: usize = 200_000;

#[derive(Debug, Clone)]
pub struct SaLift<S> {
    pub level: usize,
    pub base: LinearProgram<S>,
    pub lifted: LinearProgram<S>,
    /// `keys[k]` is the set behind lifted variable `k`.
    pub keys: Vec<SubsetKey>,
    pub keyindex: HashMap<SubsetKey, usize>,
}

impl<S: Scalar> SaLift<S> {
    pub fn index_of(&self, key: &SubsetKey) -> Option<usize> {
        self.keyindex.get(key).copied()
    }

    pub fn empty_index(&self) -> usize {
        self.keyindex[&SubsetKey::empty()]
    }
}

/// `Σ_{i ≤ s+1} C(N, i)`, saturating.
pub fn lifted_var_count(ground: usize, level: usize) -> usize {
    let mut total: usize = 0;
    let mut binom: usize = 1;
    for i in 0..=(level + 1).min(ground) {
        total = total.saturating_add(binom);
        binom = binom.saturating_mul(ground - i) / (i + 1);
    }
    total
}

pub fn build_sa_lift<S: Scalar>(base: &LinearProgram<S>, level: usize) -> Result<SaLift<S>, SaError> {
    build_sa_lift_with_cap(base, level, DEFAULT_MAX_LIFTED_VARS)
}

pub fn build_sa_lift_with_cap<S: Scalar>(base: &LinearProgram<S>, level: usize, cap: usize) -> Result<SaLift<S>, SaError> {
    let ground: Vec<usize> = (0..base.varcount).collect();
    let vars = lifted_var_count(base.varcount, level);
    if vars > cap {
        return Err(SaError::TooLarge { vars, cap });
    }
    let keys = subsets_up_to(&ground, level + 1);
    let keyindex: HashMap<SubsetKey, usize> = keys.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();

    let mut normalized: Vec<(Vec<(usize, S)>, S)> = Vec::new();
    for row in &base.constraints {
        let negated = || (row.coeffs.iter().map(|(v, a)| (*v, -a.clone())).collect(), -row.rhs.clone());
        match row.relation {
            Relation::Le => normalized.push((row.coeffs.clone(), row.rhs.clone())),
            Relation::Ge => normalized.push(negated()),
            Relation::Eq => {
                normalized.push((row.coeffs.clone(), row.rhs.clone()));
                normalized.push(negated());
            }
        }
    }

    // Every (S, T): pick U = S ∪ T with |U| ≤ s, then split it by a bitmask.
    let mut splits: Vec<(SubsetKey, Vec<usize>)> = Vec::new();
    for u in subsets_up_to(&ground, level) {
        let vars = u.vars();
        for mask in 0u32..(1 << vars.len()) {
            let t: Vec<usize> = (0..vars.len()).filter(|b| mask & (1 << b) != 0).map(|b| vars[b]).collect();
            let s = SubsetKey::from_vars((0..vars.len()).filter(|b| mask & (1 << b) == 0).map(|b| vars[b]));
            splits.push((s, t));
        }
    }

    let mut lifted = LinearProgram::new(keys.len());
    for (coeffs, rhs) in &normalized {
        for (s, t) in &splits {
            let mut terms: Vec<(usize, S)> = Vec::new();
            for sub in 0u32..(1 << t.len()) {
                let w = s.union(&SubsetKey::from_vars((0..t.len()).filter(|b| sub & (1 << b) != 0).map(|b| t[b])));
                let sign = if sub.count_ones() % 2 == 0 { S::one() } else { -S::one() };
                for (i, a) in coeffs {
                    terms.push((keyindex[&w.with(*i)], sign.clone() * a.clone()));
                }
                if !rhs.is_zero() {
                    terms.push((keyindex[&w], -(sign * rhs.clone())));
                }
            }
            let row = Constraint::new(terms, Relation::Le, S::zero());
            if !row.coeffs.is_empty() {
                lifted.push(row);
            }
        }
    }
    lifted.push(Constraint::new([(keyindex[&SubsetKey::empty()], S::one())], Relation::Eq, S::one()));
    Ok(SaLift { level, base: base.clone(), lifted, keys, keyindex })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::LpPoint;
    use crate::Rational;

    fn q(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    #[test]
    fn var_counts() {
        assert_eq!(lifted_var_count(4, 1), 11);
        assert_eq!(lifted_var_count(4, 0), 5);
        assert_eq!(lifted_var_count(3, 5), 8);
        let base: LinearProgram<Rational> = LinearProgram::new(4);
        assert_eq!(build_sa_lift(&base, 1).unwrap().keys.len(), 11);
    }

    #[test]
    fn cap_is_enforced() {
        let base: LinearProgram<Rational> = LinearProgram::new(30);
        assert_eq!(
            build_sa_lift_with_cap(&base, 2, 1000).unwrap_err(),
            SaError::TooLarge { vars: lifted_var_count(30, 2), cap: 1000 }
        );
    }

    #[test]
    fn level_zero_is_the_base_over_singletons() {
        let mut base = LinearProgram::new(2);
        base.push(Constraint::new([(0, q(1)), (1, q(2))], Relation::Le, q(2)));
        let lift = build_sa_lift(&base, 0).unwrap();
        let e = lift.empty_index();
        let (i0, i1) = (lift.index_of(&SubsetKey::singleton(0)).unwrap(), lift.index_of(&SubsetKey::singleton(1)).unwrap());
        assert_eq!(lift.lifted.constraints.len(), 2);
        assert_eq!(
            lift.lifted.constraints[0],
            Constraint::new([(i0, q(1)), (i1, q(2)), (e, q(-2))], Relation::Le, q(0))
        );
        assert_eq!(lift.lifted.constraints[1], Constraint::new([(e, q(1))], Relation::Eq, q(1)));
    }

    #[test]
    fn upper_bound_lifts_to_pair_below_singleton() {
        // y_i ≤ 1 multiplied by y_j gives y_{ij} ≤ y_j.
        let mut base = LinearProgram::new(2);
        base.push(Constraint::new([(0, q(1))], Relation::Le, q(1)));
        let lift = build_sa_lift(&base, 1).unwrap();
        let ij = lift.index_of(&SubsetKey::from_vars([0, 1])).unwrap();
        let j = lift.index_of(&SubsetKey::singleton(1)).unwrap();
        let expected = Constraint::new([(ij, q(1)), (j, q(-1))], Relation::Le, q(0));
        assert!(lift.lifted.constraints.contains(&expected));
    }

    /// Every 0/1 point of the base program, lifted as a product, satisfies
    /// every lifted row; a 0/1 point violating the base violates the lift.
    #[test]
    fn lift_soundness_exhaustive() {
        let mut base = LinearProgram::new(3);
        base.push(Constraint::new([(0, q(1)), (1, q(1)), (2, q(1))], Relation::Eq, q(1)));
        base.push(Constraint::new([(0, q(2)), (2, q(-1))], Relation::Ge, q(0)));
        base.push(Constraint::new([(1, q(1)), (2, q(3))], Relation::Le, q(3)));
        for level in 0..=2 {
            let lift = build_sa_lift(&base, level).unwrap();
            for bits in 0u32..8 {
                let x: Vec<Rational> = (0..3).map(|i| q(((bits >> i) & 1) as i64)).collect();
                let base_ok = base.is_feasible_point(&LpPoint { values: x.clone() });
                let product: Vec<Rational> = lift
                    .keys
                    .iter()
                    .map(|k| if k.vars().iter().all(|&v| bits & (1 << v) != 0) { q(1) } else { q(0) })
                    .collect();
                assert_eq!(lift.lifted.is_feasible_point(&LpPoint { values: product }), base_ok, "level {level} bits {bits:03b}");
            }
        }
    }
}
