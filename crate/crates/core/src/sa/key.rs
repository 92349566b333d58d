use std::fmt;

use serde::Serialize;
use smallvec::SmallVec;

/// A set of ground variables, kept sorted and duplicate-free.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize)]
pub struct SubsetKey(SmallVec<[usize; 4]>);

impl SubsetKey {
    pub fn empty() -> Self {
        SubsetKey(SmallVec::new())
    }

    pub fn singleton(v: usize) -> Self {
        SubsetKey(SmallVec::from_slice(&[v]))
    }

    pub fn from_vars(vars: impl IntoIterator<Item = usize>) -> Self {
        let mut v: SmallVec<[usize; 4]> = vars.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        SubsetKey(v)
    }

    pub fn vars(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    /// `self ∪ {v}`.
    pub fn with(&self, v: usize) -> Self {
        match self.0.binary_search(&v) {
            Ok(_) => self.clone(),
            Err(pos) => {
                let mut out = self.0.clone();
                out.insert(pos, v);
                SubsetKey(out)
            }
        }
    }

    /// `self ∖ {v}`.
    pub fn without(&self, v: usize) -> Self {
        let mut out = self.0.clone();
        if let Ok(pos) = out.binary_search(&v) {
            out.remove(pos);
        }
        SubsetKey(out)
    }

    pub fn union(&self, other: &SubsetKey) -> Self {
        SubsetKey::from_vars(self.0.iter().chain(other.0.iter()).copied())
    }
}

impl fmt::Debug for SubsetKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.iter()).finish()
    }
}

/// All subsets of `items` with at most `k` elements, by size and then
/// lexicographically. Includes the empty set.
pub fn subsets_up_to(items: &[usize], k: usize) -> Vec<SubsetKey> {
    fn rec(items: &[usize], from: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<SubsetKey>) {
        if cur.len() == size {
            out.push(SubsetKey::from_vars(cur.iter().copied()));
            return;
        }
        for i in from..items.len() {
            cur.push(items[i]);
            rec(items, i + 1, size, cur, out);
            cur.pop();
        }
    }
    let mut sorted = items.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut out = Vec::new();
    for size in 0..=k.min(sorted.len()) {
        rec(&sorted, 0, size, &mut Vec::new(), &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_algebra() {
        let k = SubsetKey::from_vars([5, 1, 3, 1]);
        assert_eq!(k.vars(), &[1, 3, 5]);
        assert_eq!(k.with(2).vars(), &[1, 2, 3, 5]);
        assert_eq!(k.with(3), k);
        assert_eq!(k.without(3).vars(), &[1, 5]);
        assert!(SubsetKey::empty().is_empty());
    }

    #[test]
    fn subset_counts() {
        let all = subsets_up_to(&[0, 1, 2, 3], 2);
        assert_eq!(all.len(), 11);
        assert_eq!(all[0], SubsetKey::empty());
        assert_eq!(all[1], SubsetKey::singleton(0));
        assert_eq!(subsets_up_to(&[7], 3).len(), 2);
    }
}
