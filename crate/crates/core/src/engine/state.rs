//! Per-path analysis state.
//!
//! Everything lives in ordered maps so that forked paths clone cheaply enough
//! and serialize deterministically. The alias component is a union-find over
//! regions: the representative of a class is its smallest region in `Ord`
//! order, and checker facts are always keyed by representative, so a fact
//! recorded through one alias is observable through every other.

use super::region::{Region, SymbolId, SymbolicValue};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// What a path has assumed about a symbol being null (for pointers) or zero
/// (for integers).
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Nullness {
    MustNull,
    MustNonNull,
    Unconstrained,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProgramState {
    /// Region contents: what each variable or memory cell currently holds.
    pub bindings: BTreeMap<Region, SymbolicValue>,
    /// Branch assumptions accumulated along this path.
    pub nullness: BTreeMap<SymbolId, Nullness>,
    /// Checker-owned facts: (map name, representative region) -> tag.
    pub checker_store: BTreeMap<(String, Region), String>,
    /// Union-find parent links; absent region = itself.
    pub alias_map: BTreeMap<Region, Region>,
}

impl ProgramState {
    pub fn new() -> ProgramState {
        ProgramState::default()
    }

    /// Representative of a region's alias class.
    pub fn representative(&self, region: &Region) -> Region {
        let mut cur = region;
        loop {
            match self.alias_map.get(cur) {
                Some(parent) => cur = parent,
                None => return cur.clone(),
            }
        }
    }

    /// Merges the alias classes of `a` and `b`. The smaller representative
    /// wins, and checker facts keyed through the losing representative are
    /// re-keyed to the winner so they stay observable through either name.
    pub fn union(&mut self, a: &Region, b: &Region) {
        let ra = self.representative(a);
        let rb = self.representative(b);
        if ra == rb {
            return;
        }
        let (winner, loser) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.alias_map.insert(loser.clone(), winner.clone());
        let moved: Vec<(String, String)> = self
            .checker_store
            .iter()
            .filter(|((_, r), _)| *r == loser)
            .map(|((m, _), tag)| (m.clone(), tag.clone()))
            .collect();
        for (map, tag) in moved {
            self.checker_store.remove(&(map.clone(), loser.clone()));
            self.checker_store.entry((map, winner.clone())).or_insert(tag);
        }
    }

    pub fn set_tag(&mut self, map: &str, region: &Region, tag: &str) {
        let rep = self.representative(region);
        self.checker_store.insert((map.to_string(), rep), tag.to_string());
    }

    pub fn tag(&self, map: &str, region: &Region) -> Option<&str> {
        let rep = self.representative(region);
        self.checker_store.get(&(map.to_string(), rep)).map(|s| s.as_str())
    }

    pub fn clear_tag(&mut self, map: &str, region: &Region) {
        let rep = self.representative(region);
        self.checker_store.remove(&(map.to_string(), rep));
    }

    /// All (region, tag) entries of one map, keyed by representative.
    pub fn tagged_regions<'a>(&'a self, map: &'a str) -> impl Iterator<Item = (&'a Region, &'a str)> {
        self.checker_store
            .iter()
            .filter(move |((m, _), _)| m == map)
            .map(|((_, r), tag)| (r, tag.as_str()))
    }

    pub fn nullness_of(&self, id: SymbolId) -> Nullness {
        self.nullness.get(&id).copied().unwrap_or(Nullness::Unconstrained)
    }

    /// Records a nullness assumption. Returns false when it contradicts what
    /// the path already assumed, i.e. the branch is infeasible.
    pub fn assume_nullness(&mut self, id: SymbolId, wanted: Nullness) -> bool {
        match (self.nullness_of(id), wanted) {
            (_, Nullness::Unconstrained) => true,
            (Nullness::Unconstrained, n) => {
                self.nullness.insert(id, n);
                true
            }
            (have, want) => have == want,
        }
    }

    /// Drops bindings for dead regions and any facts or alias links rooted in
    /// them. Symbol regions referenced by remaining bindings stay live.
    pub fn remove_bindings(&mut self, regions: &[Region]) {
        for r in regions {
            self.bindings.remove(r);
        }
    }

    pub fn bind(&mut self, region: Region, value: SymbolicValue) {
        self.bindings.insert(region, value);
    }

    pub fn value_of(&self, region: &Region) -> Option<&SymbolicValue> {
        self.bindings.get(region)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(name: &str) -> Region {
        Region::var("f", name)
    }

    #[test]
    fn test_tag_visible_through_alias_after_union() {
        let mut st = ProgramState::new();
        st.union(&var("p"), &var("q"));
        st.set_tag("PossibleNull", &var("q"), "Unchecked");
        assert_eq!(st.tag("PossibleNull", &var("p")), Some("Unchecked"));
        assert_eq!(st.tag("PossibleNull", &var("q")), Some("Unchecked"));
    }

    #[test]
    fn test_union_rekeys_existing_tags() {
        let mut st = ProgramState::new();
        let sym = Region::Sym(SymbolId(0));
        st.set_tag("BufState", &sym, "Freed");
        // Var regions sort before Sym regions is not guaranteed; the point is
        // that whichever representative wins, the fact survives the merge.
        st.union(&var("p"), &sym);
        assert_eq!(st.tag("BufState", &var("p")), Some("Freed"));
        assert_eq!(st.tag("BufState", &sym), Some("Freed"));
        assert_eq!(st.checker_store.len(), 1);
    }

    #[test]
    fn test_union_keeps_winner_tag_on_conflict() {
        let mut st = ProgramState::new();
        st.set_tag("M", &var("a"), "one");
        st.set_tag("M", &var("b"), "two");
        st.union(&var("a"), &var("b"));
        let rep = st.representative(&var("b"));
        assert_eq!(rep, var("a"));
        assert_eq!(st.tag("M", &var("b")), Some("one"));
        assert_eq!(st.checker_store.len(), 1);
    }

    #[test]
    fn test_clear_tag_through_alias() {
        let mut st = ProgramState::new();
        st.set_tag("M", &var("p"), "t");
        st.union(&var("p"), &var("q"));
        st.clear_tag("M", &var("q"));
        assert_eq!(st.tag("M", &var("p")), None);
    }

    #[test]
    fn test_assume_nullness_contradiction() {
        let mut st = ProgramState::new();
        let s = SymbolId(1);
        assert!(st.assume_nullness(s, Nullness::MustNonNull));
        assert!(st.assume_nullness(s, Nullness::MustNonNull));
        assert!(!st.assume_nullness(s, Nullness::MustNull));
        assert_eq!(st.nullness_of(s), Nullness::MustNonNull);
    }

    #[test]
    fn test_union_is_idempotent_and_acyclic() {
        let mut st = ProgramState::new();
        st.union(&var("a"), &var("b"));
        st.union(&var("b"), &var("c"));
        st.union(&var("c"), &var("a"));
        let rep = st.representative(&var("a"));
        assert_eq!(st.representative(&var("b")), rep);
        assert_eq!(st.representative(&var("c")), rep);
    }
}
