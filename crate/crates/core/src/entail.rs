//! Entailment, satisfiability, and minimal-support enumeration.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::Formula;
use crate::sat::{sat_all, Encoder};

/// `premises ⊨ goal`. An empty premise set entails exactly the tautologies.
pub fn entails<'f, I>(premises: I, goal: &'f Formula) -> bool
where
    I: IntoIterator<Item = &'f Formula>,
{
    let mut enc = Encoder::new();
    for p in premises {
        enc.assert_true(p);
    }
    enc.assert_false(goal);
    !enc.solve()
}

pub fn satisfiable<'f, I>(formulas: I) -> bool
where
    I: IntoIterator<Item = &'f Formula>,
{
    sat_all(formulas)
}

pub type PremiseId = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EntailError {
    #[error("premise set has {premises} entries, enumeration bound is {bound}")]
    ResourceLimit { premises: usize, bound: usize },
    #[error("enumeration exceeded {0} entailment checks")]
    CheckBudget(usize),
    #[error("candidate set does not entail the goal")]
    NotEntailed,
    #[error("unknown premise id {0}")]
    UnknownPremise(PremiseId),
    #[error("duplicate premise formula at id {0}")]
    DuplicatePremise(PremiseId),
}

/// Premises numbered densely from 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PremiseSet {
    entries: Vec<Formula>,
}

impl PremiseSet {
    pub fn new(formulas: Vec<Formula>) -> Result<Self, EntailError> {
        let mut seen = BTreeSet::new();
        for (i, f) in formulas.iter().enumerate() {
            if !seen.insert(f) {
                return Err(EntailError::DuplicatePremise(i as PremiseId + 1));
            }
        }
        Ok(Self { entries: formulas })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: PremiseId) -> Option<&Formula> {
        (id as usize)
            .checked_sub(1)
            .and_then(|i| self.entries.get(i))
    }

    pub fn iter(&self) -> impl Iterator<Item = (PremiseId, &Formula)> {
        self.entries
            .iter()
            .enumerate()
            .map(|(i, f)| (i as PremiseId + 1, f))
    }

    pub fn ids(&self) -> impl Iterator<Item = PremiseId> {
        1..=self.entries.len() as PremiseId
    }

    /// Id of the premise structurally equal to `f`.
    pub fn position(&self, f: &Formula) -> Option<PremiseId> {
        self.entries
            .iter()
            .position(|e| e == f)
            .map(|i| i as PremiseId + 1)
    }

    pub fn formulas(&self) -> &[Formula] {
        &self.entries
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MinimalSupport {
    pub premise_ids: BTreeSet<PremiseId>,
}

impl MinimalSupport {
    pub fn new<I: IntoIterator<Item = PremiseId>>(ids: I) -> Self {
        Self {
            premise_ids: ids.into_iter().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.premise_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.premise_ids.is_empty()
    }

    pub fn contains(&self, id: PremiseId) -> bool {
        self.premise_ids.contains(&id)
    }
}

/// Size first, then lexicographic id order.
pub fn canonical_order(a: &MinimalSupport, b: &MinimalSupport) -> core::cmp::Ordering {
    a.len()
        .cmp(&b.len())
        .then_with(|| a.premise_ids.iter().cmp(b.premise_ids.iter()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationLimits {
    pub max_premises: usize,
    pub max_checks: usize,
}

impl Default for EnumerationLimits {
    fn default() -> Self {
        Self {
            max_premises: 30,
            max_checks: 250_000,
        }
    }
}

struct Oracle<'a> {
    premises: &'a PremiseSet,
    goal: &'a Formula,
    memo: BTreeMap<u64, bool>,
    checks: usize,
    budget: usize,
}

impl Oracle<'_> {
    fn entails(&mut self, mask: u64) -> Result<bool, EntailError> {
        if let Some(&r) = self.memo.get(&mask) {
            return Ok(r);
        }
        self.checks += 1;
        if self.checks > self.budget {
            return Err(EntailError::CheckBudget(self.budget));
        }
        let selected = self
            .premises
            .entries
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, f)| f);
        let r = entails(selected, self.goal);
        self.memo.insert(mask, r);
        Ok(r)
    }

    /// Removes members in descending id order while entailment holds.
    fn shrink(&mut self, mut mask: u64) -> Result<u64, EntailError> {
        for i in (0..self.premises.len()).rev() {
            let bit = 1u64 << i;
            if mask & bit != 0 && self.entails(mask & !bit)? {
                mask &= !bit;
            }
        }
        Ok(mask)
    }
}

fn mask_to_support(mask: u64) -> MinimalSupport {
    MinimalSupport::new(
        (0..64)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| i as PremiseId + 1),
    )
}

/// All minimal supports of `goal` within `premises`, canonically ordered.
///
/// Each round picks an untested minimal hitting set `h` of the supports found
/// so far. If the premises outside `h` still entail the goal, shrinking them
/// yields a support that is new (it misses `h`, every known support meets
/// `h`). Otherwise `h` and every superset of it are discarded. The loop ends
/// when no candidate is left, at which point every support has been found.
pub fn minimal_supports(
    premises: &PremiseSet,
    goal: &Formula,
) -> Result<Vec<MinimalSupport>, EntailError> {
    minimal_supports_with(premises, goal, EnumerationLimits::default())
}

pub fn minimal_supports_with(
    premises: &PremiseSet,
    goal: &Formula,
    limits: EnumerationLimits,
) -> Result<Vec<MinimalSupport>, EntailError> {
    let n = premises.len();
    if n > limits.max_premises || n > 63 {
        return Err(EntailError::ResourceLimit {
            premises: n,
            bound: limits.max_premises.min(63),
        });
    }
    let mut oracle = Oracle {
        premises,
        goal,
        memo: BTreeMap::new(),
        checks: 0,
        budget: limits.max_checks,
    };
    let full: u64 = if n == 0 { 0 } else { (1u64 << n) - 1 };
    if !oracle.entails(full)? {
        return Ok(Vec::new());
    }
    let first = oracle.shrink(full)?;
    let mut found = Vec::from([first]);
    let mut family: Vec<u64> = bits(first).collect();
    if first == 0 {
        // the goal is a tautology: the empty set is the only minimal support
        family.clear();
    }

    while let Some(h) = family.pop() {
        let rest = full & !h;
        if !oracle.entails(rest)? {
            continue;
        }
        let t = oracle.shrink(rest)?;
        found.push(t);

        let mut kept = Vec::with_capacity(family.len());
        let mut children = Vec::new();
        for m in family.drain(..).chain(core::iter::once(h)) {
            if m & t != 0 {
                kept.push(m);
            } else {
                children.extend(bits(t).map(|e| m | e));
            }
        }
        children.sort_unstable();
        children.dedup();
        let minimal: Vec<u64> = children
            .iter()
            .copied()
            .filter(|&c| {
                !kept.iter().any(|&k| subset(k, c))
                    && !children.iter().any(|&o| o != c && subset(o, c))
            })
            .collect();
        kept.extend(minimal);
        family = kept;
    }

    let mut out: Vec<MinimalSupport> = found.into_iter().map(mask_to_support).collect();
    out.sort_by(canonical_order);
    out.dedup();
    Ok(out)
}

fn bits(mask: u64) -> impl Iterator<Item = u64> {
    (0..64).map(|i| 1u64 << i).filter(move |b| mask & b != 0)
}

/// Reduces an entailing candidate to a minimal one by trying to drop members
/// in descending id order.
pub fn minimize_support(
    candidate_ids: &BTreeSet<PremiseId>,
    premises: &PremiseSet,
    goal: &Formula,
) -> Result<MinimalSupport, EntailError> {
    if let Some(&bad) = candidate_ids.iter().find(|&&id| premises.get(id).is_none()) {
        return Err(EntailError::UnknownPremise(bad));
    }
    let select = |ids: &BTreeSet<PremiseId>| -> Vec<&Formula> {
        ids.iter().filter_map(|&id| premises.get(id)).collect()
    };
    if !entails(select(candidate_ids), goal) {
        return Err(EntailError::NotEntailed);
    }
    let mut current = candidate_ids.clone();
    for &id in candidate_ids.iter().rev() {
        current.remove(&id);
        if !entails(select(&current), goal) {
            current.insert(id);
        }
    }
    Ok(MinimalSupport {
        premise_ids: current,
    })
}

fn subset(a: u64, b: u64) -> bool {
    a & b == a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::formula::parse_formula;
    use alloc::vec;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn escort_route_entails_entry() {
        let ps = [f("escort(emma)"), f("escort(emma) -> enter(emma)")];
        assert!(entails(ps.iter(), &f("enter(emma)")));
    }

    #[test]
    fn empty_premises() {
        assert!(!entails([], &f("p")));
        assert!(entails([], &f("p | -p")));
        assert!(satisfiable([]));
    }

    #[test]
    fn destructive_dilemma() {
        let ps = [f("p -> q"), f("r -> s"), f("-q | -s")];
        assert!(entails(ps.iter(), &f("-p | -r")));
    }

    #[test]
    fn contradictory_facts_are_unsat() {
        assert!(!satisfiable([&f("fact(x)"), &f("-fact(x)")]));
    }

    #[test]
    fn vault_supports() {
        let (ps, goal) = fixtures::vault();
        let got = minimal_supports(&ps, &goal).unwrap();
        assert_eq!(
            got,
            vec![
                MinimalSupport::new([3, 7]),
                MinimalSupport::new([1, 4, 6]),
                MinimalSupport::new([2, 5, 6]),
            ]
        );
    }

    #[test]
    fn goal_is_its_own_support() {
        let ps = PremiseSet::new(vec![f("g")]).unwrap();
        assert_eq!(
            minimal_supports(&ps, &f("g")).unwrap(),
            vec![MinimalSupport::new([1])]
        );
    }

    #[test]
    fn tautological_goal_has_empty_support() {
        let ps = PremiseSet::new(vec![f("a")]).unwrap();
        assert_eq!(
            minimal_supports(&ps, &f("b | -b")).unwrap(),
            vec![MinimalSupport::new([])]
        );
    }

    #[test]
    fn unreachable_goal_has_no_support() {
        let ps = PremiseSet::new(vec![f("a"), f("b -> c")]).unwrap();
        assert!(minimal_supports(&ps, &f("c")).unwrap().is_empty());
    }

    #[test]
    fn enumeration_bound() {
        let fs = (0..31)
            .map(|i| Formula::prop(&alloc::format!("a{i}")))
            .collect();
        let ps = PremiseSet::new(fs).unwrap();
        assert_eq!(
            minimal_supports(&ps, &f("a0")),
            Err(EntailError::ResourceLimit {
                premises: 31,
                bound: 30
            })
        );
    }

    #[test]
    fn duplicate_premises_rejected() {
        assert_eq!(
            PremiseSet::new(vec![f("a"), f("a")]),
            Err(EntailError::DuplicatePremise(2))
        );
    }

    #[test]
    fn minimize_full_vault_set() {
        let (ps, goal) = fixtures::vault();
        let all: BTreeSet<_> = ps.ids().collect();
        // descending-id removal drops the escort pair first
        assert_eq!(
            minimize_support(&all, &ps, &goal).unwrap(),
            MinimalSupport::new([1, 4, 6])
        );
    }

    #[test]
    fn minimize_redundant_citation() {
        let (ps, goal) = fixtures::vault();
        let c = BTreeSet::from([3, 7, 1]);
        assert_eq!(
            minimize_support(&c, &ps, &goal).unwrap(),
            MinimalSupport::new([3, 7])
        );
        let fixed = BTreeSet::from([2, 5, 6]);
        assert_eq!(
            minimize_support(&fixed, &ps, &goal).unwrap(),
            MinimalSupport::new([2, 5, 6])
        );
    }

    #[test]
    fn minimize_rejects_non_entailing() {
        let (ps, goal) = fixtures::vault();
        assert_eq!(
            minimize_support(&BTreeSet::from([1, 2]), &ps, &goal),
            Err(EntailError::NotEntailed)
        );
        assert_eq!(
            minimize_support(&BTreeSet::from([9]), &ps, &goal),
            Err(EntailError::UnknownPremise(9))
        );
    }
}
