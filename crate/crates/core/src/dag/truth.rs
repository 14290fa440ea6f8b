use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use super::{DagError, InferenceId, LogicDag, NodeId};
use crate::entail::{canonical_order, entails, MinimalSupport};

/// Cap on proof subgraphs explored per DAG.
const MAX_PROOFS: usize = 200_000;

/// Exact non-negative rational.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    pub fn new(num: u64, den: u64) -> Self {
        let g = gcd(num, den).max(1);
        Self {
            num: num / g,
            den: den / g,
        }
    }

    pub fn value(self) -> f64 {
        if self.den == 0 {
            0.0
        } else {
            self.num as f64 / self.den as f64
        }
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Solution {
    /// 1-based position in the canonical order.
    pub id: u32,
    pub support: MinimalSupport,
    pub inference_ids: BTreeSet<InferenceId>,
    pub length: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DagStats {
    /// Mean solution length.
    pub depth: f64,
    pub n_paths: usize,
    pub reuse_ratio: Ratio,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub solutions: Vec<Solution>,
    /// Partition of solution ids into groups connected by shared inferences.
    pub families: Vec<Vec<u32>>,
    pub stats: DagStats,
}

impl GroundTruth {
    pub fn n_paths(&self) -> usize {
        self.solutions.len()
    }

    pub fn min_length(&self) -> usize {
        self.solutions.iter().map(|s| s.length).min().unwrap_or(0)
    }

    pub fn solution(&self, id: u32) -> Option<&Solution> {
        (id as usize)
            .checked_sub(1)
            .and_then(|i| self.solutions.get(i))
    }

    /// Index into `families` of the family holding solution `id`.
    pub fn family_of(&self, id: u32) -> Option<usize> {
        self.families.iter().position(|f| f.contains(&id))
    }
}

struct ProofWalk<'d> {
    dag: &'d LogicDag,
    found: Vec<BTreeMap<NodeId, InferenceId>>,
}

impl ProofWalk<'_> {
    fn walk(
        &mut self,
        mut pending: Vec<NodeId>,
        choice: &mut BTreeMap<NodeId, InferenceId>,
    ) -> Result<(), DagError> {
        while let Some(node) = pending.pop() {
            if choice.contains_key(&node) {
                continue;
            }
            let derivs: Vec<_> = self.dag.derivations(node).collect();
            if derivs.is_empty() {
                continue;
            }
            for d in derivs {
                choice.insert(node, d.id);
                let mut next = pending.clone();
                next.extend(d.premises.iter().copied());
                self.walk(next, choice)?;
                choice.remove(&node);
            }
            return Ok(());
        }
        if self.found.len() >= MAX_PROOFS {
            return Err(DagError::TooManyProofs(MAX_PROOFS));
        }
        self.found.push(choice.clone());
        Ok(())
    }
}

/// Leaf nodes reached from the goal under a fixed derivation choice.
fn proof_leaves(dag: &LogicDag, choice: &BTreeMap<NodeId, InferenceId>) -> BTreeSet<NodeId> {
    let mut leaves = BTreeSet::new();
    let mut seen = BTreeSet::new();
    let mut stack = Vec::from([dag.goal]);
    while let Some(n) = stack.pop() {
        if !seen.insert(n) {
            continue;
        }
        match choice.get(&n) {
            Some(&inf) => stack.extend(dag.inference(inf).premises.iter().copied()),
            None => {
                leaves.insert(n);
            }
        }
    }
    leaves
}

/// Enumerates proof subgraphs (one derivation per reached node), keeps the
/// shortest subgraph per leaf set, drops leaf sets that strictly contain
/// another, and checks that every remaining support entails the goal.
pub fn derive_ground_truth(dag: &LogicDag) -> Result<GroundTruth, DagError> {
    if dag.inferences.is_empty() {
        return Err(DagError::NoInference);
    }
    let mut walk = ProofWalk {
        dag,
        found: Vec::new(),
    };
    walk.walk(Vec::from([dag.goal]), &mut BTreeMap::new())?;

    let mut best: BTreeMap<MinimalSupport, BTreeSet<InferenceId>> = BTreeMap::new();
    for choice in &walk.found {
        // choices made for nodes that ended up unreachable are irrelevant
        let used: BTreeSet<InferenceId> = reachable_inferences(dag, choice);
        let leaves = proof_leaves(dag, choice);
        let ids = leaves
            .iter()
            .map(|&n| dag.premise_id(n).ok_or(DagError::Underived(n)));
        let support = MinimalSupport::new(ids.collect::<Result<Vec<_>, _>>()?);
        match best.get(&support) {
            Some(prev) if prev.len() <= used.len() => {}
            _ => {
                best.insert(support, used);
            }
        }
    }
    let supports: Vec<&MinimalSupport> = best.keys().collect();
    let mut kept: Vec<(MinimalSupport, BTreeSet<InferenceId>)> = best
        .iter()
        .filter(|(s, _)| {
            !supports
                .iter()
                .any(|o| o.len() < s.len() && o.premise_ids.is_subset(&s.premise_ids))
        })
        .map(|(s, i)| (s.clone(), i.clone()))
        .collect();
    kept.sort_by(|a, b| canonical_order(&a.0, &b.0));

    let goal = dag.goal_formula();
    let mut solutions = Vec::with_capacity(kept.len());
    for (i, (support, inference_ids)) in kept.into_iter().enumerate() {
        let fs = support
            .premise_ids
            .iter()
            .map(|&p| dag.formula(dag.premise_node(p).expect("support id")));
        if !entails(fs, goal) {
            return Err(DagError::Inconsistent(i + 1));
        }
        let length = inference_ids.len();
        solutions.push(Solution {
            id: i as u32 + 1,
            support,
            inference_ids,
            length,
        });
    }
    let families = families(&solutions);
    let mut gt = GroundTruth {
        solutions,
        families,
        stats: DagStats {
            depth: 0.0,
            n_paths: 0,
            reuse_ratio: Ratio::new(0, 1),
        },
    };
    gt.stats = dag_stats(dag, &gt);
    Ok(gt)
}

fn reachable_inferences(
    dag: &LogicDag,
    choice: &BTreeMap<NodeId, InferenceId>,
) -> BTreeSet<InferenceId> {
    let mut out = BTreeSet::new();
    let mut stack = Vec::from([dag.goal]);
    while let Some(n) = stack.pop() {
        if let Some(&inf) = choice.get(&n) {
            if out.insert(inf) {
                stack.extend(dag.inference(inf).premises.iter().copied());
            }
        }
    }
    out
}

fn families(solutions: &[Solution]) -> Vec<Vec<u32>> {
    let n = solutions.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if !solutions[i]
                .inference_ids
                .is_disjoint(&solutions[j].inference_ids)
            {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<u32>> = BTreeMap::new();
    for (i, s) in solutions.iter().enumerate() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(s.id);
    }
    groups.into_values().collect()
}

/// Depth (mean length), path count and reuse ratio of a ground truth.
pub fn dag_stats(_dag: &LogicDag, gt: &GroundTruth) -> DagStats {
    let n = gt.solutions.len();
    let total: usize = gt.solutions.iter().map(|s| s.length).sum();
    let distinct: BTreeSet<InferenceId> = gt
        .solutions
        .iter()
        .flat_map(|s| s.inference_ids.iter().copied())
        .collect();
    DagStats {
        depth: if n == 0 { 0.0 } else { total as f64 / n as f64 },
        n_paths: n,
        reuse_ratio: Ratio::new(total as u64, distinct.len() as u64),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use alloc::vec;

    #[test]
    fn vault_ground_truth() {
        let dag = fixtures::vault_dag();
        let gt = derive_ground_truth(&dag).unwrap();
        let supports: Vec<Vec<u32>> = gt
            .solutions
            .iter()
            .map(|s| s.support.premise_ids.iter().copied().collect())
            .collect();
        assert_eq!(supports, [vec![3, 7], vec![1, 4, 6], vec![2, 5, 6]]);
        assert_eq!(gt.families, [vec![1], vec![2, 3]]);
        assert_eq!(gt.stats.n_paths, 3);
        assert_eq!(gt.stats.reuse_ratio, Ratio::new(5, 4));
        assert!(gt.stats.reuse_ratio.value() > 1.0);
        assert!((gt.stats.depth - 5.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn ratio_reduces() {
        assert_eq!(Ratio::new(6, 4), Ratio { num: 3, den: 2 });
        assert_eq!(Ratio::new(3, 3).value(), 1.0);
    }
}
