//! Backward construction: a chain grown from the goal, then branches grown
//! from intermediate conclusions until the solution count lands in the tier
//! band.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    derive_ground_truth, DagError, GenerationConfig, GenerationTrace, GroundTruth, InferenceNode,
    LogicDag, NodeId, ShareEvent,
};
use crate::entail::{entails, minimal_supports, satisfiable, MinimalSupport};
use crate::forms::{Bindings, FormKind};
use crate::formula::{Atom, Formula};

/// Per-instance seed derived from a corpus seed and instance index.
pub fn instance_seed(master: u64, index: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(master ^ mix(index))
}

fn applicable(f: &Formula, kind: FormKind) -> bool {
    match kind {
        FormKind::ModusPonens
        | FormKind::DisjunctiveSyllogism
        | FormKind::DisjunctionElimination => true,
        FormKind::ModusTollens | FormKind::ReductioAdAbsurdum => matches!(f, Formula::Not(_)),
        FormKind::HypotheticalSyllogism => matches!(f, Formula::Implies(..)),
        FormKind::ConstructiveDilemma => matches!(f, Formula::Or(..)),
    }
}

fn sample_form<R: Rng + ?Sized>(
    cfg: &GenerationConfig,
    f: &Formula,
    rng: &mut R,
) -> Option<FormKind> {
    let options: Vec<(FormKind, u32)> = FormKind::ALL
        .into_iter()
        .filter(|&k| applicable(f, k))
        .map(|k| (k, cfg.weight(k)))
        .filter(|&(_, w)| w > 0)
        .collect();
    let total: u32 = options.iter().map(|(_, w)| w).sum();
    if total == 0 {
        return None;
    }
    let mut pick = rng.random_range(0..total);
    for (k, w) in options {
        if pick < w {
            return Some(k);
        }
        pick -= w;
    }
    None
}

struct Expansion {
    fresh: Vec<NodeId>,
}

fn next_atom_index(dag: &LogicDag) -> usize {
    dag.trace.minted_by.len() + 2
}

/// Grows one inference node deriving `node`. With `share` set, an existing
/// node may be reused as one premise when it fits the form's schema.
fn expand<R: Rng + ?Sized>(
    dag: &mut LogicDag,
    rng: &mut R,
    node: NodeId,
    share: bool,
) -> Option<Expansion> {
    let phi = dag.formula(node).clone();
    let kind = sample_form(&dag.config, &phi, rng)?;
    let form = kind.form();
    let mut base = Bindings::new();
    if !form.conclusion.match_formula(&phi, &mut base) {
        return None;
    }

    let existing: BTreeMap<&Formula, NodeId> = dag.formulas.iter().map(|(&k, v)| (v, k)).collect();
    let build = |bindings: &Bindings, shared: Option<(usize, NodeId)>, next: usize| {
        let mut b = bindings.clone();
        let mut minted = Vec::new();
        let mut idx = next;
        for m in form.metas() {
            if let alloc::collections::btree_map::Entry::Vacant(e) = b.entry(m) {
                let atom = Atom::prop(&format!("a{idx}"));
                idx += 1;
                e.insert(Formula::Atom(atom.clone()));
                minted.push(atom);
            }
        }
        let (premises, concl) = form.instantiate(&b).ok()?;
        debug_assert_eq!(concl, phi);
        let distinct: BTreeSet<&Formula> = premises.iter().collect();
        if distinct.len() != premises.len() || distinct.contains(&phi) {
            return None;
        }
        for (i, p) in premises.iter().enumerate() {
            if shared.is_some_and(|(slot, _)| slot == i) {
                continue;
            }
            if existing.contains_key(p) {
                return None;
            }
        }
        Some((premises, minted))
    };

    let next = next_atom_index(dag);
    let mut chosen = None;
    if share && rng.random_bool(dag.config.share_probability) {
        let mut blocked = dag.downstream(node);
        blocked.insert(node);
        let mut slots: Vec<usize> = (0..form.premises.len()).collect();
        slots.shuffle(rng);
        let mut candidates: Vec<NodeId> = dag
            .formulas
            .keys()
            .copied()
            .filter(|n| !blocked.contains(n))
            .collect();
        candidates.shuffle(rng);
        'search: for &slot in &slots {
            for &cand in &candidates {
                let mut b = base.clone();
                if !form.premises[slot].match_formula(dag.formula(cand), &mut b) {
                    continue;
                }
                if let Some(built) = build(&b, Some((slot, cand)), next) {
                    chosen = Some((built, Some((slot, cand))));
                    break 'search;
                }
            }
        }
    }
    let ((premises, minted), shared) = match chosen {
        Some(c) => c,
        None => (build(&base, None, next)?, None),
    };

    let inf_id = dag.inferences.len() as u32 + 1;
    let mut next_node = dag.formulas.keys().next_back().copied().unwrap_or(0) + 1;
    let mut premise_ids = Vec::with_capacity(premises.len());
    let mut fresh = Vec::new();
    for (i, p) in premises.into_iter().enumerate() {
        if let Some((slot, n)) = shared {
            if slot == i {
                premise_ids.push(n);
                continue;
            }
        }
        let id = next_node;
        next_node += 1;
        dag.formulas.insert(id, p);
        dag.trace.origin.insert(id, inf_id);
        dag.premise_order.push(id);
        premise_ids.push(id);
        fresh.push(id);
    }
    for atom in minted {
        dag.trace.minted_by.insert(atom, inf_id);
    }
    if let Some((_, n)) = shared {
        dag.trace.shares.push(ShareEvent {
            inference: inf_id,
            node: n,
        });
    }
    dag.premise_order.retain(|&n| n != node);
    dag.inferences.push(InferenceNode {
        id: inf_id,
        form: kind,
        premises: premise_ids,
        conclusion: node,
    });
    Some(Expansion { fresh })
}

fn grow_chain<R: Rng + ?Sized>(
    dag: &mut LogicDag,
    rng: &mut R,
    start: NodeId,
    depth: u32,
    share: bool,
) -> bool {
    let mut frontier = start;
    for _ in 0..depth {
        let Some(e) = expand(dag, rng, frontier, share) else {
            return false;
        };
        frontier = e.fresh[rng.random_range(0..e.fresh.len())];
    }
    true
}

/// A single backward chain from a fresh goal atom, with a sampled depth.
pub fn generate_chain<R: Rng + ?Sized>(config: &GenerationConfig, rng: &mut R) -> LogicDag {
    let depth = rng.random_range(config.depth_range.min..=config.depth_range.max);
    let mut dag = LogicDag {
        formulas: BTreeMap::from([(1, Formula::prop("a1"))]),
        premise_order: Vec::from([1]),
        goal: 1,
        inferences: Vec::new(),
        seed: config.seed,
        config: config.clone(),
        trace: GenerationTrace::default(),
    };
    // atomic nodes always admit MP, DS or DE, and later frontiers are fresh
    let grown = grow_chain(&mut dag, rng, 1, depth, false);
    debug_assert!(grown, "validated config always extends a chain");
    dag
}

fn supports_agree(dag: &LogicDag, gt: &GroundTruth) -> Result<bool, DagError> {
    let premises = dag.premise_set()?;
    let oracle = minimal_supports(&premises, dag.goal_formula())?;
    let built: Vec<MinimalSupport> = gt.solutions.iter().map(|s| s.support.clone()).collect();
    Ok(oracle == built)
}

/// No member of any tracked support is redundant.
fn supports_minimal(dag: &LogicDag, gt: &GroundTruth) -> bool {
    let goal = dag.goal_formula();
    gt.solutions.iter().all(|s| {
        s.support.premise_ids.iter().all(|&drop| {
            let rest = s.support.premise_ids.iter().filter(|&&p| p != drop);
            !entails(
                rest.filter_map(|&p| dag.premise_node(p))
                    .map(|n| dag.formula(n)),
                goal,
            )
        })
    })
}

fn leaves_consistent(dag: &LogicDag) -> bool {
    satisfiable(dag.premise_order.iter().map(|n| dag.formula(*n)))
}

/// Grows a sub-chain upward from a uniformly chosen derived node. The result
/// is accepted only when its leaves are consistent, its reuse ratio stays in
/// bounds, and (for small enough DAGs) the structural solutions coincide with
/// the enumerated minimal supports.
pub fn add_branch<R: Rng + ?Sized>(dag: &LogicDag, rng: &mut R) -> Result<LogicDag, DagError> {
    if dag.inferences.is_empty() {
        return Err(DagError::NoInference);
    }
    let cfg = &dag.config;
    let leaves = dag.leaves();
    let targets: Vec<NodeId> = dag
        .formulas
        .keys()
        .copied()
        .filter(|n| !leaves.contains(n))
        .collect();
    for _ in 0..cfg.max_branch_attempts {
        let mut cand = dag.clone();
        let target = targets[rng.random_range(0..targets.len())];
        let depth = rng.random_range(cfg.branch_depth_range.min..=cfg.branch_depth_range.max);
        if !grow_chain(&mut cand, rng, target, depth, true) {
            continue;
        }
        if !leaves_consistent(&cand) {
            continue;
        }
        let Ok(gt) = derive_ground_truth(&cand) else {
            continue;
        };
        if gt.stats.reuse_ratio.value() > cfg.max_reuse_ratio {
            continue;
        }
        if cand.premise_order.len() <= cfg.oracle_premise_limit {
            if !supports_agree(&cand, &gt)? {
                continue;
            }
        } else if !supports_minimal(&cand, &gt) {
            continue;
        }
        return Ok(cand);
    }
    Err(DagError::BranchRejected(cfg.max_branch_attempts))
}

/// Chain plus branches until the solution count falls in the tier band, with
/// premises shuffled into presentation order. Deterministic in the config.
pub fn generate_instance(config: &GenerationConfig) -> Result<(LogicDag, GroundTruth), DagError> {
    config.validate().map_err(DagError::Config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let (lo, hi) = config.band();
    for _ in 0..config.max_instance_attempts {
        let target = rng.random_range(lo..=hi) as usize;
        let mut dag = generate_chain(config, &mut rng);
        let mut n = 1;
        while n < target {
            match add_branch(&dag, &mut rng) {
                Ok(d) => {
                    dag = d;
                    n = derive_ground_truth(&dag)?.n_paths();
                }
                Err(DagError::BranchRejected(_)) => break,
                Err(e) => return Err(e),
            }
        }
        if n < lo as usize || n > hi as usize {
            continue;
        }
        dag.premise_order.shuffle(&mut rng);
        if !leaves_consistent(&dag) {
            continue;
        }
        dag.check_invariants()?;
        let gt = derive_ground_truth(&dag)?;
        let sound = if dag.premise_order.len() <= config.oracle_premise_limit {
            supports_agree(&dag, &gt)?
        } else {
            supports_minimal(&dag, &gt)
        };
        if !sound {
            continue;
        }
        return Ok((dag, gt));
    }
    Err(DagError::TierUnreachable(
        config.tier,
        config.max_instance_attempts,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dag::{DepthRange, Tier};
    use crate::formula::parse_formula;

    fn mp_only(depth: u32) -> GenerationConfig {
        GenerationConfig {
            depth_range: DepthRange::new(depth, depth),
            form_weights: BTreeMap::from([(FormKind::ModusPonens, 1)]),
            ..GenerationConfig::default()
        }
    }

    #[test]
    fn depth_one_modus_ponens_chain() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let dag = generate_chain(&mp_only(1), &mut rng);
        assert_eq!(dag.inferences.len(), 1);
        let leaves: BTreeSet<Formula> = dag
            .premise_order
            .iter()
            .map(|n| dag.formula(*n).clone())
            .collect();
        let expected: BTreeSet<Formula> = [
            parse_formula("a2").unwrap(),
            parse_formula("a2 -> a1").unwrap(),
        ]
        .into();
        assert_eq!(leaves, expected);
        assert_eq!(dag.goal_formula(), &Formula::prop("a1"));
        dag.check_invariants().unwrap();
    }

    #[test]
    fn chain_has_a_single_solution() {
        for seed in 0..40 {
            let cfg = GenerationConfig {
                seed,
                depth_range: DepthRange::new(6, 6),
                ..Default::default()
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let dag = generate_chain(&cfg, &mut rng);
            dag.check_invariants().unwrap();
            assert_eq!(dag.inferences.len(), 6);
            let gt = derive_ground_truth(&dag).unwrap();
            assert_eq!(gt.n_paths(), 1);
            assert_eq!(gt.solutions[0].length, 6);
            let all: BTreeSet<u32> = dag.premise_set().unwrap().ids().collect();
            assert_eq!(gt.solutions[0].support.premise_ids, all);
            if dag.premise_order.len() <= 20 {
                let oracle =
                    minimal_supports(&dag.premise_set().unwrap(), dag.goal_formula()).unwrap();
                assert_eq!(oracle.len(), 1);
                assert_eq!(oracle[0].premise_ids, all);
            }
        }
    }

    #[test]
    fn one_branch_gives_two_solutions() {
        let cfg = GenerationConfig {
            share_probability: 0.0,
            ..GenerationConfig::default()
        };
        let mut hits = 0;
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let chain = generate_chain(
                &GenerationConfig {
                    seed,
                    ..cfg.clone()
                },
                &mut rng,
            );
            let dag = add_branch(&chain, &mut rng).unwrap();
            dag.check_invariants().unwrap();
            let n = derive_ground_truth(&dag).unwrap().n_paths();
            if n == 2 {
                hits += 1;
            }
        }
        assert_eq!(hits, 20);
    }

    #[test]
    fn branch_needs_an_inference() {
        let cfg = GenerationConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut dag = generate_chain(&cfg, &mut rng);
        dag.inferences.clear();
        assert_eq!(add_branch(&dag, &mut rng), Err(DagError::NoInference));
    }

    #[test]
    fn instance_lands_in_band_and_is_deterministic() {
        for tier in Tier::ALL {
            let cfg = GenerationConfig {
                seed: 42,
                tier,
                ..Default::default()
            };
            let (dag, gt) = generate_instance(&cfg).unwrap();
            let (lo, hi) = cfg.band();
            assert!(
                (lo as usize..=hi as usize).contains(&gt.n_paths()),
                "{tier}: {}",
                gt.n_paths()
            );
            assert!(dag.fresh_atom_violations().is_empty());
            let (dag2, gt2) = generate_instance(&cfg).unwrap();
            assert_eq!(dag, dag2);
            assert_eq!(gt, gt2);
        }
    }

    #[test]
    fn instance_seeds_differ() {
        assert_ne!(instance_seed(1, 0), instance_seed(1, 1));
        assert_ne!(instance_seed(1, 0), instance_seed(2, 0));
        assert_eq!(instance_seed(9, 9), instance_seed(9, 9));
    }
}
