#![allow(dead_code)]

use std::collections::BTreeMap;

use multipath_core::{Atom, Formula};
use rand::Rng;

pub fn atom_pool(n: usize) -> Vec<Atom> {
    (0..n).map(|i| Atom::prop(&format!("a{i}"))).collect()
}

/// Random formula of depth at most `depth` over `atoms`.
pub fn random_formula<R: Rng>(rng: &mut R, atoms: &[Atom], depth: u32) -> Formula {
    if depth == 0 || rng.random_bool(0.25) {
        return Formula::Atom(atoms[rng.random_range(0..atoms.len())].clone());
    }
    let sub = |rng: &mut R| Box::new(random_formula(rng, atoms, depth - 1));
    match rng.random_range(0..4) {
        0 => Formula::Not(sub(rng)),
        1 => Formula::And(sub(rng), sub(rng)),
        2 => Formula::Or(sub(rng), sub(rng)),
        _ => Formula::Implies(sub(rng), sub(rng)),
    }
}

pub fn valuations(atoms: &[Atom]) -> impl Iterator<Item = BTreeMap<Atom, bool>> + '_ {
    (0u64..1 << atoms.len()).map(move |bits| {
        atoms
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), bits >> i & 1 == 1))
            .collect()
    })
}

/// Entailment by enumerating every valuation of the atoms involved.
pub fn tt_entails(premises: &[&Formula], goal: &Formula) -> bool {
    let mut atoms = goal.atoms();
    for p in premises {
        atoms.extend(p.atoms());
    }
    let atoms: Vec<Atom> = atoms.into_iter().collect();
    let ok = valuations(&atoms).all(|v| {
        let val = |a: &Atom| v[a];
        !premises.iter().all(|p| p.eval(val)) || goal.eval(val)
    });
    ok
}

/// Minimal supports by brute force over the power set, as sorted 1-based
/// id lists. Uses truth tables only.
pub fn power_set_supports(premises: &[Formula], goal: &Formula) -> Vec<Vec<u32>> {
    let n = premises.len();
    assert!(n <= 20);
    let mut atoms = goal.atoms();
    for p in premises {
        atoms.extend(p.atoms());
    }
    let atoms: Vec<Atom> = atoms.into_iter().collect();
    // premise masks satisfied by a countermodel of the goal
    let mut counter: Vec<u32> = valuations(&atoms)
        .filter_map(|v| {
            let val = |a: &Atom| v[a];
            (!goal.eval(val)).then(|| {
                premises
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| p.eval(val))
                    .fold(0u32, |m, (i, _)| m | 1 << i)
            })
        })
        .collect();
    counter.sort_unstable();
    counter.dedup();
    let entails = |s: u32| !counter.iter().any(|&m| s & m == s);
    let mut out: Vec<Vec<u32>> = (0u32..1 << n)
        .filter(|&s| entails(s) && (0..n).all(|i| s >> i & 1 == 0 || !entails(s & !(1 << i))))
        .map(|s| {
            (0..n as u32)
                .filter(|i| s >> i & 1 == 1)
                .map(|i| i + 1)
                .collect()
        })
        .collect();
    out.sort();
    out
}
