mod common;

use common::{atom_pool, random_formula};
use multipath_core::dag::{generate_instance, GenerationConfig, Tier};
use multipath_core::{entails, format_formula, minimal_supports, Formula, PremiseSet};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn formulas(seed: u64, n: usize, atoms: usize) -> Vec<Formula> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool = atom_pool(atoms);
    (0..n).map(|_| random_formula(&mut rng, &pool, 3)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn adding_premises_preserves_entailment(seed in any::<u64>(), extra in 0usize..4) {
        let fs = formulas(seed, 5 + extra, 4);
        let (base, more) = fs.split_at(4);
        let goal = &more[0];
        if entails(base, goal) {
            prop_assert!(entails(base.iter().chain(&more[1..]), goal));
        }
    }

    #[test]
    fn minimal_supports_form_an_antichain(seed in any::<u64>()) {
        let mut fs = formulas(seed, 8, 4);
        let goal = fs.pop().unwrap();
        fs.sort();
        fs.dedup();
        let ps = PremiseSet::new(fs).unwrap();
        let sups = minimal_supports(&ps, &goal).unwrap();
        for (i, a) in sups.iter().enumerate() {
            let chosen: Vec<&Formula> = a.premise_ids.iter().map(|&id| ps.get(id).unwrap()).collect();
            prop_assert!(entails(chosen.iter().copied(), &goal));
            for b in &sups[i + 1..] {
                prop_assert!(!a.premise_ids.is_subset(&b.premise_ids));
                prop_assert!(!b.premise_ids.is_subset(&a.premise_ids));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn generation_is_deterministic(seed in any::<u64>(), t in 0usize..3) {
        let cfg = GenerationConfig { seed, tier: Tier::ALL[t], ..Default::default() };
        let (a, ga) = generate_instance(&cfg).unwrap();
        let (b, gb) = generate_instance(&cfg).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(ga, gb);
        let text = |d: &multipath_core::dag::LogicDag| d.formulas.values().map(format_formula).collect::<Vec<_>>();
        prop_assert_eq!(text(&a), text(&b));
    }
}
