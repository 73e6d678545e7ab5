use ga_suite::ga::{seeded, RankSelector};
use ga_suite::operators::{
    c1_crossover, is_permutation, order_based_crossover, param_uniform_crossover, pmx_crossover, pux_crossover,
    random_permutation, random_segment, scramble_mutation, single_gene_mutation, swap_mutation,
};
use ga_suite::penalty::{PenaltySpec, PenaltyState};
use proptest::prelude::*;

fn two_perms(max: usize) -> impl Strategy<Value = (Vec<usize>, Vec<usize>, u64)> {
    (2..max, any::<u64>()).prop_map(|(n, seed)| {
        let mut rng = seeded(seed);
        (random_permutation(n, &mut rng), random_permutation(n, &mut rng), seed)
    })
}

proptest! {
    #[test]
    fn segment_crossovers_keep_segments((p1, p2, seed) in two_perms(30)) {
        let mut rng = seeded(seed);
        let (c1, c2) = random_segment(p1.len(), &mut rng);
        let (a, b) = order_based_crossover(&p1, &p2, c1, c2).unwrap();
        prop_assert!(is_permutation(&a) && is_permutation(&b));
        prop_assert_eq!(&a[c1..c2], &p1[c1..c2]);
        prop_assert_eq!(&b[c1..c2], &p2[c1..c2]);
        let (a, b) = pmx_crossover(&p1, &p2, c1, c2).unwrap();
        prop_assert!(is_permutation(&a) && is_permutation(&b));
        prop_assert_eq!(&a[c1..c2], &p2[c1..c2]);
        prop_assert_eq!(&b[c1..c2], &p1[c1..c2]);
    }

    #[test]
    fn c1_keeps_head((p1, p2, seed) in two_perms(30)) {
        let cut = 1 + (seed as usize) % (p1.len() - 1);
        let (a, b) = c1_crossover(&p1, &p2, cut).unwrap();
        prop_assert!(is_permutation(&a) && is_permutation(&b));
        prop_assert_eq!(&a[..cut], &p1[..cut]);
        prop_assert_eq!(&b[..cut], &p2[..cut]);
    }

    #[test]
    fn pux_is_valid((p1, p2, seed) in two_perms(30), p in 0.5f64..=1.0) {
        let mut rng = seeded(seed);
        let (a, b) = pux_crossover(&p1, &p2, p, &mut rng).unwrap();
        prop_assert!(is_permutation(&a) && is_permutation(&b));
    }

    #[test]
    fn perm_mutations_stay_valid((p1, _p2, seed) in two_perms(40), rate in 0.0f64..=1.0) {
        let mut rng = seeded(seed);
        let mut p = p1.clone();
        swap_mutation(&mut p, rate, &mut rng);
        prop_assert!(is_permutation(&p));
        scramble_mutation(&mut p, rate, &mut rng);
        prop_assert!(is_permutation(&p));
    }

    #[test]
    fn value_operators_stay_in_domain(
        domains in prop::collection::vec(1usize..8, 1..20),
        seed in any::<u64>(),
        rate in 0.0f64..=1.0,
        p in 0.5f64..=1.0,
    ) {
        let mut rng = seeded(seed);
        let mut parents: Vec<Vec<usize>> = (0..3)
            .map(|_| domains.iter().map(|&d| rand::Rng::gen_range(&mut rng, 0..d)).collect())
            .collect();
        let refs: Vec<&[usize]> = parents.iter().map(|v| v.as_slice()).collect();
        let child = param_uniform_crossover(&refs, p, &mut rng).unwrap();
        for (i, &g) in child.iter().enumerate() {
            prop_assert!(parents.iter().any(|par| par[i] == g));
        }
        single_gene_mutation(&mut parents[0], rate, &domains, &mut rng).unwrap();
        prop_assert!(parents[0].iter().zip(&domains).all(|(&g, &d)| g < d));
    }

    #[test]
    fn rank_probabilities_decrease(n in 1usize..200) {
        let sel = RankSelector::new(n).unwrap();
        let total: f64 = (0..n).map(|i| sel.probability(i)).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
        for i in 1..n {
            prop_assert!(sel.probability(i) < sel.probability(i - 1));
        }
    }

    #[test]
    fn penalty_weight_never_zero(
        feas in prop::option::of(0.0f64..1000.0),
        overall in 0.0f64..1000.0,
        q in 0.0f64..50.0,
        steps in 1usize..20,
    ) {
        for spec in [PenaltySpec::smith(), PenaltySpec::reverse_hadj(), PenaltySpec::hadj(), PenaltySpec::dual()] {
            let mut s = PenaltyState::new(spec);
            for _ in 0..steps {
                s.observe(feas.map(|f| f.max(overall)), overall, q);
                prop_assert!(s.update_weight() > 0.0);
            }
        }
    }

    #[test]
    fn smith_rises_as_overall_best_improves(gap in 1.0f64..100.0, drop in 0.5f64..20.0) {
        let mut s = PenaltyState::new(PenaltySpec::smith());
        s.observe(Some(100.0 + gap), 100.0, 1.0);
        let w1 = s.update_weight();
        s.observe(None, 100.0 - drop, 1.0);
        prop_assert!(s.update_weight() > w1);
    }
}
