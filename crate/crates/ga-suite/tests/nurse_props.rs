use ga_suite::ga::seeded;
use ga_suite::nurse::direct::{adjacent_swap, apply_incentives, chain_swap, random_roster, IncentiveConfig, Neighbourhoods};
use ga_suite::nurse::eval::{adjacency_degree, cover, objective, pseudo_demand};
use ga_suite::nurse::generate::{generate_micro_instance, generate_nurse_instance, NurseGenSpec, NurseVariant};
use ga_suite::nurse::indirect::{decode, make_search_orders, DecodeSetup, DecoderKind, DecoderWeights, OrderKind};
use ga_suite::nurse::{classify_balance, evaluate, Balance, NurseInstance};
use ga_suite::operators::random_permutation;
use proptest::prelude::*;

fn variant() -> impl Strategy<Value = NurseVariant> {
    prop_oneof![Just(NurseVariant::Structured), Just(NurseVariant::Random), Just(NurseVariant::HighCost)]
}

fn instance(nurses: usize, variant: NurseVariant, seed: u64) -> NurseInstance {
    NurseInstance::build(generate_nurse_instance(&NurseGenSpec::new(nurses, variant), seed).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn evaluation_invariants(n in 6usize..30, v in variant(), seed in any::<u64>()) {
        let inst = instance(n, v, seed);
        prop_assert!(inst.costs.iter().flatten().all(|&c| c <= 100));
        let pseudo = pseudo_demand(&inst.demand);
        for k in 0..inst.demand.len() {
            prop_assert!(pseudo[k].iter().sum::<u32>() <= inst.demand[k][2]);
        }
        let mut rng = seeded(seed);
        let roster = random_roster(&inst, &mut rng);
        let c = cover(&roster, &inst);
        let (obj, viol, fit) = evaluate(&roster, &inst, 7.0).unwrap();
        prop_assert_eq!(obj, objective(&roster, &inst));
        prop_assert_eq!(viol, c.violation());
        prop_assert_eq!(viol == 0, c.shortfall.iter().flatten().all(|&s| s == 0));
        prop_assert_eq!(fit, obj as f64 + 7.0 * viol as f64);
        prop_assert_eq!(classify_balance(&roster, &inst) == Balance::Feasible, viol == 0);
    }

    #[test]
    fn adjacency_symmetric_and_zero_on_self(n in 6usize..20, seed in any::<u64>()) {
        let inst = instance(n, NurseVariant::Structured, seed);
        let pats = &inst.patterns;
        for a in pats.iter().take(40) {
            prop_assert_eq!(adjacency_degree(*a, *a).unwrap(), 0);
            for b in pats.iter().take(40) {
                prop_assert_eq!(adjacency_degree(*a, *b).ok(), adjacency_degree(*b, *a).ok());
            }
        }
    }

    #[test]
    fn swaps_stay_in_domain_and_improve(n in 6usize..30, v in variant(), seed in any::<u64>()) {
        let inst = instance(n, v, seed);
        let mut rng = seeded(seed);
        let roster = random_roster(&inst, &mut rng);
        let chained = chain_swap(&roster, &inst, 4);
        prop_assert!(inst.check_roster(&chained).is_ok());
        prop_assert!(objective(&chained, &inst) <= objective(&roster, &inst));
        let moved = adjacent_swap(&roster, &inst, &Neighbourhoods::new(&inst));
        prop_assert!(inst.check_roster(&moved).is_ok());
        prop_assert!(cover(&moved, &inst).violation() <= cover(&roster, &inst).violation());
    }

    #[test]
    fn incentives_order_balance_classes(fit in 0.0f64..500.0, w in 0.1f64..100.0) {
        let cfg = IncentiveConfig::default();
        let f = |c| apply_incentives(fit, c, w, &cfg);
        prop_assert!(f(Balance::Balanced) < f(Balance::Undecided));
        prop_assert!(f(Balance::Undecided) < f(Balance::Unbalanced));
        prop_assert_eq!(f(Balance::Feasible), fit);
    }

    #[test]
    fn decoders_are_deterministic(n in 6usize..30, seed in any::<u64>()) {
        let inst = instance(n, NurseVariant::Structured, seed);
        let mut rng = seeded(seed);
        let orders = make_search_orders(OrderKind::Biased, &inst, &mut rng);
        let setup = DecodeSetup { inst: &inst, orders: &orders, bound: Some(50.0) };
        let perm = random_permutation(inst.len(), &mut rng);
        for kind in [DecoderKind::Highest, DecoderKind::Overall, DecoderKind::Combined] {
            let a = decode(&perm, &setup, kind, &DecoderWeights::default());
            prop_assert!(inst.check_roster(&a).is_ok());
            prop_assert_eq!(a, decode(&perm, &setup, kind, &DecoderWeights::default()));
        }
    }

    #[test]
    fn zero_cover_weights_pick_cheapest(n in 6usize..30, v in variant(), seed in any::<u64>()) {
        let inst = instance(n, v, seed);
        let mut rng = seeded(seed);
        let orders = make_search_orders(OrderKind::Rand, &inst, &mut rng);
        let setup = DecodeSetup { inst: &inst, orders: &orders, bound: None };
        let perm = random_permutation(inst.len(), &mut rng);
        let w = DecoderWeights { grade: [0.0; 3], preference: 1.0 };
        for kind in [DecoderKind::Overall, DecoderKind::Combined] {
            let r = decode(&perm, &setup, kind, &w);
            for (i, &j) in r.iter().enumerate() {
                prop_assert_eq!(inst.costs[i][j], *inst.costs[i].iter().min().unwrap());
            }
        }
    }

    #[test]
    fn micro_instances_have_a_feasible_roster(seed in any::<u64>()) {
        let inst = NurseInstance::build(generate_micro_instance(seed, 8)).unwrap();
        prop_assert!((3..=4).contains(&inst.len()));
        prop_assert!(inst.options.iter().all(|o| o.len() <= 8));
        let dims = inst.domains();
        let mut idx = vec![0; dims.len()];
        let mut found = false;
        'outer: loop {
            if evaluate(&idx, &inst, 0.0).unwrap().1 == 0 {
                found = true;
                break;
            }
            let mut p = 0;
            loop {
                if p == dims.len() {
                    break 'outer;
                }
                idx[p] += 1;
                if idx[p] < dims[p] {
                    break;
                }
                idx[p] = 0;
                p += 1;
            }
        }
        prop_assert!(found);
    }
}
