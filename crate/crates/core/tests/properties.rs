use multipeak::instances::{
    build_welfare_instance, communication_params, normalized_profile_from_allocation,
    AuctionInstance,
};
use multipeak::rational::{int, ratio};
use multipeak::set_systems::{
    collection_from_disjointness, generate_partition_family, make_disjointness, CollectionMode,
    DisjointnessCase, DisjointnessInstance, PartitionFamily,
};
use multipeak::solvers::{
    brute_force_welfare, demand_query, exhaustive_demand_from_table, lemma43_grid_opt,
    lemma43_structured_opt, PriceVector,
};
use multipeak::verify::{check_monotone, check_submodular, check_uniqueness, value_table, CheckOptions};
use multipeak::{ItemSet, MultiPeakValuation, PeakFamily, Rational};
use proptest::prelude::*;

fn valuation_strategy() -> impl Strategy<Value = MultiPeakValuation> {
    (6usize..=10)
        .prop_flat_map(|m| {
            let peak = proptest::collection::btree_set(0..m, 1..=m / 2 + 1);
            (
                Just(m),
                proptest::collection::vec(peak, 0..4),
                0i64..3,
                1i64..=2 * m as i64,
                1i64..=3,
            )
        })
        .prop_filter_map("not b-intersecting", |(m, peaks, b, den, num)| {
            let sets = peaks
                .into_iter()
                .map(|p| ItemSet::from_indices(m, p).unwrap())
                .collect::<Vec<_>>();
            let family = PeakFamily::new(sets, int(b)).ok()?;
            MultiPeakValuation::new(m, family, ratio(num, den), None).ok()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn valuations_are_monotone_submodular_and_unambiguous(v in valuation_strategy()) {
        let opts = CheckOptions::default();
        prop_assert!(check_monotone(&v, &opts).pass());
        prop_assert!(check_submodular(&v, &opts).pass());
        prop_assert!(check_uniqueness(&v, &opts).pass());
    }

    #[test]
    fn demand_oracle_matches_enumeration(
        v in valuation_strategy(),
        raw in proptest::collection::vec(0i64..25, 10),
        den in 1i64..40,
    ) {
        let m = v.m();
        let prices: Vec<Rational> = raw[..m].iter().map(|&p| ratio(p, den * 4)).collect();
        let p = PriceVector::new(prices).unwrap();
        let fast = demand_query(&v, &p).unwrap();
        let slow = exhaustive_demand_from_table(&value_table(&v), m, &p).unwrap();
        prop_assert_eq!(fast.utility, slow.utility);
        prop_assert_eq!(fast.value - fast.price, fast.utility);
    }

    #[test]
    fn structured_optimum_dominates_grid(alpha in 0.2f64..1.5, beta in 0.0f64..1.2, eps in 0.0f64..0.3) {
        let structured = lemma43_structured_opt(2, alpha, beta, eps).unwrap();
        let grid = lemma43_grid_opt(2, alpha, beta, eps, 1.0 / 50.0);
        prop_assert!(grid <= structured.value + 1e-9, "grid {} > structured {}", grid, structured.value);
        prop_assert!(structured.profile.check.feasible);
    }

    #[test]
    fn generated_documents_roundtrip(k in 2usize..4, s in 1usize..6, t in 0usize..5, seed in any::<u64>()) {
        let fam = generate_partition_family(k, s, t, ratio(1, 2), seed).unwrap();
        let text = serde_json::to_string(&fam).unwrap();
        prop_assert_eq!(serde_json::from_str::<PartitionFamily>(&text).unwrap(), fam.clone());
        prop_assert_eq!(generate_partition_family(k, s, t, ratio(1, 2), seed).unwrap(), fam);
        if t >= k {
            let inst = make_disjointness(k, t, DisjointnessCase::No, 1, seed).unwrap();
            prop_assert_eq!(inst.classify(), DisjointnessCase::No);
            let text = serde_json::to_string(&inst).unwrap();
            prop_assert_eq!(serde_json::from_str::<DisjointnessInstance>(&text).unwrap(), inst);
        }
    }
}

#[test]
fn welfare_pipeline_roundtrips_and_profiles_are_feasible() {
    let fam = generate_partition_family(2, 3, 2, int(0), 9).unwrap();
    let eps = multipeak::set_systems::verify_pairwise(&fam).effective_epsilon;
    let fam = fam.with_epsilon(eps);
    let dis = make_disjointness(2, 2, DisjointnessCase::No, 1, 4).unwrap();
    let col = collection_from_disjointness(&fam, &dis, CollectionMode::PerPlayer).unwrap();
    let (a, b) = communication_params(&col);
    let inst = build_welfare_instance(&col, a, b).unwrap();
    let text = serde_json::to_string_pretty(&inst).unwrap();
    let back: AuctionInstance = serde_json::from_str(&text).unwrap();
    assert_eq!(back, inst);

    let res = brute_force_welfare(&inst).unwrap();
    assert_eq!(inst.objective_value(&res.witness).unwrap(), res.value);
    let profile = normalized_profile_from_allocation(&inst, &res.witness, multipeak::rational::to_f64(&eps)).unwrap();
    let total: f64 = profile.pairs.iter().map(|(x, y)| x + y).sum();
    assert!(total <= 2.0 + 1e-12);
    assert!((profile.value - multipeak::rational::to_f64(&res.value)).abs() < 1e-9);
}
