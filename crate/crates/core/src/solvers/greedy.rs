//! Greedy baselines using value queries only.

use std::time::Instant;

use super::SolveResult;
use crate::error::{Error, Result};
use crate::instances::{Allocation, AuctionInstance, Objective};
use crate::itemset::ItemSet;
use crate::rational::Rational;

/// Items in index order, each to the player with the largest marginal value
/// (ties to the lowest player index).
pub fn greedy_welfare(inst: &AuctionInstance) -> Result<SolveResult> {
    let start = Instant::now();
    if matches!(inst.objective(), Objective::Cpp { .. }) {
        return Err(Error::InvalidParameter(
            "greedy_welfare needs a welfare or max-min instance".into(),
        ));
    }
    let m = inst.m();
    let vals = inst.valuations();
    let mut bundles = vec![ItemSet::empty(m); inst.k()];
    let mut current: Vec<Rational> = vals.iter().map(|v| v.eval(&bundles[0])).collect();
    let mut nodes = 0;
    for item in 0..m {
        let mut best: Option<(usize, Rational, Rational)> = None;
        for (player, v) in vals.iter().enumerate() {
            let after = v.eval(&bundles[player].with(item));
            let gain = after - current[player];
            nodes += 1;
            if best.as_ref().is_none_or(|(_, g, _)| gain > *g) {
                best = Some((player, gain, after));
            }
        }
        let (player, _, after) = best.expect("at least one player");
        bundles[player].insert(item);
        current[player] = after;
    }
    let value: Rational = current.iter().sum();
    let witness = Allocation::Bundles(bundles);
    let welfare_view = inst.clone().with_objective(Objective::Welfare)?;
    if welfare_view.objective_value(&witness)? != value {
        return Err(Error::Internal("greedy witness re-evaluates differently".into()));
    }
    Ok(SolveResult::new("greedy_welfare", value, witness, nodes, start.elapsed()))
}

/// `s` rounds, each adding the item with the largest marginal gain in the
/// summed valuations (ties to the lowest index).
pub fn greedy_cpp(inst: &AuctionInstance) -> Result<SolveResult> {
    let start = Instant::now();
    let Objective::Cpp { cardinality: s } = inst.objective() else {
        return Err(Error::InvalidParameter("greedy_cpp needs a public-project instance".into()));
    };
    let m = inst.m();
    let total = |set: &ItemSet| -> Rational { inst.valuations().iter().map(|v| v.eval(set)).sum() };
    let mut chosen = ItemSet::empty(m);
    let mut value = total(&chosen);
    let mut nodes = 0;
    for _ in 0..s {
        let mut best: Option<(usize, Rational)> = None;
        for item in (0..m).filter(|&i| !chosen.contains(i)) {
            let after = total(&chosen.with(item));
            nodes += 1;
            if best.as_ref().is_none_or(|(_, b)| after > *b) {
                best = Some((item, after));
            }
        }
        let (item, after) = best.expect("cardinality is at most m");
        chosen.insert(item);
        value = after;
    }
    let witness = Allocation::Single(chosen);
    if inst.objective_value(&witness)? != value {
        return Err(Error::Internal("greedy witness re-evaluates differently".into()));
    }
    Ok(SolveResult::new("greedy_cpp", value, witness, nodes, start.elapsed()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::Provenance;
    use crate::rational::{int, ratio};
    use crate::solvers::{brute_force_cpp, brute_force_welfare};
    use crate::valuation::{MultiPeakValuation, PeakFamily};
    use proptest::prelude::*;

    fn set(m: usize, items: &[usize]) -> ItemSet {
        ItemSet::from_indices(m, items.iter().copied()).unwrap()
    }

    fn valuation(m: usize, peaks: &[Vec<usize>], a: Rational, b: Rational) -> MultiPeakValuation {
        let peaks = peaks.iter().map(|p| set(m, p)).collect();
        MultiPeakValuation::new(m, PeakFamily::new(peaks, b).unwrap(), a, None).unwrap()
    }

    fn instance(vals: Vec<MultiPeakValuation>, objective: Objective) -> AuctionInstance {
        let m = vals[0].m();
        AuctionInstance::new(m, vals, objective, Provenance::new("test", 2, ratio(1, 4), int(0)))
            .unwrap()
    }

    #[test]
    fn single_player_matches_brute_force() {
        let v = valuation(6, &[vec![0, 1, 2]], ratio(1, 6), int(1));
        let inst = instance(vec![v], Objective::Welfare);
        assert_eq!(
            greedy_welfare(&inst).unwrap().value,
            brute_force_welfare(&inst).unwrap().value
        );
    }

    #[test]
    fn toy_instances_reach_optimum() {
        let a = ratio(1, 4);
        let v1 = valuation(4, &[vec![0, 1]], a, int(0));
        let v2 = valuation(4, &[vec![2, 3]], a, int(0));
        let inst = instance(vec![v1.clone(), v2], Objective::Welfare);
        assert_eq!(greedy_welfare(&inst).unwrap().value, int(2));

        let cpp = instance(vec![v1.clone(), v1], Objective::Cpp { cardinality: 2 });
        let g = greedy_cpp(&cpp).unwrap();
        assert_eq!(g.value, brute_force_cpp(&cpp).unwrap().value);
        assert_eq!(g.witness, Allocation::Single(set(4, &[0, 1])));
    }

    #[test]
    fn single_round_picks_best_item() {
        let v1 = valuation(5, &[vec![3, 4]], ratio(1, 3), int(0));
        let v2 = valuation(5, &[vec![1, 3]], ratio(1, 3), int(0));
        let inst = instance(vec![v1, v2], Objective::Cpp { cardinality: 1 });
        let g = greedy_cpp(&inst).unwrap();
        assert_eq!(g.value, brute_force_cpp(&inst).unwrap().value);
        assert_eq!(g.witness, Allocation::Single(set(5, &[3])));
    }

    #[test]
    fn modular_objective_is_exact() {
        // with a tiny a and no peaks every item adds nearly the same amount;
        // items outside a small support add nothing
        let a = ratio(1, 100);
        let support = set(6, &[1, 4]);
        let v = MultiPeakValuation::new(6, PeakFamily::new(vec![], int(0)).unwrap(), a, Some(support))
            .unwrap();
        let inst = instance(vec![v], Objective::Cpp { cardinality: 2 });
        let g = greedy_cpp(&inst).unwrap();
        assert_eq!(g.witness, Allocation::Single(set(6, &[1, 4])));
        assert_eq!(g.value, brute_force_cpp(&inst).unwrap().value);
    }

    fn arb_instance() -> impl Strategy<Value = (Vec<Vec<Vec<usize>>>, i64, i64)> {
        let peak = proptest::collection::btree_set(0usize..8, 1..5)
            .prop_map(|s| s.into_iter().collect::<Vec<_>>());
        let player = proptest::collection::vec(peak, 0..3);
        (proptest::collection::vec(player, 1..4), 1i64..12, 0i64..4)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn approximation_guarantees((players, a_den, b) in arb_instance()) {
            let m = 8;
            let a = ratio(1, a_den);
            let b = int(b);
            let mut vals = Vec::new();
            for peaks in &players {
                let sets: Vec<ItemSet> = peaks.iter().map(|p| set(m, p)).collect();
                let Ok(family) = PeakFamily::new(sets, b) else { return Ok(()); };
                vals.push(MultiPeakValuation::new(m, family, a, None).unwrap());
            }
            let welfare = instance(vals.clone(), Objective::Welfare);
            let opt = brute_force_welfare(&welfare).unwrap().value;
            let greedy = greedy_welfare(&welfare).unwrap().value;
            prop_assert!(greedy * int(2) >= opt);

            let cpp = instance(vals, Objective::Cpp { cardinality: 3 });
            let opt = crate::rational::to_f64(&brute_force_cpp(&cpp).unwrap().value);
            let greedy = crate::rational::to_f64(&greedy_cpp(&cpp).unwrap().value);
            prop_assert!(greedy >= (1.0 - (-1.0f64).exp()) * opt - 1e-9);
        }
    }
}
