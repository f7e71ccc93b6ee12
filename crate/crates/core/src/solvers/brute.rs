//! Exhaustive solvers. Assignments are enumerated as mixed-radix counters
//! with item 0 most significant, so keeping only strict improvements in
//! enumeration order returns the lexicographically least optimal witness.

use std::time::Instant;

use itertools::Itertools;
use num_integer::Integer;

use super::SolveResult;
use crate::error::{Error, Result};
use crate::instances::{Allocation, AuctionInstance, Objective};
use crate::itemset::ItemSet;
use crate::rational::{self, Rational};
use crate::valuation::MultiPeakValuation;
use crate::verify::{par_collect, value_table};

/// Default cap on the number of enumerated nodes.
pub const DEFAULT_GUARD: u64 = 100_000_000;

/// Value tables are precomputed up to this many items.
const TABLE_LIMIT: usize = 20;

/// Enumeration is split into at least this many prefix chunks.
const MIN_CHUNKS: u64 = 256;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Aggregate {
    Sum,
    Min,
}

fn aggregate<T: Ord + Copy + std::iter::Sum>(agg: Aggregate, values: impl Iterator<Item = T>) -> T {
    match agg {
        Aggregate::Sum => values.sum(),
        Aggregate::Min => values.min().expect("at least one player"),
    }
}

/// Rational tables over a common denominator, when it fits comfortably.
fn scale_tables(tables: &[Vec<Rational>]) -> Option<(Vec<Vec<i128>>, i128)> {
    const CAP: i128 = 1 << 60;
    let mut den: i128 = 1;
    for value in tables.iter().flatten() {
        den = den.lcm(value.denom());
        if den > CAP {
            return None;
        }
    }
    let scaled = tables
        .iter()
        .map(|t| t.iter().map(|v| v.numer() * (den / v.denom())).collect())
        .collect();
    Some((scaled, den))
}

/// Best assignment in `0..k^m` (item 0 most significant) under `score`,
/// given per-player bitmasks.
fn search_assignments<T, F>(k: usize, m: usize, score: F) -> (T, Vec<usize>)
where
    T: Ord + Copy + Send,
    F: Fn(&[u64]) -> T + Sync + Send,
{
    let mut prefix_len = 0;
    let mut chunks: u64 = 1;
    while prefix_len < m && chunks < MIN_CHUNKS {
        prefix_len += 1;
        chunks *= k as u64;
    }
    let per_chunk = par_collect(chunks as usize, |chunk| {
        let mut digits = vec![0usize; m];
        let mut c = chunk;
        for d in (0..prefix_len).rev() {
            digits[d] = c % k;
            c /= k;
        }
        let mut masks = vec![0u64; k];
        for (item, &p) in digits.iter().enumerate() {
            masks[p] |= 1 << item;
        }
        let mut best = (score(&masks), digits.clone());
        loop {
            // odometer over the suffix, last item fastest
            let mut item = m;
            let advanced = loop {
                if item == prefix_len {
                    break false;
                }
                item -= 1;
                let bit = 1u64 << item;
                masks[digits[item]] &= !bit;
                digits[item] = (digits[item] + 1) % k;
                masks[digits[item]] |= bit;
                if digits[item] != 0 {
                    break true;
                }
            };
            if !advanced {
                break;
            }
            let value = score(&masks);
            if value > best.0 {
                best = (value, digits.clone());
            }
        }
        best
    });
    per_chunk
        .into_iter()
        .reduce(|best, cand| if cand.0 > best.0 { cand } else { best })
        .expect("at least one chunk")
}

fn guard_assignments(k: usize, m: usize, guard: u64) -> Result<u64> {
    if m >= 64 {
        return Err(Error::GuardExceeded {
            required: format!("{k}^{m}"),
            limit: guard,
        });
    }
    let total = (k as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
    if total > guard as u128 {
        return Err(Error::GuardExceeded {
            required: if total == u128::MAX {
                format!("{k}^{m}")
            } else {
                total.to_string()
            },
            limit: guard,
        });
    }
    Ok(total as u64)
}

fn brute_allocation(
    inst: &AuctionInstance,
    guard: u64,
    agg: Aggregate,
    solver: &str,
) -> Result<SolveResult> {
    let start = Instant::now();
    if matches!(inst.objective(), Objective::Cpp { .. }) {
        return Err(Error::InvalidParameter(
            "allocation solvers need a welfare or max-min instance".into(),
        ));
    }
    let (k, m) = (inst.k(), inst.m());
    let vals = inst.valuations();
    let (value, bundles, nodes) = if k == 1 {
        (vals[0].eval(&ItemSet::full(m)), vec![ItemSet::full(m)], 1)
    } else {
        let nodes = guard_assignments(k, m, guard)?;
        let (value, digits) = if m <= TABLE_LIMIT {
            let tables: Vec<Vec<Rational>> = vals.iter().map(value_table).collect();
            match scale_tables(&tables) {
                Some((scaled, den)) => {
                    let (v, d) = search_assignments(k, m, |masks| {
                        aggregate(agg, masks.iter().zip(&scaled).map(|(&mk, t)| t[mk as usize]))
                    });
                    (Rational::new(v, den), d)
                }
                None => search_assignments(k, m, |masks| {
                    aggregate(agg, masks.iter().zip(&tables).map(|(&mk, t)| t[mk as usize]))
                }),
            }
        } else {
            search_assignments(k, m, |masks| {
                aggregate(
                    agg,
                    masks
                        .iter()
                        .zip(vals)
                        .map(|(&mk, v)| v.eval(&ItemSet::from_mask(m, mk))),
                )
            })
        };
        let mut bundles = vec![ItemSet::empty(m); k];
        for (item, &p) in digits.iter().enumerate() {
            bundles[p].insert(item);
        }
        (value, bundles, nodes)
    };
    let witness = Allocation::Bundles(bundles);
    recheck(inst, &witness, &value)?;
    Ok(SolveResult::new(solver, value, witness, nodes, start.elapsed()))
}

fn recheck(inst: &AuctionInstance, witness: &Allocation, value: &Rational) -> Result<()> {
    let again = inst.objective_value(witness)?;
    if again != *value {
        return Err(Error::Internal(format!(
            "witness re-evaluates to {}, search reported {}",
            rational::format(&again),
            rational::format(value)
        )));
    }
    Ok(())
}

/// Exact maximum welfare over every assignment of items to players.
pub fn brute_force_welfare(inst: &AuctionInstance) -> Result<SolveResult> {
    brute_force_welfare_with(inst, DEFAULT_GUARD)
}

pub fn brute_force_welfare_with(inst: &AuctionInstance, guard: u64) -> Result<SolveResult> {
    let inst = inst.clone().with_objective(Objective::Welfare)?;
    brute_allocation(&inst, guard, Aggregate::Sum, "brute_force_welfare")
}

/// Exact maximum of the smallest player value.
pub fn brute_force_maxmin(inst: &AuctionInstance) -> Result<SolveResult> {
    brute_force_maxmin_with(inst, DEFAULT_GUARD)
}

pub fn brute_force_maxmin_with(inst: &AuctionInstance, guard: u64) -> Result<SolveResult> {
    let inst = inst.clone().with_objective(Objective::MaxMin)?;
    brute_allocation(&inst, guard, Aggregate::Min, "brute_force_maxmin")
}

fn binomial(n: usize, r: usize) -> u128 {
    (0..r as u128).fold(1u128, |acc, x| {
        acc.saturating_mul(n as u128 - x) / (x + 1)
    })
}

/// Exact best size-`s` set for the summed valuations, visiting subsets in
/// lexicographic order.
pub fn brute_force_cpp(inst: &AuctionInstance) -> Result<SolveResult> {
    brute_force_cpp_with(inst, DEFAULT_GUARD)
}

pub fn brute_force_cpp_with(inst: &AuctionInstance, guard: u64) -> Result<SolveResult> {
    let start = Instant::now();
    let Objective::Cpp { cardinality: s } = inst.objective() else {
        return Err(Error::InvalidParameter("brute_force_cpp needs a public-project instance".into()));
    };
    let m = inst.m();
    let total = binomial(m, s);
    if total > guard as u128 {
        return Err(Error::GuardExceeded {
            required: total.to_string(),
            limit: guard,
        });
    }
    let total_value = |set: &ItemSet| -> Rational {
        inst.valuations().iter().map(|v: &MultiPeakValuation| v.eval(set)).sum()
    };
    let (value, best) = if s == 0 {
        let empty = ItemSet::empty(m);
        (total_value(&empty), empty)
    } else {
        // split on the smallest chosen item
        let per_first = par_collect(m - s + 1, |first| {
            let mut best: Option<(Rational, ItemSet)> = None;
            for rest in (first + 1..m).combinations(s - 1) {
                let set = ItemSet::from_indices(m, std::iter::once(first).chain(rest))
                    .expect("indices below m");
                let value = total_value(&set);
                if best.as_ref().is_none_or(|(b, _)| value > *b) {
                    best = Some((value, set));
                }
            }
            best
        });
        per_first
            .into_iter()
            .flatten()
            .reduce(|best, cand| if cand.0 > best.0 { cand } else { best })
            .expect("s <= m leaves a candidate")
    };
    let witness = Allocation::Single(best);
    recheck(inst, &witness, &value)?;
    Ok(SolveResult::new("brute_force_cpp", value, witness, total as u64, start.elapsed()))
}
