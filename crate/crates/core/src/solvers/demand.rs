//! Exact demand queries for multi-peak valuations.
//!
//! An optimal bundle that is close to a peak `A` can be replaced by the
//! cheapest `x` items of `A` plus the cheapest `y` items outside it, with
//! the same value and no larger price. An optimal bundle close to no peak
//! is dominated by the cheapest `n` items overall, which cost no more and
//! are worth at least `1 - (1 - an)₊²`. Enumerating those candidates is
//! therefore enough; [`exhaustive_demand`] checks the claim.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::itemset::ItemSet;
use crate::rational::{self, Rational};
use crate::valuation::{MultiPeakValuation, SetFunction};
use crate::verify::{par_collect, value_table};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PriceDoc", into = "PriceDoc")]
pub struct PriceVector {
    prices: Vec<Rational>,
}

#[derive(Serialize, Deserialize)]
struct PriceDoc {
    #[serde(with = "rational::serde_str_vec")]
    prices: Vec<Rational>,
}

impl From<PriceVector> for PriceDoc {
    fn from(p: PriceVector) -> Self {
        PriceDoc { prices: p.prices }
    }
}

impl TryFrom<PriceDoc> for PriceVector {
    type Error = Error;

    fn try_from(doc: PriceDoc) -> Result<Self> {
        PriceVector::new(doc.prices)
    }
}

impl PriceVector {
    pub fn new(prices: Vec<Rational>) -> Result<Self> {
        if let Some((item, price)) = prices
            .iter()
            .enumerate()
            .find(|(_, p)| **p < rational::zero())
        {
            return Err(Error::NegativePrice {
                item,
                price: rational::format(price),
            });
        }
        Ok(PriceVector { prices })
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }

    pub fn prices(&self) -> &[Rational] {
        &self.prices
    }

    pub fn price_of(&self, set: &ItemSet) -> Rational {
        set.iter().map(|i| self.prices[i]).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DemandAnswer {
    #[serde(serialize_with = "serialize_set")]
    pub bundle: ItemSet,
    #[serde(with = "rational::serde_str")]
    pub utility: Rational,
    #[serde(with = "rational::serde_str")]
    pub value: Rational,
    #[serde(with = "rational::serde_str")]
    pub price: Rational,
    pub candidates: u64,
}

fn serialize_set<S: serde::Serializer>(set: &ItemSet, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(set.iter())
}

/// Higher utility first, then fewer items, then lexicographically smaller.
fn better(utility: &Rational, set: &ItemSet, best: &(Rational, ItemSet)) -> bool {
    match utility.cmp(&best.0) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => (set.len(), set) < (best.1.len(), &best.1),
    }
}

fn check_lengths(v: &MultiPeakValuation, p: &PriceVector) -> Result<()> {
    if p.len() != v.m() {
        return Err(Error::LengthMismatch {
            expected: v.m(),
            found: p.len(),
        });
    }
    Ok(())
}

/// A utility-maximizing bundle `argmax v(S) - p(S)`, exact.
pub fn demand_query(v: &MultiPeakValuation, p: &PriceVector) -> Result<DemandAnswer> {
    check_lengths(v, p)?;
    let m = v.m();
    let support = v.effective_support();
    let by_price = |items: &mut Vec<usize>| {
        items.sort_by(|&i, &j| p.prices[i].cmp(&p.prices[j]).then(i.cmp(&j)));
    };

    let mut best = (rational::zero(), ItemSet::empty(m));
    let mut candidates = 1u64;
    let mut consider = |set: ItemSet, best: &mut (Rational, ItemSet)| {
        candidates += 1;
        let utility = v.eval(&set) - p.price_of(&set);
        if better(&utility, &set, best) {
            *best = (utility, set);
        }
    };

    let mut all: Vec<usize> = support.to_vec();
    by_price(&mut all);
    let mut prefix = ItemSet::empty(m);
    for &item in &all {
        prefix.insert(item);
        consider(prefix.clone(), &mut best);
    }

    let b = *v.b();
    for peak in v.peaks() {
        let mut inside = peak.to_vec();
        let mut outside = support.difference(peak).to_vec();
        by_price(&mut inside);
        by_price(&mut outside);
        let mut head = ItemSet::empty(m);
        for x in 1..=inside.len() {
            head.insert(inside[x - 1]);
            let mut set = head.clone();
            for y in 0..=outside.len() {
                if y > 0 {
                    set.insert(outside[y - 1]);
                }
                if rational::int(x as i64 - y as i64) <= b {
                    break;
                }
                consider(set.clone(), &mut best);
            }
        }
    }

    let (utility, bundle) = best;
    let value = v.eval(&bundle);
    let price = p.price_of(&bundle);
    Ok(DemandAnswer {
        bundle,
        utility,
        value,
        price,
        candidates,
    })
}

/// Brute force over all `2^m` bundles with the same tie rule.
pub fn exhaustive_demand(v: &MultiPeakValuation, p: &PriceVector) -> Result<DemandAnswer> {
    check_lengths(v, p)?;
    if v.m() > 24 {
        return Err(Error::GuardExceeded {
            required: format!("2^{}", v.m()),
            limit: 1 << 24,
        });
    }
    exhaustive_demand_from_table(&value_table(v), v.ground_size(), p)
}

/// [`exhaustive_demand`] over a precomputed value table indexed by bitmask.
pub fn exhaustive_demand_from_table(
    table: &[Rational],
    m: usize,
    p: &PriceVector,
) -> Result<DemandAnswer> {
    if p.len() != m || table.len() != 1 << m {
        return Err(Error::LengthMismatch {
            expected: m,
            found: p.len(),
        });
    }
    let mut price = vec![rational::zero(); 1 << m];
    for mask in 1..1usize << m {
        let low = mask.trailing_zeros() as usize;
        price[mask] = price[mask & (mask - 1)] + p.prices[low];
    }
    // chunk by the top bits, keep the best per chunk, merge in order
    let chunk_bits = m.min(6);
    let chunk_len = 1usize << (m - chunk_bits);
    let per_chunk = par_collect(1 << chunk_bits, |c| {
        let mut best: Option<(Rational, ItemSet)> = None;
        for mask in c * chunk_len..(c + 1) * chunk_len {
            let utility = table[mask] - price[mask];
            let set = ItemSet::from_mask(m, mask as u64);
            if best.as_ref().is_none_or(|b| better(&utility, &set, b)) {
                best = Some((utility, set));
            }
        }
        best.expect("non-empty chunk")
    });
    let (utility, bundle) = per_chunk
        .into_iter()
        .reduce(|best, cand| if better(&cand.0, &cand.1, &best) { cand } else { best })
        .expect("at least one chunk");
    let mask = bundle.to_mask().expect("m <= 24") as usize;
    Ok(DemandAnswer {
        value: table[mask],
        price: price[mask],
        bundle,
        utility,
        candidates: 1 << m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use crate::valuation::PeakFamily;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn set(m: usize, items: &[usize]) -> ItemSet {
        ItemSet::from_indices(m, items.iter().copied()).unwrap()
    }

    fn single_peak() -> MultiPeakValuation {
        MultiPeakValuation::new(
            4,
            PeakFamily::new(vec![set(4, &[0, 1])], int(0)).unwrap(),
            ratio(1, 4),
            None,
        )
        .unwrap()
    }

    fn prices(p: &[Rational]) -> PriceVector {
        PriceVector::new(p.to_vec()).unwrap()
    }

    #[test]
    fn free_items_take_the_peak() {
        let v = single_peak();
        let p = prices(&[int(0); 4]);
        let ans = demand_query(&v, &p).unwrap();
        assert_eq!(ans.bundle, set(4, &[0, 1]));
        assert_eq!(ans.utility, int(1));
        assert_eq!(exhaustive_demand(&v, &p).unwrap(), DemandAnswer { candidates: 16, ..ans });
    }

    #[test]
    fn expensive_peak_is_avoided() {
        let v = single_peak();
        let p = prices(&[ratio(3, 5), ratio(3, 5), ratio(1, 10), ratio(1, 10)]);
        let ans = demand_query(&v, &p).unwrap();
        assert_eq!(ans.bundle, set(4, &[2, 3]));
        assert_eq!(ans.utility, ratio(11, 20));
        assert_eq!(exhaustive_demand(&v, &p).unwrap().utility, ans.utility);
    }

    #[test]
    fn prohibitive_prices_give_empty_bundle() {
        let v = single_peak();
        let ans = demand_query(&v, &prices(&[ratio(11, 10); 4])).unwrap();
        assert!(ans.bundle.is_empty());
        assert_eq!(ans.utility, int(0));
    }

    #[test]
    fn negative_prices_rejected() {
        assert_eq!(
            PriceVector::new(vec![int(0), ratio(-1, 2)]),
            Err(Error::NegativePrice {
                item: 1,
                price: "-1/2".into()
            })
        );
        let v = single_peak();
        assert!(demand_query(&v, &prices(&[int(0); 3])).is_err());
        let json = r#"{"prices":["1/2","-1/3"]}"#;
        assert!(serde_json::from_str::<PriceVector>(json).is_err());
    }

    #[test]
    fn agrees_with_exhaustive_on_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..15 {
            let m = rng.gen_range(4..10);
            let s = rng.gen_range(2..=m / 2);
            let mut peaks = Vec::new();
            for _ in 0..rng.gen_range(0..4) {
                let items = rand::seq::index::sample(&mut rng, m, s).into_vec();
                peaks.push(set(m, &items));
            }
            peaks.sort();
            peaks.dedup();
            let b = int(rng.gen_range(0..s as i64));
            let Ok(family) = PeakFamily::new(peaks, b) else { continue };
            let a = ratio(1, rng.gen_range(1..2 * m as i64));
            let v = MultiPeakValuation::new(m, family, a, None).unwrap();
            let table = value_table(&v);
            for _ in 0..30 {
                let p: Vec<Rational> = (0..m).map(|_| ratio(rng.gen_range(0..40), 80)).collect();
                let p = prices(&p);
                let fast = demand_query(&v, &p).unwrap();
                let slow = exhaustive_demand_from_table(&table, m, &p).unwrap();
                assert_eq!(fast.utility, slow.utility);
                assert_eq!(fast.value - fast.price, fast.utility);
            }
        }
    }
}
