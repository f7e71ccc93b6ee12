//! Random partition families: `t` partitions of a ground set of `k·s` items
//! into `k` blocks of `s` items, with pairwise block intersections close to
//! `s/k` and unions of `ℓ` blocks close to `(1 - (1-1/k)^ℓ)·ks`.

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::itemset::ItemSet;
use crate::rational::{self, Rational};
use crate::verify::par_collect;
use crate::SCHEMA_VERSION;

/// Above this many `(i-tuple, j-tuple)` combinations the union verifier samples.
pub const EXHAUSTIVE_UNION_LIMIT: u128 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FamilyDoc", into = "FamilyDoc")]
pub struct PartitionFamily {
    k: usize,
    s: usize,
    seed: u64,
    epsilon: Rational,
    /// `blocks[j][i]` is block `i` of partition `j`.
    blocks: Vec<Vec<ItemSet>>,
}

impl PartitionFamily {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn t(&self) -> usize {
        self.blocks.len()
    }

    pub fn m(&self) -> usize {
        self.k * self.s
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn epsilon(&self) -> &Rational {
        &self.epsilon
    }

    /// Replaces the slack target, typically with the effective value a
    /// verifier measured.
    pub fn with_epsilon(mut self, epsilon: Rational) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn block(&self, partition: usize, index: usize) -> &ItemSet {
        &self.blocks[partition][index]
    }

    pub fn partitions(&self) -> &[Vec<ItemSet>] {
        &self.blocks
    }

    /// `(1 + ε)·s/k`.
    pub fn pairwise_bound(&self) -> Rational {
        (rational::one() + self.epsilon) * rational::int(self.s as i64)
            / rational::int(self.k as i64)
    }
}

fn tuple_rng(seed: u64, partition: usize, tuple: usize) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(partition as u64).to_le_bytes());
    key[16..24].copy_from_slice(&(tuple as u64).to_le_bytes());
    key[24..].copy_from_slice(b"partfam\0");
    ChaCha8Rng::from_seed(key)
}

/// Arranges `0..k·s` as `s` consecutive `k`-tuples and, for every partition
/// and tuple, sends the tuple's elements to the `k` blocks through an
/// independent uniformly random bijection. Each `(partition, tuple)` pair
/// draws from its own keyed stream, so the output depends only on the seed.
pub fn generate_partition_family(
    k: usize,
    s: usize,
    t: usize,
    epsilon: Rational,
    seed: u64,
) -> Result<PartitionFamily> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("k must be at least 2, got {k}")));
    }
    if s < 1 {
        return Err(Error::InvalidParameter("s must be at least 1".into()));
    }
    if epsilon < rational::zero() {
        return Err(Error::InvalidParameter("epsilon must be non-negative".into()));
    }
    let m = k * s;
    let blocks = (0..t)
        .map(|j| {
            let mut partition = vec![ItemSet::empty(m); k];
            let mut assignment: Vec<usize> = (0..k).collect();
            for r in 0..s {
                assignment.sort_unstable();
                assignment.shuffle(&mut tuple_rng(seed, j, r));
                for (pos, &block) in assignment.iter().enumerate() {
                    partition[block].insert(r * k + pos);
                }
            }
            partition
        })
        .collect();
    Ok(PartitionFamily {
        k,
        s,
        seed,
        epsilon,
        blocks,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PairwiseReport {
    pub pairs_checked: u64,
    pub max_intersection: usize,
    /// `(j, i, j', i')` of the first pair attaining the maximum.
    pub max_pair: Option<(usize, usize, usize, usize)>,
    #[serde(with = "rational::serde_str")]
    pub bound: Rational,
    pub within_bound: bool,
    /// `max · k / s - 1`, clamped at zero.
    #[serde(with = "rational::serde_str")]
    pub effective_epsilon: Rational,
    pub cross_partition_pairs: u64,
    pub cross_partition_mean: f64,
    pub cross_partition_std: f64,
    pub expected_mean: f64,
    /// Standard deviation of a single intersection, `sqrt(s (1/k)(1 - 1/k))`.
    pub binomial_std: f64,
    pub mean_within_3_sigma: bool,
}

/// Exhaustive scan of every pair of blocks other than a block with itself.
pub fn verify_pairwise(fam: &PartitionFamily) -> PairwiseReport {
    let (k, s, t) = (fam.k, fam.s, fam.t());
    let flat: Vec<(usize, usize, &ItemSet)> = (0..t)
        .flat_map(|j| (0..k).map(move |i| (j, i, fam.block(j, i))))
        .collect();

    struct Row {
        max: usize,
        max_pair: Option<(usize, usize, usize, usize)>,
        pairs: u64,
        cross: u64,
        sum: f64,
        sum_sq: f64,
    }
    let rows = par_collect(flat.len(), |a| {
        let (j, i, left) = flat[a];
        let mut row = Row {
            max: 0,
            max_pair: None,
            pairs: 0,
            cross: 0,
            sum: 0.0,
            sum_sq: 0.0,
        };
        for &(j2, i2, right) in &flat[a + 1..] {
            let n = left.intersection_len(right);
            row.pairs += 1;
            if row.max_pair.is_none() || n > row.max {
                row.max = n;
                row.max_pair = Some((j, i, j2, i2));
            }
            if j != j2 {
                row.cross += 1;
                row.sum += n as f64;
                row.sum_sq += (n * n) as f64;
            }
        }
        row
    });

    let mut report = PairwiseReport {
        pairs_checked: 0,
        max_intersection: 0,
        max_pair: None,
        bound: fam.pairwise_bound(),
        within_bound: true,
        effective_epsilon: rational::zero(),
        cross_partition_pairs: 0,
        cross_partition_mean: f64::NAN,
        cross_partition_std: f64::NAN,
        expected_mean: s as f64 / k as f64,
        binomial_std: (s as f64 * (1.0 / k as f64) * (1.0 - 1.0 / k as f64)).sqrt(),
        mean_within_3_sigma: true,
    };
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for row in rows {
        report.pairs_checked += row.pairs;
        if row.max_pair.is_some() && (report.max_pair.is_none() || row.max > report.max_intersection)
        {
            report.max_intersection = row.max;
            report.max_pair = row.max_pair;
        }
        report.cross_partition_pairs += row.cross;
        sum += row.sum;
        sum_sq += row.sum_sq;
    }
    let max = rational::int(report.max_intersection as i64);
    report.within_bound = max <= report.bound;
    report.effective_epsilon = rational::positive_part(
        max * rational::int(k as i64) / rational::int(s as i64) - rational::one(),
    );
    if report.cross_partition_pairs > 0 {
        let n = report.cross_partition_pairs as f64;
        let mean = sum / n;
        report.cross_partition_mean = mean;
        report.cross_partition_std = (sum_sq / n - mean * mean).max(0.0).sqrt();
        let standard_error = report.binomial_std / n.sqrt();
        report.mean_within_3_sigma =
            (mean - report.expected_mean).abs() <= 3.0 * standard_error + 1e-12;
    }
    report
}

#[derive(Clone, Debug, Serialize)]
pub struct UnionEllReport {
    pub ell: usize,
    pub exhaustive: bool,
    pub tuples_checked: u64,
    /// `(1 - (1-1/k)^ℓ)·ks`.
    pub expected_union: f64,
    pub max_union: usize,
    /// Largest union among tuples whose partitions are pairwise distinct.
    pub max_union_cross: Option<usize>,
    /// Largest union among tuples drawn from a single partition.
    pub max_union_same: Option<usize>,
    pub epsilon: f64,
    pub epsilon_cross: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct UnionReport {
    pub per_ell: Vec<UnionEllReport>,
    /// Worst slack over every tuple checked.
    pub effective_epsilon: f64,
    /// Worst slack over tuples with pairwise distinct partitions. These are
    /// the only tuples a NO disjointness instance can select.
    pub effective_epsilon_cross: f64,
    /// Set when `ℓ = k` blocks of one partition were checked: they cover the
    /// whole ground set, which forces `ε >= (1 - 1/k)^k`.
    pub single_partition_cover_flag: bool,
    pub single_partition_floor: f64,
}

impl UnionReport {
    pub fn passes(&self, epsilon: f64) -> bool {
        self.effective_epsilon_cross <= epsilon
    }
}

struct UnionAcc {
    checked: u64,
    max: usize,
    max_cross: Option<usize>,
    max_same: Option<usize>,
}

impl UnionAcc {
    fn new() -> Self {
        UnionAcc {
            checked: 0,
            max: 0,
            max_cross: None,
            max_same: None,
        }
    }

    fn record(&mut self, fam: &PartitionFamily, is: &[usize], js: &[usize], scratch: &mut ItemSet) {
        *scratch = ItemSet::empty(fam.m());
        for (&i, &j) in is.iter().zip(js) {
            scratch.union_with(fam.block(j, i));
        }
        let n = scratch.len();
        self.checked += 1;
        self.max = self.max.max(n);
        if js.iter().all_unique() {
            self.max_cross = Some(self.max_cross.map_or(n, |c| c.max(n)));
        }
        if js.iter().all_equal() {
            self.max_same = Some(self.max_same.map_or(n, |c| c.max(n)));
        }
    }
}

/// Mixed-radix increment with the last digit fastest; false on wraparound.
pub(crate) fn advance(digits: &mut [usize], radix: usize) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < radix {
            return true;
        }
        *d = 0;
    }
    false
}

fn binomial(n: usize, r: usize) -> u128 {
    (0..r as u128).fold(1u128, |acc, x| acc * (n as u128 - x) / (x + 1))
}

/// For `ℓ = 1..=ell_max`, checks unions of blocks with distinct block
/// indices `i` and arbitrary partitions `j` against
/// `(1 - (1-1/k)^ℓ + ε)·ks`. Enumerates every tuple when there are at most
/// [`EXHAUSTIVE_UNION_LIMIT`], otherwise samples `samples` tuples, half of
/// them with pairwise distinct partitions.
pub fn verify_union_bounds(
    fam: &PartitionFamily,
    ell_max: usize,
    samples: usize,
    seed: u64,
) -> Result<UnionReport> {
    let (k, s, t) = (fam.k, fam.s, fam.t());
    if ell_max > k {
        return Err(Error::InvalidParameter(format!(
            "ell_max = {ell_max} exceeds k = {k}"
        )));
    }
    let ks = (k * s) as f64;
    let q = 1.0 - 1.0 / k as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut per_ell = Vec::new();
    let mut scratch = ItemSet::empty(fam.m());

    for ell in 1..=ell_max {
        if t == 0 {
            break;
        }
        let combos = binomial(k, ell).saturating_mul((t as u128).saturating_pow(ell as u32));
        let exhaustive = combos <= EXHAUSTIVE_UNION_LIMIT;
        let mut acc = UnionAcc::new();
        if exhaustive {
            let mut js = vec![0usize; ell];
            for is in (0..k).combinations(ell) {
                js.iter_mut().for_each(|j| *j = 0);
                loop {
                    acc.record(fam, &is, &js, &mut scratch);
                    if !advance(&mut js, t) {
                        break;
                    }
                }
            }
        } else {
            let mut is: Vec<usize> = (0..k).collect();
            for n in 0..samples {
                is.shuffle(&mut rng);
                let chosen = &is[..ell];
                let js: Vec<usize> = if n % 2 == 0 && t >= ell {
                    rand::seq::index::sample(&mut rng, t, ell).into_vec()
                } else {
                    (0..ell).map(|_| rng.gen_range(0..t)).collect()
                };
                acc.record(fam, chosen, &js, &mut scratch);
            }
        }
        let base = 1.0 - q.powi(ell as i32);
        let eps_of = |n: usize| n as f64 / ks - base;
        per_ell.push(UnionEllReport {
            ell,
            exhaustive,
            tuples_checked: acc.checked,
            expected_union: base * ks,
            max_union: acc.max,
            max_union_cross: acc.max_cross,
            max_union_same: acc.max_same,
            epsilon: eps_of(acc.max),
            epsilon_cross: acc.max_cross.map(eps_of),
        });
    }

    let effective_epsilon = per_ell.iter().map(|r| r.epsilon).fold(0.0, f64::max);
    let effective_epsilon_cross = per_ell
        .iter()
        .filter_map(|r| r.epsilon_cross)
        .fold(0.0, f64::max);
    let single_partition_cover_flag = per_ell
        .iter()
        .any(|r| r.ell == k && r.max_union_same == Some(k * s));
    Ok(UnionReport {
        per_ell,
        effective_epsilon,
        effective_epsilon_cross,
        single_partition_cover_flag,
        single_partition_floor: q.powi(k as i32),
    })
}

#[derive(Serialize, Deserialize)]
struct FamilyMetadata {
    k: usize,
    s: usize,
    t: usize,
    seed: u64,
    #[serde(with = "rational::serde_str")]
    epsilon: Rational,
}

#[derive(Serialize, Deserialize)]
struct FamilyDoc {
    schema_version: u32,
    metadata: FamilyMetadata,
    /// `partitions[j][i]` as sorted item arrays.
    partitions: Vec<Vec<Vec<usize>>>,
}

impl From<PartitionFamily> for FamilyDoc {
    fn from(fam: PartitionFamily) -> Self {
        FamilyDoc {
            schema_version: SCHEMA_VERSION,
            metadata: FamilyMetadata {
                k: fam.k,
                s: fam.s,
                t: fam.t(),
                seed: fam.seed,
                epsilon: fam.epsilon,
            },
            partitions: fam
                .blocks
                .iter()
                .map(|p| p.iter().map(ItemSet::to_vec).collect())
                .collect(),
        }
    }
}

impl TryFrom<FamilyDoc> for PartitionFamily {
    type Error = Error;

    fn try_from(doc: FamilyDoc) -> Result<Self> {
        let FamilyMetadata { k, s, t, seed, epsilon } = doc.metadata;
        let m = k * s;
        if doc.partitions.len() != t {
            return Err(Error::Malformed(format!(
                "metadata says t = {t} but {} partitions are listed",
                doc.partitions.len()
            )));
        }
        let blocks = doc
            .partitions
            .into_iter()
            .enumerate()
            .map(|(j, partition)| {
                if partition.len() != k {
                    return Err(Error::Malformed(format!(
                        "partition {j} has {} blocks, expected {k}",
                        partition.len()
                    )));
                }
                let blocks = partition
                    .into_iter()
                    .map(|b| ItemSet::from_indices(m, b))
                    .collect::<Result<Vec<_>>>()?;
                let mut cover = ItemSet::empty(m);
                for (i, block) in blocks.iter().enumerate() {
                    if block.len() != s || !cover.is_disjoint(block) {
                        return Err(Error::Malformed(format!(
                            "partition {j} block {i} is not a size-{s} block of a partition"
                        )));
                    }
                    cover.union_with(block);
                }
                Ok(blocks)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PartitionFamily {
            k,
            s,
            seed,
            epsilon,
            blocks,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn smallest_family() {
        let fam = generate_partition_family(2, 1, 1, ratio(1, 2), 5).unwrap();
        let mut blocks: Vec<Vec<usize>> = fam.partitions()[0].iter().map(ItemSet::to_vec).collect();
        blocks.sort();
        assert_eq!(blocks, vec![vec![0], vec![1]]);
    }

    #[test]
    fn deterministic_under_seed() {
        let a = generate_partition_family(3, 20, 8, ratio(1, 2), 77).unwrap();
        let b = generate_partition_family(3, 20, 8, ratio(1, 2), 77).unwrap();
        let c = generate_partition_family(3, 20, 8, ratio(1, 2), 78).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        // a prefix of partitions does not depend on t
        let shorter = generate_partition_family(3, 20, 3, ratio(1, 2), 77).unwrap();
        assert_eq!(&a.partitions()[..3], shorter.partitions());
    }

    #[test]
    fn partitions_and_block_sizes() {
        let fam = generate_partition_family(3, 30, 64, ratio(1, 2), 42).unwrap();
        for partition in fam.partitions() {
            let mut cover = ItemSet::empty(90);
            for block in partition {
                assert_eq!(block.len(), 30);
                assert!(cover.is_disjoint(block));
                cover.union_with(block);
            }
            assert_eq!(cover.len(), 90);
        }
        let report = verify_pairwise(&fam);
        assert!(report.max_intersection <= 30);
        assert_eq!(report.pairs_checked, (192 * 191 / 2) as u64);
    }

    #[test]
    fn same_partition_blocks_are_disjoint() {
        let fam = generate_partition_family(2, 50, 1, ratio(1, 2), 3).unwrap();
        let report = verify_pairwise(&fam);
        assert_eq!(report.pairs_checked, 1);
        assert_eq!(report.max_intersection, 0);
        assert_eq!(report.cross_partition_pairs, 0);
    }

    #[test]
    fn pairwise_statistics_large_s() {
        let fam = generate_partition_family(3, 300, 16, ratio(1, 2), 7).unwrap();
        let report = verify_pairwise(&fam);
        assert!(report.within_bound, "{report:?}");
        assert!(report.mean_within_3_sigma);
        assert!(report.max_intersection <= 150);
        // every element lies in exactly one block per partition, so the mean
        // over all cross-partition pairs is exactly s/k
        assert!((report.cross_partition_mean - 100.0).abs() < 1e-9);
    }

    #[test]
    fn union_bound_single_block_is_exact() {
        let fam = generate_partition_family(3, 40, 4, ratio(1, 2), 1).unwrap();
        let report = verify_union_bounds(&fam, 1, 100, 0).unwrap();
        let first = &report.per_ell[0];
        assert_eq!(first.max_union, 40);
        assert!(first.epsilon.abs() < 1e-12);
    }

    #[test]
    fn union_bound_full_partition_flagged() {
        let fam = generate_partition_family(3, 40, 4, ratio(1, 2), 1).unwrap();
        let report = verify_union_bounds(&fam, 3, 100, 0).unwrap();
        let last = &report.per_ell[2];
        assert!(last.exhaustive);
        assert_eq!(last.max_union_same, Some(120));
        assert!(report.single_partition_cover_flag);
        assert!((report.single_partition_floor - 8.0 / 27.0).abs() < 1e-12);
        assert!(report.effective_epsilon >= report.single_partition_floor - 1e-12);
        assert_eq!(last.tuples_checked, 64);
    }

    #[test]
    fn union_bound_sampled_mode() {
        let fam = generate_partition_family(4, 25, 40, ratio(1, 2), 11).unwrap();
        // C(4,4)·40^4 = 2.56M > limit
        let report = verify_union_bounds(&fam, 4, 5_000, 3).unwrap();
        let last = report.per_ell.last().unwrap();
        assert!(!last.exhaustive);
        assert_eq!(last.tuples_checked, 5_000);
        assert!(last.max_union_cross.is_some());
        assert!(verify_union_bounds(&fam, 5, 10, 0).is_err());
    }

    #[test]
    fn json_roundtrip_and_rejection() {
        let fam = generate_partition_family(2, 3, 2, ratio(1, 4), 9).unwrap();
        let json = serde_json::to_string(&fam).unwrap();
        assert!(json.contains("\"epsilon\":\"1/4\""));
        let back: PartitionFamily = serde_json::from_str(&json).unwrap();
        assert_eq!(back, fam);
        let broken = json.replacen("\"t\":2", "\"t\":3", 1);
        assert!(serde_json::from_str::<PartitionFamily>(&broken).is_err());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(generate_partition_family(1, 3, 1, ratio(1, 2), 0).is_err());
        assert!(generate_partition_family(2, 0, 1, ratio(1, 2), 0).is_err());
        assert_eq!(generate_partition_family(2, 3, 0, ratio(1, 2), 0).unwrap().t(), 0);
    }
}
