//! Grouped set systems: one group of candidate peaks per player.

use serde::{Deserialize, Serialize};

use super::disjointness::DisjointnessInstance;
use super::partition::PartitionFamily;
use crate::error::{Error, Result};
use crate::itemset::ItemSet;
use crate::rational::{self, Rational};
use crate::SCHEMA_VERSION;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CollectionMode {
    /// Player `i` receives block `i` of every partition it holds a one for.
    PerPlayer,
    /// Every player receives block `0` of the partitions it holds a one for.
    SharedFirst,
    /// Groups taken from an ingested cover system.
    Cover,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CollectionDoc", into = "CollectionDoc")]
pub struct WellStructuredCollection {
    m: usize,
    s: usize,
    b: Rational,
    mode: CollectionMode,
    groups: Vec<Vec<ItemSet>>,
    /// Partition index (or cover set index) each set came from.
    sources: Vec<Vec<usize>>,
}

impl WellStructuredCollection {
    pub fn new(
        m: usize,
        s: usize,
        b: Rational,
        mode: CollectionMode,
        groups: Vec<Vec<ItemSet>>,
        sources: Vec<Vec<usize>>,
    ) -> Result<Self> {
        if groups.len() != sources.len() {
            return Err(Error::LengthMismatch {
                expected: groups.len(),
                found: sources.len(),
            });
        }
        for (g, src) in groups.iter().zip(&sources) {
            if g.len() != src.len() {
                return Err(Error::LengthMismatch {
                    expected: g.len(),
                    found: src.len(),
                });
            }
            for set in g {
                if set.universe() != m {
                    return Err(Error::UniverseMismatch {
                        left: m,
                        right: set.universe(),
                    });
                }
            }
        }
        Ok(WellStructuredCollection {
            m,
            s,
            b,
            mode,
            groups,
            sources,
        })
    }

    pub fn k(&self) -> usize {
        self.groups.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn b(&self) -> &Rational {
        &self.b
    }

    pub fn mode(&self) -> CollectionMode {
        self.mode
    }

    pub fn groups(&self) -> &[Vec<ItemSet>] {
        &self.groups
    }

    pub fn group(&self, player: usize) -> &[ItemSet] {
        &self.groups[player]
    }

    pub fn sources(&self, player: usize) -> &[usize] {
        &self.sources[player]
    }

    /// Keeps only the first `players` groups over the same ground set.
    pub fn restrict_players(&self, players: usize) -> Result<Self> {
        if players == 0 || players > self.k() {
            return Err(Error::InvalidParameter(format!(
                "cannot keep {players} of {} groups",
                self.k()
            )));
        }
        let mut out = self.clone();
        out.groups.truncate(players);
        out.sources.truncate(players);
        Ok(out)
    }

    /// One set per group, pairwise disjoint, covering the ground set.
    pub fn find_disjoint_cover(&self, limit: u128) -> YesWitness {
        find_disjoint_cover(self.m, &self.groups, limit)
    }

    pub fn validate(&self) -> CollectionReport {
        let k = self.k();
        let mut size_violations = Vec::new();
        for (g, group) in self.groups.iter().enumerate() {
            for (idx, set) in group.iter().enumerate() {
                if set.len() != self.s {
                    size_violations.push((g, idx, set.len()));
                }
            }
        }
        let group_sizes: Vec<usize> = self.groups.iter().map(Vec::len).collect();
        let equal_group_sizes = group_sizes.windows(2).all(|w| w[0] == w[1]);
        let (max_within, within_witness) = max_within_group_intersection(&self.groups);
        let b_intersecting = rational::int(max_within as i64) <= self.b;
        let universe_matches = self.m == k * self.s;
        CollectionReport {
            k,
            m: self.m,
            s: self.s,
            b: self.b,
            universe_matches,
            size_violations: size_violations.clone(),
            group_sizes,
            equal_group_sizes,
            max_within_group_intersection: max_within,
            within_group_witness: within_witness,
            b_intersecting,
            well_structured: universe_matches
                && size_violations.is_empty()
                && equal_group_sizes
                && b_intersecting,
        }
    }
}

/// Def. of a well-structured collection, checked bullet by bullet.
#[derive(Clone, Debug, Serialize)]
pub struct CollectionReport {
    pub k: usize,
    pub m: usize,
    pub s: usize,
    #[serde(with = "rational::serde_str")]
    pub b: Rational,
    pub universe_matches: bool,
    /// `(group, index, size)` of every set whose size is not `s`.
    pub size_violations: Vec<(usize, usize, usize)>,
    pub group_sizes: Vec<usize>,
    pub equal_group_sizes: bool,
    pub max_within_group_intersection: usize,
    /// `(group, first, second)` attaining the maximum.
    pub within_group_witness: Option<(usize, usize, usize)>,
    pub b_intersecting: bool,
    pub well_structured: bool,
}

pub(crate) fn max_within_group_intersection(
    groups: &[Vec<ItemSet>],
) -> (usize, Option<(usize, usize, usize)>) {
    let mut best = (0, None);
    for (g, group) in groups.iter().enumerate() {
        for a in 0..group.len() {
            for c in a + 1..group.len() {
                let n = group[a].intersection_len(&group[c]);
                if best.1.is_none() || n > best.0 {
                    best = (n, Some((g, a, c)));
                }
            }
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum YesWitness {
    /// Index of the chosen set in each group.
    Found { choice: Vec<usize> },
    NotFound { combinations: String },
    Skipped { combinations: String, limit: String },
}

impl YesWitness {
    pub fn choice(&self) -> Option<&[usize]> {
        match self {
            YesWitness::Found { choice } => Some(choice),
            _ => None,
        }
    }
}

/// Depth-first search over one set per group, pruning on overlap. Skipped
/// when the product of group sizes exceeds `limit`.
pub(crate) fn find_disjoint_cover(m: usize, groups: &[Vec<ItemSet>], limit: u128) -> YesWitness {
    let combinations = groups
        .iter()
        .fold(1u128, |acc, g| acc.saturating_mul(g.len() as u128));
    if combinations > limit {
        return YesWitness::Skipped {
            combinations: combinations.to_string(),
            limit: limit.to_string(),
        };
    }

    fn dfs(
        m: usize,
        groups: &[Vec<ItemSet>],
        covered: &ItemSet,
        choice: &mut Vec<usize>,
    ) -> bool {
        let depth = choice.len();
        if depth == groups.len() {
            return covered.len() == m;
        }
        for (idx, set) in groups[depth].iter().enumerate() {
            if covered.is_disjoint(set) {
                choice.push(idx);
                if dfs(m, groups, &covered.union(set), choice) {
                    return true;
                }
                choice.pop();
            }
        }
        false
    }

    let mut choice = Vec::new();
    if !groups.is_empty() && dfs(m, groups, &ItemSet::empty(m), &mut choice) {
        YesWitness::Found { choice }
    } else {
        YesWitness::NotFound {
            combinations: combinations.to_string(),
        }
    }
}

/// Builds the per-player groups from a partition family and a disjointness
/// input, with `b = (1 + ε)·s/k` for the family's `ε`.
pub fn collection_from_disjointness(
    fam: &PartitionFamily,
    inst: &DisjointnessInstance,
    mode: CollectionMode,
) -> Result<WellStructuredCollection> {
    if inst.t() != fam.t() {
        return Err(Error::LengthMismatch {
            expected: fam.t(),
            found: inst.t(),
        });
    }
    if inst.k() != fam.k() {
        return Err(Error::LengthMismatch {
            expected: fam.k(),
            found: inst.k(),
        });
    }
    let block_of = |player: usize| match mode {
        CollectionMode::PerPlayer => Ok(player),
        CollectionMode::SharedFirst => Ok(0),
        CollectionMode::Cover => Err(Error::InvalidParameter(
            "cover mode does not apply to disjointness inputs".into(),
        )),
    };
    let mut groups = Vec::with_capacity(inst.k());
    let mut sources = Vec::with_capacity(inst.k());
    for player in 0..inst.k() {
        let block = block_of(player)?;
        let js: Vec<usize> = (0..inst.t()).filter(|&j| inst.bit(player, j)).collect();
        groups.push(js.iter().map(|&j| fam.block(j, block).clone()).collect());
        sources.push(js);
    }
    WellStructuredCollection::new(fam.m(), fam.s(), fam.pairwise_bound(), mode, groups, sources)
}

#[derive(Serialize, Deserialize)]
struct CollectionDoc {
    schema_version: u32,
    m: usize,
    s: usize,
    #[serde(with = "rational::serde_str")]
    b: Rational,
    mode: CollectionMode,
    groups: Vec<Vec<Vec<usize>>>,
    sources: Vec<Vec<usize>>,
}

impl From<WellStructuredCollection> for CollectionDoc {
    fn from(c: WellStructuredCollection) -> Self {
        CollectionDoc {
            schema_version: SCHEMA_VERSION,
            m: c.m,
            s: c.s,
            b: c.b,
            mode: c.mode,
            groups: c
                .groups
                .iter()
                .map(|g| g.iter().map(ItemSet::to_vec).collect())
                .collect(),
            sources: c.sources,
        }
    }
}

impl TryFrom<CollectionDoc> for WellStructuredCollection {
    type Error = Error;

    fn try_from(doc: CollectionDoc) -> Result<Self> {
        let groups = doc
            .groups
            .into_iter()
            .map(|g| {
                g.into_iter()
                    .map(|set| ItemSet::from_indices(doc.m, set))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        WellStructuredCollection::new(doc.m, doc.s, doc.b, doc.mode, groups, doc.sources)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use crate::set_systems::{
        generate_partition_family, make_disjointness, verify_pairwise, DisjointnessCase,
    };

    #[test]
    fn yes_instance_contains_a_partition() {
        let fam = generate_partition_family(3, 8, 6, ratio(1, 2), 4).unwrap();
        let inst = make_disjointness(3, 6, DisjointnessCase::Yes, 2, 9).unwrap();
        let col = collection_from_disjointness(&fam, &inst, CollectionMode::PerPlayer).unwrap();
        assert_eq!(*col.b(), ratio(4, 1));
        let j = inst.common_columns()[0];
        for player in 0..3 {
            assert!(col.sources(player).contains(&j));
        }
        let choice = col.find_disjoint_cover(1_000_000);
        let choice = choice.choice().expect("YES instance has a disjoint cover");
        let mut union = ItemSet::empty(24);
        for (player, &idx) in choice.iter().enumerate() {
            assert!(union.is_disjoint(&col.group(player)[idx]));
            union.union_with(&col.group(player)[idx]);
        }
        assert_eq!(union.len(), 24);
    }

    #[test]
    fn no_instance_has_no_single_partition_cover() {
        let fam = generate_partition_family(2, 6, 6, ratio(1, 2), 4).unwrap();
        let inst = make_disjointness(2, 6, DisjointnessCase::No, 3, 9).unwrap();
        let col = collection_from_disjointness(&fam, &inst, CollectionMode::PerPlayer).unwrap();
        let a: Vec<_> = col.sources(0).to_vec();
        assert!(col.sources(1).iter().all(|j| !a.contains(j)));
    }

    #[test]
    fn per_player_groups_are_b_intersecting_when_pairwise_passes() {
        let fam = generate_partition_family(3, 60, 8, ratio(1, 2), 21).unwrap();
        let pairwise = verify_pairwise(&fam);
        let inst = make_disjointness(3, 8, DisjointnessCase::Yes, 4, 2).unwrap();
        let col = collection_from_disjointness(&fam, &inst, CollectionMode::PerPlayer).unwrap();
        let report = col.validate();
        assert!(report.max_within_group_intersection <= pairwise.max_intersection);
        assert_eq!(report.b_intersecting, rational::int(report.max_within_group_intersection as i64) <= *col.b());
        if pairwise.within_bound {
            assert!(report.well_structured);
        }
    }

    #[test]
    fn shared_first_uses_block_zero() {
        let fam = generate_partition_family(2, 4, 4, ratio(1, 2), 1).unwrap();
        let inst = make_disjointness(2, 4, DisjointnessCase::No, 2, 3).unwrap();
        let col = collection_from_disjointness(&fam, &inst, CollectionMode::SharedFirst).unwrap();
        for player in 0..2 {
            for (set, &j) in col.group(player).iter().zip(col.sources(player)) {
                assert_eq!(set, fam.block(j, 0));
            }
        }
        assert_eq!(col.restrict_players(1).unwrap().k(), 1);
    }

    #[test]
    fn length_mismatch_rejected() {
        let fam = generate_partition_family(2, 4, 4, ratio(1, 2), 1).unwrap();
        let inst = make_disjointness(2, 5, DisjointnessCase::No, 2, 3).unwrap();
        assert_eq!(
            collection_from_disjointness(&fam, &inst, CollectionMode::PerPlayer),
            Err(Error::LengthMismatch {
                expected: 4,
                found: 5
            })
        );
    }

    #[test]
    fn empty_bitstrings_give_empty_groups() {
        let fam = generate_partition_family(2, 3, 0, ratio(1, 2), 1).unwrap();
        let inst = make_disjointness(2, 0, DisjointnessCase::No, 0, 3).unwrap();
        let col = collection_from_disjointness(&fam, &inst, CollectionMode::PerPlayer).unwrap();
        assert!(col.groups().iter().all(Vec::is_empty));
        assert!(col.validate().well_structured);
    }

    #[test]
    fn json_roundtrip() {
        let fam = generate_partition_family(2, 3, 3, ratio(1, 3), 1).unwrap();
        let inst = make_disjointness(2, 3, DisjointnessCase::Yes, 2, 3).unwrap();
        let col = collection_from_disjointness(&fam, &inst, CollectionMode::PerPlayer).unwrap();
        let json = serde_json::to_string(&col).unwrap();
        assert!(json.contains("\"b\":\"2/1\""));
        let back: WellStructuredCollection = serde_json::from_str(&json).unwrap();
        assert_eq!(back, col);
    }
}
