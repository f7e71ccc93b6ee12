//! Externally supplied Max k-cover systems.

use serde::{Deserialize, Serialize};

use super::collection::{
    find_disjoint_cover, max_within_group_intersection, CollectionMode, WellStructuredCollection,
    YesWitness,
};
use crate::error::{Error, Result};
use crate::itemset::ItemSet;
use crate::rational::{self, Rational};
use crate::SCHEMA_VERSION;

/// Above this many one-per-group choices the YES witness search is skipped.
pub const WITNESS_SEARCH_LIMIT: u128 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CoverDoc", into = "CoverDoc")]
pub struct CoverSystem {
    universe: usize,
    s: usize,
    epsilon: Option<Rational>,
    groups: Vec<Vec<ItemSet>>,
}

impl CoverSystem {
    pub fn new(
        universe: usize,
        s: usize,
        epsilon: Option<Rational>,
        groups: Vec<Vec<ItemSet>>,
    ) -> Result<Self> {
        for set in groups.iter().flatten() {
            set.same_universe(&ItemSet::empty(universe))?;
        }
        if let Some(eps) = epsilon {
            if eps < rational::zero() {
                return Err(Error::InvalidParameter("epsilon must be non-negative".into()));
            }
        }
        Ok(CoverSystem {
            universe,
            s,
            epsilon,
            groups,
        })
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn k(&self) -> usize {
        self.groups.len()
    }

    pub fn epsilon(&self) -> Option<&Rational> {
        self.epsilon.as_ref()
    }

    pub fn groups(&self) -> &[Vec<ItemSet>] {
        &self.groups
    }

    /// `ε·s`, when `ε` is declared.
    pub fn intersection_bound(&self) -> Option<Rational> {
        self.epsilon.map(|e| e * rational::int(self.s as i64))
    }

    /// The groups as a collection with the given intersection bound `b`.
    pub fn to_collection(&self, b: Rational) -> Result<WellStructuredCollection> {
        let sources = self.groups.iter().map(|g| (0..g.len()).collect()).collect();
        WellStructuredCollection::new(
            self.universe,
            self.s,
            b,
            CollectionMode::Cover,
            self.groups.clone(),
            sources,
        )
    }
}

impl From<&WellStructuredCollection> for CoverSystem {
    fn from(col: &WellStructuredCollection) -> Self {
        CoverSystem {
            universe: col.m(),
            s: col.s(),
            epsilon: Some(*col.b() / rational::int(col.s() as i64)),
            groups: col.groups().to_vec(),
        }
    }
}

/// Parses a JSON cover-system document.
pub fn ingest_cover_system(document: &str) -> Result<CoverSystem> {
    Ok(serde_json::from_str(document)?)
}

#[derive(Clone, Debug, Serialize)]
pub struct CoverReport {
    pub k: usize,
    pub universe: usize,
    pub s: usize,
    /// Every set has size `s`.
    pub uniform_set_size: bool,
    /// Every group holds the same number `g` of sets.
    pub sets_per_group: Option<usize>,
    /// Every element lies in the same number `d` of sets.
    pub degree: Option<usize>,
    /// Every element of the universe lies in some set.
    pub universe_covered: bool,
    pub max_within_group_intersection: usize,
    pub max_cross_group_intersection: usize,
    #[serde(with = "rational::serde_str_opt")]
    pub intersection_bound: Option<Rational>,
    /// Within-group intersections are at most `ε·s`. The peaks of one
    /// player only ever meet sets of the same group.
    pub within_group_bound_ok: bool,
    /// Cross-group intersections are at most `ε·s`; informational.
    pub cross_group_bound_ok: bool,
    pub yes_witness: YesWitness,
    /// Itemized property violations.
    pub issues: Vec<String>,
    pub valid: bool,
    /// Equal universe `k·s`, uniform sizes, equal group sizes and
    /// within-group intersections within `ε·s`.
    pub well_structured: bool,
}

pub fn validate_cover_system(cs: &CoverSystem) -> CoverReport {
    let mut issues = Vec::new();
    let k = cs.k();

    let mut uniform_set_size = true;
    for (g, group) in cs.groups.iter().enumerate() {
        for (idx, set) in group.iter().enumerate() {
            if set.len() != cs.s {
                uniform_set_size = false;
                issues.push(format!(
                    "group {g} set {idx} {set} has size {}, expected {}",
                    set.len(),
                    cs.s
                ));
            }
        }
    }

    let sizes: Vec<usize> = cs.groups.iter().map(Vec::len).collect();
    let sets_per_group = match sizes.first() {
        Some(&g) if sizes.iter().all(|&x| x == g) => Some(g),
        Some(_) => {
            issues.push(format!("groups hold different numbers of sets: {sizes:?}"));
            None
        }
        None => {
            issues.push("no groups".into());
            None
        }
    };

    let mut degrees = vec![0usize; cs.universe];
    for set in cs.groups.iter().flatten() {
        for e in set.iter() {
            degrees[e] += 1;
        }
    }
    let degree = match degrees.first() {
        Some(&d) if degrees.iter().all(|&x| x == d) => Some(d),
        Some(_) => {
            let (lo, hi) = (degrees.iter().min().unwrap(), degrees.iter().max().unwrap());
            issues.push(format!("element degrees range from {lo} to {hi}"));
            None
        }
        None => None,
    };
    let uncovered = degrees.iter().filter(|&&d| d == 0).count();
    let universe_covered = uncovered == 0;
    if !universe_covered {
        issues.push(format!("{uncovered} elements lie in no set"));
    }

    let (max_within, within_witness) = max_within_group_intersection(&cs.groups);
    let flat: Vec<(usize, &ItemSet)> = cs
        .groups
        .iter()
        .enumerate()
        .flat_map(|(g, group)| group.iter().map(move |s| (g, s)))
        .collect();
    let mut max_cross = 0;
    for (a, &(ga, sa)) in flat.iter().enumerate() {
        for &(gb, sb) in &flat[a + 1..] {
            if ga != gb {
                max_cross = max_cross.max(sa.intersection_len(sb));
            }
        }
    }

    let bound = cs.intersection_bound();
    let within_group_bound_ok = bound.is_none_or(|b| rational::int(max_within as i64) <= b);
    let cross_group_bound_ok = bound.is_none_or(|b| rational::int(max_cross as i64) <= b);
    if let (false, Some((g, x, y)), Some(b)) = (within_group_bound_ok, within_witness, bound) {
        issues.push(format!(
            "group {g} sets {x} and {y} share {max_within} elements, above {}",
            rational::format(&b)
        ));
    }

    let yes_witness = find_disjoint_cover(cs.universe, &cs.groups, WITNESS_SEARCH_LIMIT);

    let valid = issues.is_empty();
    let well_structured = cs.universe == k * cs.s
        && uniform_set_size
        && (k == 0 || sets_per_group.is_some())
        && within_group_bound_ok;
    CoverReport {
        k,
        universe: cs.universe,
        s: cs.s,
        uniform_set_size,
        sets_per_group,
        degree,
        universe_covered,
        max_within_group_intersection: max_within,
        max_cross_group_intersection: max_cross,
        intersection_bound: bound,
        within_group_bound_ok,
        cross_group_bound_ok,
        yes_witness,
        issues,
        valid,
        well_structured,
    }
}

#[derive(Serialize, Deserialize)]
struct CoverDoc {
    #[serde(default = "default_schema")]
    schema_version: u32,
    universe: usize,
    s: usize,
    #[serde(default, with = "rational::serde_str_opt", skip_serializing_if = "Option::is_none")]
    epsilon: Option<Rational>,
    groups: Vec<Vec<Vec<usize>>>,
}

fn default_schema() -> u32 {
    SCHEMA_VERSION
}

impl From<CoverSystem> for CoverDoc {
    fn from(cs: CoverSystem) -> Self {
        CoverDoc {
            schema_version: SCHEMA_VERSION,
            universe: cs.universe,
            s: cs.s,
            epsilon: cs.epsilon,
            groups: cs
                .groups
                .iter()
                .map(|g| g.iter().map(ItemSet::to_vec).collect())
                .collect(),
        }
    }
}

impl TryFrom<CoverDoc> for CoverSystem {
    type Error = Error;

    fn try_from(doc: CoverDoc) -> Result<Self> {
        if doc.schema_version != SCHEMA_VERSION {
            return Err(Error::Malformed(format!(
                "unsupported schema_version {}",
                doc.schema_version
            )));
        }
        let groups = doc
            .groups
            .into_iter()
            .map(|g| {
                g.into_iter()
                    .map(|set| ItemSet::from_indices(doc.universe, set))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::Malformed(e.to_string()))?;
        CoverSystem::new(doc.universe, doc.s, doc.epsilon, groups)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use crate::set_systems::{
        collection_from_disjointness, generate_partition_family, make_disjointness,
        DisjointnessCase,
    };

    const HAND_BUILT: &str =
        r#"{"universe":4,"s":2,"groups":[[[0,1],[2,3]],[[2,3],[0,1]]]}"#;

    #[test]
    fn hand_built_partition_system() {
        let cs = ingest_cover_system(HAND_BUILT).unwrap();
        let report = validate_cover_system(&cs);
        assert!(report.valid, "{:?}", report.issues);
        assert!(report.well_structured);
        assert_eq!(report.sets_per_group, Some(2));
        assert_eq!(report.degree, Some(2));
        assert_eq!(report.max_within_group_intersection, 0);
        assert_eq!(report.max_cross_group_intersection, 2);
        assert_eq!(
            report.yes_witness,
            YesWitness::Found {
                choice: vec![0, 0]
            }
        );
    }

    #[test]
    fn oversized_set_is_named() {
        let doc = r#"{"universe":4,"s":2,"groups":[[[0,1,2],[2,3]],[[2,3],[0,1]]]}"#;
        let report = validate_cover_system(&ingest_cover_system(doc).unwrap());
        assert!(!report.valid);
        assert!(report.issues[0].contains("group 0 set 0 {0, 1, 2} has size 3"));
    }

    #[test]
    fn within_group_bound_enforced() {
        let doc = r#"{"universe":4,"s":2,"epsilon":"0/1","groups":[[[0,1],[1,2]],[[2,3],[0,3]]]}"#;
        let report = validate_cover_system(&ingest_cover_system(doc).unwrap());
        assert!(!report.within_group_bound_ok);
        assert!(!report.valid);
        assert!(!report.well_structured);
    }

    #[test]
    fn malformed_documents_rejected() {
        assert!(matches!(ingest_cover_system("{"), Err(Error::Malformed(_))));
        let out_of_range = r#"{"universe":3,"s":2,"groups":[[[0,5]]]}"#;
        assert!(matches!(ingest_cover_system(out_of_range), Err(Error::Malformed(_))));
        let bad_eps = r#"{"universe":2,"s":1,"epsilon":"x","groups":[[[0]],[[1]]]}"#;
        assert!(ingest_cover_system(bad_eps).is_err());
    }

    #[test]
    fn witness_search_skips_large_systems() {
        let group: Vec<Vec<usize>> = (0..40).map(|i| vec![i]).collect();
        let groups: Vec<_> = (0..4).map(|_| group.clone()).collect();
        let doc = serde_json::json!({"universe": 40, "s": 1, "groups": groups});
        let report = validate_cover_system(&ingest_cover_system(&doc.to_string()).unwrap());
        // 40^4 > 10^6
        assert!(matches!(report.yes_witness, YesWitness::Skipped { .. }));
    }

    #[test]
    fn no_like_system_from_disjointness_is_well_structured() {
        let fam = generate_partition_family(2, 40, 6, ratio(1, 2), 8).unwrap();
        let inst = make_disjointness(2, 6, DisjointnessCase::No, 3, 5).unwrap();
        let col = collection_from_disjointness(&fam, &inst, CollectionMode::PerPlayer).unwrap();
        let cs = CoverSystem::from(&col);
        let json = serde_json::to_string(&cs).unwrap();
        let report = validate_cover_system(&ingest_cover_system(&json).unwrap());
        assert_eq!(report.well_structured, col.validate().well_structured);
        assert!(report.well_structured);
        assert!(matches!(report.yes_witness, YesWitness::NotFound { .. }));
    }
}
