//! Auction and public-project instances built from grouped set systems,
//! together with the closed-form YES values and NO bounds they are measured
//! against.

mod formulas;
mod profile;

pub use formulas::{
    cpp_far_value, gap_ratio, no_bound_formula, no_value_two_players, two_player_validity,
    yes_value_formula, yes_value_normalized, GapReport, GapTarget, NoBound, NoBoundTerm, Number,
    TwoPlayerValidity,
};
pub use profile::{
    normalized_profile_from_allocation, normalized_value, NormalizedProfile, ProfileCheck,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::itemset::ItemSet;
use crate::rational::{self, Rational};
use crate::set_systems::{CollectionMode, WellStructuredCollection};
use crate::valuation::{MultiPeakValuation, PeakFamily};
use crate::SCHEMA_VERSION;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Objective {
    Welfare,
    MaxMin,
    /// Choose one set of exactly `cardinality` items for every player.
    Cpp { cardinality: usize },
}

/// Where an instance came from and the parameters it was built with.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    pub s: usize,
    #[serde(with = "rational::serde_str")]
    pub a: Rational,
    #[serde(with = "rational::serde_str")]
    pub b: Rational,
    /// `a·s`.
    #[serde(with = "rational::serde_str")]
    pub alpha: Rational,
    /// `b/s`.
    #[serde(with = "rational::serde_str")]
    pub beta: Rational,
    #[serde(default, with = "rational::serde_str_opt")]
    pub effective_epsilon: Option<Rational>,
}

impl Provenance {
    pub fn new(source: impl Into<String>, s: usize, a: Rational, b: Rational) -> Self {
        let s_r = rational::int(s.max(1) as i64);
        Provenance {
            source: source.into(),
            s,
            a,
            b,
            alpha: a * s_r,
            beta: b / s_r,
            effective_epsilon: None,
        }
    }
}

/// Either one bundle per player or, for public projects, a single set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "AllocationDoc", into = "AllocationDoc")]
pub enum Allocation {
    Bundles(Vec<ItemSet>),
    Single(ItemSet),
}

impl Allocation {
    pub fn bundles(&self) -> Option<&[ItemSet]> {
        match self {
            Allocation::Bundles(b) => Some(b),
            Allocation::Single(_) => None,
        }
    }

    pub fn single(&self) -> Option<&ItemSet> {
        match self {
            Allocation::Single(s) => Some(s),
            Allocation::Bundles(_) => None,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct AllocationDoc {
    m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bundles: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    set: Option<Vec<usize>>,
}

impl From<Allocation> for AllocationDoc {
    fn from(alloc: Allocation) -> Self {
        match alloc {
            Allocation::Bundles(b) => AllocationDoc {
                m: b.first().map_or(0, ItemSet::universe),
                bundles: Some(b.iter().map(ItemSet::to_vec).collect()),
                set: None,
            },
            Allocation::Single(s) => AllocationDoc {
                m: s.universe(),
                bundles: None,
                set: Some(s.to_vec()),
            },
        }
    }
}

impl TryFrom<AllocationDoc> for Allocation {
    type Error = Error;

    fn try_from(doc: AllocationDoc) -> Result<Self> {
        match (doc.bundles, doc.set) {
            (Some(b), None) => Ok(Allocation::Bundles(
                b.into_iter()
                    .map(|x| ItemSet::from_indices(doc.m, x))
                    .collect::<Result<_>>()?,
            )),
            (None, Some(s)) => Ok(Allocation::Single(ItemSet::from_indices(doc.m, s)?)),
            _ => Err(Error::Malformed(
                "an allocation holds exactly one of `bundles` or `set`".into(),
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceDoc", into = "InstanceDoc")]
pub struct AuctionInstance {
    m: usize,
    valuations: Vec<MultiPeakValuation>,
    objective: Objective,
    provenance: Provenance,
}

impl AuctionInstance {
    pub fn new(
        m: usize,
        valuations: Vec<MultiPeakValuation>,
        objective: Objective,
        provenance: Provenance,
    ) -> Result<Self> {
        if valuations.is_empty() {
            return Err(Error::InvalidParameter("an instance needs at least one player".into()));
        }
        for v in &valuations {
            if v.m() != m {
                return Err(Error::UniverseMismatch {
                    left: m,
                    right: v.m(),
                });
            }
        }
        if let Objective::Cpp { cardinality } = objective {
            if cardinality > m {
                return Err(Error::InvalidParameter(format!(
                    "cardinality {cardinality} exceeds the {m} items"
                )));
            }
        }
        Ok(AuctionInstance {
            m,
            valuations,
            objective,
            provenance,
        })
    }

    pub fn k(&self) -> usize {
        self.valuations.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn valuations(&self) -> &[MultiPeakValuation] {
        &self.valuations
    }

    pub fn objective(&self) -> Objective {
        self.objective
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn with_objective(mut self, objective: Objective) -> Result<Self> {
        if let Objective::Cpp { cardinality } = objective {
            if cardinality > self.m {
                return Err(Error::InvalidParameter(format!(
                    "cardinality {cardinality} exceeds the {} items",
                    self.m
                )));
            }
        }
        self.objective = objective;
        Ok(self)
    }

    /// Checks the shape of `alloc` against the objective: `k` pairwise
    /// disjoint bundles, or one set of exactly the required cardinality.
    pub fn check_allocation(&self, alloc: &Allocation) -> Result<()> {
        match (self.objective, alloc) {
            (Objective::Cpp { cardinality }, Allocation::Single(set)) => {
                set.same_universe(&ItemSet::empty(self.m))?;
                if set.len() != cardinality {
                    return Err(Error::Infeasible(format!(
                        "set has {} items, expected {cardinality}",
                        set.len()
                    )));
                }
                Ok(())
            }
            (Objective::Welfare | Objective::MaxMin, Allocation::Bundles(bundles)) => {
                if bundles.len() != self.k() {
                    return Err(Error::LengthMismatch {
                        expected: self.k(),
                        found: bundles.len(),
                    });
                }
                let mut taken = ItemSet::empty(self.m);
                for (i, bundle) in bundles.iter().enumerate() {
                    bundle.same_universe(&taken)?;
                    if !taken.is_disjoint(bundle) {
                        return Err(Error::Infeasible(format!(
                            "bundle {i} reuses an item already allocated"
                        )));
                    }
                    taken.union_with(bundle);
                }
                Ok(())
            }
            _ => Err(Error::Infeasible(
                "allocation shape does not match the objective".into(),
            )),
        }
    }

    /// Each player's value under `alloc`.
    pub fn player_values(&self, alloc: &Allocation) -> Result<Vec<Rational>> {
        self.check_allocation(alloc)?;
        Ok(match alloc {
            Allocation::Bundles(bundles) => self
                .valuations
                .iter()
                .zip(bundles)
                .map(|(v, s)| v.eval(s))
                .collect(),
            Allocation::Single(set) => self.valuations.iter().map(|v| v.eval(set)).collect(),
        })
    }

    /// Sum of values, or the minimum for max-min.
    pub fn objective_value(&self, alloc: &Allocation) -> Result<Rational> {
        let values = self.player_values(alloc)?;
        Ok(match self.objective {
            Objective::MaxMin => values.into_iter().min().unwrap_or_else(rational::zero),
            _ => values.into_iter().sum(),
        })
    }
}

#[derive(Serialize, Deserialize)]
struct InstanceDoc {
    schema_version: u32,
    m: usize,
    objective: Objective,
    provenance: Provenance,
    valuations: Vec<MultiPeakValuation>,
}

impl From<AuctionInstance> for InstanceDoc {
    fn from(inst: AuctionInstance) -> Self {
        InstanceDoc {
            schema_version: SCHEMA_VERSION,
            m: inst.m,
            objective: inst.objective,
            provenance: inst.provenance,
            valuations: inst.valuations,
        }
    }
}

impl TryFrom<InstanceDoc> for AuctionInstance {
    type Error = Error;

    fn try_from(doc: InstanceDoc) -> Result<Self> {
        AuctionInstance::new(doc.m, doc.valuations, doc.objective, doc.provenance)
    }
}

/// `a = 1/(2s)` and the collection's own `b = (1 + ε)·s/k`.
pub fn communication_params(col: &WellStructuredCollection) -> (Rational, Rational) {
    (rational::ratio(1, 2 * col.s() as i64), *col.b())
}

/// `a = 1/(2s)`, `b = ε·s`.
pub fn cover_params(s: usize, epsilon: Rational) -> (Rational, Rational) {
    (rational::ratio(1, 2 * s as i64), epsilon * rational::int(s as i64))
}

/// `a = 2/(3s)`, `b = (1/2 + 2ε)·s`.
pub fn two_player_params(s: usize, epsilon: Rational) -> (Rational, Rational) {
    (
        rational::ratio(2, 3 * s as i64),
        (rational::ratio(1, 2) + rational::int(2) * epsilon) * rational::int(s as i64),
    )
}

fn player_valuations(
    col: &WellStructuredCollection,
    a: Rational,
    b: Rational,
) -> Result<Vec<MultiPeakValuation>> {
    if col.k() == 0 {
        return Err(Error::InvalidParameter("collection has no groups".into()));
    }
    if !(a > rational::zero()) {
        return Err(Error::InvalidParameter(format!(
            "a must be positive, got {}",
            rational::format(&a)
        )));
    }
    col.groups()
        .iter()
        .enumerate()
        .map(|(player, group)| {
            let family = PeakFamily::new(group.to_vec(), b).map_err(|e| match e {
                Error::NotBIntersecting {
                    first,
                    second,
                    overlap,
                    b,
                } => Error::PlayerNotBIntersecting {
                    player,
                    first,
                    second,
                    overlap,
                    b,
                },
                Error::DuplicatePeak { first, second } => Error::InvalidParameter(format!(
                    "player {player}: sets {first} and {second} are identical"
                )),
                other => other,
            })?;
            let support = (col.mode() == CollectionMode::Cover).then(|| {
                group.iter().fold(ItemSet::empty(col.m()), |acc, s| acc.union(s))
            });
            MultiPeakValuation::new(col.m(), family, a, support)
        })
        .collect()
}

fn provenance_for(col: &WellStructuredCollection, a: Rational, b: Rational) -> Provenance {
    let mut p = Provenance::new(
        format!("{:?} collection, k = {}", col.mode(), col.k()),
        col.s(),
        a,
        b,
    );
    let s = rational::int(col.s().max(1) as i64);
    p.effective_epsilon = Some(match col.mode() {
        CollectionMode::Cover => *col.b() / s,
        _ => *col.b() * rational::int(col.k() as i64) / s - rational::one(),
    });
    p
}

/// Player `i` receives the `(𝓢ᵢ, a, b)` multi-peak valuation. Cover
/// collections restrict each valuation to the union of its group.
pub fn build_welfare_instance(
    col: &WellStructuredCollection,
    a: Rational,
    b: Rational,
) -> Result<AuctionInstance> {
    let valuations = player_valuations(col, a, b)?;
    AuctionInstance::new(col.m(), valuations, Objective::Welfare, provenance_for(col, a, b))
}

/// Same valuations as the welfare instance, max-min objective.
pub fn build_maxmin_instance(
    col: &WellStructuredCollection,
    a: Rational,
    b: Rational,
) -> Result<AuctionInstance> {
    build_welfare_instance(col, a, b)?.with_objective(Objective::MaxMin)
}

/// Public-project instance over a shared-first-block collection, choosing
/// exactly `s` items.
pub fn build_cpp_instance(
    col: &WellStructuredCollection,
    a: Rational,
    b: Rational,
    s: usize,
) -> Result<AuctionInstance> {
    if col.mode() != CollectionMode::SharedFirst {
        return Err(Error::InvalidParameter(
            "public-project instances are built from shared-first collections".into(),
        ));
    }
    let valuations = player_valuations(col, a, b)?;
    AuctionInstance::new(
        col.m(),
        valuations,
        Objective::Cpp { cardinality: s },
        provenance_for(col, a, b),
    )
}
