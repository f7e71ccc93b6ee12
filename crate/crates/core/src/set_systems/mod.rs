//! Well-structured set systems: random partition families, Set Disjointness
//! inputs, the collections built from them, and ingested cover systems.

mod collection;
mod cover;
mod disjointness;
mod partition;

pub use collection::{
    collection_from_disjointness, CollectionMode, CollectionReport, WellStructuredCollection,
    YesWitness,
};
pub use cover::{
    ingest_cover_system, validate_cover_system, CoverReport, CoverSystem, WITNESS_SEARCH_LIMIT,
};
pub use disjointness::{make_disjointness, DisjointnessCase, DisjointnessInstance};
pub use partition::{
    generate_partition_family, verify_pairwise, verify_union_bounds, PairwiseReport,
    PartitionFamily, UnionEllReport, UnionReport, EXHAUSTIVE_UNION_LIMIT,
};
