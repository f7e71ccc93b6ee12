//! Multi-party Set Disjointness inputs: `k` bitstrings of length `t`.
//! YES instances share a column where every player holds a one, NO
//! instances have every column held by at most one player.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::SCHEMA_VERSION;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DisjointnessCase {
    Yes,
    No,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "DisjointnessDoc", into = "DisjointnessDoc")]
pub struct DisjointnessInstance {
    t: usize,
    case: DisjointnessCase,
    seed: Option<u64>,
    /// `bits[i][j]` is bit `j` of player `i`.
    bits: Vec<Vec<bool>>,
}

impl DisjointnessInstance {
    pub fn new(t: usize, case: DisjointnessCase, bits: Vec<Vec<bool>>) -> Result<Self> {
        for (i, row) in bits.iter().enumerate() {
            if row.len() != t {
                return Err(Error::Malformed(format!(
                    "player {i} holds {} bits, expected {t}",
                    row.len()
                )));
            }
        }
        Ok(DisjointnessInstance {
            t,
            case,
            seed: None,
            bits,
        })
    }

    pub fn k(&self) -> usize {
        self.bits.len()
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn case(&self) -> DisjointnessCase {
        self.case
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn bit(&self, player: usize, column: usize) -> bool {
        self.bits[player][column]
    }

    pub fn row(&self, player: usize) -> &[bool] {
        &self.bits[player]
    }

    /// Number of ones held by each player.
    pub fn row_weights(&self) -> Vec<usize> {
        self.bits
            .iter()
            .map(|r| r.iter().filter(|&&b| b).count())
            .collect()
    }

    /// Columns in which every player holds a one.
    pub fn common_columns(&self) -> Vec<usize> {
        (0..self.t)
            .filter(|&j| !self.bits.is_empty() && self.bits.iter().all(|r| r[j]))
            .collect()
    }

    /// The case the bits actually satisfy, independent of the stored tag.
    pub fn classify(&self) -> DisjointnessCase {
        if !self.common_columns().is_empty() {
            return DisjointnessCase::Yes;
        }
        let pairwise_disjoint =
            (0..self.t).all(|j| self.bits.iter().filter(|r| r[j]).count() <= 1);
        if pairwise_disjoint {
            DisjointnessCase::No
        } else {
            DisjointnessCase::Unknown
        }
    }

    /// Checks that the stored tag matches the bits. An `Unknown` tag
    /// matches anything.
    pub fn validate(&self) -> Result<()> {
        let actual = self.classify();
        if self.case == DisjointnessCase::Unknown || self.case == actual {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "instance is tagged {:?} but its bits are {:?}",
                self.case, actual
            )))
        }
    }
}

/// Draws a promise instance with exactly `ones_per_player` ones per player.
/// Equal row weights give equally sized groups in the derived collection.
pub fn make_disjointness(
    k: usize,
    t: usize,
    case: DisjointnessCase,
    ones_per_player: usize,
    seed: u64,
) -> Result<DisjointnessInstance> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("k must be at least 2, got {k}")));
    }
    let w = ones_per_player;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bits = vec![vec![false; t]; k];
    match case {
        DisjointnessCase::Yes => {
            if w == 0 || w > t {
                return Err(Error::InvalidParameter(format!(
                    "a YES instance needs 1 <= ones_per_player <= t, got {w} with t = {t}"
                )));
            }
            let common = rng.gen_range(0..t);
            let others: Vec<usize> = (0..t).filter(|&j| j != common).collect();
            for row in &mut bits {
                row[common] = true;
                for idx in rand::seq::index::sample(&mut rng, others.len(), w - 1) {
                    row[others[idx]] = true;
                }
            }
        }
        DisjointnessCase::No => {
            if k * w > t {
                return Err(Error::InvalidParameter(format!(
                    "a NO instance needs k * ones_per_player <= t, got {k} * {w} > {t}"
                )));
            }
            let mut columns: Vec<usize> = (0..t).collect();
            columns.shuffle(&mut rng);
            for (i, row) in bits.iter_mut().enumerate() {
                for &j in &columns[i * w..(i + 1) * w] {
                    row[j] = true;
                }
            }
        }
        DisjointnessCase::Unknown => {
            return Err(Error::InvalidParameter(
                "can only generate YES or NO instances".into(),
            ))
        }
    }
    Ok(DisjointnessInstance {
        t,
        case,
        seed: Some(seed),
        bits,
    })
}

#[derive(Serialize, Deserialize)]
struct DisjointnessDoc {
    schema_version: u32,
    k: usize,
    t: usize,
    case: DisjointnessCase,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    /// One `0`/`1` string per player.
    strings: Vec<String>,
}

impl From<DisjointnessInstance> for DisjointnessDoc {
    fn from(inst: DisjointnessInstance) -> Self {
        DisjointnessDoc {
            schema_version: SCHEMA_VERSION,
            k: inst.k(),
            t: inst.t,
            case: inst.case,
            seed: inst.seed,
            strings: inst
                .bits
                .iter()
                .map(|r| r.iter().map(|&b| if b { '1' } else { '0' }).collect())
                .collect(),
        }
    }
}

impl TryFrom<DisjointnessDoc> for DisjointnessInstance {
    type Error = Error;

    fn try_from(doc: DisjointnessDoc) -> Result<Self> {
        if doc.strings.len() != doc.k {
            return Err(Error::Malformed(format!(
                "k = {} but {} strings are listed",
                doc.k,
                doc.strings.len()
            )));
        }
        let bits = doc
            .strings
            .iter()
            .map(|s| {
                s.chars()
                    .map(|c| match c {
                        '0' => Ok(false),
                        '1' => Ok(true),
                        other => Err(Error::Malformed(format!("bad bit {other:?}"))),
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let mut inst = DisjointnessInstance::new(doc.t, doc.case, bits)?;
        inst.seed = doc.seed;
        Ok(inst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn yes_has_common_column_and_equal_weights() {
        for seed in 0..20 {
            let inst = make_disjointness(3, 10, DisjointnessCase::Yes, 3, seed).unwrap();
            assert_eq!(inst.classify(), DisjointnessCase::Yes);
            assert!(!inst.common_columns().is_empty());
            assert_eq!(inst.row_weights(), vec![3, 3, 3]);
            inst.validate().unwrap();
        }
    }

    #[test]
    fn no_is_pairwise_disjoint() {
        for seed in 0..20 {
            let inst = make_disjointness(3, 10, DisjointnessCase::No, 3, seed).unwrap();
            assert_eq!(inst.classify(), DisjointnessCase::No);
            assert_eq!(inst.row_weights(), vec![3, 3, 3]);
        }
        assert!(make_disjointness(3, 8, DisjointnessCase::No, 3, 0).is_err());
        assert!(make_disjointness(3, 8, DisjointnessCase::Yes, 0, 0).is_err());
    }

    #[test]
    fn mislabeled_instance_fails_validation() {
        let inst = DisjointnessInstance::new(
            2,
            DisjointnessCase::No,
            vec![vec![true, false], vec![true, true]],
        )
        .unwrap();
        assert_eq!(inst.classify(), DisjointnessCase::Yes);
        assert!(inst.validate().is_err());
        let neither = DisjointnessInstance::new(
            3,
            DisjointnessCase::Unknown,
            vec![vec![true, true, false], vec![false, true, true], vec![true, false, true]],
        )
        .unwrap();
        assert_eq!(neither.classify(), DisjointnessCase::Unknown);
        neither.validate().unwrap();
    }

    #[test]
    fn json_uses_bitstrings() {
        let inst = make_disjointness(2, 4, DisjointnessCase::No, 2, 1).unwrap();
        let json = serde_json::to_value(&inst).unwrap();
        assert_eq!(json["case"], "no");
        assert_eq!(json["strings"][0].as_str().unwrap().len(), 4);
        let back: DisjointnessInstance = serde_json::from_value(json).unwrap();
        assert_eq!(back, inst);
        let bad = r#"{"schema_version":1,"k":2,"t":2,"case":"yes","strings":["11","1"]}"#;
        assert!(serde_json::from_str::<DisjointnessInstance>(bad).is_err());
    }

    #[test]
    fn empty_strings_allowed() {
        let inst = make_disjointness(2, 0, DisjointnessCase::No, 0, 0).unwrap();
        assert_eq!(inst.t(), 0);
        assert_eq!(inst.classify(), DisjointnessCase::No);
    }
}
