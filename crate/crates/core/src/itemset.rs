//! Fixed-universe bitsets over the ground set `0..m`.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

const WORD: usize = 64;

/// A subset of the ground set `{0, .., universe - 1}`.
///
/// Ordering is lexicographic over the ascending member lists, so `{0, 5}`
/// sorts before `{1}` and `{0}` before `{0, 1}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ItemSet {
    universe: usize,
    words: Vec<u64>,
}

impl ItemSet {
    pub fn empty(universe: usize) -> Self {
        ItemSet {
            universe,
            words: vec![0; universe.div_ceil(WORD)],
        }
    }

    pub fn full(universe: usize) -> Self {
        let mut set = Self::empty(universe);
        for (w, word) in set.words.iter_mut().enumerate() {
            let remaining = universe - w * WORD;
            *word = if remaining >= WORD {
                u64::MAX
            } else {
                (1u64 << remaining) - 1
            };
        }
        set
    }

    pub fn from_indices<I>(universe: usize, indices: I) -> Result<Self>
    where
        I: IntoIterator<Item = usize>,
    {
        let mut set = Self::empty(universe);
        for index in indices {
            if index >= universe {
                return Err(Error::ItemOutOfRange { index, universe });
            }
            set.insert(index);
        }
        Ok(set)
    }

    /// Builds the set whose members are the one bits of `mask`.
    ///
    /// # Panics
    ///
    /// If `mask` has a bit at or above `universe`.
    pub fn from_mask(universe: usize, mask: u64) -> Self {
        assert!(
            universe >= 64 || mask >> universe == 0,
            "mask {mask:#x} exceeds universe {universe}"
        );
        let mut set = Self::empty(universe);
        if let Some(first) = set.words.first_mut() {
            *first = mask;
        }
        set
    }

    /// The low 64 bits as a mask, if every member is below 64.
    pub fn to_mask(&self) -> Option<u64> {
        if self.words.iter().skip(1).any(|&w| w != 0) {
            return None;
        }
        Some(self.words.first().copied().unwrap_or(0))
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn contains(&self, index: usize) -> bool {
        index < self.universe && self.words[index / WORD] >> (index % WORD) & 1 == 1
    }

    /// Inserts `index`, returning whether it was absent.
    ///
    /// # Panics
    ///
    /// If `index` is outside the universe.
    pub fn insert(&mut self, index: usize) -> bool {
        assert!(index < self.universe, "item {index} outside universe {}", self.universe);
        let bit = 1u64 << (index % WORD);
        let word = &mut self.words[index / WORD];
        let fresh = *word & bit == 0;
        *word |= bit;
        fresh
    }

    pub fn remove(&mut self, index: usize) -> bool {
        if index >= self.universe {
            return false;
        }
        let bit = 1u64 << (index % WORD);
        let word = &mut self.words[index / WORD];
        let present = *word & bit != 0;
        *word &= !bit;
        present
    }

    pub fn with(&self, index: usize) -> Self {
        let mut set = self.clone();
        set.insert(index);
        set
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &word)| {
            let mut bits = word;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let tz = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(w * WORD + tz)
            })
        })
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    /// `|self ∩ other|`.
    pub fn intersection_len(&self, other: &ItemSet) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// `|self \ other|`.
    pub fn difference_len(&self, other: &ItemSet) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & !b).count_ones() as usize)
            .sum()
    }

    pub fn intersection(&self, other: &ItemSet) -> ItemSet {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn union(&self, other: &ItemSet) -> ItemSet {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn difference(&self, other: &ItemSet) -> ItemSet {
        self.zip_with(other, |a, b| a & !b)
    }

    pub fn union_with(&mut self, other: &ItemSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn is_subset(&self, other: &ItemSet) -> bool {
        self.difference_len(other) == 0
    }

    pub fn is_disjoint(&self, other: &ItemSet) -> bool {
        self.intersection_len(other) == 0
    }

    pub fn same_universe(&self, other: &ItemSet) -> Result<()> {
        if self.universe == other.universe {
            Ok(())
        } else {
            Err(Error::UniverseMismatch {
                left: self.universe,
                right: other.universe,
            })
        }
    }

    fn zip_with(&self, other: &ItemSet, op: impl Fn(u64, u64) -> u64) -> ItemSet {
        debug_assert_eq!(self.universe, other.universe);
        ItemSet {
            universe: self.universe,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(&a, &b)| op(a, b))
                .collect(),
        }
    }
}

impl Ord for ItemSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.iter()
            .cmp(other.iter())
            .then(self.universe.cmp(&other.universe))
    }
}

impl PartialOrd for ItemSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for ItemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for ItemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}
