//! Multi-peak submodular valuations.
//!
//! Given a family of "peak" sets whose members pairwise share at most `b`
//! items, a multi-peak function assigns an elevated value to every set that
//! is `b`-close to some peak and the concave cardinality value
//! `1 - (1 - a|S|)₊²` to everything else. The peak case is
//!
//! ```text
//! f(S) = 1 - (1 - a(2|S ∩ A| - b))₊ · (1 - a(2|S \ A| + b))₊
//! ```
//!
//! where `A` is the unique peak with `|S ∩ A| - |S \ A| > b`. All values are
//! exact rationals in `[0, 1]`.

use std::borrow::Cow;

use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::itemset::ItemSet;
use crate::rational::{self, positive_part, Rational};

/// A set function over the ground set `0..ground_size()`.
///
/// The verifiers in [`crate::verify`] and the solvers accept anything that
/// implements this, which lets tests feed them deliberately broken mutants.
pub trait SetFunction: Sync {
    fn ground_size(&self) -> usize;
    fn value(&self, set: &ItemSet) -> Rational;
}

/// `|S ∩ A| - |S \ A|`. `S` is b-close to `A` iff this exceeds `b`.
pub fn closeness(set: &ItemSet, peak: &ItemSet) -> i64 {
    set.intersection_len(peak) as i64 - set.difference_len(peak) as i64
}

/// Value of a set with `inside` items in its close peak and `outside` items
/// elsewhere.
pub fn peak_formula(a: &Rational, b: &Rational, inside: usize, outside: usize) -> Rational {
    let one = Rational::one();
    let inside = rational::int(inside as i64);
    let outside = rational::int(outside as i64);
    let two = rational::int(2);
    let first = positive_part(one - a * (two * inside - b));
    let second = positive_part(one - a * (two * outside + b));
    one - first * second
}

/// `1 - (1 - a·n)₊²`.
pub fn far_formula(a: &Rational, n: usize) -> Rational {
    let slack = positive_part(Rational::one() - a * rational::int(n as i64));
    Rational::one() - slack * slack
}

/// An ordered list of distinct peaks and the closeness threshold `b`.
#[derive(Clone, Debug, PartialEq)]
pub struct PeakFamily {
    peaks: Vec<ItemSet>,
    b: Rational,
}

impl PeakFamily {
    /// Builds a family, rejecting duplicates and pairs sharing more than `b`
    /// items.
    pub fn new(peaks: Vec<ItemSet>, b: Rational) -> Result<Self> {
        let family = Self::new_unchecked(peaks, b);
        family.check_shape()?;
        for (first, p) in family.peaks.iter().enumerate() {
            for (second, q) in family.peaks.iter().enumerate().skip(first + 1) {
                if p == q {
                    return Err(Error::DuplicatePeak { first, second });
                }
            }
        }
        if let Some((first, second, overlap)) = family.intersecting_violation() {
            return Err(Error::NotBIntersecting {
                first,
                second,
                overlap,
                b: rational::format(&family.b),
            });
        }
        Ok(family)
    }

    /// Builds a family without the `b`-intersecting check. Evaluation on such
    /// a family uses the lowest-index close peak; [`MultiPeakValuation::close_peak`]
    /// reports the ambiguity.
    pub fn new_unchecked(peaks: Vec<ItemSet>, b: Rational) -> Self {
        PeakFamily { peaks, b }
    }

    fn check_shape(&self) -> Result<()> {
        if self.b.is_negative() {
            return Err(Error::InvalidParameter(format!(
                "b must be non-negative, got {}",
                rational::format(&self.b)
            )));
        }
        if let Some(first) = self.peaks.first() {
            for p in &self.peaks[1..] {
                first.same_universe(p)?;
            }
        }
        Ok(())
    }

    pub fn peaks(&self) -> &[ItemSet] {
        &self.peaks
    }

    pub fn b(&self) -> &Rational {
        &self.b
    }

    pub fn len(&self) -> usize {
        self.peaks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.peaks.is_empty()
    }

    /// First pair `(i, j, |A_i ∩ A_j|)` sharing more than `b` items.
    pub fn intersecting_violation(&self) -> Option<(usize, usize, usize)> {
        for (i, p) in self.peaks.iter().enumerate() {
            for (j, q) in self.peaks.iter().enumerate().skip(i + 1) {
                let overlap = p.intersection_len(q);
                if rational::int(overlap as i64) > self.b {
                    return Some((i, j, overlap));
                }
            }
        }
        None
    }

    pub fn is_b_intersecting(&self) -> bool {
        self.intersecting_violation().is_none()
    }

    pub fn position(&self, peak: &ItemSet) -> Option<usize> {
        self.peaks.iter().position(|p| p == peak)
    }
}

/// An `(F, a, b)`-multi-peak function, optionally restricted to a support.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ValuationDoc", into = "ValuationDoc")]
pub struct MultiPeakValuation {
    m: usize,
    family: PeakFamily,
    a: Rational,
    support: Option<ItemSet>,
}

impl MultiPeakValuation {
    pub fn new(
        m: usize,
        family: PeakFamily,
        a: Rational,
        support: Option<ItemSet>,
    ) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("ground set must be non-empty".into()));
        }
        if !a.is_positive() {
            return Err(Error::InvalidParameter(format!(
                "a must be positive, got {}",
                rational::format(&a)
            )));
        }
        family.check_shape()?;
        for peak in family.peaks() {
            if peak.universe() != m {
                return Err(Error::UniverseMismatch {
                    left: m,
                    right: peak.universe(),
                });
            }
        }
        if let Some(support) = &support {
            if support.universe() != m {
                return Err(Error::UniverseMismatch {
                    left: m,
                    right: support.universe(),
                });
            }
            if let Some(i) = family.peaks().iter().position(|p| !p.is_subset(support)) {
                return Err(Error::PeakOutsideSupport(i));
            }
        }
        Ok(MultiPeakValuation {
            m,
            family,
            a,
            support,
        })
    }

    /// A valuation with no peaks: `1 - (1 - a|S|)₊²` everywhere.
    pub fn far_only(m: usize, a: Rational) -> Result<Self> {
        Self::new(m, PeakFamily::new_unchecked(Vec::new(), rational::zero()), a, None)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }

    pub fn b(&self) -> &Rational {
        self.family.b()
    }

    pub fn family(&self) -> &PeakFamily {
        &self.family
    }

    pub fn peaks(&self) -> &[ItemSet] {
        self.family.peaks()
    }

    pub fn support(&self) -> Option<&ItemSet> {
        self.support.as_ref()
    }

    /// Items the function depends on.
    pub fn effective_support(&self) -> ItemSet {
        self.support
            .clone()
            .unwrap_or_else(|| ItemSet::full(self.m))
    }

    /// Non-fatal observations about the parameters.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.a >= Rational::one() {
            out.push(format!(
                "a = {} >= 1: every non-empty set is saturated",
                rational::format(&self.a)
            ));
        }
        if let Some((i, j, overlap)) = self.family.intersecting_violation() {
            out.push(format!(
                "peaks {i} and {j} share {overlap} items, more than b = {}",
                rational::format(self.b())
            ));
        }
        out
    }

    pub(crate) fn restrict<'s>(&self, set: &'s ItemSet) -> Cow<'s, ItemSet> {
        match &self.support {
            Some(support) => Cow::Owned(set.intersection(support)),
            None => Cow::Borrowed(set),
        }
    }

    fn is_close(&self, set: &ItemSet, peak: &ItemSet) -> bool {
        rational::int(closeness(set, peak)) > *self.b()
    }

    /// The unique peak `set` is b-close to, after restricting to the support.
    pub fn close_peak(&self, set: &ItemSet) -> Result<Option<usize>> {
        let set = self.restrict(set);
        let mut found = None;
        for (i, peak) in self.peaks().iter().enumerate() {
            if self.is_close(&set, peak) {
                if let Some(first) = found {
                    return Err(Error::FamilyIntegrity { first, second: i });
                }
                found = Some(i);
            }
        }
        Ok(found)
    }

    /// Peak maximizing `|S ∩ A| - |S \ A|`, ties to the lowest index.
    pub fn closest_peak(&self, set: &ItemSet) -> Option<(usize, i64)> {
        let set = self.restrict(set);
        let mut best: Option<(usize, i64)> = None;
        for (i, peak) in self.peaks().iter().enumerate() {
            let c = closeness(&set, peak);
            if best.is_none_or(|(_, bc)| c > bc) {
                best = Some((i, c));
            }
        }
        best
    }

    pub fn eval(&self, set: &ItemSet) -> Rational {
        debug_assert_eq!(set.universe(), self.m);
        let set = self.restrict(set);
        match self.peaks().iter().find(|p| self.is_close(&set, p)) {
            Some(peak) => peak_formula(
                &self.a,
                self.b(),
                set.intersection_len(peak),
                set.difference_len(peak),
            ),
            None => far_formula(&self.a, set.len()),
        }
    }

    /// `f(S ∪ {i}) - f(S)`.
    pub fn marginal(&self, set: &ItemSet, item: usize) -> Result<Rational> {
        if item >= self.m {
            return Err(Error::ItemOutOfRange {
                index: item,
                universe: self.m,
            });
        }
        if set.contains(item) {
            return Err(Error::ItemAlreadyPresent(item));
        }
        Ok(self.eval(&set.with(item)) - self.eval(set))
    }
}

impl SetFunction for MultiPeakValuation {
    fn ground_size(&self) -> usize {
        self.m
    }

    fn value(&self, set: &ItemSet) -> Rational {
        self.eval(set)
    }
}

/// Wire form: `{ m, a: "p/q", b: "p/q", support: [..] | null, peaks: [[..], ..] }`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ValuationDoc {
    pub m: usize,
    #[serde(with = "rational::serde_str")]
    pub a: Rational,
    #[serde(with = "rational::serde_str")]
    pub b: Rational,
    pub support: Option<Vec<usize>>,
    pub peaks: Vec<Vec<usize>>,
}

impl TryFrom<ValuationDoc> for MultiPeakValuation {
    type Error = Error;

    fn try_from(doc: ValuationDoc) -> Result<Self> {
        let peaks = doc
            .peaks
            .into_iter()
            .map(|p| ItemSet::from_indices(doc.m, p))
            .collect::<Result<Vec<_>>>()?;
        let support = doc
            .support
            .map(|s| ItemSet::from_indices(doc.m, s))
            .transpose()?;
        MultiPeakValuation::new(doc.m, PeakFamily::new_unchecked(peaks, doc.b), doc.a, support)
    }
}

impl From<MultiPeakValuation> for ValuationDoc {
    fn from(v: MultiPeakValuation) -> Self {
        ValuationDoc {
            m: v.m,
            b: v.family.b,
            a: v.a,
            support: v.support.map(|s| s.to_vec()),
            peaks: v.family.peaks.iter().map(ItemSet::to_vec).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn set(m: usize, items: &[usize]) -> ItemSet {
        ItemSet::from_indices(m, items.iter().copied()).unwrap()
    }

    fn single_peak_m8() -> MultiPeakValuation {
        let family = PeakFamily::new(vec![set(8, &[0, 1, 2, 3])], int(1)).unwrap();
        MultiPeakValuation::new(8, family, ratio(1, 8), None).unwrap()
    }

    #[test]
    fn closeness_examples() {
        let a = set(8, &[0, 1, 2, 3]);
        assert_eq!(closeness(&set(8, &[0, 1, 2]), &a), 3);
        assert_eq!(closeness(&set(8, &[0, 4]), &a), 0);
        assert_eq!(closeness(&a, &a), 4);
    }

    #[test]
    fn close_peak_examples() {
        let family = PeakFamily::new(
            vec![set(8, &[0, 1, 2, 3]), set(8, &[4, 5, 6, 7])],
            int(1),
        )
        .unwrap();
        let v = MultiPeakValuation::new(8, family, ratio(1, 8), None).unwrap();
        assert_eq!(v.close_peak(&set(8, &[0, 1, 2])).unwrap(), Some(0));
        assert_eq!(v.close_peak(&set(8, &[0, 1, 4, 5])).unwrap(), None);

        let family = PeakFamily::new(vec![set(2, &[0, 1])], int(0)).unwrap();
        let v = MultiPeakValuation::new(2, family, ratio(1, 2), None).unwrap();
        assert_eq!(v.close_peak(&set(2, &[0])).unwrap(), Some(0));
    }

    #[test]
    fn close_peak_reports_integrity_violation() {
        let family = PeakFamily::new_unchecked(vec![set(4, &[0, 1, 2]), set(4, &[0, 1, 3])], int(0));
        let v = MultiPeakValuation::new(4, family, ratio(1, 4), None).unwrap();
        assert_eq!(
            v.close_peak(&set(4, &[0, 1])),
            Err(Error::FamilyIntegrity {
                first: 0,
                second: 1
            })
        );
    }

    #[test]
    fn closeness_equal_to_b_uses_far_case() {
        // closeness({0,1}, {0,1,2,3}) = 2 = b
        let family = PeakFamily::new(vec![set(8, &[0, 1, 2, 3])], int(2)).unwrap();
        let v = MultiPeakValuation::new(8, family, ratio(1, 8), None).unwrap();
        assert_eq!(v.close_peak(&set(8, &[0, 1])).unwrap(), None);
        assert_eq!(v.eval(&set(8, &[0, 1])), far_formula(&ratio(1, 8), 2));
    }

    #[test]
    fn eval_examples() {
        let v = single_peak_m8();
        assert_eq!(v.eval(&set(8, &[0, 1, 2, 3])), ratio(57, 64));
        assert_eq!(v.eval(&ItemSet::empty(8)), int(0));
        assert_eq!(v.eval(&set(8, &[4, 5, 6, 7])), ratio(3, 4));
    }

    #[test]
    fn marginal_examples() {
        let v = single_peak_m8();
        assert_eq!(v.marginal(&ItemSet::empty(8), 0).unwrap(), ratio(15, 64));
        assert_eq!(v.marginal(&set(8, &[4]), 5).unwrap(), ratio(13, 64));
        assert_eq!(
            v.marginal(&set(8, &[4]), 4),
            Err(Error::ItemAlreadyPresent(4))
        );

        // a = 1 saturates every non-empty far set.
        let family = PeakFamily::new(vec![set(8, &[0, 1, 2, 3])], int(1)).unwrap();
        let saturated = MultiPeakValuation::new(8, family, int(1), None).unwrap();
        let all_but_last = set(8, &[0, 1, 2, 3, 4, 5, 6]);
        assert_eq!(saturated.eval(&all_but_last), int(1));
        assert_eq!(saturated.marginal(&all_but_last, 7).unwrap(), int(0));
    }

    #[test]
    fn support_restriction_ignores_outside_items() {
        let family = PeakFamily::new(vec![set(8, &[0, 1])], int(0)).unwrap();
        let v = MultiPeakValuation::new(8, family, ratio(1, 4), Some(set(8, &[0, 1, 2]))).unwrap();
        assert_eq!(v.eval(&set(8, &[5, 6, 7])), int(0));
        assert_eq!(v.eval(&set(8, &[0, 1, 7])), v.eval(&set(8, &[0, 1])));
        assert_eq!(v.eval(&set(8, &[0, 1])), int(1));
    }

    #[test]
    fn constructor_rejections() {
        assert!(matches!(
            PeakFamily::new(vec![set(4, &[0, 1, 2]), set(4, &[0, 1, 3])], int(1)),
            Err(Error::NotBIntersecting { first: 0, second: 1, overlap: 2, .. })
        ));
        assert!(matches!(
            PeakFamily::new(vec![set(4, &[0, 1]), set(4, &[0, 1])], int(5)),
            Err(Error::DuplicatePeak { .. })
        ));
        let family = PeakFamily::new(vec![set(4, &[0, 1])], int(0)).unwrap();
        assert!(MultiPeakValuation::new(4, family.clone(), int(0), None).is_err());
        assert_eq!(
            MultiPeakValuation::new(4, family, int(1), Some(set(4, &[0]))),
            Err(Error::PeakOutsideSupport(0))
        );
    }

    #[test]
    fn warns_on_saturating_scale() {
        let v = MultiPeakValuation::far_only(3, int(2)).unwrap();
        assert_eq!(v.warnings().len(), 1);
        assert!(single_peak_m8().warnings().is_empty());
    }

    #[test]
    fn json_shape() {
        let v = single_peak_m8();
        let json = serde_json::to_value(&v).unwrap();
        assert_eq!(
            json,
            serde_json::json!({"m": 8, "a": "1/8", "b": "1/1", "support": null, "peaks": [[0, 1, 2, 3]]})
        );
        let back: MultiPeakValuation = serde_json::from_value(json).unwrap();
        assert_eq!(back, v);
        let bad = serde_json::json!({"m": 4, "a": "1/8", "b": "1/1", "support": null, "peaks": [[0, 9]]});
        assert!(serde_json::from_value::<MultiPeakValuation>(bad).is_err());
    }
}
