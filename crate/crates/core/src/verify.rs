//! Exhaustive and sampled checks of monotonicity, submodularity, close-peak
//! uniqueness and peak dominance.
//!
//! Up to [`EXHAUSTIVE_LIMIT`] items every subset is tabulated once and the
//! checks run against the table; beyond it, random `(S, i, j)` triples are
//! drawn from a seeded stream. Reports carry the first violation in sweep
//! order (subset mask, then item indices).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::continuous::{self, FractionalPoint};
use crate::error::Result;
use crate::itemset::ItemSet;
use crate::rational::{self, Rational};
use crate::valuation::{far_formula, peak_formula, MultiPeakValuation, SetFunction};

pub const EXHAUSTIVE_LIMIT: usize = 14;

#[derive(Clone, Copy, Debug)]
pub struct CheckOptions {
    pub exhaustive_limit: usize,
    pub samples: usize,
    pub seed: u64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            exhaustive_limit: EXHAUSTIVE_LIMIT,
            samples: 100_000,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub set: Vec<usize>,
    pub item: usize,
    pub other: Option<usize>,
    /// Left-hand side of the violated `lhs <= rhs`.
    #[serde(with = "rational::serde_str")]
    pub lhs: Rational,
    #[serde(with = "rational::serde_str")]
    pub rhs: Rational,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub property: &'static str,
    pub exhaustive: bool,
    pub checks: u64,
    pub violation: Option<Violation>,
}

impl CheckReport {
    pub fn pass(&self) -> bool {
        self.violation.is_none()
    }
}

pub(crate) fn par_find_first<T, F>(len: usize, f: F) -> Option<T>
where
    T: Send,
    F: Fn(usize) -> Option<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..len).into_par_iter().find_map_first(f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).find_map(f)
    }
}

pub(crate) fn par_collect<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..len).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).map(f).collect()
    }
}

/// `f` on every subset of `0..m`, indexed by bitmask.
pub fn value_table<F: SetFunction + ?Sized>(f: &F) -> Vec<Rational> {
    let m = f.ground_size();
    assert!(m < 32, "value table over {m} items");
    par_collect(1usize << m, |mask| f.value(&ItemSet::from_mask(m, mask as u64)))
}

fn members(m: usize, mask: usize) -> Vec<usize> {
    ItemSet::from_mask(m, mask as u64).to_vec()
}

/// `f(S) <= f(S ∪ {i})` for every `S` and `i ∉ S`.
pub fn check_monotone<F: SetFunction + ?Sized>(f: &F, opts: &CheckOptions) -> CheckReport {
    let m = f.ground_size();
    if m <= opts.exhaustive_limit {
        let table = value_table(f);
        let violation = par_find_first(1 << m, |mask| {
            (0..m).filter(|i| mask >> i & 1 == 0).find_map(|i| {
                let (lhs, rhs) = (&table[mask], &table[mask | 1 << i]);
                (lhs > rhs).then(|| Violation {
                    set: members(m, mask),
                    item: i,
                    other: None,
                    lhs: *lhs,
                    rhs: *rhs,
                })
            })
        });
        return CheckReport {
            property: "monotone",
            exhaustive: true,
            checks: (m as u64) << m.saturating_sub(1),
            violation,
        };
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut violation = None;
    for _ in 0..opts.samples {
        let set = random_set(&mut rng, m);
        let Some(i) = random_absent(&mut rng, &set) else { continue };
        let (lhs, rhs) = (f.value(&set), f.value(&set.with(i)));
        if lhs > rhs {
            violation = Some(Violation {
                set: set.to_vec(),
                item: i,
                other: None,
                lhs,
                rhs,
            });
            break;
        }
    }
    CheckReport {
        property: "monotone",
        exhaustive: false,
        checks: opts.samples as u64,
        violation,
    }
}

/// Marginal form of submodularity:
/// `f(S+i+j) - f(S+j) <= f(S+i) - f(S)` for `i < j` both outside `S`.
pub fn check_submodular<F: SetFunction + ?Sized>(f: &F, opts: &CheckOptions) -> CheckReport {
    let m = f.ground_size();
    if m <= opts.exhaustive_limit {
        let table = value_table(f);
        let violation = par_find_first(1 << m, |mask| {
            for i in (0..m).filter(|i| mask >> i & 1 == 0) {
                for j in (i + 1..m).filter(|j| mask >> j & 1 == 0) {
                    let lhs = table[mask | 1 << i | 1 << j] - table[mask | 1 << j];
                    let rhs = table[mask | 1 << i] - table[mask];
                    if lhs > rhs {
                        return Some(Violation {
                            set: members(m, mask),
                            item: i,
                            other: Some(j),
                            lhs,
                            rhs,
                        });
                    }
                }
            }
            None
        });
        let pairs = if m >= 2 { (m * (m - 1) / 2) as u64 } else { 0 };
        return CheckReport {
            property: "submodular",
            exhaustive: true,
            checks: pairs << m.saturating_sub(2),
            violation,
        };
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut violation = None;
    for _ in 0..opts.samples {
        let set = random_set(&mut rng, m);
        let Some(i) = random_absent(&mut rng, &set) else { continue };
        let Some(j) = random_absent(&mut rng, &set.with(i)) else { continue };
        let base = f.value(&set);
        let with_i = f.value(&set.with(i));
        let with_j = f.value(&set.with(j));
        let with_both = f.value(&set.with(i).with(j));
        let (lhs, rhs) = (with_both - with_j, with_i - base);
        if lhs > rhs {
            violation = Some(Violation {
                set: set.to_vec(),
                item: i,
                other: Some(j),
                lhs,
                rhs,
            });
            break;
        }
    }
    CheckReport {
        property: "submodular",
        exhaustive: false,
        checks: opts.samples as u64,
        violation,
    }
}

fn random_set(rng: &mut ChaCha8Rng, m: usize) -> ItemSet {
    let density: f64 = rng.gen();
    let mut set = ItemSet::empty(m);
    for i in 0..m {
        if rng.gen::<f64>() < density {
            set.insert(i);
        }
    }
    set
}

fn random_absent(rng: &mut ChaCha8Rng, set: &ItemSet) -> Option<usize> {
    let absent: Vec<usize> = (0..set.universe()).filter(|&i| !set.contains(i)).collect();
    if absent.is_empty() {
        None
    } else {
        Some(absent[rng.gen_range(0..absent.len())])
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct UniquenessReport {
    pub exhaustive: bool,
    pub checks: u64,
    /// A set b-close to two peaks, with the two peak indices.
    pub witness: Option<(Vec<usize>, usize, usize)>,
}

impl UniquenessReport {
    pub fn pass(&self) -> bool {
        self.witness.is_none()
    }
}

/// Searches for a set that is b-close to two peaks at once: every subset when
/// small, otherwise random sets biased toward pairs of peaks.
pub fn check_uniqueness(v: &MultiPeakValuation, opts: &CheckOptions) -> UniquenessReport {
    let m = v.m();
    let witness_of = |set: &ItemSet| match v.close_peak(set) {
        Err(crate::Error::FamilyIntegrity { first, second }) => Some((set.to_vec(), first, second)),
        _ => None,
    };
    if m <= opts.exhaustive_limit {
        let witness = par_find_first(1 << m, |mask| witness_of(&ItemSet::from_mask(m, mask as u64)));
        return UniquenessReport {
            exhaustive: true,
            checks: 1 << m,
            witness,
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let peaks = v.peaks();
    for n in 0..opts.samples {
        let set = if peaks.len() >= 2 && n % 2 == 0 {
            // adversarial: keep most of the overlap of two random peaks
            let p = rng.gen_range(0..peaks.len());
            let q = (p + rng.gen_range(1..peaks.len())) % peaks.len();
            let mut set = peaks[p].intersection(&peaks[q]);
            for i in peaks[p].union(&peaks[q]).iter() {
                if rng.gen::<f64>() < 0.3 {
                    set.insert(i);
                }
            }
            set
        } else {
            random_set(&mut rng, m)
        };
        if let Some(w) = witness_of(&set) {
            return UniquenessReport {
                exhaustive: false,
                checks: n as u64 + 1,
                witness: Some(w),
            };
        }
    }
    UniquenessReport {
        exhaustive: false,
        checks: opts.samples as u64,
        witness: None,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DominanceReport {
    pub exact_checks: u64,
    pub sampled_checks: u64,
    pub min_margin: f64,
    pub exact_violation: Option<Vec<usize>>,
    pub pass: bool,
}

/// Inside every region `B_A`, `F_A >= F`: exactly on all 0/1 points when the
/// ground set is small, and on random fractional points.
pub fn check_peak_dominance(
    v: &MultiPeakValuation,
    samples: usize,
    opts: &CheckOptions,
) -> Result<DominanceReport> {
    let m = v.m();
    let mut report = DominanceReport {
        exact_checks: 0,
        sampled_checks: 0,
        min_margin: f64::INFINITY,
        exact_violation: None,
        pass: true,
    };
    if m <= opts.exhaustive_limit {
        for mask in 0..1u64 << m {
            let set = ItemSet::from_mask(m, mask);
            let restricted = v.restrict(&set);
            for peak in v.peaks() {
                let c = crate::valuation::closeness(&restricted, peak);
                if rational::int(c) > *v.b() {
                    report.exact_checks += 1;
                    let peak_val = peak_formula(
                        v.a(),
                        v.b(),
                        restricted.intersection_len(peak),
                        restricted.difference_len(peak),
                    );
                    if peak_val < far_formula(v.a(), restricted.len())
                        && report.exact_violation.is_none()
                    {
                        report.exact_violation = Some(set.to_vec());
                    }
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0xD0D0);
    for peak in v.peaks() {
        for _ in 0..samples {
            let coords: Vec<f64> = (0..m)
                .map(|i| {
                    let u: f64 = rng.gen();
                    if peak.contains(i) {
                        u.sqrt()
                    } else {
                        u * u
                    }
                })
                .collect();
            let x = FractionalPoint::new(coords)?;
            if !continuous::in_peak_region(v, peak, &x)? {
                continue;
            }
            report.sampled_checks += 1;
            let margin = continuous::continuous_peak(v, peak, &x)? - continuous::continuous_base(v, &x)?;
            report.min_margin = report.min_margin.min(margin);
        }
    }
    report.pass = report.exact_violation.is_none() && !(report.min_margin < -1e-12);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use crate::valuation::PeakFamily;
    use num_traits::One;

    fn set(m: usize, items: &[usize]) -> ItemSet {
        ItemSet::from_indices(m, items.iter().copied()).unwrap()
    }

    fn two_peaks_m10() -> MultiPeakValuation {
        let family = PeakFamily::new(
            vec![set(10, &[0, 1, 2, 3, 4]), set(10, &[4, 5, 6, 7, 8])],
            int(1),
        )
        .unwrap();
        MultiPeakValuation::new(10, family, ratio(1, 10), None).unwrap()
    }

    /// The peak formula with the clamp dropped on the inside factor.
    struct UnclampedMutant(MultiPeakValuation);

    impl SetFunction for UnclampedMutant {
        fn ground_size(&self) -> usize {
            self.0.m()
        }
        fn value(&self, s: &ItemSet) -> Rational {
            let v = &self.0;
            match v.close_peak(s).unwrap() {
                Some(p) => {
                    let peak = &v.peaks()[p];
                    let two = int(2);
                    let x = int(s.intersection_len(peak) as i64);
                    let y = int(s.difference_len(peak) as i64);
                    let first = Rational::one() - v.a() * (two * x - v.b());
                    let second = rational::positive_part(Rational::one() - v.a() * (two * y + v.b()));
                    Rational::one() - first * second
                }
                None => v.eval(s),
            }
        }
    }

    #[test]
    fn valid_valuation_passes_exhaustively() {
        let v = two_peaks_m10();
        let opts = CheckOptions::default();
        let mono = check_monotone(&v, &opts);
        let sub = check_submodular(&v, &opts);
        assert!(mono.exhaustive && mono.pass());
        assert!(sub.exhaustive && sub.pass());
        assert_eq!(mono.checks, 10 * 512);
        assert_eq!(sub.checks, 45 * 256);
    }

    #[test]
    fn empty_family_is_concave_of_cardinality() {
        let v = MultiPeakValuation::far_only(9, ratio(1, 5)).unwrap();
        let opts = CheckOptions::default();
        assert!(check_monotone(&v, &opts).pass());
        assert!(check_submodular(&v, &opts).pass());
    }

    #[test]
    fn unclamped_mutant_fails_monotonicity() {
        // Once the inside factor goes negative the value exceeds 1, then falls
        // back as outside items arrive.
        let family = PeakFamily::new(vec![set(6, &[0, 1, 2])], int(0)).unwrap();
        let v = MultiPeakValuation::new(6, family, ratio(1, 2), None).unwrap();
        let report = check_monotone(&UnclampedMutant(v), &CheckOptions::default());
        let violation = report.violation.expect("mutant should violate monotonicity");
        assert!(violation.lhs > violation.rhs);
    }

    #[test]
    fn overlapping_family_is_flagged_by_submodularity() {
        // |A ∩ A'| = 3 = b + 2
        let family = PeakFamily::new_unchecked(
            vec![set(8, &[0, 1, 2, 3, 4]), set(8, &[2, 3, 4, 5, 6])],
            int(1),
        );
        let v = MultiPeakValuation::new(8, family, ratio(1, 10), None).unwrap();
        let opts = CheckOptions::default();
        let sub = check_submodular(&v, &opts);
        let uniq = check_uniqueness(&v, &opts);
        assert!(!uniq.pass());
        if let Some(w) = &sub.violation {
            assert!(w.other.is_some());
        }
        assert!(!sub.pass() || !check_monotone(&v, &opts).pass() || !uniq.pass());
    }

    #[test]
    fn sampled_mode_beyond_limit() {
        let family = PeakFamily::new(vec![set(20, &[0, 1, 2, 3, 4, 5])], int(2)).unwrap();
        let v = MultiPeakValuation::new(20, family, ratio(1, 12), None).unwrap();
        let opts = CheckOptions {
            samples: 2_000,
            seed: 9,
            ..CheckOptions::default()
        };
        let mono = check_monotone(&v, &opts);
        let sub = check_submodular(&v, &opts);
        assert!(!mono.exhaustive && mono.pass());
        assert!(!sub.exhaustive && sub.pass());
        assert!(check_uniqueness(&v, &opts).pass());
    }

    #[test]
    fn dominance_holds() {
        let v = two_peaks_m10();
        let report = check_peak_dominance(&v, 500, &CheckOptions::default()).unwrap();
        assert!(report.pass, "{report:?}");
        assert!(report.exact_checks > 0 && report.sampled_checks > 0);
        assert!(report.min_margin >= 0.0);
    }
}
