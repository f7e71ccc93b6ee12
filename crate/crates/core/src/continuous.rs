//! Continuous extension of a multi-peak function on `[0,1]^m`.
//!
//! The base surface is `F(x) = 1 - (1 - aΣx)₊²`. Around each peak `A` the
//! region `B_A = { x : Σ_{A} x - Σ_{∉A} x > b }` carries
//! `F_A(x) = 1 - (1 - a(2Σ_A x - b))₊ (1 - a(2Σ_{∉A} x + b))₊`, and the glued
//! surface takes `F_A` inside `B_A` and `F` elsewhere. The two pieces agree in
//! value and gradient on the boundary of every `B_A`; the checks here sample
//! that boundary and compare central finite differences.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::itemset::ItemSet;
use crate::rational::to_f64;
use crate::valuation::MultiPeakValuation;

/// Central-difference step for gradient comparisons.
pub const FD_STEP: f64 = 1e-5;

#[derive(Clone, Debug, PartialEq)]
pub struct FractionalPoint(Vec<f64>);

impl FractionalPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if let Some(i) = coords.iter().position(|c| !(0.0..=1.0).contains(c)) {
            return Err(Error::InvalidParameter(format!(
                "coordinate {i} = {} is outside [0, 1]",
                coords[i]
            )));
        }
        Ok(FractionalPoint(coords))
    }

    pub fn zeros(m: usize) -> Self {
        FractionalPoint(vec![0.0; m])
    }

    pub fn indicator(set: &ItemSet) -> Self {
        let mut coords = vec![0.0; set.universe()];
        for i in set.iter() {
            coords[i] = 1.0;
        }
        FractionalPoint(coords)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }
}

fn pos(x: f64) -> f64 {
    x.max(0.0)
}

fn split_sums(peak: &ItemSet, x: &[f64]) -> (f64, f64) {
    x.iter().enumerate().fold((0.0, 0.0), |(inside, outside), (i, &xi)| {
        if peak.contains(i) {
            (inside + xi, outside)
        } else {
            (inside, outside + xi)
        }
    })
}

fn base_value(a: f64, x: &[f64]) -> f64 {
    let slack = pos(1.0 - a * x.iter().sum::<f64>());
    1.0 - slack * slack
}

fn peak_value(a: f64, b: f64, peak: &ItemSet, x: &[f64]) -> f64 {
    let (inside, outside) = split_sums(peak, x);
    1.0 - pos(1.0 - a * (2.0 * inside - b)) * pos(1.0 - a * (2.0 * outside + b))
}

fn region_margin(b: f64, peak: &ItemSet, x: &[f64]) -> f64 {
    let (inside, outside) = split_sums(peak, x);
    inside - outside - b
}

fn check_len(v: &MultiPeakValuation, x: &FractionalPoint) -> Result<()> {
    if x.0.len() != v.m() {
        return Err(Error::LengthMismatch {
            expected: v.m(),
            found: x.0.len(),
        });
    }
    Ok(())
}

fn peak_index(v: &MultiPeakValuation, peak: &ItemSet) -> Result<usize> {
    v.family().position(peak).ok_or(Error::NotAPeak)
}

/// `F(x) = 1 - (1 - aΣx)₊²`.
pub fn continuous_base(v: &MultiPeakValuation, x: &FractionalPoint) -> Result<f64> {
    check_len(v, x)?;
    Ok(base_value(to_f64(v.a()), &x.0))
}

/// `F_A(x)` for a peak `A` of `v`.
pub fn continuous_peak(v: &MultiPeakValuation, peak: &ItemSet, x: &FractionalPoint) -> Result<f64> {
    check_len(v, x)?;
    peak_index(v, peak)?;
    Ok(peak_value(to_f64(v.a()), to_f64(v.b()), peak, &x.0))
}

/// Strict membership in `B_A`.
pub fn in_peak_region(v: &MultiPeakValuation, peak: &ItemSet, x: &FractionalPoint) -> Result<bool> {
    check_len(v, x)?;
    Ok(region_margin(to_f64(v.b()), peak, &x.0) > 0.0)
}

/// `F_A(x)` inside the (first) region containing `x`, `F(x)` elsewhere.
pub fn glued_eval(v: &MultiPeakValuation, x: &FractionalPoint) -> Result<f64> {
    check_len(v, x)?;
    let (a, b) = (to_f64(v.a()), to_f64(v.b()));
    let region = v
        .peaks()
        .iter()
        .find(|peak| region_margin(b, peak, &x.0) > 0.0);
    Ok(match region {
        Some(peak) => peak_value(a, b, peak, &x.0),
        None => base_value(a, &x.0),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundaryReport {
    pub peak: usize,
    pub samples: usize,
    pub saturated_samples: usize,
    pub max_value_deviation: f64,
    pub max_gradient_deviation: f64,
    pub tol_value: f64,
    pub tol_grad: f64,
    pub pass: bool,
}

/// Samples boundary points of `B_A` and compares `F_A` against `F` in value
/// and in every central-difference partial derivative.
pub fn boundary_agreement_check(
    v: &MultiPeakValuation,
    peak: &ItemSet,
    trials: usize,
    tol_value: f64,
    tol_grad: f64,
    seed: u64,
) -> Result<BoundaryReport> {
    let (a, b) = (to_f64(v.a()), to_f64(v.b()));
    let owned = peak.clone();
    boundary_agreement_check_with(v, peak, trials, tol_value, tol_grad, seed, move |x| {
        peak_value(a, b, &owned, x)
    })
}

/// Like [`boundary_agreement_check`] with a caller-supplied peak surface in
/// place of `F_A`. Used to confirm the check rejects corrupted surfaces.
pub fn boundary_agreement_check_with<F>(
    v: &MultiPeakValuation,
    peak: &ItemSet,
    trials: usize,
    tol_value: f64,
    tol_grad: f64,
    seed: u64,
    peak_surface: F,
) -> Result<BoundaryReport>
where
    F: Fn(&[f64]) -> f64,
{
    if !(tol_value > 0.0 && tol_grad > 0.0) {
        return Err(Error::InvalidParameter("tolerances must be positive".into()));
    }
    let index = peak_index(v, peak)?;
    let (a, b) = (to_f64(v.a()), to_f64(v.b()));
    let m = v.m();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut report = BoundaryReport {
        peak: index,
        samples: 0,
        saturated_samples: 0,
        max_value_deviation: 0.0,
        max_gradient_deviation: 0.0,
        tol_value,
        tol_grad,
        pass: true,
    };
    if peak.len() as f64 <= b {
        // B_A is empty: the indicator of A is the farthest point in the cube.
        return Ok(report);
    }

    let mut scratch = vec![0.0; m];
    for _ in 0..trials {
        let Some(point) = sample_boundary_point(&mut rng, peak, b) else {
            continue;
        };
        report.samples += 1;
        if a * point.iter().sum::<f64>() >= 1.0 {
            report.saturated_samples += 1;
        }
        let value_dev = (peak_surface(&point) - base_value(a, &point)).abs();
        report.max_value_deviation = report.max_value_deviation.max(value_dev);

        for j in 0..m {
            scratch.copy_from_slice(&point);
            scratch[j] = point[j] + FD_STEP;
            let (peak_hi, base_hi) = (peak_surface(&scratch), base_value(a, &scratch));
            scratch[j] = point[j] - FD_STEP;
            let (peak_lo, base_lo) = (peak_surface(&scratch), base_value(a, &scratch));
            let peak_grad = (peak_hi - peak_lo) / (2.0 * FD_STEP);
            let base_grad = (base_hi - base_lo) / (2.0 * FD_STEP);
            report.max_gradient_deviation =
                report.max_gradient_deviation.max((peak_grad - base_grad).abs());
        }
    }
    report.pass =
        report.max_value_deviation <= tol_value && report.max_gradient_deviation <= tol_grad;
    Ok(report)
}

/// A point with `Σ_A x - Σ_{∉A} x = b`, found on the segment between a point
/// outside `B_A` and a point inside it.
fn sample_boundary_point(rng: &mut ChaCha8Rng, peak: &ItemSet, b: f64) -> Option<Vec<f64>> {
    let m = peak.universe();
    let mut outside_pt: Vec<f64> = (0..m).map(|_| rng.gen::<f64>()).collect();
    if region_margin(b, peak, &outside_pt) >= 0.0 {
        for i in peak.iter() {
            outside_pt[i] *= rng.gen::<f64>() * 0.5;
        }
        if region_margin(b, peak, &outside_pt) >= 0.0 {
            for i in peak.iter() {
                outside_pt[i] = 0.0;
            }
        }
    }
    let spread = rng.gen::<f64>() * 0.5;
    let mut inside_pt: Vec<f64> = (0..m)
        .map(|i| {
            let jitter = rng.gen::<f64>() * spread;
            if peak.contains(i) {
                1.0 - jitter
            } else {
                jitter
            }
        })
        .collect();
    if region_margin(b, peak, &inside_pt) <= 0.0 {
        inside_pt = FractionalPoint::indicator(peak).0;
    }
    let g0 = region_margin(b, peak, &outside_pt);
    let g1 = region_margin(b, peak, &inside_pt);
    if !(g0 <= 0.0 && g1 > 0.0) {
        return None;
    }
    let t = -g0 / (g1 - g0);
    Some(
        outside_pt
            .iter()
            .zip(&inside_pt)
            .map(|(&lo, &hi)| ((1.0 - t) * lo + t * hi).clamp(0.0, 1.0))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use crate::valuation::PeakFamily;

    fn set(m: usize, items: &[usize]) -> ItemSet {
        ItemSet::from_indices(m, items.iter().copied()).unwrap()
    }

    fn single_peak(a: crate::Rational) -> (MultiPeakValuation, ItemSet) {
        let peak = set(8, &[0, 1, 2, 3]);
        let family = PeakFamily::new(vec![peak.clone()], int(1)).unwrap();
        (MultiPeakValuation::new(8, family, a, None).unwrap(), peak)
    }

    #[test]
    fn base_examples() {
        let (v, _) = single_peak(ratio(1, 8));
        assert_eq!(continuous_base(&v, &FractionalPoint::zeros(8)).unwrap(), 0.0);
        assert_eq!(continuous_base(&v, &FractionalPoint::new(vec![1.0; 8]).unwrap()).unwrap(), 1.0);
        let far = set(8, &[4, 5, 6, 7]);
        assert_eq!(
            continuous_base(&v, &FractionalPoint::indicator(&far)).unwrap(),
            to_f64(&v.eval(&far))
        );
    }

    #[test]
    fn peak_examples() {
        let (v, peak) = single_peak(ratio(1, 8));
        let at_peak = continuous_peak(&v, &peak, &FractionalPoint::indicator(&peak)).unwrap();
        assert!((at_peak - 57.0 / 64.0).abs() < 1e-15);
        // outside B_A, the formula is formal only: a²b²
        let zero = continuous_peak(&v, &peak, &FractionalPoint::zeros(8)).unwrap();
        assert!((zero - 1.0 / 64.0).abs() < 1e-15);
        // boundary: Σ_A - Σ_out = 1
        let boundary = FractionalPoint::new(vec![0.5, 0.5, 0.5, 0.5, 0.25, 0.25, 0.25, 0.25]).unwrap();
        assert!(!in_peak_region(&v, &peak, &boundary).unwrap());
        let fa = continuous_peak(&v, &peak, &boundary).unwrap();
        let f = continuous_base(&v, &boundary).unwrap();
        assert!((fa - f).abs() < 1e-15);
        assert_eq!(
            continuous_peak(&v, &set(8, &[0]), &boundary),
            Err(Error::NotAPeak)
        );
    }

    #[test]
    fn region_membership() {
        let (v, peak) = single_peak(ratio(1, 8));
        assert!(in_peak_region(&v, &peak, &FractionalPoint::indicator(&peak)).unwrap());
        assert!(!in_peak_region(&v, &peak, &FractionalPoint::zeros(8)).unwrap());
    }

    #[test]
    fn glued_matches_discrete_on_vertices() {
        let (v, peak) = single_peak(ratio(1, 8));
        for mask in 0u64..256 {
            let s = ItemSet::from_mask(8, mask);
            let glued = glued_eval(&v, &FractionalPoint::indicator(&s)).unwrap();
            assert!((glued - to_f64(&v.eval(&s))).abs() < 1e-15, "{s:?}");
        }
        assert_eq!(
            glued_eval(&v, &FractionalPoint::indicator(&peak)).unwrap(),
            to_f64(&v.eval(&peak))
        );
        assert_eq!(glued_eval(&v, &FractionalPoint::zeros(8)).unwrap(), 0.0);
    }

    #[test]
    fn boundary_agreement_passes() {
        let (v, peak) = single_peak(ratio(1, 8));
        let report = boundary_agreement_check(&v, &peak, 200, 1e-9, 1e-4, 1).unwrap();
        assert!(report.pass, "{report:?}");
        assert!(report.samples > 150);
    }

    #[test]
    fn boundary_agreement_saturated_regime() {
        let (v, peak) = single_peak(int(1));
        let report = boundary_agreement_check(&v, &peak, 200, 1e-9, 1e-4, 2).unwrap();
        assert!(report.pass, "{report:?}");
        assert!(report.saturated_samples > 0);
    }

    #[test]
    fn boundary_agreement_catches_corruption() {
        let (v, peak) = single_peak(ratio(1, 8));
        let owned = peak.clone();
        let report = boundary_agreement_check_with(&v, &peak, 50, 1e-9, 1e-4, 3, move |x| {
            let (inside, outside) = split_sums(&owned, x);
            let a = 1.0 / 8.0;
            1.0 - pos(1.0 - a * (2.0 * inside - 1.0)) * pos(1.0 - a * (2.0 * outside + 1.1))
        })
        .unwrap();
        assert!(!report.pass);
    }

    #[test]
    fn rejects_bad_points() {
        assert!(FractionalPoint::new(vec![0.5, 1.5]).is_err());
        let (v, _) = single_peak(ratio(1, 8));
        assert!(continuous_base(&v, &FractionalPoint::zeros(3)).is_err());
    }
}
