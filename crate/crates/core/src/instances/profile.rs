//! Normalized profiles `(xᵢ, yᵢ)`: the share of each player's bundle inside
//! and outside its closest peak, in units of `s`.

use serde::Serialize;

use super::{Allocation, AuctionInstance};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

const TOLERANCE: f64 = 1e-9;

/// Per-player value in normalized coordinates: the peak form when
/// `x - β > y`, the cardinality form otherwise.
pub fn normalized_value(alpha: f64, beta: f64, x: f64, y: f64) -> f64 {
    if x - beta > y {
        1.0 - (1.0 - alpha * (2.0 * x - beta)).max(0.0) * (1.0 - alpha * (2.0 * y + beta)).max(0.0)
    } else {
        1.0 - (1.0 - alpha * (x + y)).max(0.0).powi(2)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ProfileCheck {
    pub sorted: bool,
    pub budget: f64,
    pub budget_ok: bool,
    /// `(ℓ, Σ_{i<=ℓ} xᵢ, (1 - (1-1/k)^ℓ + ε)·k)` for every violated prefix.
    pub prefix_violations: Vec<(usize, f64, f64)>,
    pub feasible: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct NormalizedProfile {
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: f64,
    /// `(xᵢ, yᵢ)` sorted by decreasing `xᵢ`.
    pub pairs: Vec<(f64, f64)>,
    /// Number of leading players with `xᵢ > 0`.
    pub k_star: usize,
    /// Mean `yᵢ` over the players after `k*`.
    pub y_star: f64,
    pub value: f64,
    pub check: ProfileCheck,
}

impl NormalizedProfile {
    /// Sorts `pairs` by decreasing `x` and checks the constraints
    /// `Σ(xᵢ + yᵢ) <= k` and `Σ_{i<=ℓ} xᵢ <= (1 - (1-1/k)^ℓ + ε)·k`.
    pub fn new(alpha: f64, beta: f64, epsilon: f64, mut pairs: Vec<(f64, f64)>) -> Self {
        let k = pairs.len();
        pairs.sort_by(|p, q| q.0.total_cmp(&p.0));
        let k_star = pairs.iter().take_while(|p| p.0 > 0.0).count();
        let tail = &pairs[k_star..];
        let y_star = if tail.is_empty() {
            0.0
        } else {
            tail.iter().map(|p| p.1).sum::<f64>() / tail.len() as f64
        };
        let value = pairs
            .iter()
            .map(|&(x, y)| normalized_value(alpha, beta, x, y))
            .sum();
        let check = Self::check(k, epsilon, &pairs);
        NormalizedProfile {
            k,
            alpha,
            beta,
            epsilon,
            pairs,
            k_star,
            y_star,
            value,
            check,
        }
    }

    fn check(k: usize, epsilon: f64, pairs: &[(f64, f64)]) -> ProfileCheck {
        let kf = k as f64;
        let sorted = pairs.windows(2).all(|w| w[0].0 >= w[1].0);
        let budget: f64 = pairs.iter().map(|p| p.0 + p.1).sum();
        let budget_ok = budget <= kf + TOLERANCE;
        let q = 1.0 - 1.0 / kf;
        let mut prefix = 0.0;
        let mut prefix_violations = Vec::new();
        for (idx, p) in pairs.iter().enumerate() {
            let ell = idx + 1;
            prefix += p.0;
            let bound = (1.0 - q.powi(ell as i32) + epsilon) * kf;
            if prefix > bound + TOLERANCE {
                prefix_violations.push((ell, prefix, bound));
            }
        }
        let nonneg = pairs.iter().all(|p| p.0 >= 0.0 && p.1 >= 0.0);
        ProfileCheck {
            sorted,
            budget,
            budget_ok,
            feasible: sorted && budget_ok && nonneg && prefix_violations.is_empty(),
            prefix_violations,
        }
    }
}

/// Reads off `xᵢ = |Sᵢ ∩ Aᵢ|/s`, `yᵢ = |Sᵢ \ Aᵢ|/s` with `Aᵢ` the peak of
/// player `i` maximizing `|Sᵢ ∩ Aᵢ| - |Sᵢ \ Aᵢ|` (ties to the lowest index),
/// counting only items in the player's support. `epsilon` is the union
/// slack the prefix constraints are checked against.
pub fn normalized_profile_from_allocation(
    inst: &AuctionInstance,
    alloc: &Allocation,
    epsilon: f64,
) -> Result<NormalizedProfile> {
    inst.check_allocation(alloc)?;
    let bundles = alloc
        .bundles()
        .ok_or_else(|| Error::InvalidParameter("profiles need one bundle per player".into()))?;
    let p = inst.provenance();
    if p.s == 0 {
        return Err(Error::InvalidParameter("s must be positive".into()));
    }
    let s = rational::int(p.s as i64);
    let pairs = inst
        .valuations()
        .iter()
        .zip(bundles)
        .map(|(v, bundle)| {
            let bundle = bundle.intersection(&v.effective_support());
            let (inside, outside) = match v.closest_peak(&bundle) {
                Some((idx, _)) => {
                    let peak = &v.peaks()[idx];
                    (bundle.intersection_len(peak), bundle.difference_len(peak))
                }
                None => (0, bundle.len()),
            };
            let x: Rational = rational::int(inside as i64) / s;
            let y: Rational = rational::int(outside as i64) / s;
            (rational::to_f64(&x), rational::to_f64(&y))
        })
        .collect();
    Ok(NormalizedProfile::new(
        rational::to_f64(&p.alpha),
        rational::to_f64(&p.beta),
        epsilon,
        pairs,
    ))
}
