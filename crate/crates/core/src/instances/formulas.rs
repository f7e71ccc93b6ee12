//! Closed-form YES values, NO bounds and gap ratios.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::{self, positive_part, Rational};

/// Relative precision attached to every floating-point value on the wire.
pub const F64_REL_PRECISION: f64 = 1e-12;

/// A value that is exact when the computation allows it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Number {
    Exact(Rational),
    Approx(f64),
}

impl Number {
    pub fn to_f64(&self) -> f64 {
        match self {
            Number::Exact(r) => rational::to_f64(r),
            Number::Approx(x) => *x,
        }
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            Number::Exact(r) => Some(r),
            Number::Approx(_) => None,
        }
    }
}

impl From<Rational> for Number {
    fn from(r: Rational) -> Self {
        Number::Exact(r)
    }
}

impl From<f64> for Number {
    fn from(x: f64) -> Self {
        Number::Approx(x)
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Exact(r) => write!(f, "{} (≈ {:.6})", rational::format(r), rational::to_f64(r)),
            Number::Approx(x) => write!(f, "{x:.9}"),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum NumberWire {
    Exact(String),
    Approx { approx: f64, rel_precision: f64 },
}

impl Serialize for Number {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Number::Exact(r) => NumberWire::Exact(rational::format(r)),
            Number::Approx(x) => NumberWire::Approx {
                approx: *x,
                rel_precision: F64_REL_PRECISION,
            },
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Number {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        match NumberWire::deserialize(deserializer)? {
            NumberWire::Exact(text) => rational::parse(&text)
                .map(Number::Exact)
                .map_err(serde::de::Error::custom),
            NumberWire::Approx { approx, .. } => Ok(Number::Approx(approx)),
        }
    }
}

/// `k·(1 - (1 - a(2s - b))₊ (1 - ab)₊)`: every player takes its own peak
/// of size `s`.
pub fn yes_value_formula(k: usize, s: usize, a: &Rational, b: &Rational) -> Rational {
    let one = rational::one();
    let inside = positive_part(one - a * (rational::int(2 * s as i64) - b));
    let outside = positive_part(one - a * b);
    rational::int(k as i64) * (one - inside * outside)
}

/// The YES value in the normalized coordinates `α = a·s`, `β = b/s`.
pub fn yes_value_normalized(k: usize, alpha: &Rational, beta: &Rational) -> Rational {
    let one = rational::one();
    let inside = positive_part(one - alpha * (rational::int(2) - beta));
    let outside = positive_part(one - alpha * beta);
    rational::int(k as i64) * (one - inside * outside)
}

#[derive(Clone, Debug, Serialize)]
pub struct NoBoundTerm {
    pub k_star: usize,
    /// `2α·X + 1 + (k - k*)(1 - (1 - αy*)₊²)` with `X = min(P(k*), k)`.
    pub capped: f64,
    /// `2αk + 1 - α²k²/(k - k*)·((1-1/k)^{k*} - ε)²`; absent at `k* = k`.
    pub expanded: Option<f64>,
    pub y_star: f64,
    /// Whether the two forms are expected to coincide (`αy* <= 1` and
    /// `P(k*) <= k`) and, if so, whether they do.
    pub forms_agree: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct NoBound {
    pub value: f64,
    pub k_star: usize,
    pub expanded_at_argmax: Option<f64>,
    pub terms: Vec<NoBoundTerm>,
}

impl NoBound {
    /// Whether the expanded and capped forms agree wherever both apply.
    pub fn forms_consistent(&self) -> bool {
        self.terms.iter().all(|t| t.forms_agree != Some(false))
    }
}

/// Upper bound on the normalized NO welfare, maximized over the number `k*`
/// of players that may be close to a peak.
///
/// The prefix budget `P(k*) = (1 - (1-1/k)^{k*} + ε)·k` is capped at the
/// global budget `k`, so the trailing share `y*` never turns negative.
pub fn no_bound_formula(k: usize, alpha: f64, eps: f64) -> Result<NoBound> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("k must be at least 2, got {k}")));
    }
    if !(alpha >= 0.0) || !(eps >= 0.0) {
        return Err(Error::InvalidParameter(
            "alpha and epsilon must be non-negative".into(),
        ));
    }
    let kf = k as f64;
    let q = 1.0 - 1.0 / kf;
    let mut terms = Vec::with_capacity(k);
    for k_star in 1..=k {
        let qk = q.powi(k_star as i32);
        let prefix = (1.0 - qk + eps) * kf;
        let x = prefix.min(kf);
        if k_star == k {
            terms.push(NoBoundTerm {
                k_star,
                capped: 2.0 * alpha * x + 1.0,
                expanded: None,
                y_star: 0.0,
                forms_agree: None,
            });
            continue;
        }
        let rest = (k - k_star) as f64;
        let y_star = (kf - x) / rest;
        let trailing = 1.0 - (1.0 - alpha * y_star).max(0.0).powi(2);
        let capped = 2.0 * alpha * x + 1.0 + rest * trailing;
        let expanded = 2.0 * alpha * kf + 1.0 - alpha * alpha * kf * kf / rest * (qk - eps).powi(2);
        let forms_agree = (alpha * y_star <= 1.0 && prefix <= kf)
            .then(|| (capped - expanded).abs() <= 1e-9 * capped.abs().max(1.0));
        terms.push(NoBoundTerm {
            k_star,
            capped,
            expanded: Some(expanded),
            y_star,
            forms_agree,
        });
    }
    let best = terms
        .iter()
        .fold(&terms[0], |best, t| if t.capped > best.capped { t } else { best });
    Ok(NoBound {
        value: best.capped,
        k_star: best.k_star,
        expanded_at_argmax: best.expanded,
        terms: terms.clone(),
    })
}

/// `2 - (1 - α(2 - (1 + αβ)/(2α)))₊²`, the two-player NO optimum.
pub fn no_value_two_players(alpha: &Rational, beta: &Rational) -> Result<Rational> {
    if !(*alpha > rational::zero()) {
        return Err(Error::InvalidParameter(format!(
            "alpha must be positive, got {}",
            rational::format(alpha)
        )));
    }
    let one = rational::one();
    let two = rational::int(2);
    let x1 = (one + alpha * beta) / (two * alpha);
    let slack = positive_part(one - alpha * (two - x1));
    Ok(two - slack * slack)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TwoPlayerValidity {
    /// `β >= 1/2 + 2ε`: the structural argument applies.
    Verified,
    /// `1/4 + ε <= β < 1/2 + 2ε`: stated without a matching argument.
    Unverified,
    /// `β < 1/4 + ε`.
    OutOfRange,
}

pub fn two_player_validity(beta: &Rational, eps: &Rational) -> TwoPlayerValidity {
    let two = rational::int(2);
    if *beta >= rational::ratio(1, 2) + two * eps {
        TwoPlayerValidity::Verified
    } else if *beta >= rational::ratio(1, 4) + eps {
        TwoPlayerValidity::Unverified
    } else {
        TwoPlayerValidity::OutOfRange
    }
}

/// `1 - (1 - as)₊²`: a player with no close peak on a size-`s` set.
pub fn cpp_far_value(s: usize, a: &Rational) -> Rational {
    let slack = positive_part(rational::one() - a * rational::int(s as i64));
    rational::one() - slack * slack
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapTarget {
    /// `1 - 1/(2e)`, welfare with many players.
    OneMinusHalfInvE,
    /// `17/18`, welfare with two players.
    SeventeenEighteenths,
    /// `3/4`, public projects with many players.
    ThreeQuarters,
    /// `7/8`, public projects with two players.
    SevenEighths,
    /// `1 - 1/e`.
    OneMinusInvE,
    #[serde(with = "rational::serde_str")]
    Other(Rational),
}

impl GapTarget {
    pub fn value(&self) -> Number {
        use std::f64::consts::E;
        match self {
            GapTarget::OneMinusHalfInvE => Number::Approx(1.0 - 1.0 / (2.0 * E)),
            GapTarget::SeventeenEighteenths => Number::Exact(rational::ratio(17, 18)),
            GapTarget::ThreeQuarters => Number::Exact(rational::ratio(3, 4)),
            GapTarget::SevenEighths => Number::Exact(rational::ratio(7, 8)),
            GapTarget::OneMinusInvE => Number::Approx(1.0 - 1.0 / E),
            GapTarget::Other(r) => Number::Exact(*r),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GapReport {
    pub yes_value: Number,
    pub no_bound: Number,
    /// `no_bound / yes_value`.
    pub ratio: Number,
    pub target: GapTarget,
    pub target_value: Number,
    /// `ratio - target`.
    pub deviation: Number,
    pub parameters: BTreeMap<String, String>,
    #[serde(default)]
    pub effective_epsilon: Option<Number>,
}

impl GapReport {
    pub fn with_parameter(mut self, key: &str, value: impl ToString) -> Self {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }

    pub fn with_effective_epsilon(mut self, eps: Number) -> Self {
        self.effective_epsilon = Some(eps);
        self
    }
}

/// Ratio of the NO bound to the YES value and its deviation from `target`,
/// exact whenever both inputs and the target are rational.
pub fn gap_ratio(yes: Number, no_bound: Number, target: GapTarget) -> Result<GapReport> {
    if !(yes.to_f64() > 0.0) {
        return Err(Error::InvalidParameter("YES value must be positive".into()));
    }
    let ratio = match (yes, no_bound) {
        (Number::Exact(y), Number::Exact(n)) => Number::Exact(n / y),
        _ => Number::Approx(no_bound.to_f64() / yes.to_f64()),
    };
    let target_value = target.value();
    let deviation = match (ratio, target_value) {
        (Number::Exact(r), Number::Exact(t)) => Number::Exact(r - t),
        _ => Number::Approx(ratio.to_f64() - target_value.to_f64()),
    };
    Ok(GapReport {
        yes_value: yes,
        no_bound,
        ratio,
        target,
        target_value,
        deviation,
        parameters: BTreeMap::new(),
        effective_epsilon: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use std::f64::consts::E;

    #[test]
    fn yes_value_examples() {
        // a(2s - b) = 1 at α = 2/3, β = 1/2 for any s
        for s in 1..8 {
            let a = ratio(2, 3 * s);
            let b = ratio(s, 2);
            assert_eq!(yes_value_formula(2, s as usize, &a, &b), int(2));
        }
        assert_eq!(yes_value_normalized(2, &ratio(2, 3), &ratio(1, 2)), int(2));
        // communication defaults: k(1 - (1+ε)/(2k)·(1 - (1+ε)/(2k)))
        let (k, s, eps) = (4usize, 8usize, ratio(1, 2));
        let a = ratio(1, 16);
        let b = (int(1) + eps) * int(s as i64) / int(k as i64);
        let c = (int(1) + eps) / int(2 * k as i64);
        assert_eq!(yes_value_formula(k, s, &a, &b), int(4) * (int(1) - c * (int(1) - c)));
        // b = 0 collapses to a single factor
        let a = ratio(1, 10);
        assert_eq!(
            yes_value_formula(3, 4, &a, &int(0)),
            int(3) * (int(1) - positive_part(int(1) - ratio(8, 10)))
        );
    }

    #[test]
    fn two_player_examples() {
        assert_eq!(no_value_two_players(&ratio(2, 3), &ratio(1, 2)).unwrap(), ratio(17, 9));
        // (1 + αβ)/(2α) = 2 when α = 1/(4 - β)
        let beta = ratio(1, 2);
        let alpha = int(1) / (int(4) - beta);
        assert_eq!(no_value_two_players(&alpha, &beta).unwrap(), int(1));
        // α = 1/2, β = 1: x₁ = 3/2, so 2 - (1 - 1/4)² = 23/16
        let direct = 2.0 - (1.0f64 - 0.5 * (2.0 - 1.5)).max(0.0).powi(2);
        let exact = no_value_two_players(&ratio(1, 2), &int(1)).unwrap();
        assert_eq!(exact, ratio(23, 16));
        assert!((rational::to_f64(&exact) - direct).abs() < 1e-15);
        assert!(no_value_two_players(&int(0), &beta).is_err());
    }

    #[test]
    fn no_bound_hand_value() {
        let bound = no_bound_formula(50, 0.5, 0.0).unwrap();
        let term = &bound.terms[24];
        assert_eq!(term.k_star, 25);
        let by_hand = 51.0 - 25.0 * 0.98f64.powi(25).powi(2);
        assert!((term.capped - by_hand).abs() < 1e-9);
        assert!((by_hand - 41.896).abs() < 1e-3);
        assert!(bound.forms_consistent());
    }

    #[test]
    fn no_bound_limits() {
        let zero = no_bound_formula(10, 0.0, 0.0).unwrap();
        assert!((zero.value - 1.0).abs() < 1e-12);
        let big = no_bound_formula(400, 0.5, 0.0).unwrap();
        assert!((big.value / 400.0 - (1.0 - 1.0 / (2.0 * E))).abs() < 0.005);
        assert!(no_bound_formula(1, 0.5, 0.0).is_err());
        // huge ε caps the prefix budget at k
        let capped = no_bound_formula(4, 0.5, 2.0).unwrap();
        assert!(capped.terms.iter().all(|t| t.y_star >= 0.0));
        assert!((capped.value - (2.0 * 0.5 * 4.0 + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn validity_regions() {
        let eps = ratio(1, 20);
        assert_eq!(two_player_validity(&ratio(3, 5), &eps), TwoPlayerValidity::Verified);
        assert_eq!(two_player_validity(&ratio(1, 2), &eps), TwoPlayerValidity::Unverified);
        assert_eq!(two_player_validity(&ratio(1, 4), &eps), TwoPlayerValidity::OutOfRange);
    }

    #[test]
    fn cpp_far_examples() {
        assert_eq!(cpp_far_value(6, &ratio(1, 12)), ratio(3, 4));
        assert_eq!(cpp_far_value(6, &ratio(1, 6)), int(1));
        assert_eq!(cpp_far_value(6, &ratio(1, 24)), ratio(7, 16));
    }

    #[test]
    fn gap_examples() {
        let r = gap_ratio(int(2).into(), ratio(17, 9).into(), GapTarget::SeventeenEighteenths)
            .unwrap();
        assert_eq!(r.ratio, Number::Exact(ratio(17, 18)));
        assert_eq!(r.deviation, Number::Exact(int(0)));

        let k = 40.0;
        let r = gap_ratio(
            Number::Exact(int(40)),
            Number::Approx((1.0 - 1.0 / (2.0 * E)) * k),
            GapTarget::OneMinusHalfInvE,
        )
        .unwrap();
        assert!(r.deviation.to_f64().abs() < 1e-12);

        let r = gap_ratio(int(1).into(), int(1).into(), GapTarget::Other(int(1))).unwrap();
        assert_eq!(r.ratio, Number::Exact(int(1)));
        assert!(gap_ratio(int(0).into(), int(1).into(), GapTarget::ThreeQuarters).is_err());
    }

    #[test]
    fn number_wire_format() {
        let r = gap_ratio(int(2).into(), Number::Approx(1.5), GapTarget::ThreeQuarters).unwrap();
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["yes_value"], "2/1");
        assert_eq!(json["no_bound"]["approx"], 1.5);
        assert_eq!(json["target"], "three_quarters");
        assert_eq!(json["deviation"]["approx"], 0.0);
        let back: GapReport = serde_json::from_value(json).unwrap();
        assert_eq!(back.ratio, r.ratio);
    }
}
