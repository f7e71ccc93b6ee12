//! wasm-bindgen bindings for the static demo page in `www/`.
//!
//! Each export takes and returns JSON text. The `*_json` functions hold the
//! logic so native tests can call them without a JS runtime.

use multipeak::instances::{no_bound_formula, no_value_two_players, yes_value_normalized};
use multipeak::rational::{self, format, to_f64, Rational};
use multipeak::solvers::{demand_query, lemma43_structured_opt, PriceVector};
use multipeak::{ItemSet, MultiPeakValuation};
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn parse_valuation(text: &str) -> Result<MultiPeakValuation, String> {
    serde_json::from_str(text).map_err(|e| format!("valuation: {e}"))
}

fn parse_list<T>(text: &str, item: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, String> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(item)
        .collect()
}

fn to_json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Marginal {
    item: usize,
    #[serde(with = "rational::serde_str")]
    gain: Rational,
}

#[derive(Serialize)]
struct Evaluation {
    bundle: Vec<usize>,
    #[serde(with = "rational::serde_str")]
    value: Rational,
    value_f64: f64,
    close_peak: Option<usize>,
    closest_peak: Option<(usize, i64)>,
    /// Gain from adding each item outside the bundle.
    marginals: Vec<Marginal>,
}

pub fn evaluate_json(valuation: &str, items: &str) -> Result<String, String> {
    let v = parse_valuation(valuation)?;
    let idx = parse_list(items, |t| t.parse::<usize>().map_err(|e| format!("item {t:?}: {e}")))?;
    let bundle = ItemSet::from_indices(v.m(), idx).map_err(|e| e.to_string())?;
    let value = v.eval(&bundle);
    let marginals = (0..v.m())
        .filter(|&i| !bundle.contains(i))
        .map(|i| Ok(Marginal { item: i, gain: v.marginal(&bundle, i)? }))
        .collect::<multipeak::Result<Vec<_>>>()
        .map_err(|e| e.to_string())?;
    to_json(&Evaluation {
        bundle: bundle.to_vec(),
        value_f64: to_f64(&value),
        value,
        close_peak: v.close_peak(&bundle).map_err(|e| e.to_string())?,
        closest_peak: v.closest_peak(&bundle),
        marginals,
    })
}

/// The structured optimizer costs tens of milliseconds per k; beyond this
/// the page shows only the closed-form bound.
const STRUCTURED_MAX_K: usize = 6;

#[derive(Serialize)]
struct GapPoint {
    k: usize,
    yes: f64,
    no: f64,
    ratio: f64,
    k_star: usize,
    /// Optimum over structured profiles, when cheap enough to compute.
    structured: Option<f64>,
    exact_ratio: Option<String>,
}

/// YES value, NO bound and ratio for k = 2..=k_max at normalized α and slack ε.
/// The k = 2 point uses the exact two-player value at β = 1/2 + 2ε.
pub fn gap_curve_json(alpha: &str, eps: &str, k_max: usize) -> Result<String, String> {
    if !(2..=400).contains(&k_max) {
        return Err("k_max must lie in 2..=400".into());
    }
    let a = rational::parse(alpha.trim()).map_err(|e| format!("α: {e}"))?;
    let e = rational::parse(eps.trim()).map_err(|e| format!("ε: {e}"))?;
    if a <= rational::zero() || e < rational::zero() {
        return Err("need α > 0 and ε >= 0".into());
    }
    let (alpha, eps) = (to_f64(&a), to_f64(&e));
    let mut points = Vec::with_capacity(k_max - 1);
    for k in 2..=k_max {
        let structured = (k <= STRUCTURED_MAX_K)
            .then(|| lemma43_structured_opt(k, alpha, if k == 2 { 0.5 + 2.0 * eps } else { eps }, eps))
            .transpose()
            .map_err(|e| e.to_string())?
            .map(|o| o.value);
        let point = if k == 2 {
            let beta = rational::ratio(1, 2) + rational::int(2) * e;
            let yes = yes_value_normalized(2, &a, &beta);
            let no = no_value_two_players(&a, &beta).map_err(|e| e.to_string())?;
            let ratio = no / yes;
            GapPoint {
                k,
                yes: to_f64(&yes),
                no: to_f64(&no),
                ratio: to_f64(&ratio),
                k_star: 2,
                structured,
                exact_ratio: Some(format(&ratio)),
            }
        } else {
            let yes = to_f64(&yes_value_normalized(k, &a, &e));
            let nb = no_bound_formula(k, alpha, eps).map_err(|e| e.to_string())?;
            GapPoint {
                k,
                yes,
                no: nb.value,
                ratio: nb.value / yes,
                k_star: nb.k_star,
                structured,
                exact_ratio: None,
            }
        };
        points.push(point);
    }
    to_json(&points)
}

pub fn demand_json(valuation: &str, prices: &str) -> Result<String, String> {
    let v = parse_valuation(valuation)?;
    let prices = parse_list(prices, |t| rational::parse(t).map_err(|e| e.to_string()))?;
    let p = PriceVector::new(prices).map_err(|e| e.to_string())?;
    to_json(&demand_query(&v, &p).map_err(|e| e.to_string())?)
}

#[wasm_bindgen]
pub fn evaluate(valuation: &str, items: &str) -> Result<String, JsError> {
    evaluate_json(valuation, items).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn gap_curve(alpha: &str, eps: &str, k_max: usize) -> Result<String, JsError> {
    gap_curve_json(alpha, eps, k_max).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn demand(valuation: &str, prices: &str) -> Result<String, JsError> {
    demand_json(valuation, prices).map_err(|e| JsError::new(&e))
}
