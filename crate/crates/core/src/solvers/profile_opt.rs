//! Maximizing `Σ v(xᵢ, yᵢ)` over normalized profiles subject to
//! `x₁ >= ... >= x_k`, `Σ(xᵢ + yᵢ) <= k` and
//! `Σ_{i<=ℓ} xᵢ <= (1 - (1-1/k)^ℓ + ε)·k`.
//!
//! [`lemma43_structured_opt`] searches only profiles of the optimal shape:
//! `k* - 1` balanced leading players with no outside share, one mixed player,
//! and `k - k*` trailing players splitting the leftover budget evenly.
//! [`lemma43_grid_opt`] searches the unrestricted space numerically and is
//! kept independent of the structured code as a cross-check.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::instances::{normalized_value, NormalizedProfile};

const TOL: f64 = 1e-12;
const GOLDEN_ITERS: usize = 90;
const W_GRID: usize = 48;

struct Params {
    k: usize,
    alpha: f64,
    beta: f64,
    eps: f64,
}

impl Params {
    /// `(1 - (1-1/k)^ℓ + ε)·k`.
    fn prefix(&self, ell: usize) -> f64 {
        let k = self.k as f64;
        (1.0 - (1.0 - 1.0 / k).powi(ell as i32) + self.eps) * k
    }

    fn v(&self, x: f64, y: f64) -> f64 {
        normalized_value(self.alpha, self.beta, x, y)
    }

    fn far(&self, y: f64) -> f64 {
        1.0 - (1.0 - self.alpha * y).max(0.0).powi(2)
    }
}

/// Golden-section search for the maximum of a concave `f` on `[lo, hi]`,
/// also comparing the endpoints.
fn golden_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    if hi - lo <= TOL {
        return (lo, f(lo));
    }
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..GOLDEN_ITERS {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    [(lo, f(lo)), (hi, f(hi)), (c, fc), (d, fd)]
        .into_iter()
        .fold((lo, f64::NEG_INFINITY), |best, p| if p.1 > best.1 { p } else { best })
}

#[derive(Clone, Debug, Serialize)]
pub struct StructuredOpt {
    pub value: f64,
    pub k_star: usize,
    pub profile: NormalizedProfile,
    /// For `k = 2`: the best profile with player 1 alone close to a peak,
    /// no outside share, and the rest of the budget on player 2.
    pub two_player_line: Option<f64>,
}

/// One shape: `lead` players at `(X'/lead, 0)`, one at `(w, z)`, `trail`
/// players at `(0, y*)`. Returns the best value and its pairs.
fn best_for_k_star(p: &Params, k_star: usize) -> Option<(f64, Vec<(f64, f64)>)> {
    let k = p.k as f64;
    if k_star == 0 {
        let pairs = vec![(0.0, 1.0); p.k];
        return Some((p.k as f64 * p.far(1.0), pairs));
    }
    let lead = k_star - 1;
    let trail = p.k - k_star;
    let lead_cap = if lead == 0 { 0.0 } else { p.prefix(lead) };
    let mixed_cap = p.prefix(k_star);

    let g = |xp: f64, w: f64, z: f64| -> f64 {
        let mut total = p.v(w, z);
        if lead > 0 {
            total += lead as f64 * p.v(xp / lead as f64, 0.0);
        }
        if trail > 0 {
            let y = ((k - xp - w - z) / trail as f64).max(0.0);
            total += trail as f64 * p.far(y);
        }
        total
    };
    let x_range = |w: f64, z: f64| -> Option<(f64, f64)> {
        if lead == 0 {
            return (w <= mixed_cap + TOL && w + z <= k + TOL).then_some((0.0, 0.0));
        }
        let lo = lead as f64 * w;
        let hi = lead_cap.min(mixed_cap - w).min(k - w - z);
        (hi >= lo - TOL).then_some((lo, hi.max(lo)))
    };
    let best_x = |w: f64, z: f64| -> Option<(f64, f64)> {
        let (lo, hi) = x_range(w, z)?;
        Some(golden_max(|xp| g(xp, w, z), lo, hi))
    };
    // z below `w - β` keeps the mixed player close to its peak, above it the
    // player is far; each regime is searched on its own over w
    let best_z = |w: f64, close: bool| -> Option<(f64, f64, f64)> {
        let z_max = k - w - lead as f64 * w;
        if z_max < -TOL || (close && w <= p.beta) {
            return None;
        }
        let z_max = z_max.max(0.0);
        let split = (w - p.beta).clamp(0.0, z_max);
        let (lo, hi) = if close { (0.0, split) } else { (split, z_max) };
        let inner = |z: f64| best_x(w, z).map_or(f64::NEG_INFINITY, |r| r.1);
        let (z, _) = golden_max(inner, lo, hi);
        best_x(w, z).map(|(xp, val)| (z, xp, val))
    };

    let w_max = mixed_cap.min(k).max(0.0);
    let mut best: Option<(f64, f64, f64, f64)> = None;
    let mut offer = |w: f64, r: Option<(f64, f64, f64)>| {
        if let Some((z, xp, val)) = r {
            if best.is_none_or(|b| val > b.3) {
                best = Some((w, z, xp, val));
            }
        }
    };
    for close in [false, true] {
        let w_lo = if close { p.beta.min(w_max) } else { 0.0 };
        let step = (w_max - w_lo) / W_GRID as f64;
        let at = |i: usize| w_lo + i as f64 * step;
        let grid: Vec<_> = (0..=W_GRID).map(|i| best_z(at(i), close)).collect();
        let score = |i: usize| grid[i].map_or(f64::NEG_INFINITY, |r| r.2);
        for (i, r) in grid.iter().enumerate() {
            offer(at(i), *r);
        }
        // refine around every local maximum of the grid
        for i in 0..=W_GRID {
            let left = if i > 0 { score(i - 1) } else { f64::NEG_INFINITY };
            let right = if i < W_GRID { score(i + 1) } else { f64::NEG_INFINITY };
            let v = score(i);
            // interior plateau points add nothing over the plateau's edges
            if v == f64::NEG_INFINITY || v < left || v < right || (v == left && v == right) {
                continue;
            }
            let (lo, hi) = (at(i.saturating_sub(1)), at((i + 1).min(W_GRID)));
            let (w, _) = golden_max(|w| best_z(w, close).map_or(f64::NEG_INFINITY, |r| r.2), lo, hi);
            offer(w, best_z(w, close));
        }
    }

    let (w, z, xp, _) = best?;
    let mut pairs = Vec::with_capacity(p.k);
    if lead > 0 {
        pairs.extend(std::iter::repeat_n((xp / lead as f64, 0.0), lead));
    }
    pairs.push((w, z));
    if trail > 0 {
        let y = ((k - xp - w - z) / trail as f64).max(0.0);
        pairs.extend(std::iter::repeat_n((0.0, y), trail));
    }
    let value = pairs.iter().map(|&(x, y)| p.v(x, y)).sum();
    Some((value, pairs))
}

/// Player 1 close to its peak with `y₁ = 0`, player 2 far with the rest of
/// the budget. The objective is concave in `x₁`, so its maximum sits at an
/// endpoint, a kink, or the stationary point.
fn two_player_line(p: &Params) -> Option<(f64, Vec<(f64, f64)>)> {
    let lo = p.beta;
    let hi = p.prefix(1).min(2.0);
    if hi < lo {
        return None;
    }
    let a = p.alpha;
    let f = |x1: f64| p.v(x1, 0.0) + p.far(2.0 - x1);
    let candidates = [lo, hi, (1.0 + a * p.beta) / (2.0 * a), 2.0 - 1.0 / a, 2.0 - p.beta];
    let x1 = candidates
        .into_iter()
        .map(|x| x.clamp(lo, hi))
        .fold(lo, |best, x| if f(x) > f(best) { x } else { best });
    Some((f(x1), vec![(x1, 0.0), (0.0, 2.0 - x1)]))
}

pub fn lemma43_structured_opt(k: usize, alpha: f64, beta: f64, eps: f64) -> Result<StructuredOpt> {
    if !(alpha > 0.0) {
        return Err(Error::Infeasible(format!("alpha must be positive, got {alpha}")));
    }
    if k == 0 || !(beta >= 0.0) || !(eps >= 0.0) {
        return Err(Error::InvalidParameter(
            "need k >= 1 and non-negative beta, epsilon".into(),
        ));
    }
    let p = Params { k, alpha, beta, eps };
    let mut best: Option<(f64, Vec<(f64, f64)>)> = None;
    let mut consider = |cand: Option<(f64, Vec<(f64, f64)>)>| {
        if let Some(c) = cand {
            if best.as_ref().is_none_or(|b| c.0 > b.0) {
                best = Some(c);
            }
        }
    };
    let line = if k == 2 { two_player_line(&p) } else { None };
    let line_value = line.as_ref().map(|l| l.0);
    consider(line);
    for k_star in 0..=k {
        consider(best_for_k_star(&p, k_star));
    }
    let (_, pairs) = best.ok_or_else(|| Error::Infeasible("no feasible profile".into()))?;
    let profile = NormalizedProfile::new(alpha, beta, eps, pairs);
    Ok(StructuredOpt {
        value: profile.value,
        k_star: profile.k_star,
        profile,
        two_player_line: line_value,
    })
}

#[derive(Clone, Copy, Debug)]
pub struct GridOptions {
    /// Grid step for `k = 2`; initial move size for larger `k`.
    pub resolution: f64,
    pub refine: bool,
    /// Random starting points for the local search when `k >= 3`.
    pub starts: usize,
    pub seed: u64,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions {
            resolution: 1.0 / 200.0,
            refine: true,
            starts: 24,
            seed: 0,
        }
    }
}

/// Layout: `x₀..x_{k-1}`, `y₀..y_{k-1}`, unused budget.
struct Search<'a> {
    p: &'a Params,
}

impl Search<'_> {
    fn feasible(&self, vars: &[f64]) -> bool {
        let k = self.p.k;
        if vars.iter().any(|&v| v < -TOL) {
            return false;
        }
        let mut xs = vars[..k].to_vec();
        xs.sort_by(|a, b| b.total_cmp(a));
        let mut prefix = 0.0;
        for (i, x) in xs.iter().enumerate() {
            prefix += x;
            if prefix > self.p.prefix(i + 1) + 1e-12 {
                return false;
            }
        }
        vars[..2 * k].iter().sum::<f64>() <= k as f64 + 1e-12
    }

    fn value(&self, vars: &[f64]) -> f64 {
        let k = self.p.k;
        (0..k).map(|i| self.p.v(vars[i], vars[k + i])).sum()
    }

    /// Moves `step` of mass between pairs of variables while that helps,
    /// halving the step when nothing does.
    fn climb(&self, vars: &mut [f64], mut step: f64) -> f64 {
        let n = vars.len();
        let mut current = self.value(vars);
        while step > 1e-10 {
            let mut improved = false;
            for from in 0..n {
                for to in 0..n {
                    if from == to || vars[from] < step - TOL {
                        continue;
                    }
                    vars[from] -= step;
                    vars[to] += step;
                    let val = self.value(vars);
                    if val > current + 1e-15 && self.feasible(vars) {
                        current = val;
                        improved = true;
                    } else {
                        vars[from] += step;
                        vars[to] -= step;
                    }
                }
            }
            if !improved {
                step /= 2.0;
            }
        }
        current
    }

    fn flatten_pairs(&self, pairs: &[(f64, f64)]) -> Vec<f64> {
        let k = self.p.k;
        let mut vars = vec![0.0; 2 * k + 1];
        for (i, &(x, y)) in pairs.iter().enumerate() {
            vars[i] = x;
            vars[k + i] = y;
        }
        vars[2 * k] = (k as f64 - vars[..2 * k].iter().sum::<f64>()).max(0.0);
        vars
    }

    fn random_start(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let k = self.p.k;
        let kf = k as f64;
        let leaders = rng.gen_range(0..=k);
        let mut xs: Vec<f64> = (0..k)
            .map(|i| if i < leaders { rng.gen::<f64>() } else { 0.0 })
            .collect();
        xs.sort_by(|a, b| b.total_cmp(a));
        let mut scale = f64::INFINITY;
        let mut prefix = 0.0;
        for (i, x) in xs.iter().enumerate() {
            prefix += x;
            if prefix > 0.0 {
                scale = scale.min(self.p.prefix(i + 1) / prefix);
            }
        }
        if prefix > 0.0 {
            scale = scale.min(kf / prefix);
        } else {
            scale = 0.0;
        }
        let scale = scale * rng.gen_range(0.2..=1.0);
        xs.iter_mut().for_each(|x| *x *= scale);
        let rest = (kf - xs.iter().sum::<f64>()).max(0.0);
        let weights: Vec<f64> = (0..k).map(|_| rng.gen::<f64>() + 1e-3).collect();
        let total: f64 = weights.iter().sum();
        let pairs: Vec<(f64, f64)> = xs
            .into_iter()
            .zip(weights)
            .map(|(x, w)| (x, rest * w / total * (1.0 - 1e-9)))
            .collect();
        self.flatten_pairs(&pairs)
    }
}

fn two_player_grid(p: &Params, step: f64) -> (f64, Vec<(f64, f64)>) {
    let x1_max = p.prefix(1).min(2.0);
    let both_max = p.prefix(2);
    let n1 = (x1_max / step + 1e-9).floor() as usize;
    let mut best = (f64::NEG_INFINITY, vec![(0.0, 0.0); 2]);
    for i1 in 0..=n1 {
        let x1 = i1 as f64 * step;
        for i2 in 0..=i1 {
            let x2 = i2 as f64 * step;
            if x1 + x2 > both_max + 1e-12 {
                break;
            }
            let rest = 2.0 - x1 - x2;
            if rest < -1e-12 {
                break;
            }
            let rest = rest.max(0.0);
            let nj = (rest / step + 1e-9).floor() as usize;
            for j in 0..=nj {
                let y1 = (j as f64 * step).min(rest);
                let y2 = rest - y1;
                let val = p.v(x1, y1) + p.v(x2, y2);
                if val > best.0 {
                    best = (val, vec![(x1, y1), (x2, y2)]);
                }
            }
        }
    }
    best
}

/// Numerical maximum over the unrestricted profile space: a full grid for
/// `k = 2`, seeded multistart local search otherwise. Returns the value and
/// the best profile found.
pub fn lemma43_grid_opt_with(
    k: usize,
    alpha: f64,
    beta: f64,
    eps: f64,
    opts: &GridOptions,
) -> (f64, Vec<(f64, f64)>) {
    if k == 0 {
        return (0.0, Vec::new());
    }
    let p = Params { k, alpha, beta, eps };
    let search = Search { p: &p };
    let unpack = |vars: &[f64]| -> Vec<(f64, f64)> { (0..k).map(|i| (vars[i], vars[k + i])).collect() };
    if k == 2 {
        let (value, pairs) = two_player_grid(&p, opts.resolution.max(1e-4));
        if !opts.refine {
            return (value, pairs);
        }
        let mut vars = search.flatten_pairs(&pairs);
        let refined = search.climb(&mut vars, opts.resolution / 2.0);
        return if refined > value {
            (refined, unpack(&vars))
        } else {
            (value, pairs)
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best = (f64::NEG_INFINITY, Vec::new());
    let mut starts = vec![search.flatten_pairs(&vec![(0.0, 1.0); k])];
    for _ in 0..opts.starts {
        starts.push(search.random_start(&mut rng));
    }
    for mut vars in starts {
        let value = search.climb(&mut vars, opts.resolution.max(1e-3) * 50.0);
        if value > best.0 {
            best = (value, unpack(&vars));
        }
    }
    best
}

pub fn lemma43_grid_opt(k: usize, alpha: f64, beta: f64, eps: f64, resolution: f64) -> f64 {
    let opts = GridOptions {
        resolution,
        ..GridOptions::default()
    };
    lemma43_grid_opt_with(k, alpha, beta, eps, &opts).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::no_bound_formula;

    fn closed_form(alpha: f64, beta: f64) -> f64 {
        let x1 = (1.0 + alpha * beta) / (2.0 * alpha);
        2.0 - (1.0 - alpha * (2.0 - x1)).max(0.0).powi(2)
    }

    #[test]
    fn two_player_reference_point() {
        let opt = lemma43_structured_opt(2, 2.0 / 3.0, 0.5, 0.0).unwrap();
        assert!((opt.value - 17.0 / 9.0).abs() < 1e-12);
        let (x1, y1) = opt.profile.pairs[0];
        let (x2, y2) = opt.profile.pairs[1];
        assert!((x1 - 1.0).abs() < 1e-9 && y1.abs() < 1e-12);
        assert!(x2.abs() < 1e-12 && (y2 - 1.0).abs() < 1e-9);
        assert!(opt.profile.check.feasible);
        let grid = lemma43_grid_opt(2, 2.0 / 3.0, 0.5, 0.0, 1.0 / 200.0);
        assert!((grid - 17.0 / 9.0).abs() < 1e-2);
        assert!(grid <= opt.value + 1e-9);
    }

    #[test]
    fn closed_form_inside_its_regime() {
        for (alpha, beta, eps) in [(0.8, 0.75, 0.05), (0.75, 0.75, 0.1), (0.95, 0.9, 0.05)] {
            let x1 = (1.0 + alpha * beta) / (2.0 * alpha);
            assert!(x1 <= 1.0 + 2.0 * eps);
            let opt = lemma43_structured_opt(2, alpha, beta, eps).unwrap();
            assert!((opt.value - closed_form(alpha, beta)).abs() < 1e-9, "{alpha} {beta}");
        }
    }

    #[test]
    fn closed_form_can_lose_to_an_even_far_split() {
        let (alpha, beta) = (0.9, 1.0);
        let even = 2.0 * (1.0 - (1.0f64 - alpha).powi(2));
        let opt = lemma43_structured_opt(2, alpha, beta, 0.1).unwrap();
        assert!(closed_form(alpha, beta) < even);
        assert!((opt.value - even).abs() < 1e-12);
        let grid = lemma43_grid_opt(2, alpha, beta, 0.1, 1.0 / 200.0);
        assert!((grid - even).abs() < 1e-9);
    }

    #[test]
    fn second_player_barely_close_beats_the_line() {
        // optimum sits where player 2 switches between close and far
        let (alpha, beta, eps) = (0.45361037837260193, 0.5393153403570526, 0.23163931357097498);
        let opt = lemma43_structured_opt(2, alpha, beta, eps).unwrap();
        let line = opt.two_player_line.unwrap();
        assert!(opt.value > line + 4e-5, "{} vs line {line}", opt.value);
        let (x2, y2) = opt.profile.pairs[1];
        assert!(x2 - beta > y2 && y2 > 0.0);
        assert!(lemma43_grid_opt(2, alpha, beta, eps, 1.0 / 50.0) <= opt.value + 1e-12);
    }

    #[test]
    fn large_beta_leaves_little_for_player_two() {
        let opt = lemma43_structured_opt(2, 0.5, 1.5, 0.0).unwrap();
        assert!(opt.value <= 1.0 + (1.0 - (1.0f64 - 0.5).powi(2)) + 1e-9);
    }

    #[test]
    fn tiny_alpha() {
        let opt = lemma43_structured_opt(3, 1e-6, 0.5, 0.0).unwrap();
        assert!(opt.value <= 1.0);
        assert!(matches!(lemma43_structured_opt(3, 0.0, 0.5, 0.0), Err(Error::Infeasible(_))));
    }

    #[test]
    fn coarse_grid_baseline() {
        let (alpha, beta) = (0.5, 0.5);
        let baseline = 2.0 * (1.0 - (1.0f64 - alpha).powi(2));
        let opts = GridOptions {
            resolution: 1.0,
            refine: false,
            ..GridOptions::default()
        };
        let (value, _) = lemma43_grid_opt_with(2, alpha, beta, 0.0, &opts);
        assert!(value >= baseline - 1e-12);
    }

    #[test]
    fn structured_dominates_search_and_stays_below_bound() {
        for &(k, alpha, beta, eps) in &[
            (3, 0.5, 0.4, 0.0),
            (3, 0.8, 0.6, 0.1),
            (4, 0.5, 0.3, 0.05),
            (4, 1.0, 0.5, 0.0),
            (5, 0.4, 0.25, 0.0),
        ] {
            let opt = lemma43_structured_opt(k, alpha, beta, eps).unwrap();
            let opts = GridOptions {
                starts: 8,
                ..GridOptions::default()
            };
            let (grid, pairs) = lemma43_grid_opt_with(k, alpha, beta, eps, &opts);
            let grid_profile = NormalizedProfile::new(alpha, beta, eps, pairs);
            assert!(grid_profile.check.feasible);
            assert!(grid <= opt.value + 1e-6, "k={k} α={alpha}: grid {grid} > {}", opt.value);
            let bound = no_bound_formula(k, alpha, eps).unwrap().value;
            assert!(opt.value <= bound + 1e-9, "k={k} α={alpha}: {} > {bound}", opt.value);
        }
    }
}
