//! Monte-Carlo coverage estimation and transmit-power optimizers.

use crate::geometry::Point2;
use crate::sinr_model::{covered_with, PowerVector, SinrScenario};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

pub const DEFAULT_BUDGET: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptError {
    #[error("invalid sampling plan")]
    InvalidPlan,
    #[error("invalid bounds: need 0 <= p_min <= p_max with one entry per transmitter")]
    InvalidBounds,
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("{needed} level vectors exceed the evaluation budget of {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SamplingPlan {
    Grid { nx: usize, ny: usize },
    Random { count: usize, seed: u64 },
}

impl SamplingPlan {
    /// Square grid with `n × n` cells.
    pub fn grid(n: usize) -> Self {
        SamplingPlan::Grid { nx: n, ny: n }
    }

    pub fn validate(&self) -> Result<(), OptError> {
        match *self {
            SamplingPlan::Grid { nx, ny } if nx >= 2 && ny >= 2 => Ok(()),
            SamplingPlan::Random { count, .. } if count >= 1 => Ok(()),
            _ => Err(OptError::InvalidPlan),
        }
    }

    /// Sample points in the scenario window. Grid samples sit at cell centers.
    pub fn points(&self, s: &SinrScenario) -> Vec<Point2> {
        let w = s.window;
        match *self {
            SamplingPlan::Grid { nx, ny } => {
                let (dx, dy) = (w.width() / nx as f64, w.height() / ny as f64);
                (0..ny)
                    .flat_map(|j| {
                        (0..nx).map(move |i| {
                            Point2::new(w.x0 + (i as f64 + 0.5) * dx, w.y0 + (j as f64 + 0.5) * dy)
                        })
                    })
                    .collect()
            }
            SamplingPlan::Random { count, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..count)
                    .map(|_| Point2::new(rng.gen_range(w.x0..w.x1), rng.gen_range(w.y0..w.y1)))
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub p_min: PowerVector,
    pub p_max: PowerVector,
}

impl Bounds {
    pub fn uniform(n: usize, lo: f64, hi: f64) -> Self {
        Bounds {
            p_min: PowerVector::uniform(n, lo),
            p_max: PowerVector::uniform(n, hi),
        }
    }

    pub fn len(&self) -> usize {
        self.p_min.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p_min.is_empty()
    }

    pub fn validate(&self, n: usize) -> Result<(), OptError> {
        let ok = self.p_min.len() == n
            && self.p_max.len() == n
            && self
                .p_min
                .values
                .iter()
                .zip(&self.p_max.values)
                .all(|(a, b)| a.is_finite() && b.is_finite() && 0.0 <= *a && a <= b);
        if ok {
            Ok(())
        } else {
            Err(OptError::InvalidBounds)
        }
    }

    fn clamp(&self, v: &mut [f64]) {
        for (i, x) in v.iter_mut().enumerate() {
            *x = x.clamp(self.p_min.values[i], self.p_max.values[i]);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhcParams {
    pub scale_factor: f64,
    pub step_size: f64,
    pub max_iterations: usize,
    pub scale_up_incr: usize,
    /// Rescale each candidate so its largest component ratio hits `p_max`
    /// before clamping, instead of plain clamping.
    #[serde(default)]
    pub proportional: bool,
}

impl RhcParams {
    pub fn for_alpha(alpha: f64) -> Self {
        RhcParams {
            scale_factor: 0.05 * alpha,
            step_size: 0.01,
            max_iterations: 2000,
            scale_up_incr: 100,
            proportional: false,
        }
    }

    pub fn validate(&self) -> Result<(), OptError> {
        if self.scale_factor > 0.0 && self.step_size > 0.0 && self.max_iterations > 0 && self.scale_up_incr > 0 {
            Ok(())
        } else {
            Err(OptError::InvalidParameter("RHC parameters must be positive"))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub best_power: PowerVector,
    pub best_area: f64,
    pub evaluations: usize,
    pub trace: Vec<(usize, f64)>,
    pub total_power: f64,
}

impl OptResult {
    fn new(best: Vec<f64>, area: f64, evaluations: usize, trace: Vec<(usize, f64)>) -> Self {
        let total_power = best.iter().sum();
        OptResult {
            best_power: PowerVector::new(best),
            best_area: area,
            evaluations,
            trace,
            total_power,
        }
    }
}

fn covered_fraction(s: &SinrScenario, powers: &[f64], pts: &[Point2]) -> f64 {
    let hits: usize = pts
        .par_iter()
        .with_min_len(512)
        .filter(|x| covered_with(s, powers, **x))
        .count();
    hits as f64 / pts.len() as f64
}

/// Fraction of the plan's samples with `SINR_max ≥ β`.
pub fn estimate_area(s: &SinrScenario, p: &PowerVector, plan: &SamplingPlan) -> f64 {
    covered_fraction(s, &p.values, &plan.points(s))
}

/// `ceil(3 ln(2/δ) / (ε² c))`.
pub fn required_samples(epsilon: f64, delta: f64, c_lower: f64) -> usize {
    let n = 3.0 * (2.0 / delta).ln() / (epsilon * epsilon * c_lower);
    // guard against 399.99999999 style rounding on exact products
    let r = n.round();
    if (n - r).abs() < 1e-9 * n {
        r as usize
    } else {
        n.ceil() as usize
    }
}

/// Area objective over a fixed sample set, cached per exact power vector.
pub struct AreaObjective<'a> {
    scenario: &'a SinrScenario,
    points: Vec<Point2>,
    cache: HashMap<Vec<u64>, f64>,
    calls: usize,
}

impl<'a> AreaObjective<'a> {
    pub fn new(scenario: &'a SinrScenario, plan: &SamplingPlan) -> Self {
        AreaObjective {
            scenario,
            points: plan.points(scenario),
            cache: HashMap::new(),
            calls: 0,
        }
    }

    pub fn eval(&mut self, p: &[f64]) -> f64 {
        self.calls += 1;
        let key: Vec<u64> = p.iter().map(|v| v.to_bits()).collect();
        if let Some(v) = self.cache.get(&key) {
            return *v;
        }
        let v = covered_fraction(self.scenario, p, &self.points);
        self.cache.insert(key, v);
        v
    }

    /// Objective calls so far, cache hits included.
    pub fn calls(&self) -> usize {
        self.calls
    }
}

/// Level vectors in evaluation order: nondecreasing total power, ties broken
/// lexicographically on the level indices.
pub fn level_vectors(b: &Bounds, levels: usize, budget: u64) -> Result<Vec<PowerVector>, OptError> {
    if levels == 0 {
        return Err(OptError::InvalidParameter("levels must be at least 1"));
    }
    let n = b.len();
    let needed = (levels as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if needed > budget as u128 {
        return Err(OptError::BudgetExceeded { needed, budget });
    }
    let level = |i: usize, j: usize| {
        if levels == 1 {
            b.p_min.values[i]
        } else {
            b.p_min.values[i] + j as f64 * (b.p_max.values[i] - b.p_min.values[i]) / (levels - 1) as f64
        }
    };
    let decode = |mut code: u64| {
        let mut idx = vec![0usize; n];
        for slot in idx.iter_mut().rev() {
            *slot = (code % levels as u64) as usize;
            code /= levels as u64;
        }
        idx
    };
    let mut order: Vec<(f64, u64)> = (0..needed as u64)
        .map(|code| {
            let idx = decode(code);
            (idx.iter().enumerate().map(|(i, &j)| level(i, j)).sum(), code)
        })
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(order
        .into_iter()
        .map(|(_, code)| {
            let idx = decode(code);
            PowerVector::new(idx.iter().enumerate().map(|(i, &j)| level(i, j)).collect())
        })
        .collect())
}

pub fn exhaustive_search(
    s: &SinrScenario,
    b: &Bounds,
    levels: usize,
    plan: &SamplingPlan,
) -> Result<OptResult, OptError> {
    exhaustive_search_with_budget(s, b, levels, plan, DEFAULT_BUDGET)
}

pub fn exhaustive_search_with_budget(
    s: &SinrScenario,
    b: &Bounds,
    levels: usize,
    plan: &SamplingPlan,
    budget: u64,
) -> Result<OptResult, OptError> {
    plan.validate()?;
    b.validate(s.len())?;
    let candidates = level_vectors(b, levels, budget)?;
    let mut obj = AreaObjective::new(s, plan);
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut trace = Vec::new();
    for v in candidates {
        let a = obj.eval(&v.values);
        if best.as_ref().map_or(true, |(_, ba)| a > *ba) {
            trace.push((obj.calls(), a));
            best = Some((v.values, a));
        }
    }
    let (p, a) = best.expect("at least one level vector");
    Ok(OptResult::new(p, a, obj.calls(), trace))
}

pub fn random_hill_climb(
    s: &SinrScenario,
    b: &Bounds,
    params: &RhcParams,
    plan: &SamplingPlan,
    seed: u64,
) -> Result<OptResult, OptError> {
    plan.validate()?;
    b.validate(s.len())?;
    params.validate()?;
    let n = s.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut obj = AreaObjective::new(s, plan);
    let range: Vec<f64> = (0..n).map(|i| b.p_max.values[i] - b.p_min.values[i]).collect();

    let mut best_p = b.p_min.values.clone();
    let mut best_area = obj.eval(&best_p);
    let mut trace = vec![(obj.calls(), best_area)];
    loop {
        let mut attempts = 0usize;
        let mut scale_up = 1.0 + params.scale_factor;
        let scale_down = 1.0 + params.scale_factor;
        let mut shrink: Vec<f64> = range.iter().map(|r| params.step_size * r).collect();
        let mut stretch = shrink.clone();
        let mut improved = false;
        while attempts < params.max_iterations && !improved {
            attempts += 1;
            if attempts > params.scale_up_incr {
                scale_up = 1.0 + 2.0 * params.scale_factor;
            }
            let incr = if attempts % 2 == 0 {
                shrink.iter_mut().for_each(|v| *v /= scale_down);
                &shrink
            } else {
                stretch.iter_mut().for_each(|v| *v *= scale_up);
                &stretch
            };
            let mut t: Vec<f64> = (0..n).map(|i| best_p[i] + rng.gen::<f64>() * incr[i]).collect();
            if params.proportional {
                let k = (0..n)
                    .filter(|&i| t[i] > 0.0)
                    .map(|i| b.p_max.values[i] / t[i])
                    .fold(f64::INFINITY, f64::min);
                if k.is_finite() {
                    t.iter_mut().for_each(|v| *v *= k);
                }
            }
            b.clamp(&mut t);
            let a = obj.eval(&t);
            if a > best_area {
                best_area = a;
                best_p = t;
                trace.push((obj.calls(), a));
                improved = true;
            }
        }
        if attempts >= params.max_iterations {
            break;
        }
    }
    Ok(OptResult::new(best_p, best_area, obj.calls(), trace))
}

const NM_MAX_ITER: usize = 500;
const NM_TOL: f64 = 1e-6;

/// Bounded Nelder-Mead maximization with random restarts.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut objective: F,
    b: &Bounds,
    restarts: usize,
    seed: u64,
) -> Result<OptResult, OptError> {
    b.validate(b.len())?;
    if restarts == 0 {
        return Err(OptError::InvalidParameter("restarts must be at least 1"));
    }
    let n = b.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut calls = 0usize;
    let mut f = |x: &[f64]| {
        calls += 1;
        (objective(x), calls)
    };
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut trace = Vec::new();
    let mut offer = |x: &[f64], v: f64, k: usize, best: &mut Option<(Vec<f64>, f64)>| {
        if best.as_ref().map_or(true, |(_, bv)| v > *bv) {
            *best = Some((x.to_vec(), v));
            trace.push((k, v));
        }
    };

    for _ in 0..restarts {
        let x0: Vec<f64> = (0..n)
            .map(|i| {
                let (lo, hi) = (b.p_min.values[i], b.p_max.values[i]);
                if hi > lo {
                    rng.gen_range(lo..=hi)
                } else {
                    lo
                }
            })
            .collect();
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        let (v0, k0) = f(&x0);
        offer(&x0, v0, k0, &mut best);
        simplex.push((x0.clone(), v0));
        for i in 0..n {
            let mut x = x0.clone();
            let step = 0.2 * (b.p_max.values[i] - b.p_min.values[i]);
            x[i] = if x[i] + step <= b.p_max.values[i] { x[i] + step } else { x[i] - step };
            b.clamp(&mut x);
            let (v, k) = f(&x);
            offer(&x, v, k, &mut best);
            simplex.push((x, v));
        }

        for _ in 0..NM_MAX_ITER {
            // descending by value; stable so earlier vertices win ties
            simplex.sort_by(|a, b| b.1.total_cmp(&a.1));
            if simplex[0].1 - simplex[n].1 < NM_TOL {
                break;
            }
            let mut c = vec![0.0; n];
            for (x, _) in &simplex[..n] {
                for i in 0..n {
                    c[i] += x[i] / n as f64;
                }
            }
            let worst = simplex[n].clone();
            let along = |t: f64| {
                let mut x: Vec<f64> = (0..n).map(|i| c[i] + t * (worst.0[i] - c[i])).collect();
                b.clamp(&mut x);
                x
            };
            let xr = along(-1.0);
            let (fr, kr) = f(&xr);
            offer(&xr, fr, kr, &mut best);
            if fr > simplex[0].1 {
                let xe = along(-2.0);
                let (fe, ke) = f(&xe);
                offer(&xe, fe, ke, &mut best);
                simplex[n] = if fe > fr { (xe, fe) } else { (xr, fr) };
            } else if fr > simplex[n - 1].1 {
                simplex[n] = (xr, fr);
            } else {
                let (xc, outside) = if fr > worst.1 { (along(-0.5), true) } else { (along(0.5), false) };
                let (fc, kc) = f(&xc);
                offer(&xc, fc, kc, &mut best);
                let accept = if outside { fc >= fr } else { fc > worst.1 };
                if accept {
                    simplex[n] = (xc, fc);
                } else {
                    let top = simplex[0].0.clone();
                    for v in simplex.iter_mut().skip(1) {
                        let mut x: Vec<f64> = (0..n).map(|i| top[i] + 0.5 * (v.0[i] - top[i])).collect();
                        b.clamp(&mut x);
                        let (fx, kx) = f(&x);
                        offer(&x, fx, kx, &mut best);
                        *v = (x, fx);
                    }
                }
            }
        }
    }
    let (p, v) = best.expect("restarts >= 1");
    Ok(OptResult::new(p, v, calls, trace))
}

/// Nelder-Mead on the estimated coverage area.
pub fn nelder_mead_area(
    s: &SinrScenario,
    b: &Bounds,
    plan: &SamplingPlan,
    restarts: usize,
    seed: u64,
) -> Result<OptResult, OptError> {
    plan.validate()?;
    b.validate(s.len())?;
    let mut obj = AreaObjective::new(s, plan);
    nelder_mead(|x| obj.eval(x), b, restarts, seed)
}

/// Forces the `i` smallest powers to their minimum for each `i`, keeping the
/// best of these candidates and the input.
pub fn post_process(
    s: &SinrScenario,
    v: &PowerVector,
    p_min: &PowerVector,
    plan: &SamplingPlan,
) -> Result<OptResult, OptError> {
    plan.validate()?;
    if v.len() != s.len() || p_min.len() != s.len() {
        return Err(OptError::InvalidBounds);
    }
    let mut obj = AreaObjective::new(s, plan);
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v.values[a].total_cmp(&v.values[b]).then(a.cmp(&b)));

    let mut best_p = v.values.clone();
    let mut best_area = obj.eval(&best_p);
    let mut trace = vec![(obj.calls(), best_area)];
    let mut u = v.values.clone();
    for &k in &order {
        u[k] = p_min.values[k];
        let a = obj.eval(&u);
        if a > best_area {
            best_area = a;
            best_p = u.clone();
            trace.push((obj.calls(), a));
        }
    }
    Ok(OptResult::new(best_p, best_area, obj.calls(), trace))
}

/// Coverage for the same power on every transmitter at `levels` evenly spaced
/// values in `[lo, hi]`.
pub fn uniform_power_sweep(
    s: &SinrScenario,
    lo: f64,
    hi: f64,
    levels: usize,
    plan: &SamplingPlan,
) -> Result<Vec<(f64, f64)>, OptError> {
    plan.validate()?;
    if levels < 2 || !(0.0 <= lo && lo <= hi) {
        return Err(OptError::InvalidParameter("sweep needs levels >= 2 and 0 <= lo <= hi"));
    }
    let pts = plan.points(s);
    Ok((0..levels)
        .map(|j| {
            let p = lo + (hi - lo) * j as f64 / (levels - 1) as f64;
            (p, covered_fraction(s, &vec![p; s.len()], &pts))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Window;
    use proptest::prelude::*;
    use rand::Rng;

    fn unit() -> Window {
        Window::new(0.0, 0.0, 1.0, 1.0)
    }

    fn random_scenario(seed: u64, n: usize, alpha: f64, beta: f64, noise: f64) -> SinrScenario {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sites = (0..n).map(|_| Point2::new(rng.gen(), rng.gen())).collect();
        SinrScenario::new(sites, PowerVector::uniform(n, 1.0), alpha, beta, noise, unit()).unwrap()
    }

    #[test]
    fn trivial_estimates() {
        let s = SinrScenario::new(vec![Point2::new(0.5, 0.5)], PowerVector::new(vec![1e6]), 2.0, 1.0, 1e-3, unit())
            .unwrap();
        assert_eq!(estimate_area(&s, &s.powers, &SamplingPlan::grid(40)), 1.0);
        let s = SinrScenario::new(vec![Point2::new(0.5, 0.5)], PowerVector::new(vec![1.0]), 2.0, 1e9, 1e-3, unit())
            .unwrap();
        assert_eq!(estimate_area(&s, &s.powers, &SamplingPlan::grid(40)), 0.0);
    }

    #[test]
    fn chernoff_sizes() {
        assert_eq!(required_samples(0.15, 0.1, 1.0), 400);
        assert_eq!(required_samples(0.15, 0.1, 0.5), 799);
        assert_eq!(4 * required_samples(0.15, 0.1, 1.0), 1600);
    }

    #[test]
    fn grid_and_random_estimates_agree() {
        let mut ok = 0;
        for seed in 0..100 {
            let s = random_scenario(seed, 5, 3.0, 1.0, 1e-3);
            let g = estimate_area(&s, &s.powers, &SamplingPlan::grid(40));
            let r = estimate_area(&s, &s.powers, &SamplingPlan::Random { count: 400, seed: 1000 + seed });
            if (g - r).abs() <= 0.15 * g {
                ok += 1;
            }
        }
        assert!(ok >= 90, "{ok}/100");
    }

    #[test]
    fn invalid_plans_rejected() {
        assert_eq!(SamplingPlan::Grid { nx: 1, ny: 5 }.validate(), Err(OptError::InvalidPlan));
        assert_eq!(SamplingPlan::Random { count: 0, seed: 0 }.validate(), Err(OptError::InvalidPlan));
    }

    #[test]
    fn exhaustive_examples() {
        let plan = SamplingPlan::grid(20);
        let s = random_scenario(3, 1, 2.0, 1.0, 1e-3);
        let b = Bounds::uniform(1, 0.0, 100.0);
        let r = exhaustive_search(&s, &b, 1, &plan).unwrap();
        assert_eq!((r.best_power.values.clone(), r.evaluations), (vec![0.0], 1));
        let r = exhaustive_search(&s, &Bounds::uniform(1, 1e-6, 100.0), 2, &plan).unwrap();
        assert_eq!(r.best_power.values, vec![100.0]);

        let s = random_scenario(4, 2, 2.0, 1.0, 1e-3);
        let r = exhaustive_search(&s, &Bounds::uniform(2, 0.0, 100.0), 2, &plan).unwrap();
        assert_eq!(r.evaluations, 4);
        let brute = [[0.0, 0.0], [0.0, 100.0], [100.0, 0.0], [100.0, 100.0]]
            .iter()
            .map(|v| estimate_area(&s, &PowerVector::new(v.to_vec()), &plan))
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(r.best_area, brute);
    }

    #[test]
    fn exhaustive_budget() {
        let s = random_scenario(4, 7, 2.0, 1.0, 1e-3);
        let e = exhaustive_search(&s, &Bounds::uniform(7, 0.0, 1.0), 8, &SamplingPlan::grid(4));
        assert!(matches!(e, Err(OptError::BudgetExceeded { needed: 2_097_152, .. })));
    }

    #[test]
    fn level_order_is_by_total_then_lexicographic() {
        let v = level_vectors(&Bounds::uniform(2, 0.0, 2.0), 3, DEFAULT_BUDGET).unwrap();
        let got: Vec<Vec<f64>> = v.into_iter().map(|p| p.values).collect();
        assert_eq!(
            got,
            vec![
                vec![0.0, 0.0],
                vec![0.0, 1.0],
                vec![1.0, 0.0],
                vec![0.0, 2.0],
                vec![1.0, 1.0],
                vec![2.0, 0.0],
                vec![1.0, 2.0],
                vec![2.0, 1.0],
                vec![2.0, 2.0]
            ]
        );
    }

    #[test]
    fn rhc_single_transmitter_reaches_max() {
        let s = SinrScenario::new(vec![Point2::new(0.5, 0.5)], PowerVector::new(vec![1.0]), 2.0, 1.0, 1.0, unit())
            .unwrap();
        let b = Bounds::uniform(1, 0.0, 100.0);
        let plan = SamplingPlan::grid(40);
        let r = random_hill_climb(&s, &b, &RhcParams::for_alpha(2.0), &plan, 11).unwrap();
        let full = estimate_area(&s, &PowerVector::new(vec![100.0]), &plan);
        assert_eq!(r.best_area, full);
        assert!(r.best_area >= estimate_area(&s, &b.p_min, &plan));
        assert_eq!(r.best_area, estimate_area(&s, &r.best_power, &plan));
    }

    #[test]
    fn nm_quadratic_and_constant() {
        let b = Bounds::uniform(3, 0.0, 100.0);
        let r = nelder_mead(|x| -x.iter().map(|v| (v - 50.0).powi(2)).sum::<f64>(), &b, 3, 5).unwrap();
        for v in &r.best_power.values {
            assert!((v - 50.0).abs() < 0.5, "{:?}", r.best_power);
        }
        let r = nelder_mead(|_| 1.0, &b, 1, 9).unwrap();
        assert_eq!(r.evaluations, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x0: Vec<f64> = (0..3).map(|_| rng.gen_range(0.0..=100.0)).collect();
        assert_eq!(r.best_power.values, x0);
    }

    #[test]
    fn post_process_examples() {
        let plan = SamplingPlan::grid(30);
        let s = random_scenario(2, 1, 2.0, 1.0, 1e-3);
        let r = post_process(&s, &PowerVector::new(vec![50.0]), &PowerVector::new(vec![0.0]), &plan).unwrap();
        assert_eq!(r.evaluations, 2);
        assert_eq!(r.best_power.values, vec![50.0]);

        // site 1 sits next to site 0 and only drowns it out at this β
        let sites = vec![Point2::new(0.5, 0.5), Point2::new(0.55, 0.5)];
        let s = SinrScenario::new(sites, PowerVector::uniform(2, 1.0), 2.0, 3.0, 1e-3, unit()).unwrap();
        let v = PowerVector::new(vec![100.0, 50.0]);
        let before = estimate_area(&s, &v, &plan);
        let r = post_process(&s, &v, &PowerVector::new(vec![0.0, 0.0]), &plan).unwrap();
        assert!(r.best_area > before);
        assert_eq!(r.best_power.values, vec![100.0, 0.0]);
    }

    #[test]
    fn uniform_sweep_is_monotone() {
        let s = random_scenario(21, 10, 2.0, 1.0, 1e-3);
        let sweep = uniform_power_sweep(&s, 0.0, 100.0, 20, &SamplingPlan::grid(40)).unwrap();
        for w in sweep.windows(2) {
            assert!(w[1].1 >= w[0].1);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn optimizers_are_reproducible_and_monotone(seed in 0u64..1000) {
            let s = random_scenario(seed, 3, 3.0, 1.0, 1e-3);
            let b = Bounds::uniform(3, 0.0, 100.0);
            let plan = SamplingPlan::grid(20);
            let params = RhcParams { max_iterations: 200, ..RhcParams::for_alpha(3.0) };
            let r = random_hill_climb(&s, &b, &params, &plan, seed).unwrap();
            prop_assert_eq!(r.best_area, estimate_area(&s, &r.best_power, &plan));
            prop_assert!(r.trace.windows(2).all(|w| w[1].1 > w[0].1 && w[1].0 > w[0].0));
            let again = random_hill_climb(&s, &b, &params, &plan, seed).unwrap();
            prop_assert_eq!(&r, &again);

            let n = nelder_mead_area(&s, &b, &plan, 2, seed).unwrap();
            prop_assert_eq!(n.best_area, estimate_area(&s, &n.best_power, &plan));
            prop_assert!(n.best_power.values.iter().all(|v| (0.0..=100.0).contains(v)));

            let e = exhaustive_search(&s, &b, 3, &plan).unwrap();
            prop_assert_eq!(e.best_area, estimate_area(&s, &e.best_power, &plan));
            let p = post_process(&s, &r.best_power, &b.p_min, &plan).unwrap();
            prop_assert!(p.best_area >= r.best_area);
            prop_assert_eq!(p.evaluations, 4);
        }
    }
}
