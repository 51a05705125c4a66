//! SINR evaluation, capture transmitters and the star-convexity checks.
//!
//! `SINR(x, t) = R(x, t) / (Σ_{s≠t} R(x, s) + N₀)` with `R(x, t) = P_t / d(x, t)^α`.
//! Coverage uses `SINR ≥ β` throughout.

use crate::geometry::{eps_geom, Point2, Window};
use crate::power_diagram::SiteId;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SinrError {
    #[error("scenario has no transmitters")]
    NoSites,
    #[error("{sites} sites but {powers} powers")]
    LengthMismatch { sites: usize, powers: usize },
    #[error("path-loss exponent must be at least 2, got {0}")]
    InvalidAlpha(f64),
    #[error("threshold beta must be positive, got {0}")]
    InvalidBeta(f64),
    #[error("noise must be non-negative, and positive with a single transmitter")]
    InvalidNoise,
    #[error("power {0} is negative or not finite")]
    InvalidPower(usize),
    #[error("evaluation window must have unit area, got {0}")]
    WindowArea(f64),
    #[error("evaluation point coincides with a transmitter")]
    Singularity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PowerVector {
    pub values: Vec<f64>,
}

impl PowerVector {
    pub fn new(values: Vec<f64>) -> Self {
        PowerVector { values }
    }

    pub fn uniform(n: usize, p: f64) -> Self {
        PowerVector::new(vec![p; n])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SinrScenario {
    pub sites: Vec<Point2>,
    pub powers: PowerVector,
    pub alpha: f64,
    pub beta: f64,
    pub noise: f64,
    pub window: Window,
}

impl SinrScenario {
    pub fn new(
        sites: Vec<Point2>,
        powers: PowerVector,
        alpha: f64,
        beta: f64,
        noise: f64,
        window: Window,
    ) -> Result<Self, SinrError> {
        if sites.is_empty() {
            return Err(SinrError::NoSites);
        }
        if sites.len() != powers.len() {
            return Err(SinrError::LengthMismatch {
                sites: sites.len(),
                powers: powers.len(),
            });
        }
        if !(alpha >= 2.0 && alpha.is_finite()) {
            return Err(SinrError::InvalidAlpha(alpha));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(SinrError::InvalidBeta(beta));
        }
        if !(noise >= 0.0 && noise.is_finite()) || (noise == 0.0 && sites.len() < 2) {
            return Err(SinrError::InvalidNoise);
        }
        if let Some(i) = powers.values.iter().position(|p| !(*p >= 0.0 && p.is_finite())) {
            return Err(SinrError::InvalidPower(i));
        }
        if !window.is_valid() || (window.area() - 1.0).abs() > 1e-9 {
            return Err(SinrError::WindowArea(window.area()));
        }
        Ok(SinrScenario {
            sites,
            powers,
            alpha,
            beta,
            noise,
            window,
        })
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn eps(&self) -> f64 {
        eps_geom(self.window.diameter())
    }

    /// Same scenario with another power vector.
    pub fn with_powers(&self, powers: PowerVector) -> Result<Self, SinrError> {
        SinrScenario::new(
            self.sites.clone(),
            powers,
            self.alpha,
            self.beta,
            self.noise,
            self.window,
        )
    }

    fn received(&self, powers: &[f64], x: Point2, t: usize) -> f64 {
        powers[t] / x.dist2(self.sites[t]).powf(0.5 * self.alpha)
    }
}

pub fn sinr_at(s: &SinrScenario, x: Point2, t: SiteId) -> Result<f64, SinrError> {
    if x.dist(s.sites[t.0]) <= s.eps() {
        return Err(SinrError::Singularity);
    }
    let signal = s.received(&s.powers.values, x, t.0);
    let interference: f64 = (0..s.len())
        .filter(|&k| k != t.0)
        .map(|k| s.received(&s.powers.values, x, k))
        .sum();
    let denom = interference + s.noise;
    if denom == 0.0 {
        return Err(SinrError::Singularity);
    }
    Ok(signal / denom)
}

/// (capture transmitter, its SINR) under the given powers. Points within
/// `eps_geom` of a powered transmitter belong to it with infinite SINR.
pub(crate) fn capture_with(s: &SinrScenario, powers: &[f64], x: Point2) -> (usize, f64) {
    let eps = s.eps();
    for (k, &c) in s.sites.iter().enumerate() {
        if powers[k] > 0.0 && x.dist(c) <= eps {
            return (k, f64::INFINITY);
        }
    }
    let mut best = 0usize;
    let mut best_r = f64::NEG_INFINITY;
    let mut total = 0.0;
    for k in 0..s.len() {
        let r = s.received(powers, x, k);
        total += r;
        if r > best_r {
            best_r = r;
            best = k;
        }
    }
    if best_r <= 0.0 {
        return (best, 0.0);
    }
    let others: f64 = if s.len() > 1 && total - best_r > 1e-12 * total {
        (0..s.len())
            .filter(|&k| k != best)
            .map(|k| s.received(powers, x, k))
            .sum()
    } else {
        0.0
    };
    let denom = others + s.noise;
    if denom == 0.0 {
        (best, f64::INFINITY)
    } else {
        (best, best_r / denom)
    }
}

/// argmax_t SINR(x, t), ties to the smallest id.
pub fn capture_transmitter(s: &SinrScenario, x: Point2) -> SiteId {
    SiteId(capture_with(s, &s.powers.values, x).0)
}

/// SINR_max(x) ≥ β.
pub fn is_covered(s: &SinrScenario, x: Point2) -> bool {
    covered_with(s, &s.powers.values, x)
}

pub(crate) fn covered_with(s: &SinrScenario, powers: &[f64], x: Point2) -> bool {
    capture_with(s, powers, x).1 >= s.beta
}

/// Whether `x` is covered with `t` as its capture transmitter.
fn covered_by(s: &SinrScenario, x: Point2, t: usize) -> bool {
    let (k, v) = capture_with(s, &s.powers.values, x);
    k == t && v >= s.beta
}

fn ray_exit(w: &Window, o: Point2, d: Point2) -> f64 {
    let mut t = f64::INFINITY;
    if d.x > 0.0 {
        t = t.min((w.x1 - o.x) / d.x);
    } else if d.x < 0.0 {
        t = t.min((w.x0 - o.x) / d.x);
    }
    if d.y > 0.0 {
        t = t.min((w.y1 - o.y) / d.y);
    } else if d.y < 0.0 {
        t = t.min((w.y0 - o.y) / d.y);
    }
    t.max(0.0)
}

/// Coverage by `t` at `samples` points on the ray from `t` to the window
/// boundary, starting `eps_geom` away from the transmitter.
pub fn ray_coverage_profile(s: &SinrScenario, t: SiteId, direction: Point2, samples: usize) -> Vec<bool> {
    let samples = samples.max(2);
    let o = s.sites[t.0];
    let d = direction * (1.0 / direction.norm());
    let eps = s.eps();
    let len = ray_exit(&s.window, o, d).max(eps);
    (0..samples)
        .map(|k| {
            let r = eps + (len - eps) * k as f64 / (samples - 1) as f64;
            covered_by(s, o + d * r, t.0)
        })
        .collect()
}

/// `f = d(·,t)² / d(·,u)²` sampled along the part of the line lying on t's
/// side of the t/u bisector, starting at the crossing with the bisector.
pub fn ratio_profile(
    t: Point2,
    u: Point2,
    line: (Point2, Point2),
    samples: usize,
) -> Result<Vec<f64>, SinrError> {
    let samples = samples.max(2);
    let (o, dir) = line;
    let d = dir * (1.0 / dir.norm());
    let n = (u - t) * 2.0;
    let g0 = n.dot(o) - (u.norm2() - t.norm2());
    let g1 = n.dot(d);
    let (start, sign, len) = if g1 == 0.0 {
        let mid = (t - o).dot(d);
        let span = 4.0 * (t.dist(o) + u.dist(o) + t.dist(u));
        (mid - span, 1.0, 2.0 * span)
    } else {
        let s0 = -g0 / g1;
        let x0 = o + d * s0;
        let sign = if g1 < 0.0 { 1.0 } else { -1.0 };
        (s0, sign, 4.0 * (t.dist(x0) + u.dist(x0)))
    };
    (0..samples)
        .map(|k| {
            let x = o + d * (start + sign * len * k as f64 / (samples - 1) as f64);
            let du = x.dist2(u);
            if du == 0.0 {
                Err(SinrError::Singularity)
            } else {
                Ok(x.dist2(t) / du)
            }
        })
        .collect()
}

/// True when the sequence never goes from non-increasing back to decreasing
/// after rising, i.e. at most one sign change of differences, from − to +.
pub fn is_quasi_convex(values: &[f64]) -> bool {
    let mut rising = false;
    for w in values.windows(2) {
        let diff = w[1] - w[0];
        let tol = 1e-12 * w[0].abs().max(w[1].abs());
        if diff > tol {
            rising = true;
        } else if diff < -tol && rising {
            return false;
        }
    }
    true
}

/// `true^k false^m`.
pub fn is_prefix(profile: &[bool]) -> bool {
    let first_false = profile.iter().position(|b| !b).unwrap_or(profile.len());
    profile[first_false..].iter().all(|b| !b)
}
