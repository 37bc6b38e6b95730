//! Discrete power-law fitting for rank-frequency data.
//!
//! The default estimator maximizes the exact discrete likelihood
//! `L(a) = -a * sum(ln x) - n * ln zeta(a, xmin)`. The closed-form
//! `1 + n / sum(ln(x / (xmin - 0.5)))` approximation is available too, but it
//! is strongly biased when `xmin` is small.

use serde::{Deserialize, Serialize};

/// Minimum tail size accepted by [`fit_power_law`].
pub const MIN_OBSERVATIONS: usize = 50;

const ALPHA_LO: f64 = 1.0 + 1e-9;
const ALPHA_HI: f64 = 30.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PowerLawError {
    #[error("need at least {needed} observations at or above xmin, got {got}")]
    TooFewObservations { got: usize, needed: usize },
    #[error("counts must be positive integers")]
    NonPositive,
    #[error("xmin must be at least 1")]
    BadXmin,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// Numerical maximum of the exact discrete likelihood.
    #[default]
    Exact,
    /// Closed-form continuous approximation with the 0.5 offset.
    Approximate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PowerLawOptions {
    pub xmin: u64,
    /// Choose xmin by minimizing the Kolmogorov-Smirnov distance instead of
    /// using the fixed value.
    pub search_xmin: bool,
    pub estimator: Estimator,
    pub min_observations: usize,
}

impl Default for PowerLawOptions {
    fn default() -> Self {
        Self {
            xmin: 1,
            search_xmin: false,
            estimator: Estimator::Exact,
            min_observations: MIN_OBSERVATIONS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    /// `None` when the fit is degenerate.
    pub alpha: Option<f64>,
    pub xmin: u64,
    /// Observations at or above xmin.
    pub n: usize,
    pub estimator: Estimator,
    /// Every observation equals xmin, so the likelihood grows without bound.
    pub degenerate: bool,
    pub ks_distance: Option<f64>,
}

const BERNOULLI_2J: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

/// Hurwitz zeta `sum_{k>=0} (q + k)^-s` for `s > 1`, `q > 0`, by
/// Euler-Maclaurin summation.
pub fn hurwitz_zeta(s: f64, q: f64) -> f64 {
    debug_assert!(s > 1.0 && q > 0.0);
    const N: usize = 12;
    let mut sum = 0.0;
    for k in 0..N {
        sum += (q + k as f64).powf(-s);
    }
    let a = q + N as f64;
    let mut tail = a.powf(1.0 - s) / (s - 1.0) + 0.5 * a.powf(-s);
    // rising factorial s(s+1)...(s+2j-2) / (2j)! times a^(-s-2j+1)
    let mut fact = s / a.powf(s + 1.0) / 2.0;
    for (j, b) in BERNOULLI_2J.iter().enumerate() {
        let term = b * fact;
        tail += term;
        let k = 2.0 * (j as f64 + 1.0);
        fact *= (s + k - 1.0) * (s + k) / ((k + 1.0) * (k + 2.0) * a * a);
    }
    sum + tail
}

fn log_likelihood(alpha: f64, n: f64, sum_ln: f64, xmin: u64) -> f64 {
    -alpha * sum_ln - n * hurwitz_zeta(alpha, xmin as f64).ln()
}

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > 1e-10 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = f(x1);
        }
    }
    (lo + hi) / 2.0
}

/// Exponent for the observations `tail` (all `>= xmin`).
fn estimate(tail: &[u64], xmin: u64, estimator: Estimator) -> f64 {
    let n = tail.len() as f64;
    match estimator {
        Estimator::Approximate => {
            let denom: f64 = tail
                .iter()
                .map(|&x| (x as f64 / (xmin as f64 - 0.5)).ln())
                .sum();
            1.0 + n / denom
        }
        Estimator::Exact => {
            let sum_ln: f64 = tail.iter().map(|&x| (x as f64).ln()).sum();
            golden_max(|a| log_likelihood(a, n, sum_ln, xmin), ALPHA_LO, ALPHA_HI)
        }
    }
}

/// Largest gap between the empirical and fitted CDFs over the tail.
fn ks_distance(sorted_tail: &[u64], alpha: f64, xmin: u64) -> f64 {
    let n = sorted_tail.len() as f64;
    let z = hurwitz_zeta(alpha, xmin as f64);
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < sorted_tail.len() {
        let x = sorted_tail[i];
        let mut j = i;
        while j < sorted_tail.len() && sorted_tail[j] == x {
            j += 1;
        }
        let emp_below = i as f64 / n;
        let emp_at = j as f64 / n;
        let fit_below = 1.0 - hurwitz_zeta(alpha, x as f64) / z;
        let fit_at = 1.0 - hurwitz_zeta(alpha, x as f64 + 1.0) / z;
        d = d.max((emp_at - fit_at).abs()).max((emp_below - fit_below).abs());
        i = j;
    }
    d
}

fn fit_at(sorted: &[u64], xmin: u64, estimator: Estimator) -> (PowerLawFit, Vec<u64>) {
    let tail: Vec<u64> = sorted.iter().copied().filter(|&x| x >= xmin).collect();
    let degenerate = tail.iter().all(|&x| x == xmin);
    let (alpha, ks) = if degenerate {
        (None, None)
    } else {
        let a = estimate(&tail, xmin, estimator);
        (Some(a), Some(ks_distance(&tail, a, xmin)))
    };
    (
        PowerLawFit {
            alpha,
            xmin,
            n: tail.len(),
            estimator,
            degenerate,
            ks_distance: ks,
        },
        tail,
    )
}

/// Fits a discrete power law to positive integer counts.
pub fn fit_power_law(counts: &[u64], opts: &PowerLawOptions) -> Result<PowerLawFit, PowerLawError> {
    if opts.xmin == 0 {
        return Err(PowerLawError::BadXmin);
    }
    if counts.contains(&0) {
        return Err(PowerLawError::NonPositive);
    }
    let mut sorted = counts.to_vec();
    sorted.sort_unstable();
    let needed = opts.min_observations.max(1);
    if !opts.search_xmin {
        let n = sorted.iter().filter(|&&x| x >= opts.xmin).count();
        if n < needed {
            return Err(PowerLawError::TooFewObservations { got: n, needed });
        }
        return Ok(fit_at(&sorted, opts.xmin, opts.estimator).0);
    }
    let mut candidates: Vec<u64> = sorted.clone();
    candidates.dedup();
    let mut best: Option<PowerLawFit> = None;
    for &xmin in candidates.iter().take(1000) {
        let n = sorted.len() - sorted.partition_point(|&x| x < xmin);
        if n < needed {
            break;
        }
        let (fit, _) = fit_at(&sorted, xmin, opts.estimator);
        let Some(d) = fit.ks_distance else { continue };
        if best.as_ref().is_none_or(|b| d < b.ks_distance.unwrap_or(f64::INFINITY)) {
            best = Some(fit);
        }
    }
    match best {
        Some(b) => Ok(b),
        None => {
            let n = sorted.iter().filter(|&&x| x >= opts.xmin).count();
            if n < needed {
                return Err(PowerLawError::TooFewObservations { got: n, needed });
            }
            Ok(fit_at(&sorted, opts.xmin, opts.estimator).0)
        }
    }
}

/// Inverse-CDF sampler for the discrete power law (zeta distribution)
/// `P(X = x) = x^-alpha / zeta(alpha, xmin)`, `x >= xmin`.
#[derive(Debug, Clone)]
pub struct ZetaSampler {
    alpha: f64,
    xmin: u64,
    norm: f64,
    /// `survival[k] = P(X >= xmin + k)` for the first table entries.
    survival: Vec<f64>,
}

const TABLE: usize = 4096;
const X_CAP: u64 = 1 << 62;

impl ZetaSampler {
    pub fn new(alpha: f64, xmin: u64) -> Self {
        assert!(alpha > 1.0 && xmin >= 1);
        let norm = hurwitz_zeta(alpha, xmin as f64);
        let mut survival = Vec::with_capacity(TABLE + 1);
        let mut s = norm;
        for k in 0..=TABLE as u64 {
            survival.push((s / norm).min(1.0));
            s -= ((xmin + k) as f64).powf(-alpha);
            if k % 256 == 255 {
                // resynchronize to avoid drift from repeated subtraction
                s = hurwitz_zeta(alpha, (xmin + k + 1) as f64);
            }
        }
        Self {
            alpha,
            xmin,
            norm,
            survival,
        }
    }

    fn survival_at(&self, x: u64) -> f64 {
        let k = x - self.xmin;
        if (k as usize) < self.survival.len() {
            self.survival[k as usize]
        } else {
            hurwitz_zeta(self.alpha, x as f64) / self.norm
        }
    }

    /// The largest `x` with `P(X >= x) >= u`, for `u` in (0, 1].
    pub fn quantile(&self, u: f64) -> u64 {
        let u = u.clamp(f64::MIN_POSITIVE, 1.0);
        let last = self.xmin + TABLE as u64;
        if self.survival_at(last) < u {
            // table search: first index whose survival drops below u
            let k = self.survival.partition_point(|&s| s >= u);
            return self.xmin + k as u64 - 1;
        }
        let mut lo = last;
        let mut hi = last.saturating_mul(2).min(X_CAP);
        while hi < X_CAP && self.survival_at(hi) >= u {
            lo = hi;
            hi = hi.saturating_mul(2).min(X_CAP);
        }
        if self.survival_at(hi) >= u {
            return hi;
        }
        // invariant: S(lo) >= u > S(hi)
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.survival_at(mid) >= u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

/// One draw from the zeta distribution given a uniform `u` in (0, 1].
pub fn zeta_inverse_cdf(alpha: f64, xmin: u64, u: f64) -> u64 {
    ZetaSampler::new(alpha, xmin).quantile(u)
}
