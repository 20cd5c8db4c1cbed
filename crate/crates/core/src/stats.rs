//! Scott-Knott ranking of treatments, gated by a bootstrap test and the
//! Vargha-Delaney A12 effect size.
//!
//! Lower observations are better: rank 1 holds the treatments with the
//! smallest medians. Negate a metric where larger is better.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::metrics::{iqr, median};

/// Repeated observations of one method.
#[derive(Debug, Clone, PartialEq)]
pub struct Treatment {
    label: String,
    observations: Vec<f64>,
}

impl Treatment {
    /// Requires at least two observations, all finite.
    pub fn new(label: impl Into<String>, observations: Vec<f64>) -> Result<Self> {
        let label = label.into();
        if observations.len() < 2 {
            return Err(Error::InvalidParams(format!("treatment {label:?} needs at least two observations")));
        }
        if observations.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams(format!("treatment {label:?} has a non-finite observation")));
        }
        Ok(Self { label, observations })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn observations(&self) -> &[f64] {
        &self.observations
    }

    fn mean(&self) -> f64 {
        mean(&self.observations)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkParams {
    pub confidence: f64,
    pub a12_threshold: f64,
    pub bootstrap_resamples: usize,
    pub seed: u64,
}

impl Default for SkParams {
    fn default() -> Self {
        Self { confidence: 0.99, a12_threshold: 0.6, bootstrap_resamples: 512, seed: 0 }
    }
}

impl SkParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::InvalidParams("confidence must lie in (0, 1)".into()));
        }
        if !(0.5..=1.0).contains(&self.a12_threshold) {
            return Err(Error::InvalidParams("a12 threshold must lie in [0.5, 1]".into()));
        }
        if self.bootstrap_resamples == 0 {
            return Err(Error::InvalidParams("bootstrap needs at least one resample".into()));
        }
        Ok(())
    }
}

/// One row of a Scott-Knott result.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedTreatment {
    pub label: String,
    pub rank: usize,
    pub median: f64,
    pub iqr: f64,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Probability that a draw from `x` exceeds a draw from `y`, ties counting half.
pub fn a12(x: &[f64], y: &[f64]) -> f64 {
    let mut more = 0.0;
    for a in x {
        for b in y {
            if a > b {
                more += 1.0;
            } else if a == b {
                more += 0.5;
            }
        }
    }
    more / (x.len() * y.len()) as f64
}

/// Two-sided bootstrap p-value for a difference in means.
///
/// Both samples are shifted onto the pooled mean, resampled with replacement,
/// and the share of resamples whose `|mean(x*) - mean(y*)|` reaches the observed
/// difference is returned as `(hits + 1) / (resamples + 1)`.
pub fn bootstrap_p_value(x: &[f64], y: &[f64], resamples: usize, seed: u64) -> f64 {
    let observed = (mean(x) - mean(y)).abs();
    let pooled = mean(&[x, y].concat());
    let (mx, my) = (mean(x), mean(y));
    let xs: Vec<f64> = x.iter().map(|v| v - mx + pooled).collect();
    let ys: Vec<f64> = y.iter().map(|v| v - my + pooled).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |s: &[f64]| (0..s.len()).map(|_| s[rng.gen_range(0..s.len())]).sum::<f64>() / s.len() as f64;
    let mut hits = 0usize;
    for _ in 0..resamples {
        let d = (draw(&xs) - draw(&ys)).abs();
        // guard against rounding noise when the observed gap is zero
        if d >= observed - 1e-12 * observed.abs().max(f64::MIN_POSITIVE) {
            hits += 1;
        }
    }
    (hits + 1) as f64 / (resamples + 1) as f64
}

/// Whether the means of `x` and `y` differ at `params.confidence`.
pub fn bootstrap_significant(x: &[f64], y: &[f64], params: &SkParams) -> bool {
    bootstrap_p_value(x, y, params.bootstrap_resamples, params.seed) < 1.0 - params.confidence
}

/// Expected squared deviation of the two part means from the overall mean,
/// weighted by observation counts. `cut` is the index of the first treatment
/// in the right part.
pub fn e_delta(sorted: &[Treatment], cut: usize) -> f64 {
    let sum = |ts: &[Treatment]| ts.iter().flat_map(|t| t.observations.iter()).sum::<f64>();
    let count = |ts: &[Treatment]| ts.iter().map(|t| t.observations.len()).sum::<usize>() as f64;
    let (left, right) = sorted.split_at(cut);
    let (ls, ms, ns) = (count(sorted), count(left), count(right));
    let lmu = sum(sorted) / ls;
    let mmu = sum(left) / ms;
    let nmu = sum(right) / ns;
    ms / ls * (mmu - lmu).powi(2) + ns / ls * (nmu - lmu).powi(2)
}

/// Cut maximizing [`e_delta`] over `1..sorted.len()`; the first wins ties.
pub fn best_cut(sorted: &[Treatment]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for cut in 1..sorted.len() {
        let e = e_delta(sorted, cut);
        if best.is_none_or(|(_, b)| e > b) {
            best = Some((cut, e));
        }
    }
    best.map(|(c, _)| c)
}

/// Orders treatments by median, then mean, then label.
pub fn sort_treatments(treatments: &[Treatment]) -> Vec<Treatment> {
    let mut sorted = treatments.to_vec();
    let key = |t: &Treatment| (median(&t.observations), t.mean());
    sorted.sort_by(|a, b| {
        let (ma, ua) = key(a);
        let (mb, ub) = key(b);
        ma.total_cmp(&mb).then(ua.total_cmp(&ub)).then_with(|| a.label.cmp(&b.label))
    });
    sorted
}

/// Ranks treatments; the result is in rank order (ties in sort order).
pub fn scott_knott(treatments: &[Treatment], params: &SkParams) -> Result<Vec<RankedTreatment>> {
    params.validate()?;
    let sorted = sort_treatments(treatments);
    let mut groups = Vec::new();
    divide(&sorted, 0, sorted.len(), params, &mut groups);
    let mut out = Vec::with_capacity(sorted.len());
    for (rank, (lo, hi)) in groups.into_iter().enumerate() {
        for t in &sorted[lo..hi] {
            out.push(RankedTreatment {
                label: t.label.clone(),
                rank: rank + 1,
                median: median(&t.observations),
                iqr: iqr(&t.observations),
            });
        }
    }
    Ok(out)
}

fn divide(sorted: &[Treatment], lo: usize, hi: usize, params: &SkParams, groups: &mut Vec<(usize, usize)>) {
    let part = &sorted[lo..hi];
    if let Some(cut) = best_cut(part) {
        let left: Vec<f64> = part[..cut].iter().flat_map(|t| t.observations.iter().copied()).collect();
        let right: Vec<f64> = part[cut..].iter().flat_map(|t| t.observations.iter().copied()).collect();
        let effect = a12(&left, &right);
        if effect.max(1.0 - effect) >= params.a12_threshold && bootstrap_significant(&left, &right, params) {
            divide(sorted, lo, lo + cut, params, groups);
            divide(sorted, lo + cut, hi, params, groups);
            return;
        }
    }
    groups.push((lo, hi));
}
