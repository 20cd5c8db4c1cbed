//! FLASH: sequential model-based optimization with CART surrogates.
//!
//! Each step fits one regression tree per objective on everything measured so
//! far, predicts every unmeasured candidate and measures the single most
//! promising one. With one objective the acquisition is Maximum Mean (best
//! predicted value). With several it is Bazza: every candidate is scored by the
//! mean of `N` random-weight sums of its predicted objectives and the top score
//! wins.
//!
//! ```no_run
//! use flashtune::{flash, CartParams, FlashParams, MeasurementOracle};
//! # fn demo(ds: &flashtune::Dataset) -> flashtune::Result<()> {
//! let pool: Vec<usize> = (0..ds.len()).collect();
//! let mut oracle = MeasurementOracle::table(ds);
//! let run = flash::flash_single(ds, &pool, &mut oracle, &FlashParams::default(), 0, &CartParams::default())?;
//! println!("best row {:?} after {} measurements", run.best(), run.measurements_used);
//! # Ok(()) }
//! ```

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cart::{CartParams, RegressionTree};
use crate::error::{Error, Result};
use crate::space::{ConfigurationId, Dataset, Direction, MeasurementOracle};
use crate::trace::{
    best_evaluated, check_candidates, evaluated_front, OptimizationRun, Outcome, Phase, Recorder, StopReason,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlashParams {
    /// Configurations measured at random before any model is built.
    pub size: usize,
    /// Acquisition steps after the initial sample.
    pub budget: usize,
    /// Random weight vectors used by Bazza.
    pub n_projections: usize,
    pub seed: u64,
}

impl Default for FlashParams {
    fn default() -> Self {
        Self { size: 30, budget: 50, n_projections: 10, seed: 0 }
    }
}

impl FlashParams {
    pub fn validate(&self) -> Result<()> {
        if self.size < 1 {
            return Err(Error::InvalidParams("size must be at least 1".into()));
        }
        if self.n_projections < 1 {
            return Err(Error::InvalidParams("n_projections must be at least 1".into()));
        }
        Ok(())
    }
}

/// Single-objective FLASH on objective `objective` of `dataset`.
///
/// Returns the measured configuration with the best value of that objective.
pub fn flash_single(
    dataset: &Dataset,
    candidates: &[ConfigurationId],
    oracle: &mut MeasurementOracle<'_>,
    params: &FlashParams,
    objective: usize,
    cart: &CartParams,
) -> Result<OptimizationRun> {
    if objective >= dataset.objectives().len() {
        return Err(Error::InvalidParams(format!("objective index {objective} out of range")));
    }
    let direction = dataset.objectives()[objective].direction;
    run(dataset, candidates, oracle, params, cart, &[objective], |predicted, _| {
        Ok(max_mean(predicted.iter().map(|p| direction.to_max(p[0]))))
    })
    .map(|(recorder, stop)| {
        let best = best_evaluated(recorder.evaluated(), objective, direction).expect("at least one measurement");
        let id = recorder.evaluated()[best].id;
        recorder.finish(Outcome::Best(id), stop)
    })
}

/// Multi-objective FLASH over every objective of `dataset`.
///
/// Returns the non-dominated subset of the measured configurations.
pub fn flash_multi(
    dataset: &Dataset,
    candidates: &[ConfigurationId],
    oracle: &mut MeasurementOracle<'_>,
    params: &FlashParams,
    cart: &CartParams,
) -> Result<OptimizationRun> {
    let m = dataset.objectives().len();
    if m < 2 {
        return Err(Error::InvalidParams("multi-objective FLASH needs at least two objectives".into()));
    }
    let directions = dataset.directions();
    let objectives: Vec<usize> = (0..m).collect();
    let (recorder, stop) = run(dataset, candidates, oracle, params, cart, &objectives, |predicted, rng| {
        bazza_select(predicted, params.n_projections, &directions, rng.gen())
    })?;
    let front = evaluated_front(recorder.evaluated(), &directions);
    Ok(recorder.finish(Outcome::Front(front), stop))
}

/// The shared loop; `acquire` picks an index into the prediction list.
fn run<'d, 'o, 'a, F>(
    dataset: &'d Dataset,
    candidates: &[ConfigurationId],
    oracle: &'o mut MeasurementOracle<'a>,
    params: &FlashParams,
    cart: &CartParams,
    objectives: &[usize],
    mut acquire: F,
) -> Result<(Recorder<'d, 'o, 'a>, StopReason)>
where
    F: FnMut(&[Vec<f64>], &mut ChaCha8Rng) -> Result<usize>,
{
    params.validate()?;
    cart.validate()?;
    check_candidates(dataset, candidates)?;
    if candidates.len() < params.size {
        return Err(Error::PoolTooSmall { available: candidates.len(), required: params.size });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut recorder = Recorder::new(dataset, oracle);

    let mut picked = index::sample(&mut rng, candidates.len(), params.size).into_vec();
    picked.sort_unstable();
    for &i in &picked {
        recorder.measure(candidates[i], Phase::Initial)?;
    }
    // remaining pool keeps the caller's candidate order
    let mut taken = vec![false; candidates.len()];
    for &i in &picked {
        taken[i] = true;
    }
    let mut pool: Vec<ConfigurationId> =
        candidates.iter().zip(&taken).filter(|(_, t)| !**t).map(|(id, _)| *id).collect();

    let mut budget = params.budget;
    let stop = loop {
        if budget == 0 {
            break StopReason::BudgetSpent;
        }
        if pool.is_empty() {
            break StopReason::PoolExhausted;
        }
        let xs: Vec<&[f64]> = recorder.evaluated().iter().map(|e| dataset.config(e.id).values()).collect();
        let trees = objectives
            .iter()
            .map(|&k| {
                let ys: Vec<f64> = recorder.evaluated().iter().map(|e| e.objectives[k]).collect();
                RegressionTree::fit(&xs, &ys, cart)
            })
            .collect::<Result<Vec<_>>>()?;
        let predicted = pool
            .iter()
            .map(|&id| trees.iter().map(|t| t.predict(dataset.config(id).values())).collect::<Result<Vec<f64>>>())
            .collect::<Result<Vec<_>>>()?;
        let choice = acquire(&predicted, &mut rng)?;
        let id = pool.remove(choice);
        recorder.measure(id, Phase::Acquisition)?;
        budget -= 1;
    };
    Ok((recorder, stop))
}

/// Index of the largest score; the lowest index wins ties.
fn max_mean(scores: impl Iterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut max = f64::NEG_INFINITY;
    for (i, s) in scores.enumerate() {
        if s > max {
            max = s;
            best = i;
        }
    }
    best
}

/// Draws `n` weight vectors of length `m` with entries uniform in `[0, 1)`.
pub fn bazza_weights<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..m).map(|_| rng.gen::<f64>()).collect()).collect()
}

/// Maps predictions so larger is better and rescales every objective to `[0, 1]`
/// over the given candidates. A constant objective maps to zero.
pub fn bazza_normalize(predicted: &[Vec<f64>], directions: &[Direction]) -> Vec<Vec<f64>> {
    let m = directions.len();
    let mut lo = vec![f64::INFINITY; m];
    let mut hi = vec![f64::NEG_INFINITY; m];
    for p in predicted {
        for j in 0..m {
            let g = directions[j].to_max(p[j]);
            lo[j] = lo[j].min(g);
            hi[j] = hi[j].max(g);
        }
    }
    predicted
        .iter()
        .map(|p| {
            (0..m)
                .map(|j| {
                    let range = hi[j] - lo[j];
                    if range > 0.0 {
                        (directions[j].to_max(p[j]) - lo[j]) / range
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}

/// Mean weighted score of every candidate under fixed weight vectors.
pub fn bazza_scores(predicted: &[Vec<f64>], weights: &[Vec<f64>], directions: &[Direction]) -> Vec<f64> {
    let n = weights.len() as f64;
    bazza_normalize(predicted, directions)
        .iter()
        .map(|g| {
            let mut total = 0.0;
            for v in weights {
                for (w, x) in v.iter().zip(g) {
                    total += w * x;
                }
            }
            total / n
        })
        .collect()
}

/// Bazza acquisition: index of the candidate with the highest mean score over
/// `n_projections` random weight vectors drawn from `seed`.
pub fn bazza_select(
    predicted: &[Vec<f64>],
    n_projections: usize,
    directions: &[Direction],
    seed: u64,
) -> Result<usize> {
    if predicted.is_empty() {
        return Err(Error::InvalidParams("no candidates to choose from".into()));
    }
    if n_projections == 0 {
        return Err(Error::InvalidParams("n_projections must be at least 1".into()));
    }
    if let Some(p) = predicted.iter().find(|p| p.len() != directions.len()) {
        return Err(Error::Dimension { expected: directions.len(), got: p.len() });
    }
    if predicted.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParams("predictions must be finite".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights = bazza_weights(n_projections, directions.len(), &mut rng);
    Ok(max_mean(bazza_scores(predicted, &weights, directions).into_iter()))
}
