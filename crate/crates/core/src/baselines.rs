//! Optimizers FLASH is compared against.
//!
//! * progressive sampling: grow a random training set until the holdout MMRE
//!   stops improving;
//! * rank-based sampling: the same loop scored by mean rank difference;
//! * ePAL: Gaussian-process active learning with ε-dominance pruning and
//!   maximum-variance acquisition;
//! * random search: the control.
//!
//! The two sampling loops charge every holdout measurement to the run, and
//! finish by measuring the model's predicted best from the validation pool.

use std::time::Duration;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cart::{CartParams, RegressionTree};
use crate::error::{Error, Result};
use crate::gp::{GaussianProcess, InputScaler, Kernel, PredictionCache};
use crate::metrics::{dominates, mmre, mu_rd, pareto_front};
use crate::space::{ConfigurationId, Dataset, Direction, MeasurementOracle};
use crate::trace::{check_candidates, Goal, OptimizationRun, Outcome, Phase, Recorder, StopReason};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LivesParams {
    /// Non-improving iterations tolerated before stopping.
    pub lives: usize,
    /// Configurations added per iteration.
    pub step: usize,
    /// Draw training rows with replacement (duplicates are re-measured).
    pub with_replacement: bool,
    pub seed: u64,
}

impl Default for LivesParams {
    fn default() -> Self {
        Self { lives: 3, step: 1, with_replacement: false, seed: 0 }
    }
}

impl LivesParams {
    pub fn validate(&self) -> Result<()> {
        if self.lives < 1 || self.step < 1 {
            return Err(Error::InvalidParams("lives and step must be at least 1".into()));
        }
        Ok(())
    }
}

/// Output of a lives-based sampling run.
#[derive(Debug, Clone)]
pub struct BaselineRun {
    /// The last model built.
    pub model: RegressionTree,
    pub run: OptimizationRun,
    /// Holdout score after each iteration (higher is better).
    pub scores: Vec<f64>,
    /// Iterations whose score did not improve on the previous one.
    pub lives_lost: usize,
}

/// Residual-based progressive sampling, scored by `-MMRE` on the holdout.
#[allow(clippy::too_many_arguments)]
pub fn progressive_sampling(
    dataset: &Dataset,
    train_pool: &[ConfigurationId],
    holdout: &[ConfigurationId],
    validation: &[ConfigurationId],
    oracle: &mut MeasurementOracle<'_>,
    params: &LivesParams,
    objective: usize,
    cart: &CartParams,
) -> Result<BaselineRun> {
    lives_sampling(dataset, train_pool, holdout, validation, oracle, params, objective, cart, |p, a| Ok(-mmre(p, a)?))
}

/// Rank-based sampling, scored by `-μRD` on the holdout.
#[allow(clippy::too_many_arguments)]
pub fn rank_based(
    dataset: &Dataset,
    train_pool: &[ConfigurationId],
    holdout: &[ConfigurationId],
    validation: &[ConfigurationId],
    oracle: &mut MeasurementOracle<'_>,
    params: &LivesParams,
    objective: usize,
    cart: &CartParams,
) -> Result<BaselineRun> {
    lives_sampling(dataset, train_pool, holdout, validation, oracle, params, objective, cart, |p, a| Ok(-mu_rd(p, a)?))
}

/// The sampling loop shared by progressive and rank-based sampling.
///
/// `score(predicted, actual)` rates the model on the holdout, higher is better.
/// A life is lost whenever a score is not above the previous one; the first
/// iteration is compared against negative infinity.
#[allow(clippy::too_many_arguments)]
pub fn lives_sampling<F>(
    dataset: &Dataset,
    train_pool: &[ConfigurationId],
    holdout: &[ConfigurationId],
    validation: &[ConfigurationId],
    oracle: &mut MeasurementOracle<'_>,
    params: &LivesParams,
    objective: usize,
    cart: &CartParams,
    mut score: F,
) -> Result<BaselineRun>
where
    F: FnMut(&[f64], &[f64]) -> Result<f64>,
{
    params.validate()?;
    cart.validate()?;
    Goal::Single(objective).validate(dataset)?;
    for (name, set) in [("training pool", train_pool), ("holdout", holdout), ("validation pool", validation)] {
        if set.is_empty() {
            return Err(Error::InvalidParams(format!("{name} is empty")));
        }
        check_candidates(dataset, set)?;
    }
    if holdout.iter().any(|h| train_pool.contains(h)) {
        return Err(Error::InvalidParams("holdout overlaps the training pool".into()));
    }
    let direction = dataset.objectives()[objective].direction;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut recorder = Recorder::new(dataset, oracle);

    let mut actual = Vec::with_capacity(holdout.len());
    for &id in holdout {
        actual.push(recorder.measure(id, Phase::Holdout)?[objective]);
    }
    let holdout_x: Vec<&[f64]> = holdout.iter().map(|&id| dataset.config(id).values()).collect();

    let mut order = train_pool.to_vec();
    order.shuffle(&mut rng);
    let mut drawn = 0usize;
    let mut xs: Vec<&[f64]> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    let mut lives = params.lives;
    let mut scores = Vec::new();
    let mut model = None;
    let stop = loop {
        if drawn >= train_pool.len() {
            break StopReason::PoolExhausted;
        }
        for _ in 0..params.step {
            if drawn >= train_pool.len() {
                break;
            }
            let id =
                if params.with_replacement { train_pool[rng.gen_range(0..train_pool.len())] } else { order[drawn] };
            drawn += 1;
            ys.push(recorder.measure(id, Phase::Acquisition)?[objective]);
            xs.push(dataset.config(id).values());
        }
        let tree = RegressionTree::fit(&xs, &ys, cart)?;
        let predicted = tree.predict_batch(&holdout_x)?;
        let s = score(&predicted, &actual)?;
        scores.push(s);
        model = Some(tree);
        if s <= last {
            lives -= 1;
        }
        last = s;
        if lives == 0 {
            break StopReason::LivesLost;
        }
    };
    let model = model.expect("at least one iteration");

    let mut best: Option<(ConfigurationId, f64)> = None;
    for &id in validation {
        let p = model.predict(dataset.config(id).values())?;
        if best.is_none_or(|(_, b)| direction.better(p, b)) {
            best = Some((id, p));
        }
    }
    let (best_id, _) = best.expect("validation pool is non-empty");
    recorder.measure(best_id, Phase::Validation)?;
    let lives_lost = params.lives - lives;
    Ok(BaselineRun { model, run: recorder.finish(Outcome::Best(best_id), stop), scores, lives_lost })
}

/// Measures `n` distinct uniformly drawn candidates.
pub fn random_search(
    dataset: &Dataset,
    candidates: &[ConfigurationId],
    oracle: &mut MeasurementOracle<'_>,
    n: usize,
    goal: Goal,
    seed: u64,
) -> Result<OptimizationRun> {
    check_candidates(dataset, candidates)?;
    goal.validate(dataset)?;
    if n > candidates.len() {
        return Err(Error::PoolTooSmall { available: candidates.len(), required: n });
    }
    if n == 0 {
        return Err(Error::InvalidParams("random search needs at least one measurement".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut recorder = Recorder::new(dataset, oracle);
    for i in index::sample(&mut rng, candidates.len(), n) {
        recorder.measure(candidates[i], Phase::Acquisition)?;
    }
    let outcome = goal.outcome(dataset, recorder.evaluated());
    let stop = if n == candidates.len() { StopReason::PoolExhausted } else { StopReason::BudgetSpent };
    Ok(recorder.finish(outcome, stop))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpalParams {
    /// Additive slack of the ε-dominance test, in range-normalized objective units.
    pub epsilon: f64,
    pub init_size: usize,
    /// Give up (returning what was measured) after this long.
    pub max_wall_time: Option<Duration>,
    pub kernel: Kernel,
    pub seed: u64,
}

impl Default for EpalParams {
    fn default() -> Self {
        Self { epsilon: 0.01, init_size: 20, max_wall_time: None, kernel: Kernel::default(), seed: 0 }
    }
}

/// Which candidates the ε-dominance rule discards.
///
/// All vectors are in larger-is-better space. `evaluated` are measured points
/// (their pessimistic and optimistic bounds coincide); `pessimistic[i]` and
/// `optimistic[i]` bound candidate `i`. Candidate `a` is discarded when some other
/// point `b` satisfies `pessimistic(b) + epsilon ≻ optimistic(a)` under binary
/// dominance.
pub fn epal_discard(
    evaluated: &[Vec<f64>],
    pessimistic: &[Vec<f64>],
    optimistic: &[Vec<f64>],
    epsilon: f64,
) -> Vec<bool> {
    let Some(m) = evaluated.first().or(pessimistic.first()).map(Vec::len) else {
        return Vec::new();
    };
    let dirs = vec![Direction::Maximize; m];
    let shifted: Vec<Vec<f64>> =
        evaluated.iter().chain(pessimistic).map(|p| p.iter().map(|v| v + epsilon).collect()).collect();
    let front = pareto_front(&shifted, &dirs);
    let offset = evaluated.len();
    let mut in_front = vec![false; shifted.len()];
    for &f in &front {
        in_front[f] = true;
    }
    optimistic
        .iter()
        .enumerate()
        .map(|(i, opt)| {
            let me = offset + i;
            if in_front[me] {
                // the front may have lost points only `me` dominated
                (0..shifted.len()).any(|b| b != me && dominates(&shifted[b], opt, &dirs))
            } else {
                front.iter().any(|&b| dominates(&shifted[b], opt, &dirs))
            }
        })
        .collect()
}

/// ε-Pareto active learning over all objectives of `dataset`.
///
/// Runs until every candidate is measured or discarded, or until
/// `max_wall_time` passes (stop reason [`StopReason::WallTime`]).
pub fn epal(
    dataset: &Dataset,
    candidates: &[ConfigurationId],
    oracle: &mut MeasurementOracle<'_>,
    params: &EpalParams,
) -> Result<OptimizationRun> {
    let m = dataset.objectives().len();
    if m < 2 {
        return Err(Error::InvalidParams("ePAL needs at least two objectives".into()));
    }
    if params.epsilon.is_nan() || params.epsilon < 0.0 {
        return Err(Error::InvalidParams("epsilon must be non-negative".into()));
    }
    if params.init_size < 1 {
        return Err(Error::InvalidParams("init_size must be at least 1".into()));
    }
    params.kernel.validate()?;
    check_candidates(dataset, candidates)?;
    if candidates.len() < params.init_size {
        return Err(Error::PoolTooSmall { available: candidates.len(), required: params.init_size });
    }
    let directions = dataset.directions();
    let scaler = InputScaler::for_dataset(dataset);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut recorder = Recorder::new(dataset, oracle);

    let mut picked = index::sample(&mut rng, candidates.len(), params.init_size).into_vec();
    picked.sort_unstable();
    for &i in &picked {
        recorder.measure(candidates[i], Phase::Initial)?;
    }
    let mut taken = vec![false; candidates.len()];
    for &i in &picked {
        taken[i] = true;
    }
    let mut pool: Vec<usize> = (0..candidates.len()).filter(|&i| !taken[i]).collect();

    let scaled: Vec<Vec<f64>> = candidates.iter().map(|&id| scaler.scale(dataset.config(id).values())).collect();
    let train_x: Vec<Vec<f64>> = picked.iter().map(|&i| scaled[i].clone()).collect();
    let mut gps = (0..m)
        .map(|k| {
            let ys: Vec<f64> = recorder.evaluated().iter().map(|e| e.objectives[k]).collect();
            GaussianProcess::fit(&train_x, &ys, params.kernel)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut caches: Vec<PredictionCache> = (0..m).map(|_| PredictionCache::new(scaled.clone())).collect();

    let stop = loop {
        if pool.is_empty() {
            break StopReason::Settled;
        }
        if params.max_wall_time.is_some_and(|limit| recorder.elapsed() >= limit) {
            break StopReason::WallTime;
        }
        // larger-is-better, divided by the measured range of each objective
        let measured: Vec<Vec<f64>> = recorder
            .evaluated()
            .iter()
            .map(|e| e.objectives.iter().zip(&directions).map(|(v, d)| d.to_max(*v)).collect())
            .collect();
        let scale: Vec<f64> = (0..m)
            .map(|k| {
                let (lo, hi) = measured
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p[k]), hi.max(p[k])));
                if hi > lo {
                    hi - lo
                } else {
                    1.0
                }
            })
            .collect();
        let evaluated_n: Vec<Vec<f64>> =
            measured.iter().map(|p| p.iter().zip(&scale).map(|(v, s)| v / s).collect()).collect();

        for (cache, gp) in caches.iter_mut().zip(&gps) {
            cache.sync(gp, &pool);
        }
        let mut pess = Vec::with_capacity(pool.len());
        let mut opt = Vec::with_capacity(pool.len());
        let mut spread = Vec::with_capacity(pool.len());
        for &c in &pool {
            let mut lo = Vec::with_capacity(m);
            let mut hi = Vec::with_capacity(m);
            let mut norm = 0.0;
            for k in 0..m {
                let (mu, sigma) = caches[k].predict(&gps[k], c);
                let g = directions[k].to_max(mu) / scale[k];
                let s = sigma / scale[k];
                lo.push(g - s);
                hi.push(g + s);
                norm += s * s;
            }
            pess.push(lo);
            opt.push(hi);
            spread.push(norm);
        }
        let discard = epal_discard(&evaluated_n, &pess, &opt, params.epsilon);
        let mut keep = Vec::with_capacity(pool.len());
        let mut keep_spread = Vec::with_capacity(pool.len());
        for (i, &c) in pool.iter().enumerate() {
            if !discard[i] {
                keep.push(c);
                keep_spread.push(spread[i]);
            }
        }
        pool = keep;
        if pool.is_empty() {
            break StopReason::Settled;
        }
        let mut choice = 0;
        for (i, s) in keep_spread.iter().enumerate() {
            if *s > keep_spread[choice] {
                choice = i;
            }
        }
        let c = pool.remove(choice);
        let values = recorder.measure(candidates[c], Phase::Acquisition)?;
        for (k, gp) in gps.iter_mut().enumerate() {
            gp.push(scaled[c].clone(), values[k])?;
        }
    };
    let outcome = Goal::Pareto.outcome(dataset, recorder.evaluated());
    Ok(recorder.finish(outcome, stop))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{Configuration, ObjectiveSchema, OptionSchema};

    fn line(values: &[f64]) -> Dataset {
        let n = values.len() as i64;
        let rows = values.iter().enumerate().map(|(i, &v)| (Configuration(vec![i as f64]), vec![v])).collect();
        Dataset::new(vec![OptionSchema::integer("x", 0, n)], vec![ObjectiveSchema::new("y", Direction::Minimize)], rows)
            .unwrap()
    }

    fn thirds(n: usize) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
        let ids: Vec<usize> = (0..n).collect();
        let a = n * 2 / 5;
        let b = a + n / 5;
        (ids[..a].to_vec(), ids[a..b].to_vec(), ids[b..].to_vec())
    }

    #[test]
    fn flat_landscape_loses_all_lives() {
        let ds = line(&[5.0; 40]);
        let (train, holdout, validation) = thirds(40);
        for rank in [false, true] {
            let mut oracle = MeasurementOracle::table(&ds);
            let params = LivesParams { seed: 9, ..LivesParams::default() };
            let out = if rank {
                rank_based(&ds, &train, &holdout, &validation, &mut oracle, &params, 0, &CartParams::default())
            } else {
                progressive_sampling(
                    &ds,
                    &train,
                    &holdout,
                    &validation,
                    &mut oracle,
                    &params,
                    0,
                    &CartParams::default(),
                )
            }
            .unwrap();
            assert!(out.scores.iter().all(|s| *s == 0.0));
            assert_eq!(out.run.count(Phase::Acquisition), 1 + 3);
            assert_eq!(out.lives_lost, 3);
            assert_eq!(out.run.stop, StopReason::LivesLost);
            assert_eq!(out.run.count(Phase::Holdout), holdout.len());
            assert_eq!(out.run.measurements_used, holdout.len() + 4 + 1);
            assert_eq!(oracle.count(), out.run.measurements_used);
        }
    }

    #[test]
    fn improving_scorer_consumes_pool() {
        let ds = line(&(1..=30).map(|v| v as f64).collect::<Vec<_>>());
        let (train, holdout, validation) = thirds(30);
        let mut oracle = MeasurementOracle::table(&ds);
        let params = LivesParams { lives: 1, ..LivesParams::default() };
        let mut tick = 0.0;
        let out = lives_sampling(
            &ds,
            &train,
            &holdout,
            &validation,
            &mut oracle,
            &params,
            0,
            &CartParams::default(),
            |_, _| {
                tick += 1.0;
                Ok(tick)
            },
        )
        .unwrap();
        assert_eq!(out.run.stop, StopReason::PoolExhausted);
        assert_eq!(out.run.count(Phase::Acquisition), train.len());
        assert_eq!(out.lives_lost, 0);
    }

    #[test]
    fn sampling_with_replacement_can_repeat() {
        let ds = line(&(1..=30).map(|v| v as f64).collect::<Vec<_>>());
        let (train, holdout, validation) = thirds(30);
        let params = LivesParams { lives: 1, with_replacement: true, seed: 4, ..LivesParams::default() };
        let mut oracle = MeasurementOracle::table(&ds);
        let mut tick = 0.0;
        let out = lives_sampling(
            &ds,
            &train,
            &holdout,
            &validation,
            &mut oracle,
            &params,
            0,
            &CartParams::default(),
            |_, _| {
                tick += 1.0;
                Ok(tick)
            },
        )
        .unwrap();
        let drawn: Vec<usize> =
            out.run.evaluated.iter().filter(|e| e.phase == Phase::Acquisition).map(|e| e.id).collect();
        assert_eq!(drawn.len(), train.len());
        assert!(drawn.iter().all(|id| train.contains(id)));
        let mut unique = drawn.clone();
        unique.sort_unstable();
        unique.dedup();
        assert!(unique.len() < drawn.len());
    }

    #[test]
    fn sampling_errors() {
        let ds = line(&(1..=30).map(|v| v as f64).collect::<Vec<_>>());
        let mut oracle = MeasurementOracle::table(&ds);
        let p = LivesParams::default();
        let c = CartParams::default();
        assert!(progressive_sampling(&ds, &[], &[1], &[2], &mut oracle, &p, 0, &c).is_err());
        assert!(progressive_sampling(&ds, &[0, 1], &[], &[2], &mut oracle, &p, 0, &c).is_err());
        assert!(progressive_sampling(&ds, &[0, 1], &[1], &[2], &mut oracle, &p, 0, &c).is_err());
        let zero = LivesParams { lives: 0, ..p };
        assert!(progressive_sampling(&ds, &[0, 1], &[3], &[2], &mut oracle, &zero, 0, &c).is_err());
    }

    #[test]
    fn random_search_cases() {
        let ds = line(&[4.0, 2.0, 9.0, 1.0, 7.0]);
        let all: Vec<usize> = (0..5).collect();
        let mut oracle = MeasurementOracle::table(&ds);
        let run = random_search(&ds, &all, &mut oracle, 5, Goal::Single(0), 1).unwrap();
        assert_eq!(run.best(), Some(3));
        let one = random_search(&ds, &all, &mut MeasurementOracle::table(&ds), 1, Goal::Single(0), 1).unwrap();
        assert_eq!(one.best(), Some(one.evaluated[0].id));
        let again = random_search(&ds, &all, &mut MeasurementOracle::table(&ds), 1, Goal::Single(0), 1).unwrap();
        assert_eq!(one.evaluated, again.evaluated);
        assert!(matches!(
            random_search(&ds, &all, &mut oracle, 6, Goal::Single(0), 1),
            Err(Error::PoolTooSmall { .. })
        ));
    }

    #[test]
    fn discard_rule() {
        // ε = 0: candidate 1's pessimistic bound beats candidate 0's optimistic bound
        let pess = vec![vec![0.0, 0.0], vec![2.0, 2.0]];
        let opt = vec![vec![1.0, 1.0], vec![3.0, 3.0]];
        assert_eq!(epal_discard(&[], &pess, &opt, 0.0), vec![true, false]);
        // overlapping intervals: nothing goes
        let pess = vec![vec![0.0, 0.0], vec![0.5, 0.5]];
        let opt = vec![vec![1.0, 1.0], vec![1.5, 1.5]];
        assert_eq!(epal_discard(&[], &pess, &opt, 0.0), vec![false, false]);
        // a large epsilon removes both; a point never discards itself
        assert_eq!(epal_discard(&[], &pess, &opt, 10.0), vec![true, true]);
        assert_eq!(epal_discard(&[], &pess[..1], &opt[..1], 10.0), vec![false]);
        // measured points take part as dominators
        assert_eq!(epal_discard(&[vec![5.0, 5.0]], &pess, &opt, 0.0), vec![true, true]);
    }
}
