//! Optimizer run traces.

use std::collections::HashSet;
use std::fmt;
use std::io::Write;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::metrics::pareto_front;
use crate::space::{ConfigurationId, Dataset, Direction, MeasurementOracle};

/// Why a configuration was measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    /// Random initial sample.
    Initial,
    /// Chosen by an acquisition rule or added by a sampling loop.
    Acquisition,
    /// Holdout rows measured to score a model.
    Holdout,
    /// The model's predicted best from the validation pool.
    Validation,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Initial => "initial",
            Phase::Acquisition => "acquisition",
            Phase::Holdout => "holdout",
            Phase::Validation => "validation",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub id: ConfigurationId,
    pub objectives: Vec<f64>,
    pub phase: Phase,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    BudgetSpent,
    PoolExhausted,
    LivesLost,
    /// Every candidate was either measured or discarded.
    Settled,
    WallTime,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::BudgetSpent => "budget",
            StopReason::PoolExhausted => "pool-exhausted",
            StopReason::LivesLost => "lives-lost",
            StopReason::Settled => "settled",
            StopReason::WallTime => "wall-time",
        })
    }
}

/// The result an optimizer returns.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Best(ConfigurationId),
    Front(Vec<ConfigurationId>),
}

/// Everything an optimizer measured, in order, plus what it returned.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationRun {
    pub evaluated: Vec<Evaluation>,
    pub outcome: Outcome,
    pub measurements_used: usize,
    pub wall_time: Duration,
    pub stop: StopReason,
}

impl OptimizationRun {
    pub fn best(&self) -> Option<ConfigurationId> {
        match self.outcome {
            Outcome::Best(id) => Some(id),
            Outcome::Front(_) => None,
        }
    }

    pub fn front(&self) -> Option<&[ConfigurationId]> {
        match &self.outcome {
            Outcome::Front(f) => Some(f),
            Outcome::Best(_) => None,
        }
    }

    /// Measurements made in the given phase.
    pub fn count(&self, phase: Phase) -> usize {
        self.evaluated.iter().filter(|e| e.phase == phase).count()
    }

    /// Ids in measurement order.
    pub fn ids(&self) -> Vec<ConfigurationId> {
        self.evaluated.iter().map(|e| e.id).collect()
    }

    /// Writes the trace as CSV: `step,id,phase,<options...>,<objectives...>`.
    pub fn write_trace_csv<W: Write>(&self, dataset: &Dataset, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["step".to_string(), "id".to_string(), "phase".to_string()];
        header.extend(dataset.options().iter().map(|o| o.name.clone()));
        header.extend(dataset.objectives().iter().map(|o| o.name.clone()));
        w.write_record(&header)?;
        for (step, e) in self.evaluated.iter().enumerate() {
            let mut row = vec![step.to_string(), e.id.to_string(), e.phase.to_string()];
            row.extend(dataset.config(e.id).values().iter().map(|v| format!("{}", *v as i64)));
            row.extend(e.objectives.iter().map(|v| format!("{v}")));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Measures dataset rows through an oracle and records them.
pub(crate) struct Recorder<'d, 'o, 'a> {
    dataset: &'d Dataset,
    oracle: &'o mut MeasurementOracle<'a>,
    evaluated: Vec<Evaluation>,
    started: Instant,
    oracle_start: usize,
}

impl<'d, 'o, 'a> Recorder<'d, 'o, 'a> {
    pub fn new(dataset: &'d Dataset, oracle: &'o mut MeasurementOracle<'a>) -> Self {
        let oracle_start = oracle.count();
        Self { dataset, oracle, evaluated: Vec::new(), started: Instant::now(), oracle_start }
    }

    pub fn measure(&mut self, id: ConfigurationId, phase: Phase) -> Result<Vec<f64>> {
        let objectives = self.oracle.measure(self.dataset.config(id))?;
        if objectives.len() != self.dataset.objectives().len() {
            return Err(Error::Dimension { expected: self.dataset.objectives().len(), got: objectives.len() });
        }
        self.evaluated.push(Evaluation { id, objectives: objectives.clone(), phase });
        Ok(objectives)
    }

    pub fn evaluated(&self) -> &[Evaluation] {
        &self.evaluated
    }

    pub fn elapsed(&self) -> Duration {
        self.started.elapsed()
    }

    pub fn finish(self, outcome: Outcome, stop: StopReason) -> OptimizationRun {
        let measurements_used = self.oracle.count() - self.oracle_start;
        debug_assert_eq!(measurements_used, self.evaluated.len());
        OptimizationRun {
            evaluated: self.evaluated,
            outcome,
            measurements_used,
            wall_time: self.started.elapsed(),
            stop,
        }
    }
}

/// Checks a candidate set: non-empty ids, all in range, no repeats.
pub(crate) fn check_candidates(dataset: &Dataset, candidates: &[ConfigurationId]) -> Result<()> {
    let mut seen = HashSet::with_capacity(candidates.len());
    for &id in candidates {
        if id >= dataset.len() {
            return Err(Error::UnknownId(id));
        }
        if !seen.insert(id) {
            return Err(Error::InvalidParams(format!("candidate {id} listed twice")));
        }
    }
    Ok(())
}

/// Index into `evaluated` of the best measured value on one objective; earliest wins ties.
pub(crate) fn best_evaluated(evaluated: &[Evaluation], objective: usize, direction: Direction) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, e) in evaluated.iter().enumerate() {
        match best {
            Some(b) if !direction.better(e.objectives[objective], evaluated[b].objectives[objective]) => {}
            _ => best = Some(i),
        }
    }
    best
}

/// Ids of the non-dominated evaluations (measured values), ascending and unique.
pub(crate) fn evaluated_front(evaluated: &[Evaluation], directions: &[Direction]) -> Vec<ConfigurationId> {
    let points: Vec<Vec<f64>> = evaluated.iter().map(|e| e.objectives.clone()).collect();
    let mut ids: Vec<ConfigurationId> =
        pareto_front(&points, directions).into_iter().map(|i| evaluated[i].id).collect();
    ids.sort_unstable();
    ids.dedup();
    ids
}

/// What an optimizer returns: the best row on one objective, or a Pareto front.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Goal {
    Single(usize),
    Pareto,
}

impl Goal {
    /// Builds the outcome for a finished measurement list.
    pub(crate) fn outcome(&self, dataset: &Dataset, evaluated: &[Evaluation]) -> Outcome {
        match *self {
            Goal::Single(k) => {
                let dir = dataset.objectives()[k].direction;
                let i = best_evaluated(evaluated, k, dir).expect("at least one measurement");
                Outcome::Best(evaluated[i].id)
            }
            Goal::Pareto => Outcome::Front(evaluated_front(evaluated, &dataset.directions())),
        }
    }

    pub(crate) fn validate(&self, dataset: &Dataset) -> Result<()> {
        match *self {
            Goal::Single(k) if k >= dataset.objectives().len() => {
                Err(Error::InvalidParams(format!("objective index {k} out of range")))
            }
            _ => Ok(()),
        }
    }
}
