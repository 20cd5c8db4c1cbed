//! Enumerable synthetic configuration spaces with known optima.
//!
//! Every kind enumerates the full cross product of its options (the first
//! option varies slowest). With `d_j = |x_j - t_j| / (max_j - min_j)`:
//!
//! | kind | objectives | closed form |
//! |------|------------|-------------|
//! | `single-peak` | `latency` (min) | `10 + Σ w_j d_j` |
//! | `interaction` | `latency` (min) | `(10 + Σ w_j d_j) · Π_(j,k)∈P (1 + u_jk d_j d_k)` |
//! | `bi-objective-tradeoff` | `f1`, `f2` (min) | `f1 = Σ z_j`, `f2 = Σ (1 - z_j)` |
//!
//! The target `t`, weights `w_j ∈ [1, 10]`, the pair set `P` (one random pair
//! per option) and `u_jk ∈ [0, 1]` come from the seed; `z_j` is `x_j` rescaled
//! to `[0, 1]`. Both single-objective kinds have their unique minimum at `t`.
//! In the trade-off kind every row is Pareto-optimal and the seed is unused.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::metrics::pareto_front;
use crate::space::{Configuration, ConfigurationId, Dataset, Direction, ObjectiveSchema, OptionSchema};

/// Largest space [`generate_synthetic`] will enumerate.
pub const MAX_ROWS: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SyntheticKind {
    SinglePeak,
    Interaction,
    BiObjectiveTradeoff,
}

impl SyntheticKind {
    pub const ALL: [SyntheticKind; 3] =
        [SyntheticKind::SinglePeak, SyntheticKind::Interaction, SyntheticKind::BiObjectiveTradeoff];

    pub fn is_multi_objective(self) -> bool {
        self == SyntheticKind::BiObjectiveTradeoff
    }
}

impl fmt::Display for SyntheticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SyntheticKind::SinglePeak => "single-peak",
            SyntheticKind::Interaction => "interaction",
            SyntheticKind::BiObjectiveTradeoff => "bi-objective-tradeoff",
        })
    }
}

impl FromStr for SyntheticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.to_string() == s)
            .ok_or_else(|| Error::InvalidParams(format!("unknown synthetic kind {s:?}")))
    }
}

/// A generated dataset plus its brute-force answers.
#[derive(Debug, Clone)]
pub struct Synthetic {
    pub dataset: Dataset,
    /// Rows attaining the best value of the first objective.
    pub optimum: Vec<ConfigurationId>,
    /// Non-dominated rows over all objectives, ascending.
    pub front: Vec<ConfigurationId>,
}

/// `n_options` boolean options.
pub fn generate_synthetic(kind: SyntheticKind, n_options: usize, seed: u64) -> Result<Synthetic> {
    if n_options < 2 {
        return Err(Error::InvalidParams("synthetic spaces need at least two options".into()));
    }
    if n_options >= usize::BITS as usize || 1usize << n_options > MAX_ROWS {
        return Err(Error::InvalidParams(format!("2^{n_options} rows exceeds the limit of {MAX_ROWS}")));
    }
    let options = (0..n_options).map(|j| OptionSchema::boolean(format!("o{j}"))).collect();
    generate_over(kind, options, seed)
}

/// Any list of options; integer ranges multiply the row count.
pub fn generate_over(kind: SyntheticKind, options: Vec<OptionSchema>, seed: u64) -> Result<Synthetic> {
    if options.len() < 2 {
        return Err(Error::InvalidParams("synthetic spaces need at least two options".into()));
    }
    let bounds: Vec<(i64, i64)> = options.iter().map(|o| o.kind.bounds()).map(|(a, b)| (a as i64, b as i64)).collect();
    let mut rows_total: usize = 1;
    for &(lo, hi) in &bounds {
        let width = usize::try_from(hi - lo + 1).map_err(|_| Error::InvalidParams("empty option range".into()))?;
        rows_total = rows_total.saturating_mul(width);
        if rows_total > MAX_ROWS {
            return Err(Error::InvalidParams(format!("space exceeds the limit of {MAX_ROWS} rows")));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = options.len();
    let target: Vec<i64> = bounds.iter().map(|&(lo, hi)| rng.gen_range(lo..=hi)).collect();
    let weights: Vec<f64> = (0..n).map(|_| rng.gen_range(1.0..=10.0)).collect();
    let pairs: Vec<(usize, usize, f64)> = (0..n)
        .map(|_| {
            let j = rng.gen_range(0..n);
            let k = (j + rng.gen_range(1..n)) % n;
            (j, k, rng.gen_range(0.0..=1.0))
        })
        .collect();

    let objectives = if kind.is_multi_objective() {
        vec![ObjectiveSchema::new("f1", Direction::Minimize), ObjectiveSchema::new("f2", Direction::Minimize)]
    } else {
        vec![ObjectiveSchema::new("latency", Direction::Minimize)]
    };

    let mut rows = Vec::with_capacity(rows_total);
    let mut x: Vec<i64> = bounds.iter().map(|b| b.0).collect();
    for _ in 0..rows_total {
        let z: Vec<f64> = x
            .iter()
            .zip(&bounds)
            .map(|(&v, &(lo, hi))| if hi > lo { (v - lo) as f64 / (hi - lo) as f64 } else { 0.0 })
            .collect();
        let d: Vec<f64> = x
            .iter()
            .zip(&target)
            .zip(&bounds)
            .map(|((&v, &t), &(lo, hi))| if hi > lo { (v - t).abs() as f64 / (hi - lo) as f64 } else { 0.0 })
            .collect();
        let base = 10.0 + weights.iter().zip(&d).map(|(w, d)| w * d).sum::<f64>();
        let values = match kind {
            SyntheticKind::SinglePeak => vec![base],
            SyntheticKind::Interaction => {
                vec![pairs.iter().fold(base, |acc, &(j, k, u)| acc * (1.0 + u * d[j] * d[k]))]
            }
            SyntheticKind::BiObjectiveTradeoff => {
                vec![z.iter().sum(), z.iter().map(|v| 1.0 - v).sum()]
            }
        };
        rows.push((Configuration(x.iter().map(|&v| v as f64).collect()), values));
        for j in (0..n).rev() {
            if x[j] < bounds[j].1 {
                x[j] += 1;
                break;
            }
            x[j] = bounds[j].0;
        }
    }

    let dataset = Dataset::new(options, objectives, rows)?.with_name(kind.to_string());
    let first = dataset.column(0);
    let best = first.iter().copied().fold(f64::INFINITY, f64::min);
    let optimum = (0..dataset.len()).filter(|&i| first[i] == best).collect();
    let points: Vec<Vec<f64>> = (0..dataset.len()).map(|i| dataset.objective_values(i).to_vec()).collect();
    let mut front = pareto_front(&points, &dataset.directions());
    front.sort_unstable();
    Ok(Synthetic { dataset, optimum, front })
}
