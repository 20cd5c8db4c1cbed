//! Evaluation measures: prediction error, rank agreement, dominance and front
//! quality indicators.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::space::{ConfigurationId, Dataset, Direction};

/// Mean magnitude of relative error, in percent: `mean(|pred - y| / y) * 100`.
///
/// The denominator is the actual value itself, so actual values must be positive.
pub fn mmre(predicted: &[f64], actual: &[f64]) -> Result<f64> {
    check_lengths(predicted, actual)?;
    let mut total = 0.0;
    for (&p, &y) in predicted.iter().zip(actual) {
        if y == 0.0 {
            return Err(Error::UndefinedMetric("MMRE with a zero actual value".into()));
        }
        if y < 0.0 {
            return Err(Error::UndefinedMetric("MMRE with a negative actual value".into()));
        }
        total += (p - y).abs() / y * 100.0;
    }
    Ok(total / actual.len() as f64)
}

/// Mean absolute difference between the rank orders of `predicted` and `actual`.
///
/// Ranks ascend from 1; tied values share the average of their rank positions.
pub fn mu_rd(predicted: &[f64], actual: &[f64]) -> Result<f64> {
    check_lengths(predicted, actual)?;
    let rp = average_ranks(predicted);
    let ra = average_ranks(actual);
    let total: f64 = rp.iter().zip(&ra).map(|(a, b)| (a - b).abs()).sum();
    Ok(total / actual.len() as f64)
}

fn check_lengths(predicted: &[f64], actual: &[f64]) -> Result<()> {
    if predicted.len() != actual.len() {
        return Err(Error::Dimension { expected: actual.len(), got: predicted.len() });
    }
    if actual.is_empty() {
        return Err(Error::UndefinedMetric("empty input".into()));
    }
    Ok(())
}

/// Fractional ranks (1-based, ties averaged).
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Rank of one row within the whole dataset on one objective, 1 = best.
///
/// Ties take the smallest rank among equal values.
pub fn rank_of(id: ConfigurationId, dataset: &Dataset, objective: usize) -> Result<usize> {
    if id >= dataset.len() {
        return Err(Error::UnknownId(id));
    }
    rank_within(id, &(0..dataset.len()).collect::<Vec<_>>(), dataset, objective)
}

/// Like [`rank_of`] but restricted to the rows in `universe`.
pub fn rank_within(
    id: ConfigurationId,
    universe: &[ConfigurationId],
    dataset: &Dataset,
    objective: usize,
) -> Result<usize> {
    if id >= dataset.len() {
        return Err(Error::UnknownId(id));
    }
    if objective >= dataset.objectives().len() {
        return Err(Error::InvalidParams(format!("objective index {objective} out of range")));
    }
    let direction = dataset.objectives()[objective].direction;
    let value = dataset.objective_values(id)[objective];
    let better =
        universe.iter().filter(|&&other| direction.better(dataset.objective_values(other)[objective], value)).count();
    Ok(better + 1)
}

/// `|rank(actual best) - rank(predicted best)|` over the whole dataset.
///
/// Because tied values share the smallest rank, this is simply
/// `rank(predicted_best) - 1`.
pub fn rank_difference(predicted_best: ConfigurationId, dataset: &Dataset, objective: usize) -> Result<usize> {
    Ok(rank_of(predicted_best, dataset, objective)? - 1)
}

/// Objective values together with their optimization directions.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveVector {
    pub values: Vec<f64>,
    pub directions: Vec<Direction>,
}

impl ObjectiveVector {
    pub fn new(values: Vec<f64>, directions: Vec<Direction>) -> Result<Self> {
        if values.is_empty() || values.len() != directions.len() {
            return Err(Error::Dimension { expected: directions.len().max(1), got: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("objective values must be finite".into()));
        }
        Ok(Self { values, directions })
    }

    pub fn dominates(&self, other: &ObjectiveVector) -> Result<bool> {
        if self.directions != other.directions || self.values.len() != other.values.len() {
            return Err(Error::Dimension { expected: self.values.len(), got: other.values.len() });
        }
        Ok(dominates(&self.values, &other.values, &self.directions))
    }
}

/// Binary dominance: `a` is no worse than `b` everywhere and strictly better somewhere.
pub fn dominates(a: &[f64], b: &[f64], directions: &[Direction]) -> bool {
    debug_assert_eq!(a.len(), b.len());
    let mut strict = false;
    for ((&x, &y), d) in a.iter().zip(b).zip(directions) {
        if d.better(y, x) {
            return false;
        }
        if d.better(x, y) {
            strict = true;
        }
    }
    strict
}

/// Indices of the points not dominated by any other point, ascending.
///
/// Points are visited in lexicographic best-first order, so a point can only be
/// dominated by one visited earlier; it is enough to compare against the front
/// collected so far. Duplicates of a front point are all kept.
pub fn pareto_front(points: &[Vec<f64>], directions: &[Direction]) -> Vec<usize> {
    let mapped: Vec<Vec<f64>> =
        points.iter().map(|p| p.iter().zip(directions).map(|(v, d)| d.to_max(*v)).collect()).collect();
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        mapped[b]
            .iter()
            .zip(&mapped[a])
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal)
    });
    let all_max = vec![Direction::Maximize; directions.len()];
    let mut front: Vec<usize> = Vec::new();
    for i in order {
        if !front.iter().any(|&f| dominates(&mapped[f], &mapped[i], &all_max)) {
            front.push(i);
        }
    }
    front.sort_unstable();
    front
}

/// Inputs for GD / IGD: both fronts plus the normalization ranges.
#[derive(Debug, Clone)]
pub struct FrontComparison {
    true_front: Vec<Vec<f64>>,
    approx_front: Vec<Vec<f64>>,
    /// `(min, max)` per objective, taken from the true front.
    ranges: Vec<(f64, f64)>,
}

impl FrontComparison {
    /// Objectives whose true-front range is degenerate (`max == min`) are left out
    /// of the distance computation.
    pub fn new(true_front: Vec<Vec<f64>>, approx_front: Vec<Vec<f64>>) -> Result<Self> {
        if true_front.is_empty() || approx_front.is_empty() {
            return Err(Error::UndefinedMetric("fronts must be non-empty".into()));
        }
        let m = true_front[0].len();
        if let Some(p) = true_front.iter().chain(&approx_front).find(|p| p.len() != m) {
            return Err(Error::Dimension { expected: m, got: p.len() });
        }
        let ranges = (0..m)
            .map(|k| {
                true_front.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p[k]), hi.max(p[k])))
            })
            .collect();
        Ok(Self { true_front, approx_front, ranges })
    }

    /// Uses explicit normalization ranges instead of the true-front ranges.
    pub fn with_ranges(mut self, ranges: Vec<(f64, f64)>) -> Result<Self> {
        if ranges.len() != self.ranges.len() {
            return Err(Error::Dimension { expected: self.ranges.len(), got: ranges.len() });
        }
        self.ranges = ranges;
        Ok(self)
    }

    fn active(&self) -> Result<Vec<usize>> {
        let active: Vec<usize> = (0..self.ranges.len()).filter(|&k| self.ranges[k].1 > self.ranges[k].0).collect();
        if active.is_empty() {
            return Err(Error::UndefinedMetric("every objective has a degenerate range on the true front".into()));
        }
        Ok(active)
    }

    fn distance(&self, active: &[usize], a: &[f64], b: &[f64]) -> f64 {
        active
            .iter()
            .map(|&k| {
                let (lo, hi) = self.ranges[k];
                ((a[k] - b[k]) / (hi - lo)).powi(2)
            })
            .sum::<f64>()
            .sqrt()
    }

    fn mean_nearest(&self, from: &[Vec<f64>], to: &[Vec<f64>]) -> Result<f64> {
        let active = self.active()?;
        let total: f64 =
            from.iter().map(|p| to.iter().map(|q| self.distance(&active, p, q)).fold(f64::INFINITY, f64::min)).sum();
        Ok(total / from.len() as f64)
    }
}

/// Generational distance: mean distance from each approximate point to the nearest
/// true-front point, in normalized objective space.
pub fn gd(cmp: &FrontComparison) -> Result<f64> {
    cmp.mean_nearest(&cmp.approx_front, &cmp.true_front)
}

/// Inverted generational distance: mean distance from each true-front point to the
/// nearest approximate point.
pub fn igd(cmp: &FrontComparison) -> Result<f64> {
    cmp.mean_nearest(&cmp.true_front, &cmp.approx_front)
}

/// Median of a sample; `NaN` when empty.
pub fn median(values: &[f64]) -> f64 {
    percentile(values, 0.5)
}

/// Linear-interpolated percentile, `q` in `[0, 1]`.
pub fn percentile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

/// Interquartile range (75th minus 25th percentile).
pub fn iqr(values: &[f64]) -> f64 {
    percentile(values, 0.75) - percentile(values, 0.25)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{Configuration, ObjectiveSchema, OptionSchema};
    use Direction::*;

    #[test]
    fn mmre_cases() {
        assert_eq!(mmre(&[110.0], &[100.0]).unwrap(), 10.0);
        assert_eq!(mmre(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert!((mmre(&[90.0, 240.0], &[100.0, 200.0]).unwrap() - 15.0).abs() < 1e-12);
        assert!(matches!(mmre(&[1.0], &[0.0]), Err(Error::UndefinedMetric(_))));
        assert!(matches!(mmre(&[1.0], &[-2.0]), Err(Error::UndefinedMetric(_))));
        assert!(matches!(mmre(&[1.0, 2.0], &[1.0]), Err(Error::Dimension { .. })));
    }

    #[test]
    fn mu_rd_cases() {
        assert_eq!(mu_rd(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]).unwrap(), 0.0);
        assert_eq!(mu_rd(&[4.0, 3.0, 2.0, 1.0], &[1.0, 2.0, 3.0, 4.0]).unwrap(), 2.0);
        assert!((mu_rd(&[5.0, 5.0, 5.0], &[1.0, 2.0, 3.0]).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn average_ranks_ties() {
        assert_eq!(average_ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    fn ranked_dataset(values: &[f64]) -> Dataset {
        let n = values.len() as i64;
        let rows = values.iter().enumerate().map(|(i, &v)| (Configuration(vec![i as f64]), vec![v])).collect();
        Dataset::new(vec![OptionSchema::integer("x", 0, n)], vec![ObjectiveSchema::new("y", Minimize)], rows).unwrap()
    }

    #[test]
    fn rank_difference_cases() {
        let ds = ranked_dataset(&[5.0, 1.0, 3.0, 1.0, 9.0]);
        assert_eq!(rank_difference(1, &ds, 0).unwrap(), 0);
        assert_eq!(rank_difference(3, &ds, 0).unwrap(), 0);
        assert_eq!(rank_difference(2, &ds, 0).unwrap(), 2);
        assert_eq!(rank_difference(4, &ds, 0).unwrap(), 4);
        assert!(matches!(rank_difference(9, &ds, 0), Err(Error::UnknownId(9))));

        // seventh best of 1512 distinct values
        let values: Vec<f64> = (0..1512).map(|i| i as f64).collect();
        let ds = ranked_dataset(&values);
        assert_eq!(rank_difference(6, &ds, 0).unwrap(), 6);
    }

    #[test]
    fn dominance_cases() {
        let d = [Minimize, Minimize];
        assert!(dominates(&[1.0, 2.0], &[2.0, 3.0], &d));
        assert!(!dominates(&[1.0, 2.0], &[1.0, 2.0], &d));
        assert!(!dominates(&[1.0, 3.0], &[2.0, 2.0], &d));
        assert!(!dominates(&[2.0, 2.0], &[1.0, 3.0], &d));
        assert!(dominates(&[2.0, 3.0], &[1.0, 2.0], &[Maximize, Maximize]));
        let a = ObjectiveVector::new(vec![1.0, 2.0], d.to_vec()).unwrap();
        let b = ObjectiveVector::new(vec![1.0], vec![Minimize]).unwrap();
        assert!(a.dominates(&b).is_err());
    }

    #[test]
    fn pareto_front_cases() {
        let d = [Minimize, Minimize];
        assert_eq!(pareto_front(&[vec![3.0, 3.0]], &d), vec![0]);
        assert_eq!(pareto_front(&[vec![1.0, 1.0], vec![2.0, 2.0], vec![3.0, 3.0]], &d), vec![0]);
        assert_eq!(pareto_front(&[vec![3.0, 3.0], vec![1.0, 1.0], vec![1.0, 1.0]], &d), vec![1, 2]);
        assert_eq!(pareto_front(&[vec![1.0, 3.0], vec![2.0, 2.0], vec![3.0, 1.0], vec![3.0, 3.0]], &d), vec![0, 1, 2]);
    }

    #[test]
    fn gd_igd_cases() {
        let front = vec![vec![0.0, 1.0], vec![1.0, 0.0], vec![0.5, 0.5]];
        let same = FrontComparison::new(front.clone(), front.clone()).unwrap();
        assert_eq!(gd(&same).unwrap(), 0.0);
        assert_eq!(igd(&same).unwrap(), 0.0);

        let subset = FrontComparison::new(front.clone(), vec![vec![0.0, 1.0]]).unwrap();
        assert_eq!(gd(&subset).unwrap(), 0.0);
        assert!(igd(&subset).unwrap() > 0.0);

        let mid = FrontComparison::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]], vec![vec![0.5, 0.5]]).unwrap();
        assert!((gd(&mid).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((igd(&mid).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn degenerate_objectives() {
        // second objective constant on the true front: dropped
        let cmp = FrontComparison::new(vec![vec![0.0, 5.0], vec![2.0, 5.0]], vec![vec![1.0, 7.0]]).unwrap();
        assert!((gd(&cmp).unwrap() - 0.5).abs() < 1e-15);
        let all = FrontComparison::new(vec![vec![1.0, 5.0]], vec![vec![1.0, 7.0]]).unwrap();
        assert!(matches!(gd(&all), Err(Error::UndefinedMetric(_))));
    }

    #[test]
    fn summary_statistics() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(iqr(&[1.0, 2.0, 3.0, 4.0, 5.0]), 2.0);
        assert!(median(&[]).is_nan());
    }
}
