//! Repeated method comparisons and their reports.
//!
//! Repeat `r` of an experiment uses seed `seed + r` for everything: the
//! 40/20/40 split, every method's sampling and every tie-breaking draw. The
//! sampling baselines work on the split; FLASH, ePAL and random search work on
//! the training and validation pools merged. A method that errors, or ePAL
//! hitting its wall-time limit, is recorded as `X` and the experiment carries on.
//!
//! # Output files
//!
//! [`emit_plot_data`] writes, into the output directory:
//!
//! * `raw.csv`: `dataset,method,repeat,seed,status,stop,rd,rd_pool,gd,igd,measurements,evals`
//!   (plus `wall_time_s` when timing is on), one row per method per repeat;
//! * `summary.csv`: `dataset,method,metric,median,iqr,rank,failures`;
//! * `rank_difference.csv`: `dataset,method,repeat,rd` for single-objective datasets;
//! * `measurements.csv`: `dataset,method,repeat,measurements,ratio`, where `ratio`
//!   divides by the median of the progressive-sampling run on the same dataset
//!   (empty without one);
//! * with timing only, `time.csv` (`dataset,rows,options,method,total_time_s`) and
//!   `time_gain.csv` (`dataset` plus one column per method: total time over
//!   FLASH's, or over the first method's when FLASH is absent);
//! * `report.txt`: the quartile-chart text report.
//!
//! Without timing every file is a pure function of the spec.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use rayon::prelude::*;

use crate::baselines::{epal, progressive_sampling, random_search, rank_based, EpalParams, LivesParams};
use crate::cart::CartParams;
use crate::error::{Error, Result};
use crate::flash::{flash_multi, flash_single, FlashParams};
use crate::gp::Kernel;
use crate::metrics::{gd, igd, iqr, median, pareto_front, percentile, rank_difference, rank_within, FrontComparison};
use crate::space::{split, Dataset, MeasurementOracle, SplitSpec};
use crate::stats::{scott_knott, SkParams, Treatment};
use crate::trace::{Goal, OptimizationRun, Phase, StopReason};

/// A method and its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MethodSpec {
    Flash { size: usize, budget: usize, projections: usize },
    Progressive { lives: usize },
    RankBased { lives: usize },
    Epal { epsilon: f64, init_size: usize, max_wall_time: Option<Duration> },
    Random { n: usize },
}

impl MethodSpec {
    pub fn label(&self) -> String {
        match self {
            MethodSpec::Flash { .. } => "flash".into(),
            MethodSpec::Progressive { .. } => "progressive".into(),
            MethodSpec::RankBased { .. } => "rank-based".into(),
            MethodSpec::Epal { epsilon, .. } => format!("epal-{epsilon}"),
            MethodSpec::Random { n } => format!("random-{n}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub datasets: Vec<Dataset>,
    pub methods: Vec<MethodSpec>,
    /// Objective names to keep; empty keeps all.
    pub objectives: Vec<String>,
    pub repeats: usize,
    pub seed: u64,
    pub cart: CartParams,
    pub with_replacement: bool,
    pub sk: SkParams,
    /// Record wall-clock columns and files.
    pub timing: bool,
}

impl ExperimentSpec {
    pub fn new(datasets: Vec<Dataset>, methods: Vec<MethodSpec>) -> Self {
        Self {
            datasets,
            methods,
            objectives: Vec::new(),
            repeats: 20,
            seed: 0,
            cart: CartParams::default(),
            with_replacement: false,
            sk: SkParams::default(),
            timing: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.repeats < 1 {
            return Err(Error::InvalidParams("repeats must be at least 1".into()));
        }
        if self.methods.is_empty() || self.datasets.is_empty() {
            return Err(Error::InvalidParams("an experiment needs at least one dataset and one method".into()));
        }
        let mut labels: Vec<String> = self.methods.iter().map(MethodSpec::label).collect();
        labels.sort();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParams("method labels must be unique".into()));
        }
        self.cart.validate()?;
        self.sk.validate()
    }
}

/// What one method produced in one repeat.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    /// Rank difference against the whole dataset (single objective).
    pub rd: Option<usize>,
    /// Rank difference against the candidate pool the method searched.
    pub rd_pool: Option<usize>,
    pub gd: Option<f64>,
    pub igd: Option<f64>,
    pub measurements: usize,
    /// Measurements after the initial random sample.
    pub evals: usize,
    pub wall_time: Duration,
    pub stop: StopReason,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub dataset: String,
    pub method: String,
    pub repeat: usize,
    pub seed: u64,
    /// `Err` holds the reason the cell is an `X`.
    pub result: std::result::Result<RunMetrics, String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    Rd,
    Gd,
    Igd,
    Measurements,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Rd => "rd",
            Metric::Gd => "gd",
            Metric::Igd => "igd",
            Metric::Measurements => "measurements",
        }
    }

    fn of(self, m: &RunMetrics) -> Option<f64> {
        match self {
            Metric::Rd => m.rd.map(|v| v as f64),
            Metric::Gd => m.gd,
            Metric::Igd => m.igd,
            Metric::Measurements => Some(m.measurements as f64),
        }
    }
}

/// Median, IQR and Scott-Knott rank of one metric for one method on one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub dataset: String,
    pub method: String,
    pub metric: Metric,
    pub median: f64,
    pub iqr: f64,
    /// `None` when fewer than two repeats succeeded.
    pub rank: Option<usize>,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetInfo {
    pub name: String,
    pub rows: usize,
    pub options: usize,
    pub multi_objective: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QualityReport {
    pub datasets: Vec<DatasetInfo>,
    pub methods: Vec<String>,
    /// Ordered by dataset, then repeat, then method.
    pub rows: Vec<RunRecord>,
    pub aggregates: Vec<Aggregate>,
    pub timing: bool,
}

impl QualityReport {
    /// Successful metrics of one method on one dataset, in repeat order.
    pub fn values(&self, dataset: &str, method: &str, metric: Metric) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.dataset == dataset && r.method == method)
            .filter_map(|r| r.result.as_ref().ok().and_then(|m| metric.of(m)))
            .collect()
    }

    pub fn aggregate(&self, dataset: &str, method: &str, metric: Metric) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| a.dataset == dataset && a.method == method && a.metric == metric)
    }

    /// Quartile-chart text report, one block per dataset and metric.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for info in &self.datasets {
            for metric in metrics_for(info.multi_objective) {
                let _ = writeln!(out, "== {} ({} rows) : {} ==", info.name, info.rows, metric.name());
                let _ = writeln!(out, "{:>4}  {:<14} {:>10} {:>10}  chart", "rank", "method", "median", "iqr");
                let mut aggs: Vec<&Aggregate> =
                    self.aggregates.iter().filter(|a| a.dataset == info.name && a.metric == metric).collect();
                aggs.sort_by_key(|a| (a.rank.unwrap_or(usize::MAX), self.methods.iter().position(|m| *m == a.method)));
                let all: Vec<f64> = aggs.iter().flat_map(|a| self.values(&info.name, &a.method, metric)).collect();
                let lo = all.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = all.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                for a in aggs {
                    let rank = a.rank.map_or("X".to_string(), |r| r.to_string());
                    let values = self.values(&info.name, &a.method, metric);
                    let chart = if values.is_empty() { String::new() } else { quartile_chart(&values, lo, hi, 30) };
                    let _ = writeln!(
                        out,
                        "{rank:>4}  {:<14} {:>10} {:>10}  {chart}",
                        a.method,
                        fmt_num(a.median),
                        fmt_num(a.iqr)
                    );
                }
                out.push('\n');
            }
        }
        out
    }
}

fn metrics_for(multi: bool) -> Vec<Metric> {
    if multi {
        vec![Metric::Gd, Metric::Igd, Metric::Measurements]
    } else {
        vec![Metric::Rd, Metric::Measurements]
    }
}

fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "X".into()
    } else if v == v.trunc() && v.abs() < 1e15 {
        format!("{v:.0}")
    } else {
        format!("{v:.4}")
    }
}

/// `-` from the 10th to 30th and 70th to 90th percentiles, `*` at the median and
/// `|` at the middle of the shared `[lo, hi]` scale.
pub fn quartile_chart(values: &[f64], lo: f64, hi: f64, width: usize) -> String {
    let pos = |v: f64| {
        if hi > lo {
            (((v - lo) / (hi - lo)) * (width - 1) as f64).round() as usize
        } else {
            width / 2
        }
    };
    let mut chars = vec![' '; width];
    let q: Vec<usize> = [0.1, 0.3, 0.5, 0.7, 0.9].iter().map(|&p| pos(percentile(values, p))).collect();
    for c in chars.iter_mut().take(q[1] + 1).skip(q[0]) {
        *c = '-';
    }
    for c in chars.iter_mut().take(q[4] + 1).skip(q[3]) {
        *c = '-';
    }
    chars[width / 2] = '|';
    chars[q[2]] = '*';
    chars.into_iter().collect::<String>().trim_end().to_string()
}

/// Runs every method on every dataset for every repeat.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<QualityReport> {
    spec.validate()?;
    let mut datasets = Vec::with_capacity(spec.datasets.len());
    for (i, ds) in spec.datasets.iter().enumerate() {
        let selected = if spec.objectives.is_empty() {
            ds.clone()
        } else {
            let idx = spec
                .objectives
                .iter()
                .map(|name| ds.objective_index(name).ok_or_else(|| Error::MissingColumn(name.clone())))
                .collect::<Result<Vec<_>>>()?;
            ds.select_objectives(&idx)?
        };
        let name = ds.name().map_or_else(|| format!("dataset{i}"), str::to_string);
        datasets.push((name, selected));
    }
    let mut names: Vec<&String> = datasets.iter().map(|(n, _)| n).collect();
    names.sort();
    if names.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidParams("dataset names must be unique".into()));
    }

    let mut rows = Vec::new();
    let mut infos = Vec::new();
    for (name, ds) in &datasets {
        let true_front = if ds.objectives().len() > 1 { Some(true_front(ds)) } else { None };
        let per_repeat: Vec<Vec<RunRecord>> = (0..spec.repeats)
            .into_par_iter()
            .map(|r| {
                let seed = spec.seed.wrapping_add(r as u64);
                let parts = split(ds, &SplitSpec::standard(seed));
                spec.methods
                    .iter()
                    .map(|method| {
                        let result = match &parts {
                            Ok(parts) => run_method(ds, parts, method, seed, spec, true_front.as_deref())
                                .map_err(|e| e.to_string()),
                            Err(e) => Err(e.to_string()),
                        };
                        RunRecord { dataset: name.clone(), method: method.label(), repeat: r, seed, result }
                    })
                    .collect()
            })
            .collect();
        rows.extend(per_repeat.into_iter().flatten());
        infos.push(DatasetInfo {
            name: name.clone(),
            rows: ds.len(),
            options: ds.options().len(),
            multi_objective: ds.objectives().len() > 1,
        });
    }

    let methods: Vec<String> = spec.methods.iter().map(MethodSpec::label).collect();
    let mut report = QualityReport { datasets: infos, methods, rows, aggregates: Vec::new(), timing: spec.timing };
    let mut aggregates = Vec::new();
    for info in &report.datasets {
        for metric in metrics_for(info.multi_objective) {
            let mut treatments = Vec::new();
            let mut pending = Vec::new();
            for method in &report.methods {
                let values = report.values(&info.name, method, metric);
                let failures = spec.repeats - values.len();
                if values.len() >= 2 {
                    treatments.push(Treatment::new(method.clone(), values.clone())?);
                }
                pending.push(Aggregate {
                    dataset: info.name.clone(),
                    method: method.clone(),
                    metric,
                    median: median(&values),
                    iqr: if values.is_empty() { f64::NAN } else { iqr(&values) },
                    rank: None,
                    failures,
                });
            }
            let ranked = scott_knott(&treatments, &spec.sk)?;
            for agg in &mut pending {
                agg.rank = ranked.iter().find(|r| r.label == agg.method).map(|r| r.rank);
            }
            aggregates.extend(pending);
        }
    }
    report.aggregates = aggregates;
    Ok(report)
}

/// Objective vectors of the brute-force Pareto front of `dataset`.
fn true_front(dataset: &Dataset) -> Vec<Vec<f64>> {
    let points: Vec<Vec<f64>> = (0..dataset.len()).map(|i| dataset.objective_values(i).to_vec()).collect();
    pareto_front(&points, &dataset.directions()).into_iter().map(|i| points[i].clone()).collect()
}

fn run_method(
    ds: &Dataset,
    parts: &crate::space::Split,
    method: &MethodSpec,
    seed: u64,
    spec: &ExperimentSpec,
    true_front: Option<&[Vec<f64>]>,
) -> Result<RunMetrics> {
    let pool = parts.merged_pool();
    let multi = ds.objectives().len() > 1;
    let mut oracle = MeasurementOracle::table(ds);
    let lives = |lives| LivesParams { lives, step: 1, with_replacement: spec.with_replacement, seed };
    let (run, searched): (OptimizationRun, Vec<usize>) = match *method {
        MethodSpec::Flash { size, budget, projections } => {
            let params = FlashParams { size, budget, n_projections: projections, seed };
            let run = if multi {
                flash_multi(ds, &pool, &mut oracle, &params, &spec.cart)?
            } else {
                flash_single(ds, &pool, &mut oracle, &params, 0, &spec.cart)?
            };
            (run, pool)
        }
        MethodSpec::Progressive { lives: l } | MethodSpec::RankBased { lives: l } => {
            if multi {
                return Err(Error::InvalidParams(format!("{} handles a single objective", method.label())));
            }
            let f = if matches!(method, MethodSpec::Progressive { .. }) { progressive_sampling } else { rank_based };
            let out = f(ds, &parts.train, &parts.holdout, &parts.validation, &mut oracle, &lives(l), 0, &spec.cart)?;
            (out.run, parts.validation.clone())
        }
        MethodSpec::Epal { epsilon, init_size, max_wall_time } => {
            let params = EpalParams { epsilon, init_size, max_wall_time, kernel: Kernel::default(), seed };
            let run = epal(ds, &pool, &mut oracle, &params)?;
            if run.stop == StopReason::WallTime {
                return Err(Error::Command(format!("did not finish within {:?}", run.wall_time)));
            }
            (run, pool)
        }
        MethodSpec::Random { n } => {
            let goal = if multi { Goal::Pareto } else { Goal::Single(0) };
            (random_search(ds, &pool, &mut oracle, n, goal, seed)?, pool)
        }
    };
    debug_assert_eq!(oracle.count(), run.measurements_used);
    let mut metrics = RunMetrics {
        rd: None,
        rd_pool: None,
        gd: None,
        igd: None,
        measurements: oracle.count(),
        evals: run.measurements_used - run.count(Phase::Initial),
        wall_time: run.wall_time,
        stop: run.stop,
    };
    if let Some(best) = run.best() {
        metrics.rd = Some(rank_difference(best, ds, 0)?);
        metrics.rd_pool = Some(rank_within(best, &searched, ds, 0)?);
    }
    if let (Some(front), Some(truth)) = (run.front(), true_front) {
        let approx: Vec<Vec<f64>> = front.iter().map(|&id| ds.objective_values(id).to_vec()).collect();
        let cmp = FrontComparison::new(truth.to_vec(), approx)?;
        metrics.gd = Some(gd(&cmp)?);
        metrics.igd = Some(igd(&cmp)?);
    }
    Ok(metrics)
}

fn opt_num<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

/// Writes the report files into `out_dir` (created if missing) and returns their paths.
pub fn emit_plot_data(report: &QualityReport, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    let mut emit = |name: &str, header: Vec<String>, body: Vec<Vec<String>>| -> Result<()> {
        let path = out_dir.join(name);
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(&header)?;
        for row in body {
            w.write_record(&row)?;
        }
        w.flush()?;
        written.push(path);
        Ok(())
    };
    let strs = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();

    let mut header = strs(&[
        "dataset",
        "method",
        "repeat",
        "seed",
        "status",
        "stop",
        "rd",
        "rd_pool",
        "gd",
        "igd",
        "measurements",
        "evals",
    ]);
    if report.timing {
        header.push("wall_time_s".into());
    }
    let raw = report
        .rows
        .iter()
        .map(|r| {
            let mut row = vec![r.dataset.clone(), r.method.clone(), r.repeat.to_string(), r.seed.to_string()];
            match &r.result {
                Ok(m) => {
                    row.extend([
                        "ok".to_string(),
                        m.stop.to_string(),
                        opt_num(m.rd),
                        opt_num(m.rd_pool),
                        opt_num(m.gd),
                        opt_num(m.igd),
                        m.measurements.to_string(),
                        m.evals.to_string(),
                    ]);
                    if report.timing {
                        row.push(format!("{:.6}", m.wall_time.as_secs_f64()));
                    }
                }
                Err(_) => {
                    row.push("X".into());
                    row.extend(std::iter::repeat_n(String::new(), if report.timing { 8 } else { 7 }));
                }
            }
            row
        })
        .collect();
    emit("raw.csv", header, raw)?;

    let summary = report
        .aggregates
        .iter()
        .map(|a| {
            vec![
                a.dataset.clone(),
                a.method.clone(),
                a.metric.name().to_string(),
                if a.median.is_nan() { "X".into() } else { a.median.to_string() },
                if a.iqr.is_nan() { "X".into() } else { a.iqr.to_string() },
                a.rank.map_or("X".into(), |r| r.to_string()),
                a.failures.to_string(),
            ]
        })
        .collect();
    emit("summary.csv", strs(&["dataset", "method", "metric", "median", "iqr", "rank", "failures"]), summary)?;

    let ok_rows = || report.rows.iter().filter_map(|r| r.result.as_ref().ok().map(|m| (r, m)));
    let rd_rows = ok_rows()
        .filter_map(|(r, m)| {
            m.rd.map(|rd| vec![r.dataset.clone(), r.method.clone(), r.repeat.to_string(), rd.to_string()])
        })
        .collect::<Vec<_>>();
    if report.datasets.iter().any(|d| !d.multi_objective) {
        emit("rank_difference.csv", strs(&["dataset", "method", "repeat", "rd"]), rd_rows)?;
    }

    let baseline = |dataset: &str| {
        let v = report.values(dataset, "progressive", Metric::Measurements);
        if v.is_empty() {
            None
        } else {
            Some(median(&v))
        }
    };
    let meas = ok_rows()
        .map(|(r, m)| {
            let ratio = baseline(&r.dataset).map_or_else(String::new, |b| format!("{:.6}", m.measurements as f64 / b));
            vec![r.dataset.clone(), r.method.clone(), r.repeat.to_string(), m.measurements.to_string(), ratio]
        })
        .collect();
    emit("measurements.csv", strs(&["dataset", "method", "repeat", "measurements", "ratio"]), meas)?;

    if report.timing {
        let total = |dataset: &str, method: &str| -> Option<f64> {
            let runs: Vec<f64> = report
                .rows
                .iter()
                .filter(|r| r.dataset == dataset && r.method == method)
                .map(|r| r.result.as_ref().ok().map(|m| m.wall_time.as_secs_f64()))
                .collect::<Option<Vec<_>>>()?;
            Some(runs.iter().sum())
        };
        let mut time_rows = Vec::new();
        let mut gain_rows = Vec::new();
        let reference = if report.methods.iter().any(|m| m == "flash") { "flash" } else { &report.methods[0] };
        for d in &report.datasets {
            let base = total(&d.name, reference);
            let mut gain = vec![d.name.clone()];
            for method in &report.methods {
                let t = total(&d.name, method);
                time_rows.push(vec![
                    d.name.clone(),
                    d.rows.to_string(),
                    d.options.to_string(),
                    method.clone(),
                    t.map_or("X".into(), |t| format!("{t:.6}")),
                ]);
                gain.push(match (t, base) {
                    (Some(t), Some(b)) if b > 0.0 => format!("{:.6}", t / b),
                    _ => "X".into(),
                });
            }
            gain_rows.push(gain);
        }
        emit("time.csv", strs(&["dataset", "rows", "options", "method", "total_time_s"]), time_rows)?;
        let mut gain_header = vec!["dataset".to_string()];
        gain_header.extend(report.methods.iter().cloned());
        emit("time_gain.csv", gain_header, gain_rows)?;
    }

    let text = out_dir.join("report.txt");
    fs::write(&text, report.render())?;
    written.push(text);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate_synthetic, SyntheticKind};

    fn tiny() -> Dataset {
        generate_synthetic(SyntheticKind::SinglePeak, 4, 2).unwrap().dataset
    }

    #[test]
    fn smoke_two_methods() {
        let mut spec = ExperimentSpec::new(
            vec![tiny()],
            vec![MethodSpec::Flash { size: 3, budget: 2, projections: 10 }, MethodSpec::Random { n: 5 }],
        );
        spec.repeats = 1;
        let report = run_experiment(&spec).unwrap();
        assert_eq!(report.rows.len(), 2);
        for row in &report.rows {
            let m = row.result.as_ref().unwrap();
            assert!(m.rd.is_some());
        }
        assert_eq!(report.rows[0].result.as_ref().unwrap().measurements, 5);
    }

    #[test]
    fn failures_become_x() {
        let mut spec = ExperimentSpec::new(vec![tiny()], vec![MethodSpec::Random { n: 500 }]);
        spec.repeats = 2;
        let report = run_experiment(&spec).unwrap();
        assert!(report.rows.iter().all(|r| r.result.is_err()));
        let agg = report.aggregate("single-peak", "random-500", Metric::Rd).unwrap();
        assert_eq!(agg.failures, 2);
        assert_eq!(agg.rank, None);
        assert!(report.render().contains("   X  random-500"));
    }

    #[test]
    fn spec_validation() {
        let mut spec = ExperimentSpec::new(vec![tiny()], vec![]);
        assert!(run_experiment(&spec).is_err());
        spec.methods = vec![MethodSpec::Random { n: 5 }, MethodSpec::Random { n: 5 }];
        assert!(run_experiment(&spec).is_err());
        spec.methods.pop();
        spec.repeats = 0;
        assert!(run_experiment(&spec).is_err());
    }

    #[test]
    fn chart_layout() {
        let v: Vec<f64> = (0..=10).map(f64::from).collect();
        let c = quartile_chart(&v, 0.0, 10.0, 11);
        assert_eq!(c, " --- * ---");
        let c = quartile_chart(&[0.0, 0.0, 0.0], 0.0, 10.0, 11);
        assert_eq!(c, "*    |");
    }
}
