use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use flashtune::baselines::{epal, progressive_sampling, random_search, rank_based, EpalParams, LivesParams};
use flashtune::flash::{flash_multi, flash_single};
use flashtune::harness::{emit_plot_data, run_experiment, ExperimentSpec, MethodSpec};
use flashtune::metrics::{gd, igd, pareto_front, rank_difference, FrontComparison};
use flashtune::synth::{generate_synthetic, SyntheticKind};
use flashtune::{
    load_dataset, split, CartParams, Dataset, Error, ExternalCommand, FlashParams, Goal, MeasurementOracle,
    OptimizationRun, RegressionTree, SplitSpec,
};

#[derive(Parser)]
#[command(name = "flashtune", version, about = "Find fast software configurations with few measurements")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[arg(long, global = true, default_value_t = 4)]
    cart_min_split: usize,
    #[arg(long, global = true, default_value_t = 2)]
    cart_min_leaf: usize,
    /// Initial random sample.
    #[arg(long, global = true, default_value_t = 30)]
    size: usize,
    /// Measurements after the initial sample.
    #[arg(long, global = true, default_value_t = 50)]
    budget: usize,
    /// Random weight vectors per Bazza step.
    #[arg(long, global = true, default_value_t = 10)]
    projections: usize,
    #[arg(long, global = true, default_value_t = 3)]
    lives: usize,
    /// ePAL slack; `experiment` accepts a comma-separated list.
    #[arg(long, global = true, value_delimiter = ',', default_value = "0.01")]
    epsilon: Vec<f64>,
    /// flash, progressive, rank, epal or random; `experiment` accepts a list.
    #[arg(long, global = true, value_delimiter = ',')]
    method: Vec<String>,
    #[arg(long, global = true)]
    with_replacement: bool,
    /// Seconds before ePAL gives up.
    #[arg(long, global = true)]
    max_wall_time: Option<f64>,
}

#[derive(Args)]
struct DataArgs {
    /// TOML manifest describing the CSV columns.
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    data: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Single-objective FLASH over every row of a dataset.
    Tune {
        #[command(flatten)]
        data: DataArgs,
        /// Objective name; defaults to the first.
        #[arg(long)]
        objective: Option<String>,
        /// Also write the final regression tree to tree.txt.
        #[arg(long)]
        dump_tree: bool,
        /// Measure by running this shell command; `{option}` placeholders are filled in.
        #[arg(long)]
        command: Option<String>,
        /// Seconds allowed per external measurement.
        #[arg(long, default_value_t = 600.0)]
        timeout: f64,
    },
    /// Multi-objective FLASH over every row of a dataset.
    TuneMo {
        #[command(flatten)]
        data: DataArgs,
        /// Objective names to optimize; defaults to all.
        #[arg(long, value_delimiter = ',')]
        objectives: Vec<String>,
    },
    /// Runs one method (see --method) on the seed's 40/20/40 split.
    Baseline {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        objective: Option<String>,
        /// Measurements for random search; defaults to size + budget.
        #[arg(long)]
        random_n: Option<usize>,
    },
    /// Prints GD, IGD and RD of a front CSV against a dataset.
    Eval {
        #[command(flatten)]
        data: DataArgs,
        /// Rows (option and objective columns) to score.
        #[arg(long)]
        front: PathBuf,
        /// Reference front; defaults to the dataset's brute-force front.
        #[arg(long)]
        true_front: Option<PathBuf>,
        /// Objective used for RD; defaults to the first.
        #[arg(long)]
        objective: Option<String>,
    },
    /// Repeated comparison of several methods with reports and plot data.
    Experiment {
        /// `MANIFEST:DATA` pair; repeatable.
        #[arg(long)]
        dataset: Vec<String>,
        /// `KIND[:OPTIONS]` synthetic dataset; repeatable.
        #[arg(long)]
        synthetic: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        objectives: Vec<String>,
        #[arg(long, default_value_t = 20)]
        repeats: usize,
        #[arg(long)]
        random_n: Option<usize>,
        #[arg(long, default_value_t = 20)]
        init_size: usize,
        /// Record wall-clock times (outputs are then no longer reproducible).
        #[arg(long)]
        timing: bool,
    },
    /// Writes a synthetic dataset, its manifest and its known optimum or front.
    Synth {
        /// single-peak, interaction or bi-objective-tradeoff.
        #[arg(long)]
        kind: String,
        /// Number of boolean options.
        #[arg(long, default_value_t = 10)]
        options: usize,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let validation = e.downcast_ref::<Error>().is_some_and(Error::is_validation) || e.is::<Usage>();
            ExitCode::from(if validation { 1 } else { 2 })
        }
    }
}

/// Bad command-line input.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct Usage(String);

fn usage<T>(msg: impl Into<String>) -> anyhow::Result<T> {
    Err(Usage(msg.into()).into())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let g = &cli.global;
    let cart = CartParams { min_samples_split: g.cart_min_split, min_samples_leaf: g.cart_min_leaf, max_depth: None };
    let flash = FlashParams { size: g.size, budget: g.budget, n_projections: g.projections, seed: g.seed };
    let wall = g.max_wall_time.map(Duration::from_secs_f64);
    match cli.command {
        Command::Tune { data, objective, dump_tree, command, timeout } => {
            let ds = load(&data)?;
            let k = objective_index(&ds, objective.as_deref())?;
            let pool: Vec<usize> = (0..ds.len()).collect();
            let mut oracle = match command {
                Some(template) => MeasurementOracle::external(ExternalCommand {
                    template,
                    timeout: Duration::from_secs_f64(timeout),
                    option_names: ds.options().iter().map(|o| o.name.clone()).collect(),
                    n_objectives: ds.objectives().len(),
                }),
                None => MeasurementOracle::table(&ds),
            };
            let run = flash_single(&ds, &pool, &mut oracle, &flash, k, &cart)?;
            let best = run.best().expect("single-objective run");
            write_outputs(&g.out, &ds, &run, &[best], "best.csv")?;
            if dump_tree {
                let xs: Vec<&[f64]> = run.evaluated.iter().map(|e| ds.config(e.id).values()).collect();
                let ys: Vec<f64> = run.evaluated.iter().map(|e| e.objectives[k]).collect();
                let tree = RegressionTree::fit(&xs, &ys, &cart)?;
                let names: Vec<String> = ds.options().iter().map(|o| o.name.clone()).collect();
                fs::write(g.out.join("tree.txt"), tree.dump(Some(&names)))?;
            }
            let measured = run.evaluated.iter().find(|e| e.id == best).expect("best was measured");
            println!("best row {best}: {} = {}", ds.objectives()[k].name, measured.objectives[k]);
            println!("measurements = {}", run.measurements_used);
            println!("stop = {}", run.stop);
        }
        Command::TuneMo { data, objectives } => {
            let ds = select(load(&data)?, &objectives)?;
            let pool: Vec<usize> = (0..ds.len()).collect();
            let run = flash_multi(&ds, &pool, &mut MeasurementOracle::table(&ds), &flash, &cart)?;
            let front = run.front().expect("multi-objective run").to_vec();
            write_outputs(&g.out, &ds, &run, &front, "front.csv")?;
            println!("front size = {}", front.len());
            println!("measurements = {}", run.measurements_used);
            println!("stop = {}", run.stop);
        }
        Command::Baseline { data, objective, random_n } => {
            let ds = load(&data)?;
            let [method] = g.method.as_slice() else {
                return usage("baseline needs exactly one --method");
            };
            let parts = split(&ds, &SplitSpec::standard(g.seed))?;
            let pool = parts.merged_pool();
            let mut oracle = MeasurementOracle::table(&ds);
            let lives = LivesParams { lives: g.lives, step: 1, with_replacement: g.with_replacement, seed: g.seed };
            let multi = ds.objectives().len() > 1 && objective.is_none();
            let k = objective_index(&ds, objective.as_deref())?;
            let run = match method.as_str() {
                "flash" if multi => flash_multi(&ds, &pool, &mut oracle, &flash, &cart)?,
                "flash" => flash_single(&ds, &pool, &mut oracle, &flash, k, &cart)?,
                "progressive" => {
                    progressive_sampling(
                        &ds,
                        &parts.train,
                        &parts.holdout,
                        &parts.validation,
                        &mut oracle,
                        &lives,
                        k,
                        &cart,
                    )?
                    .run
                }
                "rank" => {
                    rank_based(&ds, &parts.train, &parts.holdout, &parts.validation, &mut oracle, &lives, k, &cart)?.run
                }
                "epal" => {
                    let [epsilon] = g.epsilon.as_slice() else {
                        return usage("baseline takes a single --epsilon");
                    };
                    let params =
                        EpalParams { epsilon: *epsilon, max_wall_time: wall, seed: g.seed, ..EpalParams::default() };
                    epal(&ds, &pool, &mut oracle, &params)?
                }
                "random" => {
                    let goal = if multi { Goal::Pareto } else { Goal::Single(k) };
                    random_search(&ds, &pool, &mut oracle, random_n.unwrap_or(g.size + g.budget), goal, g.seed)?
                }
                other => return usage(format!("unknown method {other:?}")),
            };
            let ids = match (run.best(), run.front()) {
                (Some(b), _) => vec![b],
                (None, Some(f)) => f.to_vec(),
                (None, None) => unreachable!(),
            };
            write_outputs(&g.out, &ds, &run, &ids, "result.csv")?;
            if let Some(b) = run.best() {
                println!("best row {b}: rd = {}", rank_difference(b, &ds, k)?);
            } else {
                println!("front size = {}", ids.len());
            }
            println!("measurements = {}", run.measurements_used);
            println!("stop = {}", run.stop);
        }
        Command::Eval { data, front, true_front, objective } => {
            let ds = load(&data)?;
            let k = objective_index(&ds, objective.as_deref())?;
            let approx = rows_of(&ds, &front)?;
            let truth = match true_front {
                Some(path) => rows_of(&ds, &path)?,
                None => {
                    let points: Vec<Vec<f64>> = (0..ds.len()).map(|i| ds.objective_values(i).to_vec()).collect();
                    let mut ids = pareto_front(&points, &ds.directions());
                    ids.sort_unstable();
                    ids
                }
            };
            let values = |ids: &[usize]| ids.iter().map(|&i| ds.objective_values(i).to_vec()).collect::<Vec<_>>();
            let cmp = FrontComparison::new(values(&truth), values(&approx))?;
            let show = |r: flashtune::Result<f64>| r.map_or_else(|_| "undefined".to_string(), |v| v.to_string());
            let direction = ds.objectives()[k].direction;
            let best = approx
                .iter()
                .copied()
                .reduce(
                    |a, b| if direction.better(ds.objective_values(b)[k], ds.objective_values(a)[k]) { b } else { a },
                )
                .expect("front is non-empty");
            println!("front_size = {}", approx.len());
            println!("true_front_size = {}", truth.len());
            println!("gd = {}", show(gd(&cmp)));
            println!("igd = {}", show(igd(&cmp)));
            println!("rd = {}", rank_difference(best, &ds, k)?);
            println!("rd_objective = {}", ds.objectives()[k].name);
        }
        Command::Experiment { dataset, synthetic, objectives, repeats, random_n, init_size, timing } => {
            let mut datasets = Vec::new();
            for pair in &dataset {
                let Some((manifest, data)) = pair.split_once(':') else {
                    return usage(format!("--dataset expects MANIFEST:DATA, got {pair:?}"));
                };
                let ds = load_dataset(Path::new(manifest), Path::new(data))?;
                let name = ds.name().map(str::to_string).unwrap_or_else(|| stem(data));
                datasets.push(ds.with_name(name));
            }
            for item in &synthetic {
                let (kind, n) = match item.split_once(':') {
                    Some((k, n)) => {
                        (k, n.parse::<usize>().map_err(|_| Usage(format!("bad option count in {item:?}")))?)
                    }
                    None => (item.as_str(), 10),
                };
                let s = generate_synthetic(kind.parse::<SyntheticKind>()?, n, g.seed)?;
                datasets.push(s.dataset.with_name(format!("{kind}-{n}")));
            }
            if datasets.is_empty() {
                return usage("experiment needs --dataset or --synthetic");
            }
            let names = if g.method.is_empty() {
                vec!["flash".to_string(), "progressive".into(), "rank".into()]
            } else {
                g.method.clone()
            };
            let mut methods = Vec::new();
            for name in &names {
                match name.as_str() {
                    "flash" => {
                        methods.push(MethodSpec::Flash { size: g.size, budget: g.budget, projections: g.projections })
                    }
                    "progressive" => methods.push(MethodSpec::Progressive { lives: g.lives }),
                    "rank" => methods.push(MethodSpec::RankBased { lives: g.lives }),
                    "epal" => methods.extend(g.epsilon.iter().map(|&epsilon| MethodSpec::Epal {
                        epsilon,
                        init_size,
                        max_wall_time: wall,
                    })),
                    "random" => methods.push(MethodSpec::Random { n: random_n.unwrap_or(g.size + g.budget) }),
                    other => return usage(format!("unknown method {other:?}")),
                }
            }
            let mut spec = ExperimentSpec::new(datasets, methods);
            spec.objectives = objectives;
            spec.repeats = repeats;
            spec.seed = g.seed;
            spec.cart = cart;
            spec.with_replacement = g.with_replacement;
            spec.timing = timing;
            let report = run_experiment(&spec)?;
            let files = emit_plot_data(&report, &g.out)?;
            print!("{}", report.render());
            for f in files {
                println!("wrote {}", f.display());
            }
        }
        Command::Synth { kind, options } => {
            let kind: SyntheticKind = kind.parse()?;
            let s = generate_synthetic(kind, options, g.seed)?;
            fs::create_dir_all(&g.out)?;
            let base = g.out.join(kind.to_string());
            s.dataset.save(&base.with_extension("toml"), &base.with_extension("csv"))?;
            let (file, ids) =
                if kind.is_multi_objective() { ("front.csv", &s.front) } else { ("optimum.csv", &s.optimum) };
            s.dataset.write_rows_csv(ids, BufWriter::new(File::create(g.out.join(file))?))?;
            println!("rows = {}", s.dataset.len());
            println!("known {} = {}", file.trim_end_matches(".csv"), ids.len());
        }
    }
    Ok(())
}

fn load(data: &DataArgs) -> anyhow::Result<Dataset> {
    match load_dataset(&data.manifest, &data.data) {
        Err(Error::Io(e)) => usage(format!("cannot read {} or {}: {e}", data.manifest.display(), data.data.display())),
        other => other.with_context(|| format!("loading {} with {}", data.data.display(), data.manifest.display())),
    }
}

fn stem(path: &str) -> String {
    Path::new(path).file_stem().map_or_else(|| path.to_string(), |s| s.to_string_lossy().into_owned())
}

fn objective_index(ds: &Dataset, name: Option<&str>) -> anyhow::Result<usize> {
    match name {
        None => Ok(0),
        Some(n) => match ds.objective_index(n) {
            Some(k) => Ok(k),
            None => usage(format!("no objective named {n:?}")),
        },
    }
}

fn select(ds: Dataset, names: &[String]) -> anyhow::Result<Dataset> {
    if names.is_empty() {
        return Ok(ds);
    }
    let idx = names.iter().map(|n| objective_index(&ds, Some(n))).collect::<anyhow::Result<Vec<_>>>()?;
    Ok(ds.select_objectives(&idx)?)
}

/// Maps the rows of a CSV with the dataset's columns back to dataset ids.
fn rows_of(ds: &Dataset, path: &Path) -> anyhow::Result<Vec<usize>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let rows = Dataset::from_parts(&ds.manifest(), file).with_context(|| format!("reading {}", path.display()))?;
    let mut ids = Vec::with_capacity(rows.len());
    for config in rows.configs() {
        match ds.find(config) {
            Some(id) => ids.push(id),
            None => bail!(Error::UnknownConfiguration),
        }
    }
    Ok(ids)
}

fn write_outputs(out: &Path, ds: &Dataset, run: &OptimizationRun, ids: &[usize], name: &str) -> anyhow::Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    run.write_trace_csv(ds, BufWriter::new(File::create(out.join("trace.csv"))?))?;
    ds.write_rows_csv(ids, BufWriter::new(File::create(out.join(name))?))?;
    Ok(())
}
