//! Progressive sampling, rank-based sampling and random search on one split.

use flashtune::baselines::{progressive_sampling, random_search, rank_based, LivesParams};
use flashtune::metrics::rank_difference;
use flashtune::synth::{generate_synthetic, SyntheticKind};
use flashtune::{split, CartParams, Goal, MeasurementOracle, SplitSpec};

fn main() -> anyhow::Result<()> {
    let ds = generate_synthetic(SyntheticKind::SinglePeak, 10, 5)?.dataset;
    let parts = split(&ds, &SplitSpec::standard(2))?;
    let lives = LivesParams { seed: 2, ..LivesParams::default() };
    let cart = CartParams::default();

    let mut oracle = MeasurementOracle::table(&ds);
    let prog =
        progressive_sampling(&ds, &parts.train, &parts.holdout, &parts.validation, &mut oracle, &lives, 0, &cart)?;
    let mut oracle = MeasurementOracle::table(&ds);
    let rank = rank_based(&ds, &parts.train, &parts.holdout, &parts.validation, &mut oracle, &lives, 0, &cart)?;

    for (name, out) in [("progressive", &prog), ("rank-based", &rank)] {
        let best = out.run.best().expect("single objective");
        println!(
            "{name:12} measurements {:4}  lives lost {}  stop {}  rd {}",
            out.run.measurements_used,
            out.lives_lost,
            out.run.stop,
            rank_difference(best, &ds, 0)?
        );
    }

    let mut oracle = MeasurementOracle::table(&ds);
    let random = random_search(&ds, &parts.merged_pool(), &mut oracle, 50, Goal::Single(0), 2)?;
    let best = random.best().expect("single objective");
    println!("{:12} measurements {:4}  rd {}", "random", random.measurements_used, rank_difference(best, &ds, 0)?);
    Ok(())
}
