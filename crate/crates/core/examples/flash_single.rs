//! Single-objective FLASH on a synthetic space with a known optimum.

use flashtune::flash::flash_single;
use flashtune::metrics::rank_difference;
use flashtune::synth::{generate_synthetic, SyntheticKind};
use flashtune::{CartParams, FlashParams, MeasurementOracle, Phase};

fn main() -> anyhow::Result<()> {
    let synth = generate_synthetic(SyntheticKind::Interaction, 12, 3)?;
    let ds = &synth.dataset;
    let pool: Vec<usize> = (0..ds.len()).collect();
    let params = FlashParams { size: 30, budget: 20, n_projections: 10, seed: 1 };

    let mut oracle = MeasurementOracle::table(ds);
    let run = flash_single(ds, &pool, &mut oracle, &params, 0, &CartParams::default())?;
    let best = run.best().expect("single-objective run");

    println!("{} configurations, {} measured", ds.len(), run.measurements_used);
    println!("initial {} + acquired {}", run.count(Phase::Initial), run.count(Phase::Acquisition));
    println!("best row {best}: latency {}", ds.objective_values(best)[0]);
    println!("true optimum: latency {}", ds.objective_values(synth.optimum[0])[0]);
    println!("rank difference {}", rank_difference(best, ds, 0)?);
    Ok(())
}
