//! ePAL with two slack values: a looser epsilon discards more and measures less.

use flashtune::baselines::{epal, EpalParams};
use flashtune::synth::{generate_synthetic, SyntheticKind};
use flashtune::MeasurementOracle;

fn main() -> anyhow::Result<()> {
    let ds = generate_synthetic(SyntheticKind::BiObjectiveTradeoff, 8, 0)?.dataset;
    let pool: Vec<usize> = (0..ds.len()).collect();
    for epsilon in [0.01, 0.1, 0.3] {
        let params = EpalParams { epsilon, seed: 3, ..EpalParams::default() };
        let run = epal(&ds, &pool, &mut MeasurementOracle::table(&ds), &params)?;
        println!(
            "epsilon {epsilon:<4}  measurements {:3} of {}  front {:3}  stop {}",
            run.measurements_used,
            ds.len(),
            run.front().map_or(0, <[usize]>::len),
            run.stop
        );
    }
    Ok(())
}
