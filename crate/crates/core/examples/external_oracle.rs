//! Measures configurations by running a shell command instead of reading a table.
//!
//! The dataset only lists the candidate configurations; its objective column is
//! never consulted because every measurement comes from the command.

use std::time::Duration;

use flashtune::flash::flash_single;
use flashtune::{
    CartParams, Configuration, Dataset, Direction, ExternalCommand, FlashParams, MeasurementOracle, ObjectiveSchema,
    OptionSchema,
};

fn main() -> anyhow::Result<()> {
    let options = vec![OptionSchema::integer("jobs", 1, 8), OptionSchema::integer("batch", 1, 8)];
    let rows = (1..=8)
        .flat_map(|j| (1..=8).map(move |b| (Configuration(vec![f64::from(j), f64::from(b)]), vec![0.0])))
        .collect();
    let ds = Dataset::new(options, vec![ObjectiveSchema::new("seconds", Direction::Minimize)], rows)?;

    // a stand-in benchmark: cost is lowest at jobs = 6, batch = 3
    let command = ExternalCommand {
        template: "echo $(( ({jobs} - 6) * ({jobs} - 6) + 2 * ({batch} - 3) * ({batch} - 3) + 10 ))".into(),
        timeout: Duration::from_secs(5),
        option_names: ds.options().iter().map(|o| o.name.clone()).collect(),
        n_objectives: 1,
    };
    let mut oracle = MeasurementOracle::external(command);
    let pool: Vec<usize> = (0..ds.len()).collect();
    let params = FlashParams { size: 10, budget: 15, n_projections: 10, seed: 4 };
    let run = flash_single(&ds, &pool, &mut oracle, &params, 0, &CartParams::default())?;

    let best = run.best().expect("single objective");
    let measured = run.evaluated.iter().find(|e| e.id == best).expect("best was measured");
    println!("ran the benchmark {} times", oracle.count());
    println!("best {:?} -> {} s", ds.config(best).values(), measured.objectives[0]);
    Ok(())
}
