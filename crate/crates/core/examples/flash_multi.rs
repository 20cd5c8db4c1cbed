//! Multi-objective FLASH (Bazza acquisition) against the brute-force front.

use flashtune::flash::flash_multi;
use flashtune::metrics::{gd, igd, FrontComparison};
use flashtune::{
    CartParams, Configuration, Dataset, Direction, FlashParams, MeasurementOracle, ObjectiveSchema, OptionSchema,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Compression level trades encoding time against output size.
fn encoder_space() -> anyhow::Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut rows = Vec::new();
    for level in 0..10 {
        for window in 0..8 {
            for threads in 1..=4 {
                let l = f64::from(level);
                let time = (5.0 + l * l) * (1.0 + 0.1 * f64::from(window)) / f64::from(threads).sqrt();
                let size = 100.0 - 6.0 * l - 2.0 * f64::from(window) + rng.gen_range(0.0..3.0);
                rows.push((Configuration(vec![l, f64::from(window), f64::from(threads)]), vec![time, size]));
            }
        }
    }
    let options = vec![
        OptionSchema::integer("level", 0, 9),
        OptionSchema::integer("window", 0, 7),
        OptionSchema::integer("threads", 1, 4),
    ];
    let objectives =
        vec![ObjectiveSchema::new("time", Direction::Minimize), ObjectiveSchema::new("size", Direction::Minimize)];
    Ok(Dataset::new(options, objectives, rows)?)
}

fn main() -> anyhow::Result<()> {
    let ds = encoder_space()?;
    let pool: Vec<usize> = (0..ds.len()).collect();
    let params = FlashParams { size: 30, budget: 50, n_projections: 10, seed: 9 };
    let run = flash_multi(&ds, &pool, &mut MeasurementOracle::table(&ds), &params, &CartParams::default())?;
    let front = run.front().expect("multi-objective run");

    let points = |ids: &[usize]| ids.iter().map(|&i| ds.objective_values(i).to_vec()).collect::<Vec<_>>();
    let all = points(&pool);
    let truth = flashtune::metrics::pareto_front(&all, &ds.directions());
    let cmp = FrontComparison::new(points(&truth), points(front))?;

    println!("{} measurements, {} points on the returned front", run.measurements_used, front.len());
    for &id in front {
        println!("  {:?} -> {:?}", ds.config(id).values(), ds.objective_values(id));
    }
    println!("true front has {} points; gd {:.4}, igd {:.4}", truth.len(), gd(&cmp)?, igd(&cmp)?);
    Ok(())
}
