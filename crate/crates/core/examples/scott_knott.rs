//! Ranks four methods by their rank differences over 20 repeats.

use flashtune::stats::{scott_knott, SkParams, Treatment};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> anyhow::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut sample = |center: f64, spread: f64| -> Vec<f64> {
        (0..20).map(|_| (center + rng.gen_range(-spread..spread)).max(0.0).round()).collect()
    };
    let treatments = vec![
        Treatment::new("flash", sample(1.0, 2.0))?,
        Treatment::new("flash-small", sample(1.5, 2.0))?,
        Treatment::new("random", sample(12.0, 6.0))?,
        Treatment::new("progressive", sample(40.0, 20.0))?,
    ];
    println!("{:<12} {:>4} {:>7} {:>6}", "method", "rank", "median", "iqr");
    for r in scott_knott(&treatments, &SkParams::default())? {
        println!("{:<12} {:>4} {:>7} {:>6}", r.label, r.rank, r.median, r.iqr);
    }
    Ok(())
}
