//! Writes a small measured system to disk, loads it back and splits it 40/20/40.

use flashtune::{load_dataset, split, SplitSpec};

const MANIFEST: &str = r#"
name = "toy-db"

[[option]]
name = "cache"
kind = "boolean"

[[option]]
name = "threads"
kind = "integer"
min = 1
max = 4

[[objective]]
name = "latency_ms"
direction = "minimize"
"#;

fn main() -> anyhow::Result<()> {
    let dir = tempfile::tempdir()?;
    let manifest = dir.path().join("toy-db.toml");
    let data = dir.path().join("toy-db.csv");
    std::fs::write(&manifest, MANIFEST)?;

    let mut csv = String::from("cache,threads,latency_ms\n");
    for cache in 0..2 {
        for threads in 1..=4 {
            let latency = 80.0 / threads as f64 - 15.0 * cache as f64 + 20.0;
            csv.push_str(&format!("{cache},{threads},{latency:.1}\n"));
        }
    }
    std::fs::write(&data, csv)?;

    let ds = load_dataset(&manifest, &data)?;
    println!("{} rows, {} options, objective {}", ds.len(), ds.options().len(), ds.objectives()[0].name);

    let parts = split(&ds, &SplitSpec::standard(7))?;
    println!("train {:?}", parts.train);
    println!("holdout {:?}", parts.holdout);
    println!("validation {:?}", parts.validation);
    Ok(())
}
