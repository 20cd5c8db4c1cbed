//! Fits a regression tree to a handful of measurements and prints it.

use flashtune::{CartParams, RegressionTree};

fn main() -> anyhow::Result<()> {
    // (compression, buffer_kb) -> throughput
    let xs = vec![
        vec![0.0, 64.0],
        vec![0.0, 128.0],
        vec![0.0, 256.0],
        vec![1.0, 64.0],
        vec![1.0, 128.0],
        vec![1.0, 256.0],
        vec![0.0, 512.0],
        vec![1.0, 512.0],
    ];
    let ys = [410.0, 455.0, 470.0, 300.0, 330.0, 338.0, 472.0, 341.0];

    let tree = RegressionTree::fit(&xs, &ys, &CartParams::default())?;
    let names = ["compression".to_string(), "buffer_kb".to_string()];
    print!("{}", tree.dump(Some(&names)));
    println!("depth {}, {} leaves", tree.depth(), tree.leaf_count());

    for query in [[0.0, 200.0], [1.0, 1024.0]] {
        println!("predict {query:?} -> {}", tree.predict(&query)?);
    }
    Ok(())
}
