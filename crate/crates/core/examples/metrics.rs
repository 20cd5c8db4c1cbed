//! The quality measures on small hand-made inputs.

use flashtune::metrics::{dominates, gd, igd, mmre, mu_rd, pareto_front, FrontComparison};
use flashtune::Direction;

fn main() -> anyhow::Result<()> {
    println!("mmre  {}", mmre(&[90.0, 240.0], &[100.0, 200.0])?);
    println!("mu_rd {}", mu_rd(&[4.0, 3.0, 2.0, 1.0], &[1.0, 2.0, 3.0, 4.0])?);

    let dirs = [Direction::Minimize, Direction::Maximize];
    println!("(1, 5) dominates (2, 4): {}", dominates(&[1.0, 5.0], &[2.0, 4.0], &dirs));

    let points = vec![vec![1.0, 2.0], vec![2.0, 5.0], vec![3.0, 4.0], vec![0.5, 1.0]];
    let front = pareto_front(&points, &dirs);
    println!("front indices {front:?}");

    let truth: Vec<Vec<f64>> = front.iter().map(|&i| points[i].clone()).collect();
    let approx = vec![vec![1.0, 2.0], vec![2.5, 4.5]];
    let cmp = FrontComparison::new(truth, approx)?;
    println!("gd {:.4}  igd {:.4}", gd(&cmp)?, igd(&cmp)?);
    Ok(())
}
