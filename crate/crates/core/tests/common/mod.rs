//! Straight-line reference implementations used as test oracles.
#![allow(dead_code, clippy::needless_range_loop)]

pub mod cli;

use flashtune::{Configuration, Dataset, Direction, ObjectiveSchema, OptionSchema};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `a` is no worse than `b` everywhere and better somewhere.
pub fn beats(a: &[f64], b: &[f64], dirs: &[Direction]) -> bool {
    let mut strictly = false;
    for ((x, y), d) in a.iter().zip(b).zip(dirs) {
        let (x, y) = match d {
            Direction::Minimize => (-x, -y),
            Direction::Maximize => (*x, *y),
        };
        if x < y {
            return false;
        }
        if x > y {
            strictly = true;
        }
    }
    strictly
}

/// Indices nobody beats, ascending.
pub fn brute_front(points: &[Vec<f64>], dirs: &[Direction]) -> Vec<usize> {
    (0..points.len()).filter(|&i| !(0..points.len()).any(|j| j != i && beats(&points[j], &points[i], dirs))).collect()
}

fn sse(ys: &[f64]) -> f64 {
    if ys.is_empty() {
        return 0.0;
    }
    let m = ys.iter().sum::<f64>() / ys.len() as f64;
    ys.iter().map(|y| (y - m) * (y - m)).sum()
}

/// Every `(option, threshold, children SSE)` a root split could use.
pub fn all_root_splits(xs: &[Vec<f64>], ys: &[f64], min_leaf: usize) -> Vec<(usize, f64, f64)> {
    let mut out = Vec::new();
    for j in 0..xs[0].len() {
        let mut values: Vec<f64> = xs.iter().map(|x| x[j]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for w in values.windows(2) {
            let t = 0.5 * (w[0] + w[1]);
            let left: Vec<f64> = xs.iter().zip(ys).filter(|(x, _)| x[j] <= t).map(|(_, y)| *y).collect();
            let right: Vec<f64> = xs.iter().zip(ys).filter(|(x, _)| x[j] > t).map(|(_, y)| *y).collect();
            if left.len() >= min_leaf && right.len() >= min_leaf {
                out.push((j, t, sse(&left) + sse(&right)));
            }
        }
    }
    out
}

pub fn total_sse(ys: &[f64]) -> f64 {
    sse(ys)
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

/// Textbook GP posterior on targets standardized by their mean and population
/// standard deviation.
pub fn naive_gp(inputs: &[Vec<f64>], targets: &[f64], ell: f64, sf2: f64, sn2: f64, x: &[f64]) -> (f64, f64) {
    let k = |a: &[f64], b: &[f64]| {
        let d2: f64 = a.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum();
        sf2 * (-d2 / (2.0 * ell * ell)).exp()
    };
    let n = inputs.len();
    let mean = targets.iter().sum::<f64>() / n as f64;
    let var = targets.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / n as f64;
    let s = if var > 0.0 { var.sqrt() } else { 1.0 };
    let z: Vec<f64> = targets.iter().map(|t| (t - mean) / s).collect();
    let a: Vec<Vec<f64>> =
        (0..n).map(|i| (0..n).map(|j| k(&inputs[i], &inputs[j]) + if i == j { sn2 } else { 0.0 }).collect()).collect();
    let ks: Vec<f64> = inputs.iter().map(|xi| k(xi, x)).collect();
    let alpha = solve(a.clone(), z);
    let v = solve(a, ks.clone());
    let mu = mean + s * ks.iter().zip(&alpha).map(|(p, q)| p * q).sum::<f64>();
    let var = k(x, x) - ks.iter().zip(&v).map(|(p, q)| p * q).sum::<f64>();
    (mu, s * var.max(0.0).sqrt())
}

/// The Bazza rule written out: weights `V[n][j]` drawn row by row from a ChaCha8
/// stream seeded with `seed`, objectives mapped to larger-is-better and min-max
/// scaled over the candidates, score `(1/N) Σ_n Σ_j V[n][j] g[i][j]`, first
/// maximum wins.
pub fn bazza_oracle(pred: &[Vec<f64>], n: usize, dirs: &[Direction], seed: u64) -> usize {
    let m = dirs.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = vec![vec![0.0; m]; n];
    for row in v.iter_mut() {
        for w in row.iter_mut() {
            *w = rng.gen::<f64>();
        }
    }
    let mapped: Vec<Vec<f64>> = pred
        .iter()
        .map(|p| p.iter().zip(dirs).map(|(x, d)| if *d == Direction::Minimize { -x } else { *x }).collect())
        .collect();
    let mut g = mapped.clone();
    for j in 0..m {
        let lo = mapped.iter().map(|p| p[j]).fold(f64::INFINITY, f64::min);
        let hi = mapped.iter().map(|p| p[j]).fold(f64::NEG_INFINITY, f64::max);
        for i in 0..pred.len() {
            g[i][j] = if hi > lo { (mapped[i][j] - lo) / (hi - lo) } else { 0.0 };
        }
    }
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for i in 0..pred.len() {
        let mut total = 0.0;
        for row in &v {
            for j in 0..m {
                total += row[j] * g[i][j];
            }
        }
        let score = total / n as f64;
        if score > best_score {
            best_score = score;
            best = i;
        }
    }
    best
}

/// A dataset over `options` integer options in `[0, 4]`, with random objective values.
pub fn random_dataset(rows: usize, options: usize, objectives: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let schema: Vec<OptionSchema> = (0..options).map(|j| OptionSchema::integer(format!("o{j}"), 0, 4)).collect();
    let objs: Vec<ObjectiveSchema> = (0..objectives)
        .map(|k| {
            let d = if k % 2 == 0 { Direction::Minimize } else { Direction::Maximize };
            ObjectiveSchema::new(format!("y{k}"), d)
        })
        .collect();
    let rows = rows.min(5usize.saturating_pow(options as u32));
    let mut seen = std::collections::HashSet::new();
    let mut data = Vec::new();
    while data.len() < rows {
        let x: Vec<i64> = (0..options).map(|_| rng.gen_range(0..=4)).collect();
        if seen.insert(x.clone()) {
            let y: Vec<f64> = (0..objectives).map(|_| f64::from(rng.gen_range(1..1000u32))).collect();
            data.push((Configuration(x.into_iter().map(|v| v as f64).collect()), y));
        }
    }
    Dataset::new(schema, objs, data).unwrap()
}
