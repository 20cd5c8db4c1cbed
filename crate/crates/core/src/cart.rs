//! CART regression trees, the surrogate model behind FLASH.
//!
//! Splits maximize the decrease of the sum of squared errors. Candidate
//! thresholds are midpoints between consecutive distinct option values inside a
//! node. Among splits with equal gain the lowest option index wins, then the
//! lowest threshold. Left children hold rows with `value <= threshold`.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Stopping rules for tree growth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CartParams {
    /// Nodes with fewer rows are not split.
    pub min_samples_split: usize,
    /// Minimum number of rows in each child of a split.
    pub min_samples_leaf: usize,
    /// `None` grows without a depth limit.
    pub max_depth: Option<usize>,
}

impl Default for CartParams {
    fn default() -> Self {
        Self { min_samples_split: 4, min_samples_leaf: 2, max_depth: None }
    }
}

impl CartParams {
    pub fn validate(&self) -> Result<()> {
        if self.min_samples_leaf < 1 {
            return Err(Error::InvalidParams("min_samples_leaf must be at least 1".into()));
        }
        if self.min_samples_split < 2 || self.min_samples_split < 2 * self.min_samples_leaf {
            return Err(Error::InvalidParams(format!(
                "min_samples_split ({}) must be at least 2 and at least 2 * min_samples_leaf ({})",
                self.min_samples_split, self.min_samples_leaf
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Leaf { prediction: f64, count: usize },
    Split { option: usize, threshold: f64, left: Box<TreeNode>, right: Box<TreeNode> },
}

impl TreeNode {
    fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    fn leaves(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => left.leaves() + right.leaves(),
        }
    }
}

/// A fitted regression tree.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionTree {
    root: TreeNode,
    n_options: usize,
}

/// Best split found for one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitChoice {
    pub option: usize,
    pub threshold: f64,
    /// Decrease of the sum of squared errors.
    pub gain: f64,
}

impl RegressionTree {
    /// Grows a tree on `xs` (one option-value vector per row) and `ys`.
    pub fn fit<X: AsRef<[f64]>>(xs: &[X], ys: &[f64], params: &CartParams) -> Result<Self> {
        params.validate()?;
        if xs.is_empty() {
            return Err(Error::Fit("no training rows".into()));
        }
        if xs.len() != ys.len() {
            return Err(Error::Fit(format!("{} rows but {} targets", xs.len(), ys.len())));
        }
        if ys.iter().any(|y| !y.is_finite()) {
            return Err(Error::Fit("targets must be finite".into()));
        }
        let n_options = xs[0].as_ref().len();
        if let Some(bad) = xs.iter().find(|x| x.as_ref().len() != n_options) {
            return Err(Error::Dimension { expected: n_options, got: bad.as_ref().len() });
        }
        let rows: Vec<&[f64]> = xs.iter().map(|x| x.as_ref()).collect();
        let mut idx: Vec<usize> = (0..rows.len()).collect();
        let coded = Coded::new(&rows, &idx);
        let root = grow(&coded, ys, &mut idx, &mut Work::default(), params, 0);
        Ok(Self { root, n_options })
    }

    pub fn root(&self) -> &TreeNode {
        &self.root
    }

    pub fn n_options(&self) -> usize {
        self.n_options
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    pub fn leaf_count(&self) -> usize {
        self.root.leaves()
    }

    pub fn predict(&self, config: &[f64]) -> Result<f64> {
        if config.len() != self.n_options {
            return Err(Error::Dimension { expected: self.n_options, got: config.len() });
        }
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf { prediction, .. } => return Ok(*prediction),
                TreeNode::Split { option, threshold, left, right } => {
                    node = if config[*option] <= *threshold { left } else { right };
                }
            }
        }
    }

    pub fn predict_batch<X: AsRef<[f64]>>(&self, configs: &[X]) -> Result<Vec<f64>> {
        configs.iter().map(|c| self.predict(c.as_ref())).collect()
    }

    /// Indented text rendering, one node per line, left child before right.
    ///
    /// ```text
    /// split a <= 0.5
    ///   leaf 1 n=3
    ///   leaf 9 n=3
    /// ```
    ///
    /// Options print as `x<index>` when `names` is `None`.
    pub fn dump(&self, names: Option<&[String]>) -> String {
        let mut out = String::new();
        dump_node(&self.root, names, 0, &mut out);
        out
    }
}

fn dump_node(node: &TreeNode, names: Option<&[String]>, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    match node {
        TreeNode::Leaf { prediction, count } => {
            let _ = writeln!(out, "{pad}leaf {prediction} n={count}");
        }
        TreeNode::Split { option, threshold, left, right } => {
            let name = names.and_then(|n| n.get(*option)).cloned().unwrap_or_else(|| format!("x{option}"));
            let _ = writeln!(out, "{pad}split {name} <= {threshold}");
            dump_node(left, names, depth + 1, out);
            dump_node(right, names, depth + 1, out);
        }
    }
}

fn leaf(ys: &[f64], idx: &[usize]) -> TreeNode {
    let sum: f64 = idx.iter().map(|&i| ys[i]).sum();
    TreeNode::Leaf { prediction: sum / idx.len() as f64, count: idx.len() }
}

fn grow(coded: &Coded, ys: &[f64], idx: &mut [usize], work: &mut Work, params: &CartParams, depth: usize) -> TreeNode {
    let n = idx.len();
    if n < params.min_samples_split || params.max_depth.is_some_and(|d| depth >= d) {
        return leaf(ys, idx);
    }
    let first = ys[idx[0]];
    if idx.iter().all(|&i| ys[i] == first) {
        return leaf(ys, idx);
    }
    let Some((choice, cut)) = coded.best_split(ys, idx, params.min_samples_leaf, work) else {
        return leaf(ys, idx);
    };
    // stable partition: left rows compact in place, right rows wait in scratch
    let right = &mut work.right;
    right.clear();
    let mut nl = 0;
    for k in 0..n {
        let i = idx[k];
        if coded.code(i, choice.option) <= cut {
            idx[nl] = i;
            nl += 1;
        } else {
            right.push(i);
        }
    }
    idx[nl..].copy_from_slice(right);
    debug_assert!(nl >= params.min_samples_leaf);
    let (left, right) = idx.split_at_mut(nl);
    let left_node = grow(coded, ys, left, work, params, depth + 1);
    let right_node = grow(coded, ys, right, work, params, depth + 1);
    TreeNode::Split {
        option: choice.option,
        threshold: choice.threshold,
        left: Box::new(left_node),
        right: Box::new(right_node),
    }
}

/// Buffers reused by every node of one fit.
#[derive(Default)]
struct Work {
    right: Vec<usize>,
    sums: Vec<f64>,
    counts: Vec<usize>,
}

/// Option values replaced by their position among the distinct values of that
/// option, so a node can bucket its rows instead of sorting them.
struct Coded {
    n_options: usize,
    /// Row-major codes, indexed by row id.
    codes: Vec<u32>,
    /// Distinct values per option, ascending.
    levels: Vec<Vec<f64>>,
    /// Where each option's levels start in the flat bucket arrays.
    offsets: Vec<usize>,
}

impl Coded {
    fn new(rows: &[&[f64]], idx: &[usize]) -> Self {
        let n_options = idx.first().map_or(0, |&i| rows[i].len());
        let (columns, levels): (Vec<Vec<u32>>, Vec<Vec<f64>>) =
            (0..n_options).map(|option| code_option(rows, idx, option)).unzip();
        let mut codes = vec![0u32; rows.len() * n_options];
        for &i in idx {
            for (j, column) in columns.iter().enumerate() {
                codes[i * n_options + j] = column[i];
            }
        }
        let mut offsets = Vec::with_capacity(n_options + 1);
        offsets.push(0);
        for l in &levels {
            offsets.push(offsets.last().unwrap() + l.len());
        }
        Self { n_options, codes, levels, offsets }
    }

    fn code(&self, row: usize, option: usize) -> u32 {
        self.codes[row * self.n_options + option]
    }

    /// The best split and the largest code sent left.
    fn best_split(&self, ys: &[f64], idx: &[usize], min_leaf: usize, work: &mut Work) -> Option<(SplitChoice, u32)> {
        let n = idx.len();
        if n < 2 {
            return None;
        }
        let mean = idx.iter().map(|&i| ys[i]).sum::<f64>() / n as f64;
        let width = *self.offsets.last().unwrap();
        let (sums, counts) = (&mut work.sums, &mut work.counts);
        sums.clear();
        sums.resize(width, 0.0);
        counts.clear();
        counts.resize(width, 0);
        let (mut sse, mut total) = (0.0, 0.0);
        // one pass fills the level buckets of every option
        for &i in idx {
            let y = ys[i] - mean;
            sse += y * y;
            total += y;
            let row = &self.codes[i * self.n_options..(i + 1) * self.n_options];
            for (c, off) in row.iter().zip(&self.offsets) {
                let slot = off + *c as usize;
                sums[slot] += y;
                counts[slot] += 1;
            }
        }
        let tol = 1e-12 * f64::max(sse, f64::MIN_POSITIVE);

        let mut best: Option<(SplitChoice, u32)> = None;
        for (option, levels) in self.levels.iter().enumerate() {
            let off = self.offsets[option];
            let mut left_sum = 0.0;
            let mut pos = 0;
            let mut prev: Option<usize> = None;
            for c in 0..levels.len() {
                if counts[off + c] == 0 {
                    continue;
                }
                if let Some(p) = prev {
                    // boundary between the occupied levels p and c
                    if pos >= min_leaf && n - pos >= min_leaf {
                        let right_sum = total - left_sum;
                        // SSE(parent) - SSE(left) - SSE(right) on centered targets
                        let gain = left_sum * left_sum / pos as f64 + right_sum * right_sum / (n - pos) as f64;
                        if gain > tol && best.is_none_or(|(b, _)| gain > b.gain + tol) {
                            let threshold = 0.5 * (levels[p] + levels[c]);
                            best = Some((SplitChoice { option, threshold, gain }, p as u32));
                        }
                    }
                }
                left_sum += sums[off + c];
                pos += counts[off + c];
                prev = Some(c);
            }
        }
        best
    }
}

/// Codes of one option by row id, and its distinct values in ascending order.
fn code_option(rows: &[&[f64]], idx: &[usize], option: usize) -> (Vec<u32>, Vec<f64>) {
    // configuration options rarely take many values, so a linear scan over the
    // values seen so far beats sorting every row
    const FEW: usize = 32;
    let mut codes = vec![0u32; rows.len()];
    let mut seen: Vec<f64> = Vec::new();
    for &i in idx {
        let v = rows[i][option];
        let code = match seen.iter().position(|s| *s == v) {
            Some(c) => c,
            None if seen.len() < FEW => {
                seen.push(v);
                seen.len() - 1
            }
            None => return code_by_sorting(rows, idx, option),
        };
        codes[i] = code as u32;
    }
    let mut order: Vec<usize> = (0..seen.len()).collect();
    order.sort_by(|&a, &b| seen[a].total_cmp(&seen[b]));
    let mut rank = vec![0u32; seen.len()];
    for (r, &c) in order.iter().enumerate() {
        rank[c] = r as u32;
    }
    for &i in idx {
        codes[i] = rank[codes[i] as usize];
    }
    (codes, order.into_iter().map(|c| seen[c]).collect())
}

fn code_by_sorting(rows: &[&[f64]], idx: &[usize], option: usize) -> (Vec<u32>, Vec<f64>) {
    let mut values: Vec<f64> = idx.iter().map(|&i| rows[i][option]).collect();
    values.sort_unstable_by(f64::total_cmp);
    values.dedup();
    let mut codes = vec![0u32; rows.len()];
    for &i in idx {
        codes[i] = values.partition_point(|v| *v < rows[i][option]) as u32;
    }
    (codes, values)
}

/// Searches all options and midpoint thresholds for the largest SSE decrease.
///
/// Returns `None` when no admissible split decreases the SSE.
pub fn best_split(rows: &[&[f64]], ys: &[f64], idx: &[usize], min_leaf: usize) -> Option<SplitChoice> {
    if idx.is_empty() {
        return None;
    }
    Coded::new(rows, idx).best_split(ys, idx, min_leaf, &mut Work::default()).map(|(choice, _)| choice)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rows(v: &[Vec<f64>]) -> Vec<&[f64]> {
        v.iter().map(|r| r.as_slice()).collect()
    }

    #[test]
    fn constant_targets_give_single_leaf() {
        let xs = vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0], vec![4.0]];
        let tree = RegressionTree::fit(&xs, &[5.0; 5], &CartParams::default()).unwrap();
        assert_eq!(tree.root(), &TreeNode::Leaf { prediction: 5.0, count: 5 });
        assert_eq!(tree.predict(&[17.0]).unwrap(), 5.0);
    }

    #[test]
    fn separable_rows_split_once() {
        let xs = vec![vec![0.0, 1.0], vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![1.0, 0.0]];
        let ys = [1.0, 1.0, 1.0, 9.0, 9.0, 9.0];
        let tree = RegressionTree::fit(&xs, &ys, &CartParams::default()).unwrap();
        match tree.root() {
            TreeNode::Split { option, threshold, left, right } => {
                assert_eq!(*option, 0);
                assert_eq!(*threshold, 0.5);
                assert_eq!(**left, TreeNode::Leaf { prediction: 1.0, count: 3 });
                assert_eq!(**right, TreeNode::Leaf { prediction: 9.0, count: 3 });
            }
            other => panic!("expected a split, got {other:?}"),
        }
        assert_eq!(tree.predict(&[0.0, 1.0]).unwrap(), 1.0);
        assert_eq!(tree.predict(&[1.0, 1.0]).unwrap(), 9.0);
        assert_eq!(tree.dump(Some(&["a".into(), "b".into()])), "split a <= 0.5\n  leaf 1 n=3\n  leaf 9 n=3\n");
    }

    #[test]
    fn memorizes_with_unit_leaves() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut seen = std::collections::HashSet::new();
        let mut xs = Vec::new();
        while xs.len() < 64 {
            let x: Vec<f64> = (0..8).map(|_| rng.gen_range(0..2) as f64).collect();
            if seen.insert(x.iter().map(|v| *v as u8).collect::<Vec<_>>()) {
                xs.push(x);
            }
        }
        let ys: Vec<f64> = (0..64).map(|i| i as f64 * 1.5 + 0.25).collect();
        let params = CartParams { min_samples_split: 2, min_samples_leaf: 1, max_depth: None };
        let tree = RegressionTree::fit(&xs, &ys, &params).unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            assert_eq!(tree.predict(x).unwrap(), *y);
        }
    }

    #[test]
    fn leaf_minimum_and_depth_limit_respected() {
        let xs: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64]).collect();
        let ys: Vec<f64> = (0..20).map(|i| (i * i) as f64).collect();
        let params = CartParams { min_samples_split: 6, min_samples_leaf: 3, max_depth: Some(2) };
        let tree = RegressionTree::fit(&xs, &ys, &params).unwrap();
        assert!(tree.depth() <= 2);
        fn check(node: &TreeNode, min_leaf: usize) {
            match node {
                TreeNode::Leaf { count, .. } => assert!(*count >= min_leaf),
                TreeNode::Split { left, right, .. } => {
                    check(left, min_leaf);
                    check(right, min_leaf);
                }
            }
        }
        check(tree.root(), 3);
    }

    #[test]
    fn errors() {
        let empty: Vec<Vec<f64>> = vec![];
        assert!(matches!(RegressionTree::fit(&empty, &[], &CartParams::default()), Err(Error::Fit(_))));
        let xs = vec![vec![0.0], vec![1.0]];
        assert!(matches!(RegressionTree::fit(&xs, &[1.0, f64::NAN], &CartParams::default()), Err(Error::Fit(_))));
        let bad = CartParams { min_samples_split: 3, min_samples_leaf: 2, max_depth: None };
        assert!(matches!(RegressionTree::fit(&xs, &[1.0, 2.0], &bad), Err(Error::InvalidParams(_))));
        let tree = RegressionTree::fit(&xs, &[1.0, 2.0], &CartParams::default()).unwrap();
        assert!(matches!(tree.predict(&[0.0, 1.0]), Err(Error::Dimension { expected: 1, got: 2 })));
        assert_eq!(tree.predict_batch::<Vec<f64>>(&[]).unwrap(), Vec::<f64>::new());
    }

    #[test]
    fn tie_break_prefers_lowest_option() {
        // options 0 and 1 carry identical information
        let xs = vec![vec![0.0, 0.0], vec![0.0, 0.0], vec![1.0, 1.0], vec![1.0, 1.0]];
        let v = rows(&xs);
        let choice = best_split(&v, &[1.0, 1.0, 3.0, 3.0], &[0, 1, 2, 3], 1).unwrap();
        assert_eq!(choice.option, 0);
        assert!((choice.gain - 4.0).abs() < 1e-12);
    }
}
