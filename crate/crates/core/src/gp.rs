//! Exact Gaussian-process regression with a squared-exponential kernel.
//!
//! Targets are standardized internally, so the prior mean is the training mean
//! and `signal_variance` is relative to the target variance. The Cholesky factor
//! can be extended one point at a time, which keeps ePAL's refits at `O(M^2)`.

use crate::error::{Error, Result};
use crate::space::Dataset;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernel {
    pub length_scale: f64,
    pub signal_variance: f64,
    pub noise_variance: f64,
}

impl Default for Kernel {
    fn default() -> Self {
        Self { length_scale: 0.2, signal_variance: 1.0, noise_variance: 1e-6 }
    }
}

impl Kernel {
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
        self.signal_variance * (-0.5 * d2 / (self.length_scale * self.length_scale)).exp()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length_scale > 0.0 && self.signal_variance > 0.0 && self.noise_variance >= 0.0) {
            return Err(Error::InvalidParams(format!("invalid kernel {self:?}")));
        }
        Ok(())
    }

    /// Picks the length scale from `grid` with the highest log marginal likelihood.
    pub fn refine_length_scale(&self, inputs: &[Vec<f64>], targets: &[f64], grid: &[f64]) -> Result<Kernel> {
        let mut best: Option<(f64, Kernel)> = None;
        for &length_scale in grid {
            let kernel = Kernel { length_scale, ..*self };
            let Ok(gp) = GaussianProcess::fit(inputs, targets, kernel) else { continue };
            let lml = gp.log_marginal_likelihood();
            if best.is_none_or(|(b, _)| lml > b) {
                best = Some((lml, kernel));
            }
        }
        best.map(|(_, k)| k).ok_or(Error::NotPositiveDefinite { jitter: f64::NAN })
    }
}

/// Maps option values to `[0, 1]` using the dataset's declared bounds.
#[derive(Debug, Clone)]
pub struct InputScaler {
    bounds: Vec<(f64, f64)>,
}

impl InputScaler {
    pub fn for_dataset(dataset: &Dataset) -> Self {
        Self { bounds: dataset.options().iter().map(|o| o.kind.bounds()).collect() }
    }

    pub fn scale(&self, values: &[f64]) -> Vec<f64> {
        values.iter().zip(&self.bounds).map(|(v, (lo, hi))| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 }).collect()
    }
}

const MAX_JITTER_STEPS: usize = 8;

#[derive(Debug, Clone)]
pub struct GaussianProcess {
    kernel: Kernel,
    inputs: Vec<Vec<f64>>,
    targets: Vec<f64>,
    /// Lower-triangular Cholesky factor of `K + (noise + jitter) I`, row by row.
    chol: Vec<Vec<f64>>,
    jitter: f64,
    mean: f64,
    scale: f64,
    /// `(K + noise I)^-1` times the standardized targets.
    alpha: Vec<f64>,
    /// Bumped whenever the factor is rebuilt from scratch.
    generation: u64,
}

impl GaussianProcess {
    /// Fits the exact posterior. Jitter is added to the diagonal in growing steps if
    /// the kernel matrix is numerically singular.
    pub fn fit(inputs: &[Vec<f64>], targets: &[f64], kernel: Kernel) -> Result<Self> {
        kernel.validate()?;
        if inputs.is_empty() {
            return Err(Error::Fit("a Gaussian process needs at least one row".into()));
        }
        if inputs.len() != targets.len() {
            return Err(Error::Fit(format!("{} inputs but {} targets", inputs.len(), targets.len())));
        }
        let d = inputs[0].len();
        if let Some(bad) = inputs.iter().find(|x| x.len() != d) {
            return Err(Error::Dimension { expected: d, got: bad.len() });
        }
        if targets.iter().any(|t| !t.is_finite()) {
            return Err(Error::Fit("targets must be finite".into()));
        }
        let mut gp = Self {
            kernel,
            inputs: inputs.to_vec(),
            targets: targets.to_vec(),
            chol: Vec::new(),
            jitter: 0.0,
            mean: 0.0,
            scale: 1.0,
            alpha: Vec::new(),
            generation: 0,
        };
        gp.factorize()?;
        gp.update_alpha();
        Ok(gp)
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    /// Jitter currently added to the diagonal.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    fn factorize(&mut self) -> Result<()> {
        let mut jitter = 0.0;
        for step in 0..=MAX_JITTER_STEPS {
            if let Some(l) = cholesky(&self.inputs, &self.kernel, jitter) {
                self.chol = l;
                self.jitter = jitter;
                self.generation += 1;
                return Ok(());
            }
            jitter = self.kernel.signal_variance * 1e-10 * 10f64.powi(step as i32);
        }
        Err(Error::NotPositiveDefinite { jitter })
    }

    fn update_alpha(&mut self) {
        let n = self.targets.len() as f64;
        self.mean = self.targets.iter().sum::<f64>() / n;
        let var = self.targets.iter().map(|t| (t - self.mean).powi(2)).sum::<f64>() / n;
        self.scale = if var > 0.0 { var.sqrt() } else { 1.0 };
        let z: Vec<f64> = self.targets.iter().map(|t| (t - self.mean) / self.scale).collect();
        let w = forward(&self.chol, &z);
        self.alpha = backward(&self.chol, &w);
    }

    /// Adds one training point, extending the factor in place.
    pub fn push(&mut self, x: Vec<f64>, y: f64) -> Result<()> {
        if x.len() != self.inputs[0].len() {
            return Err(Error::Dimension { expected: self.inputs[0].len(), got: x.len() });
        }
        if !y.is_finite() {
            return Err(Error::Fit("targets must be finite".into()));
        }
        let k: Vec<f64> = self.inputs.iter().map(|xi| self.kernel.eval(xi, &x)).collect();
        let row = forward(&self.chol, &k);
        let diag2 = self.kernel.eval(&x, &x) + self.kernel.noise_variance + self.jitter
            - row.iter().map(|r| r * r).sum::<f64>();
        self.inputs.push(x);
        self.targets.push(y);
        if diag2 > f64::EPSILON * self.kernel.signal_variance {
            let mut row = row;
            row.push(diag2.sqrt());
            self.chol.push(row);
        } else {
            self.factorize()?;
        }
        self.update_alpha();
        Ok(())
    }

    /// Posterior mean and standard deviation of the latent function at `x`.
    pub fn predict(&self, x: &[f64]) -> (f64, f64) {
        let k: Vec<f64> = self.inputs.iter().map(|xi| self.kernel.eval(xi, x)).collect();
        let v = forward(&self.chol, &k);
        self.predict_from(&k, &v, x)
    }

    fn predict_from(&self, k: &[f64], v: &[f64], x: &[f64]) -> (f64, f64) {
        let mu = self.mean + self.scale * k.iter().zip(&self.alpha).map(|(a, b)| a * b).sum::<f64>();
        let var = self.kernel.eval(x, x) - v.iter().map(|a| a * a).sum::<f64>();
        (mu, self.scale * var.max(0.0).sqrt())
    }

    /// Log marginal likelihood of the standardized targets.
    pub fn log_marginal_likelihood(&self) -> f64 {
        let z: Vec<f64> = self.targets.iter().map(|t| (t - self.mean) / self.scale).collect();
        let fit: f64 = z.iter().zip(&self.alpha).map(|(a, b)| a * b).sum();
        let log_det: f64 = self.chol.iter().enumerate().map(|(i, row)| row[i].ln()).sum();
        -0.5 * fit - log_det - 0.5 * z.len() as f64 * (2.0 * std::f64::consts::PI).ln()
    }
}

/// Cached kernel columns for a fixed set of query points, extended as the
/// process grows.
#[derive(Debug, Clone)]
pub struct PredictionCache {
    points: Vec<Vec<f64>>,
    k: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    generation: u64,
}

impl PredictionCache {
    pub fn new(points: Vec<Vec<f64>>) -> Self {
        let n = points.len();
        Self { points, k: vec![Vec::new(); n], v: vec![Vec::new(); n], generation: 0 }
    }

    /// Brings the cached columns for the listed points up to date with `gp`.
    pub fn sync(&mut self, gp: &GaussianProcess, active: &[usize]) {
        let rebuild = self.generation != gp.generation;
        self.generation = gp.generation;
        let m = gp.len();
        for &i in active {
            if rebuild || self.k[i].len() > m {
                self.k[i].clear();
                self.v[i].clear();
            }
            let p = &self.points[i];
            for j in self.k[i].len()..m {
                let kij = gp.kernel.eval(&gp.inputs[j], p);
                let row = &gp.chol[j];
                let dot: f64 = row[..j].iter().zip(&self.v[i]).map(|(a, b)| a * b).sum();
                self.k[i].push(kij);
                self.v[i].push((kij - dot) / row[j]);
            }
        }
    }

    /// Prediction for point `i`; [`sync`](Self::sync) must have covered it.
    pub fn predict(&self, gp: &GaussianProcess, i: usize) -> (f64, f64) {
        debug_assert_eq!(self.k[i].len(), gp.len());
        gp.predict_from(&self.k[i], &self.v[i], &self.points[i])
    }
}

fn cholesky(inputs: &[Vec<f64>], kernel: &Kernel, jitter: f64) -> Option<Vec<Vec<f64>>> {
    let n = inputs.len();
    let mut l: Vec<Vec<f64>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = vec![0.0; i + 1];
        for j in 0..=i {
            let mut s = kernel.eval(&inputs[i], &inputs[j]);
            if i == j {
                s += kernel.noise_variance + jitter;
            }
            let other = if j < i { &l[j][..j] } else { &row[..j] };
            s -= row[..j].iter().zip(other).map(|(a, b)| a * b).sum::<f64>();
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return None;
                }
                row[j] = s.sqrt();
            } else {
                row[j] = s / l[j][j];
            }
        }
        l.push(row);
    }
    Some(l)
}

/// Solves `L w = b`.
fn forward(l: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let mut w = Vec::with_capacity(b.len());
    for (i, row) in l.iter().enumerate() {
        let s: f64 = row[..i].iter().zip(&w).map(|(a, c)| a * c).sum();
        w.push((b[i] - s) / row[i]);
    }
    w
}

/// Solves `L^T x = w`.
fn backward(l: &[Vec<f64>], w: &[f64]) -> Vec<f64> {
    let n = w.len();
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = ((i + 1)..n).map(|k| l[k][i] * x[k]).sum();
        x[i] = (w[i] - s) / l[i][i];
    }
    x
}
