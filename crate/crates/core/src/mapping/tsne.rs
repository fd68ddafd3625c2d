//! Exact t-SNE on a precomputed distance matrix.
//!
//! Input distances enter the Gaussian kernel as given:
//! p_{j|i} ∝ exp(−β_i · D_ij), with β_i found by bisection so the row's
//! perplexity matches the target. Everything is O(n²) per iteration.

use log::warn;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{dist2, Embedding, Point};
use crate::error::{Error, Result};
use crate::matrix::{MatrixKind, PairwiseMatrix};
use crate::par::Exec;

#[derive(Clone, Debug, PartialEq)]
pub struct TsneConfig {
    pub perplexity: f64,
    pub iterations: usize,
    pub early_exaggeration: f64,
    pub exaggeration_iterations: usize,
    pub initial_momentum: f64,
    pub final_momentum: f64,
    /// `None` picks n/12, floored at 50.
    pub learning_rate: Option<f64>,
    pub init_scale: f64,
    pub min_gain: f64,
    pub seed: u64,
}

impl Default for TsneConfig {
    fn default() -> Self {
        TsneConfig {
            perplexity: 30.0,
            iterations: 1000,
            early_exaggeration: 12.0,
            exaggeration_iterations: 250,
            initial_momentum: 0.5,
            final_momentum: 0.8,
            learning_rate: None,
            init_scale: 1e-4,
            min_gain: 0.01,
            seed: 0,
        }
    }
}

impl TsneConfig {
    pub fn learning_rate_for(&self, n: usize) -> f64 {
        self.learning_rate.unwrap_or((n as f64 / 12.0).max(50.0))
    }
}

const ENTROPY_TOL: f64 = 1e-12;
const MAX_BISECTIONS: usize = 500;

/// Entropy (nats) and normalized row for precision `beta`; `shifted` holds
/// D_ij − min_j D_ij for j ≠ i.
fn row_entropy(shifted: &[f64], beta: f64, out: &mut [f64]) -> f64 {
    let mut sum = 0.0;
    let mut weighted = 0.0;
    for (o, &d) in out.iter_mut().zip(shifted) {
        let e = (-beta * d).exp();
        *o = e;
        sum += e;
        weighted += d * e;
    }
    for o in out.iter_mut() {
        *o /= sum;
    }
    sum.ln() + beta * weighted / sum
}

/// One conditional row; the flag is set when ties at the nearest distance
/// make the target unreachable and the row falls back to its sharpest
/// achievable distribution (uniform over the tied nearest neighbors).
fn row_conditional(d: &[f64], i: usize, target: f64) -> (Vec<f64>, bool) {
    let n = d.len();
    let others: Vec<f64> = (0..n).filter(|&j| j != i).map(|j| d[j]).collect();
    let min = others.iter().copied().fold(f64::INFINITY, f64::min);
    let shifted: Vec<f64> = others.iter().map(|&x| x - min).collect();
    let ties = shifted.iter().filter(|&&x| x == 0.0).count();
    let unreachable = target < (ties as f64).ln() - 1e-12;
    let mut row = vec![0.0; n - 1];
    if unreachable {
        for (o, &x) in row.iter_mut().zip(&shifted) {
            *o = if x == 0.0 { 1.0 / ties as f64 } else { 0.0 };
        }
    }
    let (mut lo, mut hi) = (0.0_f64, f64::INFINITY);
    let mut beta = 1.0 / shifted.iter().copied().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    for _ in 0..if unreachable { 0 } else { MAX_BISECTIONS } {
        let h = row_entropy(&shifted, beta, &mut row);
        let diff = h - target;
        if diff.abs() < ENTROPY_TOL {
            break;
        }
        if diff > 0.0 {
            lo = beta;
            beta = if hi.is_finite() { 0.5 * (lo + hi) } else { beta * 2.0 };
        } else {
            hi = beta;
            beta = 0.5 * (lo + hi);
        }
        if hi.is_finite() && (hi - lo) <= f64::EPSILON * hi {
            break;
        }
    }
    let mut full = Vec::with_capacity(n);
    let mut it = row.into_iter();
    for j in 0..n {
        full.push(if j == i { 0.0 } else { it.next().unwrap() });
    }
    (full, unreachable)
}

fn check_distances(d: &PairwiseMatrix) -> Result<()> {
    if d.kind() != MatrixKind::Distance {
        return Err(Error::InvalidData("t-SNE expects a distance matrix".into()));
    }
    if let Some(v) = d.values().iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::InvalidData(format!("distance {v} is not finite and non-negative")));
    }
    Ok(())
}

/// Row-major conditional probabilities p_{j|i}, each row at the target
/// perplexity. A perplexity above n − 1 (the uniform row) is infeasible.
pub fn conditional_probabilities(d: &PairwiseMatrix, perplexity: f64, exec: Exec) -> Result<Vec<f64>> {
    check_distances(d)?;
    let n = d.len();
    if !(perplexity > 1.0 && perplexity <= (n as f64 - 1.0) * (1.0 + 1e-12)) {
        return Err(Error::param(format!(
            "perplexity {perplexity} infeasible for {n} points (needs 1 < perplexity <= {})",
            n.saturating_sub(1)
        )));
    }
    let target = perplexity.ln();
    let rows = exec.map_range(n, |i| row_conditional(d.row(i), i, target));
    let mut out = Vec::with_capacity(n * n);
    let mut clamped = 0;
    for (r, flag) in rows {
        out.extend(r);
        clamped += flag as usize;
    }
    if clamped > 0 {
        warn!("{clamped} row(s) have too many tied nearest neighbors for perplexity {perplexity}");
    }
    Ok(out)
}

/// Symmetrized joint P: (p_{j|i} + p_{i|j}) / 2n.
pub fn joint_probabilities(conditional: &[f64], n: usize) -> Vec<f64> {
    let mut p = vec![0.0; n * n];
    let scale = 1.0 / (2.0 * n as f64);
    for i in 0..n {
        for j in 0..n {
            p[i * n + j] = (conditional[i * n + j] + conditional[j * n + i]) * scale;
        }
    }
    p
}

/// Per-row sums of the Student-t kernel (1 + |y_i − y_j|²)⁻¹, j ≠ i.
fn kernel_row_sums(y: &[Point], exec: Exec) -> Vec<f64> {
    let n = y.len();
    exec.map_range(n, |i| {
        (0..n)
            .filter(|&j| j != i)
            .map(|j| 1.0 / (1.0 + dist2(&y[i], &y[j])))
            .sum()
    })
}

/// KL(P || Q) for the layout `y`.
pub fn kl_divergence(p: &[f64], y: &[Point]) -> f64 {
    let n = y.len();
    let z: f64 = kernel_row_sums(y, Exec::Sequential).iter().sum();
    let mut kl = 0.0;
    for i in 0..n {
        for j in 0..n {
            let pij = p[i * n + j];
            if i != j && pij > 0.0 {
                let q = 1.0 / (1.0 + dist2(&y[i], &y[j])) / z;
                kl += pij * (pij / q).ln();
            }
        }
    }
    kl
}

fn gradient_with(p: &[f64], y: &[Point], exaggeration: f64, exec: Exec) -> Vec<Point> {
    let n = y.len();
    let z: f64 = kernel_row_sums(y, exec).iter().sum();
    exec.map_range(n, |i| {
        let mut g = [0.0; 2];
        for j in 0..n {
            if j == i {
                continue;
            }
            let num = 1.0 / (1.0 + dist2(&y[i], &y[j]));
            let coef = 4.0 * (exaggeration * p[i * n + j] - num / z) * num;
            g[0] += coef * (y[i][0] - y[j][0]);
            g[1] += coef * (y[i][1] - y[j][1]);
        }
        g
    })
}

/// Analytic gradient of [`kl_divergence`] with respect to each point.
pub fn kl_gradient(p: &[f64], y: &[Point]) -> Vec<Point> {
    gradient_with(p, y, 1.0, Exec::Sequential)
}

/// Exact t-SNE of a distance matrix into two dimensions.
pub fn tsne_embed(d: &PairwiseMatrix, cfg: &TsneConfig, exec: Exec) -> Result<Embedding> {
    let n = d.len();
    let cond = conditional_probabilities(d, cfg.perplexity, exec)?;
    let p = joint_probabilities(&cond, n);
    drop(cond);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let normal = Normal::new(0.0, cfg.init_scale).map_err(|e| Error::param(e.to_string()))?;
    let mut y: Vec<Point> = (0..n)
        .map(|_| [normal.sample(&mut rng), normal.sample(&mut rng)])
        .collect();
    let mut update = vec![[0.0; 2]; n];
    let mut gains = vec![[1.0f64; 2]; n];
    let lr = cfg.learning_rate_for(n);

    for iter in 0..cfg.iterations {
        let early = iter < cfg.exaggeration_iterations;
        let exaggeration = if early { cfg.early_exaggeration } else { 1.0 };
        let momentum = if early {
            cfg.initial_momentum
        } else {
            cfg.final_momentum
        };
        let grad = gradient_with(&p, &y, exaggeration, exec);
        for i in 0..n {
            for c in 0..2 {
                let g = grad[i][c];
                let gain = if (g > 0.0) != (update[i][c] > 0.0) {
                    gains[i][c] + 0.2
                } else {
                    gains[i][c] * 0.8
                };
                let gain = gain.max(cfg.min_gain);
                gains[i][c] = gain;
                update[i][c] = momentum * update[i][c] - lr * gain * g;
                y[i][c] += update[i][c];
            }
        }
        let mean = y.iter().fold([0.0; 2], |m, p| [m[0] + p[0], m[1] + p[1]]);
        let mean = [mean[0] / n as f64, mean[1] / n as f64];
        for p in &mut y {
            p[0] -= mean[0];
            p[1] -= mean[1];
        }
    }
    if y.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
        return Err(Error::InvalidData("t-SNE diverged to non-finite coordinates".into()));
    }
    let kl = kl_divergence(&p, &y);
    Ok(Embedding {
        ids: d.ids().to_vec(),
        points: y,
        perplexity: cfg.perplexity,
        iterations: cfg.iterations,
        seed: cfg.seed,
        kl_divergence: kl,
    })
}
