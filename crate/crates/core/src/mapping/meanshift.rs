//! Gaussian-kernel Mean-Shift over the embedded points.

use super::{dist2, ClusterLabeling, Point};
use crate::error::{Error, Result};
use crate::par::Exec;

#[derive(Clone, Debug, PartialEq)]
pub struct MeanShiftConfig {
    /// Stop once a step moves less than `tolerance · σ`.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Converged positions closer than `merge_radius · σ` share a mode.
    pub merge_radius: f64,
}

impl Default for MeanShiftConfig {
    fn default() -> Self {
        MeanShiftConfig {
            tolerance: 1e-4,
            max_iterations: 500,
            merge_radius: 0.5,
        }
    }
}

fn shift(x: Point, data: &[Point], inv_two_s2: f64) -> Point {
    let (mut num, mut den) = ([0.0; 2], 0.0);
    for y in data {
        let w = (-dist2(&x, y) * inv_two_s2).exp();
        num[0] += w * y[0];
        num[1] += w * y[1];
        den += w;
    }
    if den == 0.0 {
        x
    } else {
        [num[0] / den, num[1] / den]
    }
}

fn climb(start: Point, data: &[Point], sigma: f64, cfg: &MeanShiftConfig, trace: Option<&mut Vec<f64>>) -> Point {
    let inv = 1.0 / (2.0 * sigma * sigma);
    let tol = cfg.tolerance * sigma;
    let mut x = start;
    let mut steps = Vec::new();
    for _ in 0..cfg.max_iterations {
        let nx = shift(x, data, inv);
        let step = dist2(&x, &nx).sqrt();
        x = nx;
        steps.push(step);
        if step < tol {
            break;
        }
    }
    if let Some(t) = trace {
        *t = steps;
    }
    x
}

/// Step lengths of the ascent started at `start`.
pub fn shift_trajectory(data: &[Point], start: Point, sigma: f64, cfg: &MeanShiftConfig) -> Vec<f64> {
    let mut t = Vec::new();
    climb(start, data, sigma, cfg, Some(&mut t));
    t
}

/// Cluster `points` by the density mode each one climbs to.
pub fn mean_shift(points: &[Point], sigma: f64, cfg: &MeanShiftConfig, exec: Exec) -> Result<ClusterLabeling> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::param(format!("bandwidth σ={sigma} must be positive")));
    }
    let converged = exec.map_range(points.len(), |i| climb(points[i], points, sigma, cfg, None));

    let merge2 = (cfg.merge_radius * sigma).powi(2);
    let mut reps: Vec<Point> = Vec::new();
    let mut sums: Vec<(Point, usize)> = Vec::new();
    let mut raw = Vec::with_capacity(points.len());
    for x in &converged {
        let found = reps.iter().position(|r| dist2(r, x) <= merge2);
        let l = found.unwrap_or_else(|| {
            reps.push(*x);
            sums.push(([0.0; 2], 0));
            reps.len() - 1
        });
        sums[l].0[0] += x[0];
        sums[l].0[1] += x[1];
        sums[l].1 += 1;
        raw.push(l);
    }
    // renumber by decreasing size, first-seen order on ties
    let mut order: Vec<usize> = (0..reps.len()).collect();
    order.sort_by(|&a, &b| sums[b].1.cmp(&sums[a].1).then(a.cmp(&b)));
    let mut relabel = vec![0; reps.len()];
    for (new, &old) in order.iter().enumerate() {
        relabel[old] = new;
    }
    let modes = order
        .iter()
        .map(|&l| {
            let (s, c) = sums[l];
            [s[0] / c as f64, s[1] / c as f64]
        })
        .collect();
    Ok(ClusterLabeling {
        labels: raw.into_iter().map(|l| relabel[l]).collect(),
        modes,
        bandwidth: sigma,
    })
}
