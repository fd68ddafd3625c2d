use std::str::FromStr;

use super::{dist2, Point};
use crate::error::{Error, Result};
use crate::par::Exec;

/// How the k nearest-neighbor distances of a point are summarized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum BandwidthReading {
    /// Mean of the k distances.
    #[default]
    MeanOfNeighbors,
    /// Distance to the k-th neighbor.
    KthNeighbor,
}

impl FromStr for BandwidthReading {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(BandwidthReading::MeanOfNeighbors),
            "kth" => Ok(BandwidthReading::KthNeighbor),
            other => Err(Error::param(format!("unknown bandwidth reading `{other}`"))),
        }
    }
}

/// Mean over points of their k-nearest-neighbor distance summary (self excluded).
pub fn auto_bandwidth(points: &[Point], k: usize, reading: BandwidthReading, exec: Exec) -> Result<f64> {
    let n = points.len();
    if k == 0 || k >= n {
        return Err(Error::param(format!("neighbor count k={k} must be in 1..{n}")));
    }
    let per_point = exec.map_range(n, |i| {
        let mut d: Vec<f64> = (0..n)
            .filter(|&j| j != i)
            .map(|j| dist2(&points[i], &points[j]).sqrt())
            .collect();
        d.select_nth_unstable_by(k - 1, f64::total_cmp);
        match reading {
            BandwidthReading::KthNeighbor => d[k - 1],
            BandwidthReading::MeanOfNeighbors => {
                let mut near = d[..k].to_vec();
                near.sort_by(f64::total_cmp);
                near.iter().sum::<f64>() / k as f64
            }
        }
    });
    let sigma = per_point.iter().sum::<f64>() / n as f64;
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(Error::InvalidData("all points coincide: bandwidth would be 0".into()));
    }
    Ok(sigma)
}
