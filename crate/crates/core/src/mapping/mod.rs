//! From a similarity matrix to a clustered 2-D map.

mod bandwidth;
mod distance;
mod meanshift;
mod tsne;

use std::io::Write;

use crate::graph::PaperId;

pub use bandwidth::{auto_bandwidth, BandwidthReading};
pub use distance::{similarity_to_distance, DEFAULT_EPSILON};
pub use meanshift::{mean_shift, shift_trajectory, MeanShiftConfig};
pub use tsne::{
    conditional_probabilities, joint_probabilities, kl_divergence, kl_gradient, tsne_embed,
    TsneConfig,
};

pub type Point = [f64; 2];

/// 2-D coordinates for a list of papers.
#[derive(Clone, Debug, PartialEq)]
pub struct Embedding {
    pub ids: Vec<PaperId>,
    pub points: Vec<Point>,
    pub perplexity: f64,
    pub iterations: usize,
    pub seed: u64,
    /// KL divergence of the final layout against the unexaggerated P.
    pub kl_divergence: f64,
}

impl Embedding {
    /// Wrap externally produced coordinates.
    pub fn from_points(ids: Vec<PaperId>, points: Vec<Point>) -> Self {
        Embedding {
            ids,
            points,
            perplexity: f64::NAN,
            iterations: 0,
            seed: 0,
            kl_divergence: f64::NAN,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `id<TAB>x<TAB>y` rows.
    pub fn write_tsv(&self, w: &mut impl Write) -> std::io::Result<()> {
        for (id, p) in self.ids.iter().zip(&self.points) {
            writeln!(w, "{id}\t{}\t{}", p[0], p[1])?;
        }
        Ok(())
    }
}

/// Hard partition of embedded points found by Mean-Shift.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterLabeling {
    /// Dense labels `0..k`, clusters numbered by decreasing size.
    pub labels: Vec<usize>,
    pub modes: Vec<Point>,
    pub bandwidth: f64,
}

impl ClusterLabeling {
    pub fn k(&self) -> usize {
        self.modes.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k()];
        for &l in &self.labels {
            s[l] += 1;
        }
        s
    }

    /// Members of each cluster, in point order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut m = vec![Vec::new(); self.k()];
        for (i, &l) in self.labels.iter().enumerate() {
            m[l].push(i);
        }
        m
    }

    /// `id<TAB>cluster` rows.
    pub fn write_tsv(&self, ids: &[PaperId], w: &mut impl Write) -> std::io::Result<()> {
        for (id, l) in ids.iter().zip(&self.labels) {
            writeln!(w, "{id}\t{l}")?;
        }
        Ok(())
    }
}

#[inline]
pub(crate) fn dist2(a: &Point, b: &Point) -> f64 {
    let (dx, dy) = (a[0] - b[0], a[1] - b[1]);
    dx * dx + dy * dy
}
