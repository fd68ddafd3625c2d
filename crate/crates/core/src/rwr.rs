//! Depth-truncated random walk diffusion over the reference neighborhood
//! and the weighted bibliographic coupling built on it.
//!
//! A unit mass starts on the source. At each level every node forwards its
//! mass split equally among its references; mass reaching a node without
//! references is absorbed there and leaves the walk. The weight of a node is
//! the decay-weighted sum of the masses it receives at levels `1..=t`.

use std::str::FromStr;

use crate::coupling::SetMeasure;
use crate::error::{Error, Result};
use crate::graph::{CitationGraph, Direction, NodeIx};
use crate::matrix::{MatrixKind, PairwiseMatrix};
use crate::par::Exec;

pub const MAX_HORIZON: usize = 8;
pub const DEFAULT_HORIZON: usize = 3;
/// Weights below this are dropped from the sparse vector.
pub const WEIGHT_FLOOR: f64 = 1e-15;

/// How per-level masses combine into the final weight.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum LevelAggregation {
    /// Σ_{s=1..t} α^s · m_s
    #[default]
    Sum,
    /// α^t · m_t only.
    FinalLevel,
}

impl FromStr for LevelAggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sum" => Ok(LevelAggregation::Sum),
            "final" => Ok(LevelAggregation::FinalLevel),
            other => Err(Error::param(format!("unknown level aggregation `{other}`"))),
        }
    }
}

impl std::fmt::Display for LevelAggregation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            LevelAggregation::Sum => "sum",
            LevelAggregation::FinalLevel => "final",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WalkParams {
    pub horizon: usize,
    pub decay: f64,
    pub aggregation: LevelAggregation,
    pub direction: Direction,
}

impl Default for WalkParams {
    fn default() -> Self {
        WalkParams {
            horizon: DEFAULT_HORIZON,
            decay: 1.0,
            aggregation: LevelAggregation::Sum,
            direction: Direction::References,
        }
    }
}

impl WalkParams {
    pub fn new(horizon: usize, decay: f64) -> Self {
        WalkParams {
            horizon,
            decay,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_HORIZON).contains(&self.horizon) {
            return Err(Error::param(format!(
                "horizon t={} outside 1..={MAX_HORIZON}",
                self.horizon
            )));
        }
        if !(self.decay > 0.0 && self.decay <= 1.0) {
            return Err(Error::param(format!("decay α={} outside (0, 1]", self.decay)));
        }
        Ok(())
    }
}

/// Sparse diffusion weights of one source, sorted by node index.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector {
    pub source: NodeIx,
    pub horizon: usize,
    pub decay: f64,
    nodes: Vec<NodeIx>,
    weights: Vec<f64>,
}

impl WeightVector {
    /// Build from arbitrary `(node, weight)` entries; zero weights are dropped.
    pub fn from_entries(source: NodeIx, mut entries: Vec<(NodeIx, f64)>) -> Self {
        entries.sort_by_key(|e| e.0);
        entries.retain(|e| e.1 > 0.0);
        let (nodes, weights) = entries.into_iter().unzip();
        WeightVector {
            source,
            horizon: 0,
            decay: 1.0,
            nodes,
            weights,
        }
    }

    pub fn nodes(&self) -> &[NodeIx] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn get(&self, node: NodeIx) -> Option<f64> {
        self.nodes.binary_search(&node).ok().map(|i| self.weights[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeIx, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn scaled(&self, factor: f64) -> WeightVector {
        WeightVector {
            weights: self.weights.iter().map(|w| w * factor).collect(),
            ..self.clone()
        }
    }

    fn normalized(&self) -> Normalized {
        let max = self.weights.iter().copied().fold(0.0, f64::max);
        let weights: Vec<f64> = self.weights.iter().map(|w| w / max).collect();
        let norm2 = weights.iter().map(|w| w * w).sum();
        Normalized {
            nodes: self.nodes.clone(),
            weights,
            norm2,
        }
    }
}

/// Weights rescaled so the largest is exactly 1. Uniform vectors become all
/// ones, which keeps the weighted cosine of uniform weights bit-identical to
/// the set cosine.
struct Normalized {
    nodes: Vec<NodeIx>,
    weights: Vec<f64>,
    norm2: f64,
}

fn normalized_cosine(a: &Normalized, b: &Normalized) -> f64 {
    if a.nodes.is_empty() || b.nodes.is_empty() {
        return 0.0;
    }
    let (mut i, mut j) = (0, 0);
    let mut dot = 0.0;
    let (an, bn) = (&a.nodes, &b.nodes);
    while i < an.len() && j < bn.len() {
        let (x, y) = (an[i], bn[j]);
        if x < y {
            i += 1;
        } else if x > y {
            j += 1;
        } else {
            dot += a.weights[i] * b.weights[j];
            i += 1;
            j += 1;
        }
    }
    (dot / (a.norm2 * b.norm2).sqrt()).min(1.0)
}

/// Cosine of two sparse weight vectors over their shared support.
pub fn weighted_cosine(a: &WeightVector, b: &WeightVector) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    normalized_cosine(&a.normalized(), &b.normalized())
}

/// Dense per-worker buffers sized to the graph.
pub struct Scratch {
    cur: Vec<f64>,
    next: Vec<f64>,
    acc: Vec<f64>,
    in_next: Vec<bool>,
    in_acc: Vec<bool>,
}

impl Scratch {
    pub fn new(n: usize) -> Self {
        Scratch {
            cur: vec![0.0; n],
            next: vec![0.0; n],
            acc: vec![0.0; n],
            in_next: vec![false; n],
            in_acc: vec![false; n],
        }
    }
}

/// Level masses m_1..m_t of the walk from `source` (α-free), for diagnostics
/// and conservation checks. Entry `s-1` holds the sparse mass of level `s`.
pub fn level_masses(
    g: &CitationGraph,
    source: NodeIx,
    horizon: usize,
    direction: Direction,
) -> Result<Vec<Vec<(NodeIx, f64)>>> {
    if !g.contains(source) {
        return Err(Error::UnknownId(format!("#{source}")));
    }
    let mut frontier = vec![(source, 1.0)];
    let mut levels = Vec::with_capacity(horizon);
    let mut next = vec![0.0; g.node_count()];
    for _ in 0..horizon {
        let mut touched = Vec::new();
        for &(c, m) in &frontier {
            let refs = g.neighbors(c, direction);
            if refs.is_empty() {
                continue;
            }
            let share = m / refs.len() as f64;
            for &b in refs {
                if next[b as usize] == 0.0 {
                    touched.push(b);
                }
                next[b as usize] += share;
            }
        }
        touched.sort_unstable();
        frontier = touched
            .iter()
            .map(|&b| (b, std::mem::take(&mut next[b as usize])))
            .collect();
        levels.push(frontier.clone());
    }
    Ok(levels)
}

fn diffuse(g: &CitationGraph, source: NodeIx, p: &WalkParams, s: &mut Scratch) -> WeightVector {
    let mut frontier = vec![source];
    let mut next_list: Vec<NodeIx> = Vec::new();
    let mut acc_list: Vec<NodeIx> = Vec::new();
    s.cur[source as usize] = 1.0;
    let mut scale = 1.0;
    for level in 1..=p.horizon {
        scale *= p.decay;
        for &c in &frontier {
            let m = std::mem::take(&mut s.cur[c as usize]);
            let refs = g.neighbors(c, p.direction);
            if refs.is_empty() {
                continue;
            }
            let share = m / refs.len() as f64;
            for &b in refs {
                let bi = b as usize;
                if !s.in_next[bi] {
                    s.in_next[bi] = true;
                    next_list.push(b);
                }
                s.next[bi] += share;
            }
        }
        let keep = p.aggregation == LevelAggregation::Sum || level == p.horizon;
        for &b in &next_list {
            let bi = b as usize;
            s.in_next[bi] = false;
            if keep {
                if !s.in_acc[bi] {
                    s.in_acc[bi] = true;
                    acc_list.push(b);
                }
                s.acc[bi] += scale * s.next[bi];
            }
        }
        std::mem::swap(&mut s.cur, &mut s.next);
        std::mem::swap(&mut frontier, &mut next_list);
        next_list.clear();
        if frontier.is_empty() {
            break;
        }
    }
    for &c in &frontier {
        s.cur[c as usize] = 0.0;
    }
    acc_list.sort_unstable();
    let mut nodes = Vec::with_capacity(acc_list.len());
    let mut weights = Vec::with_capacity(acc_list.len());
    for b in acc_list {
        let bi = b as usize;
        let w = std::mem::take(&mut s.acc[bi]);
        s.in_acc[bi] = false;
        if w >= WEIGHT_FLOOR && b != source {
            nodes.push(b);
            weights.push(w);
        }
    }
    WeightVector {
        source,
        horizon: p.horizon,
        decay: p.decay,
        nodes,
        weights,
    }
}

/// Diffusion weights W^a of `source` over its depth-`t` neighborhood.
pub fn rwr_weights(g: &CitationGraph, source: NodeIx, params: &WalkParams) -> Result<WeightVector> {
    params.validate()?;
    if !g.contains(source) {
        return Err(Error::UnknownId(format!("#{source}")));
    }
    Ok(diffuse(g, source, params, &mut Scratch::new(g.node_count())))
}

/// Weight vectors for many sources, one diffusion per source.
pub fn rwr_weights_many(
    g: &CitationGraph,
    sources: &[NodeIx],
    params: &WalkParams,
    exec: Exec,
) -> Result<Vec<WeightVector>> {
    params.validate()?;
    if let Some(&bad) = sources.iter().find(|&&u| !g.contains(u)) {
        return Err(Error::UnknownId(format!("#{bad}")));
    }
    let n = g.node_count();
    Ok(exec.map_range_with(
        sources.len(),
        || Scratch::new(n),
        |s, i| diffuse(g, sources[i], params, s),
    ))
}

/// Weighted bibliographic coupling of two papers.
pub fn wbc_similarity(g: &CitationGraph, a: NodeIx, b: NodeIx, params: &WalkParams) -> Result<f64> {
    let wa = rwr_weights(g, a, params)?;
    let wb = rwr_weights(g, b, params)?;
    Ok(weighted_cosine(&wa, &wb))
}

fn check_sample(g: &CitationGraph, sample: &[NodeIx]) -> Result<()> {
    if sample.len() < 2 {
        return Err(Error::param("pairwise similarity needs at least 2 papers"));
    }
    let mut sorted = sample.to_vec();
    sorted.sort_unstable();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::InvalidData(format!(
            "duplicate sample id `{}`",
            g.id(w[0])
        )));
    }
    if let Some(&bad) = sorted.last().filter(|&&u| !g.contains(u)) {
        return Err(Error::UnknownId(format!("#{bad}")));
    }
    Ok(())
}

/// Fill a symmetric similarity matrix from a pair scorer, rows in parallel.
fn symmetric_fill<F>(g: &CitationGraph, sample: &[NodeIx], exec: Exec, score: F) -> PairwiseMatrix
where
    F: Fn(usize, usize) -> f64 + Sync + Send,
{
    let n = sample.len();
    let upper: Vec<Vec<f64>> = exec.map_range(n, |i| (i + 1..n).map(|j| score(i, j)).collect());
    let mut values = vec![0.0; n * n];
    for (i, row) in upper.into_iter().enumerate() {
        values[i * n + i] = 1.0;
        for (off, v) in row.into_iter().enumerate() {
            let j = i + 1 + off;
            values[i * n + j] = v;
            values[j * n + i] = v;
        }
    }
    PairwiseMatrix::new_unchecked(g.to_ids(sample), values, MatrixKind::Similarity)
}

/// Weighted-coupling similarity matrix over `sample`. Each source is
/// diffused once; walks follow `params.direction`.
pub fn pairwise_similarity(
    g: &CitationGraph,
    sample: &[NodeIx],
    params: &WalkParams,
    exec: Exec,
) -> Result<PairwiseMatrix> {
    check_sample(g, sample)?;
    let vectors = rwr_weights_many(g, sample, params, exec)?;
    let normed: Vec<Normalized> = exec.map_range(vectors.len(), |i| vectors[i].normalized());
    drop(vectors);
    Ok(symmetric_fill(g, sample, exec, |i, j| {
        normalized_cosine(&normed[i], &normed[j])
    }))
}

/// Classic set-coupling baseline: `measure` on the order-`k` neighborhoods
/// along `direction`.
pub fn pairwise_set_similarity(
    g: &CitationGraph,
    sample: &[NodeIx],
    k: usize,
    measure: SetMeasure,
    direction: Direction,
    exec: Exec,
) -> Result<PairwiseMatrix> {
    check_sample(g, sample)?;
    if k == 0 {
        return Err(Error::param("neighborhood order k must be >= 1"));
    }
    let sets: Vec<Vec<NodeIx>> = exec.map_range(sample.len(), |i| {
        g.extended(sample[i], k, direction).expect("validated sample")
    });
    Ok(symmetric_fill(g, sample, exec, |i, j| {
        crate::coupling::set_similarity(&sets[i], &sets[j], measure)
    }))
}

/// Share of off-diagonal pairs with non-zero similarity and the number of
/// connected components of the graph linking every such pair.
pub fn connectivity(s: &PairwiseMatrix) -> (f64, usize) {
    let n = s.len();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if s.get(i, j) > 0.0 {
                edges.push((i as u32, j as u32));
            }
        }
    }
    let pairs = n * n.saturating_sub(1) / 2;
    let frac = if pairs == 0 {
        0.0
    } else {
        edges.len() as f64 / pairs as f64
    };
    let (_, comps) = crate::graph::weak_components(n, edges.into_iter());
    (frac, comps)
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    use super::*;
    use crate::graph::tests::graph;

    fn weights(g: &CitationGraph, a: NodeIx, t: usize, alpha: f64) -> Vec<(NodeIx, f64)> {
        rwr_weights(g, a, &WalkParams::new(t, alpha)).unwrap().iter().collect()
    }

    #[test]
    fn chain_and_diamond() {
        let chain = graph(3, &[(0, 1), (1, 2)]);
        assert_eq!(weights(&chain, 0, 2, 1.0), vec![(1, 1.0), (2, 1.0)]);
        assert_eq!(weights(&chain, 0, 2, 0.5), vec![(1, 0.5), (2, 0.25)]);

        let diamond = graph(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]);
        assert_eq!(weights(&diamond, 0, 2, 1.0), vec![(1, 0.5), (2, 0.5), (3, 1.0)]);
    }

    #[test]
    fn final_level_only() {
        let chain = graph(4, &[(0, 1), (1, 2), (2, 3)]);
        let p = WalkParams {
            aggregation: LevelAggregation::FinalLevel,
            ..WalkParams::new(2, 1.0)
        };
        let w: Vec<_> = rwr_weights(&chain, 0, &p).unwrap().iter().collect();
        assert_eq!(w, vec![(2, 1.0)]);
    }

    #[test]
    fn parameter_checks() {
        let g = graph(2, &[(0, 1)]);
        assert!(rwr_weights(&g, 0, &WalkParams::new(0, 1.0)).is_err());
        assert!(rwr_weights(&g, 0, &WalkParams::new(9, 1.0)).is_err());
        assert!(rwr_weights(&g, 0, &WalkParams::new(2, 0.0)).is_err());
        assert!(rwr_weights(&g, 0, &WalkParams::new(2, 1.5)).is_err());
        assert!(rwr_weights(&g, 5, &WalkParams::new(2, 1.0)).is_err());
    }

    #[test]
    fn weighted_cosine_examples() {
        let a = WeightVector::from_entries(0, vec![(10, 1.0), (11, 1.0)]);
        let b = WeightVector::from_entries(1, vec![(11, 2.0)]);
        assert_relative_eq!(weighted_cosine(&a, &b), 1.0 / 2f64.sqrt(), epsilon = 1e-15);
        assert_eq!(weighted_cosine(&a, &a), 1.0);
        let c = WeightVector::from_entries(2, vec![(12, 1.0)]);
        assert_eq!(weighted_cosine(&a, &c), 0.0);
        assert_eq!(weighted_cosine(&a, &WeightVector::from_entries(3, vec![])), 0.0);
    }

    #[test]
    fn wbc_examples() {
        let g = graph(3, &[(0, 2), (1, 2)]);
        assert_eq!(wbc_similarity(&g, 0, 1, &WalkParams::new(1, 1.0)).unwrap(), 1.0);
        let g = graph(4, &[(0, 1), (2, 3)]);
        assert_eq!(wbc_similarity(&g, 0, 2, &WalkParams::new(3, 1.0)).unwrap(), 0.0);
    }

    #[test]
    fn pairwise_small_cases() {
        let g = graph(3, &[(0, 2), (1, 2)]);
        let s = pairwise_similarity(&g, &[0, 1], &WalkParams::new(1, 1.0), Exec::Sequential).unwrap();
        assert_eq!(s.values(), &[1.0, 1.0, 1.0, 1.0]);

        let iso = graph(3, &[]);
        let s = pairwise_similarity(&iso, &[0, 1, 2], &WalkParams::default(), Exec::Sequential).unwrap();
        assert_eq!(s.values(), &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(connectivity(&s), (0.0, 3));

        assert!(pairwise_similarity(&g, &[0, 0], &WalkParams::default(), Exec::Sequential).is_err());
        assert!(pairwise_similarity(&g, &[0], &WalkParams::default(), Exec::Sequential).is_err());
    }

    #[test]
    fn citation_direction_walks_reverse_graph() {
        // x=2 cites a=0 and b=1
        let g = graph(3, &[(2, 0), (2, 1)]);
        let p = WalkParams {
            direction: Direction::Citations,
            ..WalkParams::new(1, 1.0)
        };
        let fwd = pairwise_similarity(&g, &[0, 1], &p, Exec::Sequential).unwrap();
        let rev = pairwise_similarity(&g.reversed(), &[0, 1], &WalkParams::new(1, 1.0), Exec::Sequential)
            .unwrap();
        assert_eq!(fwd, rev);
        assert_eq!(fwd.get(0, 1), 1.0);
    }

    #[test]
    fn level_mass_conservation() {
        // layered, sink-free within horizon: 0 -> {1,2}, 1 -> {3}, 2 -> {3,4}
        let g = graph(5, &[(0, 1), (0, 2), (1, 3), (2, 3), (2, 4)]);
        let levels = level_masses(&g, 0, 2, Direction::References).unwrap();
        for lvl in &levels {
            assert_relative_eq!(lvl.iter().map(|e| e.1).sum::<f64>(), 1.0, epsilon = 1e-12);
        }
        // node 3 and 4 are sinks: level 3 is empty
        let levels = level_masses(&g, 0, 3, Direction::References).unwrap();
        assert!(levels[2].is_empty());
    }

    proptest! {
        #[test]
        fn cosine_is_scale_invariant(
            ws in proptest::collection::vec((0u32..30, 0.01f64..5.0), 1..15),
            vs in proptest::collection::vec((0u32..30, 0.01f64..5.0), 1..15),
            lambda in 0.001f64..1000.0,
        ) {
            let dedup = |mut v: Vec<(u32, f64)>| { v.sort_by_key(|e| e.0); v.dedup_by_key(|e| e.0); v };
            let a = WeightVector::from_entries(0, dedup(ws));
            let b = WeightVector::from_entries(1, dedup(vs));
            let base = weighted_cosine(&a, &b);
            prop_assert!((0.0..=1.0).contains(&base));
            prop_assert!((weighted_cosine(&a, &b.scaled(lambda)) - base).abs() < 1e-12);
            prop_assert_eq!(base, weighted_cosine(&b, &a));
        }
    }
}
