//! Citation graph: paper records, the indexed DAG, and neighborhood queries.
//!
//! Papers are re-indexed densely as `u32` node indices at build time. Edges
//! point from the citing paper to the cited one, so the forward adjacency of
//! a node is its reference set R(a) and the backward adjacency is its
//! citation set C(a).

mod load;
mod preprocess;
pub(crate) mod snapshot;

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use load::{load_corpus, CorpusSchema, LoadReport};
pub(crate) use preprocess::weak_components;
pub use preprocess::{break_cycles, build_graph, BuildReport, CycleReport, PreprocessReport};
pub use snapshot::{read_snapshot, write_snapshot};

/// Dense node index into a [`CitationGraph`].
pub type NodeIx = u32;

/// Opaque paper identifier as it appears in the corpus.
///
/// Ordering is numeric for ids that parse as unsigned integers (which sort
/// before all other ids) and lexicographic otherwise, so integer DBLP ids
/// order naturally.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PaperId(pub String);

impl PaperId {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    fn sort_key(&self) -> (u8, u64, &str) {
        match self.0.parse::<u64>() {
            Ok(v) => (0, v, &self.0),
            Err(_) => (1, 0, &self.0),
        }
    }
}

impl Ord for PaperId {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl PartialOrd for PaperId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PaperId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for PaperId {
    fn from(s: &str) -> Self {
        PaperId(s.to_owned())
    }
}

impl From<String> for PaperId {
    fn from(s: String) -> Self {
        PaperId(s)
    }
}

/// One bibliographic item as read from a corpus.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PaperRecord {
    pub id: PaperId,
    pub year: Option<i32>,
    pub title: String,
    pub keywords: Vec<String>,
    pub references: Vec<PaperId>,
}

impl PaperRecord {
    pub fn new(id: impl Into<PaperId>) -> Self {
        PaperRecord {
            id: id.into(),
            ..Default::default()
        }
    }

    pub fn cites<I, S>(mut self, refs: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<PaperId>,
    {
        self.references = refs.into_iter().map(Into::into).collect();
        self
    }

    pub fn year(mut self, year: i32) -> Self {
        self.year = Some(year);
        self
    }

    pub fn keywords<I, S>(mut self, kws: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.keywords = kws.into_iter().map(Into::into).collect();
        self
    }

    pub fn has_keyword(&self, kw: &str) -> bool {
        self.keywords.iter().any(|k| k == kw)
    }
}

/// Per-node metadata kept alongside the graph.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PaperMeta {
    pub year: Option<i32>,
    pub title: String,
    pub keywords: Vec<String>,
}

impl PaperMeta {
    pub fn has_keyword(&self, kw: &str) -> bool {
        self.keywords.iter().any(|k| k == kw)
    }
}

/// Which adjacency a walk or neighborhood query follows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Citing → cited: R(a).
    #[default]
    References,
    /// Cited → citing: C(a).
    Citations,
}

impl Direction {
    pub fn reverse(self) -> Self {
        match self {
            Direction::References => Direction::Citations,
            Direction::Citations => Direction::References,
        }
    }
}

impl std::str::FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "references" | "refs" => Ok(Direction::References),
            "citations" | "cites" => Ok(Direction::Citations),
            other => Err(Error::param(format!("unknown direction `{other}`"))),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::References => "references",
            Direction::Citations => "citations",
        })
    }
}

/// Compressed sparse rows; neighbor lists are sorted and duplicate-free.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub(crate) struct Adjacency {
    pub(crate) offsets: Vec<u64>,
    pub(crate) targets: Vec<NodeIx>,
}

impl Adjacency {
    fn from_sorted_pairs(n: usize, pairs: &[(NodeIx, NodeIx)]) -> Self {
        let mut offsets = vec![0u64; n + 1];
        for &(s, _) in pairs {
            offsets[s as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        Adjacency {
            offsets,
            targets: pairs.iter().map(|&(_, t)| t).collect(),
        }
    }

    #[inline]
    fn row(&self, u: NodeIx) -> &[NodeIx] {
        let u = u as usize;
        &self.targets[self.offsets[u] as usize..self.offsets[u + 1] as usize]
    }
}

/// Immutable citation graph with forward (reference) and backward (citation)
/// adjacency kept as exact transposes.
#[derive(Clone, Debug)]
pub struct CitationGraph {
    ids: Vec<PaperId>,
    index: HashMap<PaperId, NodeIx>,
    fwd: Adjacency,
    bwd: Adjacency,
}

impl PartialEq for CitationGraph {
    fn eq(&self, other: &Self) -> bool {
        self.ids == other.ids && self.fwd == other.fwd && self.bwd == other.bwd
    }
}

impl CitationGraph {
    /// Build from node ids and `(citing, cited)` index pairs. Duplicate
    /// edges collapse.
    pub fn from_edges(ids: Vec<PaperId>, edges: &[(NodeIx, NodeIx)]) -> Result<Self> {
        let n = ids.len();
        if n > NodeIx::MAX as usize {
            return Err(Error::InvalidData(format!("{n} nodes exceed index range")));
        }
        let mut index = HashMap::with_capacity(n);
        for (i, id) in ids.iter().enumerate() {
            if index.insert(id.clone(), i as NodeIx).is_some() {
                return Err(Error::DuplicateId(id.0.clone()));
            }
        }
        let mut pairs: Vec<(NodeIx, NodeIx)> = edges.to_vec();
        if let Some(&(s, t)) = pairs.iter().find(|&&(s, t)| s as usize >= n || t as usize >= n) {
            return Err(Error::InvalidData(format!("edge ({s}, {t}) out of range")));
        }
        pairs.sort_unstable();
        pairs.dedup();
        let fwd = Adjacency::from_sorted_pairs(n, &pairs);
        let mut rev: Vec<(NodeIx, NodeIx)> = pairs.iter().map(|&(s, t)| (t, s)).collect();
        rev.sort_unstable();
        let bwd = Adjacency::from_sorted_pairs(n, &rev);
        Ok(CitationGraph {
            ids,
            index,
            fwd,
            bwd,
        })
    }

    pub(crate) fn from_parts(ids: Vec<PaperId>, fwd: Adjacency, bwd: Adjacency) -> Result<Self> {
        let mut index = HashMap::with_capacity(ids.len());
        for (i, id) in ids.iter().enumerate() {
            if index.insert(id.clone(), i as NodeIx).is_some() {
                return Err(Error::DuplicateId(id.0.clone()));
            }
        }
        Ok(CitationGraph {
            ids,
            index,
            fwd,
            bwd,
        })
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.fwd.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[PaperId] {
        &self.ids
    }

    pub fn id(&self, u: NodeIx) -> &PaperId {
        &self.ids[u as usize]
    }

    pub fn index_of(&self, id: &str) -> Result<NodeIx> {
        self.index
            .get(&PaperId::from(id))
            .copied()
            .ok_or_else(|| Error::UnknownId(id.to_owned()))
    }

    pub fn contains(&self, u: NodeIx) -> bool {
        (u as usize) < self.ids.len()
    }

    pub(crate) fn adjacency(&self, dir: Direction) -> &Adjacency {
        match dir {
            Direction::References => &self.fwd,
            Direction::Citations => &self.bwd,
        }
    }

    /// R(u), sorted by node index.
    #[inline]
    pub fn references_of(&self, u: NodeIx) -> &[NodeIx] {
        self.fwd.row(u)
    }

    /// C(u), sorted by node index.
    #[inline]
    pub fn citations_of(&self, u: NodeIx) -> &[NodeIx] {
        self.bwd.row(u)
    }

    #[inline]
    pub fn neighbors(&self, u: NodeIx, dir: Direction) -> &[NodeIx] {
        self.adjacency(dir).row(u)
    }

    /// R(a) by paper id.
    pub fn references(&self, id: &str) -> Result<Vec<PaperId>> {
        let u = self.index_of(id)?;
        Ok(self.to_ids(self.references_of(u)))
    }

    /// C(a) by paper id.
    pub fn citations(&self, id: &str) -> Result<Vec<PaperId>> {
        let u = self.index_of(id)?;
        Ok(self.to_ids(self.citations_of(u)))
    }

    pub fn to_ids(&self, nodes: &[NodeIx]) -> Vec<PaperId> {
        nodes.iter().map(|&v| self.ids[v as usize].clone()).collect()
    }

    /// Nodes within `1..=k` steps of `u` along `dir`, sorted; `u` itself is
    /// never included. This is R^k(u) (or C^k(u)) of the set recursion.
    pub fn extended(&self, u: NodeIx, k: usize, dir: Direction) -> Result<Vec<NodeIx>> {
        if k == 0 {
            return Err(Error::param("neighborhood order k must be >= 1"));
        }
        if !self.contains(u) {
            return Err(Error::UnknownId(format!("#{u}")));
        }
        let mut seen: HashSet<NodeIx> = HashSet::new();
        seen.insert(u);
        let mut frontier = vec![u];
        let mut out = Vec::new();
        for _ in 0..k {
            let mut next = Vec::new();
            for &c in &frontier {
                for &b in self.neighbors(c, dir) {
                    if seen.insert(b) {
                        next.push(b);
                        out.push(b);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        out.sort_unstable();
        Ok(out)
    }

    /// R^k(a) by paper id.
    pub fn extended_references(&self, id: &str, k: usize) -> Result<Vec<PaperId>> {
        let u = self.index_of(id)?;
        Ok(self.to_ids(&self.extended(u, k, Direction::References)?))
    }

    /// C^k(a) by paper id.
    pub fn extended_citations(&self, id: &str, k: usize) -> Result<Vec<PaperId>> {
        let u = self.index_of(id)?;
        Ok(self.to_ids(&self.extended(u, k, Direction::Citations)?))
    }

    /// All `(citing, cited)` edges in index order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeIx, NodeIx)> + '_ {
        (0..self.node_count() as NodeIx)
            .flat_map(move |u| self.references_of(u).iter().map(move |&v| (u, v)))
    }

    /// Same nodes with every edge reversed.
    pub fn reversed(&self) -> CitationGraph {
        CitationGraph {
            ids: self.ids.clone(),
            index: self.index.clone(),
            fwd: self.bwd.clone(),
            bwd: self.fwd.clone(),
        }
    }

    /// Subgraph induced on `keep` (sorted, distinct); node order follows `keep`.
    pub fn induced(&self, keep: &[NodeIx]) -> CitationGraph {
        let mut remap = vec![NodeIx::MAX; self.node_count()];
        for (new, &old) in keep.iter().enumerate() {
            remap[old as usize] = new as NodeIx;
        }
        let ids = keep.iter().map(|&u| self.ids[u as usize].clone()).collect();
        let edges: Vec<_> = keep
            .iter()
            .flat_map(|&u| {
                let remap = &remap;
                self.references_of(u).iter().filter_map(move |&v| {
                    let nv = remap[v as usize];
                    (nv != NodeIx::MAX).then_some((remap[u as usize], nv))
                })
            })
            .collect();
        CitationGraph::from_edges(ids, &edges).expect("induced subgraph of a valid graph")
    }

    /// Copy without the given edges.
    pub fn without_edges(&self, removed: &[(NodeIx, NodeIx)]) -> CitationGraph {
        let drop: HashSet<(NodeIx, NodeIx)> = removed.iter().copied().collect();
        let edges: Vec<_> = self.edges().filter(|e| !drop.contains(e)).collect();
        CitationGraph::from_edges(self.ids.clone(), &edges).expect("edge subset of a valid graph")
    }

    /// True if a depth-first search finds no back edge.
    pub fn is_acyclic(&self) -> bool {
        // 0 = unvisited, 1 = on stack, 2 = done
        let n = self.node_count();
        let mut state = vec![0u8; n];
        let mut stack: Vec<(NodeIx, usize)> = Vec::new();
        for root in 0..n as NodeIx {
            if state[root as usize] != 0 {
                continue;
            }
            state[root as usize] = 1;
            stack.push((root, 0));
            while let Some(&mut (u, ref mut pos)) = stack.last_mut() {
                let refs = self.references_of(u);
                if *pos < refs.len() {
                    let v = refs[*pos];
                    *pos += 1;
                    match state[v as usize] {
                        0 => {
                            state[v as usize] = 1;
                            stack.push((v, 0));
                        }
                        1 => return false,
                        _ => {}
                    }
                } else {
                    state[u as usize] = 2;
                    stack.pop();
                }
            }
        }
        true
    }
}

/// A citation graph together with per-node metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct Corpus {
    pub graph: CitationGraph,
    pub meta: Vec<PaperMeta>,
}

impl Corpus {
    pub fn meta(&self, u: NodeIx) -> &PaperMeta {
        &self.meta[u as usize]
    }

    pub fn years(&self) -> Vec<Option<i32>> {
        self.meta.iter().map(|m| m.year).collect()
    }

    pub fn induced(&self, keep: &[NodeIx]) -> Corpus {
        Corpus {
            graph: self.graph.induced(keep),
            meta: keep.iter().map(|&u| self.meta[u as usize].clone()).collect(),
        }
    }

    /// Records reconstructed from the graph (references resolved to ids).
    pub fn record(&self, u: NodeIx) -> PaperRecord {
        let m = &self.meta[u as usize];
        PaperRecord {
            id: self.graph.id(u).clone(),
            year: m.year,
            title: m.title.clone(),
            keywords: m.keywords.clone(),
            references: self.graph.to_ids(self.graph.references_of(u)),
        }
    }
}
