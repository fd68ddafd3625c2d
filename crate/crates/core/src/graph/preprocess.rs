use std::collections::HashMap;

use super::{CitationGraph, Corpus, NodeIx, PaperId, PaperMeta, PaperRecord};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BuildReport {
    pub nodes: usize,
    /// References listed in the records, before dropping dangling ones.
    pub raw_references: usize,
    pub dangling_dropped: usize,
    pub edges: usize,
}

/// Index the records into a graph. References to ids absent from the
/// corpus are dropped and counted.
pub fn build_graph<I>(records: I) -> Result<(Corpus, BuildReport)>
where
    I: IntoIterator<Item = PaperRecord>,
{
    let records: Vec<PaperRecord> = records.into_iter().collect();
    let mut index: HashMap<&PaperId, NodeIx> = HashMap::with_capacity(records.len());
    for (i, r) in records.iter().enumerate() {
        if index.insert(&r.id, i as NodeIx).is_some() {
            return Err(Error::DuplicateId(r.id.0.clone()));
        }
    }
    let mut report = BuildReport {
        nodes: records.len(),
        ..Default::default()
    };
    let mut edges = Vec::new();
    for (i, r) in records.iter().enumerate() {
        for cited in &r.references {
            report.raw_references += 1;
            match index.get(cited) {
                Some(&j) => edges.push((i as NodeIx, j)),
                None => report.dangling_dropped += 1,
            }
        }
    }
    drop(index);
    let mut ids = Vec::with_capacity(records.len());
    let mut meta = Vec::with_capacity(records.len());
    for r in records {
        ids.push(r.id);
        meta.push(PaperMeta {
            year: r.year,
            title: r.title,
            keywords: r.keywords,
        });
    }
    let graph = CitationGraph::from_edges(ids, &edges)?;
    report.edges = graph.edge_count();
    Ok((Corpus { graph, meta }, report))
}

struct Dsu {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a as usize] < self.size[b as usize] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b as usize] = a;
        self.size[a as usize] += self.size[b as usize];
    }
}

/// Weakly connected components as a label per node plus the component count.
pub(crate) fn weak_components(n: usize, edges: impl Iterator<Item = (u32, u32)>) -> (Vec<u32>, usize) {
    let mut dsu = Dsu::new(n);
    for (a, b) in edges {
        dsu.union(a, b);
    }
    let mut label = vec![u32::MAX; n];
    let mut roots: HashMap<u32, u32> = HashMap::new();
    for u in 0..n as u32 {
        let r = dsu.find(u);
        let next = roots.len() as u32;
        label[u as usize] = *roots.entry(r).or_insert(next);
    }
    (label, roots.len())
}

impl CitationGraph {
    /// Nodes of the largest weakly connected component, sorted. Ties go to
    /// the component holding the smallest paper id.
    pub fn largest_component_nodes(&self) -> Vec<NodeIx> {
        let n = self.node_count();
        if n == 0 {
            return Vec::new();
        }
        let (label, k) = weak_components(n, self.edges());
        let mut size = vec![0usize; k];
        let mut min_id: Vec<Option<NodeIx>> = vec![None; k];
        for (u, &c) in label.iter().enumerate() {
            let c = c as usize;
            size[c] += 1;
            if min_id[c].is_none_or(|m| self.id(u as NodeIx) < self.id(m)) {
                min_id[c] = Some(u as NodeIx);
            }
        }
        let best = (0..k)
            .max_by(|&a, &b| {
                size[a].cmp(&size[b]).then_with(|| {
                    // smaller min id wins, so it must compare as "greater"
                    self.id(min_id[b].unwrap()).cmp(self.id(min_id[a].unwrap()))
                })
            })
            .unwrap();
        (0..n as NodeIx).filter(|&u| label[u as usize] as usize == best).collect()
    }

    /// Induced subgraph on the largest weakly connected component.
    pub fn largest_weakly_connected_component(&self) -> CitationGraph {
        self.induced(&self.largest_component_nodes())
    }
}

/// Iterative Tarjan; returns components with their member nodes.
fn strongly_connected(adj: &[Vec<u32>]) -> Vec<Vec<u32>> {
    let n = adj.len();
    const UNSEEN: u32 = u32::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut next = 0u32;
    let mut call: Vec<(u32, usize)> = Vec::new();
    for root in 0..n as u32 {
        if index[root as usize] != UNSEEN {
            continue;
        }
        call.push((root, 0));
        index[root as usize] = next;
        low[root as usize] = next;
        next += 1;
        stack.push(root);
        on_stack[root as usize] = true;
        while let Some(&mut (u, ref mut pos)) = call.last_mut() {
            let ui = u as usize;
            if *pos < adj[ui].len() {
                let v = adj[ui][*pos];
                *pos += 1;
                let vi = v as usize;
                if index[vi] == UNSEEN {
                    index[vi] = next;
                    low[vi] = next;
                    next += 1;
                    stack.push(v);
                    on_stack[vi] = true;
                    call.push((v, 0));
                } else if on_stack[vi] {
                    low[ui] = low[ui].min(index[vi]);
                }
            } else {
                call.pop();
                if let Some(&(p, _)) = call.last() {
                    low[p as usize] = low[p as usize].min(low[ui]);
                }
                if low[ui] == index[ui] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w as usize] = false;
                        comp.push(w);
                        if w == u {
                            break;
                        }
                    }
                    comps.push(comp);
                }
            }
        }
    }
    comps
}

fn cyclic_components(adj: &[Vec<u32>]) -> Vec<Vec<u32>> {
    strongly_connected(adj)
        .into_iter()
        .filter(|c| c.len() > 1 || adj[c[0] as usize].contains(&c[0]))
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CycleReport {
    /// Removed `(citing, cited)` edges, in removal order.
    pub removed: Vec<(NodeIx, NodeIx)>,
    /// How many of those went by the year rule (the rest by id order).
    pub by_year: usize,
}

/// Missing years order after every known year.
fn year_key(y: Option<i32>) -> (bool, i32) {
    (y.is_none(), y.unwrap_or(0))
}

/// Make the graph acyclic. Inside each strongly connected component every
/// edge pointing to a strictly newer paper is dropped; cycles that survive
/// lose their lexicographically largest `(citing id, cited id)` edge, one per
/// component per round, until none remain.
pub fn break_cycles(g: &CitationGraph, years: &[Option<i32>]) -> (CitationGraph, CycleReport) {
    assert_eq!(years.len(), g.node_count(), "one year slot per node");
    let n = g.node_count();
    let adj: Vec<Vec<u32>> = (0..n as u32).map(|u| g.references_of(u).to_vec()).collect();
    let comps = cyclic_components(&adj);
    let mut report = CycleReport::default();
    if comps.is_empty() {
        return (g.clone(), report);
    }

    // Work on the subgraph spanned by cyclic components only.
    let mut local = HashMap::new();
    let mut nodes = Vec::new();
    let mut comp_of = Vec::new();
    for (ci, c) in comps.iter().enumerate() {
        for &u in c {
            local.insert(u, nodes.len() as u32);
            nodes.push(u);
            comp_of.push(ci);
        }
    }
    let mut sub: Vec<Vec<u32>> = vec![Vec::new(); nodes.len()];
    for (lu, &u) in nodes.iter().enumerate() {
        for &v in &adj[u as usize] {
            if let Some(&lv) = local.get(&v) {
                if comp_of[lu] != comp_of[lv as usize] {
                    continue;
                }
                if year_key(years[v as usize]) > year_key(years[u as usize]) {
                    report.removed.push((u, v));
                } else {
                    sub[lu].push(lv);
                }
            }
        }
    }
    report.by_year = report.removed.len();

    loop {
        let cyc = cyclic_components(&sub);
        if cyc.is_empty() {
            break;
        }
        for c in cyc {
            let mut member = vec![false; sub.len()];
            for &x in &c {
                member[x as usize] = true;
            }
            let mut worst: Option<(u32, usize)> = None;
            for &lu in &c {
                for (pos, &lv) in sub[lu as usize].iter().enumerate() {
                    if !member[lv as usize] {
                        continue;
                    }
                    let key = (g.id(nodes[lu as usize]), g.id(nodes[lv as usize]));
                    let better = match worst {
                        None => true,
                        Some((wu, wp)) => {
                            let wv = sub[wu as usize][wp];
                            key > (g.id(nodes[wu as usize]), g.id(nodes[wv as usize]))
                        }
                    };
                    if better {
                        worst = Some((lu, pos));
                    }
                }
            }
            let (lu, pos) = worst.expect("cyclic component has an internal edge");
            let lv = sub[lu as usize].remove(pos);
            report.removed.push((nodes[lu as usize], nodes[lv as usize]));
        }
    }
    (g.without_edges(&report.removed), report)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PreprocessReport {
    pub input_nodes: usize,
    pub input_edges: usize,
    pub component_nodes: usize,
    pub component_edges: usize,
    pub cycles: CycleReport,
}

impl Corpus {
    /// Keep the largest weakly connected component, then break cycles.
    pub fn preprocess(&self) -> (Corpus, PreprocessReport) {
        let keep = self.graph.largest_component_nodes();
        let lwcc = self.induced(&keep);
        let (graph, cycles) = break_cycles(&lwcc.graph, &lwcc.years());
        let report = PreprocessReport {
            input_nodes: self.graph.node_count(),
            input_edges: self.graph.edge_count(),
            component_nodes: lwcc.graph.node_count(),
            component_edges: lwcc.graph.edge_count(),
            cycles,
        };
        (
            Corpus {
                graph,
                meta: lwcc.meta,
            },
            report,
        )
    }
}
