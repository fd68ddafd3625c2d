//! First-order and k-order bibliographic / co-citation coupling with set
//! cosine and Jaccard scoring.
//!
//! Sets are sorted, duplicate-free node-index slices; intersections are
//! linear merges.

use std::cmp::Ordering;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{CitationGraph, Direction, NodeIx};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CouplingKind {
    Bibliographic,
    Cocitation,
}

impl CouplingKind {
    /// Direction of the first hop (towards the shared items).
    fn outward(self) -> Direction {
        match self {
            CouplingKind::Bibliographic => Direction::References,
            CouplingKind::Cocitation => Direction::Citations,
        }
    }
}

/// Papers coupled with `source` at order `order`. Never contains the source.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoupledSet {
    pub source: NodeIx,
    pub partners: Vec<NodeIx>,
    pub order: usize,
    pub kind: CouplingKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SetMeasure {
    #[default]
    Cosine,
    Jaccard,
}

impl FromStr for SetMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cosine" => Ok(SetMeasure::Cosine),
            "jaccard" => Ok(SetMeasure::Jaccard),
            other => Err(Error::param(format!("unknown measure `{other}`"))),
        }
    }
}

/// |A ∩ B| for sorted, duplicate-free slices.
pub fn intersection_size(a: &[NodeIx], b: &[NodeIx]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// |A∩B| / sqrt(|A|·|B|), 0 when either set is empty.
pub fn cosine_sim(a: &[NodeIx], b: &[NodeIx]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let inter = intersection_size(a, b) as f64;
    inter / (a.len() as f64 * b.len() as f64).sqrt()
}

/// |A∩B| / |A∪B|, 0 when both are empty.
pub fn jaccard_sim(a: &[NodeIx], b: &[NodeIx]) -> f64 {
    let inter = intersection_size(a, b);
    let union = a.len() + b.len() - inter;
    if union == 0 {
        return 0.0;
    }
    inter as f64 / union as f64
}

fn coupled(g: &CitationGraph, a: NodeIx, k: usize, kind: CouplingKind) -> Result<CoupledSet> {
    let out = kind.outward();
    let mut partners = Vec::new();
    for b in g.extended(a, k, out)? {
        partners.extend(g.extended(b, k, out.reverse())?);
    }
    partners.sort_unstable();
    partners.dedup();
    partners.retain(|&p| p != a);
    Ok(CoupledSet {
        source: a,
        partners,
        order: k,
        kind,
    })
}

/// BC^k(a): union of C^k(b) over b in R^k(a), minus a.
pub fn bc_set(g: &CitationGraph, a: NodeIx, k: usize) -> Result<CoupledSet> {
    coupled(g, a, k, CouplingKind::Bibliographic)
}

/// CC^k(a): union of R^k(b) over b in C^k(a), minus a.
pub fn cc_set(g: &CitationGraph, a: NodeIx, k: usize) -> Result<CoupledSet> {
    coupled(g, a, k, CouplingKind::Cocitation)
}

pub fn set_similarity(a: &[NodeIx], b: &[NodeIx], measure: SetMeasure) -> f64 {
    match measure {
        SetMeasure::Cosine => cosine_sim(a, b),
        SetMeasure::Jaccard => jaccard_sim(a, b),
    }
}

/// `measure` applied to R^k(a) and R^k(b).
pub fn bc_similarity(
    g: &CitationGraph,
    a: NodeIx,
    b: NodeIx,
    k: usize,
    measure: SetMeasure,
) -> Result<f64> {
    let ra = g.extended(a, k, Direction::References)?;
    let rb = g.extended(b, k, Direction::References)?;
    Ok(set_similarity(&ra, &rb, measure))
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::graph::tests::graph;

    #[test]
    fn set_measures() {
        let (xy, yz) = ([1, 2], [2, 3]);
        assert_eq!(cosine_sim(&xy, &xy), 1.0);
        assert_eq!(cosine_sim(&xy, &yz), 0.5);
        assert_eq!(cosine_sim(&[1], &[2]), 0.0);
        assert_eq!(cosine_sim(&[], &[2]), 0.0);
        assert_eq!(jaccard_sim(&xy, &xy), 1.0);
        assert_eq!(jaccard_sim(&xy, &yz), 1.0 / 3.0);
        assert_eq!(jaccard_sim(&[], &[]), 0.0);
    }

    #[test]
    fn bc_sets() {
        // a=0, b=1 -> x=2
        let g = graph(4, &[(0, 2), (1, 2)]);
        assert_eq!(bc_set(&g, 0, 1).unwrap().partners, vec![1]);
        assert!(bc_set(&g, 3, 1).unwrap().partners.is_empty());
        assert!(bc_set(&g, 9, 1).is_err());

        // a=0 -> {b=1, c=2}, e=3 -> b
        let g = graph(4, &[(0, 1), (0, 2), (3, 1)]);
        assert_eq!(bc_set(&g, 0, 1).unwrap().partners, vec![3]);
    }

    #[test]
    fn cc_sets() {
        // x=2 cites a=0 and b=1
        let g = graph(3, &[(2, 0), (2, 1)]);
        assert_eq!(cc_set(&g, 0, 1).unwrap().partners, vec![1]);
        // never cited
        assert!(cc_set(&g, 2, 1).unwrap().partners.is_empty());
        let rev = graph(4, &[(1, 0), (2, 0), (1, 3)]);
        assert_eq!(cc_set(&rev, 0, 1).unwrap().partners, vec![3]);
    }

    #[test]
    fn bc_similarity_examples() {
        let g = graph(3, &[(0, 2), (1, 2)]);
        assert_eq!(bc_similarity(&g, 0, 1, 1, SetMeasure::Cosine).unwrap(), 1.0);
        // a -> {x, y}, b -> {y, z}
        let g = graph(5, &[(0, 2), (0, 3), (1, 3), (1, 4)]);
        assert_eq!(bc_similarity(&g, 0, 1, 1, SetMeasure::Cosine).unwrap(), 0.5);
    }

    fn sorted_set() -> impl Strategy<Value = Vec<u32>> {
        proptest::collection::btree_set(0u32..40, 0..20).prop_map(|s| s.into_iter().collect())
    }

    proptest! {
        #[test]
        fn jaccard_never_exceeds_cosine(a in sorted_set(), b in sorted_set()) {
            let (j, c) = (jaccard_sim(&a, &b), cosine_sim(&a, &b));
            prop_assert!(j <= c + 1e-15);
            prop_assert!((0.0..=1.0).contains(&j) && (0.0..=1.0).contains(&c));
            prop_assert_eq!(c, cosine_sim(&b, &a));
            prop_assert_eq!(c > 0.0, intersection_size(&a, &b) > 0);
        }
    }
}
