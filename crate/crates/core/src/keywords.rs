//! Field-specific keyword identification.
//!
//! Two views: the local/global frequency ratio of a tag between a sample and
//! its corpus, and per-cluster TF-IDF where each cluster of the map plays the
//! role of a document. Frequencies are document frequencies: a paper carries
//! a tag at most once.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::Write;

use log::warn;

use crate::error::{Error, Result};
use crate::graph::{Corpus, NodeIx};
use crate::mapping::{ClusterLabeling, Embedding};

pub const DEFAULT_RATIO_MIN_OCC: usize = 100;
pub const DEFAULT_TFIDF_MIN_OCC: usize = 20;

/// Share of `docs` tagged `kw`. Empty input gives 0.
pub fn keyword_frequency(docs: &[&[String]], kw: &str) -> f64 {
    if docs.is_empty() {
        return 0.0;
    }
    let hits = docs.iter().filter(|d| d.iter().any(|k| k == kw)).count();
    hits as f64 / docs.len() as f64
}

fn doc_counts<'a>(docs: &[&'a [String]]) -> HashMap<&'a str, usize> {
    let mut counts = HashMap::new();
    let mut seen = HashSet::new();
    for d in docs {
        seen.clear();
        for k in d.iter() {
            if seen.insert(k.as_str()) {
                *counts.entry(k.as_str()).or_insert(0) += 1;
            }
        }
    }
    counts
}

#[derive(Clone, Debug, PartialEq)]
pub struct KeywordStats {
    pub keyword: String,
    pub count_local: usize,
    pub count_global: usize,
    pub r_local: f64,
    pub r_global: f64,
    pub ratio: f64,
}

/// Keywords with at least `min_occ` local occurrences, ranked by
/// r(kw, local) / r(kw, global) descending, then local count descending,
/// then keyword. `exclude` (typically the sampling tag) is left out.
pub fn rank_keywords(
    global: &[&[String]],
    local: &[&[String]],
    min_occ: usize,
    exclude: Option<&str>,
) -> Vec<KeywordStats> {
    if global.is_empty() || local.is_empty() {
        return Vec::new();
    }
    let g = doc_counts(global);
    let l = doc_counts(local);
    let (ng, nl) = (global.len() as f64, local.len() as f64);
    let mut out: Vec<KeywordStats> = l
        .iter()
        .filter(|&(k, &c)| c >= min_occ && Some(*k) != exclude)
        .filter_map(|(&k, &cl)| {
            let cg = *g.get(k)?;
            let (rl, rg) = (cl as f64 / nl, cg as f64 / ng);
            Some(KeywordStats {
                keyword: k.to_owned(),
                count_local: cl,
                count_global: cg,
                r_local: rl,
                r_global: rg,
                ratio: (cl as f64 * ng) / (nl * cg as f64),
            })
        })
        .collect();
    out.sort_by(|a, b| {
        b.ratio
            .total_cmp(&a.ratio)
            .then(b.count_local.cmp(&a.count_local))
            .then_with(|| a.keyword.cmp(&b.keyword))
    });
    out
}

/// [`rank_keywords`] with the whole corpus as V and `sample` as V′.
pub fn rank_by_ratio(
    corpus: &Corpus,
    sample: &[NodeIx],
    min_occ: usize,
    exclude: Option<&str>,
) -> Vec<KeywordStats> {
    let global: Vec<&[String]> = corpus.meta.iter().map(|m| m.keywords.as_slice()).collect();
    let local: Vec<&[String]> = sample.iter().map(|&u| corpus.meta(u).keywords.as_slice()).collect();
    rank_keywords(&global, &local, min_occ, exclude)
}

/// `keyword<TAB>count_local<TAB>ratio` rows.
pub fn write_ratio_report(stats: &[KeywordStats], w: &mut impl Write) -> std::io::Result<()> {
    for s in stats {
        writeln!(w, "{}\t{}\t{}", s.keyword, s.count_local, s.ratio)?;
    }
    Ok(())
}

/// Per cluster, each keyword's share of all keyword occurrences there.
pub fn cluster_term_frequencies(labels: &ClusterLabeling, docs: &[&[String]]) -> Vec<BTreeMap<String, f64>> {
    labels
        .members()
        .iter()
        .map(|m| {
            let cluster_docs: Vec<&[String]> = m.iter().map(|&i| docs[i]).collect();
            let counts = doc_counts(&cluster_docs);
            let total: usize = counts.values().sum();
            counts
                .into_iter()
                .map(|(k, c)| (k.to_owned(), c as f64 / total as f64))
                .collect()
        })
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ClusterKeywordTable {
    /// Assigned keywords of each cluster, by descending score.
    pub clusters: Vec<Vec<(String, f64)>>,
    /// Keyword → the single cluster it was assigned to.
    pub assignment: BTreeMap<String, usize>,
    /// TF-IDF of every surviving keyword in every cluster.
    pub scores: BTreeMap<String, Vec<f64>>,
}

impl ClusterKeywordTable {
    /// `cluster<TAB>size<TAB>rank<TAB>keyword<TAB>tfidf` rows, one section per cluster.
    pub fn write_tsv(&self, sizes: &[usize], w: &mut impl Write) -> std::io::Result<()> {
        for (c, list) in self.clusters.iter().enumerate() {
            for (rank, (k, s)) in list.iter().enumerate() {
                writeln!(w, "{c}\t{}\t{}\t{k}\t{s}", sizes.get(c).copied().unwrap_or(0), rank + 1)?;
            }
        }
        Ok(())
    }
}

/// TF-IDF per cluster with IDF = ln(k / df), df counting clusters that
/// contain the keyword. Keywords with fewer than `min_occ` occurrences over
/// the whole sample are dropped; each remaining keyword with a positive
/// score goes to its best cluster (lowest index on ties).
pub fn cluster_tfidf(
    labels: &ClusterLabeling,
    docs: &[&[String]],
    min_occ: usize,
    exclude: Option<&str>,
) -> Result<ClusterKeywordTable> {
    if docs.len() != labels.labels.len() {
        return Err(Error::InvalidData(format!(
            "{} keyword lists for {} labeled points",
            docs.len(),
            labels.labels.len()
        )));
    }
    let k = labels.k();
    let tf = cluster_term_frequencies(labels, docs);
    for (c, t) in tf.iter().enumerate() {
        if t.is_empty() {
            warn!("cluster {c} has no keywords; skipped");
        }
    }
    let totals = doc_counts(docs);
    let mut df: HashMap<&str, usize> = HashMap::new();
    for t in &tf {
        for kw in t.keys() {
            *df.entry(kw.as_str()).or_insert(0) += 1;
        }
    }
    let mut table = ClusterKeywordTable {
        clusters: vec![Vec::new(); k],
        ..Default::default()
    };
    let mut kws: Vec<&str> = totals
        .iter()
        .filter(|&(kw, &c)| c >= min_occ && Some(*kw) != exclude)
        .map(|(&kw, _)| kw)
        .collect();
    kws.sort_unstable();
    for kw in kws {
        let idf = (k as f64 / df[kw] as f64).ln();
        let row: Vec<f64> = tf.iter().map(|t| t.get(kw).map_or(0.0, |f| f * idf)).collect();
        let mut best: Option<usize> = None;
        for (c, &s) in row.iter().enumerate() {
            if s > 0.0 && best.is_none_or(|b| s > row[b]) {
                best = Some(c);
            }
        }
        if let Some(c) = best {
            table.assignment.insert(kw.to_owned(), c);
            table.clusters[c].push((kw.to_owned(), row[c]));
        }
        table.scores.insert(kw.to_owned(), row);
    }
    for list in &mut table.clusters {
        list.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    }
    Ok(table)
}

/// Indices of the embedded points whose paper carries `kw`.
pub fn keyword_overlay(embedding: &Embedding, docs: &[&[String]], kw: &str) -> Result<Vec<usize>> {
    if docs.len() != embedding.len() {
        return Err(Error::InvalidData("keyword lists do not match the embedding".into()));
    }
    let hits: Vec<usize> = (0..docs.len())
        .filter(|&i| docs[i].iter().any(|k| k == kw))
        .collect();
    if hits.is_empty() {
        return Err(Error::NoKeywordMatch(kw.to_owned()));
    }
    Ok(hits)
}

fn occupancy(labels: &ClusterLabeling, docs: &[&[String]], kw: &str) -> Vec<f64> {
    let mut v = vec![0.0; labels.k()];
    for (i, d) in docs.iter().enumerate() {
        if d.iter().any(|k| k == kw) {
            v[labels.labels[i]] += 1.0;
        }
    }
    v
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum();
    let nb: f64 = b.iter().map(|x| x * x).sum();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        (dot / (na * nb).sqrt()).min(1.0)
    }
}

/// Cosine between the two keywords' per-cluster document counts.
pub fn colocation_similarity(labels: &ClusterLabeling, docs: &[&[String]], a: &str, b: &str) -> f64 {
    cosine(&occupancy(labels, docs, a), &occupancy(labels, docs, b))
}

/// Order keywords for side-by-side display: start from the most frequent,
/// then repeatedly append the remaining keyword most co-located with the
/// last one placed.
pub fn colocation_order(labels: &ClusterLabeling, docs: &[&[String]], kws: &[String]) -> Result<Vec<String>> {
    let occ: Vec<Vec<f64>> = kws.iter().map(|k| occupancy(labels, docs, k)).collect();
    let freq: Vec<f64> = occ.iter().map(|o| o.iter().sum()).collect();
    if let Some(i) = freq.iter().position(|&f| f == 0.0) {
        return Err(Error::NoKeywordMatch(kws[i].clone()));
    }
    let mut left: Vec<usize> = (0..kws.len()).collect();
    let mut order: Vec<usize> = Vec::with_capacity(kws.len());
    let pick = |left: &[usize], key: &dyn Fn(usize) -> f64| -> usize {
        let mut best = 0;
        for p in 1..left.len() {
            let (a, b) = (left[p], left[best]);
            let better = key(a)
                .total_cmp(&key(b))
                .then(freq[a].total_cmp(&freq[b]))
                .then_with(|| kws[b].cmp(&kws[a]))
                .is_gt();
            if better {
                best = p;
            }
        }
        best
    };
    while !left.is_empty() {
        let p = match order.last() {
            None => pick(&left, &|i| freq[i]),
            Some(&last) => pick(&left, &|i| cosine(occ[last].as_slice(), occ[i].as_slice())),
        };
        order.push(left.remove(p));
    }
    Ok(order.into_iter().map(|i| kws[i].clone()).collect())
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;

    use super::*;

    fn kw(list: &[&str]) -> Vec<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    fn labeling(labels: Vec<usize>) -> ClusterLabeling {
        let k = labels.iter().max().map_or(0, |m| m + 1);
        ClusterLabeling {
            labels,
            modes: vec![[0.0; 2]; k],
            bandwidth: 1.0,
        }
    }

    #[test]
    fn frequency() {
        let docs: Vec<Vec<String>> = (0..100)
            .map(|i| if i < 10 { kw(&["a", "z"]) } else { kw(&["z"]) })
            .collect();
        let refs: Vec<&[String]> = docs.iter().map(|d| d.as_slice()).collect();
        assert_eq!(keyword_frequency(&refs, "a"), 0.1);
        assert_eq!(keyword_frequency(&refs, "z"), 1.0);
        assert_eq!(keyword_frequency(&refs, "q"), 0.0);
    }

    #[test]
    fn ratios() {
        // global: 1000 docs, "rare" on 10 and "common" on 500
        let global: Vec<Vec<String>> = (0..1000)
            .map(|i| {
                let mut v = Vec::new();
                if i < 10 {
                    v.push("rare".to_string());
                }
                if i % 2 == 0 {
                    v.push("common".to_string());
                }
                v
            })
            .collect();
        // local: the first 100, so rare = 10/100 vs 10/1000 and common = 50/100 vs 500/1000
        let g: Vec<&[String]> = global.iter().map(|d| d.as_slice()).collect();
        let l: Vec<&[String]> = g[..100].to_vec();
        let stats = rank_keywords(&g, &l, 1, None);
        assert_eq!(stats[0].keyword, "rare");
        assert_eq!(stats[0].ratio, 10.0);
        assert_eq!(stats[1].ratio, 1.0);
        assert!(rank_keywords(&g, &l, 11, None).iter().all(|s| s.keyword != "rare"));
        assert!(rank_keywords(&g, &l, 1, Some("rare")).iter().all(|s| s.keyword != "rare"));
    }

    #[test]
    fn keyword_everywhere_scores_zero() {
        let docs = [kw(&["all", "x"]), kw(&["all", "y"]), kw(&["all"])];
        let refs: Vec<&[String]> = docs.iter().map(|d| d.as_slice()).collect();
        let t = cluster_tfidf(&labeling(vec![0, 1, 2]), &refs, 1, None).unwrap();
        assert_eq!(t.scores["all"], vec![0.0; 3]);
        assert!(!t.assignment.contains_key("all"));
        assert_eq!(t.assignment["x"], 0);
    }

    #[test]
    fn confined_keyword() {
        // k = 4, "solo" only in cluster 2 whose docs carry solo + w: TF = 1/2
        let docs = [kw(&["a"]), kw(&["b"]), kw(&["solo", "w"]), kw(&["c"])];
        let refs: Vec<&[String]> = docs.iter().map(|d| d.as_slice()).collect();
        let t = cluster_tfidf(&labeling(vec![0, 1, 2, 3]), &refs, 1, None).unwrap();
        assert_relative_eq!(t.scores["solo"][2], 0.5 * 4f64.ln(), epsilon = 1e-15);
        assert_eq!(t.assignment["solo"], 2);
    }

    #[test]
    fn overlay_and_colocation() {
        let docs = [kw(&["p", "q"]), kw(&["p", "q"]), kw(&["r"]), kw(&["r", "s"])];
        let refs: Vec<&[String]> = docs.iter().map(|d| d.as_slice()).collect();
        let emb = Embedding::from_points(
            (0..4).map(|i| i.to_string().into()).collect(),
            vec![[0.0; 2]; 4],
        );
        assert_eq!(keyword_overlay(&emb, &refs, "s").unwrap(), vec![3]);
        assert!(keyword_overlay(&emb, &refs, "nope").is_err());
        let lab = labeling(vec![0, 0, 1, 1]);
        assert_eq!(colocation_similarity(&lab, &refs, "p", "q"), 1.0);
        assert_eq!(colocation_similarity(&lab, &refs, "p", "r"), 0.0);
        let order = colocation_order(&lab, &refs, &kw(&["s", "r", "q", "p"])).unwrap();
        assert_eq!(order, ["p", "q", "r", "s"]);
    }
}
