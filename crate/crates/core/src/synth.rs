//! Seeded synthetic citation data: uniform random DAGs, preferential
//! attachment citation DAGs, and topic-structured corpora with keywords.
//!
//! Node `i` only ever cites nodes `< i`, so every generated graph is acyclic.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{CitationGraph, NodeIx, PaperId, PaperRecord};

fn numbered(n: usize) -> Vec<PaperId> {
    (0..n).map(|i| PaperId(i.to_string())).collect()
}

/// Each node cites a uniform random subset of older nodes; out-degrees are
/// uniform on `0..=2*mean_out_degree` (capped by the number of older nodes).
pub fn random_dag(n: usize, mean_out_degree: f64, seed: u64) -> CitationGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    let max_deg = (2.0 * mean_out_degree).round() as usize;
    for i in 1..n {
        let deg = rng.random_range(0..=max_deg).min(i);
        let picks = rand::seq::index::sample(&mut rng, i, deg);
        edges.extend(picks.iter().map(|j| (i as NodeIx, j as NodeIx)));
    }
    CitationGraph::from_edges(numbered(n), &edges).expect("generated ids are unique")
}

/// Urn sampler: every node holds one ball plus one per citation received.
struct Urn {
    balls: Vec<NodeIx>,
}

impl Urn {
    /// `k` distinct nodes among the `nodes` already in the urn.
    fn pick(&self, rng: &mut ChaCha8Rng, k: usize, nodes: usize, into: &mut Vec<NodeIx>) {
        into.clear();
        let k = k.min(nodes);
        while into.len() < k {
            let b = *self.balls.choose(rng).expect("non-empty urn");
            if !into.contains(&b) {
                into.push(b);
            }
        }
    }
}

/// Preferential-attachment citation DAG: node `i` cites `refs_per_paper`
/// distinct older nodes chosen with probability proportional to
/// (citations received + 1).
pub fn preferential_attachment(n: usize, refs_per_paper: usize, seed: u64) -> CitationGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut urn = Urn {
        balls: Vec::with_capacity(n * (refs_per_paper + 1)),
    };
    let mut edges = Vec::with_capacity(n * refs_per_paper);
    let mut picks = Vec::new();
    for i in 0..n as NodeIx {
        if i > 0 {
            urn.pick(&mut rng, refs_per_paper, i as usize, &mut picks);
            for &j in &picks {
                edges.push((i, j));
            }
        }
        // new node's own ball goes in after it has chosen
        urn.balls.push(i);
        urn.balls.extend(picks.iter().copied());
        picks.clear();
    }
    CitationGraph::from_edges(numbered(n), &edges).expect("generated ids are unique")
}

#[derive(Clone, Debug)]
pub struct CorpusParams {
    pub papers: usize,
    pub refs_per_paper: usize,
    pub topics: usize,
    /// Probability that a reference stays within the citing paper's topic.
    pub topic_affinity: f64,
    /// Tag carried by this share of papers.
    pub field_keyword: String,
    pub field_share: f64,
    pub seed: u64,
}

impl Default for CorpusParams {
    fn default() -> Self {
        CorpusParams {
            papers: 500,
            refs_per_paper: 6,
            topics: 4,
            topic_affinity: 0.85,
            field_keyword: "Payment".into(),
            field_share: 0.6,
            seed: 1,
        }
    }
}

const TOPIC_WORDS: &[&[&str]] = &[
    &["Cryptography", "Blockchain", "Smart contract", "Digital signature", "Public-key cryptography"],
    &["Microeconomics", "Incentive", "Mechanism design", "Auction", "Game theory"],
    &["Database transaction", "Distributed database", "Concurrency control", "Two-phase commit", "Replication"],
    &["Mobile payment", "Near field communication", "Mobile device", "Usability", "User study"],
    &["Machine learning", "Fraud detection", "Anomaly detection", "Classifier", "Feature selection"],
    &["Cloud computing", "Service level", "Pricing", "Resource allocation", "Virtual machine"],
];

/// Topic-structured corpus: papers mostly cite older papers of their own
/// topic (preferentially by citation count) and carry that topic's tags
/// plus generic ones.
pub fn topic_corpus(p: &CorpusParams) -> Vec<PaperRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let topics = p.topics.clamp(1, TOPIC_WORDS.len());
    let mut urns: Vec<Vec<NodeIx>> = vec![Vec::new(); topics];
    let mut all: Vec<NodeIx> = Vec::new();
    let mut topic_of: Vec<usize> = Vec::with_capacity(p.papers);
    let mut records = Vec::with_capacity(p.papers);
    for i in 0..p.papers {
        let topic = rng.random_range(0..topics);
        let want = p.refs_per_paper.min(i);
        let mut refs: Vec<NodeIx> = Vec::with_capacity(want);
        let mut attempts = 0;
        while refs.len() < want && attempts < 50 * (want + 1) {
            attempts += 1;
            let pool = if rng.random_bool(p.topic_affinity) && !urns[topic].is_empty() {
                &urns[topic]
            } else {
                &all
            };
            let b = *pool.choose(&mut rng).expect("non-empty pool");
            if !refs.contains(&b) {
                refs.push(b);
            }
        }
        let year = 1990 + (i * 30 / p.papers.max(1)) as i32;
        let mut kws: Vec<String> = Vec::new();
        if rng.random_bool(p.field_share) {
            kws.push(p.field_keyword.clone());
        }
        let words = TOPIC_WORDS[topic];
        let own = rng.random_range(2..=3);
        for w in rand::seq::index::sample(&mut rng, words.len(), own) {
            kws.push(words[w].to_owned());
        }
        kws.push("Computer science".into());
        if rng.random_bool(0.4) {
            kws.push("Mathematics".into());
        }
        records.push(PaperRecord {
            id: PaperId(format!("P{i:05}")),
            year: Some(year),
            title: format!("Synthetic paper {i} on {}", words[0]),
            keywords: kws,
            references: refs.iter().map(|&r| PaperId(format!("P{r:05}"))).collect(),
        });
        let me = i as NodeIx;
        urns[topic].push(me);
        all.push(me);
        topic_of.push(topic);
        for &r in &refs {
            all.push(r);
            urns[topic_of[r as usize]].push(r);
        }
    }
    records
}

/// Records as JSON lines in the corpus input layout.
pub fn to_jsonl(records: &[PaperRecord]) -> String {
    let mut out = String::new();
    for r in records {
        let mut obj = serde_json::Map::new();
        obj.insert("id".into(), r.id.0.clone().into());
        obj.insert("title".into(), r.title.clone().into());
        if let Some(y) = r.year {
            obj.insert("year".into(), y.into());
        }
        obj.insert(
            "references".into(),
            r.references.iter().map(|x| serde_json::Value::from(x.0.clone())).collect(),
        );
        obj.insert(
            "fos".into(),
            r.keywords
                .iter()
                .map(|k| serde_json::json!({ "name": k, "w": 0.5 }))
                .collect(),
        );
        out.push_str(&serde_json::Value::Object(obj).to_string());
        out.push('\n');
    }
    out
}
