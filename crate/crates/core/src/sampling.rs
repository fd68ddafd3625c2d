//! Selection of the paper subset fed to the quadratic similarity stage.
//!
//! Randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64`, driving a partial Fisher-Yates shuffle over the
//! candidates in corpus order. The selection order is the shuffle order.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Corpus, NodeIx, PaperId};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Selector {
    Keyword(String),
    Random,
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Selector::Keyword(k) => write!(f, "keyword:{k}"),
            Selector::Random => f.write_str("random"),
        }
    }
}

impl FromStr for Selector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            Some(("keyword", kw)) if !kw.trim().is_empty() => Ok(Selector::Keyword(kw.trim().to_owned())),
            None if s == "random" => Ok(Selector::Random),
            _ => Err(Error::param(format!(
                "selector must be `random` or `keyword:<tag>`, got `{s}`"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sample {
    pub nodes: Vec<NodeIx>,
    pub ids: Vec<PaperId>,
    pub selector: Selector,
    pub seed: u64,
    pub parent_size: usize,
}

impl Sample {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// One id per line after a `#` header naming selector, seed and corpus
    /// hash, followed by any `extra` header fields.
    pub fn write(&self, w: &mut impl Write, corpus_hash: &str, extra: &str) -> std::io::Result<()> {
        writeln!(
            w,
            "# selector={}\tseed={}\tparent={}\tcorpus={corpus_hash}{extra}",
            self.selector, self.seed, self.parent_size
        )?;
        for id in &self.ids {
            writeln!(w, "{id}")?;
        }
        Ok(())
    }

    /// Read a sample file back against `corpus`.
    pub fn read(r: impl BufRead, corpus: &Corpus) -> Result<Sample> {
        let mut selector = Selector::Random;
        let mut seed = 0;
        let mut nodes = Vec::new();
        for line in r.lines() {
            let line = line.map_err(|e| Error::InvalidData(e.to_string()))?;
            if let Some(header) = line.strip_prefix('#') {
                for field in header.trim().split('\t') {
                    match field.split_once('=') {
                        Some(("selector", v)) => selector = v.parse()?,
                        Some(("seed", v)) => {
                            seed = v.parse().map_err(|_| Error::InvalidData(format!("bad seed `{v}`")))?
                        }
                        _ => {}
                    }
                }
                continue;
            }
            let id = line.trim();
            if id.is_empty() {
                continue;
            }
            nodes.push(corpus.graph.index_of(id)?);
        }
        let mut sorted = nodes.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidData("duplicate id in sample file".into()));
        }
        Ok(Sample {
            ids: corpus.graph.to_ids(&nodes),
            nodes,
            selector,
            seed,
            parent_size: corpus.graph.node_count(),
        })
    }
}

/// First `n` entries of a seeded partial Fisher-Yates shuffle of `pool`.
fn choose(mut pool: Vec<NodeIx>, n: usize, seed: u64) -> Vec<NodeIx> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = n.min(pool.len());
    for i in 0..n {
        let j = rng.random_range(i..pool.len());
        pool.swap(i, j);
    }
    pool.truncate(n);
    pool
}

/// Uniform seeded n-subset of the papers tagged exactly `kw` (trimmed,
/// case-sensitive). Fewer matches than `n` yields all of them.
pub fn sample_by_keyword(corpus: &Corpus, kw: &str, n: usize, seed: u64) -> Result<Sample> {
    if n == 0 {
        return Err(Error::param("sample size must be >= 1"));
    }
    let kw = kw.trim();
    let pool: Vec<NodeIx> = (0..corpus.graph.node_count() as NodeIx)
        .filter(|&u| corpus.meta(u).has_keyword(kw))
        .collect();
    if pool.is_empty() {
        return Err(Error::NoKeywordMatch(kw.to_owned()));
    }
    if pool.len() < n {
        warn!("only {} papers carry `{kw}`; taking all of them", pool.len());
    }
    let nodes = choose(pool, n, seed);
    Ok(Sample {
        ids: corpus.graph.to_ids(&nodes),
        nodes,
        selector: Selector::Keyword(kw.to_owned()),
        seed,
        parent_size: corpus.graph.node_count(),
    })
}

/// Uniform seeded n-subset of all papers.
pub fn sample_random(corpus: &Corpus, n: usize, seed: u64) -> Result<Sample> {
    let total = corpus.graph.node_count();
    if n == 0 || n > total {
        return Err(Error::param(format!("sample size {n} not in 1..={total}")));
    }
    let nodes = choose((0..total as NodeIx).collect(), n, seed);
    Ok(Sample {
        ids: corpus.graph.to_ids(&nodes),
        nodes,
        selector: Selector::Random,
        seed,
        parent_size: total,
    })
}

pub fn draw(corpus: &Corpus, selector: &Selector, n: usize, seed: u64) -> Result<Sample> {
    match selector {
        Selector::Keyword(kw) => sample_by_keyword(corpus, kw, n, seed),
        Selector::Random => sample_random(corpus, n, seed),
    }
}
