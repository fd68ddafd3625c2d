//! Pipeline configuration and its `key = value` file form.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{CorpusSchema, Direction};
use crate::mapping::{BandwidthReading, TsneConfig, DEFAULT_EPSILON};
use crate::rwr::{LevelAggregation, WalkParams, MAX_HORIZON};
use crate::sampling::Selector;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bandwidth {
    /// Average k-nearest-neighbor distance in the embedding.
    Auto { k: usize },
    Fixed(f64),
}

impl FromStr for Bandwidth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::param(format!("bandwidth must be `auto:<k>` or `fixed:<sigma>`, got `{s}`"));
        match s.split_once(':') {
            Some(("auto", k)) => Ok(Bandwidth::Auto {
                k: k.trim().parse().map_err(|_| bad())?,
            }),
            Some(("fixed", v)) => Ok(Bandwidth::Fixed(v.trim().parse().map_err(|_| bad())?)),
            _ => Err(bad()),
        }
    }
}

impl std::fmt::Display for Bandwidth {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Bandwidth::Auto { k } => write!(f, "auto:{k}"),
            Bandwidth::Fixed(s) => write!(f, "fixed:{s}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub corpus: PathBuf,
    pub schema: String,
    pub metadata: Option<PathBuf>,
    pub out: PathBuf,
    pub selector: Selector,
    pub sample_size: usize,
    pub seed: u64,
    pub horizon: usize,
    pub decay: f64,
    pub direction: Direction,
    pub aggregation: LevelAggregation,
    pub epsilon: f64,
    pub perplexity: f64,
    pub iterations: usize,
    pub bandwidth: Bandwidth,
    pub bandwidth_reading: BandwidthReading,
    pub ratio_min_occ: usize,
    pub tfidf_min_occ: usize,
    pub baseline: bool,
    pub highlight: Vec<String>,
    pub compare_horizons: Vec<usize>,
    pub jitter: Option<f64>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            corpus: PathBuf::new(),
            schema: "jsonl".into(),
            metadata: None,
            out: PathBuf::from("citemap-out"),
            selector: Selector::Random,
            sample_size: 4000,
            seed: 0,
            horizon: crate::rwr::DEFAULT_HORIZON,
            decay: 1.0,
            direction: Direction::References,
            aggregation: LevelAggregation::Sum,
            epsilon: DEFAULT_EPSILON,
            perplexity: 30.0,
            iterations: 1000,
            bandwidth: Bandwidth::Auto { k: 30 },
            bandwidth_reading: BandwidthReading::MeanOfNeighbors,
            ratio_min_occ: crate::keywords::DEFAULT_RATIO_MIN_OCC,
            tfidf_min_occ: crate::keywords::DEFAULT_TFIDF_MIN_OCC,
            baseline: false,
            highlight: Vec::new(),
            compare_horizons: vec![1, 2, 3],
            jitter: None,
        }
    }
}

fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::param(format!("`{key}`: cannot parse `{v}`")))
}

fn list(v: &str) -> Vec<String> {
    v.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_owned)
        .collect()
}

impl PipelineConfig {
    pub const KEYS: &'static [&'static str] = &[
        "corpus", "schema", "metadata", "out", "selector", "sample_size", "seed", "t", "alpha",
        "direction", "aggregation", "epsilon", "perplexity", "iterations", "bandwidth",
        "bandwidth_reading", "ratio_min_occ", "tfidf_min_occ", "baseline", "highlight",
        "compare_t", "jitter",
    ];

    /// Set one field from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "corpus" => self.corpus = PathBuf::from(v),
            "schema" => {
                CorpusSchema::from_str(v)?;
                self.schema = v.to_owned();
            }
            "metadata" => self.metadata = (!v.is_empty()).then(|| PathBuf::from(v)),
            "out" => self.out = PathBuf::from(v),
            "selector" => self.selector = v.parse()?,
            "sample_size" => self.sample_size = num(key, v)?,
            "seed" => self.seed = num(key, v)?,
            "t" => self.horizon = num(key, v)?,
            "alpha" => self.decay = num(key, v)?,
            "direction" => self.direction = v.parse()?,
            "aggregation" => self.aggregation = v.parse()?,
            "epsilon" => self.epsilon = num(key, v)?,
            "perplexity" => self.perplexity = num(key, v)?,
            "iterations" => self.iterations = num(key, v)?,
            "bandwidth" => self.bandwidth = v.parse()?,
            "bandwidth_reading" => self.bandwidth_reading = v.parse()?,
            "ratio_min_occ" => self.ratio_min_occ = num(key, v)?,
            "tfidf_min_occ" => self.tfidf_min_occ = num(key, v)?,
            "baseline" => self.baseline = num(key, v)?,
            "highlight" => self.highlight = list(v),
            "compare_t" => {
                self.compare_horizons = list(&v.replace(',', ";"))
                    .iter()
                    .map(|s| num(key, s))
                    .collect::<Result<_>>()?
            }
            "jitter" => self.jitter = if v.is_empty() { None } else { Some(num(key, v)?) },
            other => return Err(Error::param(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Parse `key = value` lines; `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = PipelineConfig::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::param(format!("config line {}: expected `key = value`", no + 1)))?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        PipelineConfig::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let opt = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let _ = writeln!(s, "corpus = {}", self.corpus.display());
        let _ = writeln!(s, "schema = {}", self.schema);
        let _ = writeln!(s, "metadata = {}", opt(&self.metadata));
        let _ = writeln!(s, "out = {}", self.out.display());
        let _ = writeln!(s, "selector = {}", self.selector);
        let _ = writeln!(s, "sample_size = {}", self.sample_size);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "t = {}", self.horizon);
        let _ = writeln!(s, "alpha = {}", self.decay);
        let _ = writeln!(s, "direction = {}", self.direction);
        let _ = writeln!(s, "aggregation = {}", self.aggregation);
        let _ = writeln!(s, "epsilon = {}", self.epsilon);
        let _ = writeln!(s, "perplexity = {}", self.perplexity);
        let _ = writeln!(s, "iterations = {}", self.iterations);
        let _ = writeln!(s, "bandwidth = {}", self.bandwidth);
        let _ = writeln!(
            s,
            "bandwidth_reading = {}",
            match self.bandwidth_reading {
                BandwidthReading::MeanOfNeighbors => "mean",
                BandwidthReading::KthNeighbor => "kth",
            }
        );
        let _ = writeln!(s, "ratio_min_occ = {}", self.ratio_min_occ);
        let _ = writeln!(s, "tfidf_min_occ = {}", self.tfidf_min_occ);
        let _ = writeln!(s, "baseline = {}", self.baseline);
        let _ = writeln!(s, "highlight = {}", self.highlight.join("; "));
        let ts: Vec<String> = self.compare_horizons.iter().map(|t| t.to_string()).collect();
        let _ = writeln!(s, "compare_t = {}", ts.join(","));
        let _ = writeln!(s, "jitter = {}", self.jitter.map(|j| j.to_string()).unwrap_or_default());
        s
    }

    pub fn corpus_schema(&self) -> Result<CorpusSchema> {
        Ok(match CorpusSchema::from_str(&self.schema)? {
            CorpusSchema::EdgeList { .. } => CorpusSchema::EdgeList {
                metadata: self.metadata.clone(),
            },
            s => s,
        })
    }

    pub fn walk(&self) -> WalkParams {
        WalkParams {
            horizon: self.horizon,
            decay: self.decay,
            aggregation: self.aggregation,
            direction: self.direction,
        }
    }

    pub fn tsne(&self) -> TsneConfig {
        TsneConfig {
            perplexity: self.perplexity,
            iterations: self.iterations,
            seed: self.seed.wrapping_add(super::EMBED_SEED_OFFSET),
            ..TsneConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.walk().validate()?;
        for &t in &self.compare_horizons {
            if !(1..=MAX_HORIZON).contains(&t) {
                return Err(Error::param(format!("compare_t entry {t} outside 1..={MAX_HORIZON}")));
            }
        }
        if self.sample_size < 2 {
            return Err(Error::param("sample_size must be >= 2"));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::param("epsilon must be positive"));
        }
        if self.perplexity.is_nan() || self.perplexity <= 1.0 {
            return Err(Error::param("perplexity must exceed 1"));
        }
        if self.iterations == 0 {
            return Err(Error::param("iterations must be >= 1"));
        }
        match self.bandwidth {
            Bandwidth::Auto { k: 0 } => return Err(Error::param("bandwidth k must be >= 1")),
            Bandwidth::Fixed(s) if !(s > 0.0 && s.is_finite()) => {
                return Err(Error::param("fixed bandwidth must be positive"))
            }
            _ => {}
        }
        if let Some(j) = self.jitter {
            if !(j >= 0.0 && j.is_finite()) {
                return Err(Error::param("jitter must be non-negative"));
            }
        }
        self.corpus_schema()?;
        Ok(())
    }
}
