//! End-to-end orchestration: ingest → sample → similarity → distance →
//! embedding → clusters → keywords → plots.
//!
//! Each stage has a key hashing its inputs' keys and its own parameters.
//! Keys are recorded in `manifest.tsv` in the output directory; a stage whose
//! key is unchanged and whose artifacts exist is skipped and its outputs are
//! read back from disk. Keys never include paths, so identical inputs in two
//! directories produce identical artifacts.

mod config;

use std::collections::BTreeMap;
use std::fmt;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use log::info;
use sha2::{Digest, Sha256};

pub use config::{Bandwidth, PipelineConfig};

use crate::coupling::SetMeasure;
use crate::error::{Error, Result};
use crate::graph::{self, BuildReport, Corpus, LoadReport, PaperId, PreprocessReport};
use crate::keywords::{self, ClusterKeywordTable};
use crate::mapping::{self, ClusterLabeling, Embedding, MeanShiftConfig};
use crate::matrix::{MatrixKind, PairwiseMatrix};
use crate::par::Exec;
use crate::plot::{self, PlotOptions};
use crate::rwr;
use crate::sampling::{self, Sample};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub(crate) const EMBED_SEED_OFFSET: u64 = 0x9e37_79b9_7f4a_7c15;
const PLOT_SEED_OFFSET: u64 = 0x6a09_e667_f3bc_c909;
const DEFAULT_HIGHLIGHTS: usize = 9;

pub mod artifacts {
    pub const GRAPH: &str = "graph.lmg";
    pub const SAMPLE: &str = "sample.tsv";
    pub const SIMILARITY: &str = "similarity.tsv";
    pub const SIMILARITY_BIN: &str = "similarity.lms";
    pub const BASELINE: &str = "baseline_bc.tsv";
    pub const BASELINE_BIN: &str = "baseline_bc.lms";
    pub const DISTANCE_BIN: &str = "distance.lms";
    pub const EMBEDDING: &str = "embedding.tsv";
    pub const LABELS: &str = "labels.tsv";
    pub const CLUSTERS: &str = "clusters.tsv";
    pub const RATIO: &str = "keywords_ratio.tsv";
    pub const CLUSTER_KEYWORDS: &str = "cluster_keywords.tsv";
    pub const PLOT_CLUSTERS: &str = "map_clusters.svg";
    pub const PLOT_KEYWORDS: &str = "map_keywords.svg";
    pub const COMPARE: &str = "compare.tsv";
    pub const MANIFEST: &str = "manifest.tsv";
    pub const LOCK: &str = ".lock";
}

/// Stages in execution order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Ingest,
    Sample,
    Similarity,
    Embed,
    Cluster,
    Keywords,
    Plots,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StageStatus {
    Built,
    UpToDate,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageOutcome {
    pub stage: &'static str,
    pub status: StageStatus,
    pub key: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct IngestSummary {
    pub load: LoadReport,
    pub build: BuildReport,
    pub preprocess: PreprocessReport,
    pub nodes: usize,
    pub edges: usize,
    pub up_to_date: bool,
}

impl fmt::Display for IngestSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.up_to_date {
            return write!(f, "cache up to date: n={} m={}", self.nodes, self.edges);
        }
        writeln!(
            f,
            "records={} skipped_lines={} dangling_references_dropped={}",
            self.load.records, self.load.skipped, self.build.dangling_dropped
        )?;
        writeln!(
            f,
            "largest_component={} of {} nodes",
            self.preprocess.component_nodes, self.preprocess.input_nodes
        )?;
        let removed = self.preprocess.cycles.removed.len();
        writeln!(
            f,
            "{removed} edge{} removed to break cycles",
            if removed == 1 { "" } else { "s" }
        )?;
        write!(f, "n={} m={}", self.nodes, self.edges)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompareRow {
    pub horizon: usize,
    pub nonzero_fraction: f64,
    pub components: usize,
}

#[derive(Clone, Debug, Default)]
pub struct PipelineReport {
    pub outcomes: Vec<StageOutcome>,
    pub ingest: Option<IngestSummary>,
    pub clusters: Option<usize>,
    pub out: PathBuf,
}

impl PipelineReport {
    pub fn built(&self) -> Vec<&'static str> {
        self.outcomes
            .iter()
            .filter(|o| o.status == StageStatus::Built)
            .map(|o| o.stage)
            .collect()
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Short content key over labelled parts.
fn key(parts: &[&str]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p.as_bytes());
    }
    hex(&h.finalize()[..12])
}

fn file_digest(path: &Path) -> Result<String> {
    let mut f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(hex(&h.finalize()[..16]))
}

struct Lock(PathBuf);

impl Lock {
    fn acquire(dir: &Path) -> Result<Lock> {
        let path = dir.join(artifacts::LOCK);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(Lock(path))
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(Error::InvalidData(format!(
                "{} is locked by another run (remove {} if stale)",
                dir.display(),
                path.display()
            ))),
            Err(e) => Err(Error::io(path, e)),
        }
    }
}

impl Drop for Lock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}

struct Workspace {
    dir: PathBuf,
    manifest: BTreeMap<String, String>,
    report: PipelineReport,
    _lock: Lock,
}

impl Workspace {
    fn open(dir: &Path) -> Result<Workspace> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let lock = Lock::acquire(dir)?;
        let mut manifest = BTreeMap::new();
        let mpath = dir.join(artifacts::MANIFEST);
        if let Ok(text) = fs::read_to_string(&mpath) {
            for line in text.lines().filter(|l| !l.starts_with('#')) {
                if let Some((k, v)) = line.split_once('\t') {
                    manifest.insert(k.to_owned(), v.to_owned());
                }
            }
        }
        Ok(Workspace {
            dir: dir.to_path_buf(),
            manifest,
            report: PipelineReport {
                out: dir.to_path_buf(),
                ..Default::default()
            },
            _lock: lock,
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn fresh(&self, stage: &str, key: &str, files: &[&str]) -> bool {
        self.manifest.get(stage).is_some_and(|k| k == key) && files.iter().all(|f| self.path(f).exists())
    }

    fn record(&mut self, stage: &'static str, key: &str, status: StageStatus) -> Result<()> {
        info!("{stage}: {status:?} ({key})");
        self.report.outcomes.push(StageOutcome {
            stage,
            status,
            key: key.to_owned(),
        });
        if status == StageStatus::UpToDate {
            return Ok(());
        }
        self.manifest.insert(stage.to_owned(), key.to_owned());
        let mut text = format!("# citemap {TOOL_VERSION}: stage\tkey\n");
        for (k, v) in &self.manifest {
            text.push_str(&format!("{k}\t{v}\n"));
        }
        let p = self.path(artifacts::MANIFEST);
        fs::write(&p, text).map_err(|e| Error::io(p, e))
    }

    /// Write through a temporary file so a crash never leaves a torn artifact.
    fn write(&self, name: &str, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
        let path = self.path(name);
        let tmp = self.path(&format!("{name}.tmp"));
        let file = File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        let mut w = BufWriter::new(file);
        f(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(&tmp, e))?;
        drop(w);
        fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))
    }

    fn write_table(
        &self,
        name: &str,
        key: &str,
        columns: &str,
        body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
    ) -> Result<()> {
        self.write(name, |w| {
            writeln!(w, "# citemap {TOOL_VERSION} key={key}: {columns}")?;
            body(w)
        })
    }
}

fn stage<T>(name: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        e @ Error::Stage { .. } => e,
        e => Error::Stage {
            stage: name,
            source: Box::new(e),
        },
    })
}

fn data_lines(path: &Path) -> Result<Vec<Vec<String>>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rows = Vec::new();
    for line in BufReader::new(f).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.starts_with('#') || line.is_empty() {
            continue;
        }
        rows.push(line.split('\t').map(str::to_owned).collect());
    }
    Ok(rows)
}

fn parse_f64(path: &Path, s: &str) -> Result<f64> {
    s.parse()
        .map_err(|_| Error::InvalidData(format!("{}: bad number `{s}`", path.display())))
}

fn read_embedding(path: &Path) -> Result<Embedding> {
    let mut ids = Vec::new();
    let mut points = Vec::new();
    for row in data_lines(path)? {
        if row.len() != 3 {
            return Err(Error::InvalidData(format!("{}: expected id, x, y", path.display())));
        }
        ids.push(PaperId(row[0].clone()));
        points.push([parse_f64(path, &row[1])?, parse_f64(path, &row[2])?]);
    }
    Ok(Embedding::from_points(ids, points))
}

fn read_labeling(labels: &Path, clusters: &Path) -> Result<ClusterLabeling> {
    let mut lab = Vec::new();
    for row in data_lines(labels)? {
        lab.push(
            row.get(1)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::InvalidData(format!("{}: bad label row", labels.display())))?,
        );
    }
    let mut modes = Vec::new();
    let mut sigma = f64::NAN;
    for row in data_lines(clusters)? {
        if row.len() != 5 {
            return Err(Error::InvalidData(format!("{}: bad cluster row", clusters.display())));
        }
        modes.push([parse_f64(clusters, &row[2])?, parse_f64(clusters, &row[3])?]);
        sigma = parse_f64(clusters, &row[4])?;
    }
    Ok(ClusterLabeling {
        labels: lab,
        modes,
        bandwidth: sigma,
    })
}

/// Load, index and preprocess the corpus, caching the graph snapshot.
pub fn cmd_ingest(cfg: &PipelineConfig) -> Result<IngestSummary> {
    cfg.validate()?;
    let mut ws = Workspace::open(&cfg.out)?;
    let (_, summary, _) = ingest(cfg, &mut ws, false)?;
    Ok(summary)
}

fn ingest(cfg: &PipelineConfig, ws: &mut Workspace, need_corpus: bool) -> Result<(Option<Corpus>, IngestSummary, String)> {
    stage("ingest", (|| {
        let schema = cfg.corpus_schema()?;
        let meta_digest = match &cfg.metadata {
            Some(m) if matches!(schema, graph::CorpusSchema::EdgeList { .. }) => file_digest(m)?,
            _ => String::new(),
        };
        let k = key(&["ingest", &cfg.schema, &file_digest(&cfg.corpus)?, &meta_digest]);
        if ws.fresh("ingest", &k, &[artifacts::GRAPH]) {
            ws.record("ingest", &k, StageStatus::UpToDate)?;
            let corpus = if need_corpus {
                Some(graph::read_snapshot(&ws.path(artifacts::GRAPH))?)
            } else {
                None
            };
            let (nodes, edges) = corpus
                .as_ref()
                .map_or((0, 0), |c| (c.graph.node_count(), c.graph.edge_count()));
            let mut summary = IngestSummary {
                up_to_date: true,
                nodes,
                edges,
                ..Default::default()
            };
            if corpus.is_none() {
                // header only: counts from the snapshot prefix
                let p = ws.path(artifacts::GRAPH);
                let mut f = File::open(&p).map_err(|e| Error::io(&p, e))?;
                let mut head = [0u8; 20];
                f.read_exact(&mut head).map_err(|e| Error::io(&p, e))?;
                summary.nodes = u64::from_le_bytes(head[4..12].try_into().unwrap()) as usize;
                summary.edges = u64::from_le_bytes(head[12..20].try_into().unwrap()) as usize;
            }
            ws.report.ingest = Some(summary.clone());
            return Ok((corpus, summary, k));
        }
        let (records, load) = graph::load_corpus(&cfg.corpus, &schema)?;
        let (raw, build) = graph::build_graph(records)?;
        let (corpus, preprocess) = raw.preprocess();
        drop(raw);
        graph::write_snapshot(&ws.path(artifacts::GRAPH), &corpus)?;
        let summary = IngestSummary {
            load,
            build,
            preprocess,
            nodes: corpus.graph.node_count(),
            edges: corpus.graph.edge_count(),
            up_to_date: false,
        };
        ws.record("ingest", &k, StageStatus::Built)?;
        ws.report.ingest = Some(summary.clone());
        Ok((Some(corpus), summary, k))
    })())
}

fn sample_stage(cfg: &PipelineConfig, ws: &mut Workspace, corpus: &Corpus, ingest_key: &str) -> Result<(Sample, String)> {
    stage("sample", (|| {
        let k = key(&[
            "sample",
            ingest_key,
            &cfg.selector.to_string(),
            &cfg.sample_size.to_string(),
            &cfg.seed.to_string(),
        ]);
        if ws.fresh("sample", &k, &[artifacts::SAMPLE]) {
            let p = ws.path(artifacts::SAMPLE);
            let f = File::open(&p).map_err(|e| Error::io(&p, e))?;
            let s = Sample::read(BufReader::new(f), corpus)?;
            ws.record("sample", &k, StageStatus::UpToDate)?;
            return Ok((s, k));
        }
        let s = sampling::draw(corpus, &cfg.selector, cfg.sample_size, cfg.seed)?;
        let extra = format!("\ttool=citemap {TOOL_VERSION}\tkey={k}");
        ws.write(artifacts::SAMPLE, |w| s.write(w, ingest_key, &extra))?;
        ws.record("sample", &k, StageStatus::Built)?;
        Ok((s, k))
    })())
}

fn matrix_stage(
    ws: &mut Workspace,
    name: &'static str,
    k: &str,
    files: (&str, &str),
    compute: impl FnOnce() -> Result<PairwiseMatrix>,
) -> Result<PairwiseMatrix> {
    if ws.fresh(name, k, &[files.0, files.1]) {
        let m = PairwiseMatrix::load_binary(&ws.path(files.1), MatrixKind::Similarity)?;
        ws.record(name, k, StageStatus::UpToDate)?;
        return Ok(m);
    }
    let m = compute()?;
    ws.write_table(files.0, k, "id_i\tid_j\tvalue", |w| m.write_triples(w))?;
    m.save_binary(&ws.path(files.1))?;
    ws.record(name, k, StageStatus::Built)?;
    Ok(m)
}

struct Run {
    corpus: Corpus,
    sample: Sample,
    sample_key: String,
}

/// Run the pipeline up to and including `until`.
pub fn run(cfg: &PipelineConfig, until: Stage, exec: Exec) -> Result<PipelineReport> {
    cfg.validate()?;
    let mut ws = Workspace::open(&cfg.out)?;
    let (corpus, _, ingest_key) = ingest(cfg, &mut ws, until > Stage::Ingest)?;
    if until == Stage::Ingest {
        return Ok(ws.report);
    }
    let corpus = corpus.expect("corpus loaded for later stages");
    let (sample, sample_key) = sample_stage(cfg, &mut ws, &corpus, &ingest_key)?;
    let run = Run {
        corpus,
        sample,
        sample_key,
    };
    if until > Stage::Sample {
        downstream(cfg, &mut ws, &run, until, exec)?;
    }
    Ok(ws.report)
}

fn downstream(cfg: &PipelineConfig, ws: &mut Workspace, run: &Run, until: Stage, exec: Exec) -> Result<()> {
    let g = &run.corpus.graph;
    let nodes = &run.sample.nodes;
    let walk = cfg.walk();

    let sim_key = key(&[
        "similarity",
        &run.sample_key,
        &walk.horizon.to_string(),
        &walk.decay.to_string(),
        &walk.direction.to_string(),
        &walk.aggregation.to_string(),
    ]);
    let sim = stage(
        "similarity",
        matrix_stage(ws, "similarity", &sim_key, (artifacts::SIMILARITY, artifacts::SIMILARITY_BIN), || {
            rwr::pairwise_similarity(g, nodes, &walk, exec)
        }),
    )?;
    if cfg.baseline {
        let k = key(&["baseline", &run.sample_key, &walk.direction.to_string()]);
        stage(
            "baseline",
            matrix_stage(ws, "baseline", &k, (artifacts::BASELINE, artifacts::BASELINE_BIN), || {
                rwr::pairwise_set_similarity(g, nodes, 1, SetMeasure::Cosine, walk.direction, exec)
            }),
        )?;
    }
    if until == Stage::Similarity {
        return Ok(());
    }

    let dist_key = key(&["distance", &sim_key, &cfg.epsilon.to_string()]);
    let emb_key = key(&[
        "embed",
        &dist_key,
        &cfg.perplexity.to_string(),
        &cfg.iterations.to_string(),
        &cfg.tsne().seed.to_string(),
    ]);
    let embedding = stage("embed", (|| {
        let distance = if ws.fresh("distance", &dist_key, &[artifacts::DISTANCE_BIN]) {
            ws.record("distance", &dist_key, StageStatus::UpToDate)?;
            None
        } else {
            let d = mapping::similarity_to_distance(&sim, cfg.epsilon)?;
            let p = ws.path(artifacts::DISTANCE_BIN);
            d.save_binary(&p)?;
            ws.record("distance", &dist_key, StageStatus::Built)?;
            Some(d)
        };
        if ws.fresh("embed", &emb_key, &[artifacts::EMBEDDING]) {
            let e = read_embedding(&ws.path(artifacts::EMBEDDING))?;
            ws.record("embed", &emb_key, StageStatus::UpToDate)?;
            return Ok(e);
        }
        let d = match distance {
            Some(d) => d,
            None => PairwiseMatrix::load_binary(&ws.path(artifacts::DISTANCE_BIN), MatrixKind::Distance)?,
        };
        let e = mapping::tsne_embed(&d, &cfg.tsne(), exec)?;
        info!("t-SNE final KL divergence {:.6}", e.kl_divergence);
        ws.write_table(artifacts::EMBEDDING, &emb_key, "id\tx\ty", |w| e.write_tsv(w))?;
        ws.record("embed", &emb_key, StageStatus::Built)?;
        Ok(e)
    })())?;
    if until == Stage::Embed {
        return Ok(());
    }

    let cl_key = key(&[
        "cluster",
        &emb_key,
        &cfg.bandwidth.to_string(),
        &format!("{:?}", cfg.bandwidth_reading),
    ]);
    let labeling = stage("cluster", (|| {
        if ws.fresh("cluster", &cl_key, &[artifacts::LABELS, artifacts::CLUSTERS]) {
            let l = read_labeling(&ws.path(artifacts::LABELS), &ws.path(artifacts::CLUSTERS))?;
            ws.record("cluster", &cl_key, StageStatus::UpToDate)?;
            return Ok(l);
        }
        let sigma = match cfg.bandwidth {
            Bandwidth::Fixed(s) => s,
            Bandwidth::Auto { k } => mapping::auto_bandwidth(&embedding.points, k, cfg.bandwidth_reading, exec)?,
        };
        let l = mapping::mean_shift(&embedding.points, sigma, &MeanShiftConfig::default(), exec)?;
        ws.write_table(artifacts::LABELS, &cl_key, "id\tcluster", |w| l.write_tsv(&embedding.ids, w))?;
        let sizes = l.sizes();
        ws.write_table(artifacts::CLUSTERS, &cl_key, "cluster\tsize\tmode_x\tmode_y\tsigma", |w| {
            for (c, m) in l.modes.iter().enumerate() {
                writeln!(w, "{c}\t{}\t{}\t{}\t{}", sizes[c], m[0], m[1], l.bandwidth)?;
            }
            Ok(())
        })?;
        ws.record("cluster", &cl_key, StageStatus::Built)?;
        Ok(l)
    })())?;
    ws.report.clusters = Some(labeling.k());
    if until == Stage::Cluster {
        return Ok(());
    }

    let exclude = match &run.sample.selector {
        sampling::Selector::Keyword(k) => Some(k.as_str()),
        sampling::Selector::Random => None,
    };
    let docs: Vec<&[String]> = nodes.iter().map(|&u| run.corpus.meta(u).keywords.as_slice()).collect();
    let tfidf_key = key(&["tfidf", &cl_key, &cfg.tfidf_min_occ.to_string()]);
    let table = stage("keywords", (|| {
        let ratio_key = key(&["ratio", &run.sample_key, &cfg.ratio_min_occ.to_string()]);
        if ws.fresh("ratio", &ratio_key, &[artifacts::RATIO]) {
            ws.record("ratio", &ratio_key, StageStatus::UpToDate)?;
        } else {
            let stats = keywords::rank_by_ratio(&run.corpus, nodes, cfg.ratio_min_occ, exclude);
            ws.write_table(artifacts::RATIO, &ratio_key, "keyword\tcount_local\tratio", |w| {
                keywords::write_ratio_report(&stats, w)
            })?;
            ws.record("ratio", &ratio_key, StageStatus::Built)?;
        }
        let table = keywords::cluster_tfidf(&labeling, &docs, cfg.tfidf_min_occ, exclude)?;
        if ws.fresh("tfidf", &tfidf_key, &[artifacts::CLUSTER_KEYWORDS]) {
            ws.record("tfidf", &tfidf_key, StageStatus::UpToDate)?;
        } else {
            let sizes = labeling.sizes();
            ws.write_table(
                artifacts::CLUSTER_KEYWORDS,
                &tfidf_key,
                "cluster\tsize\trank\tkeyword\ttfidf",
                |w| table.write_tsv(&sizes, w),
            )?;
            ws.record("tfidf", &tfidf_key, StageStatus::Built)?;
        }
        Ok(table)
    })())?;
    if until == Stage::Keywords {
        return Ok(());
    }

    stage("plots", (|| {
        let highlight = if cfg.highlight.is_empty() {
            default_highlights(&table)
        } else {
            cfg.highlight.clone()
        };
        let plot_key = key(&[
            "plots",
            &cl_key,
            &tfidf_key,
            &highlight.join("\u{1f}"),
            &cfg.jitter.map(|j| j.to_string()).unwrap_or_default(),
        ]);
        if ws.fresh("plots", &plot_key, &[artifacts::PLOT_CLUSTERS, artifacts::PLOT_KEYWORDS]) {
            return ws.record("plots", &plot_key, StageStatus::UpToDate);
        }
        let opts = PlotOptions {
            jitter: cfg.jitter,
            seed: cfg.seed.wrapping_add(PLOT_SEED_OFFSET),
            ..Default::default()
        };
        let comment = format!("<!-- citemap {TOOL_VERSION} key={plot_key} -->\n");
        let title = format!("{} papers, {} clusters, sigma={:.4}", embedding.len(), labeling.k(), labeling.bandwidth);
        let svg = plot::cluster_scatter(&embedding.points, &labeling.labels, &title, &opts);
        ws.write(artifacts::PLOT_CLUSTERS, |w| w.write_all(with_comment(&svg, &comment).as_bytes()))?;

        let present: Vec<String> = highlight
            .into_iter()
            .filter(|k| docs.iter().any(|d| d.iter().any(|x| x == k)))
            .collect();
        let ordered = if present.is_empty() {
            Vec::new()
        } else {
            keywords::colocation_order(&labeling, &docs, &present)?
        };
        let mut panels = Vec::with_capacity(ordered.len());
        for kw in ordered {
            let hits = keywords::keyword_overlay(&embedding, &docs, &kw)?;
            panels.push((kw, hits));
        }
        let svg = plot::keyword_grid(&embedding.points, &panels, 3, &opts);
        ws.write(artifacts::PLOT_KEYWORDS, |w| w.write_all(with_comment(&svg, &comment).as_bytes()))?;
        ws.record("plots", &plot_key, StageStatus::Built)
    })())
}

fn with_comment(svg: &str, comment: &str) -> String {
    match svg.find('\n') {
        Some(i) => format!("{}{comment}{}", &svg[..=i], &svg[i + 1..]),
        None => svg.to_owned(),
    }
}

/// Top keyword of each cluster (largest clusters first).
fn default_highlights(table: &ClusterKeywordTable) -> Vec<String> {
    table
        .clusters
        .iter()
        .filter_map(|c| c.first().map(|(k, _)| k.clone()))
        .take(DEFAULT_HIGHLIGHTS)
        .collect()
}

/// Run every stage.
pub fn cmd_pipeline(cfg: &PipelineConfig, exec: Exec) -> Result<PipelineReport> {
    run(cfg, Stage::Plots, exec)
}

/// Non-zero pair share and S>0 component count of the sample's similarity
/// matrix for each horizon in `cfg.compare_horizons`.
pub fn cmd_compare(cfg: &PipelineConfig, exec: Exec) -> Result<Vec<CompareRow>> {
    cfg.validate()?;
    let mut ws = Workspace::open(&cfg.out)?;
    let (corpus, _, ingest_key) = ingest(cfg, &mut ws, true)?;
    let corpus = corpus.expect("corpus requested");
    let (sample, sample_key) = sample_stage(cfg, &mut ws, &corpus, &ingest_key)?;
    let rows = stage("compare", (|| {
        let mut rows = Vec::new();
        for &t in &cfg.compare_horizons {
            let walk = rwr::WalkParams {
                horizon: t,
                ..cfg.walk()
            };
            let s = rwr::pairwise_similarity(&corpus.graph, &sample.nodes, &walk, exec)?;
            let (nonzero_fraction, components) = rwr::connectivity(&s);
            rows.push(CompareRow {
                horizon: t,
                nonzero_fraction,
                components,
            });
        }
        let k = key(&["compare", &sample_key, &format!("{:?}", cfg.compare_horizons), &cfg.decay.to_string()]);
        ws.write_table(artifacts::COMPARE, &k, "t\tnonzero_fraction\tcomponents", |w| {
            for r in &rows {
                writeln!(w, "{}\t{}\t{}", r.horizon, r.nonzero_fraction, r.components)?;
            }
            Ok(())
        })?;
        Ok(rows)
    })())?;
    Ok(rows)
}
