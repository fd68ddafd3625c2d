use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use citemap::pipeline::{self, artifacts, PipelineConfig, Stage, StageStatus};
use citemap::synth::{self, CorpusParams};
use citemap::{Error, Exec, PaperRecord};

struct Fixture {
    dir: tempfile::TempDir,
    corpus: PathBuf,
}

fn fixture(papers: usize) -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.jsonl");
    let records = synth::topic_corpus(&CorpusParams { papers, seed: 21, ..CorpusParams::default() });
    std::fs::write(&corpus, synth::to_jsonl(&records)).unwrap();
    Fixture { dir, corpus }
}

fn config(f: &Fixture, out: &str, extra: &str) -> PipelineConfig {
    let mut cfg = PipelineConfig { corpus: f.corpus.clone(), out: f.dir.path().join(out), ..PipelineConfig::default() };
    cfg.apply_text("selector = keyword:Payment\nsample_size = 120\nseed = 3\niterations = 300\nratio_min_occ = 5\ntfidf_min_occ = 3")
        .unwrap();
    cfg.apply_text(extra).unwrap();
    cfg
}

fn statuses(r: &pipeline::PipelineReport) -> BTreeMap<&'static str, StageStatus> {
    r.outcomes.iter().map(|o| (o.stage, o.status)).collect()
}

fn body(path: &Path) -> String {
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.starts_with("# citemap "), "{} lacks a header", path.display());
    text.split_once('\n').unwrap().1.to_owned()
}

#[test]
fn full_run_then_cached_rerun() {
    let f = fixture(400);
    let cfg = config(&f, "out", "baseline = true");
    let first = pipeline::cmd_pipeline(&cfg, Exec::Parallel).unwrap();
    assert!(first.outcomes.iter().all(|o| o.status == StageStatus::Built));
    for name in [
        artifacts::GRAPH,
        artifacts::SAMPLE,
        artifacts::SIMILARITY,
        artifacts::SIMILARITY_BIN,
        artifacts::BASELINE,
        artifacts::BASELINE_BIN,
        artifacts::DISTANCE_BIN,
        artifacts::EMBEDDING,
        artifacts::LABELS,
        artifacts::CLUSTERS,
        artifacts::RATIO,
        artifacts::CLUSTER_KEYWORDS,
        artifacts::PLOT_CLUSTERS,
        artifacts::PLOT_KEYWORDS,
    ] {
        assert!(cfg.out.join(name).exists(), "{name} missing");
    }
    assert!(!cfg.out.join(artifacts::LOCK).exists());
    let embedding = body(&cfg.out.join(artifacts::EMBEDDING));
    assert_eq!(embedding.lines().count(), 120);

    let second = pipeline::cmd_pipeline(&cfg, Exec::Parallel).unwrap();
    assert!(second.built().is_empty(), "rebuilt {:?}", second.built());
    assert!(second.ingest.unwrap().up_to_date);
    assert_eq!(second.clusters, first.clusters);
}

#[test]
fn changing_one_parameter_rebuilds_only_downstream() {
    let f = fixture(300);
    let cfg = config(&f, "out", "");
    pipeline::cmd_pipeline(&cfg, Exec::Parallel).unwrap();
    let before: BTreeMap<String, Vec<u8>> = std::fs::read_dir(&cfg.out)
        .unwrap()
        .map(|e| e.unwrap())
        .map(|e| (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap()))
        .collect();

    let mut changed = cfg.clone();
    changed.perplexity = 12.0;
    let r = pipeline::cmd_pipeline(&changed, Exec::Parallel).unwrap();
    let s = statuses(&r);
    for up in ["ingest", "sample", "similarity", "distance", "ratio"] {
        assert_eq!(s[up], StageStatus::UpToDate, "{up}");
    }
    for built in ["embed", "cluster", "tfidf", "plots"] {
        assert_eq!(s[built], StageStatus::Built, "{built}");
    }
    for name in [artifacts::SAMPLE, artifacts::SIMILARITY, artifacts::SIMILARITY_BIN, artifacts::DISTANCE_BIN, artifacts::RATIO] {
        assert_eq!(std::fs::read(changed.out.join(name)).unwrap(), before[name], "{name} changed");
    }
    assert_ne!(std::fs::read(changed.out.join(artifacts::EMBEDDING)).unwrap(), before[artifacts::EMBEDDING]);

    // a different horizon invalidates similarity and everything after it
    let mut deeper = changed.clone();
    deeper.horizon = 2;
    let s = statuses(&pipeline::run(&deeper, Stage::Similarity, Exec::Parallel).unwrap());
    assert_eq!(s["sample"], StageStatus::UpToDate);
    assert_eq!(s["similarity"], StageStatus::Built);
}

#[test]
fn horizon_one_matches_the_coupling_baseline_byte_for_byte() {
    let f = fixture(300);
    for (out, extra) in [("refs", "t = 1\nalpha = 0.3\nbaseline = true"), ("cits", "t = 1\nbaseline = true\ndirection = citations")] {
        let cfg = config(&f, out, extra);
        pipeline::run(&cfg, Stage::Similarity, Exec::Parallel).unwrap();
        let a = std::fs::read(cfg.out.join(artifacts::SIMILARITY_BIN)).unwrap();
        let b = std::fs::read(cfg.out.join(artifacts::BASELINE_BIN)).unwrap();
        assert_eq!(a, b, "{out}: binary matrices differ");
        assert_eq!(body(&cfg.out.join(artifacts::SIMILARITY)), body(&cfg.out.join(artifacts::BASELINE)));
    }
}

#[test]
fn same_inputs_in_two_directories_agree() {
    let f = fixture(250);
    let a = config(&f, "a", "");
    let b = config(&f, "b", "");
    pipeline::run(&a, Stage::Cluster, Exec::Sequential).unwrap();
    pipeline::run(&b, Stage::Cluster, Exec::Parallel).unwrap();
    for name in [artifacts::SAMPLE, artifacts::SIMILARITY, artifacts::EMBEDDING, artifacts::LABELS, artifacts::CLUSTERS] {
        assert_eq!(std::fs::read(a.out.join(name)).unwrap(), std::fs::read(b.out.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn ingest_summary_for_a_tiny_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("tiny.jsonl");
    let records = vec![
        PaperRecord::new("1").year(2001).cites(["2"]).keywords(["k"]),
        PaperRecord::new("2").year(2000).cites(["1", "404"]).keywords(["k"]),
        PaperRecord::new("3").year(2002).cites(["1", "2"]),
        PaperRecord::new("4").year(2003).cites(["3"]),
        PaperRecord::new("5").year(2004).cites(["4"]),
    ];
    std::fs::write(&corpus, synth::to_jsonl(&records)).unwrap();
    let cfg = PipelineConfig { corpus, out: dir.path().join("out"), ..PipelineConfig::default() };
    let s = pipeline::cmd_ingest(&cfg).unwrap();
    assert_eq!((s.nodes, s.edges), (5, 5));
    assert_eq!(s.build.dangling_dropped, 1);
    assert_eq!(s.preprocess.component_nodes, 5);
    assert_eq!(s.preprocess.cycles.removed.len(), 1);
    let text = s.to_string();
    assert!(text.contains("1 edge removed"), "{text}");
    assert!(text.contains("n=5 m=5"), "{text}");
    let again = pipeline::cmd_ingest(&cfg).unwrap();
    assert!(again.up_to_date);
    assert!(again.to_string().starts_with("cache up to date"));
    assert_eq!((again.nodes, again.edges), (5, 5));
}

#[test]
fn compare_reports_each_horizon() {
    let f = fixture(300);
    let cfg = config(&f, "out", "compare_t = 1,2,3");
    let rows = pipeline::cmd_compare(&cfg, Exec::Parallel).unwrap();
    assert_eq!(rows.iter().map(|r| r.horizon).collect::<Vec<_>>(), vec![1, 2, 3]);
    assert!(rows[2].nonzero_fraction >= rows[0].nonzero_fraction);
    assert!(rows[2].components <= rows[0].components);
    assert_eq!(body(&cfg.out.join(artifacts::COMPARE)).lines().count(), 3);
}

#[test]
fn failures_name_their_stage() {
    let f = fixture(100);
    let cfg = config(&f, "out", "selector = keyword:NoSuchTag");
    match pipeline::cmd_pipeline(&cfg, Exec::Parallel) {
        Err(Error::Stage { stage, source }) => {
            assert_eq!(stage, "sample");
            assert!(matches!(*source, Error::NoKeywordMatch(_)));
        }
        other => panic!("expected a sample-stage failure, got {other:?}"),
    }
    // the ingest artifacts of the failed run are kept
    assert!(cfg.out.join(artifacts::GRAPH).exists());
    assert!(!cfg.out.join(artifacts::LOCK).exists());

    let bad = PipelineConfig { corpus: f.dir.path().join("missing.jsonl"), out: f.dir.path().join("x"), ..PipelineConfig::default() };
    let err = pipeline::cmd_ingest(&bad).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    let invalid = config(&f, "y", "t = 12");
    assert_eq!(pipeline::cmd_pipeline(&invalid, Exec::Parallel).unwrap_err().exit_code(), 1);
}

#[test]
fn one_run_per_output_directory() {
    let f = fixture(100);
    let cfg = config(&f, "out", "");
    std::fs::create_dir_all(&cfg.out).unwrap();
    std::fs::write(cfg.out.join(artifacts::LOCK), "123\n").unwrap();
    let err = pipeline::cmd_ingest(&cfg).unwrap_err();
    assert!(err.to_string().contains("locked"), "{err}");
    std::fs::remove_file(cfg.out.join(artifacts::LOCK)).unwrap();
    pipeline::cmd_ingest(&cfg).unwrap();
}

#[test]
fn headers_carry_version_and_stage_key() {
    let f = fixture(200);
    let cfg = config(&f, "out", "");
    let r = pipeline::cmd_pipeline(&cfg, Exec::Parallel).unwrap();
    let keys: BTreeMap<_, _> = r.outcomes.iter().map(|o| (o.stage, o.key.clone())).collect();
    let head = |name: &str| std::fs::read_to_string(cfg.out.join(name)).unwrap().lines().next().unwrap().to_owned();
    let version = env!("CARGO_PKG_VERSION");
    assert!(head(artifacts::EMBEDDING).contains(&format!("citemap {version} key={}", keys["embed"])));
    assert!(head(artifacts::LABELS).contains(&keys["cluster"]));
    assert!(head(artifacts::SAMPLE).contains(&keys["sample"]));
    let svg = std::fs::read_to_string(cfg.out.join(artifacts::PLOT_CLUSTERS)).unwrap();
    assert!(svg.contains(&format!("key={}", keys["plots"])));
}
