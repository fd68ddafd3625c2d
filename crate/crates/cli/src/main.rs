use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use citemap::pipeline::{self, PipelineConfig, PipelineReport, Stage, StageStatus};
use citemap::synth::{self, CorpusParams};
use citemap::{par, Error, Exec};

const THREADS_ENV: &str = "CITEMAP_THREADS";

/// Local maps of science from citation graphs via weighted deep
/// bibliographic coupling.
#[derive(Parser, Debug)]
#[command(name = "citemap", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Load the corpus, keep the largest component, break cycles, cache the graph.
    Ingest(Opts),
    /// Draw the paper sample.
    Sample(Opts),
    /// Pairwise similarity of the sample (and the coupling baseline with --baseline).
    Similarity(Opts),
    /// Distance inversion and t-SNE embedding.
    Embed(Opts),
    /// Mean-Shift clustering of the embedding.
    Cluster(Opts),
    /// Keyword ratio report and per-cluster TF-IDF table.
    Keywords(Opts),
    /// Every stage, including the two plots.
    Pipeline(Opts),
    /// Connectivity of the similarity graph for several horizons.
    Compare(Opts),
    /// Write a synthetic topic-structured corpus as JSON lines.
    Generate(GenerateOpts),
}

/// Flags mirror the config file keys and override them.
#[derive(Args, Debug, Default)]
struct Opts {
    /// `key = value` config file
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Extra `key=value` overrides, applied last
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    corpus: Option<String>,
    /// jsonl (also: dblp) or edgelist
    #[arg(long)]
    schema: Option<String>,
    /// Metadata table for edge-list corpora
    #[arg(long)]
    metadata: Option<String>,
    #[arg(short, long)]
    out: Option<String>,
    /// `keyword:<name>` or `random`
    #[arg(long)]
    selector: Option<String>,
    #[arg(short = 'n', long = "sample-size")]
    sample_size: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Walk horizon
    #[arg(short = 't', long = "t")]
    t: Option<String>,
    /// Level decay
    #[arg(long)]
    alpha: Option<String>,
    /// references or citations
    #[arg(long)]
    direction: Option<String>,
    /// sum or final
    #[arg(long)]
    aggregation: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long)]
    perplexity: Option<String>,
    #[arg(long)]
    iterations: Option<String>,
    /// `auto:<k>` or `fixed:<sigma>`
    #[arg(long)]
    bandwidth: Option<String>,
    /// mean or kth
    #[arg(long = "bandwidth-reading")]
    bandwidth_reading: Option<String>,
    #[arg(long = "ratio-min-occ")]
    ratio_min_occ: Option<String>,
    #[arg(long = "tfidf-min-occ")]
    tfidf_min_occ: Option<String>,
    /// Also write the plain coupling baseline matrix
    #[arg(long)]
    baseline: bool,
    /// `;`-separated keywords for the highlight grid
    #[arg(long)]
    highlight: Option<String>,
    /// Horizons for `compare`, comma separated
    #[arg(long = "compare-t")]
    compare_t: Option<String>,
    /// Jitter radius for coincident points in plots
    #[arg(long)]
    jitter: Option<String>,
    /// Run kernels on one thread
    #[arg(long)]
    sequential: bool,
}

impl Opts {
    fn config(&self) -> Result<PipelineConfig, Error> {
        let mut cfg = match &self.config {
            Some(p) => PipelineConfig::load(p)?,
            None => PipelineConfig::default(),
        };
        let flags = [
            ("corpus", &self.corpus),
            ("schema", &self.schema),
            ("metadata", &self.metadata),
            ("out", &self.out),
            ("selector", &self.selector),
            ("sample_size", &self.sample_size),
            ("seed", &self.seed),
            ("t", &self.t),
            ("alpha", &self.alpha),
            ("direction", &self.direction),
            ("aggregation", &self.aggregation),
            ("epsilon", &self.epsilon),
            ("perplexity", &self.perplexity),
            ("iterations", &self.iterations),
            ("bandwidth", &self.bandwidth),
            ("bandwidth_reading", &self.bandwidth_reading),
            ("ratio_min_occ", &self.ratio_min_occ),
            ("tfidf_min_occ", &self.tfidf_min_occ),
            ("highlight", &self.highlight),
            ("compare_t", &self.compare_t),
            ("jitter", &self.jitter),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                cfg.set(k, v)?;
            }
        }
        if self.baseline {
            cfg.baseline = true;
        }
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::param(format!("--set expects KEY=VALUE, got `{kv}`")))?;
            cfg.set(k.trim(), v)?;
        }
        if cfg.corpus.as_os_str().is_empty() {
            return Err(Error::param("no corpus given (use --corpus or a config file)"));
        }
        Ok(cfg)
    }

    fn exec(&self) -> Exec {
        if self.sequential {
            Exec::Sequential
        } else {
            Exec::Parallel
        }
    }
}

#[derive(Args, Debug)]
struct GenerateOpts {
    #[arg(long, default_value_t = 500)]
    papers: usize,
    #[arg(long, default_value_t = 6)]
    refs: usize,
    #[arg(long, default_value_t = 4)]
    topics: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file (stdout when omitted)
    #[arg(short, long)]
    out: Option<PathBuf>,
}

fn print_report(report: &PipelineReport) {
    if let Some(s) = &report.ingest {
        println!("{s}");
    }
    for o in &report.outcomes {
        let status = match o.status {
            StageStatus::Built => "built",
            StageStatus::UpToDate => "up to date",
        };
        println!("{}: {status}", o.stage);
    }
    if let Some(k) = report.clusters {
        println!("clusters: {k}");
    }
    println!("artifacts in {}", report.out.display());
}

fn stage_cmd(opts: &Opts, until: Stage) -> Result<(), Error> {
    let cfg = opts.config()?;
    let report = pipeline::run(&cfg, until, opts.exec())?;
    print_report(&report);
    Ok(())
}

fn dispatch(cmd: Command) -> Result<(), Error> {
    match cmd {
        Command::Ingest(o) => {
            let summary = pipeline::cmd_ingest(&o.config()?)?;
            println!("{summary}");
            Ok(())
        }
        Command::Sample(o) => stage_cmd(&o, Stage::Sample),
        Command::Similarity(o) => stage_cmd(&o, Stage::Similarity),
        Command::Embed(o) => stage_cmd(&o, Stage::Embed),
        Command::Cluster(o) => stage_cmd(&o, Stage::Cluster),
        Command::Keywords(o) => stage_cmd(&o, Stage::Keywords),
        Command::Pipeline(o) => stage_cmd(&o, Stage::Plots),
        Command::Compare(o) => {
            let rows = pipeline::cmd_compare(&o.config()?, o.exec())?;
            println!("t\tnonzero_fraction\tcomponents");
            for r in rows {
                println!("{}\t{:.6}\t{}", r.horizon, r.nonzero_fraction, r.components);
            }
            Ok(())
        }
        Command::Generate(g) => {
            let params = CorpusParams {
                papers: g.papers,
                refs_per_paper: g.refs,
                topics: g.topics,
                seed: g.seed,
                ..CorpusParams::default()
            };
            let text = synth::to_jsonl(&synth::topic_corpus(&params));
            match g.out {
                Some(p) => std::fs::write(&p, text).map_err(|e| Error::io(&p, e)),
                None => std::io::stdout()
                    .write_all(text.as_bytes())
                    .map_err(|e| Error::io("<stdout>", e)),
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Ok(v) = std::env::var(THREADS_ENV) {
        match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => {
                if !par::configure_threads(n) {
                    log::warn!("{THREADS_ENV}={n} ignored");
                }
            }
            _ => {
                eprintln!("error: {THREADS_ENV} must be a positive integer, got `{v}`");
                return ExitCode::from(1);
            }
        }
    }
    match std::panic::catch_unwind(|| dispatch(cli.command)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
        Err(_) => ExitCode::from(3),
    }
}
