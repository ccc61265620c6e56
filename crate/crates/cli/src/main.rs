//! `eventcrawl`: build event-centric web collections by focused crawling of
//! the live or archived web, then report on them.

mod config;
mod http;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::Context;
use clap::{Parser, Subcommand};
use eventcrawl_core::changepoint::RevisionHistory;
use eventcrawl_core::clock::SystemClock;
use eventcrawl_core::crawl::{Collection, CrawlMode, CrawlSettings, Crawler, RawBodySink};
use eventcrawl_core::date_extract::{DatetimeLookup, NullLookup, StubLookup};
use eventcrawl_core::event::{build_event_spec, EventBuildConfig, EventSources};
use eventcrawl_core::fetch::{Fetcher, PoliteFetcher};
use eventcrawl_core::memento::{MementoClient, MementoClientConfig};
use eventcrawl_core::relevance::{DensityExtractor, IdfTable};
use eventcrawl_core::report;

use config::CrawlConfig;
use http::ReqwestFetcher;

#[derive(Parser)]
#[command(
    name = "eventcrawl",
    version,
    about = "Focused crawling of the live and archived web into event collections"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the event model and run a focused crawl.
    Crawl {
        /// Crawl configuration (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Override the configured crawl mode (live|archive).
        #[arg(long)]
        mode: Option<String>,
        /// Output collection directory.
        #[arg(long)]
        out: PathBuf,
        /// Override the configured number of fetch workers.
        #[arg(long)]
        workers: Option<usize>,
        /// Override the configured RNG seed.
        #[arg(long = "seed-rng")]
        seed_rng: Option<u64>,
    },
    /// Emit plot data for a persisted collection.
    Report {
        /// Collection directory produced by `crawl`.
        #[arg(long)]
        collection: PathBuf,
        /// depth | accum | archives | summary
        #[arg(long)]
        kind: String,
        /// Accumulation axis: time | documents (accum only).
        #[arg(long, default_value = "time")]
        axis: String,
        /// Record subset: relevant | all (accum only).
        #[arg(long, default_value = "relevant")]
        subset: String,
        /// Output file (CSV, or JSON for summary).
        #[arg(long)]
        out: PathBuf,
    },
    /// Count overlapping relevant URIs between two collections.
    Compare { a: PathBuf, b: PathBuf },
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    if let Err(e) = run() {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Crawl { config, mode, out, workers, seed_rng } => {
            let mode = mode.map(|m| m.parse().map_err(anyhow::Error::msg)).transpose()?;
            run_crawl(&config, mode, &out, workers, seed_rng)
        }
        Command::Report { collection, kind, axis, subset, out } => {
            run_report(&collection, &kind, &axis, &subset, &out)
        }
        Command::Compare { a, b } => run_compare(&a, &b),
    }
}

fn run_crawl(
    config_path: &Path,
    mode_override: Option<CrawlMode>,
    out: &Path,
    workers_override: Option<usize>,
    seed_override: Option<u64>,
) -> anyhow::Result<()> {
    let config = CrawlConfig::load(config_path)?;
    let mode = mode_override.unwrap_or(config.mode);

    let wiki_path = config.resolve(config_path, &config.wiki_page);
    let wiki_html = std::fs::read_to_string(&wiki_path)
        .with_context(|| format!("cannot read wiki page {}", wiki_path.display()))?;
    let revisions_path = config.resolve(config_path, &config.revisions);
    let revisions_file = std::fs::File::open(&revisions_path)
        .with_context(|| format!("cannot read revisions {}", revisions_path.display()))?;
    let history =
        RevisionHistory::from_jsonl(config.name.clone(), std::io::BufReader::new(revisions_file))?;

    let idf = match &config.idf_table {
        Some(path) => {
            let path = config.resolve(config_path, path);
            IdfTable::from_tsv_path(&path)
                .with_context(|| format!("cannot load IDF table {}", path.display()))?
        }
        None => IdfTable::uniform(),
    };
    let lookup: Arc<dyn DatetimeLookup> = match &config.lookup_map {
        Some(path) => {
            let path = config.resolve(config_path, path);
            Arc::new(StubLookup::from_json_path(&path).map_err(|e| anyhow::anyhow!("{e}"))?)
        }
        None => Arc::new(NullLookup),
    };

    let timeout = std::time::Duration::from_secs(config.request_timeout_secs);
    let fetcher: Arc<dyn Fetcher> = Arc::new(PoliteFetcher::new(
        ReqwestFetcher::new(timeout, config.http_proxy.as_deref())?,
        std::time::Duration::from_millis(config.politeness_delay_ms),
    ));

    let memento = match (&config.timegate, mode) {
        (Some(timegate), _) => Some(MementoClient::new(
            Arc::clone(&fetcher),
            MementoClientConfig::new(timegate.clone()),
        )),
        (None, CrawlMode::Archive) => {
            anyhow::bail!("archive mode requires a `timegate` endpoint in the config")
        }
        (None, CrawlMode::Live) => None,
    };

    let extractor = Arc::new(DensityExtractor { min_density: config.min_text_density });
    let mut build = EventBuildConfig::new(config.name.clone());
    build.alpha = config.alpha;
    build.beta = config.beta;
    build.repeats = config.repeats;
    build.sample_fraction = config.split_fraction;
    build.rng_seed = seed_override.unwrap_or(config.rng_seed);
    build.max_depth = config.max_depth;
    build.mode = mode;
    build.candidate_side = config.candidate_side;
    build.grace_cutoff = config.grace_cutoff;

    log::info!("building the event model for {:?}", config.name);
    let clock = Arc::new(SystemClock);
    let spec = build_event_spec(
        &wiki_html,
        &config.wiki_base,
        &history,
        &build,
        &EventSources {
            fetcher: fetcher.as_ref(),
            memento: memento.as_ref(),
            idf: &idf,
            extractor: extractor.as_ref(),
            now: eventcrawl_core::clock::Clock::now(clock.as_ref()),
        },
    )?;
    match (spec.dt_cp, spec.wiki_revision_id) {
        (Some(dt_cp), revid) => log::info!(
            "change point at {dt_cp} (revision {})",
            revid.map_or_else(|| "unknown".to_string(), |r| r.to_string())
        ),
        (None, _) => log::info!("no significant change point; using the live page"),
    }
    log::info!(
        "{} seeds, th_cont {:.4}, th_temp {:.4}, th_aggr {:.4}",
        spec.seeds.len(),
        spec.th_cont,
        spec.th_temp,
        spec.th_aggr()
    );

    std::fs::create_dir_all(out)?;
    let crawler = Crawler {
        spec: &spec,
        mode,
        fetcher: Arc::clone(&fetcher),
        memento: memento.as_ref(),
        lookup,
        idf: &idf,
        extractor,
        clock,
        settings: CrawlSettings {
            workers: workers_override.unwrap_or(config.fetch_concurrency),
            frontier_cap: config.frontier_cap,
            evict_on_full: config.evict_on_full,
            max_redirects: 10,
        },
        observers: vec![Arc::new(RawBodySink::new(out)?)],
    };
    let collection = crawler.crawl()?;
    collection.save(out)?;

    let summary = report::summarize(&collection);
    println!(
        "{} crawl of {:?}: {} records, {} accepted, {} rejected, {} dismissed -> {}",
        collection.mode,
        collection.event.name,
        summary.records,
        summary.accepted,
        summary.rejected,
        summary.dismissed,
        out.display()
    );
    Ok(())
}

fn run_report(
    collection_dir: &Path,
    kind: &str,
    axis: &str,
    subset: &str,
    out: &Path,
) -> anyhow::Result<()> {
    let collection = Collection::load(collection_dir)?;
    let file =
        std::fs::File::create(out).with_context(|| format!("cannot create {}", out.display()))?;
    let mut writer = std::io::BufWriter::new(file);
    match kind {
        "depth" => {
            report::write_depth_csv(&report::depth_histogram(&collection), &mut writer)?;
        }
        "accum" => {
            let axis: report::Axis = axis.parse().map_err(anyhow::Error::msg)?;
            let subset: report::Subset = subset.parse().map_err(anyhow::Error::msg)?;
            let series = report::accumulated_relevance(&collection, axis, subset);
            let label = match axis {
                report::Axis::Time => "seconds",
                report::Axis::Documents => "documents",
            };
            report::write_series_csv(&series, label, &mut writer)?;
        }
        "archives" => {
            let contributions =
                report::archive_contributions(&collection).map_err(|e| anyhow::anyhow!("{e}"))?;
            report::write_contributions_csv(&contributions, &mut writer)?;
        }
        "summary" => {
            serde_json::to_writer_pretty(&mut writer, &report::summarize(&collection))?;
            use std::io::Write;
            writeln!(&mut writer)?;
        }
        other => {
            anyhow::bail!("unknown report kind {other:?} (expected depth|accum|archives|summary)")
        }
    }
    println!("wrote {kind} report to {}", out.display());
    Ok(())
}

fn run_compare(a: &Path, b: &Path) -> anyhow::Result<()> {
    let collection_a = Collection::load(a)?;
    let collection_b = Collection::load(b)?;
    let cmp = report::compare_collections(&collection_a, &collection_b);
    println!("relevant_a={} relevant_b={} overlap={}", cmp.relevant_a, cmp.relevant_b, cmp.overlap);
    Ok(())
}
