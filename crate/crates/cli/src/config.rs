//! Crawl configuration file (JSON).

use std::path::{Path, PathBuf};

use eventcrawl_core::crawl::CrawlMode;
use eventcrawl_core::relevance::CandidateSide;
use serde::Deserialize;
use url::Url;

fn default_weight() -> f64 {
    0.5
}

fn default_max_depth() -> u32 {
    5
}

fn default_repeats() -> u32 {
    10
}

fn default_split_fraction() -> f64 {
    0.6
}

fn default_mode() -> CrawlMode {
    CrawlMode::Live
}

fn default_concurrency() -> usize {
    1
}

fn default_timeout() -> u64 {
    30
}

fn default_frontier_cap() -> usize {
    100_000
}

fn default_true() -> bool {
    true
}

fn default_density() -> f64 {
    10.0
}

fn default_wiki_base() -> Url {
    Url::parse("https://en.wikipedia.org/").expect("valid default base")
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrawlConfig {
    /// Event name; labels the collection.
    pub name: String,
    /// Path to the reference page version's HTML.
    pub wiki_page: PathBuf,
    /// Path to the revision history dump (JSON lines).
    pub revisions: PathBuf,
    /// Base URI the page's hrefs resolve against.
    #[serde(default = "default_wiki_base")]
    pub wiki_base: Url,
    #[serde(default = "default_weight")]
    pub alpha: f64,
    #[serde(default = "default_weight")]
    pub beta: f64,
    #[serde(default = "default_max_depth")]
    pub max_depth: u32,
    #[serde(default = "default_repeats")]
    pub repeats: u32,
    #[serde(default = "default_split_fraction")]
    pub split_fraction: f64,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default = "default_mode")]
    pub mode: CrawlMode,
    #[serde(default = "default_concurrency")]
    pub fetch_concurrency: usize,
    #[serde(default = "default_timeout")]
    pub request_timeout_secs: u64,
    /// TF-IDF document-frequency table (TSV); absent means uniform weights.
    #[serde(default)]
    pub idf_table: Option<PathBuf>,
    /// Offline first-mention lookup map (JSON object URI -> ISO-8601).
    #[serde(default)]
    pub lookup_map: Option<PathBuf>,
    /// TimeGate/aggregator endpoint; required for archive crawls.
    #[serde(default)]
    pub timegate: Option<Url>,
    #[serde(default)]
    pub politeness_delay_ms: u64,
    /// Route all requests through this HTTP proxy.
    #[serde(default)]
    pub http_proxy: Option<String>,
    #[serde(default = "default_frontier_cap")]
    pub frontier_cap: usize,
    #[serde(default = "default_true")]
    pub evict_on_full: bool,
    #[serde(default = "default_density")]
    pub min_text_density: f64,
    #[serde(default = "default_true")]
    pub grace_cutoff: bool,
    #[serde(default)]
    pub candidate_side: CandidateSide,
}

impl CrawlConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
        let config: CrawlConfig = serde_json::from_str(&text)
            .map_err(|e| anyhow::anyhow!("invalid config {}: {e}", path.display()))?;
        if config.alpha < 0.0 || config.beta < 0.0 {
            anyhow::bail!("alpha and beta must be non-negative");
        }
        if (config.alpha + config.beta - 1.0).abs() > 1e-9 {
            log::warn!(
                "alpha + beta = {} (the usual configuration sums to 1)",
                config.alpha + config.beta
            );
        }
        if !(0.0..=1.0).contains(&config.split_fraction) || config.split_fraction == 0.0 {
            anyhow::bail!("split_fraction must be in (0, 1]");
        }
        Ok(config)
    }

    /// Resolves a path in the config relative to the config file's directory.
    pub fn resolve(&self, config_path: &Path, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            config_path.parent().unwrap_or(Path::new(".")).join(path)
        }
    }
}
