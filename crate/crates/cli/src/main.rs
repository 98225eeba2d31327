use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fashion_trends::pipeline::{run_pipeline, ConfigOverrides, PipelineError, RunConfig, Stage};

/// Fashion-theme sentiment, trend, forecast and causality pipeline.
#[derive(Debug, Parser)]
#[command(name = "fashion-trends", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Join the corpus with its scores and keep fashion-related records.
    Ingest,
    /// Tag themes and count hashtags.
    Themes,
    /// Compound scores and category distributions.
    Sentiment,
    /// Synthetic weeks and weekly theme series.
    Series,
    /// Additive decomposition of each theme series.
    Decompose,
    /// Trend direction, significance and confidence per theme.
    Trends,
    /// ARIMA grid search and 12-week forecasts.
    Forecast,
    /// Pairwise Granger tests and the theme network.
    Causality,
    /// Cross-validated sentiment classifier.
    Classify,
    /// Synthetic platform and brand panels.
    Panels,
    /// Summary and plot data from existing artifacts.
    Report,
    /// Every stage, or those named by --stages.
    All,
}

impl Command {
    fn stage(&self) -> Option<Stage> {
        Some(match self {
            Command::Ingest => Stage::Ingest,
            Command::Themes => Stage::Themes,
            Command::Sentiment => Stage::Sentiment,
            Command::Series => Stage::Series,
            Command::Decompose => Stage::Decompose,
            Command::Trends => Stage::Trends,
            Command::Forecast => Stage::Forecast,
            Command::Causality => Stage::Causality,
            Command::Classify => Stage::Classify,
            Command::Panels => Stage::Panels,
            Command::Report => Stage::Report,
            Command::All => return None,
        })
    }
}

#[derive(Debug, Args)]
struct Opts {
    /// Key/value config file; flags given on the command line win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Text corpus CSV with `id,text` columns.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Score CSV with `TWID,NEG,NEU,POS` columns.
    #[arg(long, global = true)]
    t4sa: Option<PathBuf>,
    /// Fashion keyword list, one per line.
    #[arg(long, global = true)]
    keywords: Option<PathBuf>,
    /// Theme taxonomy, `theme: kw1, kw2` per line.
    #[arg(long, global = true)]
    taxonomy: Option<PathBuf>,
    /// Real `platform,theme,score` data to aggregate instead of the synthetic panel.
    #[arg(long, global = true)]
    platform_data: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// `original` or `improved`.
    #[arg(long, global = true)]
    rubric: Option<String>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Comma-separated stages to run with `all`.
    #[arg(long, global = true)]
    stages: Option<String>,
    /// Comma-separated themes searched with seasonal terms.
    #[arg(long, global = true)]
    seasonal_themes: Option<String>,
    /// Also match keywords as substrings of hashtags.
    #[arg(long, global = true)]
    hashtag_substring: bool,
    /// Also decompose weekly mean sentiment.
    #[arg(long, global = true)]
    decompose_sentiment: bool,
    /// Downgrade trend confidence below this many records (0 disables).
    #[arg(long, global = true)]
    sparse_records: Option<u64>,
    #[arg(long, global = true)]
    folds: Option<usize>,
    #[arg(long, global = true)]
    n_trees: Option<usize>,
    /// Synthetic samples per platform/theme cell.
    #[arg(long, global = true)]
    panel_n: Option<usize>,
    /// Synthetic posts per brand.
    #[arg(long, global = true)]
    brand_n: Option<usize>,
}

impl Opts {
    fn overrides(&self) -> ConfigOverrides {
        ConfigOverrides {
            input: self.input.clone(),
            t4sa: self.t4sa.clone(),
            keywords: self.keywords.clone(),
            taxonomy: self.taxonomy.clone(),
            platform_data: self.platform_data.clone(),
            seed: self.seed,
            rubric: self.rubric.clone(),
            out: self.out.clone(),
            jobs: self.jobs,
            stages: self.stages.clone(),
            seasonal_themes: self.seasonal_themes.clone(),
            hashtag_substring: self.hashtag_substring.then_some(true),
            decompose_sentiment: self.decompose_sentiment.then_some(true),
            sparse_records: self.sparse_records,
            folds: self.folds,
            n_trees: self.n_trees,
            panel_n: self.panel_n,
            brand_n: self.brand_n,
        }
    }
}

fn config(cli: &Cli) -> Result<RunConfig, PipelineError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.opts.config {
        ConfigOverrides::load(path)?.apply(&mut cfg)?;
    }
    cli.opts.overrides().apply(&mut cfg)?;
    if let Some(stage) = cli.command.stage() {
        cfg.stages = vec![stage];
    }
    Ok(cfg)
}

fn report(e: &PipelineError) {
    eprintln!("error: {e}");
    let mut source = std::error::Error::source(e);
    while let Some(s) = source {
        eprintln!("  caused by: {s}");
        source = s.source();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = config(&cli).and_then(|cfg| run_pipeline(&cfg).map(|out| (cfg, out)));
    match result {
        Ok((cfg, out)) => {
            if let Some(table) = &out.trend_table {
                print!("{table}");
            }
            let stages: Vec<&str> = out.stages.iter().map(|s| s.as_str()).collect();
            eprintln!("ran {}; wrote {} files to {}", stages.join(", "), out.artifacts.len(), cfg.out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            report(&e);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
