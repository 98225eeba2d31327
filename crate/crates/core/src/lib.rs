//! Fashion-theme trend analytics over short social-media texts.
//!
//! The crate turns a corpus of texts with pre-computed sentiment triples into
//! weekly theme series, significance-tested trend labels, ARIMA forecasts,
//! Granger-causality networks, hashtag co-occurrence tables and a balanced
//! sentiment classifier. Every stochastic step is driven by an explicit seed.
//!
//! Module map:
//! - [`ingest`]: CSV loading, id join, text cleaning, hashtag extraction, keyword filtering
//! - [`themes`]: keyword taxonomy tagging, hashtag frequency and co-occurrence
//! - [`sentiment`]: compound scores and the two five-class rubrics
//! - [`chronos`]: synthetic weekly calendar, theme series, additive decomposition
//! - [`statcore`]: OLS, distribution tails, differencing, ADF
//! - [`trends`]: direction / significance / confidence labels
//! - [`forecast`]: CSS (S)ARIMA fitting, grid search and 12-week forecasts
//! - [`causality`]: multi-lag Granger tests and the theme network
//! - [`classify`]: TF-IDF, class-weighted random forest, stratified CV
//! - [`panels`]: synthetic platform and brand sentiment panels
//! - [`pipeline`]: stage orchestration and report bundle emission
//! - [`seeds`], [`sim`]: seed derivation and the simulators behind the statistical tests

pub mod causality;
pub mod chronos;
pub mod classify;
pub mod forecast;
pub mod ingest;
pub mod panels;
pub mod pipeline;
pub mod seeds;
pub mod sentiment;
pub mod sim;
pub mod statcore;
pub mod themes;
pub mod trends;

pub use chronos::{Decomposition, ThemeSeries, WeekIndex};
pub use ingest::{MergedRecord, RawText, SentimentTriple};
pub use sentiment::{Polarity, SentimentCategory};
pub use themes::ThemeId;
