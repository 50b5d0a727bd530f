//! Fixture-backed providers, budgeted fetching and pipeline orchestration.

mod fixture;
mod pipeline;
mod providers;
mod schedule;

pub use self::fixture::{BriefDocument, FixtureResult, FixtureSet, LocaleKeywordsFixture, SearchFixture, SourceLabel};
pub use self::pipeline::{
    block_on_clock, run_pipeline, run_pipeline_blocking, run_pipeline_with, ClockMode, LocaleKeywords,
    PipelineConfig, PipelineRun, SearchRecord, SearchStatus,
};
pub use self::providers::{FetchProvider, FixtureFetcher, FixtureSearch, ProviderError, SearchProvider};
pub use self::schedule::{
    schedule_fetch, AttemptResult, BudgetConfig, FetchAttempt, FetchOutcome, FetchRecord, FetchRequest,
};
