//! End-to-end pipeline over fixture-backed providers.
//!
//! normalize mix -> allocate keyword budget -> take keywords per locale ->
//! search all keywords concurrently under a deadline -> diverse selection ->
//! budgeted fetch -> metrics.

use std::future::Future;
use std::time::Duration;

use futures::future::join_all;
use serde::{Deserialize, Serialize};

use super::fixture::FixtureSet;
use super::providers::{FetchProvider, FixtureFetcher, FixtureSearch, SearchProvider};
use super::schedule::{schedule_fetch, BudgetConfig, FetchRecord, FetchRequest};
use crate::allocation::{allocate_locale_counts, normalize_locale_mix, AllocationVector, NormalizationConfig};
use crate::brief::ResearchBrief;
use crate::cascade::CascadeMaps;
use crate::diversity::{
    select_with_diversity, ProviderOrder, RankedResults, RelevanceProvider, ScoredRelevance,
    SelectionConfig, SelectionReport,
};
use crate::error::{Error, Result};
use crate::metrics::{compute_metrics, LabeledSource, MetricsReport};
use crate::model::Locale;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub selection: SelectionConfig,
    pub normalization: NormalizationConfig,
    #[serde(default)]
    pub budget: BudgetConfig,
    #[serde(default)]
    pub maps: CascadeMaps,
    #[serde(default)]
    pub seed: u64,
}

impl PipelineConfig {
    /// Defaults with `total` keywords and as many selectable sources. The
    /// locale cap is lowered to `total` when the budget is smaller than it.
    pub fn new(default_locale: Locale, total: u64) -> Self {
        let mut normalization = NormalizationConfig::new(default_locale, total);
        normalization.max_locales = normalization.max_locales.min(total.max(1) as usize);
        PipelineConfig {
            selection: SelectionConfig::new(total.max(1) as usize),
            normalization,
            budget: BudgetConfig::default(),
            maps: CascadeMaps::default(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.selection.validate()?;
        self.normalization.validate()?;
        self.budget.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocaleKeywords {
    pub locale: Locale,
    pub keywords: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchStatus {
    Ok,
    DeadlineExceeded,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchRecord {
    pub keyword: String,
    pub status: SearchStatus,
    pub result_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineRun {
    pub brief: ResearchBrief,
    pub allocation: AllocationVector,
    pub keywords: Vec<LocaleKeywords>,
    pub searches: Vec<SearchRecord>,
    pub selection: SelectionReport,
    pub fetched: Vec<FetchRecord>,
    pub metrics: MetricsReport,
}

/// Which clock drives simulated latency and timeouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClockMode {
    /// Paused runtime clock that jumps straight to the next timer.
    #[default]
    Virtual,
    Wall,
}

/// Drives a future to completion on a fresh single-threaded runtime.
pub fn block_on_clock<T>(mode: ClockMode, fut: impl Future<Output = T>) -> T {
    let runtime = tokio::runtime::Builder::new_current_thread()
        .enable_time()
        .start_paused(mode == ClockMode::Virtual)
        .build()
        .expect("failed to build tokio runtime");
    runtime.block_on(fut)
}

fn keywords_for(allocation: &AllocationVector, fixtures: &FixtureSet) -> Result<Vec<LocaleKeywords>> {
    allocation
        .counts
        .iter()
        .map(|slot| {
            let available = fixtures
                .locales
                .get(&slot.locale)
                .map(|l| l.keywords.as_slice())
                .unwrap_or_default();
            let wanted = slot.count as usize;
            if available.len() < wanted {
                return Err(Error::Fixture(format!(
                    "locale {} has {} keywords, allocation needs {}",
                    slot.locale,
                    available.len(),
                    wanted
                )));
            }
            Ok(LocaleKeywords {
                locale: slot.locale,
                keywords: available[..wanted].to_vec(),
            })
        })
        .collect()
}

async fn search_all<S: SearchProvider>(
    keywords: &[String],
    search: &S,
    deadline_ms: u64,
) -> (Vec<RankedResults>, Vec<SearchRecord>) {
    let deadline = Duration::from_millis(deadline_ms);
    let outcomes = join_all(
        keywords
            .iter()
            .map(|k| async move { (k, tokio::time::timeout(deadline, search.search(k)).await) }),
    )
    .await;

    outcomes
        .into_iter()
        .map(|(keyword, outcome)| {
            let (ranked, status) = match outcome {
                Ok(Ok(results)) => (RankedResults::new(keyword.clone(), results), SearchStatus::Ok),
                Ok(Err(err)) => {
                    log::warn!("search for {keyword:?} failed: {err}");
                    (RankedResults::new(keyword.clone(), Vec::new()), SearchStatus::Failed)
                }
                Err(_) => {
                    log::info!("search for {keyword:?} missed the {deadline_ms} ms deadline");
                    (RankedResults::timed_out(keyword.clone()), SearchStatus::DeadlineExceeded)
                }
            };
            let record = SearchRecord {
                keyword: keyword.clone(),
                status,
                result_count: ranked.results.len(),
            };
            (ranked, record)
        })
        .unzip()
}

fn relevance_from(fixtures: &FixtureSet) -> Option<ScoredRelevance> {
    let mut scores = ScoredRelevance::default();
    for (keyword, search) in &fixtures.searches {
        for result in &search.results {
            if let Some(score) = result.relevance_score {
                scores.insert(keyword, &result.url, score);
            }
        }
    }
    (!scores.is_empty()).then_some(scores)
}

/// Alternates for each selected source: the other results of the list it
/// was picked from, in list order, skipping anything already selected.
fn fetch_requests(ranked: &[RankedResults], selection: &SelectionReport, max_alternates: usize) -> Vec<FetchRequest> {
    let selected: std::collections::HashSet<&str> =
        selection.selected.iter().map(|s| s.url.as_str()).collect();
    ranked
        .iter()
        .zip(&selection.per_keyword_choice)
        .filter_map(|(list, choice)| {
            let url = choice.chosen_url.as_ref()?;
            let alternates = list
                .results
                .iter()
                .map(|s| &s.url)
                .filter(|u| !selected.contains(u.as_str()))
                .take(max_alternates)
                .cloned()
                .collect();
            Some(FetchRequest::new(url.clone(), alternates))
        })
        .collect()
}

/// Runs the pipeline with caller-supplied providers.
pub async fn run_pipeline_with<S: SearchProvider, F: FetchProvider>(
    brief: &ResearchBrief,
    fixtures: &FixtureSet,
    config: &PipelineConfig,
    search: &S,
    fetcher: &F,
) -> Result<PipelineRun> {
    config.validate()?;

    let mix = normalize_locale_mix(&brief.locale_mix.to_raw(), &config.normalization);
    let brief = ResearchBrief {
        locale_mix: mix,
        ..brief.clone()
    };
    let allocation = allocate_locale_counts(&brief.locale_mix, config.normalization.total_budget)?;
    let keywords = keywords_for(&allocation, fixtures)?;
    let flat: Vec<String> = keywords.iter().flat_map(|l| l.keywords.iter().cloned()).collect();

    let (ranked, searches) = search_all(&flat, search, config.selection.search_deadline_ms).await;

    let selection = match relevance_from(fixtures) {
        Some(scored) => select_with_diversity(&ranked, &config.selection, &scored),
        None => select_with_diversity(&ranked, &config.selection, &ProviderOrder as &dyn RelevanceProvider),
    };

    let requests = fetch_requests(&ranked, &selection, config.budget.max_alternates);
    let fetched = schedule_fetch(&requests, &config.budget, fetcher).await;

    let labeled = selection
        .selected
        .iter()
        .map(|s| LabeledSource::label(s.clone(), fixtures.is_first_party(&s.url), &config.maps))
        .collect::<Result<Vec<_>>>()?;
    let metrics = compute_metrics(&labeled)?;

    Ok(PipelineRun {
        brief,
        allocation,
        keywords,
        searches,
        selection,
        fetched,
        metrics,
    })
}

/// Runs the pipeline with providers backed by `fixtures`.
pub async fn run_pipeline(brief: &ResearchBrief, fixtures: &FixtureSet, config: &PipelineConfig) -> Result<PipelineRun> {
    let search = FixtureSearch::new(fixtures);
    let fetcher = FixtureFetcher::new(fixtures, config.seed);
    run_pipeline_with(brief, fixtures, config, &search, &fetcher).await
}

pub fn run_pipeline_blocking(
    brief: &ResearchBrief,
    fixtures: &FixtureSet,
    config: &PipelineConfig,
    clock: ClockMode,
) -> Result<PipelineRun> {
    block_on_clock(clock, run_pipeline(brief, fixtures, config))
}
