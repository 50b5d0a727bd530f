//! Domain-diverse source selection across keyword-ranked result lists.
//!
//! One source is taken per keyword, in keyword order. The relevance-top
//! candidate is replaced by the next unused URL when its URL was already
//! taken, and by the next candidate whose registrable domain is still under
//! the per-domain allowance `kappa` when its domain is saturated. A keyword
//! with no admissible candidate contributes nothing. Selection stops once
//! `max_sources` sources are held.
//!
//! Domain counts live in a hash map, so the saturation check is O(1) and the
//! whole pass is O(|K| * R) candidate examinations.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::model::{domain_of, Source};

/// Results for one keyword, most relevant first as returned by the provider.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankedResults {
    pub keyword: String,
    pub results: Vec<Source>,
    /// Set when the search missed its deadline; `results` is then empty.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub timed_out: bool,
}

impl RankedResults {
    pub fn new(keyword: impl Into<String>, results: Vec<Source>) -> Self {
        RankedResults {
            keyword: keyword.into(),
            results,
            timed_out: false,
        }
    }

    pub fn timed_out(keyword: impl Into<String>) -> Self {
        RankedResults {
            keyword: keyword.into(),
            results: Vec::new(),
            timed_out: true,
        }
    }

    /// Builds a list from URLs, assigning ranks by position.
    pub fn from_urls<S: AsRef<str>>(keyword: impl Into<String>, urls: &[S]) -> Self {
        let results = urls
            .iter()
            .enumerate()
            .map(|(rank, url)| Source::new(url.as_ref(), rank as u32))
            .collect();
        RankedResults::new(keyword, results)
    }

    /// True when no URL repeats within the list.
    pub fn urls_unique(&self) -> bool {
        let mut seen = HashSet::new();
        self.results.iter().all(|s| seen.insert(s.url.as_str()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionConfig {
    #[serde(default = "default_kappa")]
    pub kappa: u32,
    pub max_sources: usize,
    #[serde(default = "default_search_deadline_ms")]
    pub search_deadline_ms: u64,
}

fn default_kappa() -> u32 {
    1
}

fn default_search_deadline_ms() -> u64 {
    10_000
}

impl SelectionConfig {
    pub fn new(max_sources: usize) -> Self {
        SelectionConfig {
            kappa: default_kappa(),
            max_sources,
            search_deadline_ms: default_search_deadline_ms(),
        }
    }

    pub fn with_kappa(mut self, kappa: u32) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn validate(&self) -> crate::Result<()> {
        if self.kappa < 1 || self.max_sources < 1 || self.search_deadline_ms < 1 {
            return Err(crate::Error::InvalidConfig(
                "kappa, max_sources and search_deadline_ms must all be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Orders one keyword's candidates by relevance to the query.
pub trait RelevanceProvider {
    fn rank<'a>(&self, keyword: &str, results: &'a [Source]) -> Vec<&'a Source>;
}

/// Keeps the search provider's order.
#[derive(Debug, Clone, Copy, Default)]
pub struct ProviderOrder;

impl RelevanceProvider for ProviderOrder {
    fn rank<'a>(&self, _keyword: &str, results: &'a [Source]) -> Vec<&'a Source> {
        results.iter().collect()
    }
}

/// Orders candidates by externally supplied scores, highest first. Unscored
/// candidates sort after scored ones; equal scores fall back to provider rank.
#[derive(Debug, Clone, Default)]
pub struct ScoredRelevance {
    scores: HashMap<(String, String), f64>,
}

impl ScoredRelevance {
    pub fn insert(&mut self, keyword: &str, url: &str, score: f64) {
        self.scores.insert((keyword.to_owned(), url.to_owned()), score);
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    fn score(&self, keyword: &str, url: &str) -> f64 {
        self.scores
            .get(&(keyword.to_owned(), url.to_owned()))
            .copied()
            .filter(|s| !s.is_nan())
            .unwrap_or(f64::NEG_INFINITY)
    }
}

impl RelevanceProvider for ScoredRelevance {
    fn rank<'a>(&self, keyword: &str, results: &'a [Source]) -> Vec<&'a Source> {
        let mut ordered: Vec<(f64, &Source)> =
            results.iter().map(|s| (self.score(keyword, &s.url), s)).collect();
        ordered.sort_by(|(sa, a), (sb, b)| sb.total_cmp(sa).then(a.rank.cmp(&b.rank)));
        ordered.into_iter().map(|(_, s)| s).collect()
    }
}

/// Sources chosen so far plus the URL set and per-domain counts that guard
/// further choices.
#[derive(Debug, Clone, Default)]
pub struct SelectionState {
    selected: Vec<Source>,
    used_urls: HashSet<String>,
    domain_counts: HashMap<String, u32>,
}

impl SelectionState {
    pub fn selected(&self) -> &[Source] {
        &self.selected
    }

    pub fn used_urls(&self) -> &HashSet<String> {
        &self.used_urls
    }

    pub fn domain_counts(&self) -> &HashMap<String, u32> {
        &self.domain_counts
    }

    pub fn domain_count(&self, domain: &str) -> u32 {
        self.domain_counts.get(domain).copied().unwrap_or(0)
    }

    fn admit(&mut self, source: Source, domain: &str) {
        self.used_urls.insert(source.url.clone());
        *self.domain_counts.entry(domain.to_owned()).or_insert(0) += 1;
        self.selected.push(source);
    }

    /// Recomputes URL and domain bookkeeping from `selected` and checks it
    /// against the cached state and the allowance.
    pub fn verify(&self, kappa: u32) -> Result<(), String> {
        let urls: HashSet<String> = self.selected.iter().map(|s| s.url.clone()).collect();
        if urls.len() != self.selected.len() {
            return Err("duplicate URL among selected sources".into());
        }
        if urls != self.used_urls {
            return Err("used URL set out of sync with selection".into());
        }
        let mut counts: HashMap<String, u32> = HashMap::new();
        for source in &self.selected {
            let domain = domain_of(source).map_err(|e| e.to_string())?;
            *counts.entry(domain).or_insert(0) += 1;
        }
        if counts != self.domain_counts {
            return Err("domain counts out of sync with selection".into());
        }
        if let Some((domain, count)) = counts.iter().find(|(_, &c)| c > kappa) {
            return Err(format!("domain {domain} selected {count} times, allowance is {kappa}"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    NoResults,
    SearchDeadlineExceeded,
    AllCandidatesBlocked,
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedKeyword {
    pub keyword: String,
    pub reason: SkipReason,
}

/// How the chosen candidate was reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChoicePath {
    Top,
    NextBest,
    NextDifferentDomain,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordChoice {
    pub keyword: String,
    pub chosen_url: Option<String>,
    /// Position of the chosen candidate in relevance order; 0 is the top pick.
    pub fallback_depth: Option<usize>,
    pub path: Option<ChoicePath>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub selected: Vec<Source>,
    pub skipped_keywords: Vec<SkippedKeyword>,
    pub per_keyword_choice: Vec<KeywordChoice>,
    pub candidates_examined: u64,
}

/// A candidate with its domain resolved once up front.
struct Candidate<'a> {
    position: usize,
    source: &'a Source,
    domain: String,
}

fn first_unused(candidates: &[Candidate<'_>], used: &HashSet<String>, examined: &mut u64) -> Option<usize> {
    candidates.iter().position(|c| {
        *examined += 1;
        !used.contains(&c.source.url)
    })
}

fn first_admissible(
    candidates: &[Candidate<'_>],
    state: &SelectionState,
    kappa: u32,
    examined: &mut u64,
) -> Option<usize> {
    candidates.iter().position(|c| {
        *examined += 1;
        !state.used_urls.contains(&c.source.url) && state.domain_count(&c.domain) < kappa
    })
}

/// First result, in list order, whose URL has not been used.
pub fn next_best<'a>(results: &'a [Source], used_urls: &HashSet<String>) -> Option<&'a Source> {
    results.iter().find(|s| !used_urls.contains(&s.url))
}

/// First result, in list order, whose URL is unused and whose domain is
/// still below `kappa`. Results with unparseable URLs are never returned.
pub fn next_different_domain<'a>(
    results: &'a [Source],
    domain_counts: &HashMap<String, u32>,
    kappa: u32,
    used_urls: &HashSet<String>,
) -> Option<&'a Source> {
    results.iter().find(|s| {
        !used_urls.contains(&s.url)
            && domain_of(s)
                .map(|d| domain_counts.get(&d).copied().unwrap_or(0) < kappa)
                .unwrap_or(false)
    })
}

pub fn select_with_diversity(
    ranked: &[RankedResults],
    config: &SelectionConfig,
    relevance: &dyn RelevanceProvider,
) -> SelectionReport {
    select_with_diversity_observed(ranked, config, relevance, |_| {})
}

/// Same as [`select_with_diversity`], calling `observer` with the state after
/// every keyword that was processed.
pub fn select_with_diversity_observed(
    ranked: &[RankedResults],
    config: &SelectionConfig,
    relevance: &dyn RelevanceProvider,
    mut observer: impl FnMut(&SelectionState),
) -> SelectionReport {
    let kappa = config.kappa.max(1);
    let mut state = SelectionState::default();
    let mut skipped = Vec::new();
    let mut choices = Vec::with_capacity(ranked.len());
    let mut examined: u64 = 0;

    for list in ranked {
        let keyword = list.keyword.clone();
        let skip = |reason| SkippedKeyword {
            keyword: keyword.clone(),
            reason,
        };
        let no_choice = KeywordChoice {
            keyword: keyword.clone(),
            chosen_url: None,
            fallback_depth: None,
            path: None,
        };

        if state.selected.len() >= config.max_sources {
            skipped.push(skip(SkipReason::BudgetExhausted));
            choices.push(no_choice);
            continue;
        }

        let candidates: Vec<Candidate<'_>> = relevance
            .rank(&list.keyword, &list.results)
            .into_iter()
            .enumerate()
            .filter_map(|(position, source)| match domain_of(source) {
                Ok(domain) => Some(Candidate {
                    position,
                    source,
                    domain,
                }),
                Err(err) => {
                    log::warn!("ignoring candidate for {:?}: {err}", list.keyword);
                    None
                }
            })
            .collect();

        if candidates.is_empty() {
            let reason = if list.timed_out {
                SkipReason::SearchDeadlineExceeded
            } else {
                SkipReason::NoResults
            };
            skipped.push(skip(reason));
            choices.push(no_choice);
            observer(&state);
            continue;
        }

        examined += 1;
        let mut pick = Some(0);
        let mut path = ChoicePath::Top;
        if state.used_urls.contains(&candidates[0].source.url) {
            pick = first_unused(&candidates, &state.used_urls, &mut examined);
            path = ChoicePath::NextBest;
        }
        if let Some(idx) = pick {
            if state.domain_count(&candidates[idx].domain) >= kappa {
                pick = first_admissible(&candidates, &state, kappa, &mut examined);
                path = ChoicePath::NextDifferentDomain;
            }
        }

        match pick {
            Some(idx) => {
                let chosen = &candidates[idx];
                log::debug!("{:?}: selected {} via {:?}", list.keyword, chosen.source.url, path);
                choices.push(KeywordChoice {
                    keyword: keyword.clone(),
                    chosen_url: Some(chosen.source.url.clone()),
                    fallback_depth: Some(chosen.position),
                    path: Some(path),
                });
                state.admit(chosen.source.clone(), &chosen.domain);
            }
            None => {
                log::debug!("{:?}: every candidate blocked", list.keyword);
                skipped.push(skip(SkipReason::AllCandidatesBlocked));
                choices.push(no_choice);
            }
        }
        observer(&state);
    }

    SelectionReport {
        selected: state.selected,
        skipped_keywords: skipped,
        per_keyword_choice: choices,
        candidates_examined: examined,
    }
}
