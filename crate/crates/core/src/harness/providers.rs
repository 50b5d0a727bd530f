//! Search and fetch provider interfaces and their fixture-backed mocks.
//!
//! Mocks simulate latency with `tokio::time::sleep`, so under a paused
//! runtime clock they complete instantly in wall time while the virtual
//! clock advances by exactly the simulated amount.

use std::collections::{BTreeMap, HashMap};
use std::future::Future;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::fixture::FixtureSet;
use crate::model::Source;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct ProviderError(pub String);

pub trait SearchProvider {
    fn search(&self, keyword: &str) -> impl Future<Output = Result<Vec<Source>, ProviderError>>;
}

pub trait FetchProvider {
    /// Fetches one URL; resolves when the content is available.
    fn fetch(&self, url: &str) -> impl Future<Output = Result<(), ProviderError>>;
}

/// Serves search results straight from a fixture set.
#[derive(Debug, Clone)]
pub struct FixtureSearch {
    searches: HashMap<String, (u64, Vec<Source>)>,
}

impl FixtureSearch {
    pub fn new(fixtures: &FixtureSet) -> Self {
        FixtureSearch {
            searches: fixtures
                .searches
                .iter()
                .map(|(keyword, search)| {
                    (
                        keyword.clone(),
                        (search.simulated_latency_ms.unwrap_or(0), search.sources()),
                    )
                })
                .collect(),
        }
    }
}

impl SearchProvider for FixtureSearch {
    async fn search(&self, keyword: &str) -> Result<Vec<Source>, ProviderError> {
        match self.searches.get(keyword) {
            Some((latency, results)) => {
                tokio::time::sleep(Duration::from_millis(*latency)).await;
                Ok(results.clone())
            }
            None => {
                log::info!("no search fixture for keyword {keyword:?}");
                Ok(Vec::new())
            }
        }
    }
}

/// Fetch latencies come from the fixture where given. URLs without one get
/// a latency drawn once, in URL order, from a seeded generator.
#[derive(Debug, Clone)]
pub struct FixtureFetcher {
    latencies: HashMap<String, u64>,
}

impl FixtureFetcher {
    pub const DEFAULT_LATENCY_MS: u64 = 1_000;
    pub const DRAWN_LATENCY_MS: std::ops::RangeInclusive<u64> = 200..=4_000;

    pub fn new(fixtures: &FixtureSet, seed: u64) -> Self {
        let mut declared: BTreeMap<&str, Option<u64>> = BTreeMap::new();
        for search in fixtures.searches.values() {
            for result in &search.results {
                let slot = declared.entry(result.url.as_str()).or_insert(None);
                if slot.is_none() {
                    *slot = result.simulated_latency_ms;
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let latencies = declared
            .into_iter()
            .map(|(url, latency)| {
                let drawn = rng.gen_range(Self::DRAWN_LATENCY_MS);
                (url.to_owned(), latency.unwrap_or(drawn))
            })
            .collect();
        FixtureFetcher { latencies }
    }

    pub fn from_latencies(latencies: impl IntoIterator<Item = (String, u64)>) -> Self {
        FixtureFetcher {
            latencies: latencies.into_iter().collect(),
        }
    }

    pub fn latency_ms(&self, url: &str) -> u64 {
        self.latencies.get(url).copied().unwrap_or(Self::DEFAULT_LATENCY_MS)
    }
}

impl FetchProvider for FixtureFetcher {
    async fn fetch(&self, url: &str) -> Result<(), ProviderError> {
        tokio::time::sleep(Duration::from_millis(self.latency_ms(url))).await;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixtures() -> FixtureSet {
        FixtureSet::from_json(
            r#"{"searches":{
                "a":{"simulated_latency_ms":300,"results":[
                    {"url":"https://x.com","simulated_latency_ms":50},
                    {"url":"https://y.com"}]},
                "b":{"results":[{"url":"https://z.com"}]}}}"#,
        )
        .unwrap()
    }

    #[tokio::test(start_paused = true)]
    async fn search_sleeps_for_fixture_latency() {
        let search = FixtureSearch::new(&fixtures());
        let start = tokio::time::Instant::now();
        let results = search.search("a").await.unwrap();
        assert_eq!(start.elapsed(), Duration::from_millis(300));
        assert_eq!(results.len(), 2);
        assert!(search.search("missing").await.unwrap().is_empty());
    }

    #[test]
    fn fetch_latencies_are_seeded() {
        let a = FixtureFetcher::new(&fixtures(), 7);
        let b = FixtureFetcher::new(&fixtures(), 7);
        assert_eq!(a.latency_ms("https://x.com"), 50);
        assert_eq!(a.latency_ms("https://y.com"), b.latency_ms("https://y.com"));
        assert!(FixtureFetcher::DRAWN_LATENCY_MS.contains(&a.latency_ms("https://z.com")));
        assert_eq!(a.latency_ms("https://unknown.com"), FixtureFetcher::DEFAULT_LATENCY_MS);
    }
}
