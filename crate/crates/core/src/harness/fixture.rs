//! Fixture file format.
//!
//! ```json
//! {
//!   "locales":  { "tr-tr": { "keywords": ["..."] } },
//!   "searches": { "<keyword>": { "simulated_latency_ms": 120,
//!                               "results": [ { "url": "...", "relevance_score": 0.9,
//!                                              "simulated_latency_ms": 800 } ] } },
//!   "labels":   { "<url>": { "is_first_party": true } }
//! }
//! ```
//!
//! A search's `simulated_latency_ms` is how long the keyword search takes; a
//! result's `simulated_latency_ms` is how long fetching that URL takes.
//! Unknown fields are ignored.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::allocation::{normalize_locale_mix, NormalizationConfig, RawLocaleEntry};
use crate::brief::ResearchBrief;
use crate::error::{Error, Result};
use crate::model::{parse_url_parts, CountryCode, LanguageCode, Locale, Source};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LocaleKeywordsFixture {
    #[serde(default)]
    pub keywords: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureResult {
    pub url: String,
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub snippet: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub publisher_country: Option<CountryCode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub language: Option<LanguageCode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relevance_score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulated_latency_ms: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchFixture {
    #[serde(default)]
    pub keyword: String,
    #[serde(default)]
    pub results: Vec<FixtureResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulated_latency_ms: Option<u64>,
}

impl SearchFixture {
    pub fn sources(&self) -> Vec<Source> {
        self.results
            .iter()
            .enumerate()
            .map(|(rank, r)| Source {
                url: r.url.clone(),
                title: r.title.clone(),
                snippet: r.snippet.clone(),
                rank: rank as u32,
                publisher_country: r.publisher_country,
                language: r.language,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceLabel {
    #[serde(default)]
    pub is_first_party: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FixtureSet {
    #[serde(default)]
    pub locales: BTreeMap<Locale, LocaleKeywordsFixture>,
    #[serde(default)]
    pub searches: BTreeMap<String, SearchFixture>,
    #[serde(default)]
    pub labels: BTreeMap<String, SourceLabel>,
}

impl FixtureSet {
    pub fn from_json(json: &str) -> Result<FixtureSet> {
        let mut set: FixtureSet =
            serde_json::from_str(json).map_err(|e| Error::Fixture(e.to_string()))?;
        for (keyword, search) in set.searches.iter_mut() {
            if search.keyword.is_empty() {
                search.keyword = keyword.clone();
            }
        }
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<()> {
        for (keyword, search) in &self.searches {
            if search.keyword != *keyword {
                return Err(Error::Fixture(format!(
                    "search keyed {keyword:?} declares keyword {:?}",
                    search.keyword
                )));
            }
            let mut seen = HashSet::new();
            for result in &search.results {
                parse_url_parts(&result.url)
                    .map_err(|e| Error::Fixture(format!("keyword {keyword:?}: {e}")))?;
                if !seen.insert(result.url.as_str()) {
                    return Err(Error::Fixture(format!(
                        "keyword {keyword:?} lists {} more than once",
                        result.url
                    )));
                }
            }
        }
        Ok(())
    }

    /// Keywords listed under `locales` (locales in sorted order, keywords in
    /// file order), then any remaining searched keywords in sorted order.
    pub fn keyword_order(&self) -> Vec<String> {
        let mut seen = HashSet::new();
        let listed = self.locales.values().flat_map(|l| l.keywords.iter());
        listed
            .chain(self.searches.keys())
            .filter(|k| seen.insert(k.as_str()))
            .cloned()
            .collect()
    }

    pub fn is_first_party(&self, url: &str) -> bool {
        self.labels.get(url).map(|l| l.is_first_party).unwrap_or(false)
    }
}

/// A brief as it arrives on disk: string fields must be present, the locale
/// mix may be arbitrary and is normalized on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BriefDocument {
    pub query_understanding: String,
    pub source_strategy: String,
    pub keyword_guidance: String,
    pub summary_style: String,
    pub locale_hint: String,
    #[serde(default)]
    pub locale_mix: Vec<RawLocaleEntry>,
}

impl BriefDocument {
    pub fn from_json(json: &str) -> Result<BriefDocument> {
        serde_json::from_str(json).map_err(|e| Error::Fixture(format!("brief: {e}")))
    }

    pub fn into_brief(self, config: &NormalizationConfig) -> ResearchBrief {
        ResearchBrief {
            locale_mix: normalize_locale_mix(&self.locale_mix, config),
            query_understanding: self.query_understanding,
            source_strategy: self.source_strategy,
            keyword_guidance: self.keyword_guidance,
            summary_style: self.summary_style,
            locale_hint: self.locale_hint,
        }
    }
}
