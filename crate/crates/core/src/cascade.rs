//! Country-of-origin inference for a source.
//!
//! Signals are tried in a fixed order and the first one that applies wins:
//!
//! 1. an explicit TLD override (`uk` -> `gb`),
//! 2. a two-letter country-code TLD that is not in the generic set,
//! 3. the model-inferred publisher country,
//! 4. the source language mapped through the fallback table,
//! 5. otherwise no country.
//!
//! Branches 3 and 4 only apply to hosts whose TLD carries no geographic
//! signal. A two-letter TLD that is not an ISO 3166-1 code, and any longer
//! TLD outside the generic set, is treated the same as a generic TLD.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{is_country_code, parse_url_parts, CountryCode, GenericTldSet, LanguageCode, Source};

/// TLD aliases that map to a country code other than themselves.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "BTreeMap<String, CountryCode>", into = "BTreeMap<String, CountryCode>")]
pub struct OverrideMap {
    entries: BTreeMap<String, CountryCode>,
}

impl Default for OverrideMap {
    fn default() -> Self {
        Self::from_iter([("uk", CountryCode::new("gb").expect("gb"))])
    }
}

impl<S: AsRef<str>> FromIterator<(S, CountryCode)> for OverrideMap {
    fn from_iter<I: IntoIterator<Item = (S, CountryCode)>>(iter: I) -> Self {
        OverrideMap {
            entries: iter
                .into_iter()
                .map(|(tld, cc)| (tld.as_ref().to_ascii_lowercase(), cc))
                .collect(),
        }
    }
}

impl OverrideMap {
    pub fn empty() -> Self {
        OverrideMap {
            entries: BTreeMap::new(),
        }
    }

    pub fn get(&self, tld: &str) -> Option<CountryCode> {
        self.entries.get(tld).copied()
    }

    pub fn insert(&mut self, tld: &str, country: CountryCode) {
        self.entries.insert(tld.to_ascii_lowercase(), country);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl From<BTreeMap<String, CountryCode>> for OverrideMap {
    fn from(entries: BTreeMap<String, CountryCode>) -> Self {
        entries.into_iter().collect()
    }
}

impl From<OverrideMap> for BTreeMap<String, CountryCode> {
    fn from(map: OverrideMap) -> Self {
        map.entries
    }
}

/// Language to country fallback used when the host carries no geographic signal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LanguageFallbackMap {
    entries: BTreeMap<LanguageCode, CountryCode>,
}

impl Default for LanguageFallbackMap {
    fn default() -> Self {
        const PAIRS: [(&str, &str); 13] = [
            ("tr", "tr"),
            ("de", "de"),
            ("en", "us"),
            ("ar", "sa"),
            ("fr", "fr"),
            ("es", "es"),
            ("it", "it"),
            ("ja", "jp"),
            ("ko", "kr"),
            ("zh", "cn"),
            ("pt", "br"),
            ("ru", "ru"),
            ("nl", "nl"),
        ];
        PAIRS
            .iter()
            .map(|&(lang, cc)| {
                (
                    LanguageCode::new(lang).expect("bundled language"),
                    CountryCode::new(cc).expect("bundled country"),
                )
            })
            .collect()
    }
}

impl FromIterator<(LanguageCode, CountryCode)> for LanguageFallbackMap {
    fn from_iter<I: IntoIterator<Item = (LanguageCode, CountryCode)>>(iter: I) -> Self {
        LanguageFallbackMap {
            entries: iter.into_iter().collect(),
        }
    }
}

impl LanguageFallbackMap {
    pub fn empty() -> Self {
        LanguageFallbackMap {
            entries: BTreeMap::new(),
        }
    }

    pub fn get(&self, language: LanguageCode) -> Option<CountryCode> {
        self.entries.get(&language).copied()
    }

    pub fn insert(&mut self, language: LanguageCode, country: CountryCode) {
        self.entries.insert(language, country);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Which rule of the cascade produced the answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Override,
    CcTld,
    ModelMetadata,
    LanguageFallback,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InferenceResult {
    pub country: Option<CountryCode>,
    pub branch: Branch,
}

impl InferenceResult {
    fn found(country: CountryCode, branch: Branch) -> Self {
        InferenceResult {
            country: Some(country),
            branch,
        }
    }

    fn unknown() -> Self {
        InferenceResult {
            country: None,
            branch: Branch::None,
        }
    }
}

/// The three lookup tables the cascade consults, bundled for convenience.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CascadeMaps {
    #[serde(default)]
    pub overrides: OverrideMap,
    #[serde(default)]
    pub fallback: LanguageFallbackMap,
    #[serde(default)]
    pub generic: GenericTldSet,
}

impl CascadeMaps {
    pub fn infer(&self, source: &Source) -> Result<InferenceResult> {
        infer_country(source, &self.overrides, &self.fallback, &self.generic)
    }
}

pub fn infer_country(
    source: &Source,
    overrides: &OverrideMap,
    fallback: &LanguageFallbackMap,
    generic: &GenericTldSet,
) -> Result<InferenceResult> {
    let tld = parse_url_parts(&source.url)?.tld;

    if let Some(country) = overrides.get(&tld) {
        return Ok(InferenceResult::found(country, Branch::Override));
    }

    if tld.len() == 2 && !generic.contains(&tld) && is_country_code(&tld) {
        let country = CountryCode::new(&tld)?;
        return Ok(InferenceResult::found(country, Branch::CcTld));
    }

    if let Some(country) = source.publisher_country {
        return Ok(InferenceResult::found(country, Branch::ModelMetadata));
    }

    match source.language.and_then(|lang| fallback.get(lang)) {
        Some(country) => Ok(InferenceResult::found(country, Branch::LanguageFallback)),
        None => Ok(InferenceResult::unknown()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn cc(s: &str) -> CountryCode {
        CountryCode::new(s).unwrap()
    }

    fn lang(s: &str) -> LanguageCode {
        LanguageCode::new(s).unwrap()
    }

    fn infer(source: &Source) -> InferenceResult {
        CascadeMaps::default().infer(source).unwrap()
    }

    #[test]
    fn override_maps_uk_to_gb() {
        let r = infer(&Source::new("https://site.uk/x", 0));
        assert_eq!(r, InferenceResult::found(cc("gb"), Branch::Override));
    }

    #[test]
    fn generic_tld_uses_model_metadata() {
        let src = Source::new("https://blog.example.com", 0).with_publisher_country(cc("fr"));
        assert_eq!(infer(&src), InferenceResult::found(cc("fr"), Branch::ModelMetadata));
    }

    #[test]
    fn no_signal_yields_unknown() {
        let r = infer(&Source::new("https://x.com", 0));
        assert_eq!(r, InferenceResult { country: None, branch: Branch::None });
    }

    #[test]
    fn language_fallback() {
        let fallback: LanguageFallbackMap = [(lang("de"), cc("de"))].into_iter().collect();
        let src = Source::new("https://x.io", 0).with_language(lang("de"));
        let r = infer_country(&src, &OverrideMap::default(), &fallback, &GenericTldSet::default()).unwrap();
        assert_eq!(r, InferenceResult::found(cc("de"), Branch::LanguageFallback));
    }

    #[test]
    fn cctld_outranks_model_metadata() {
        let src = Source::new("https://x.de", 0).with_publisher_country(cc("us"));
        assert_eq!(infer(&src), InferenceResult::found(cc("de"), Branch::CcTld));
    }

    #[test]
    fn unmapped_language_yields_unknown() {
        let src = Source::new("https://x.org", 0).with_language(lang("sw"));
        assert_eq!(infer(&src).branch, Branch::None);
    }

    #[test]
    fn non_iso_two_letter_tld_behaves_like_generic() {
        // "eu" is not an ISO 3166-1 alpha-2 code.
        let src = Source::new("https://europa.eu", 0).with_publisher_country(cc("be"));
        assert_eq!(infer(&src), InferenceResult::found(cc("be"), Branch::ModelMetadata));
        assert_eq!(infer(&Source::new("https://europa.eu", 0)).branch, Branch::None);
    }

    #[test]
    fn long_non_generic_tld_behaves_like_generic() {
        let src = Source::new("https://louvre.museum", 0).with_language(lang("fr"));
        assert_eq!(infer(&src), InferenceResult::found(cc("fr"), Branch::LanguageFallback));
    }

    #[test]
    fn generic_two_letter_tlds_are_not_countries() {
        // io, ai and co are ISO codes but sit in the generic set.
        for url in ["https://x.io", "https://x.ai", "https://x.co"] {
            assert_eq!(infer(&Source::new(url, 0)).branch, Branch::None, "{url}");
        }
    }

    #[test]
    fn override_applies_even_to_generic_keys() {
        let mut overrides = OverrideMap::default();
        overrides.insert("io", cc("gb"));
        let src = Source::new("https://x.io", 0).with_publisher_country(cc("us"));
        let r = infer_country(&src, &overrides, &LanguageFallbackMap::default(), &GenericTldSet::default())
            .unwrap();
        assert_eq!(r, InferenceResult::found(cc("gb"), Branch::Override));
    }

    #[test]
    fn malformed_url_propagates() {
        assert!(matches!(
            CascadeMaps::default().infer(&Source::new("not a url", 0)),
            Err(Error::MalformedUrl(_))
        ));
    }

    #[test]
    fn maps_deserialize_from_json_objects() {
        let overrides: OverrideMap = serde_json::from_str(r#"{"UK":"gb","su":"ru"}"#).unwrap();
        assert_eq!(overrides.get("uk"), Some(cc("gb")));
        assert_eq!(overrides.get("su"), Some(cc("ru")));
        let fallback: LanguageFallbackMap = serde_json::from_str(r#"{"en":"gb"}"#).unwrap();
        assert_eq!(fallback.get(lang("en")), Some(cc("gb")));
        assert!(serde_json::from_str::<LanguageFallbackMap>(r#"{"en":"zz"}"#).is_err());
    }

    #[test]
    fn default_tables() {
        assert_eq!(OverrideMap::default().len(), 1);
        assert_eq!(LanguageFallbackMap::default().len(), 13);
        assert_eq!(LanguageFallbackMap::default().get(lang("en")), Some(cc("us")));
    }

    #[test]
    fn branch_serializes_snake_case() {
        let r = InferenceResult::found(cc("de"), Branch::CcTld);
        assert_eq!(
            serde_json::to_value(r).unwrap(),
            serde_json::json!({"country": "de", "branch": "cc_tld"})
        );
    }
}
