//! Weighted locale allocation.
//!
//! Splits a keyword budget `T` across `n` weighted locales so that every
//! locale gets at least one slot, the slots sum to `T`, and each count lies
//! strictly within one of its ideal share `1 + (T - n) * w_i / W`. This is
//! largest-remainder apportionment over the budget left after the base slot.
//!
//! Shares are computed in exact integer arithmetic: the floor of each share is
//! `w_i * R / W` and its fractional part is ranked by `w_i * R mod W`, so
//! remainder ties are decided exactly rather than by float rounding.

use std::collections::HashSet;

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::model::{Locale, LanguageCode, CountryCode};

/// A locale with its positive integer weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawLocaleEntry", into = "RawLocaleEntry")]
pub struct WeightedLocale {
    pub locale: Locale,
    pub weight: u64,
}

impl WeightedLocale {
    pub fn new(locale: Locale, weight: u64) -> Self {
        WeightedLocale { locale, weight }
    }
}

/// One entry of a locale mix as it arrives from upstream, before validation.
///
/// Deserialization is lenient: missing fields become empty strings, and the
/// weight accepts integers, floats (truncated) or anything else (treated as 1).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawLocaleEntry {
    #[serde(default)]
    pub country: String,
    #[serde(default)]
    pub language: String,
    #[serde(default = "one", deserialize_with = "lenient_weight")]
    pub weight: i64,
}

fn one() -> i64 {
    1
}

fn lenient_weight<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<i64, D::Error> {
    let value = serde_json::Value::deserialize(de)?;
    Ok(match value {
        serde_json::Value::Number(n) => n
            .as_i64()
            .or_else(|| n.as_u64().map(|_| i64::MAX))
            .or_else(|| n.as_f64().map(|f| f as i64))
            .unwrap_or(1),
        serde_json::Value::String(s) => s.trim().parse().unwrap_or(1),
        _ => 1,
    })
}

impl RawLocaleEntry {
    pub fn new(country: &str, language: &str, weight: i64) -> Self {
        RawLocaleEntry {
            country: country.to_owned(),
            language: language.to_owned(),
            weight,
        }
    }
}

impl TryFrom<RawLocaleEntry> for WeightedLocale {
    type Error = Error;

    fn try_from(raw: RawLocaleEntry) -> Result<Self> {
        let locale = Locale::parse_pair(&raw.country, &raw.language)?;
        if raw.weight < 1 {
            return Err(Error::InvalidWeight {
                locale: locale.to_string(),
                weight: 0,
            });
        }
        Ok(WeightedLocale::new(locale, raw.weight as u64))
    }
}

impl From<WeightedLocale> for RawLocaleEntry {
    fn from(entry: WeightedLocale) -> Self {
        RawLocaleEntry {
            country: entry.locale.country.to_string(),
            language: entry.locale.language.to_string(),
            weight: i64::try_from(entry.weight).unwrap_or(i64::MAX),
        }
    }
}

/// Non-empty ordered list of weighted locales without duplicate pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<WeightedLocale>", into = "Vec<WeightedLocale>")]
pub struct LocaleMix {
    entries: Vec<WeightedLocale>,
}

impl LocaleMix {
    pub fn new(entries: Vec<WeightedLocale>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyLocaleMix);
        }
        let mut seen = HashSet::new();
        for entry in &entries {
            if entry.weight < 1 {
                return Err(Error::InvalidWeight {
                    locale: entry.locale.to_string(),
                    weight: entry.weight,
                });
            }
            if !seen.insert(entry.locale) {
                return Err(Error::DuplicateLocale(entry.locale.to_string()));
            }
        }
        Ok(LocaleMix { entries })
    }

    pub fn entries(&self) -> &[WeightedLocale] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, locale: &Locale) -> bool {
        self.entries.iter().any(|e| e.locale == *locale)
    }

    pub fn to_raw(&self) -> Vec<RawLocaleEntry> {
        self.entries.iter().copied().map(RawLocaleEntry::from).collect()
    }
}

impl TryFrom<Vec<WeightedLocale>> for LocaleMix {
    type Error = Error;

    fn try_from(entries: Vec<WeightedLocale>) -> Result<Self> {
        LocaleMix::new(entries)
    }
}

impl From<LocaleMix> for Vec<WeightedLocale> {
    fn from(mix: LocaleMix) -> Self {
        mix.entries
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocaleCount {
    pub locale: Locale,
    pub count: u64,
}

/// Per-locale slot counts, aligned with the input mix order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AllocationVector {
    pub counts: Vec<LocaleCount>,
    pub total: u64,
    pub weight_sum: u64,
}

impl AllocationVector {
    pub fn count_values(&self) -> Vec<u64> {
        self.counts.iter().map(|c| c.count).collect()
    }
}

/// Runs the three-phase allocation: one base slot each, floor of the
/// proportional share of the remaining `T - n`, then leftover slots by
/// descending fractional part (earlier entries win ties).
pub fn allocate_locale_counts(mix: &LocaleMix, total: u64) -> Result<AllocationVector> {
    allocate_weights(mix.entries(), total)
}

/// Allocation over a bare slice; validates weights and budget itself.
pub fn allocate_weights(entries: &[WeightedLocale], total: u64) -> Result<AllocationVector> {
    let n = entries.len();
    if n == 0 {
        return Err(Error::EmptyLocaleMix);
    }
    if let Some(bad) = entries.iter().find(|e| e.weight < 1) {
        return Err(Error::InvalidWeight {
            locale: bad.locale.to_string(),
            weight: bad.weight,
        });
    }
    if total < n as u64 {
        return Err(Error::BudgetTooSmall { total, locales: n });
    }

    let remaining = u128::from(total - n as u64);
    let weight_sum: u128 = entries.iter().map(|e| u128::from(e.weight)).sum();

    let mut counts: Vec<u64> = vec![1; n];
    let mut fractions: Vec<u128> = Vec::with_capacity(n);
    let mut floored: u128 = 0;
    for (count, entry) in counts.iter_mut().zip(entries) {
        let share = u128::from(entry.weight) * remaining;
        let whole = share / weight_sum;
        *count += whole as u64;
        floored += whole;
        fractions.push(share % weight_sum);
    }

    let leftover = (remaining - floored) as usize;
    let mut order: Vec<usize> = (0..n).collect();
    // Stable: equal fractions keep input order.
    order.sort_by(|&a, &b| fractions[b].cmp(&fractions[a]));
    for &idx in order.iter().take(leftover) {
        counts[idx] += 1;
    }

    Ok(AllocationVector {
        counts: entries
            .iter()
            .zip(counts)
            .map(|(e, count)| LocaleCount {
                locale: e.locale,
                count,
            })
            .collect(),
        total,
        weight_sum: weight_sum as u64,
    })
}

/// Settings for cleaning an upstream locale mix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizationConfig {
    pub default_locale: Locale,
    #[serde(default = "default_max_locales")]
    pub max_locales: usize,
    pub total_budget: u64,
}

fn default_max_locales() -> usize {
    4
}

impl NormalizationConfig {
    pub fn new(default_locale: Locale, total_budget: u64) -> Self {
        NormalizationConfig {
            default_locale,
            max_locales: default_max_locales(),
            total_budget,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_locales < 1 {
            return Err(Error::InvalidConfig("max_locales must be at least 1".into()));
        }
        if self.total_budget < self.max_locales as u64 {
            return Err(Error::InvalidConfig(format!(
                "total_budget {} is smaller than max_locales {}",
                self.total_budget, self.max_locales
            )));
        }
        Ok(())
    }
}

/// Turns an arbitrary upstream mix into a valid one.
///
/// Invalid codes are dropped, weights below 1 become 1, repeated pairs keep
/// their first occurrence, at most `max_locales` entries survive (heaviest
/// first, earlier entries on equal weight), and the default locale is always
/// present, appended with weight 1 when missing. Never fails.
pub fn normalize_locale_mix(raw: &[RawLocaleEntry], config: &NormalizationConfig) -> LocaleMix {
    let mut seen = HashSet::new();
    let mut cleaned: Vec<WeightedLocale> = Vec::with_capacity(raw.len());
    for entry in raw {
        let (Ok(country), Ok(language)) = (
            CountryCode::new(&entry.country),
            LanguageCode::new(&entry.language),
        ) else {
            log::debug!(
                "dropping locale entry with invalid codes: {}-{}",
                entry.country,
                entry.language
            );
            continue;
        };
        let locale = Locale::new(country, language);
        if seen.insert(locale) {
            cleaned.push(WeightedLocale::new(locale, entry.weight.max(1) as u64));
        }
    }

    let default = config.default_locale;
    let room_for_others = config.max_locales.max(1) - 1;

    let mut ranked: Vec<usize> = (0..cleaned.len())
        .filter(|&i| cleaned[i].locale != default)
        .collect();
    ranked.sort_by(|&a, &b| cleaned[b].weight.cmp(&cleaned[a].weight));
    let kept: HashSet<usize> = ranked.into_iter().take(room_for_others).collect();

    let mut entries: Vec<WeightedLocale> = cleaned
        .iter()
        .enumerate()
        .filter(|(i, e)| e.locale == default || kept.contains(i))
        .map(|(_, e)| *e)
        .collect();
    if !entries.iter().any(|e| e.locale == default) {
        entries.push(WeightedLocale::new(default, 1));
    }

    LocaleMix::new(entries).expect("normalized mix is non-empty and duplicate-free")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn loc(s: &str) -> Locale {
        s.parse().unwrap()
    }

    fn mix(entries: &[(&str, u64)]) -> LocaleMix {
        LocaleMix::new(
            entries
                .iter()
                .map(|&(l, w)| WeightedLocale::new(loc(l), w))
                .collect(),
        )
        .unwrap()
    }

    fn raw(entries: &[(&str, &str, i64)]) -> Vec<RawLocaleEntry> {
        entries
            .iter()
            .map(|&(c, l, w)| RawLocaleEntry::new(c, l, w))
            .collect()
    }

    #[test]
    fn single_locale_takes_everything() {
        let out = allocate_locale_counts(&mix(&[("tr-tr", 1)]), 5).unwrap();
        assert_eq!(out.count_values(), vec![5]);
        assert_eq!(out.weight_sum, 1);
    }

    #[test]
    fn budget_equal_to_locale_count() {
        let m = mix(&[("tr-tr", 1), ("de-de", 1), ("us-en", 1)]);
        assert_eq!(allocate_locale_counts(&m, 3).unwrap().count_values(), vec![1, 1, 1]);
    }

    #[test]
    fn three_two_one_over_ten() {
        // Ideal shares 4.5, 3.33, 2.17; hand walk gives 4,3,2 then the
        // single leftover slot to the 0.5 remainder.
        let m = mix(&[("tr-tr", 3), ("de-de", 2), ("us-en", 1)]);
        assert_eq!(allocate_locale_counts(&m, 10).unwrap().count_values(), vec![5, 3, 2]);
    }

    #[test]
    fn budget_too_small() {
        let m = mix(&[("tr-tr", 1), ("de-de", 1)]);
        assert_eq!(
            allocate_locale_counts(&m, 1),
            Err(Error::BudgetTooSmall { total: 1, locales: 2 })
        );
    }

    #[test]
    fn zero_weight_rejected() {
        let entries = [WeightedLocale::new(loc("tr-tr"), 0)];
        assert!(matches!(allocate_weights(&entries, 3), Err(Error::InvalidWeight { .. })));
        assert!(LocaleMix::new(entries.to_vec()).is_err());
    }

    #[test]
    fn ties_go_to_the_earlier_entry() {
        let m = mix(&[("tr-tr", 1), ("de-de", 1)]);
        for _ in 0..10 {
            assert_eq!(allocate_locale_counts(&m, 3).unwrap().count_values(), vec![2, 1]);
        }
        let m = mix(&[("de-de", 1), ("tr-tr", 1)]);
        assert_eq!(allocate_locale_counts(&m, 3).unwrap().count_values(), vec![2, 1]);
    }

    #[test]
    fn huge_weights_do_not_overflow() {
        let m = mix(&[("tr-tr", u64::MAX / 2), ("de-de", u64::MAX / 3)]);
        let out = allocate_locale_counts(&m, 1_000_000).unwrap();
        assert_eq!(out.count_values().iter().sum::<u64>(), 1_000_000);
    }

    #[test]
    fn normalize_drops_invalid_and_injects_default() {
        let cfg = NormalizationConfig::new(loc("tr-tr"), 10);
        let out = normalize_locale_mix(&raw(&[("XX", "zz", 2)]), &cfg);
        assert_eq!(out, mix(&[("tr-tr", 1)]));
    }

    #[test]
    fn normalize_first_duplicate_wins() {
        let cfg = NormalizationConfig::new(loc("tr-tr"), 10);
        let out = normalize_locale_mix(&raw(&[("de", "de", 3), ("de", "de", 5), ("tr", "tr", 1)]), &cfg);
        assert_eq!(out, mix(&[("de-de", 3), ("tr-tr", 1)]));
    }

    #[test]
    fn normalize_clamps_weights() {
        let cfg = NormalizationConfig::new(loc("tr-tr"), 10);
        let out = normalize_locale_mix(&raw(&[("de", "de", 0)]), &cfg);
        assert_eq!(out, mix(&[("de-de", 1), ("tr-tr", 1)]));
        let out = normalize_locale_mix(&raw(&[("de", "de", -7)]), &cfg);
        assert_eq!(out, mix(&[("de-de", 1), ("tr-tr", 1)]));
    }

    #[test]
    fn normalize_truncates_lightest_and_keeps_default() {
        let mut cfg = NormalizationConfig::new(loc("tr-tr"), 10);
        cfg.max_locales = 3;
        let input = raw(&[
            ("de", "de", 2),
            ("us", "en", 5),
            ("fr", "fr", 2),
            ("sa", "ar", 1),
        ]);
        // Room for two non-default entries: us-en (5) and de-de (2, earlier than fr-fr).
        let out = normalize_locale_mix(&input, &cfg);
        assert_eq!(out, mix(&[("de-de", 2), ("us-en", 5), ("tr-tr", 1)]));

        // Default already present keeps its position and weight.
        let input = raw(&[("de", "de", 1), ("tr", "tr", 4), ("us", "en", 3), ("fr", "fr", 2)]);
        let out = normalize_locale_mix(&input, &cfg);
        assert_eq!(out, mix(&[("tr-tr", 4), ("us-en", 3), ("fr-fr", 2)]));
    }

    #[test]
    fn normalize_with_single_slot_yields_default_only() {
        let mut cfg = NormalizationConfig::new(loc("tr-tr"), 10);
        cfg.max_locales = 1;
        let out = normalize_locale_mix(&raw(&[("de", "de", 9)]), &cfg);
        assert_eq!(out, mix(&[("tr-tr", 1)]));
    }

    #[test]
    fn normalize_accepts_mixed_case_codes() {
        let cfg = NormalizationConfig::new(loc("tr-tr"), 10);
        let out = normalize_locale_mix(&raw(&[(" DE", "De", 2)]), &cfg);
        assert_eq!(out, mix(&[("de-de", 2), ("tr-tr", 1)]));
    }

    #[test]
    fn raw_entries_parse_leniently() {
        let parsed: Vec<RawLocaleEntry> = serde_json::from_str(
            r#"[{"country":"de","language":"de","weight":2.9},
                {"country":"tr","language":"tr"},
                {"country":"fr","language":"fr","weight":"3"},
                {"language":"en","weight":null}]"#,
        )
        .unwrap();
        assert_eq!(parsed[0].weight, 2);
        assert_eq!(parsed[1].weight, 1);
        assert_eq!(parsed[2].weight, 3);
        assert_eq!(parsed[3].country, "");
    }

    #[test]
    fn locale_mix_json_shape() {
        let m = mix(&[("tr-tr", 2), ("de-de", 1)]);
        let json = serde_json::to_value(&m).unwrap();
        assert_eq!(
            json,
            serde_json::json!([
                {"country": "tr", "language": "tr", "weight": 2},
                {"country": "de", "language": "de", "weight": 1}
            ])
        );
        assert_eq!(serde_json::from_value::<LocaleMix>(json).unwrap(), m);
        let dup = serde_json::json!([
            {"country": "tr", "language": "tr", "weight": 2},
            {"country": "tr", "language": "tr", "weight": 1}
        ]);
        assert!(serde_json::from_value::<LocaleMix>(dup).is_err());
    }

    #[test]
    fn config_validation() {
        let mut cfg = NormalizationConfig::new(loc("tr-tr"), 3);
        assert!(cfg.validate().is_err());
        cfg.total_budget = 4;
        assert!(cfg.validate().is_ok());
        cfg.max_locales = 0;
        assert!(cfg.validate().is_err());
    }
}
