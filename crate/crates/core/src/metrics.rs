//! Quality metrics over a selected source set.
//!
//! * first-party ratio: share of sources published by the entity itself,
//! * duplicate-domain ratio: share of unordered source pairs that share a
//!   registrable domain,
//! * locale coverage: number of distinct inferred countries.
//!
//! The two ratios are undefined on sets too small to have a denominator and
//! are reported as absent in that case.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::cascade::{CascadeMaps, InferenceResult};
use crate::error::Result;
use crate::model::{domain_of, Source};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledSource {
    pub source: Source,
    pub is_first_party: bool,
    pub inferred_country: InferenceResult,
}

impl LabeledSource {
    /// Labels a source, running the cascade for its country.
    pub fn label(source: Source, is_first_party: bool, maps: &CascadeMaps) -> Result<Self> {
        let inferred_country = maps.infer(&source)?;
        Ok(LabeledSource {
            source,
            is_first_party,
            inferred_country,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub fpr: Option<f64>,
    pub ddr: Option<f64>,
    pub lc: usize,
    pub source_count: usize,
    pub first_party_count: usize,
    pub same_domain_pairs: u64,
}

/// Number of unordered pairs sharing a key, via per-key counts: sum of C(c, 2).
fn pairs_sharing<'a>(keys: impl Iterator<Item = &'a str>) -> u64 {
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for key in keys {
        *counts.entry(key).or_insert(0) += 1;
    }
    counts.values().map(|&c| c * (c - 1) / 2).sum()
}

pub fn compute_metrics(sources: &[LabeledSource]) -> Result<MetricsReport> {
    let n = sources.len();
    let first_party_count = sources.iter().filter(|s| s.is_first_party).count();

    let domains = sources
        .iter()
        .map(|s| domain_of(&s.source))
        .collect::<Result<Vec<_>>>()?;
    let same_domain_pairs = pairs_sharing(domains.iter().map(String::as_str));

    let countries: BTreeSet<_> = sources
        .iter()
        .filter_map(|s| s.inferred_country.country)
        .collect();

    let fpr = (n > 0).then(|| first_party_count as f64 / n as f64);
    let ddr = (n >= 2).then(|| {
        let total_pairs = (n as u64) * (n as u64 - 1) / 2;
        same_domain_pairs as f64 / total_pairs as f64
    });

    Ok(MetricsReport {
        fpr,
        ddr,
        lc: countries.len(),
        source_count: n,
        first_party_count,
        same_domain_pairs,
    })
}
