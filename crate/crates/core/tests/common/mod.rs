//! Brute-force oracles and instance generators shared by the integration tests.

#![allow(dead_code)]

use std::collections::HashMap;

use rand::Rng;

use locale_merge::diversity::RankedResults;
use locale_merge::model::Source;

/// True when `counts` is a feasible allocation of `total` slots for `weights`:
/// every entry at least one, entries summing to `total`, and each entry
/// strictly within one slot of `1 + (total - n) * w / W`.
pub fn is_feasible(weights: &[u64], total: u64, counts: &[u64]) -> bool {
    let n = weights.len() as i128;
    let w_sum: i128 = weights.iter().map(|&w| w as i128).sum();
    if counts.len() != weights.len() || counts.iter().any(|&c| c < 1) {
        return false;
    }
    if counts.iter().sum::<u64>() != total {
        return false;
    }
    weights.iter().zip(counts).all(|(&w, &c)| {
        // |c - 1 - (T - n) w / W| < 1, scaled by W.
        let dev = c as i128 * w_sum - w_sum - (total as i128 - n) * w as i128;
        dev.abs() < w_sum
    })
}

/// Every composition of `total` into `parts` positive integers.
pub fn compositions(total: u64, parts: usize) -> Vec<Vec<u64>> {
    fn go(left: u64, parts: usize, prefix: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if parts == 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in 1..=left.saturating_sub(parts as u64 - 1) {
            prefix.push(first);
            go(left - first, parts - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if parts > 0 && total >= parts as u64 {
        go(total, parts, &mut Vec::new(), &mut out);
    }
    out
}

/// Brute-force feasible set: all compositions that pass [`is_feasible`].
pub fn feasible_set(weights: &[u64], total: u64) -> Vec<Vec<u64>> {
    compositions(total, weights.len())
        .into_iter()
        .filter(|c| is_feasible(weights, total, c))
        .collect()
}

/// A generated selection instance with each URL's domain known up front.
#[derive(Debug, Clone)]
pub struct Instance {
    pub lists: Vec<Vec<(String, String)>>,
}

impl Instance {
    pub fn ranked(&self) -> Vec<RankedResults> {
        self.lists
            .iter()
            .enumerate()
            .map(|(k, list)| {
                let sources = list
                    .iter()
                    .enumerate()
                    .map(|(rank, (url, _))| Source::new(url.clone(), rank as u32))
                    .collect();
                RankedResults::new(format!("kw{k}"), sources)
            })
            .collect()
    }

    pub fn domain(&self, url: &str) -> &str {
        self.lists
            .iter()
            .flatten()
            .find(|(u, _)| u == url)
            .map(|(_, d)| d.as_str())
            .expect("url comes from the instance")
    }
}

const SUBDOMAINS: [&str; 4] = ["", "www.", "news.", "m.shop."];
const SUFFIXES: [&str; 3] = ["com", "de", "com.tr"];

/// Domain `j` of the pool, e.g. `d3.com`.
pub fn pool_domain(j: usize) -> String {
    format!("d{j}.{}", SUFFIXES[j % SUFFIXES.len()])
}

/// Random instance: `keywords` lists of up to `max_len` results over `pool`
/// domains. URL paths are drawn from a small set so lists overlap.
pub fn random_instance(rng: &mut impl Rng, keywords: usize, max_len: usize, pool: usize) -> Instance {
    let lists = (0..keywords)
        .map(|_| {
            let len = rng.gen_range(0..=max_len).min(pool * SUBDOMAINS.len() * 3);
            let mut list: Vec<(String, String)> = Vec::new();
            while list.len() < len {
                let domain = pool_domain(rng.gen_range(0..pool));
                let sub = SUBDOMAINS[rng.gen_range(0..SUBDOMAINS.len())];
                let url = format!("https://{sub}{domain}/p{}", rng.gen_range(0..3));
                if list.iter().all(|(u, _)| *u != url) {
                    list.push((url, domain));
                }
            }
            list
        })
        .collect();
    Instance { lists }
}

/// The selection loop executed exactly as written: top candidate, URL
/// fallback, domain-cap fallback, admit or skip; stop at the source limit.
pub fn selection_oracle(instance: &Instance, kappa: u32, max_sources: usize) -> Vec<String> {
    let mut selected: Vec<String> = Vec::new();
    let mut used: Vec<String> = Vec::new();
    let mut counts: HashMap<String, u32> = HashMap::new();

    for list in &instance.lists {
        if selected.len() >= max_sources {
            break;
        }
        if list.is_empty() {
            continue;
        }
        let mut pick: Option<&(String, String)> = Some(&list[0]);
        if used.contains(&list[0].0) {
            pick = list.iter().find(|(u, _)| !used.contains(u));
        }
        if let Some((_, domain)) = pick {
            if *counts.get(domain).unwrap_or(&0) >= kappa {
                pick = list
                    .iter()
                    .find(|(u, d)| !used.contains(u) && *counts.get(d).unwrap_or(&0) < kappa);
            }
        }
        if let Some((url, domain)) = pick {
            selected.push(url.clone());
            used.push(url.clone());
            *counts.entry(domain.clone()).or_insert(0) += 1;
        }
    }
    selected
}
