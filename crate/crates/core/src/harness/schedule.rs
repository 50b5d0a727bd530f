//! Budgeted fetch scheduling.
//!
//! Each source gets a total time budget and each fetch attempt a step cap.
//! An attempt that hits its cap is cut off and charged the full cap; an
//! attempt that finishes is charged the time it took. After a failed
//! attempt the next alternate URL is tried, until one succeeds, the budget
//! is spent, or the alternates run out. At most `fetch_concurrency` sources
//! are processed at once.
//!
//! The per-attempt cap is `min(per_step_ms, budget left)`, so the charged
//! total never exceeds `per_source_total_ms`.

use std::time::Duration;

use futures::future::join_all;
use serde::{Deserialize, Serialize};
use tokio::sync::Semaphore;
use tokio::time::{timeout, Instant};

use super::providers::FetchProvider;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetConfig {
    #[serde(default = "defaults::per_source_total_ms")]
    pub per_source_total_ms: u64,
    #[serde(default = "defaults::per_step_ms")]
    pub per_step_ms: u64,
    #[serde(default = "defaults::max_alternates")]
    pub max_alternates: usize,
    #[serde(default = "defaults::fetch_concurrency")]
    pub fetch_concurrency: usize,
}

mod defaults {
    pub fn per_source_total_ms() -> u64 {
        45_000
    }
    pub fn per_step_ms() -> u64 {
        15_000
    }
    pub fn max_alternates() -> usize {
        4
    }
    pub fn fetch_concurrency() -> usize {
        3
    }
}

impl Default for BudgetConfig {
    fn default() -> Self {
        BudgetConfig {
            per_source_total_ms: defaults::per_source_total_ms(),
            per_step_ms: defaults::per_step_ms(),
            max_alternates: defaults::max_alternates(),
            fetch_concurrency: defaults::fetch_concurrency(),
        }
    }
}

impl BudgetConfig {
    pub fn validate(&self) -> Result<()> {
        if self.per_source_total_ms == 0 || self.per_step_ms == 0 || self.fetch_concurrency == 0 {
            return Err(Error::InvalidConfig("budgets and concurrency must be positive".into()));
        }
        if self.per_step_ms > self.per_source_total_ms {
            return Err(Error::InvalidConfig(format!(
                "per_step_ms {} exceeds per_source_total_ms {}",
                self.per_step_ms, self.per_source_total_ms
            )));
        }
        if self.max_alternates < 1 {
            return Err(Error::InvalidConfig("max_alternates must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FetchRequest {
    pub url: String,
    #[serde(default)]
    pub alternates: Vec<String>,
}

impl FetchRequest {
    pub fn new(url: impl Into<String>, alternates: Vec<String>) -> Self {
        FetchRequest {
            url: url.into(),
            alternates,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FetchOutcome {
    Ok,
    /// The only candidate was cut off at the step cap.
    StepTimeout,
    /// The per-source budget was spent before any attempt succeeded.
    BudgetExceeded,
    /// Every candidate failed while budget remained.
    ExhaustedAlternates,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttemptResult {
    Ok,
    Timeout,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FetchAttempt {
    pub url: String,
    pub charged_ms: u64,
    pub result: AttemptResult,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FetchRecord {
    pub url: String,
    pub outcome: FetchOutcome,
    pub served_by: Option<String>,
    pub charged_ms: u64,
    pub attempts: Vec<FetchAttempt>,
}

async fn fetch_one<F: FetchProvider>(request: &FetchRequest, budget: &BudgetConfig, fetcher: &F) -> FetchRecord {
    let candidates = std::iter::once(&request.url).chain(request.alternates.iter().take(budget.max_alternates));
    let mut charged: u64 = 0;
    let mut attempts = Vec::new();

    for candidate in candidates {
        let left = budget.per_source_total_ms - charged;
        if left == 0 {
            break;
        }
        let cap = budget.per_step_ms.min(left);
        let started = Instant::now();
        let (result, cost) = match timeout(Duration::from_millis(cap), fetcher.fetch(candidate)).await {
            Ok(Ok(())) => (AttemptResult::Ok, elapsed_ms(started).min(cap)),
            Ok(Err(err)) => {
                log::debug!("fetch of {candidate} failed: {err}");
                (AttemptResult::Error, elapsed_ms(started).min(cap))
            }
            Err(_) => {
                log::debug!("fetch of {candidate} cut off after {cap} ms");
                (AttemptResult::Timeout, cap)
            }
        };
        charged += cost;
        attempts.push(FetchAttempt {
            url: candidate.clone(),
            charged_ms: cost,
            result,
        });
        if result == AttemptResult::Ok {
            return FetchRecord {
                url: request.url.clone(),
                outcome: FetchOutcome::Ok,
                served_by: Some(candidate.clone()),
                charged_ms: charged,
                attempts,
            };
        }
    }

    let outcome = if charged >= budget.per_source_total_ms {
        FetchOutcome::BudgetExceeded
    } else if request.alternates.is_empty()
        && attempts.len() == 1
        && attempts[0].result == AttemptResult::Timeout
    {
        FetchOutcome::StepTimeout
    } else {
        FetchOutcome::ExhaustedAlternates
    };
    FetchRecord {
        url: request.url.clone(),
        outcome,
        served_by: None,
        charged_ms: charged,
        attempts,
    }
}

fn elapsed_ms(started: Instant) -> u64 {
    u64::try_from(started.elapsed().as_millis()).unwrap_or(u64::MAX)
}

/// Fetches every request under the budget; records come back in request order.
pub async fn schedule_fetch<F: FetchProvider>(
    requests: &[FetchRequest],
    budget: &BudgetConfig,
    fetcher: &F,
) -> Vec<FetchRecord> {
    let permits = Semaphore::new(budget.fetch_concurrency.max(1));
    join_all(requests.iter().map(|request| {
        let permits = &permits;
        async move {
            let _permit = permits.acquire().await.expect("semaphore is never closed");
            fetch_one(request, budget, fetcher).await
        }
    }))
    .await
}
