use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use serde::Deserialize;

use locale_merge::allocation::{allocate_locale_counts, LocaleMix, RawLocaleEntry, WeightedLocale};
use locale_merge::brief::{loi_success_probability, LoiParameters};
use locale_merge::cascade::{CascadeMaps, LanguageFallbackMap, OverrideMap};
use locale_merge::diversity::{select_with_diversity, ProviderOrder, RankedResults, ScoredRelevance, SelectionConfig};
use locale_merge::harness::{run_pipeline_blocking, BriefDocument, ClockMode, FixtureSet, PipelineConfig};
use locale_merge::metrics::{compute_metrics, LabeledSource};
use locale_merge::model::{CountryCode, LanguageCode, Locale, Source};
use locale_merge::Error;

#[derive(Parser)]
#[command(name = "locale-merge", version, about = "Merge multi-locale search results into a diverse source set")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Split a keyword budget across a weighted locale mix.
    Allocate {
        /// JSON array of {country, language, weight}.
        #[arg(long)]
        mix: PathBuf,
        #[arg(long)]
        total: u64,
    },
    /// Infer the publisher country of a URL.
    InferCountry {
        #[arg(long)]
        url: String,
        #[arg(long)]
        publisher_country: Option<String>,
        #[arg(long)]
        language: Option<String>,
        /// JSON object of TLD -> country code overrides.
        #[arg(long)]
        overrides: Option<PathBuf>,
        /// JSON object of language -> country fallbacks.
        #[arg(long)]
        fallback: Option<PathBuf>,
    },
    /// Select sources from a fixture file under a per-domain allowance.
    Select {
        #[arg(long)]
        fixtures: PathBuf,
        #[arg(long, default_value_t = 1)]
        kappa: u32,
        #[arg(long)]
        max_sources: usize,
    },
    /// Probability that at least one of k stages succeeds.
    Convergence {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        k: u32,
    },
    /// Compute first-party ratio, duplicate-domain ratio and locale coverage.
    Metrics {
        /// JSON array of {source, is_first_party}.
        #[arg(long)]
        labeled: PathBuf,
    },
    /// Run the whole pipeline over fixtures.
    Simulate {
        #[arg(long)]
        brief: PathBuf,
        #[arg(long)]
        fixtures: PathBuf,
        #[arg(long, default_value_t = 1)]
        kappa: u32,
        #[arg(long, default_value_t = 6)]
        total: u64,
        /// Defaults to the keyword total.
        #[arg(long)]
        max_sources: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "tr-tr")]
        default_locale: String,
        #[arg(long, default_value_t = 4)]
        max_locales: usize,
        /// Use a simulated clock instead of real sleeps.
        #[arg(long)]
        virtual_clock: bool,
    },
}

fn read_input(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Fixture(format!("{}: {e}", path.display())))
        .with_context(|| format!("reading {}", path.display()))
}

fn parse_input<T: for<'de> Deserialize<'de>>(path: &Path) -> anyhow::Result<T> {
    let text = read_input(path)?;
    serde_json::from_str(&text)
        .map_err(|e| anyhow::Error::new(Error::Fixture(format!("{}: {e}", path.display()))))
}

fn print_json<T: serde::Serialize>(value: &T) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

#[derive(Deserialize)]
struct LabeledInput {
    source: Source,
    #[serde(default)]
    is_first_party: bool,
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Allocate { mix, total } => {
            let raw: Vec<RawLocaleEntry> = parse_input(&mix)?;
            let entries = raw
                .into_iter()
                .map(WeightedLocale::try_from)
                .collect::<Result<Vec<_>, _>>()?;
            let mix = LocaleMix::new(entries)?;
            print_json(&allocate_locale_counts(&mix, total)?)
        }
        Command::InferCountry {
            url,
            publisher_country,
            language,
            overrides,
            fallback,
        } => {
            let mut maps = CascadeMaps::default();
            if let Some(path) = overrides {
                maps.overrides = parse_input::<OverrideMap>(&path)?;
            }
            if let Some(path) = fallback {
                maps.fallback = parse_input::<LanguageFallbackMap>(&path)?;
            }
            let mut source = Source::new(url, 0);
            source.publisher_country = publisher_country.as_deref().map(CountryCode::new).transpose()?;
            source.language = language.as_deref().map(LanguageCode::new).transpose()?;
            print_json(&maps.infer(&source)?)
        }
        Command::Select {
            fixtures,
            kappa,
            max_sources,
        } => {
            let set = FixtureSet::from_json(&read_input(&fixtures)?)?;
            let config = SelectionConfig::new(max_sources).with_kappa(kappa);
            config.validate()?;
            let ranked: Vec<RankedResults> = set
                .keyword_order()
                .into_iter()
                .map(|k| {
                    let results = set.searches.get(&k).map(|s| s.sources()).unwrap_or_default();
                    RankedResults::new(k, results)
                })
                .collect();
            let mut scores = ScoredRelevance::default();
            for (keyword, search) in &set.searches {
                for r in &search.results {
                    if let Some(score) = r.relevance_score {
                        scores.insert(keyword, &r.url, score);
                    }
                }
            }
            let report = if scores.is_empty() {
                select_with_diversity(&ranked, &config, &ProviderOrder)
            } else {
                select_with_diversity(&ranked, &config, &scores)
            };
            print_json(&report)
        }
        Command::Convergence { alpha, beta, k } => {
            let p = loi_success_probability(&LoiParameters { alpha, beta, k })?;
            print_json(&serde_json::json!({ "alpha": alpha, "beta": beta, "k": k, "probability": p }))
        }
        Command::Metrics { labeled } => {
            let inputs: Vec<LabeledInput> = parse_input(&labeled)?;
            let maps = CascadeMaps::default();
            let labeled = inputs
                .into_iter()
                .map(|i| LabeledSource::label(i.source, i.is_first_party, &maps))
                .collect::<Result<Vec<_>, _>>()?;
            print_json(&compute_metrics(&labeled)?)
        }
        Command::Simulate {
            brief,
            fixtures,
            kappa,
            total,
            max_sources,
            seed,
            default_locale,
            max_locales,
            virtual_clock,
        } => {
            let default_locale: Locale = default_locale.parse()?;
            let mut config = PipelineConfig::new(default_locale, total);
            config.selection.kappa = kappa;
            config.selection.max_sources = max_sources.unwrap_or(total as usize);
            config.normalization.max_locales = max_locales;
            config.seed = seed;

            let brief = BriefDocument::from_json(&read_input(&brief)?)?.into_brief(&config.normalization);
            let set = FixtureSet::from_json(&read_input(&fixtures)?)?;
            let clock = if virtual_clock { ClockMode::Virtual } else { ClockMode::Wall };
            let run = run_pipeline_blocking(&brief, &set, &config, clock)?;
            print_json(&run)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("LOCALE_MERGE_LOG", "error")).init();

    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let fixture_error = err
                .chain()
                .any(|cause| matches!(cause.downcast_ref::<Error>(), Some(Error::Fixture(_))));
            ExitCode::from(if fixture_error { 2 } else { 1 })
        }
    }
}
