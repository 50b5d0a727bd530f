use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("malformed url: {0:?}")]
    MalformedUrl(String),

    #[error("invalid country code: {0:?}")]
    InvalidCountryCode(String),

    #[error("invalid language code: {0:?}")]
    InvalidLanguageCode(String),

    #[error("invalid locale: {0:?}")]
    InvalidLocale(String),

    #[error("budget of {total} is smaller than the {locales} locales it must cover")]
    BudgetTooSmall { total: u64, locales: usize },

    #[error("weight {weight} for locale {locale} must be at least 1")]
    InvalidWeight { locale: String, weight: u64 },

    #[error("locale mix is empty")]
    EmptyLocaleMix,

    #[error("locale {0} appears more than once in the mix")]
    DuplicateLocale(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parameter out of domain: {0}")]
    DomainError(String),

    #[error("template references field `{0}` which is not part of this projection")]
    MissingField(String),

    #[error("template references unknown placeholder `{0}`")]
    UnknownPlaceholder(String),

    #[error("malformed template at byte {offset}: {reason}")]
    MalformedTemplate { offset: usize, reason: &'static str },

    #[error("fixture error: {0}")]
    Fixture(String),
}
