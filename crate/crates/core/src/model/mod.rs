//! Shared domain types: country and language codes, locales, sources, and
//! URL decomposition into host, registrable domain and top-level domain.

mod iso;
mod url;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use self::iso::{is_country_code, is_language_code};
pub use self::url::{
    domain_of, parse_url_parts, parse_url_parts_with, GenericTldSet, SuffixTable, UrlParts,
};

fn two_ascii_letters(raw: &str) -> Option<[u8; 2]> {
    let bytes = raw.trim().as_bytes();
    match bytes {
        [a, b] if a.is_ascii_alphabetic() && b.is_ascii_alphabetic() => {
            Some([a.to_ascii_lowercase(), b.to_ascii_lowercase()])
        }
        _ => None,
    }
}

/// ISO 3166-1 alpha-2 country code, stored lowercase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct CountryCode([u8; 2]);

impl CountryCode {
    /// Parses a code case-insensitively and checks it against the bundled table.
    pub fn new(raw: &str) -> Result<Self> {
        let code = two_ascii_letters(raw).ok_or_else(|| Error::InvalidCountryCode(raw.to_owned()))?;
        let code = CountryCode(code);
        if is_country_code(code.as_str()) {
            Ok(code)
        } else {
            Err(Error::InvalidCountryCode(raw.to_owned()))
        }
    }

    pub fn as_str(&self) -> &str {
        // Only ASCII letters are ever stored.
        std::str::from_utf8(&self.0).expect("ascii")
    }
}

/// ISO 639-1 language code, stored lowercase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct LanguageCode([u8; 2]);

impl LanguageCode {
    pub fn new(raw: &str) -> Result<Self> {
        let code = two_ascii_letters(raw).ok_or_else(|| Error::InvalidLanguageCode(raw.to_owned()))?;
        let code = LanguageCode(code);
        if is_language_code(code.as_str()) {
            Ok(code)
        } else {
            Err(Error::InvalidLanguageCode(raw.to_owned()))
        }
    }

    pub fn as_str(&self) -> &str {
        std::str::from_utf8(&self.0).expect("ascii")
    }
}

macro_rules! code_conversions {
    ($ty:ident) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                $ty::new(s)
            }
        }

        impl TryFrom<String> for $ty {
            type Error = Error;

            fn try_from(s: String) -> Result<Self> {
                $ty::new(&s)
            }
        }

        impl From<$ty> for String {
            fn from(code: $ty) -> String {
                code.as_str().to_owned()
            }
        }
    };
}

code_conversions!(CountryCode);
code_conversions!(LanguageCode);

/// A (country, language) pair targeting one regional search index.
///
/// Written as `country-language`, e.g. `de-de` or `us-en`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Locale {
    pub country: CountryCode,
    pub language: LanguageCode,
}

impl Locale {
    pub fn new(country: CountryCode, language: LanguageCode) -> Self {
        Locale { country, language }
    }

    pub fn parse_pair(country: &str, language: &str) -> Result<Self> {
        Ok(Locale {
            country: CountryCode::new(country)?,
            language: LanguageCode::new(language)?,
        })
    }
}

impl fmt::Display for Locale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.country, self.language)
    }
}

impl FromStr for Locale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (country, language) = s
            .split_once(['-', '_'])
            .ok_or_else(|| Error::InvalidLocale(s.to_owned()))?;
        Locale::parse_pair(country, language).map_err(|_| Error::InvalidLocale(s.to_owned()))
    }
}

impl TryFrom<String> for Locale {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Locale> for String {
    fn from(locale: Locale) -> String {
        locale.to_string()
    }
}

/// One search result: URL, title and snippet, its position in the provider's
/// list, and optional model-inferred metadata.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Source {
    pub url: String,
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub snippet: String,
    #[serde(default)]
    pub rank: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub publisher_country: Option<CountryCode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub language: Option<LanguageCode>,
}

impl Source {
    pub fn new(url: impl Into<String>, rank: u32) -> Self {
        Source {
            url: url.into(),
            title: String::new(),
            snippet: String::new(),
            rank,
            publisher_country: None,
            language: None,
        }
    }

    pub fn with_publisher_country(mut self, country: CountryCode) -> Self {
        self.publisher_country = Some(country);
        self
    }

    pub fn with_language(mut self, language: LanguageCode) -> Self {
        self.language = Some(language);
        self
    }
}
