use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::Source;
use crate::error::{Error, Result};

/// Host decomposition of a URL.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UrlParts {
    pub host: String,
    pub registrable_domain: String,
    pub tld: String,
}

/// Multi-label public suffixes under which the registrable domain keeps a
/// third label (`bbc.co.uk` rather than `co.uk`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SuffixTable {
    suffixes: BTreeSet<String>,
}

impl Default for SuffixTable {
    fn default() -> Self {
        Self::from_iter(["co.uk", "com.tr", "com.au", "co.jp", "ac.uk"])
    }
}

impl<S: AsRef<str>> FromIterator<S> for SuffixTable {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        SuffixTable {
            suffixes: iter
                .into_iter()
                .map(|s| s.as_ref().trim_matches('.').to_ascii_lowercase())
                .collect(),
        }
    }
}

impl SuffixTable {
    pub fn extend<S: AsRef<str>>(&mut self, more: impl IntoIterator<Item = S>) {
        self.suffixes.extend(
            more.into_iter()
                .map(|s| s.as_ref().trim_matches('.').to_ascii_lowercase()),
        );
    }

    pub fn contains(&self, suffix: &str) -> bool {
        self.suffixes.contains(suffix)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.suffixes.iter().map(String::as_str)
    }
}

/// TLDs that carry no geographic signal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GenericTldSet {
    members: BTreeSet<String>,
}

impl Default for GenericTldSet {
    fn default() -> Self {
        Self::from_iter(["com", "org", "net", "edu", "gov", "io", "ai", "app", "dev", "co"])
    }
}

impl<S: AsRef<str>> FromIterator<S> for GenericTldSet {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        GenericTldSet {
            members: iter
                .into_iter()
                .map(|s| s.as_ref().to_ascii_lowercase())
                .collect(),
        }
    }
}

impl GenericTldSet {
    pub fn contains(&self, tld: &str) -> bool {
        self.members.contains(tld)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

fn valid_label(label: &str) -> bool {
    !label.is_empty()
        && label
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_' || !c.is_ascii())
}

fn extract_host(url: &str) -> Option<String> {
    let trimmed = url.trim();
    let rest = match trimmed.find("://") {
        Some(idx) => {
            let scheme = &trimmed[..idx];
            let scheme_ok = scheme.starts_with(|c: char| c.is_ascii_alphabetic())
                && scheme
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'));
            if !scheme_ok {
                return None;
            }
            &trimmed[idx + 3..]
        }
        None => trimmed.strip_prefix("//").unwrap_or(trimmed),
    };
    let authority = rest.split(['/', '?', '#']).next().unwrap_or("");
    let host_port = authority.rsplit('@').next().unwrap_or("");
    let host = match host_port.split_once(':') {
        Some((host, port)) if port.chars().all(|c| c.is_ascii_digit()) => host,
        Some(_) => return None,
        None => host_port,
    };
    let host = host.strip_suffix('.').unwrap_or(host).to_ascii_lowercase();
    if host.is_empty() || !host.split('.').all(valid_label) {
        return None;
    }
    Some(host)
}

/// Splits a URL into host, registrable domain and TLD using the default
/// multi-label suffix table.
pub fn parse_url_parts(url: &str) -> Result<UrlParts> {
    parse_url_parts_with(url, &SuffixTable::default())
}

/// Like [`parse_url_parts`] with a caller-supplied suffix table.
pub fn parse_url_parts_with(url: &str, suffixes: &SuffixTable) -> Result<UrlParts> {
    let host = extract_host(url).ok_or_else(|| Error::MalformedUrl(url.to_owned()))?;

    let bare = match host.strip_prefix("www.") {
        Some(rest) if rest.contains('.') => rest,
        _ => host.as_str(),
    };
    let labels: Vec<&str> = bare.split('.').collect();
    let tld = labels[labels.len() - 1].to_owned();

    let keep = if labels.len() >= 3 && suffixes.contains(&labels[labels.len() - 2..].join(".")) {
        3
    } else {
        2
    };
    let registrable_domain = labels[labels.len().saturating_sub(keep)..].join(".");

    Ok(UrlParts {
        host,
        registrable_domain,
        tld,
    })
}

/// Registrable domain of a source's URL.
pub fn domain_of(source: &Source) -> Result<String> {
    parse_url_parts(&source.url).map(|parts| parts.registrable_domain)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parts(url: &str) -> UrlParts {
        parse_url_parts(url).unwrap()
    }

    #[test]
    fn strips_scheme_path_and_www() {
        assert_eq!(
            parts("https://www.example.de/page?x=1"),
            UrlParts {
                host: "www.example.de".into(),
                registrable_domain: "example.de".into(),
                tld: "de".into(),
            }
        );
    }

    #[test]
    fn multi_label_suffix_keeps_three_labels() {
        let p = parts("http://news.bbc.co.uk/a");
        assert_eq!(p.registrable_domain, "bbc.co.uk");
        assert_eq!(p.tld, "uk");
        assert_eq!(parts("https://www.hurriyet.com.tr/").registrable_domain, "hurriyet.com.tr");
        // The suffix itself, with nothing in front, stays as is.
        assert_eq!(parts("https://co.uk").registrable_domain, "co.uk");
    }

    #[test]
    fn two_label_host() {
        let p = parts("https://example.com");
        assert_eq!(p.registrable_domain, "example.com");
        assert_eq!(p.tld, "com");
    }

    #[test]
    fn domain_of_ignores_path_and_www() {
        let a = Source::new("https://www.tripadvisor.com/Hotel_Review-g123", 0);
        let b = Source::new("https://tripadvisor.com/Hotel_Review-g456", 1);
        assert_eq!(domain_of(&a).unwrap(), "tripadvisor.com");
        assert_eq!(domain_of(&b).unwrap(), "tripadvisor.com");
    }

    #[test]
    fn garbage_is_malformed() {
        let src = Source::new("ftp only-garbage", 0);
        assert!(matches!(domain_of(&src), Err(Error::MalformedUrl(_))));
        for bad in ["", "   ", "https://", "https:///path", "http://a..b", "http://host:port/", "1ab://x.com"] {
            assert!(parse_url_parts(bad).is_err(), "{bad:?} should be rejected");
        }
    }

    #[test]
    fn ports_userinfo_and_trailing_dot() {
        let p = parts("https://user:pw@Shop.Example.DE.:8443/x#frag");
        assert_eq!(p.host, "shop.example.de");
        assert_eq!(p.registrable_domain, "example.de");
    }

    #[test]
    fn scheme_less_and_case_insensitive() {
        assert_eq!(parts("EXAMPLE.DE"), parts("example.de"));
        assert_eq!(parts("www.x.y").registrable_domain, parts("x.y").registrable_domain);
        assert_eq!(parts("//cdn.example.org/a.js").registrable_domain, "example.org");
    }

    #[test]
    fn idn_hosts_pass_through() {
        let p = parts("https://www.bücher.de/");
        assert_eq!(p.registrable_domain, "bücher.de");
        assert_eq!(p.tld, "de");
    }

    #[test]
    fn suffix_table_is_extensible() {
        let mut table = SuffixTable::default();
        assert_eq!(
            parse_url_parts_with("https://a.b.org.uk", &table).unwrap().registrable_domain,
            "org.uk"
        );
        table.extend([".org.uk"]);
        assert_eq!(
            parse_url_parts_with("https://a.b.org.uk", &table).unwrap().registrable_domain,
            "b.org.uk"
        );
    }

    #[test]
    fn default_generic_set() {
        let generic = GenericTldSet::default();
        assert_eq!(generic.len(), 10);
        for tld in ["com", "org", "net", "edu", "gov", "io", "ai", "app", "dev", "co"] {
            assert!(generic.contains(tld));
        }
        assert!(!generic.contains("de"));
    }
}
