//! Rule-based author name unification.
//!
//! Names are case-folded and stripped of punctuation, and the inverted
//! `"Last, First"` form is turned around so that `"Shneiderman, B."` and
//! `"B. Shneiderman"` meet at `"b shneiderman"`. An override table supplied by
//! the user is consulted last and always wins.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// How given names are rendered in the canonical form.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NameStyle {
    /// Given names collapse to their initials: `"Ben Shneiderman"` -> `"b shneiderman"`.
    #[default]
    Initials,
    /// Given names are kept whole: `"Ben Shneiderman"` -> `"ben shneiderman"`.
    FullGiven,
}

/// Raw-name to canonical-name corrections, applied after the rules.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NameOverrides {
    map: BTreeMap<String, String>,
}

impl NameOverrides {
    /// Builds the table, rejecting a raw name that is mapped to two different
    /// canonical names.
    pub fn from_pairs<I, S, T>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, T)>,
        S: Into<String>,
        T: Into<String>,
    {
        let mut map = BTreeMap::new();
        for (raw, canonical) in pairs {
            let raw = raw.into().trim().to_string();
            let canonical = canonical.into().trim().to_string();
            match map.get(&raw) {
                Some(existing) if *existing != canonical => {
                    return Err(Error::Config(format!(
                        "conflicting name overrides for {raw:?}: {existing:?} vs {canonical:?}"
                    )));
                }
                _ => {
                    map.insert(raw, canonical);
                }
            }
        }
        Ok(NameOverrides { map })
    }

    /// Reads a two-column CSV (`raw,canonical`); a literal header row is skipped.
    pub fn load(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .flexible(false)
            .from_path(path)
            .map_err(|e| Error::parse(path, "open", e.to_string()))?;
        let mut pairs = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(|e| {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                Error::parse(path, format!("line {line}"), e.to_string())
            })?;
            if record.len() != 2 {
                return Err(Error::parse(
                    path,
                    format!("record {}", i + 1),
                    "expected two columns: raw,canonical",
                ));
            }
            if i == 0 && &record[0] == "raw" && &record[1] == "canonical" {
                continue;
            }
            pairs.push((record[0].to_string(), record[1].to_string()));
        }
        Self::from_pairs(pairs)
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Looks up the raw spelling first, then its rule-normalized form.
    fn lookup(&self, raw: &str, normalized: &str) -> Option<&String> {
        self.map.get(raw.trim()).or_else(|| self.map.get(normalized))
    }
}

/// Canonical form of a single name under the rules alone.
pub fn normalize_name(raw: &str, style: NameStyle) -> String {
    let raw = raw.trim();
    let reordered = match raw.split_once(',') {
        Some((last, given)) if !given.trim().is_empty() => format!("{given} {last}"),
        Some((last, _)) => last.to_string(),
        None => raw.to_string(),
    };

    let mut cleaned = String::with_capacity(reordered.len());
    for c in reordered.chars().flat_map(char::to_lowercase) {
        if c.is_alphanumeric() || c.is_whitespace() {
            cleaned.push(c);
        } else if matches!(c, '.' | '-' | '_' | ',' | ';' | '/') {
            cleaned.push(' ');
        }
        // apostrophes and other marks vanish: "O'Brien" -> "obrien"
    }

    let tokens: Vec<&str> = cleaned.split_whitespace().collect();
    match (style, tokens.split_last()) {
        (_, None) => String::new(),
        (NameStyle::FullGiven, _) => tokens.join(" "),
        (NameStyle::Initials, Some((last, given))) => {
            let mut out: Vec<String> = given
                .iter()
                .filter_map(|t| t.chars().next().map(String::from))
                .collect();
            out.push((*last).to_string());
            out.join(" ")
        }
    }
}

/// Maps every raw spelling to its canonical form, overrides applied last.
pub fn normalize_names<S: AsRef<str>>(
    raw_names: &[S],
    overrides: Option<&NameOverrides>,
    style: NameStyle,
) -> BTreeMap<String, String> {
    raw_names
        .iter()
        .map(|raw| {
            let raw = raw.as_ref();
            (raw.to_string(), canonical_name(raw, overrides, style))
        })
        .collect()
}

pub(crate) fn canonical_name(raw: &str, overrides: Option<&NameOverrides>, style: NameStyle) -> String {
    let normalized = normalize_name(raw, style);
    overrides
        .and_then(|o| o.lookup(raw, &normalized))
        .cloned()
        .unwrap_or(normalized)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn inverted_and_direct_forms_unify() {
        let map = normalize_names(&["B. Shneiderman", "Shneiderman, B."], None, NameStyle::Initials);
        assert_eq!(map["B. Shneiderman"], "b shneiderman");
        assert_eq!(map["Shneiderman, B."], "b shneiderman");
    }

    #[test]
    fn initials_collapse_given_names() {
        assert_eq!(normalize_name("Jock D. Mackinlay", NameStyle::Initials), "j d mackinlay");
        assert_eq!(normalize_name("Mackinlay, J. D.", NameStyle::Initials), "j d mackinlay");
        assert_eq!(normalize_name("Jock D. Mackinlay", NameStyle::FullGiven), "jock d mackinlay");
        assert_eq!(normalize_name("Jean-Daniel Fekete", NameStyle::Initials), "j d fekete");
    }

    #[test]
    fn override_wins() {
        let overrides = NameOverrides::from_pairs([("X", "Y")]).unwrap();
        let map = normalize_names(&["X"], Some(&overrides), NameStyle::Initials);
        assert_eq!(map["X"], "Y");
    }

    #[test]
    fn override_matches_normalized_key() {
        let overrides = NameOverrides::from_pairs([("b shneiderman", "ben shneiderman")]).unwrap();
        let map = normalize_names(&["Shneiderman, B."], Some(&overrides), NameStyle::Initials);
        assert_eq!(map["Shneiderman, B."], "ben shneiderman");
    }

    #[test]
    fn empty_input_gives_empty_mapping() {
        let empty: [&str; 0] = [];
        assert!(normalize_names(&empty, None, NameStyle::Initials).is_empty());
    }

    #[test]
    fn conflicting_overrides_rejected() {
        let err = NameOverrides::from_pairs([("X", "Y"), ("X", "Z")]).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        // repeating an identical entry is fine
        assert!(NameOverrides::from_pairs([("X", "Y"), ("X", "Y")]).is_ok());
    }

    #[test]
    fn overrides_file_with_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("names.csv");
        std::fs::write(&path, "raw,canonical\nX,Y\nShneiderman B,b shneiderman\n").unwrap();
        let o = NameOverrides::load(&path).unwrap();
        assert_eq!(canonical_name("X", Some(&o), NameStyle::Initials), "Y");
    }

    proptest! {
        #[test]
        fn normalization_is_idempotent(raw in "[A-Za-z ,.'-]{0,30}") {
            for style in [NameStyle::Initials, NameStyle::FullGiven] {
                let once = normalize_name(&raw, style);
                prop_assert_eq!(normalize_name(&once, style), once.clone());
            }
        }
    }
}
