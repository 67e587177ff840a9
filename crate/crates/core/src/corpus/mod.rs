//! Citation corpus: papers, scholars, venues and the citation index.
//!
//! A [`Corpus`] is built once from raw records and is immutable afterwards.
//! Citation counts are always recomputed from reference lists; counts that a
//! source file may carry are never trusted.

mod io;
mod names;

use std::collections::{BTreeMap, BTreeSet};

use log::warn;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use io::{export_csv, export_jsonl, ingest, read_csv_dir, read_jsonl, read_xml, InputFormat};
pub use names::{normalize_name, normalize_names, NameOverrides, NameStyle};

/// One publication.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperRecord {
    pub paper_id: String,
    pub year: i32,
    pub venue_id: String,
    /// Scholar keys in byline order.
    pub author_ids: Vec<String>,
    /// Author names as spelled on this paper, parallel to `author_ids`.
    pub author_names: Vec<String>,
    /// Referenced paper keys; may point outside the corpus.
    pub reference_ids: Vec<String>,
    /// Number of in-corpus papers whose reference list contains this paper.
    pub citation_count: u32,
}

impl PaperRecord {
    pub fn author_count(&self) -> usize {
        self.author_ids.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScholarRecord {
    pub scholar_id: String,
    pub normalized_name: String,
    /// Distinct raw spellings seen for this scholar, sorted.
    pub alias_names: Vec<String>,
    /// Authored papers, sorted by key.
    pub paper_ids: Vec<String>,
}

/// A paper as read from a source file, before validation and normalization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawPaper {
    pub paper_id: String,
    pub year: i32,
    pub venue: String,
    pub authors: Vec<RawAuthor>,
    pub references: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawAuthor {
    pub name: String,
    /// Pre-resolved scholar key; when absent the key is the canonical name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scholar_id: Option<String>,
}

impl RawAuthor {
    pub fn named(name: impl Into<String>) -> Self {
        RawAuthor {
            name: name.into(),
            scholar_id: None,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct BuildOptions {
    /// Reject papers that cite later-published papers instead of flagging them.
    pub strict_years: bool,
    pub min_year: Option<i32>,
    /// Census year; defaults to the latest publication year.
    pub collection_year: Option<i32>,
    pub name_overrides: NameOverrides,
    pub name_style: NameStyle,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemporalViolation {
    pub citing: String,
    pub citing_year: i32,
    pub cited: String,
    pub cited_year: i32,
}

/// Summary of what ingestion read, kept and dropped.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub records_read: usize,
    pub papers: usize,
    pub scholars: usize,
    pub venues: usize,
    /// Total reference entries, within and outside the corpus.
    pub references: usize,
    pub in_corpus_references: usize,
    pub dangling_references: usize,
    pub dropped_authorless: Vec<String>,
    pub dropped_out_of_window: Vec<String>,
    pub duplicate_authors_removed: usize,
    pub duplicate_references_removed: usize,
    pub temporal_violations: Vec<TemporalViolation>,
    pub collection_year: Option<i32>,
}

#[derive(Debug, Clone, Default)]
struct CitationIndex {
    /// Publication years of in-corpus citing papers, sorted ascending.
    citing_years: BTreeMap<String, Vec<i32>>,
    venue_papers: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Clone)]
pub struct Corpus {
    papers: BTreeMap<String, PaperRecord>,
    scholars: BTreeMap<String, ScholarRecord>,
    venues: BTreeMap<String, String>,
    collection_year: i32,
    index: CitationIndex,
}

impl PartialEq for Corpus {
    fn eq(&self, other: &Self) -> bool {
        self.papers == other.papers
            && self.scholars == other.scholars
            && self.venues == other.venues
            && self.collection_year == other.collection_year
    }
}

impl Corpus {
    /// Validates raw records and assembles the corpus.
    pub fn build(raw: Vec<RawPaper>, options: &BuildOptions) -> Result<(Corpus, IngestReport)> {
        let mut report = IngestReport {
            records_read: raw.len(),
            ..Default::default()
        };

        let collection_year = options
            .collection_year
            .or_else(|| raw.iter().map(|p| p.year).max());

        let mut seen = BTreeSet::new();
        let mut papers: BTreeMap<String, PaperRecord> = BTreeMap::new();
        let mut aliases: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();

        for paper in raw {
            if !seen.insert(paper.paper_id.clone()) {
                return Err(Error::Config(format!("duplicate paper id {:?}", paper.paper_id)));
            }
            let in_window = options.min_year.is_none_or(|min| paper.year >= min)
                && collection_year.is_none_or(|c| paper.year <= c);
            if !in_window {
                warn!("dropping {}: year {} outside window", paper.paper_id, paper.year);
                report.dropped_out_of_window.push(paper.paper_id);
                continue;
            }

            let mut author_ids = Vec::with_capacity(paper.authors.len());
            let mut author_names = Vec::with_capacity(paper.authors.len());
            for author in &paper.authors {
                let key = match &author.scholar_id {
                    Some(id) if !id.trim().is_empty() => id.trim().to_string(),
                    _ => names::canonical_name(
                        &author.name,
                        Some(&options.name_overrides),
                        options.name_style,
                    ),
                };
                if key.is_empty() {
                    continue;
                }
                if author_ids.contains(&key) {
                    report.duplicate_authors_removed += 1;
                    continue;
                }
                aliases.entry(key.clone()).or_default().insert(author.name.clone());
                author_ids.push(key);
                author_names.push(author.name.clone());
            }
            if author_ids.is_empty() {
                warn!("dropping {}: no authors", paper.paper_id);
                report.dropped_authorless.push(paper.paper_id);
                continue;
            }

            let mut reference_ids: Vec<String> = Vec::with_capacity(paper.references.len());
            for r in paper.references {
                if r.is_empty() {
                    continue;
                }
                if reference_ids.contains(&r) {
                    report.duplicate_references_removed += 1;
                } else {
                    reference_ids.push(r);
                }
            }

            papers.insert(
                paper.paper_id.clone(),
                PaperRecord {
                    paper_id: paper.paper_id,
                    year: paper.year,
                    venue_id: paper.venue.trim().to_string(),
                    author_ids,
                    author_names,
                    reference_ids,
                    citation_count: 0,
                },
            );
        }

        // Aliases of scholars whose papers were all dropped must not leak in.
        let corpus = Self::assemble(papers, collection_year.unwrap_or(0), Some(aliases));

        for paper in corpus.papers.values() {
            report.references += paper.reference_ids.len();
            for r in &paper.reference_ids {
                match corpus.papers.get(r) {
                    None => report.dangling_references += 1,
                    Some(cited) => {
                        report.in_corpus_references += 1;
                        if cited.year > paper.year {
                            let v = TemporalViolation {
                                citing: paper.paper_id.clone(),
                                citing_year: paper.year,
                                cited: cited.paper_id.clone(),
                                cited_year: cited.year,
                            };
                            if options.strict_years {
                                return Err(Error::TemporalOrder {
                                    citing: v.citing,
                                    citing_year: v.citing_year,
                                    cited: v.cited,
                                    cited_year: v.cited_year,
                                });
                            }
                            warn!(
                                "{} ({}) cites later paper {} ({})",
                                v.citing, v.citing_year, v.cited, v.cited_year
                            );
                            report.temporal_violations.push(v);
                        }
                    }
                }
            }
        }

        report.papers = corpus.papers.len();
        report.scholars = corpus.scholars.len();
        report.venues = corpus.venues.len();
        report.collection_year = collection_year;
        Ok((corpus, report))
    }

    /// Recomputes citation counts, scholars, venues and the index.
    fn assemble(
        mut papers: BTreeMap<String, PaperRecord>,
        collection_year: i32,
        aliases: Option<BTreeMap<String, BTreeSet<String>>>,
    ) -> Corpus {
        let mut citing_years: BTreeMap<String, Vec<i32>> =
            papers.keys().map(|k| (k.clone(), Vec::new())).collect();
        for paper in papers.values() {
            for r in &paper.reference_ids {
                if let Some(years) = citing_years.get_mut(r) {
                    years.push(paper.year);
                }
            }
        }
        for (id, years) in citing_years.iter_mut() {
            years.sort_unstable();
            if let Some(p) = papers.get_mut(id) {
                p.citation_count = years.len() as u32;
            }
        }

        let mut scholars: BTreeMap<String, ScholarRecord> = BTreeMap::new();
        let mut venues = BTreeMap::new();
        let mut venue_papers: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for paper in papers.values() {
            for (id, name) in paper.author_ids.iter().zip(&paper.author_names) {
                let entry = scholars.entry(id.clone()).or_insert_with(|| ScholarRecord {
                    scholar_id: id.clone(),
                    normalized_name: id.clone(),
                    alias_names: Vec::new(),
                    paper_ids: Vec::new(),
                });
                entry.paper_ids.push(paper.paper_id.clone());
                if aliases.is_none() && !entry.alias_names.contains(name) {
                    entry.alias_names.push(name.clone());
                }
            }
            venues
                .entry(paper.venue_id.clone())
                .or_insert_with(|| paper.venue_id.clone());
            venue_papers
                .entry(paper.venue_id.clone())
                .or_default()
                .push(paper.paper_id.clone());
        }
        for scholar in scholars.values_mut() {
            if let Some(a) = aliases.as_ref().and_then(|a| a.get(&scholar.scholar_id)) {
                scholar.alias_names = a.iter().cloned().collect();
            }
            scholar.alias_names.sort();
        }

        Corpus {
            papers,
            scholars,
            venues,
            collection_year,
            index: CitationIndex {
                citing_years,
                venue_papers,
            },
        }
    }

    pub fn empty(collection_year: i32) -> Corpus {
        Self::assemble(BTreeMap::new(), collection_year, None)
    }

    pub fn papers(&self) -> impl ExactSizeIterator<Item = &PaperRecord> {
        self.papers.values()
    }

    pub fn paper(&self, id: &str) -> Option<&PaperRecord> {
        self.papers.get(id)
    }

    pub fn scholars(&self) -> impl ExactSizeIterator<Item = &ScholarRecord> {
        self.scholars.values()
    }

    pub fn scholar(&self, id: &str) -> Option<&ScholarRecord> {
        self.scholars.get(id)
    }

    pub fn venues(&self) -> &BTreeMap<String, String> {
        &self.venues
    }

    pub fn collection_year(&self) -> i32 {
        self.collection_year
    }

    pub fn len(&self) -> usize {
        self.papers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.papers.is_empty()
    }

    /// Citations received by `paper_id` from in-corpus papers published
    /// strictly before `year`.
    ///
    /// Flagged citations from papers older than the cited paper count toward
    /// its citation total but never toward this prior window.
    pub fn citations_before(&self, paper_id: &str, year: i32) -> u32 {
        let (Some(years), Some(cited)) = (self.index.citing_years.get(paper_id), self.papers.get(paper_id)) else {
            return 0;
        };
        let lo = years.partition_point(|&y| y < cited.year);
        let hi = years.partition_point(|&y| y < year);
        hi.saturating_sub(lo) as u32
    }

    /// Papers published at `venue_id`, sorted by key.
    pub fn venue_papers(&self, venue_id: &str) -> &[String] {
        self.index
            .venue_papers
            .get(venue_id)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// The sub-corpus of papers published before `year`, with counts recomputed.
    pub fn truncated_before(&self, year: i32) -> Corpus {
        let papers = self
            .papers
            .iter()
            .filter(|(_, p)| p.year < year)
            .map(|(k, p)| (k.clone(), p.clone()))
            .collect();
        Self::assemble(papers, self.collection_year, None)
    }

    /// Returns a copy with `collection_year` replaced.
    pub fn with_collection_year(mut self, year: i32) -> Corpus {
        self.collection_year = year;
        self
    }

    /// Builds a corpus from already validated records, e.g. a simulator export.
    pub fn from_records(papers: Vec<PaperRecord>, collection_year: i32) -> Corpus {
        let papers = papers.into_iter().map(|p| (p.paper_id.clone(), p)).collect();
        Self::assemble(papers, collection_year, None)
    }

    pub fn total_citations(&self) -> u64 {
        self.papers.values().map(|p| p.citation_count as u64).sum()
    }

    pub fn year_range(&self) -> Option<(i32, i32)> {
        let min = self.papers.values().map(|p| p.year).min()?;
        let max = self.papers.values().map(|p| p.year).max()?;
        Some((min, max))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct YearlyProfileRow {
    pub year: i32,
    pub papers: usize,
    /// References contained in papers published this year.
    pub references: usize,
    /// Citations received by papers published this year.
    pub citations: u64,
}

/// One row per year from the first to the last publication year.
pub fn yearly_profile(corpus: &Corpus) -> Vec<YearlyProfileRow> {
    let Some((first, last)) = corpus.year_range() else {
        return Vec::new();
    };
    let mut rows: Vec<YearlyProfileRow> = (first..=last)
        .map(|year| YearlyProfileRow {
            year,
            papers: 0,
            references: 0,
            citations: 0,
        })
        .collect();
    for p in corpus.papers() {
        let row = &mut rows[(p.year - first) as usize];
        row.papers += 1;
        row.references += p.reference_ids.len();
        row.citations += p.citation_count as u64;
    }
    rows
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;

    pub fn raw(id: &str, year: i32, venue: &str, authors: &[&str], refs: &[&str]) -> RawPaper {
        RawPaper {
            paper_id: id.into(),
            year,
            venue: venue.into(),
            authors: authors.iter().map(|a| RawAuthor::named(*a)).collect(),
            references: refs.iter().map(|r| r.to_string()).collect(),
        }
    }

    /// A by X (2000); B by X, Y citing A (2002); C by Y citing A and B (2003).
    pub fn toy_corpus() -> Corpus {
        let raw = vec![
            raw("A", 2000, "V", &["X"], &[]),
            raw("B", 2002, "V", &["X", "Y"], &["A"]),
            raw("C", 2003, "V", &["Y"], &["A", "B"]),
        ];
        Corpus::build(raw, &BuildOptions::default()).unwrap().0
    }
}

#[cfg(test)]
mod tests {
    use super::test_support::*;
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn toy_graph_counts() {
        let raw_papers = vec![
            raw("A", 2000, "V", &["P"], &[]),
            raw("B", 2000, "V", &["P"], &["A"]),
            raw("C", 2000, "V", &["P"], &["A", "B"]),
        ];
        let (c, report) = Corpus::build(raw_papers, &BuildOptions::default()).unwrap();
        assert_eq!(c.paper("A").unwrap().citation_count, 2);
        assert_eq!(c.paper("B").unwrap().citation_count, 1);
        assert_eq!(c.paper("C").unwrap().citation_count, 0);
        assert_eq!(report.references, 3);
        assert_eq!(report.dangling_references, 0);

        let profile = yearly_profile(&c);
        assert_eq!(
            profile,
            vec![YearlyProfileRow {
                year: 2000,
                papers: 3,
                references: 3,
                citations: 3
            }]
        );
    }

    #[test]
    fn empty_input() {
        let (c, report) = Corpus::build(Vec::new(), &BuildOptions::default()).unwrap();
        assert!(c.is_empty());
        assert_eq!(report.papers, 0);
        assert_eq!(report.references, 0);
        assert!(yearly_profile(&c).is_empty());
    }

    #[test]
    fn authorless_paper_dropped() {
        let raw_papers = vec![raw("A", 2000, "V", &["X"], &[]), raw("acm673478", 2000, "V", &[], &["A"])];
        let (c, report) = Corpus::build(raw_papers, &BuildOptions::default()).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(report.dropped_authorless, vec!["acm673478".to_string()]);
        assert_eq!(c.paper("A").unwrap().citation_count, 0);
    }

    #[test]
    fn dangling_references_kept_as_opaque_keys() {
        let raw_papers = vec![raw("A", 2000, "V", &["X"], &["outside1", "outside2"])];
        let (c, report) = Corpus::build(raw_papers, &BuildOptions::default()).unwrap();
        assert_eq!(c.paper("A").unwrap().reference_ids.len(), 2);
        assert_eq!(report.dangling_references, 2);
        assert_eq!(report.references, 2);
    }

    #[test]
    fn duplicates_removed() {
        let raw_papers = vec![
            raw("A", 2000, "V", &["X"], &[]),
            raw("B", 2001, "V", &["B. Shneiderman", "Shneiderman, B."], &["A", "A"]),
        ];
        let (c, report) = Corpus::build(raw_papers, &BuildOptions::default()).unwrap();
        let b = c.paper("B").unwrap();
        assert_eq!(b.author_ids, vec!["b shneiderman".to_string()]);
        assert_eq!(b.reference_ids, vec!["A".to_string()]);
        assert_eq!(report.duplicate_authors_removed, 1);
        assert_eq!(report.duplicate_references_removed, 1);
        assert_eq!(c.paper("A").unwrap().citation_count, 1);
    }

    #[test]
    fn later_citation_flagged_or_rejected() {
        let raw_papers = vec![raw("A", 2000, "V", &["X"], &["B"]), raw("B", 2001, "V", &["Y"], &[])];
        let (_, report) = Corpus::build(raw_papers.clone(), &BuildOptions::default()).unwrap();
        assert_eq!(report.temporal_violations.len(), 1);

        let strict = BuildOptions {
            strict_years: true,
            ..Default::default()
        };
        assert!(matches!(
            Corpus::build(raw_papers, &strict),
            Err(Error::TemporalOrder { .. })
        ));
    }

    #[test]
    fn year_window_and_collection_year() {
        let raw_papers = vec![
            raw("A", 1970, "V", &["X"], &[]),
            raw("B", 1990, "V", &["X"], &["A"]),
            raw("C", 2010, "V", &["X"], &["B"]),
        ];
        let opts = BuildOptions {
            min_year: Some(1974),
            collection_year: Some(2004),
            ..Default::default()
        };
        let (c, report) = Corpus::build(raw_papers, &opts).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.collection_year(), 2004);
        assert_eq!(report.dropped_out_of_window, vec!["A".to_string(), "C".to_string()]);

        let (c, _) = Corpus::build(vec![raw("A", 1999, "V", &["X"], &[])], &BuildOptions::default()).unwrap();
        assert_eq!(c.collection_year(), 1999);
    }

    #[test]
    fn duplicate_paper_ids_rejected() {
        let raw_papers = vec![raw("A", 2000, "V", &["X"], &[]), raw("A", 2001, "V", &["Y"], &[])];
        assert!(Corpus::build(raw_papers, &BuildOptions::default()).is_err());
    }

    #[test]
    fn scholars_and_aliases() {
        let raw_papers = vec![
            raw("A", 2000, "V", &["B. Shneiderman"], &[]),
            raw("B", 2001, "W", &["Shneiderman, B.", "S. Card"], &[]),
        ];
        let (c, _) = Corpus::build(raw_papers, &BuildOptions::default()).unwrap();
        let s = c.scholar("b shneiderman").unwrap();
        assert_eq!(s.paper_ids, vec!["A".to_string(), "B".to_string()]);
        assert_eq!(s.alias_names, vec!["B. Shneiderman".to_string(), "Shneiderman, B.".to_string()]);
        assert_eq!(c.venues().len(), 2);
        assert_eq!(c.venue_papers("W"), &["B".to_string()]);
    }

    #[test]
    fn citations_before_is_strict() {
        let c = toy_corpus();
        assert_eq!(c.citations_before("A", 2002), 0);
        assert_eq!(c.citations_before("A", 2003), 1);
        assert_eq!(c.citations_before("A", 2004), 2);
        assert_eq!(c.citations_before("missing", 2004), 0);
    }

    fn arb_raw_corpus() -> impl Strategy<Value = Vec<RawPaper>> {
        (1usize..25).prop_flat_map(|n| {
            proptest::collection::vec(
                (
                    1990i32..2000,
                    0usize..3,
                    proptest::collection::vec(0usize..6, 1..3),
                    proptest::collection::vec(0usize..(n + 3), 0..6),
                ),
                n,
            )
            .prop_map(move |rows| {
                rows.into_iter()
                    .enumerate()
                    .map(|(i, (year, venue, authors, refs))| RawPaper {
                        paper_id: format!("p{i}"),
                        year,
                        venue: format!("v{venue}"),
                        authors: authors.iter().map(|a| RawAuthor::named(format!("Author{a}"))).collect(),
                        references: refs.iter().map(|r| format!("p{r}")).collect(),
                    })
                    .collect()
            })
        })
    }

    proptest! {
        #[test]
        fn recomputed_counts_match_brute_force(raw_papers in arb_raw_corpus()) {
            let (c, report) = Corpus::build(raw_papers, &BuildOptions::default()).unwrap();
            for target in c.papers() {
                let brute = c.papers().filter(|p| p.reference_ids.contains(&target.paper_id)).count();
                prop_assert_eq!(target.citation_count as usize, brute);
            }
            let profile = yearly_profile(&c);
            prop_assert_eq!(profile.iter().map(|r| r.papers).sum::<usize>(), c.len());
            prop_assert_eq!(profile.iter().map(|r| r.references).sum::<usize>(), report.references);
            prop_assert_eq!(profile.iter().map(|r| r.citations).sum::<u64>(), c.total_citations());
        }
    }
}
