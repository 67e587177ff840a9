//! Corpus readers and writers.
//!
//! Three input layouts are understood:
//!
//! * **XML** in the InfoVis 2004 contest style: a root element holding one
//!   `<article>` (or `<paper>`, `<record>`, `<publication>`) per paper. The key
//!   comes from an `id` attribute or an `<id>`/`<acmid>` child; `<year>`,
//!   a venue element (`<source>`, `<venue>`, `<conference>`, `<journal>`,
//!   `<booktitle>`), `<author>` elements holding names and `<reference>`
//!   elements holding the cited key (as text or in an `id`/`ref` attribute).
//!   Everything else (titles, abstracts, keywords) is skipped.
//! * **CSV triple** in a directory: `papers.csv` (`paper_id,year,venue_id`),
//!   `authors.csv` (`paper_id,position,name,scholar_id`; `scholar_id` may be
//!   empty) and `refs.csv` (`citing_id,cited_id`). Lines starting with `#` are
//!   comments.
//! * **JSONL**: one object per line with `paper_id`, `year`, `venue`,
//!   `authors` (names, or objects with `name` and optional `scholar_id`) and
//!   `references`.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use serde::{Deserialize, Serialize};

use super::{BuildOptions, Corpus, IngestReport, RawAuthor, RawPaper};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    Xml,
    Csv,
    Jsonl,
}

impl FromStr for InputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "xml" => Ok(InputFormat::Xml),
            "csv" => Ok(InputFormat::Csv),
            "jsonl" | "json" => Ok(InputFormat::Jsonl),
            other => Err(Error::Config(format!("unknown input format {other:?}"))),
        }
    }
}

/// Reads `path` in the declared format and builds the corpus.
///
/// For [`InputFormat::Csv`] the path names the directory holding the triple.
pub fn ingest(path: &Path, format: InputFormat, options: &BuildOptions) -> Result<(Corpus, IngestReport)> {
    let raw = match format {
        InputFormat::Xml => read_xml(path)?,
        InputFormat::Csv => read_csv_dir(path)?,
        InputFormat::Jsonl => read_jsonl(path)?,
    };
    Corpus::build(raw, options)
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

const RECORD_TAGS: &[&str] = &["article", "paper", "record", "publication"];
const ID_TAGS: &[&str] = &["id", "acmid", "paper_id", "key"];
const VENUE_TAGS: &[&str] = &["source", "venue", "conference", "journal", "booktitle"];
const AUTHOR_TAGS: &[&str] = &["author"];
const REFERENCE_TAGS: &[&str] = &["reference", "ref"];

#[derive(Default)]
struct XmlRecord {
    id: Option<String>,
    year: Option<String>,
    venue: Option<String>,
    authors: Vec<String>,
    references: Vec<String>,
    line: usize,
}

fn line_of(text: &str, offset: u64) -> usize {
    let end = (offset as usize).min(text.len());
    text.as_bytes()[..end].iter().filter(|&&b| b == b'\n').count() + 1
}

fn attr(e: &BytesStart<'_>, names: &[&str]) -> Option<String> {
    e.attributes().flatten().find_map(|a| {
        let key = String::from_utf8_lossy(a.key.local_name().as_ref()).to_ascii_lowercase();
        names
            .contains(&key.as_str())
            .then(|| a.unescape_value().ok().map(|v| v.trim().to_string()))
            .flatten()
    })
}

pub fn read_xml(path: &Path) -> Result<Vec<RawPaper>> {
    let text = read_to_string(path)?;
    let mut reader = Reader::from_str(&text);
    reader.config_mut().trim_text(true);

    let mut papers = Vec::new();
    let mut current: Option<XmlRecord> = None;
    // element stack inside the current record
    let mut stack: Vec<String> = Vec::new();
    let mut pending_ref_attr: Option<String> = None;
    let mut text_buf = String::new();

    let err = |offset: u64, message: String| Error::parse(path, format!("line {}", line_of(&text, offset)), message);

    loop {
        let event = reader
            .read_event()
            .map_err(|e| err(reader.error_position(), e.to_string()))?;
        match event {
            Event::Start(e) => {
                let name = String::from_utf8_lossy(e.local_name().as_ref()).to_ascii_lowercase();
                if current.is_none() && RECORD_TAGS.contains(&name.as_str()) {
                    current = Some(XmlRecord {
                        id: attr(&e, ID_TAGS),
                        year: attr(&e, &["year"]),
                        line: line_of(&text, reader.buffer_position()),
                        ..Default::default()
                    });
                    stack.clear();
                } else if current.is_some() {
                    if REFERENCE_TAGS.contains(&name.as_str()) {
                        pending_ref_attr = attr(&e, &["id", "ref", "idref", "key"]);
                    }
                    stack.push(name);
                    text_buf.clear();
                }
            }
            Event::Empty(e) => {
                let name = String::from_utf8_lossy(e.local_name().as_ref()).to_ascii_lowercase();
                if let Some(rec) = current.as_mut() {
                    if REFERENCE_TAGS.contains(&name.as_str()) {
                        if let Some(id) = attr(&e, &["id", "ref", "idref", "key"]) {
                            rec.references.push(id);
                        }
                    } else if AUTHOR_TAGS.contains(&name.as_str()) {
                        if let Some(n) = attr(&e, &["name"]) {
                            rec.authors.push(n);
                        }
                    }
                }
            }
            Event::Text(t) => {
                if current.is_some() && !stack.is_empty() {
                    let s = t
                        .unescape()
                        .map_err(|e| err(reader.buffer_position(), e.to_string()))?;
                    text_buf.push_str(&s);
                }
            }
            Event::CData(t) => {
                if current.is_some() && !stack.is_empty() {
                    text_buf.push_str(&String::from_utf8_lossy(&t));
                }
            }
            Event::End(e) => {
                let name = String::from_utf8_lossy(e.local_name().as_ref()).to_ascii_lowercase();
                let Some(rec) = current.as_mut() else { continue };
                if stack.is_empty() && RECORD_TAGS.contains(&name.as_str()) {
                    let rec = current.take().expect("record in progress");
                    papers.push(finish_xml_record(path, rec)?);
                    continue;
                }
                let value = text_buf.trim().to_string();
                text_buf.clear();
                stack.pop();
                // only direct children of the record (or of a grouping element) carry fields
                let tag = name.as_str();
                if ID_TAGS.contains(&tag) && stack.is_empty() {
                    rec.id.get_or_insert(value);
                } else if tag == "year" && stack.is_empty() {
                    rec.year.get_or_insert(value);
                } else if VENUE_TAGS.contains(&tag) && stack.is_empty() {
                    rec.venue.get_or_insert(value);
                } else if AUTHOR_TAGS.contains(&tag) {
                    if !value.is_empty() {
                        rec.authors.push(value);
                    }
                } else if REFERENCE_TAGS.contains(&tag) {
                    let id = pending_ref_attr.take().unwrap_or(value);
                    if !id.is_empty() {
                        rec.references.push(id);
                    }
                }
            }
            Event::Eof => break,
            _ => {}
        }
    }
    if let Some(rec) = current {
        return Err(Error::parse(path, format!("line {}", rec.line), "unterminated record"));
    }
    Ok(papers)
}

fn finish_xml_record(path: &Path, rec: XmlRecord) -> Result<RawPaper> {
    let locus = format!("line {}", rec.line);
    let paper_id = rec
        .id
        .filter(|s| !s.is_empty())
        .ok_or_else(|| Error::parse(path, &locus, "record without id"))?;
    let year_text = rec
        .year
        .ok_or_else(|| Error::parse(path, &locus, format!("record {paper_id} without year")))?;
    let year = year_text
        .trim()
        .parse::<i32>()
        .map_err(|_| Error::parse(path, &locus, format!("record {paper_id}: bad year {year_text:?}")))?;
    Ok(RawPaper {
        paper_id,
        year,
        venue: rec.venue.unwrap_or_default(),
        authors: rec.authors.into_iter().map(RawAuthor::named).collect(),
        references: rec.references,
    })
}

fn csv_reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::parse(path, "open", format!("{other:?}")),
        })
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    let locus = e
        .position()
        .map(|p| format!("line {}", p.line()))
        .unwrap_or_else(|| "unknown line".into());
    Error::parse(path, locus, e.to_string())
}

#[derive(Deserialize)]
struct PaperRow {
    paper_id: String,
    year: i32,
    #[serde(default)]
    venue_id: String,
}

#[derive(Deserialize)]
struct AuthorRow {
    paper_id: String,
    position: usize,
    #[serde(default)]
    name: String,
    #[serde(default)]
    scholar_id: String,
}

#[derive(Deserialize)]
struct RefRow {
    citing_id: String,
    cited_id: String,
}

pub fn read_csv_dir(dir: &Path) -> Result<Vec<RawPaper>> {
    let papers_path = dir.join("papers.csv");
    let authors_path = dir.join("authors.csv");
    let refs_path = dir.join("refs.csv");

    let mut order = Vec::new();
    let mut papers: BTreeMap<String, RawPaper> = BTreeMap::new();
    for row in csv_reader(&papers_path)?.deserialize::<PaperRow>() {
        let row = row.map_err(|e| csv_err(&papers_path, e))?;
        order.push(row.paper_id.clone());
        if papers.contains_key(&row.paper_id) {
            return Err(Error::parse(&papers_path, &row.paper_id, "duplicate paper id"));
        }
        papers.insert(
            row.paper_id.clone(),
            RawPaper {
                paper_id: row.paper_id,
                year: row.year,
                venue: row.venue_id,
                authors: Vec::new(),
                references: Vec::new(),
            },
        );
    }

    let mut authorships: BTreeMap<String, Vec<(usize, RawAuthor)>> = BTreeMap::new();
    for row in csv_reader(&authors_path)?.deserialize::<AuthorRow>() {
        let row = row.map_err(|e| csv_err(&authors_path, e))?;
        if !papers.contains_key(&row.paper_id) {
            return Err(Error::parse(
                &authors_path,
                &row.paper_id,
                "authorship row for unknown paper",
            ));
        }
        let name = if row.name.is_empty() { row.scholar_id.clone() } else { row.name };
        let scholar_id = (!row.scholar_id.is_empty()).then_some(row.scholar_id);
        authorships
            .entry(row.paper_id)
            .or_default()
            .push((row.position, RawAuthor { name, scholar_id }));
    }
    for (paper_id, mut list) in authorships {
        list.sort_by_key(|(pos, _)| *pos);
        papers.get_mut(&paper_id).expect("checked").authors = list.into_iter().map(|(_, a)| a).collect();
    }

    for row in csv_reader(&refs_path)?.deserialize::<RefRow>() {
        let row = row.map_err(|e| csv_err(&refs_path, e))?;
        let paper = papers.get_mut(&row.citing_id).ok_or_else(|| {
            Error::parse(&refs_path, &row.citing_id, "reference row for unknown citing paper")
        })?;
        paper.references.push(row.cited_id);
    }

    Ok(order.into_iter().filter_map(|id| papers.remove(&id)).collect())
}

#[derive(Deserialize)]
#[serde(untagged)]
enum JsonAuthor {
    Name(String),
    Full {
        name: String,
        #[serde(default)]
        scholar_id: Option<String>,
    },
}

#[derive(Deserialize)]
struct JsonPaper {
    paper_id: String,
    year: i32,
    #[serde(default, alias = "venue_id")]
    venue: String,
    #[serde(default)]
    authors: Vec<JsonAuthor>,
    #[serde(default)]
    references: Vec<String>,
}

pub fn read_jsonl(path: &Path) -> Result<Vec<RawPaper>> {
    let text = read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let p: JsonPaper = serde_json::from_str(line)
            .map_err(|e| Error::parse(path, format!("line {}", i + 1), e.to_string()))?;
        out.push(RawPaper {
            paper_id: p.paper_id,
            year: p.year,
            venue: p.venue,
            authors: p
                .authors
                .into_iter()
                .map(|a| match a {
                    JsonAuthor::Name(name) => RawAuthor::named(name),
                    JsonAuthor::Full { name, scholar_id } => RawAuthor { name, scholar_id },
                })
                .collect(),
            references: p.references,
        });
    }
    Ok(out)
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    fs::File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn write_header(w: &mut impl Write, path: &Path, header: Option<&str>) -> Result<()> {
    if let Some(h) = header {
        for line in h.lines() {
            writeln!(w, "# {line}").map_err(|e| Error::io(path, e))?;
        }
    }
    Ok(())
}

/// Writes the CSV triple into `dir`, creating it if needed.
///
/// `header`, when given, is written as `#`-prefixed comment lines at the top
/// of every file.
pub fn export_csv(corpus: &Corpus, dir: &Path, header: Option<&str>) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let path = dir.join("papers.csv");
    let mut w = create(&path)?;
    write_header(&mut w, &path, header)?;
    let mut papers = csv::Writer::from_writer(w);
    papers.write_record(["paper_id", "year", "venue_id"])?;
    for p in corpus.papers() {
        papers.write_record([p.paper_id.as_str(), &p.year.to_string(), &p.venue_id])?;
    }
    papers.flush().map_err(|e| Error::io(&path, e))?;

    let path = dir.join("authors.csv");
    let mut w = create(&path)?;
    write_header(&mut w, &path, header)?;
    let mut authors = csv::Writer::from_writer(w);
    authors.write_record(["paper_id", "position", "name", "scholar_id"])?;
    for p in corpus.papers() {
        for (i, (id, name)) in p.author_ids.iter().zip(&p.author_names).enumerate() {
            authors.write_record([p.paper_id.as_str(), &(i + 1).to_string(), name, id])?;
        }
    }
    authors.flush().map_err(|e| Error::io(&path, e))?;

    let path = dir.join("refs.csv");
    let mut w = create(&path)?;
    write_header(&mut w, &path, header)?;
    let mut refs = csv::Writer::from_writer(w);
    refs.write_record(["citing_id", "cited_id"])?;
    for p in corpus.papers() {
        for r in &p.reference_ids {
            refs.write_record([p.paper_id.as_str(), r])?;
        }
    }
    refs.flush().map_err(|e| Error::io(&path, e))?;
    Ok(())
}

#[derive(Serialize)]
struct JsonAuthorOut<'a> {
    name: &'a str,
    scholar_id: &'a str,
}

#[derive(Serialize)]
struct JsonPaperOut<'a> {
    paper_id: &'a str,
    year: i32,
    venue: &'a str,
    authors: Vec<JsonAuthorOut<'a>>,
    references: &'a [String],
}

pub fn export_jsonl(corpus: &Corpus, path: &Path, header: Option<&str>) -> Result<()> {
    let mut w = create(path)?;
    write_header(&mut w, path, header)?;
    for p in corpus.papers() {
        let out = JsonPaperOut {
            paper_id: &p.paper_id,
            year: p.year,
            venue: &p.venue_id,
            authors: p
                .author_ids
                .iter()
                .zip(&p.author_names)
                .map(|(id, name)| JsonAuthorOut { name, scholar_id: id })
                .collect(),
            references: &p.reference_ids,
        };
        serde_json::to_writer(&mut w, &out)?;
        writeln!(w).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const XML: &str = r#"<?xml version="1.0" encoding="UTF-8"?>
<article_set>
  <article id="A">
    <title>Cone Trees</title>
    <year>2000</year>
    <source>CHI</source>
    <authors><author>X</author></authors>
    <abstract>skipped &amp; ignored</abstract>
  </article>
  <article>
    <acmid>B</acmid>
    <year>2002</year>
    <conference>CHI</conference>
    <authors><author>X</author><author>Y</author></authors>
    <references><reference>A</reference><reference>elsewhere</reference></references>
  </article>
  <article id="C">
    <year>2003</year>
    <source>UIST</source>
    <authors><author>Y</author></authors>
    <references><reference id="A"/><reference ref="B"></reference></references>
  </article>
  <article id="acm673478">
    <year>2001</year>
    <source>CHI</source>
    <references><reference>A</reference></references>
  </article>
</article_set>
"#;

    #[test]
    fn xml_layout_parses() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.xml");
        fs::write(&path, XML).unwrap();
        let (c, report) = ingest(&path, InputFormat::Xml, &BuildOptions::default()).unwrap();
        assert_eq!(report.records_read, 4);
        assert_eq!(report.dropped_authorless, vec!["acm673478".to_string()]);
        assert_eq!(c.len(), 3);
        assert_eq!(c.paper("A").unwrap().citation_count, 2);
        assert_eq!(c.paper("B").unwrap().citation_count, 1);
        assert_eq!(c.paper("B").unwrap().venue_id, "CHI");
        assert_eq!(c.paper("B").unwrap().reference_ids, vec!["A".to_string(), "elsewhere".to_string()]);
        assert_eq!(report.dangling_references, 1);
        assert_eq!(report.references, 4);
        assert_eq!(c.scholars().len(), 2);
    }

    #[test]
    fn malformed_xml_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.xml");
        fs::write(&path, "<set>\n<article id=\"A\">\n<year>2000</yr>\n</article></set>").unwrap();
        let err = read_xml(&path).unwrap_err();
        match err {
            Error::Parse { locus, .. } => assert!(locus.starts_with("line 3"), "{locus}"),
            other => panic!("unexpected {other:?}"),
        }

        fs::write(&path, "<set>\n<article id=\"A\">\n<year>two thousand</year>\n</article></set>").unwrap();
        let err = read_xml(&path).unwrap_err();
        assert!(matches!(err, Error::Parse { ref locus, .. } if locus == "line 2"), "{err}");
    }

    #[test]
    fn jsonl_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.jsonl");
        fs::write(
            &path,
            "{\"paper_id\":\"A\",\"year\":2000,\"venue\":\"V\",\"authors\":[\"X\"]}\n{\"paper_id\":\"B\"\n",
        )
        .unwrap();
        let err = read_jsonl(&path).unwrap_err();
        assert!(matches!(err, Error::Parse { ref locus, .. } if locus == "line 2"), "{err}");
    }

    #[test]
    fn csv_unknown_paper_in_authors() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("papers.csv"), "paper_id,year,venue_id\nA,2000,V\n").unwrap();
        fs::write(dir.path().join("authors.csv"), "paper_id,position,name,scholar_id\nZ,1,X,\n").unwrap();
        fs::write(dir.path().join("refs.csv"), "citing_id,cited_id\n").unwrap();
        assert!(matches!(read_csv_dir(dir.path()), Err(Error::Parse { .. })));
    }

    #[test]
    fn missing_file_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            ingest(&dir.path().join("nope.xml"), InputFormat::Xml, &BuildOptions::default()),
            Err(Error::Io { .. })
        ));
    }
}
