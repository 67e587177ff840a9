//! Age and prior-impact variables.
//!
//! All prior-impact counts use only citations made in calendar years strictly
//! before the paper's own publication year, so no variable leaks information
//! from the future of the paper it describes.

use std::collections::BTreeMap;
use std::str::FromStr;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, PaperRecord};
use crate::{Error, Result};

/// How a paper's age at the census year is turned into the time factor.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TauConvention {
    /// `collection_year - year + 1`, so a paper from the census year has τ = 1.
    #[default]
    AgePlusOne,
    /// `collection_year - year`.
    Age,
    /// `collection_year / year`.
    Ratio,
}

impl FromStr for TauConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "age_plus_one" | "age-plus-one" => Ok(TauConvention::AgePlusOne),
            "age" => Ok(TauConvention::Age),
            "ratio" => Ok(TauConvention::Ratio),
            other => Err(Error::Config(format!("unknown tau convention {other:?}"))),
        }
    }
}

pub fn compute_tau(year: i32, collection_year: i32, convention: TauConvention) -> Result<f64> {
    if year > collection_year {
        return Err(Error::Domain(format!(
            "publication year {year} is after collection year {collection_year}"
        )));
    }
    Ok(match convention {
        TauConvention::AgePlusOne => f64::from(collection_year - year + 1),
        TauConvention::Age => f64::from(collection_year - year),
        TauConvention::Ratio => {
            if year <= 0 {
                return Err(Error::Domain(format!("ratio convention needs a positive year, got {year}")));
            }
            f64::from(collection_year) / f64::from(year)
        }
    })
}

/// Citations the paper's authors had received for their earlier papers before
/// the paper appeared, summed over authors.
///
/// `paper` need not belong to `corpus`; only its year and authors are used.
pub fn compute_phi_a(paper: &PaperRecord, corpus: &Corpus) -> f64 {
    let mut total = 0u64;
    for author in &paper.author_ids {
        let Some(scholar) = corpus.scholar(author) else { continue };
        for pid in &scholar.paper_ids {
            let Some(earlier) = corpus.paper(pid) else { continue };
            if earlier.year < paper.year {
                total += u64::from(corpus.citations_before(pid, paper.year));
            }
        }
    }
    total as f64
}

/// Mean prior citation count of the venue's earlier papers; 0 without history.
pub fn compute_phi_v(paper: &PaperRecord, corpus: &Corpus) -> f64 {
    let (sum, n) = corpus
        .venue_papers(&paper.venue_id)
        .iter()
        .filter_map(|pid| corpus.paper(pid))
        .filter(|p| p.year < paper.year)
        .fold((0u64, 0u64), |(sum, n), p| {
            (sum + u64::from(corpus.citations_before(&p.paper_id, paper.year)), n + 1)
        });
    if n == 0 {
        0.0
    } else {
        sum as f64 / n as f64
    }
}

/// Citations the paper's in-corpus references had received before it appeared.
pub fn compute_phi_r(paper: &PaperRecord, corpus: &Corpus) -> f64 {
    paper
        .reference_ids
        .iter()
        .map(|r| u64::from(corpus.citations_before(r, paper.year)))
        .sum::<u64>() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaperFitnessVars {
    pub paper_id: String,
    pub year: i32,
    pub tau: f64,
    pub phi_a: f64,
    pub phi_v: f64,
    pub phi_r: f64,
    /// Citation count; real-valued so synthetic observations fit the same type.
    pub k: f64,
    pub authors: usize,
}

/// Variables for every paper, in key order.
pub fn paper_vars(corpus: &Corpus, convention: TauConvention) -> Result<Vec<PaperFitnessVars>> {
    let papers: Vec<&PaperRecord> = corpus.papers().collect();
    papers
        .par_iter()
        .map(|p| {
            Ok(PaperFitnessVars {
                paper_id: p.paper_id.clone(),
                year: p.year,
                tau: compute_tau(p.year, corpus.collection_year(), convention)?,
                phi_a: compute_phi_a(p, corpus),
                phi_v: compute_phi_v(p, corpus),
                phi_r: compute_phi_r(p, corpus),
                k: f64::from(p.citation_count),
                authors: p.author_count(),
            })
        })
        .collect()
}

/// Exact fractional citation credit: each author of paper i receives k_i / c_i.
pub fn fractional_scores_exact(corpus: &Corpus) -> BTreeMap<String, Ratio<i128>> {
    let mut scores: BTreeMap<String, Ratio<i128>> = BTreeMap::new();
    for p in corpus.papers() {
        let share = Ratio::new(i128::from(p.citation_count), p.author_count() as i128);
        for a in &p.author_ids {
            *scores.entry(a.clone()).or_insert_with(|| Ratio::from_integer(0)) += share;
        }
    }
    scores
}

pub fn fractional_scores(corpus: &Corpus) -> BTreeMap<String, f64> {
    fractional_scores_exact(corpus)
        .into_iter()
        .map(|(k, v)| (k, *v.numer() as f64 / *v.denom() as f64))
        .collect()
}

/// `(v_1 · … · v_n)^(1/n)`, evaluated as the exponential of the mean log.
pub fn geometric_mean(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Domain("geometric mean of an empty list".into()));
    }
    if let Some(bad) = values.iter().find(|v| **v <= 0.0 || !v.is_finite()) {
        return Err(Error::Domain(format!("geometric mean needs positive finite values, got {bad}")));
    }
    let mean_log = values.iter().map(|v| v.ln()).sum::<f64>() / values.len() as f64;
    let gm = mean_log.exp();
    // keep rounding from pushing the mean outside the sample range
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    Ok(gm.clamp(lo, hi))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScholarFitnessVars {
    pub scholar_id: String,
    /// Fractional citation score.
    pub k_s: f64,
    /// Number of authored papers.
    pub rho: usize,
    pub tau_bar: f64,
    /// Geometric means of the shifted values `φ + shift` over authored papers.
    pub phi_a_bar: f64,
    pub phi_v_bar: f64,
    pub phi_r_bar: f64,
    /// Arithmetic mean publication year, for display.
    pub mean_year: f64,
}

/// Per-scholar aggregates of `paper_vars` with φ shifted by `shift` first.
pub fn scholar_vars(
    corpus: &Corpus,
    paper_vars: &[PaperFitnessVars],
    shift: f64,
) -> Result<Vec<ScholarFitnessVars>> {
    let by_id: BTreeMap<&str, &PaperFitnessVars> =
        paper_vars.iter().map(|v| (v.paper_id.as_str(), v)).collect();
    let scores = fractional_scores(corpus);
    let scholars: Vec<_> = corpus.scholars().collect();
    scholars
        .par_iter()
        .map(|s| {
            let vars: Vec<&PaperFitnessVars> = s
                .paper_ids
                .iter()
                .map(|pid| {
                    by_id.get(pid.as_str()).copied().ok_or_else(|| {
                        Error::Domain(format!("no variables computed for paper {pid}"))
                    })
                })
                .collect::<Result<_>>()?;
            let gm = |f: fn(&PaperFitnessVars) -> f64, shift: f64| {
                geometric_mean(&vars.iter().map(|v| f(v) + shift).collect::<Vec<_>>())
            };
            Ok(ScholarFitnessVars {
                scholar_id: s.scholar_id.clone(),
                k_s: scores.get(&s.scholar_id).copied().unwrap_or(0.0),
                rho: vars.len(),
                tau_bar: gm(|v| v.tau, 0.0)?,
                phi_a_bar: gm(|v| v.phi_a, shift)?,
                phi_v_bar: gm(|v| v.phi_v, shift)?,
                phi_r_bar: gm(|v| v.phi_r, shift)?,
                mean_year: vars.iter().map(|v| f64::from(v.year)).sum::<f64>() / vars.len() as f64,
            })
        })
        .collect()
}
