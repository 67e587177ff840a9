//! Frequency distributions, tail fits, yearly trends and authorship summaries.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::inference::{ols_fit, DesignMatrix};
use crate::models::{score_table, FittedFitnessModel, ModelKind, ScoreColumn, ScoreTable};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistributionKind {
    Discrete,
    /// Survival counts, `#{X >= x}`.
    Cumulative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Binning {
    /// One point per distinct value.
    Unit,
    /// Powers-of-two bins over positive values.
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailFamily {
    PowerLaw,
    Exponential,
}

macro_rules! str_enum {
    ($t:ty { $($s:literal => $v:expr),+ $(,)? }) => {
        impl FromStr for $t {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($s => Ok($v),)+
                    other => Err(Error::Config(format!(
                        concat!("unknown ", stringify!($t), " {:?}"), other
                    ))),
                }
            }
        }
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                $(if *self == $v { return f.write_str($s); })+
                unreachable!()
            }
        }
    };
}

str_enum!(DistributionKind { "discrete" => DistributionKind::Discrete, "cumulative" => DistributionKind::Cumulative });
str_enum!(Binning { "unit" => Binning::Unit, "log" => Binning::Log });
str_enum!(TailFamily { "power_law" => TailFamily::PowerLaw, "exponential" => TailFamily::Exponential });

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyPoint {
    pub x: f64,
    /// Count (unit bins), count per unit width (log bins) or survival count.
    pub y: f64,
    /// Raw number of scores behind this point (bin or distinct value).
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencySeries {
    pub kind: DistributionKind,
    pub binning: Binning,
    pub x_log: bool,
    pub y_log: bool,
    pub points: Vec<FrequencyPoint>,
    /// Number of scores the series describes.
    pub population: usize,
    /// Zero scores left out because log binning cannot place them.
    pub excluded_zeros: usize,
}

pub fn distribution(scores: &[f64], kind: DistributionKind, binning: Binning) -> Result<FrequencySeries> {
    if let Some(bad) = scores.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::Domain(format!("score {bad} is not a finite nonnegative number")));
    }
    let (kept, excluded_zeros): (Vec<f64>, usize) = match binning {
        Binning::Unit => (scores.to_vec(), 0),
        Binning::Log => {
            let pos: Vec<f64> = scores.iter().copied().filter(|v| *v > 0.0).collect();
            let zeros = scores.len() - pos.len();
            (pos, zeros)
        }
    };

    // (representative x, bin lower edge, bin width, count)
    let mut bins: Vec<(f64, f64, f64, usize)> = Vec::new();
    match binning {
        Binning::Unit => {
            let mut sorted = kept.clone();
            sorted.sort_by(f64::total_cmp);
            for v in sorted {
                match bins.last_mut() {
                    Some(b) if b.0 == v => b.3 += 1,
                    _ => bins.push((v, v, 1.0, 1)),
                }
            }
        }
        Binning::Log => {
            let mut by_exp: BTreeMap<i32, usize> = BTreeMap::new();
            for v in &kept {
                *by_exp.entry(v.log2().floor() as i32).or_default() += 1;
            }
            for (e, c) in by_exp {
                let lo = 2f64.powi(e);
                bins.push(((lo * 2f64.powi(e + 1)).sqrt(), lo, lo, c));
            }
        }
    }

    let population = kept.len();
    let points = match kind {
        DistributionKind::Discrete => bins
            .iter()
            .map(|&(x, _, w, c)| FrequencyPoint {
                x,
                y: match binning {
                    Binning::Unit => c as f64,
                    Binning::Log => c as f64 / w,
                },
                count: c,
            })
            .collect(),
        DistributionKind::Cumulative => {
            let mut remaining = population;
            bins.iter()
                .map(|&(_, lo, _, c)| {
                    let p = FrequencyPoint {
                        x: lo,
                        y: remaining as f64,
                        count: c,
                    };
                    remaining -= c;
                    p
                })
                .collect()
        }
    };
    Ok(FrequencySeries {
        kind,
        binning,
        x_log: binning == Binning::Log,
        y_log: binning == Binning::Log,
        points,
        population,
        excluded_zeros,
    })
}

impl FrequencySeries {
    /// Keeps points with `x` in `[x_min, x_max]`.
    pub fn restricted(&self, x_min: f64, x_max: f64) -> FrequencySeries {
        FrequencySeries {
            points: self
                .points
                .iter()
                .copied()
                .filter(|p| p.x >= x_min && p.x <= x_max)
                .collect(),
            ..self.clone()
        }
    }

    /// Keeps points backed by at least `min_count` scores (cumulative: survival count).
    pub fn with_min_support(&self, min_count: usize) -> FrequencySeries {
        FrequencySeries {
            points: self
                .points
                .iter()
                .copied()
                .filter(|p| match self.kind {
                    DistributionKind::Discrete => p.count >= min_count,
                    DistributionKind::Cumulative => p.y >= min_count as f64,
                })
                .collect(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub family: TailFamily,
    /// Power-law exponent, or rate for the exponential family.
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n_points: usize,
}

/// Straight-line fit of `ln y` on `ln x` (power law) or on `x` (exponential).
pub fn tail_fit(series: &FrequencySeries, family: TailFamily) -> Result<TailFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = series
        .points
        .iter()
        .filter(|p| p.y > 0.0 && (family == TailFamily::Exponential || p.x > 0.0))
        .map(|p| {
            let x = match family {
                TailFamily::PowerLaw => p.x.ln(),
                TailFamily::Exponential => p.x,
            };
            (x, p.y.ln())
        })
        .unzip();
    if xs.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} usable points for a {family} tail fit; need at least 3",
            xs.len()
        )));
    }
    let n_points = xs.len();
    let fit = ols_fit(&DesignMatrix::builder(ys).intercept("intercept").column("slope", xs).build()?)?;
    Ok(TailFit {
        family,
        slope: fit.coefficients[1],
        intercept: fit.coefficients[0],
        r_squared: fit.r_squared,
        n_points,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendYear {
    pub year: i32,
    /// `(entity key, score)` in key order.
    pub scores: Vec<(String, f64)>,
    /// Arithmetic mean; absent for a year without entities.
    pub mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendSeries {
    pub column: ScoreColumn,
    pub years: Vec<TrendYear>,
}

impl TrendSeries {
    pub fn mean_at(&self, year: i32) -> Option<f64> {
        self.years.iter().find(|y| y.year == year).and_then(|y| y.mean)
    }

    /// Year with the highest mean (earliest on ties).
    pub fn peak_year(&self) -> Option<i32> {
        self.years
            .iter()
            .filter_map(|y| y.mean.map(|m| (y.year, m)))
            .fold(None, |best: Option<(i32, f64)>, (y, m)| match best {
                Some((_, bm)) if bm >= m => best,
                _ => Some((y, m)),
            })
            .map(|(y, _)| y)
    }
}

/// Groups `(key, year, score)` by year over the full contiguous year range.
pub fn trend_points<I>(points: I, column: ScoreColumn) -> TrendSeries
where
    I: IntoIterator<Item = (String, i32, f64)>,
{
    let mut by_year: BTreeMap<i32, Vec<(String, f64)>> = BTreeMap::new();
    for (key, year, score) in points {
        by_year.entry(year).or_default().push((key, score));
    }
    let (Some(&lo), Some(&hi)) = (by_year.keys().next(), by_year.keys().next_back()) else {
        return TrendSeries { column, years: Vec::new() };
    };
    let years = (lo..=hi)
        .map(|year| {
            let mut scores = by_year.remove(&year).unwrap_or_default();
            scores.sort_by(|a, b| a.0.cmp(&b.0));
            let mean = (!scores.is_empty())
                .then(|| scores.iter().map(|s| s.1).sum::<f64>() / scores.len() as f64);
            TrendYear { year, scores, mean }
        })
        .collect();
    TrendSeries { column, years }
}

/// Yearly series of one score column. Scholars are placed at their rounded
/// mean publication year.
pub fn trend(table: &ScoreTable, column: ScoreColumn) -> TrendSeries {
    trend_points(
        table
            .rows
            .iter()
            .map(|r| (r.key.clone(), r.year.round() as i32, r.score(column))),
        column,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuthorGroup {
    pub authors: usize,
    pub papers: usize,
    pub mean_k: f64,
    pub mean_k_t: f64,
    pub mean_k_tf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamSizeYear {
    pub year: i32,
    pub papers: usize,
    pub mean_authors: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuthorshipSummary {
    pub groups: Vec<AuthorGroup>,
    pub team_size: Vec<TeamSizeYear>,
}

pub fn authorship_analysis(corpus: &Corpus, model: &FittedFitnessModel) -> Result<AuthorshipSummary> {
    if model.kind != ModelKind::Paper {
        return Err(Error::Config("authorship analysis needs a paper model".into()));
    }
    authorship_from_table(&score_table(model, corpus, None)?)
}

pub fn authorship_from_table(table: &ScoreTable) -> Result<AuthorshipSummary> {
    if table.kind != ModelKind::Paper {
        return Err(Error::Config("authorship analysis needs paper scores".into()));
    }
    let mut sums: BTreeMap<usize, (usize, f64, f64, f64)> = BTreeMap::new();
    let mut points = Vec::with_capacity(table.rows.len());
    for r in &table.rows {
        let a = r.authors.unwrap_or(1);
        let e = sums.entry(a).or_default();
        e.0 += 1;
        e.1 += r.k;
        e.2 += r.k_t;
        e.3 += r.k_tf;
        points.push((r.key.clone(), r.year.round() as i32, a as f64));
    }
    let groups = sums
        .into_iter()
        .map(|(authors, (n, k, kt, ktf))| AuthorGroup {
            authors,
            papers: n,
            mean_k: k / n as f64,
            mean_k_t: kt / n as f64,
            mean_k_tf: ktf / n as f64,
        })
        .collect();
    let team_size = trend_points(points, ScoreColumn::K)
        .years
        .into_iter()
        .map(|y| TeamSizeYear {
            year: y.year,
            papers: y.scores.len(),
            mean_authors: y.mean,
        })
        .collect();
    Ok(AuthorshipSummary { groups, team_size })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ScoreRow;
    use proptest::prelude::*;

    fn xy(s: &FrequencySeries) -> Vec<(f64, f64)> {
        s.points.iter().map(|p| (p.x, p.y)).collect()
    }

    #[test]
    fn tally_examples() {
        let d = distribution(&[1.0, 1.0, 2.0], DistributionKind::Discrete, Binning::Unit).unwrap();
        assert_eq!(xy(&d), vec![(1.0, 2.0), (2.0, 1.0)]);
        let c = distribution(&[1.0, 1.0, 2.0], DistributionKind::Cumulative, Binning::Unit).unwrap();
        assert_eq!(xy(&c), vec![(1.0, 3.0), (2.0, 1.0)]);
        let same = distribution(&[4.0; 7], DistributionKind::Discrete, Binning::Unit).unwrap();
        assert_eq!(xy(&same), vec![(4.0, 7.0)]);
    }

    #[test]
    fn log_bins_exclude_zeros() {
        let d = distribution(&[0.0, 0.0, 1.0, 2.0, 3.0, 5.0], DistributionKind::Discrete, Binning::Log).unwrap();
        assert_eq!(d.excluded_zeros, 2);
        assert_eq!(d.population, 4);
        let counts: Vec<usize> = d.points.iter().map(|p| p.count).collect();
        assert_eq!(counts, vec![1, 2, 1]);
        // [2,4) holds two scores over width 2
        assert_eq!(d.points[1].y, 1.0);
        assert!(d.x_log && d.y_log);
    }

    #[test]
    fn exact_power_law() {
        let pts = (1..=20)
            .map(|i| {
                let x = i as f64;
                FrequencyPoint { x, y: x.powi(-2), count: 1 }
            })
            .collect();
        let s = FrequencySeries {
            kind: DistributionKind::Discrete,
            binning: Binning::Unit,
            x_log: true,
            y_log: true,
            points: pts,
            population: 20,
            excluded_zeros: 0,
        };
        let f = tail_fit(&s, TailFamily::PowerLaw).unwrap();
        assert!((f.slope + 2.0).abs() < 1e-10);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tail_fit_needs_three_points() {
        let d = distribution(&[1.0, 2.0], DistributionKind::Discrete, Binning::Unit).unwrap();
        assert!(matches!(tail_fit(&d, TailFamily::PowerLaw), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn restriction_and_support() {
        let d = distribution(&[1.0, 2.0, 2.0, 3.0, 9.0], DistributionKind::Discrete, Binning::Unit).unwrap();
        assert_eq!(d.restricted(2.0, 3.0).points.len(), 2);
        assert_eq!(d.with_min_support(2).points.len(), 1);
    }

    fn row(key: &str, year: f64, k: f64, tau: f64, authors: usize) -> ScoreRow {
        ScoreRow {
            key: key.into(),
            year,
            k,
            k_t: k / tau,
            k_tf: k / tau,
            k_acm: None,
            authors: Some(authors),
        }
    }

    fn table(rows: Vec<ScoreRow>) -> ScoreTable {
        ScoreTable {
            kind: ModelKind::Paper,
            rows,
            benchmark_joined: false,
            unmatched_benchmark: Vec::new(),
        }
    }

    #[test]
    fn trend_single_year_and_gaps() {
        let t = table(vec![row("a", 2000.0, 2.0, 1.0, 1), row("b", 2000.0, 4.0, 1.0, 1), row("c", 2002.0, 1.0, 1.0, 1)]);
        let s = trend(&t, ScoreColumn::K);
        assert_eq!(s.years.len(), 3);
        assert_eq!(s.mean_at(2000), Some(3.0));
        assert_eq!(s.mean_at(2001), None);
        assert_eq!(s.peak_year(), Some(2000));
    }

    #[test]
    fn normalized_trend_rises_when_tau_doubles_backwards() {
        // constant k = 8, τ halving each later year, β̂ = 1
        let rows = (0..4)
            .map(|i| row(&format!("p{i}"), 2000.0 + i as f64, 8.0, 2f64.powi(4 - i), 1))
            .collect();
        let s = trend(&table(rows), ScoreColumn::Kt);
        let means: Vec<f64> = s.years.iter().map(|y| y.mean.unwrap()).collect();
        assert_eq!(means, vec![0.5, 1.0, 2.0, 4.0]);
    }

    #[test]
    fn authorship_groups_by_hand() {
        let t = table(vec![
            row("a", 2000.0, 2.0, 1.0, 1),
            row("b", 2000.0, 4.0, 1.0, 1),
            row("c", 2001.0, 9.0, 3.0, 3),
        ]);
        let s = authorship_from_table(&t).unwrap();
        assert_eq!(s.groups.len(), 2);
        assert_eq!((s.groups[0].authors, s.groups[0].papers, s.groups[0].mean_k), (1, 2, 3.0));
        assert_eq!((s.groups[1].mean_k, s.groups[1].mean_k_t), (9.0, 3.0));
        let sizes: Vec<Option<f64>> = s.team_size.iter().map(|y| y.mean_authors).collect();
        assert_eq!(sizes, vec![Some(1.0), Some(3.0)]);
    }

    proptest! {
        #[test]
        fn counts_sum_to_population(scores in prop::collection::vec(0u32..50, 1..200)) {
            let v: Vec<f64> = scores.iter().map(|&s| f64::from(s)).collect();
            let d = distribution(&v, DistributionKind::Discrete, Binning::Unit).unwrap();
            prop_assert_eq!(d.points.iter().map(|p| p.count).sum::<usize>(), v.len());
            prop_assert!(d.points.windows(2).all(|w| w[0].x < w[1].x));
            let c = distribution(&v, DistributionKind::Cumulative, Binning::Unit).unwrap();
            prop_assert_eq!(c.points[0].y, v.len() as f64);
            prop_assert!(c.points.windows(2).all(|w| w[0].y > w[1].y));
            let l = distribution(&v, DistributionKind::Cumulative, Binning::Log).unwrap();
            prop_assert_eq!(l.population + l.excluded_zeros, v.len());
        }

        #[test]
        fn exact_exponential(rate in -2.0f64..-0.05, a in -3.0f64..3.0) {
            let pts = (0..15).map(|i| {
                let x = i as f64 * 0.7;
                FrequencyPoint { x, y: (a + rate * x).exp(), count: 1 }
            }).collect();
            let s = FrequencySeries { kind: DistributionKind::Discrete, binning: Binning::Unit, x_log: false, y_log: true, points: pts, population: 15, excluded_zeros: 0 };
            let f = tail_fit(&s, TailFamily::Exponential).unwrap();
            prop_assert!((f.slope - rate).abs() < 1e-10);
            prop_assert!((f.intercept - a).abs() < 1e-10);
        }

        #[test]
        fn trend_means_match_group_by(rows in prop::collection::vec((1990i32..2000, 0u32..100), 1..60)) {
            let pts: Vec<(String, i32, f64)> = rows.iter().enumerate()
                .map(|(i, &(y, s))| (format!("e{i:03}"), y, f64::from(s))).collect();
            let s = trend_points(pts.clone(), ScoreColumn::K);
            for ty in &s.years {
                let mine: Vec<f64> = pts.iter().filter(|p| p.1 == ty.year).map(|p| p.2).collect();
                if mine.is_empty() {
                    prop_assert!(ty.mean.is_none());
                } else {
                    let m = ty.mean.unwrap();
                    prop_assert_eq!(m, mine.iter().sum::<f64>() / mine.len() as f64);
                    let lo = mine.iter().cloned().fold(f64::INFINITY, f64::min);
                    let hi = mine.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    prop_assert!(m >= lo && m <= hi);
                }
            }
        }
    }
}
