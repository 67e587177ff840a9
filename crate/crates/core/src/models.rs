//! Paper and scholar fitness models, normalized scores and rankings.
//!
//! Both models are log-linear:
//!
//! ```text
//! ln k   = α' + γ_a ln φ_a + γ_v ln φ_v + γ_r ln φ_r + β ln τ            (papers)
//! ln k_s = α' + γ_a ln φ̄_a + γ_v ln φ̄_v + γ_r ln φ̄_r + β ln τ̄ + κ ln ρ  (scholars)
//! ```
//!
//! Citation counts and φ are shifted by a constant (default 1) before any
//! logarithm; the time factor τ is not. Scholar φ̄ are geometric means of the
//! already shifted paper values.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::inference::{float_serde, ols_fit, significance_stars, DesignMatrix, FitResult};
use crate::metrics::{paper_vars, scholar_vars, PaperFitnessVars, ScholarFitnessVars, TauConvention};
use crate::{Error, Result};

pub const ALPHA: &str = "alpha_prime";
pub const GAMMA_A: &str = "gamma_a";
pub const GAMMA_V: &str = "gamma_v";
pub const GAMMA_R: &str = "gamma_r";
pub const BETA: &str = "beta";
pub const KAPPA: &str = "kappa";

/// Fewest observations a model fit accepts.
pub const MIN_OBSERVATIONS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Paper,
    Scholar,
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" | "papers" => Ok(ModelKind::Paper),
            "scholar" | "scholars" => Ok(ModelKind::Scholar),
            other => Err(Error::Config(format!("unknown model kind {other:?}"))),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Paper => "paper",
            ModelKind::Scholar => "scholar",
        })
    }
}

/// Variable conventions shared by fitting and scoring.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Conventions {
    pub tau: TauConvention,
    /// Added to k and every φ before taking logs.
    pub shift: f64,
}

impl Default for Conventions {
    fn default() -> Self {
        Conventions {
            tau: TauConvention::AgePlusOne,
            shift: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FittedFitnessModel {
    pub kind: ModelKind,
    pub fit: FitResult,
    pub conventions: Conventions,
}

fn label(name: &str) -> &'static str {
    match name {
        ALPHA => "alpha' = ln alpha (intercept)",
        GAMMA_A => "author impact phi_a",
        GAMMA_V => "venue impact phi_v",
        GAMMA_R => "reference impact phi_r",
        BETA => "time factor tau",
        KAPPA => "# authored papers rho",
        _ => "",
    }
}

impl FittedFitnessModel {
    pub fn estimate(&self, name: &str) -> Option<f64> {
        self.fit.coef(name).map(|c| c.estimate)
    }

    fn required(&self, name: &str) -> f64 {
        self.estimate(name)
            .unwrap_or_else(|| panic!("fitted {} model lacks {name}", self.kind))
    }

    pub fn beta(&self) -> f64 {
        self.required(BETA)
    }

    /// `[γ_a, γ_v, γ_r]`.
    pub fn gammas(&self) -> [f64; 3] {
        [self.required(GAMMA_A), self.required(GAMMA_V), self.required(GAMMA_R)]
    }

    pub fn kappa(&self) -> Option<f64> {
        self.estimate(KAPPA)
    }

    /// The fitted model in multiplicative form, e.g.
    /// `k = 0.462 · φ_a^0.326 · φ_v^0.0814 · φ_r^0.0395 · τ^0.573 · ε'`.
    pub fn multiplicative_form(&self) -> String {
        let g = self.gammas();
        let (lhs, bar) = match self.kind {
            ModelKind::Paper => ("k", ""),
            ModelKind::Scholar => ("k_s", "̄"),
        };
        let mut s = format!(
            "{lhs} = {} · φ{bar}_a^{} · φ{bar}_v^{} · φ{bar}_r^{} · τ{bar}^{}",
            sig3(self.required(ALPHA).exp()),
            sig3(g[0]),
            sig3(g[1]),
            sig3(g[2]),
            sig3(self.beta())
        );
        if let Some(kappa) = self.kappa() {
            s.push_str(&format!(" · ρ^{}", sig3(kappa)));
        }
        s.push_str(" · ε'");
        s
    }

    pub fn report(&self) -> FitReport {
        FitReport {
            kind: self.kind,
            conventions: self.conventions,
            coefficients: self
                .fit
                .iter()
                .map(|c| CoefficientRow {
                    name: c.name.to_string(),
                    label: label(c.name).to_string(),
                    estimate: c.estimate,
                    std_error: c.std_error,
                    t_value: c.t_value,
                    p_value: c.p_value,
                    stars: significance_stars(c.p_value).to_string(),
                })
                .collect(),
            r_squared: self.fit.r_squared,
            adj_r_squared: self.fit.adj_r_squared,
            f_statistic: self.fit.f_statistic,
            df1: self.fit.df_model,
            df2: self.fit.df_resid,
            n_obs: self.fit.n_obs,
            residual_std: self.fit.residual_std,
            multiplicative_form: self.multiplicative_form(),
            notes: vec![
                "residual_std is the composite scale of the unexplained fitness term; \
                 its weight and the term itself are not separately identifiable"
                    .to_string(),
                format!(
                    "k and phi shifted by {} before logarithms; tau unshifted",
                    self.conventions.shift
                ),
            ],
        }
    }
}

fn sig3(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let digits = (2 - v.abs().log10().floor() as i32).max(0) as usize;
    format!("{v:.digits$}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub name: String,
    pub label: String,
    pub estimate: f64,
    #[serde(with = "float_serde")]
    pub std_error: f64,
    #[serde(with = "float_serde")]
    pub t_value: f64,
    #[serde(with = "float_serde")]
    pub p_value: f64,
    pub stars: String,
}

/// Serialized form of a fitted model, laid out like a regression table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub kind: ModelKind,
    pub conventions: Conventions,
    pub coefficients: Vec<CoefficientRow>,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    #[serde(with = "float_serde")]
    pub f_statistic: f64,
    pub df1: usize,
    pub df2: usize,
    pub n_obs: usize,
    pub residual_std: f64,
    pub multiplicative_form: String,
    pub notes: Vec<String>,
}

impl FitReport {
    /// Rebuilds the model (without per-observation residuals).
    pub fn into_model(self) -> Result<FittedFitnessModel> {
        let mut expected = vec![ALPHA, GAMMA_A, GAMMA_V, GAMMA_R, BETA];
        if self.kind == ModelKind::Scholar {
            expected.push(KAPPA);
        }
        let names: Vec<&str> = self.coefficients.iter().map(|c| c.name.as_str()).collect();
        if names != expected {
            return Err(Error::Config(format!(
                "{} model report has coefficients {names:?}, expected {expected:?}",
                self.kind
            )));
        }
        let col = |f: fn(&CoefficientRow) -> f64| self.coefficients.iter().map(f).collect::<Vec<_>>();
        let fit = FitResult {
            names: names.iter().map(|s| s.to_string()).collect(),
            coefficients: col(|c| c.estimate),
            standard_errors: col(|c| c.std_error),
            t_values: col(|c| c.t_value),
            p_values: col(|c| c.p_value),
            r_squared: self.r_squared,
            adj_r_squared: self.adj_r_squared,
            f_statistic: self.f_statistic,
            df_model: self.df1,
            df_resid: self.df2,
            n_obs: self.n_obs,
            residual_std: self.residual_std,
            intercept: true,
            residuals: Vec::new(),
            fitted: Vec::new(),
        };
        Ok(FittedFitnessModel {
            kind: self.kind,
            fit,
            conventions: self.conventions,
        })
    }
}

fn ln_checked(v: f64, what: &str, key: &str) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v.ln())
    } else {
        Err(Error::Domain(format!(
            "{key}: {what} = {v} has no logarithm; increase the zero shift"
        )))
    }
}

pub fn paper_design(vars: &[PaperFitnessVars], conventions: &Conventions) -> Result<DesignMatrix> {
    if vars.len() < MIN_OBSERVATIONS {
        return Err(Error::InsufficientData(format!(
            "{} papers; the paper model needs at least {MIN_OBSERVATIONS}",
            vars.len()
        )));
    }
    let s = conventions.shift;
    let mut cols: [Vec<f64>; 5] = Default::default();
    for v in vars {
        let id = &v.paper_id;
        cols[0].push(ln_checked(v.k + s, "k + shift", id)?);
        cols[1].push(ln_checked(v.phi_a + s, "phi_a + shift", id)?);
        cols[2].push(ln_checked(v.phi_v + s, "phi_v + shift", id)?);
        cols[3].push(ln_checked(v.phi_r + s, "phi_r + shift", id)?);
        cols[4].push(ln_checked(v.tau, "tau", id)?);
    }
    let [y, a, ve, r, t] = cols;
    DesignMatrix::builder(y)
        .intercept(ALPHA)
        .column(GAMMA_A, a)
        .column(GAMMA_V, ve)
        .column(GAMMA_R, r)
        .column(BETA, t)
        .build()
}

/// `vars` must hold φ̄ already shifted by `conventions.shift`.
pub fn scholar_design(vars: &[ScholarFitnessVars], conventions: &Conventions) -> Result<DesignMatrix> {
    if vars.len() < MIN_OBSERVATIONS {
        return Err(Error::InsufficientData(format!(
            "{} scholars; the scholar model needs at least {MIN_OBSERVATIONS}",
            vars.len()
        )));
    }
    let s = conventions.shift;
    let mut cols: [Vec<f64>; 6] = Default::default();
    for v in vars {
        let id = &v.scholar_id;
        cols[0].push(ln_checked(v.k_s + s, "k_s + shift", id)?);
        cols[1].push(ln_checked(v.phi_a_bar, "mean phi_a", id)?);
        cols[2].push(ln_checked(v.phi_v_bar, "mean phi_v", id)?);
        cols[3].push(ln_checked(v.phi_r_bar, "mean phi_r", id)?);
        cols[4].push(ln_checked(v.tau_bar, "mean tau", id)?);
        cols[5].push(ln_checked(v.rho as f64, "rho", id)?);
    }
    let [y, a, ve, r, t, rho] = cols;
    DesignMatrix::builder(y)
        .intercept(ALPHA)
        .column(GAMMA_A, a)
        .column(GAMMA_V, ve)
        .column(GAMMA_R, r)
        .column(BETA, t)
        .column(KAPPA, rho)
        .build()
}

pub fn fit_paper_vars(vars: &[PaperFitnessVars], conventions: &Conventions) -> Result<FittedFitnessModel> {
    let fit = ols_fit(&paper_design(vars, conventions)?)?;
    Ok(FittedFitnessModel {
        kind: ModelKind::Paper,
        fit,
        conventions: *conventions,
    })
}

pub fn fit_scholar_vars(vars: &[ScholarFitnessVars], conventions: &Conventions) -> Result<FittedFitnessModel> {
    let fit = ols_fit(&scholar_design(vars, conventions)?)?;
    Ok(FittedFitnessModel {
        kind: ModelKind::Scholar,
        fit,
        conventions: *conventions,
    })
}

pub fn fit_paper_model(corpus: &Corpus, conventions: &Conventions) -> Result<FittedFitnessModel> {
    fit_paper_vars(&paper_vars(corpus, conventions.tau)?, conventions)
}

pub fn fit_scholar_model(corpus: &Corpus, conventions: &Conventions) -> Result<FittedFitnessModel> {
    let pv = paper_vars(corpus, conventions.tau)?;
    fit_scholar_vars(&scholar_vars(corpus, &pv, conventions.shift)?, conventions)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScoreColumn {
    #[serde(rename = "k")]
    K,
    #[serde(rename = "k_t", alias = "kt")]
    Kt,
    #[serde(rename = "k_tf", alias = "ktf")]
    Ktf,
}

impl FromStr for ScoreColumn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "k" | "none" => Ok(ScoreColumn::K),
            "k_t" | "kt" => Ok(ScoreColumn::Kt),
            "k_tf" | "ktf" => Ok(ScoreColumn::Ktf),
            other => Err(Error::Config(format!("unknown score column {other:?}"))),
        }
    }
}

impl fmt::Display for ScoreColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScoreColumn::K => "k",
            ScoreColumn::Kt => "k_t",
            ScoreColumn::Ktf => "k_tf",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub key: String,
    /// Publication year of a paper, mean publication year of a scholar.
    pub year: f64,
    pub k: f64,
    pub k_t: f64,
    pub k_tf: f64,
    pub k_acm: Option<f64>,
    /// Author count (papers only).
    pub authors: Option<usize>,
}

impl ScoreRow {
    pub fn score(&self, column: ScoreColumn) -> f64 {
        match column {
            ScoreColumn::K => self.k,
            ScoreColumn::Kt => self.k_t,
            ScoreColumn::Ktf => self.k_tf,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    pub kind: ModelKind,
    pub rows: Vec<ScoreRow>,
    pub benchmark_joined: bool,
    /// Benchmark keys that matched no entity.
    pub unmatched_benchmark: Vec<String>,
}

impl ScoreTable {
    pub fn column(&self, column: ScoreColumn) -> Vec<f64> {
        self.rows.iter().map(|r| r.score(column)).collect()
    }

    /// Attaches benchmark counts by key; unmatched benchmark keys are recorded.
    pub fn join_benchmark(&mut self, benchmark: &Benchmark) {
        let mut matched = 0usize;
        for row in &mut self.rows {
            row.k_acm = benchmark.counts.get(&row.key).copied();
            matched += usize::from(row.k_acm.is_some());
        }
        let keys: std::collections::BTreeSet<&str> = self.rows.iter().map(|r| r.key.as_str()).collect();
        self.unmatched_benchmark = benchmark
            .counts
            .keys()
            .filter(|k| !keys.contains(k.as_str()))
            .cloned()
            .collect();
        if !self.unmatched_benchmark.is_empty() {
            warn!(
                "{} benchmark keys match no {} ({} matched)",
                self.unmatched_benchmark.len(),
                self.kind,
                matched
            );
        }
        self.benchmark_joined = true;
    }
}

/// Normalizing divisor `τ^β · ∏ φ^γ` with φ given already shifted.
fn normalizers(model: &FittedFitnessModel, tau: f64, shifted_phis: [f64; 3]) -> (f64, f64) {
    let time = tau.powf(model.beta());
    let fitness: f64 = model
        .gammas()
        .iter()
        .zip(shifted_phis)
        .map(|(g, phi)| phi.powf(*g))
        .product();
    (time, time * fitness)
}

pub fn score_papers(model: &FittedFitnessModel, vars: &[PaperFitnessVars]) -> Result<ScoreTable> {
    if model.kind != ModelKind::Paper {
        return Err(Error::Config("paper scores need a paper model".into()));
    }
    let s = model.conventions.shift;
    let rows = vars
        .iter()
        .map(|v| {
            let (t, tf) = normalizers(model, v.tau, [v.phi_a + s, v.phi_v + s, v.phi_r + s]);
            ScoreRow {
                key: v.paper_id.clone(),
                year: f64::from(v.year),
                k: v.k,
                k_t: v.k / t,
                k_tf: v.k / tf,
                k_acm: None,
                authors: Some(v.authors),
            }
        })
        .collect();
    Ok(ScoreTable {
        kind: ModelKind::Paper,
        rows,
        benchmark_joined: false,
        unmatched_benchmark: Vec::new(),
    })
}

pub fn score_scholars(model: &FittedFitnessModel, vars: &[ScholarFitnessVars]) -> Result<ScoreTable> {
    if model.kind != ModelKind::Scholar {
        return Err(Error::Config("scholar scores need a scholar model".into()));
    }
    let rows = vars
        .iter()
        .map(|v| {
            let (t, tf) = normalizers(model, v.tau_bar, [v.phi_a_bar, v.phi_v_bar, v.phi_r_bar]);
            ScoreRow {
                key: v.scholar_id.clone(),
                year: v.mean_year,
                k: v.k_s,
                k_t: v.k_s / t,
                k_tf: v.k_s / tf,
                k_acm: None,
                authors: None,
            }
        })
        .collect();
    Ok(ScoreTable {
        kind: ModelKind::Scholar,
        rows,
        benchmark_joined: false,
        unmatched_benchmark: Vec::new(),
    })
}

/// Scores every paper or scholar of `corpus` with the model's own estimates.
pub fn score_table(
    model: &FittedFitnessModel,
    corpus: &Corpus,
    benchmark: Option<&Benchmark>,
) -> Result<ScoreTable> {
    let pv = paper_vars(corpus, model.conventions.tau)?;
    let mut table = match model.kind {
        ModelKind::Paper => score_papers(model, &pv)?,
        ModelKind::Scholar => {
            score_scholars(model, &scholar_vars(corpus, &pv, model.conventions.shift)?)?
        }
    };
    if let Some(b) = benchmark {
        table.join_benchmark(b);
    }
    Ok(table)
}

/// External long-term citation counts keyed by paper or scholar.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Benchmark {
    pub counts: BTreeMap<String, f64>,
}

impl Benchmark {
    pub fn from_pairs<I: IntoIterator<Item = (String, f64)>>(pairs: I) -> Self {
        Benchmark {
            counts: pairs.into_iter().collect(),
        }
    }

    /// Reads a two-column CSV `key,count`; a non-numeric first row is a header.
    pub fn load(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| Error::parse(path, "open", e.to_string()))?;
        let mut counts = BTreeMap::new();
        for (i, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                Error::parse(path, format!("line {line}"), e.to_string())
            })?;
            if rec.len() < 2 {
                return Err(Error::parse(path, format!("record {}", i + 1), "expected key,count"));
            }
            match rec[1].parse::<f64>() {
                Ok(v) => {
                    counts.insert(rec[0].to_string(), v);
                }
                Err(_) if i == 0 => continue,
                Err(_) => {
                    return Err(Error::parse(
                        path,
                        format!("record {}", i + 1),
                        format!("count {:?} is not a number", &rec[1]),
                    ))
                }
            }
        }
        Ok(Benchmark { counts })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlations {
    pub k: f64,
    pub k_t: f64,
    pub k_tf: f64,
    /// Rows with a benchmark value among those ranked.
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    pub by: ScoreColumn,
    pub rows: Vec<ScoreRow>,
    pub correlations: Option<Correlations>,
}

/// Pearson correlation; `None` for fewer than two points or a constant column.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    if n != y.len() || n < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Sorts descending by `by` (ties by key), keeps `top_n` rows and, when a
/// benchmark is joined, correlates each score column with it over those rows.
pub fn rank_and_correlate(table: &ScoreTable, by: ScoreColumn, top_n: usize) -> Result<Ranking> {
    let mut rows = table.rows.clone();
    rows.sort_by(|a, b| b.score(by).total_cmp(&a.score(by)).then_with(|| a.key.cmp(&b.key)));
    rows.truncate(top_n);

    let correlations = if table.benchmark_joined {
        let with: Vec<&ScoreRow> = rows.iter().filter(|r| r.k_acm.is_some()).collect();
        if with.len() < 3 {
            return Err(Error::CorrelationUndefined(format!(
                "{} ranked rows carry a benchmark value; need at least 3",
                with.len()
            )));
        }
        let acm: Vec<f64> = with.iter().map(|r| r.k_acm.expect("filtered")).collect();
        let r = |c: ScoreColumn| {
            let xs: Vec<f64> = with.iter().map(|r| r.score(c)).collect();
            pearson(&xs, &acm).ok_or_else(|| {
                Error::CorrelationUndefined(format!("{c} or benchmark is constant over the ranked rows"))
            })
        };
        Some(Correlations {
            k: r(ScoreColumn::K)?,
            k_t: r(ScoreColumn::Kt)?,
            k_tf: r(ScoreColumn::Ktf)?,
            n: with.len(),
        })
    } else {
        None
    };
    Ok(Ranking { by, rows, correlations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{BuildOptions, RawAuthor, RawPaper};
    use crate::synthetic::{synthetic_paper_vars, synthetic_scholar_vars, PlantedPaperModel, PlantedScholarModel};

    fn zero_shift() -> Conventions {
        Conventions {
            tau: TauConvention::AgePlusOne,
            shift: 0.0,
        }
    }

    fn fixed_model(beta: f64, gammas: [f64; 3]) -> FittedFitnessModel {
        let report = FitReport {
            kind: ModelKind::Paper,
            conventions: Conventions::default(),
            coefficients: [ALPHA, GAMMA_A, GAMMA_V, GAMMA_R, BETA]
                .iter()
                .zip([0.0, gammas[0], gammas[1], gammas[2], beta])
                .map(|(n, e)| CoefficientRow {
                    name: n.to_string(),
                    label: String::new(),
                    estimate: e,
                    std_error: 1.0,
                    t_value: e,
                    p_value: 0.5,
                    stars: String::new(),
                })
                .collect(),
            r_squared: 0.5,
            adj_r_squared: 0.5,
            f_statistic: 1.0,
            df1: 4,
            df2: 100,
            n_obs: 105,
            residual_std: 1.0,
            multiplicative_form: String::new(),
            notes: Vec::new(),
        };
        report.into_model().unwrap()
    }

    fn pv(id: &str, year: i32, tau: f64, k: f64) -> PaperFitnessVars {
        PaperFitnessVars {
            paper_id: id.into(),
            year,
            tau,
            phi_a: 0.0,
            phi_v: 0.0,
            phi_r: 0.0,
            k,
            authors: 1,
        }
    }

    #[test]
    fn paper_recovery_within_three_se() {
        let planted = PlantedPaperModel::default();
        let vars = synthetic_paper_vars(&planted, 5000, 42);
        let m = fit_paper_vars(&vars, &zero_shift()).unwrap();
        for (name, truth) in [
            (ALPHA, planted.alpha_prime),
            (GAMMA_A, planted.gamma_a),
            (GAMMA_V, planted.gamma_v),
            (GAMMA_R, planted.gamma_r),
            (BETA, planted.beta),
        ] {
            let c = m.fit.coef(name).unwrap();
            assert!((c.estimate - truth).abs() < 3.0 * c.std_error, "{name}: {} vs {truth}", c.estimate);
        }
        assert!(m.kappa().is_none());
    }

    #[test]
    fn scholar_kappa_recovered() {
        let planted = PlantedScholarModel::default();
        let vars = synthetic_scholar_vars(&planted, 2000, 9);
        let m = fit_scholar_vars(&vars, &zero_shift()).unwrap();
        let k = m.fit.coef(KAPPA).unwrap();
        assert!((k.estimate - planted.kappa).abs() < 3.0 * k.std_error);
        assert_eq!(m.fit.names.len(), 6);
    }

    #[test]
    fn identical_papers_are_rank_deficient() {
        let raw: Vec<RawPaper> = (0..40)
            .map(|i| RawPaper {
                paper_id: format!("p{i}"),
                year: 2000,
                venue: "V".into(),
                authors: vec![RawAuthor::named(format!("A{i}"))],
                references: vec![],
            })
            .collect();
        let (c, _) = Corpus::build(raw, &BuildOptions::default()).unwrap();
        assert!(matches!(
            fit_paper_model(&c, &Conventions::default()),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn single_paper_scholars_are_rank_deficient() {
        let mut vars = synthetic_scholar_vars(&PlantedScholarModel::default(), 100, 1);
        for v in &mut vars {
            v.rho = 1;
        }
        match fit_scholar_vars(&vars, &zero_shift()) {
            Err(Error::RankDeficient { columns }) => assert!(columns.contains(&KAPPA.to_string())),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn too_few_papers() {
        let vars = synthetic_paper_vars(&PlantedPaperModel::default(), 29, 1);
        assert!(matches!(fit_paper_vars(&vars, &zero_shift()), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn time_normalization_arithmetic() {
        let m = fixed_model(1.0, [0.0; 3]);
        let t = score_papers(&m, &[pv("a", 2003, 2.0, 8.0), pv("b", 2001, 4.0, 8.0), pv("c", 2004, 1.0, 5.0)]).unwrap();
        assert_eq!(t.rows[0].k_t, 4.0);
        assert_eq!(t.rows[1].k_t, 2.0);
        // τ^β = 1 leaves k unchanged
        assert_eq!(t.rows[2].k_t, 5.0);
        assert_eq!(t.rows[2].k_tf, 5.0);
    }

    #[test]
    fn fitness_normalization_uses_shifted_phi() {
        let m = fixed_model(0.5, [1.0, 0.0, 0.0]);
        let mut v = pv("a", 2000, 4.0, 12.0);
        v.phi_a = 2.0;
        let t = score_papers(&m, &[v]).unwrap();
        // 12 / (4^0.5 · (2+1)^1)
        assert_eq!(t.rows[0].k_tf, 2.0);
        assert_eq!(t.rows[0].k_t, 6.0);
    }

    #[test]
    fn report_round_trip() {
        let vars = synthetic_paper_vars(&PlantedPaperModel::default(), 300, 5);
        let m = fit_paper_vars(&vars, &zero_shift()).unwrap();
        let json = serde_json::to_string(&m.report()).unwrap();
        let back: FitReport = serde_json::from_str(&json).unwrap();
        let m2 = back.into_model().unwrap();
        assert_eq!(m2.fit.coefficients, m.fit.coefficients);
        assert_eq!(m2.kind, ModelKind::Paper);
        assert!(m.multiplicative_form().starts_with("k = "));
    }

    #[test]
    fn pearson_examples() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-15);
        assert!(pearson(&[1.0, 1.0, 1.0], &[3.0, 2.0, 1.0]).is_none());
    }

    fn table_with(rows: Vec<(&str, f64, Option<f64>)>) -> ScoreTable {
        ScoreTable {
            kind: ModelKind::Paper,
            rows: rows
                .into_iter()
                .map(|(k, s, acm)| ScoreRow {
                    key: k.into(),
                    year: 2000.0,
                    k: s,
                    k_t: s / 2.0,
                    k_tf: s.sqrt(),
                    k_acm: acm,
                    authors: Some(1),
                })
                .collect(),
            benchmark_joined: true,
            unmatched_benchmark: Vec::new(),
        }
    }

    #[test]
    fn ranking_ties_and_truncation() {
        let t = table_with(vec![("b", 5.0, Some(1.0)), ("a", 5.0, Some(2.0)), ("c", 9.0, Some(4.0)), ("d", 1.0, None)]);
        let r = rank_and_correlate(&t, ScoreColumn::K, 3).unwrap();
        let keys: Vec<&str> = r.rows.iter().map(|r| r.key.as_str()).collect();
        assert_eq!(keys, vec!["c", "a", "b"]);
        assert_eq!(r.correlations.unwrap().n, 3);
    }

    #[test]
    fn correlation_needs_three_rows() {
        let t = table_with(vec![("a", 1.0, Some(1.0)), ("b", 2.0, Some(2.0))]);
        assert!(matches!(rank_and_correlate(&t, ScoreColumn::K, 20), Err(Error::CorrelationUndefined(_))));
        let mut no_bench = t.clone();
        no_bench.benchmark_joined = false;
        assert!(rank_and_correlate(&no_bench, ScoreColumn::K, 20).unwrap().correlations.is_none());
    }

    #[test]
    fn benchmark_join_reports_unmatched() {
        let mut t = table_with(vec![("a", 1.0, None), ("b", 2.0, None)]);
        t.join_benchmark(&Benchmark::from_pairs([("a".to_string(), 10.0), ("zzz".to_string(), 3.0)]));
        assert_eq!(t.rows[0].k_acm, Some(10.0));
        assert_eq!(t.rows[1].k_acm, None);
        assert_eq!(t.unmatched_benchmark, vec!["zzz".to_string()]);
    }

    #[test]
    fn benchmark_file_with_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("acm.csv");
        std::fs::write(&path, "key,count\nacm1,300\nacm2,200\n").unwrap();
        let b = Benchmark::load(&path).unwrap();
        assert_eq!(b.counts["acm1"], 300.0);
        std::fs::write(&path, "acm1,300\nacm2,lots\n").unwrap();
        assert!(Benchmark::load(&path).is_err());
    }
}
