//! One function per subcommand, plus the writers they share with `pipeline`.

use std::path::{Path, PathBuf};

use citefit::corpus::{self, export_csv, yearly_profile, BuildOptions, Corpus, InputFormat, NameOverrides};
use citefit::distributions::{self, authorship_from_table, tail_fit, trend, TailFamily};
use citefit::metrics::{paper_vars, scholar_vars};
use citefit::models::{
    fit_paper_model, fit_scholar_model, rank_and_correlate, score_table, Benchmark, FitReport, FittedFitnessModel,
    ModelKind, ScoreColumn, ScoreRow, ScoreTable,
};
use citefit::netsim::{self, degree_exponent, estimate_beta, estimate_beta_at, grow, ExportOptions, FitnessDist, SimConfig};
use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::config::{FitnessChoice, OutputFormat, RunConfig};
use crate::failure::{Failure, StageResult};
use crate::output::{sidecar, write_csv, write_json};

const REPORT_FILE: &str = "ingest_report.json";

fn required<'a>(value: &'a Option<PathBuf>, stage: &'static str, what: &str) -> Result<&'a Path, Failure> {
    value
        .as_deref()
        .ok_or_else(|| Failure::usage(stage, format!("missing {what} path")))
}

fn existing<'a>(value: &'a Option<PathBuf>, stage: &'static str, what: &str) -> Result<&'a Path, Failure> {
    let path = required(value, stage, what)?;
    if !path.exists() {
        return Err(Failure::usage(stage, format!("{what} path {} does not exist", path.display())));
    }
    Ok(path)
}

fn detect_format(path: &Path, explicit: Option<InputFormat>) -> Result<(PathBuf, InputFormat), String> {
    if let Some(f) = explicit {
        return Ok((path.to_path_buf(), f));
    }
    if path.is_dir() {
        if path.join("papers.csv").is_file() {
            return Ok((path.to_path_buf(), InputFormat::Csv));
        }
        let jsonl = path.join("corpus.jsonl");
        if jsonl.is_file() {
            return Ok((jsonl, InputFormat::Jsonl));
        }
        return Err(format!("{} holds neither papers.csv nor corpus.jsonl", path.display()));
    }
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("xml") => Ok((path.to_path_buf(), InputFormat::Xml)),
        Some("jsonl") | Some("json") => Ok((path.to_path_buf(), InputFormat::Jsonl)),
        _ => Err(format!("cannot tell the format of {}; pass --input-format", path.display())),
    }
}

#[derive(Deserialize)]
struct StoredYear {
    collection_year: Option<i32>,
}

fn build_options(cfg: &RunConfig, stage: &'static str, dir: &Path) -> Result<BuildOptions, Failure> {
    let name_overrides = match &cfg.paths.name_overrides {
        Some(p) if !p.exists() => {
            return Err(Failure::usage(stage, format!("name override file {} does not exist", p.display())))
        }
        Some(p) => NameOverrides::load(p).stage(stage)?,
        None => NameOverrides::default(),
    };
    // A corpus written by `ingest` remembers its census year.
    let stored = std::fs::read_to_string(dir.join(REPORT_FILE))
        .ok()
        .and_then(|t| serde_json::from_str::<StoredYear>(&t).ok())
        .and_then(|s| s.collection_year);
    Ok(BuildOptions {
        strict_years: cfg.strict_years,
        min_year: cfg.min_year,
        collection_year: cfg.collection_year.or(stored),
        name_overrides,
        name_style: cfg.name_style,
    })
}

fn read_corpus(
    cfg: &RunConfig,
    path: &Path,
    format: Option<InputFormat>,
    stage: &'static str,
) -> Result<(Corpus, corpus::IngestReport), Failure> {
    let (path, format) = detect_format(path, format).map_err(|e| Failure::usage(stage, e))?;
    let dir = if path.is_dir() { path.clone() } else { path.parent().map(Path::to_path_buf).unwrap_or_default() };
    let opts = build_options(cfg, stage, &dir)?;
    let (corpus, report) = corpus::ingest(&path, format, &opts).stage(stage)?;
    info!(
        "{stage}: {} papers, {} scholars, {} references ({} dangling)",
        report.papers, report.scholars, report.references, report.dangling_references
    );
    if !report.temporal_violations.is_empty() {
        warn!("{stage}: {} citations of later-published papers", report.temporal_violations.len());
    }
    Ok((corpus, report))
}

fn load_corpus(cfg: &RunConfig, stage: &'static str) -> Result<Corpus, Failure> {
    let path = existing(&cfg.paths.corpus, stage, "corpus")?;
    Ok(read_corpus(cfg, path, cfg.paths.input_format, stage)?.0)
}

fn load_fit(cfg: &RunConfig, stage: &'static str) -> Result<FittedFitnessModel, Failure> {
    let path = existing(&cfg.paths.fit, stage, "fit")?;
    let text = std::fs::read_to_string(path).stage(stage)?;
    let report: FitReport = serde_json::from_str(&text)
        .map_err(|e| Failure::usage(stage, format!("{}: not a fit report: {e}", path.display())))?;
    let model = report.into_model().stage(stage)?;
    if model.conventions != cfg.conventions() {
        warn!("{stage}: scoring with the fit's conventions {:?}, not the configured ones", model.conventions);
    }
    Ok(model)
}

fn write_table<R: Serialize>(
    path: &Path,
    stage: &'static str,
    cfg: &RunConfig,
    notes: &[String],
    rows: Vec<R>,
) -> Result<(), Failure> {
    match cfg.output_format {
        OutputFormat::Csv => write_csv(path, stage, cfg, notes, rows),
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct Table<'a, R> {
                notes: &'a [String],
                rows: Vec<R>,
            }
            write_json(path, stage, cfg, &Table { notes, rows })
        }
    }
}

fn ext(cfg: &RunConfig) -> &'static str {
    match cfg.output_format {
        OutputFormat::Csv => "csv",
        OutputFormat::Json => "json",
    }
}

pub fn write_corpus(
    cfg: &RunConfig,
    corpus: &Corpus,
    report: &corpus::IngestReport,
    dir: &Path,
    stage: &'static str,
) -> Result<(), Failure> {
    export_csv(corpus, dir, Some(&cfg.header())).stage(stage)?;
    write_json(&dir.join(REPORT_FILE), stage, cfg, report)
}

pub fn ingest(cfg: &RunConfig) -> Result<(), Failure> {
    const STAGE: &str = "ingest";
    let input = existing(&cfg.paths.input, STAGE, "input")?;
    let out = required(&cfg.paths.out, STAGE, "output")?;
    let (corpus, report) = read_corpus(cfg, input, cfg.paths.input_format, STAGE)?;
    write_corpus(cfg, &corpus, &report, out, STAGE)?;
    write_table(&out.join(format!("profile.{}", ext(cfg))), STAGE, cfg, &[], yearly_profile(&corpus))
}

fn write_vars(cfg: &RunConfig, corpus: &Corpus, kind: ModelKind, out: &Path) -> Result<(), Failure> {
    const STAGE: &str = "vars";
    let pv = paper_vars(corpus, cfg.tau).stage(STAGE)?;
    let note = vec![format!(
        "phi columns are raw counts for papers; scholar means are geometric means of (phi + {})",
        cfg.shift
    )];
    match kind {
        ModelKind::Paper => write_table(out, STAGE, cfg, &note, pv),
        ModelKind::Scholar => {
            let sv = scholar_vars(corpus, &pv, cfg.shift).stage(STAGE)?;
            write_table(out, STAGE, cfg, &note, sv)
        }
    }
}

pub fn vars(cfg: &RunConfig) -> Result<(), Failure> {
    let corpus = load_corpus(cfg, "vars")?;
    let out = required(&cfg.paths.out, "vars", "output")?;
    write_vars(cfg, &corpus, cfg.analysis.model, out)
}

fn fit_model(cfg: &RunConfig, corpus: &Corpus, kind: ModelKind) -> Result<FittedFitnessModel, Failure> {
    let conv = cfg.conventions();
    let model = match kind {
        ModelKind::Paper => fit_paper_model(corpus, &conv),
        ModelKind::Scholar => fit_scholar_model(corpus, &conv),
    }
    .stage("fit")?;
    info!("fit: {} (R^2 = {:.3})", model.multiplicative_form(), model.fit.r_squared);
    Ok(model)
}

pub fn fit(cfg: &RunConfig) -> Result<(), Failure> {
    let corpus = load_corpus(cfg, "fit")?;
    let out = required(&cfg.paths.out, "fit", "output")?;
    let model = fit_model(cfg, &corpus, cfg.analysis.model)?;
    write_json(out, "fit", cfg, &model.report())
}

#[derive(Serialize)]
struct RankRow<'a> {
    rank: usize,
    key: &'a str,
    year: f64,
    k: f64,
    k_t: f64,
    k_tf: f64,
    k_acm: Option<f64>,
    authors: Option<usize>,
}

#[derive(Serialize)]
struct CorrelationRow {
    score: ScoreColumn,
    r: f64,
    n: usize,
}

fn normalization_note(model: &FittedFitnessModel) -> String {
    let phi = match model.kind {
        ModelKind::Paper => format!("(phi + {})", model.conventions.shift),
        ModelKind::Scholar => format!("geometric mean of (phi + {})", model.conventions.shift),
    };
    format!("k_t = k / tau^beta; k_tf = k_t / prod_n {phi}^gamma_n; estimates from the fit")
}

fn write_rank(cfg: &RunConfig, model: &FittedFitnessModel, table: &ScoreTable, out: &Path) -> Result<(), Failure> {
    const STAGE: &str = "rank";
    let ranking = rank_and_correlate(table, cfg.analysis.by, cfg.top_n).stage(STAGE)?;
    let rows: Vec<RankRow> = ranking
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| RankRow {
            rank: i + 1,
            key: &r.key,
            year: r.year,
            k: r.k,
            k_t: r.k_t,
            k_tf: r.k_tf,
            k_acm: r.k_acm,
            authors: r.authors,
        })
        .collect();
    let notes = vec![normalization_note(model), format!("ranked by {} (top {})", cfg.analysis.by, cfg.top_n)];
    write_table(out, STAGE, cfg, &notes, rows)?;
    if let Some(c) = ranking.correlations {
        let rows = [(ScoreColumn::K, c.k), (ScoreColumn::Kt, c.k_t), (ScoreColumn::Ktf, c.k_tf)]
            .map(|(score, r)| CorrelationRow { score, r, n: c.n });
        let notes = vec!["Pearson correlation with the benchmark over the ranked rows".to_string()];
        write_table(&sidecar(out, "correlation"), STAGE, cfg, &notes, rows.into_iter().collect())?;
    }
    if !table.unmatched_benchmark.is_empty() {
        #[derive(Serialize)]
        struct Unmatched<'a> {
            key: &'a str,
        }
        let rows = table.unmatched_benchmark.iter().map(|k| Unmatched { key: k }).collect();
        write_table(&sidecar(out, "unmatched"), STAGE, cfg, &[], rows)?;
    }
    Ok(())
}

fn load_benchmark(cfg: &RunConfig, stage: &'static str) -> Result<Option<Benchmark>, Failure> {
    match &cfg.paths.benchmark {
        None => Ok(None),
        Some(_) => Benchmark::load(existing(&cfg.paths.benchmark, stage, "benchmark")?)
            .stage(stage)
            .map(Some),
    }
}

pub fn rank(cfg: &RunConfig) -> Result<(), Failure> {
    let model = load_fit(cfg, "rank")?;
    let corpus = load_corpus(cfg, "rank")?;
    let bench = load_benchmark(cfg, "rank")?;
    let out = required(&cfg.paths.out, "rank", "output")?;
    let table = score_table(&model, &corpus, bench.as_ref()).stage("rank")?;
    write_rank(cfg, &model, &table, out)
}

/// Scores with the fit when given; without one only raw `k` is available.
fn scores(cfg: &RunConfig, stage: &'static str) -> Result<(ScoreTable, Option<FittedFitnessModel>), Failure> {
    let corpus = load_corpus(cfg, stage)?;
    if cfg.paths.fit.is_some() {
        let model = load_fit(cfg, stage)?;
        let table = score_table(&model, &corpus, None).stage(stage)?;
        return Ok((table, Some(model)));
    }
    if cfg.analysis.normalize != ScoreColumn::K {
        return Err(Failure::usage(stage, format!("--normalize {} needs --fit", cfg.analysis.normalize)));
    }
    Ok((raw_table(cfg, &corpus, cfg.analysis.model, stage)?, None))
}

fn raw_table(cfg: &RunConfig, corpus: &Corpus, kind: ModelKind, stage: &'static str) -> Result<ScoreTable, Failure> {
    let pv = paper_vars(corpus, cfg.tau).stage(stage)?;
    let rows = match kind {
        ModelKind::Paper => pv
            .iter()
            .map(|v| ScoreRow {
                key: v.paper_id.clone(),
                year: f64::from(v.year),
                k: v.k,
                k_t: f64::NAN,
                k_tf: f64::NAN,
                k_acm: None,
                authors: Some(v.authors),
            })
            .collect(),
        ModelKind::Scholar => scholar_vars(corpus, &pv, cfg.shift)
            .stage(stage)?
            .into_iter()
            .map(|v| ScoreRow {
                key: v.scholar_id,
                year: v.mean_year,
                k: v.k_s,
                k_t: f64::NAN,
                k_tf: f64::NAN,
                k_acm: None,
                authors: None,
            })
            .collect(),
    };
    Ok(ScoreTable {
        kind,
        rows,
        benchmark_joined: false,
        unmatched_benchmark: Vec::new(),
    })
}

fn write_dist(cfg: &RunConfig, table: &ScoreTable, column: ScoreColumn, out: &Path) -> Result<(), Failure> {
    const STAGE: &str = "dist";
    let series = distributions::distribution(&table.column(column), cfg.analysis.kind, cfg.analysis.binning)
        .stage(STAGE)?;
    let notes = vec![format!(
        "{} distribution of {} {column}, {} binning; population {}, zeros excluded {}; x_log {}, y_log {}",
        series.kind,
        table.kind,
        series.binning,
        series.population,
        series.excluded_zeros,
        series.x_log,
        series.y_log
    )];
    write_table(out, STAGE, cfg, &notes, series.points.clone())?;
    let fits: Vec<_> = [TailFamily::PowerLaw, TailFamily::Exponential]
        .into_iter()
        .filter_map(|family| match tail_fit(&series, family) {
            Ok(f) => Some(f),
            Err(e) => {
                warn!("{STAGE}: {family} tail fit of {column} skipped: {e}");
                None
            }
        })
        .collect();
    let notes = vec!["linearized least squares: ln y on ln x (power_law) or on x (exponential)".to_string()];
    write_table(&sidecar(out, "tail"), STAGE, cfg, &notes, fits)
}

pub fn dist(cfg: &RunConfig) -> Result<(), Failure> {
    let (table, _) = scores(cfg, "dist")?;
    let out = required(&cfg.paths.out, "dist", "output")?;
    write_dist(cfg, &table, cfg.analysis.normalize, out)
}

#[derive(Serialize)]
struct TrendRow {
    year: i32,
    entities: usize,
    mean: Option<f64>,
    min: Option<f64>,
    max: Option<f64>,
}

#[derive(Serialize)]
struct TrendPointRow<'a> {
    year: i32,
    key: &'a str,
    score: f64,
}

fn write_trend(cfg: &RunConfig, table: &ScoreTable, column: ScoreColumn, out: &Path) -> Result<(), Failure> {
    const STAGE: &str = "trend";
    let series = trend(table, column);
    let rows = series
        .years
        .iter()
        .map(|y| {
            let values = y.scores.iter().map(|s| s.1);
            TrendRow {
                year: y.year,
                entities: y.scores.len(),
                mean: y.mean,
                min: values.clone().reduce(f64::min),
                max: values.reduce(f64::max),
            }
        })
        .collect();
    let notes = vec![format!("yearly arithmetic mean of {} {column}", table.kind)];
    write_table(out, STAGE, cfg, &notes, rows)?;
    let points = series
        .years
        .iter()
        .flat_map(|y| y.scores.iter().map(move |(key, score)| TrendPointRow { year: y.year, key, score: *score }))
        .collect();
    write_table(&sidecar(out, "points"), STAGE, cfg, &[], points)
}

pub fn trend_cmd(cfg: &RunConfig) -> Result<(), Failure> {
    let (table, _) = scores(cfg, "trend")?;
    let out = required(&cfg.paths.out, "trend", "output")?;
    write_trend(cfg, &table, cfg.analysis.normalize, out)
}

fn write_authors(cfg: &RunConfig, table: &ScoreTable, out: &Path) -> Result<(), Failure> {
    const STAGE: &str = "authors";
    let summary = authorship_from_table(table).stage(STAGE)?;
    write_table(out, STAGE, cfg, &["mean scores by number of authors".to_string()], summary.groups)?;
    write_table(&sidecar(out, "team_size"), STAGE, cfg, &["mean authors per paper by year".to_string()], summary.team_size)
}

pub fn authors(cfg: &RunConfig) -> Result<(), Failure> {
    let model = load_fit(cfg, "authors")?;
    if model.kind != ModelKind::Paper {
        return Err(Failure::usage("authors", "authorship analysis needs a paper-model fit"));
    }
    let corpus = load_corpus(cfg, "authors")?;
    let out = required(&cfg.paths.out, "authors", "output")?;
    let table = score_table(&model, &corpus, None).stage("authors")?;
    write_authors(cfg, &table, out)
}

#[derive(Serialize)]
struct NodeRow {
    node: String,
    entry_time: usize,
    fitness: f64,
    degree: u32,
    in_degree: u32,
}

#[derive(Serialize)]
struct EdgeRow {
    source: String,
    target: String,
}

#[derive(Serialize)]
struct SnapshotRow<'a> {
    time: usize,
    node: &'a str,
    degree: u32,
}

#[derive(Serialize)]
struct SimSummary {
    nodes: usize,
    edges: usize,
    beta: Option<f64>,
    beta_by_snapshot: Vec<(usize, Option<f64>)>,
    degree_exponent: Option<f64>,
    degree_tail_r_squared: Option<f64>,
}

pub fn simulate(cfg: &RunConfig) -> Result<(), Failure> {
    const STAGE: &str = "simulate";
    let out = required(&cfg.paths.out, STAGE, "output")?;
    let s = &cfg.simulation;
    let config = SimConfig {
        n_final: s.n,
        m: s.m,
        fitness: match s.fitness {
            FitnessChoice::Constant => FitnessDist::Constant,
            FitnessChoice::Uniform => FitnessDist::Uniform,
        },
        attachment: s.attachment,
        seed: cfg.seed,
        snapshot_times: s.snapshots.clone(),
    };
    config.validate().map_err(|e| Failure::usage(STAGE, e.to_string()))?;
    let net = grow(&config).stage(STAGE)?;
    let ids: Vec<String> = (0..net.nodes.len()).map(|i| netsim::node_id(&net, i)).collect();
    let in_degree = net.in_degrees();
    let nodes = net
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| NodeRow {
            node: ids[i].clone(),
            entry_time: n.entry_time,
            fitness: n.fitness,
            degree: n.degree,
            in_degree: in_degree[i],
        })
        .collect();
    let e = ext(cfg);
    write_table(&out.join(format!("nodes.{e}")), STAGE, cfg, &[], nodes)?;
    let edges = net
        .edges
        .iter()
        .map(|&(s, t)| EdgeRow { source: ids[s].clone(), target: ids[t].clone() })
        .collect();
    write_table(&out.join(format!("edges.{e}")), STAGE, cfg, &["source is the newer node".to_string()], edges)?;
    if !net.snapshots.is_empty() {
        let rows = net
            .snapshots
            .iter()
            .flat_map(|s| {
                s.degrees.iter().enumerate().map(|(i, &degree)| SnapshotRow { time: s.time, node: &ids[i], degree })
            })
            .collect();
        write_table(&out.join(format!("snapshots.{e}")), STAGE, cfg, &[], rows)?;
    }

    let quiet = |what: &str, r: citefit::Result<f64>| match r {
        Ok(v) => Some(v),
        Err(err) => {
            warn!("{STAGE}: {what} unavailable: {err}");
            None
        }
    };
    let (exponent, tail_r2) = match degree_exponent(&net, 10) {
        Ok((g, fit)) => (Some(g), Some(fit.r_squared)),
        Err(err) => {
            warn!("{STAGE}: degree exponent unavailable: {err}");
            (None, None)
        }
    };
    let summary = SimSummary {
        nodes: net.nodes.len(),
        edges: net.edges.len(),
        beta: quiet("beta", estimate_beta(&net)),
        beta_by_snapshot: net
            .snapshots
            .iter()
            .map(|s| (s.time, quiet("snapshot beta", estimate_beta_at(s))))
            .collect(),
        degree_exponent: exponent,
        degree_tail_r_squared: tail_r2,
    };
    write_json(&out.join("summary.json"), STAGE, cfg, &summary)?;

    if s.as_corpus {
        let opts = ExportOptions {
            years_per_step: s.years_per_step,
            start_year: s.start_year,
        };
        let corpus = netsim::export_as_corpus(&net, &opts).stage(STAGE)?;
        let report = corpus::IngestReport {
            papers: corpus.len(),
            scholars: corpus.scholars().len(),
            collection_year: Some(corpus.collection_year()),
            ..Default::default()
        };
        write_corpus(cfg, &corpus, &report, &out.join("corpus"), STAGE)?;
    }
    Ok(())
}

/// ingest -> vars -> fit -> rank -> dist -> trend -> authors, all under `out`.
pub fn pipeline(cfg: &RunConfig) -> Result<(), Failure> {
    let input = existing(&cfg.paths.input, "pipeline", "input")?;
    let out = required(&cfg.paths.out, "pipeline", "output")?;
    let bench = load_benchmark(cfg, "pipeline")?;
    let e = ext(cfg);

    let (corpus, report) = read_corpus(cfg, input, cfg.paths.input_format, "ingest")?;
    write_corpus(cfg, &corpus, &report, &out.join("corpus"), "ingest")?;
    write_table(&out.join(format!("profile.{e}")), "ingest", cfg, &[], yearly_profile(&corpus))?;

    for kind in [ModelKind::Paper, ModelKind::Scholar] {
        write_vars(cfg, &corpus, kind, &out.join(format!("{kind}_vars.{e}")))?;
        let model = fit_model(cfg, &corpus, kind)?;
        write_json(&out.join(format!("{kind}_fit.json")), "fit", cfg, &model.report())?;
        let table = score_table(&model, &corpus, bench.as_ref()).stage("rank")?;
        write_rank(cfg, &model, &table, &out.join(format!("{kind}_rank.{e}")))?;
        for column in [ScoreColumn::K, ScoreColumn::Kt, ScoreColumn::Ktf] {
            write_dist(cfg, &table, column, &out.join(format!("{kind}_dist_{column}.{e}")))?;
            if kind == ModelKind::Paper {
                write_trend(cfg, &table, column, &out.join(format!("{kind}_trend_{column}.{e}")))?;
            }
        }
        if kind == ModelKind::Paper {
            write_authors(cfg, &table, &out.join(format!("authors.{e}")))?;
        }
    }
    info!("pipeline: artifacts written to {}", out.display());
    Ok(())
}
