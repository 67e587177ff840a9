use std::path::PathBuf;
use std::process::ExitCode;

use citefit::corpus::{InputFormat, NameStyle};
use citefit::distributions::{Binning, DistributionKind};
use citefit::metrics::TauConvention;
use citefit::models::{ModelKind, ScoreColumn};
use citefit::netsim::Attachment;
use clap::{Args, Parser, Subcommand};

mod config;
mod failure;
mod output;
mod stages;

use config::{FitnessChoice, FlagSet, OutputFormat, RunConfig};
use failure::Failure;

#[derive(Parser, Debug)]
#[command(name = "citefit", version, about = "Fitness-model analysis of citation networks")]
struct Cli {
    #[command(flatten)]
    global: Global,

    #[command(subcommand)]
    command: Command,
}

/// Settings shared by every subcommand. Flags override the config file.
#[derive(Args, Debug)]
struct Global {
    /// TOML run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Time factor: age_plus_one, age or ratio
    #[arg(long, global = true)]
    tau: Option<TauConvention>,

    /// Constant added to k and phi before logarithms
    #[arg(long, global = true)]
    shift: Option<f64>,

    /// Reject papers citing later-published work instead of flagging them
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true")]
    strict_years: Option<bool>,

    /// Drop papers published before this year
    #[arg(long, global = true)]
    min_year: Option<i32>,

    /// Census year for citation counts (default: latest publication year)
    #[arg(long, global = true)]
    collection_year: Option<i32>,

    /// Canonical name form: initials or full_given
    #[arg(long, global = true, value_parser = parse_name_style)]
    name_style: Option<NameStyle>,

    /// Two-column CSV of raw name -> canonical name corrections
    #[arg(long, global = true)]
    name_overrides: Option<PathBuf>,

    /// Rows kept in rankings
    #[arg(long = "top", global = true)]
    top_n: Option<usize>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Tabular output: csv or json
    #[arg(long, global = true)]
    output_format: Option<OutputFormat>,
}

fn parse_name_style(s: &str) -> Result<NameStyle, String> {
    match s {
        "initials" => Ok(NameStyle::Initials),
        "full_given" | "full" => Ok(NameStyle::FullGiven),
        other => Err(format!("unknown name style {other:?} (initials or full_given)")),
    }
}

#[derive(Args, Debug)]
struct CorpusArg {
    /// Corpus directory (papers.csv or corpus.jsonl) or file
    #[arg(long)]
    corpus: Option<PathBuf>,

    /// Force the corpus format: xml, csv or jsonl
    #[arg(long)]
    input_format: Option<InputFormat>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a corpus, normalize names and write it back as CSV
    Ingest {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        input_format: Option<InputFormat>,
        /// Output directory
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute per-paper or per-scholar fitness variables
    Vars {
        #[command(flatten)]
        corpus: CorpusArg,
        #[arg(long)]
        model: Option<ModelKind>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the paper or scholar fitness model
    Fit {
        #[command(flatten)]
        corpus: CorpusArg,
        #[arg(long)]
        model: Option<ModelKind>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rank by k, k_t or k_tf and correlate with a benchmark
    Rank {
        #[arg(long)]
        fit: Option<PathBuf>,
        #[command(flatten)]
        corpus: CorpusArg,
        /// Two-column CSV: key,count
        #[arg(long)]
        benchmark: Option<PathBuf>,
        #[arg(long)]
        by: Option<ScoreColumn>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Frequency distribution of a score, with tail fits
    Dist {
        #[arg(long)]
        fit: Option<PathBuf>,
        #[command(flatten)]
        corpus: CorpusArg,
        /// Entities scored when no fit is given
        #[arg(long)]
        model: Option<ModelKind>,
        /// k (none), k_t or k_tf
        #[arg(long)]
        normalize: Option<ScoreColumn>,
        #[arg(long)]
        kind: Option<DistributionKind>,
        #[arg(long)]
        binning: Option<Binning>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Yearly series of a score
    Trend {
        #[arg(long)]
        fit: Option<PathBuf>,
        #[command(flatten)]
        corpus: CorpusArg,
        #[arg(long)]
        model: Option<ModelKind>,
        #[arg(long)]
        normalize: Option<ScoreColumn>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scores by author count and team size by year
    Authors {
        #[arg(long)]
        fit: Option<PathBuf>,
        #[command(flatten)]
        corpus: CorpusArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Grow a preferential-attachment network
    Simulate {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
        /// constant or uniform
        #[arg(long)]
        fitness: Option<FitnessChoice>,
        /// degree or degree_times_fitness
        #[arg(long)]
        attachment: Option<Attachment>,
        /// Network sizes at which to record all degrees
        #[arg(long, value_delimiter = ',')]
        snapshots: Option<Vec<usize>>,
        /// Also write the network as a corpus under <out>/corpus
        #[arg(long, num_args = 0..=1, default_missing_value = "true")]
        as_corpus: Option<bool>,
        #[arg(long)]
        years_per_step: Option<f64>,
        #[arg(long)]
        start_year: Option<i32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every stage from a raw corpus
    Pipeline {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        input_format: Option<InputFormat>,
        #[arg(long)]
        benchmark: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn flags(cli: &Cli) -> FlagSet {
    let g = &cli.global;
    let mut f = FlagSet::default();
    f.set("tau", g.tau)
        .set("shift", g.shift)
        .set("strict_years", g.strict_years)
        .set("min_year", g.min_year)
        .set("collection_year", g.collection_year)
        .set("name_style", g.name_style)
        .set("paths.name_overrides", g.name_overrides.as_ref())
        .set("top_n", g.top_n)
        .set("seed", g.seed)
        .set("output_format", g.output_format);
    let corpus = |f: &mut FlagSet, c: &CorpusArg| {
        f.set("paths.corpus", c.corpus.as_ref()).set("paths.input_format", c.input_format);
    };
    match &cli.command {
        Command::Ingest { input, input_format, out } | Command::Pipeline { input, input_format, out, .. } => {
            f.set("paths.input", input.as_ref())
                .set("paths.input_format", *input_format)
                .set("paths.out", out.as_ref());
            if let Command::Pipeline { benchmark, .. } = &cli.command {
                f.set("paths.benchmark", benchmark.as_ref());
            }
        }
        Command::Vars { corpus: c, model, out } | Command::Fit { corpus: c, model, out } => {
            corpus(&mut f, c);
            f.set("analysis.model", *model).set("paths.out", out.as_ref());
        }
        Command::Rank { fit, corpus: c, benchmark, by, out } => {
            corpus(&mut f, c);
            f.set("paths.fit", fit.as_ref())
                .set("paths.benchmark", benchmark.as_ref())
                .set("analysis.by", *by)
                .set("paths.out", out.as_ref());
        }
        Command::Dist { fit, corpus: c, model, normalize, kind, binning, out } => {
            corpus(&mut f, c);
            f.set("paths.fit", fit.as_ref())
                .set("analysis.model", *model)
                .set("analysis.normalize", *normalize)
                .set("analysis.kind", *kind)
                .set("analysis.binning", *binning)
                .set("paths.out", out.as_ref());
        }
        Command::Trend { fit, corpus: c, model, normalize, out } => {
            corpus(&mut f, c);
            f.set("paths.fit", fit.as_ref())
                .set("analysis.model", *model)
                .set("analysis.normalize", *normalize)
                .set("paths.out", out.as_ref());
        }
        Command::Authors { fit, corpus: c, out } => {
            corpus(&mut f, c);
            f.set("paths.fit", fit.as_ref()).set("paths.out", out.as_ref());
        }
        Command::Simulate { n, m, fitness, attachment, snapshots, as_corpus, years_per_step, start_year, out } => {
            f.set("simulation.n", *n)
                .set("simulation.m", *m)
                .set("simulation.fitness", *fitness)
                .set("simulation.attachment", *attachment)
                .set("simulation.snapshots", snapshots.as_ref())
                .set("simulation.as_corpus", *as_corpus)
                .set("simulation.years_per_step", *years_per_step)
                .set("simulation.start_year", *start_year)
                .set("paths.out", out.as_ref());
        }
    }
    f
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("CITEFIT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::usage("config", format!("CITEFIT_THREADS={raw:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::usage("config", e.to_string()))
}

fn run(cli: &Cli) -> Result<(), Failure> {
    configure_threads()?;
    let cfg = RunConfig::resolve(cli.global.config.as_deref(), flags(cli).into_value())?;
    log::debug!("{}", cfg.header());
    match cli.command {
        Command::Ingest { .. } => stages::ingest(&cfg),
        Command::Vars { .. } => stages::vars(&cfg),
        Command::Fit { .. } => stages::fit(&cfg),
        Command::Rank { .. } => stages::rank(&cfg),
        Command::Dist { .. } => stages::dist(&cfg),
        Command::Trend { .. } => stages::trend_cmd(&cfg),
        Command::Authors { .. } => stages::authors(&cfg),
        Command::Simulate { .. } => stages::simulate(&cfg),
        Command::Pipeline { .. } => stages::pipeline(&cfg),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("{}", serde_json::to_string(&failure).expect("failure serializes"));
            ExitCode::from(failure.exit_code() as u8)
        }
    }
}
