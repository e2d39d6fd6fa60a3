//! Argument definitions and the subcommand handlers.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use kindap::embedding::{knn_graph, spectral_embed, Weighting, DEFAULT_KNN};
use kindap::evaluation::accuracy;
use kindap::kindap::{KindapParams, Rounding};
use kindap::synth::{generate, SynthSpec};

use crate::bench::{run_bench, BenchConfig};
use crate::error::{CliError, CliResult};
use crate::io;
use crate::methods::{run_method, Method, SolveOptions};
use crate::report::{prepare_embedding, ClusterReport, EvalReport, Objectives, SCHEMA};

#[derive(Debug, Parser)]
#[command(name = "kindap", version, about = "K-indicators clustering toolkit")]
pub struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output file, or output directory for `synth` and `bench`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Suppress progress messages on stderr.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset: raw.csv, truth.csv, embedded.csv.
    Synth(SynthArgs),
    /// Spectral embedding of a data matrix through its kNN graph.
    Embed(EmbedArgs),
    /// Cluster an embedded matrix and write a result JSON.
    Cluster(ClusterArgs),
    /// Score predicted labels against the truth.
    Eval(EvalArgs),
    /// Sweep synthetic datasets and methods; writes bench.csv and bench.json.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub rho: f64,
    #[arg(long, default_value_t = 40)]
    pub per_cluster: usize,
    #[arg(long, default_value_t = 300)]
    pub ambient_dim: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum WeightingArg {
    Binary,
    Gaussian,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    /// Data matrix CSV, one row per object.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = DEFAULT_KNN)]
    pub knn: usize,
    #[arg(long)]
    pub row_normalize: bool,
    #[arg(long, value_enum, default_value = "binary")]
    pub weighting: WeightingArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RoundingArg {
    Normalized,
    Magnitude,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    /// Embedded matrix CSV.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "kindap", value_parser = parse_method)]
    pub method: Method,
    /// Number of clusters; defaults to the column count.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub replications: usize,
    #[arg(long, default_value_t = KindapParams::default().max_outer)]
    pub max_outer: usize,
    #[arg(long, default_value_t = KindapParams::default().max_inner)]
    pub max_inner: usize,
    #[arg(long, default_value_t = KindapParams::default().tol_inner)]
    pub tol_inner: f64,
    #[arg(long, default_value_t = KindapParams::default().tol_outer)]
    pub tol_outer: f64,
    #[arg(long, value_enum, default_value = "normalized")]
    pub rounding: RoundingArg,
    /// Iteration cap for Lloyd and SR.
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Relative tolerance for Lloyd and SR.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Result JSON from `cluster`, or a label CSV.
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub truth: PathBuf,
    /// Embedded matrix used to recompute the objectives.
    #[arg(long)]
    pub embedded: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "10,25,50")]
    pub k_list: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0.33,0.66")]
    pub rho_list: Vec<f64>,
    #[arg(long, value_delimiter = ',', value_parser = parse_method, default_value = "kindap,kmeans")]
    pub methods: Vec<Method>,
    #[arg(long, default_value_t = 10)]
    pub replications: usize,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    pub seeds: Vec<u64>,
    #[arg(long, default_value_t = 40)]
    pub per_cluster: usize,
    #[arg(long, default_value_t = 300)]
    pub ambient_dim: usize,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse()
}

struct Context {
    seed: u64,
    out: Option<PathBuf>,
    quiet: bool,
}

impl Context {
    fn note(&self, message: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", message.as_ref());
        }
    }

    fn out_dir(&self) -> CliResult<&Path> {
        let dir = self.out.as_deref().ok_or_else(|| CliError::Usage("--out <DIR> is required".into()))?;
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(dir)
    }

    /// Write to `--out` when given, else to stdout.
    fn emit(&self, text: &str) -> CliResult<()> {
        match &self.out {
            Some(path) => {
                io::write_text(path, text)?;
                self.note(format!("wrote {}", path.display()));
                Ok(())
            }
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

/// Parse `args` (including the program name) and run. Returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> CliResult<()> {
    let ctx = Context { seed: cli.seed, out: cli.out, quiet: cli.quiet };
    match cli.command {
        Command::Synth(a) => synth(&ctx, a),
        Command::Embed(a) => embed(&ctx, a),
        Command::Cluster(a) => cluster(&ctx, a),
        Command::Eval(a) => eval(&ctx, a),
        Command::Bench(a) => bench(&ctx, a),
    }
}

fn json<T: serde::Serialize>(value: &T) -> CliResult<String> {
    serde_json::to_string_pretty(value).map(|s| s + "\n").map_err(|e| CliError::Data(e.to_string()))
}

fn synth(ctx: &Context, a: SynthArgs) -> CliResult<()> {
    let spec = SynthSpec { k: a.k, per_cluster: a.per_cluster, rho: a.rho, ambient_dim: a.ambient_dim, seed: ctx.seed };
    spec.validate()?;
    let dir = ctx.out_dir()?;
    let data = generate(&spec)?;
    io::write_matrix(&dir.join("raw.csv"), &data.raw)?;
    io::write_labels(&dir.join("truth.csv"), &data.truth)?;
    io::write_matrix(&dir.join("embedded.csv"), data.embedded.matrix())?;
    ctx.note(format!("wrote {} points ({} clusters) to {}", spec.n(), spec.k, dir.display()));
    Ok(())
}

fn embed(ctx: &Context, a: EmbedArgs) -> CliResult<()> {
    let data = io::read_matrix(&a.input)?;
    let weighting = match a.weighting {
        WeightingArg::Binary => Weighting::Binary,
        WeightingArg::Gaussian => Weighting::Gaussian,
    };
    let graph = knn_graph(&data, a.knn, weighting)?;
    let embedded = spectral_embed(&graph, a.k, a.row_normalize)?;
    ctx.emit(&io::format_matrix(embedded.matrix()))
}

fn cluster(ctx: &Context, a: ClusterArgs) -> CliResult<()> {
    let (basis, corrected) = prepare_embedding(io::read_matrix(&a.input)?, a.k)?;
    if corrected {
        ctx.note("input columns were not orthonormal; orthonormalized them");
    }
    let options = SolveOptions {
        kindap: KindapParams {
            max_outer: a.max_outer,
            max_inner: a.max_inner,
            tol_inner: a.tol_inner,
            tol_outer: a.tol_outer,
            rounding: match a.rounding {
                RoundingArg::Normalized => Rounding::Normalized,
                RoundingArg::Magnitude => Rounding::Magnitude,
            },
        },
        replications: a.replications,
        max_iters: a.max_iters,
        tol: a.tol,
        seed: ctx.seed,
    };
    let run = run_method(&basis, a.method, &options)?;
    let report = ClusterReport::new(&basis, &run, &options, corrected)?;
    ctx.emit(&json(&report)?)
}

fn eval(ctx: &Context, a: EvalArgs) -> CliResult<()> {
    let pred_text = io::read_text(&a.pred)?;
    let source = a.pred.display().to_string();
    let is_json = a.pred.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let (labels, stored, k) = if is_json {
        let r = ClusterReport::from_json(&pred_text, &source)?;
        (r.labels, Some(r.objectives), Some(r.k))
    } else {
        (io::parse_labels(&pred_text, &source)?, None, None)
    };
    let truth = io::read_labels(&a.truth)?;
    let acc = accuracy(&labels, &truth)?;

    let objectives = match &a.embedded {
        Some(path) => {
            let k = k.unwrap_or_else(|| labels.iter().max().map_or(0, |m| m + 1));
            let (basis, _) = prepare_embedding(io::read_matrix(path)?, Some(k))?;
            Some(Objectives::of(&basis, &labels)?)
        }
        None => None,
    };
    let consistent = match (&objectives, &stored) {
        (Some(now), Some(then)) => Some(now.max_abs_diff(then) <= 1e-9),
        _ => None,
    };
    let report = EvalReport {
        schema: SCHEMA,
        n: labels.len(),
        accuracy: acc,
        objectives,
        stored_objectives: stored,
        consistent,
    };
    ctx.emit(&json(&report)?)
}

fn bench(ctx: &Context, a: BenchArgs) -> CliResult<()> {
    let mut config = BenchConfig::new(a.k_list, a.rho_list, a.methods, a.replications, a.seeds);
    config.base_seed = ctx.seed;
    config.per_cluster = a.per_cluster;
    config.ambient_dim = a.ambient_dim;
    config.validate()?;
    let dir = ctx.out_dir()?;
    ctx.note(format!("running {} cells", config.cell_count()));
    let outcome = run_bench(&config)?;
    io::write_text(&dir.join("bench.csv"), &outcome.to_csv()?)?;
    io::write_text(&dir.join("bench.json"), &(outcome.to_json()? + "\n"))?;
    let failed = outcome.cells.iter().filter(|c| c.row.error.is_some()).count();
    ctx.note(format!(
        "{} rows ({failed} failed) in {:.2} s, written to {}",
        outcome.cells.len(),
        outcome.total_seconds,
        dir.display()
    ));
    Ok(())
}
