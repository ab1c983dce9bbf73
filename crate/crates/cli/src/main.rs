//! `ggms`: Gaussian graphical model selection from the command line.
//!
//! Exit codes: 0 success, 1 numerical failure or I/O error, 2 malformed
//! input or invalid parameters, 3 too few observations (`n <= p`),
//! 4 singular sample covariance, 5 too many failed replications.

mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ggms::edge_test::EdgeTestConfig;
use ggms::oracle::run_oracle_check;
use ggms::selection::select_ou_detailed;
use ggms::{compare_procedures, generate_model, Error, GraphSelector, LossSpec, Procedure, SampleMatrix, Structure};

use crate::output::Provenance;

#[derive(Parser, Debug)]
#[command(name = "ggms", version, about = "Structure selection for Gaussian graphical models")]
struct Cli {
    /// Worker threads for parallel work (0 = one per core). Never changes output.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Select a graph from observations in a CSV file.
    Select(SelectArgs),
    /// Monte Carlo risk of one procedure on a generated model.
    Simulate(SimulateArgs),
    /// Monte Carlo risks of several procedures on shared samples.
    Compare(SimulateArgs),
    /// Print the per-edge quantile and acceptance threshold.
    Threshold(ThresholdArgs),
    /// Compare the closed-form test with the numerical conditional test (p = 3).
    OracleCheck(OracleArgs),
}

/// Either `--alpha` or the pair `--loss-a`/`--loss-b`.
#[derive(Args, Debug, Clone)]
struct LossArgs {
    /// Per-edge significance level; same as losses a = 1 - alpha, b = alpha.
    #[arg(long, conflicts_with_all = ["loss_a", "loss_b"])]
    alpha: Option<f64>,
    /// Loss for including an absent edge.
    #[arg(long, requires = "loss_b")]
    loss_a: Option<f64>,
    /// Loss for omitting a present edge.
    #[arg(long, requires = "loss_a")]
    loss_b: Option<f64>,
}

impl LossArgs {
    fn spec(&self, p: usize) -> Result<LossSpec, Error> {
        match (self.alpha, self.loss_a, self.loss_b) {
            (Some(alpha), None, None) => LossSpec::from_alpha(p, alpha),
            (None, Some(a), Some(b)) => LossSpec::uniform(p, a, b),
            _ => Err(Error::InvalidParameter(
                "give exactly one of --alpha or --loss-a/--loss-b".into(),
            )),
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum GraphFormat {
    Edgelist,
    Dot,
    Json,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum TextFormat {
    Text,
    Json,
}

#[derive(Args, Debug)]
struct SelectArgs {
    /// CSV with one row per observation; `-` reads standard input.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = GraphFormat::Edgelist)]
    format: GraphFormat,
    #[command(flatten)]
    loss: LossArgs,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// empty, chain, star, cycle or random.
    #[arg(long)]
    structure: String,
    #[arg(long)]
    p: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 10_000)]
    reps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Edge weight of the generated precision matrix.
    #[arg(long, default_value_t = 0.3)]
    strength: f64,
    /// Edge probability for the random structure.
    #[arg(long)]
    density: Option<f64>,
    /// Comma-separated: ou, fisher-z, fisher-z-bonferroni, fisher-z-holm.
    #[arg(long)]
    procedures: Option<String>,
    #[command(flatten)]
    loss: LossArgs,
    /// JSON report; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Optional CSV summary, one row per procedure.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ThresholdArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: usize,
    #[command(flatten)]
    loss: LossArgs,
    #[arg(long, value_enum, default_value_t = TextFormat::Text)]
    format: TextFormat,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    loss: LossArgs,
    #[arg(long, value_enum, default_value_t = TextFormat::Text)]
    format: TextFormat,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Core(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Core(e) => match e {
                Error::InsufficientSamples { .. } => 3,
                Error::SingularCovariance { .. } => 4,
                Error::TooManyFailures { .. } => 5,
                Error::Malformed(_)
                | Error::InvalidParameter(_)
                | Error::Domain(_)
                | Error::DimensionMismatch { .. } => 2,
                Error::InfeasibleSlice { .. } | Error::Convergence(_) => 1,
            },
        }
    }

    fn message(&self) -> String {
        let text = match self {
            Failure::Io(m) => m.clone(),
            Failure::Core(e) => match e {
                Error::InsufficientSamples { n, p } => {
                    format!("insufficient samples: need n > p, got n={n}, p={p}")
                }
                Error::SingularCovariance { .. } => format!("singular covariance: {e}"),
                other => other.to_string(),
            },
        };
        // diagnostics are a single line
        text.replace('\n', " ")
    }
}

fn write_out(path: Option<&PathBuf>, bytes: &[u8]) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)
                .and_then(|_| out.flush())
                .map_err(|e| Failure::Io(format!("stdout: {e}")))
        }
    }
}

fn read_sample(path: &PathBuf) -> Result<SampleMatrix, Error> {
    if path.as_os_str() == "-" {
        SampleMatrix::from_csv_reader(std::io::stdin().lock())
    } else {
        SampleMatrix::from_csv_path(path)
    }
}

fn cmd_select(args: &SelectArgs) -> Result<(), Failure> {
    let x = read_sample(&args.input)?;
    let losses = args.loss.spec(x.p())?;
    let selection = select_ou_detailed(&x, &losses)?;
    let prov = Provenance::new("select")
        .with("input", args.input.display().to_string())
        .with("n", x.n())
        .with("p", x.p());
    let text = match args.format {
        GraphFormat::Edgelist => output::edge_list(&prov, &losses, &selection),
        GraphFormat::Dot => output::dot(&prov, &losses, &selection),
        GraphFormat::Json => output::select_json(&prov, &losses, &selection)?,
    };
    write_out(args.output.as_ref(), text.as_bytes())
}

fn procedures(names: &str, losses: &LossSpec) -> Result<Vec<Procedure>, Error> {
    let list: Vec<Procedure> = names
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|name| Procedure::from_name(name, losses))
        .collect::<Result<_, _>>()?;
    if list.is_empty() {
        return Err(Error::InvalidParameter("no procedures given".into()));
    }
    Ok(list)
}

fn cmd_simulate(args: &SimulateArgs, compare: bool) -> Result<(), Failure> {
    let command = if compare { "compare" } else { "simulate" };
    let structure = Structure::parse(&args.structure, args.density)?;
    let losses = args.loss.spec(args.p)?;
    let default = if compare { "ou,fisher-z" } else { "ou" };
    let procs = procedures(args.procedures.as_deref().unwrap_or(default), &losses)?;
    if !compare && procs.len() != 1 {
        return Err(Error::InvalidParameter("simulate takes a single procedure; use compare".into()).into());
    }
    let model = generate_model(args.p, structure, args.strength, args.seed)?;
    let selectors: Vec<&dyn GraphSelector> = procs.iter().map(|p| p as &dyn GraphSelector).collect();
    let comparison = compare_procedures(&model, &selectors, args.n, args.reps, &losses, args.seed)?;

    let names: Vec<String> = procs.iter().map(GraphSelector::name).collect();
    let prov = Provenance::new(command)
        .with("structure", args.structure.as_str())
        .with("p", args.p)
        .with("n", args.n)
        .with("reps", args.reps)
        .with("seed", args.seed)
        .with("strength", args.strength)
        .with_opt("density", args.density)
        .with("procedures", names.join(","));
    let json = output::report_json(&prov, &losses, &comparison, compare)?;
    if let Some(path) = &args.summary {
        let csv = format!("{}{}", prov.comment_lines("# ", &losses), comparison.to_csv());
        write_out(Some(path), csv.as_bytes())?;
    }
    write_out(args.output.as_ref(), json.as_bytes())
}

fn cmd_threshold(args: &ThresholdArgs) -> Result<(), Failure> {
    if args.p < 2 {
        return Err(Error::InvalidParameter(format!("need p >= 2, got {}", args.p)).into());
    }
    let losses = args.loss.spec(args.p)?;
    let alpha = losses.alpha(0, 1);
    let cfg = EdgeTestConfig::new(args.n, args.p, alpha)?;
    let prov = Provenance::new("threshold").with("n", args.n).with("p", args.p);
    let text = match args.format {
        TextFormat::Text => output::threshold_text(&prov, &losses, &cfg),
        TextFormat::Json => output::threshold_json(&prov, &losses, &cfg)?,
    };
    write_out(args.output.as_ref(), text.as_bytes())
}

fn cmd_oracle_check(args: &OracleArgs) -> Result<(), Failure> {
    let losses = args.loss.spec(3)?;
    let summary = run_oracle_check(args.samples, args.n, losses.alpha(0, 1), args.seed)?;
    let prov = Provenance::new("oracle-check")
        .with("samples", args.samples)
        .with("n", args.n)
        .with("seed", args.seed);
    let text = match args.format {
        TextFormat::Text => output::oracle_text(&prov, &losses, &summary),
        TextFormat::Json => output::oracle_json(&prov, &losses, &summary)?,
    };
    write_out(args.output.as_ref(), text.as_bytes())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Select(a) => cmd_select(a),
        Command::Simulate(a) => cmd_simulate(a, false),
        Command::Compare(a) => cmd_simulate(a, true),
        Command::Threshold(a) => cmd_threshold(a),
        Command::OracleCheck(a) => cmd_oracle_check(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("ggms: error: thread pool: {e}");
            return ExitCode::from(1);
        }
    };
    match pool.install(|| run(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("ggms: error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
