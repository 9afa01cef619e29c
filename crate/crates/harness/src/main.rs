use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pcc_core::dcsbm::ParamSpec;
use pcc_core::graph::{load_edge_list, load_labels, LoadOptions, NodeIndexing};
use pcc_core::{datasets, Error, Graph, KMeansConfig, LabelVector, Method, MethodOptions, Result};
use pcc_harness::experiment::{write_raw, write_summary, ExperimentOutput};
use pcc_harness::report::{detect_report, oracle_case, oracle_suite, OracleLine};
use pcc_harness::svg::{line_chart, Series};
use pcc_harness::sweep::{write_sweep, SweepRow};
use pcc_harness::{builtin_spec, run_experiment, sweep_mk, sweep_tau, ExperimentId, ExperimentSpec};

#[derive(Parser)]
#[command(name = "pcc", version, about = "Spectral community detection and block-model simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cluster one network and optionally score it against known labels.
    Detect {
        #[command(flatten)]
        input: GraphArgs,
        #[command(flatten)]
        method: MethodArgs,
        /// k-means seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write `node label` lines here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo experiment from a built-in id or a JSON spec.
    Simulate {
        /// Built-in experiment: 1a, 1b, 2a-2f or 3.
        #[arg(long, conflicts_with = "spec")]
        experiment: Option<String>,
        /// JSON experiment spec.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        reps: Option<usize>,
        /// Base seed for network draws.
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated methods.
        #[arg(long, value_delimiter = ',')]
        methods: Option<Vec<String>>,
        /// Grid override, e.g. `100,200` or `1:8`.
        #[arg(long)]
        grid: Option<String>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long = "threshold-t")]
        threshold_t: Option<f64>,
        #[arg(long)]
        mk: Option<usize>,
        /// Write zeros instead of wall times, so reruns are byte-identical.
        #[arg(long)]
        no_timing: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-repetition CSV.
        #[arg(long)]
        raw: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Print the resolved spec as JSON and exit.
        #[arg(long)]
        print_spec: bool,
    },
    /// Mismatches of pcc* or npcc* across M_k.
    SweepMk {
        #[command(flatten)]
        input: GraphArgs,
        #[command(flatten)]
        method: MethodArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// M_k values, e.g. `2:20`.
        #[arg(long)]
        grid: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Mismatches of npcc or rsc across τ.
    SweepTau {
        #[command(flatten)]
        input: GraphArgs,
        #[command(flatten)]
        method: MethodArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// τ values, e.g. `0:10` or `0:60:3`.
        #[arg(long)]
        grid: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Runs PCC and NPCC on population matrices, where recovery must be exact.
    Oracle {
        /// JSON parameter set; random draws plus a built-in example otherwise.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, default_value_t = 50)]
        draws: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Regulariser; mean expected degree by default.
        #[arg(long)]
        tau: Option<f64>,
    },
}

#[derive(Args)]
struct GraphArgs {
    /// Edge list file, or `karate` for the bundled network.
    graph: String,
    /// `node label` file with true communities.
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Indexing::Named)]
    indexing: Indexing,
}

#[derive(Clone, Copy, ValueEnum)]
enum Indexing {
    Named,
    Zero,
    One,
}

#[derive(Args)]
struct MethodArgs {
    #[arg(long, default_value = "pcc")]
    method: String,
    /// Number of communities; defaults to the number of labels when a label file is given.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long = "threshold-t", default_value_t = 0.1)]
    threshold_t: f64,
    #[arg(long)]
    mk: Option<usize>,
    /// Always use K+1 eigenvectors in pcc+ / npcc+.
    #[arg(long)]
    force_plus: bool,
    #[arg(long, default_value_t = 50)]
    restarts: usize,
}

impl MethodArgs {
    fn options(&self, seed: u64) -> MethodOptions {
        MethodOptions {
            tau: self.tau,
            threshold_t: self.threshold_t,
            mk: self.mk,
            force_plus: self.force_plus,
            kmeans: KMeansConfig { restarts: self.restarts, seed, ..KMeansConfig::default() },
        }
    }

    fn k(&self, truth: Option<&LabelVector>) -> Result<usize> {
        self.k
            .or(truth.map(LabelVector::k))
            .ok_or_else(|| Error::InvalidArgument("--k is required without a label file".into()))
    }
}

fn load_graph(args: &GraphArgs) -> Result<(Graph, Option<LabelVector>)> {
    if args.graph == "karate" && !Path::new("karate").exists() {
        let (g, truth) = datasets::karate();
        let truth = match &args.labels {
            Some(path) => load_labels(path, &g)?,
            None => truth,
        };
        return Ok((g, Some(truth)));
    }
    let opts = LoadOptions {
        indexing: match args.indexing {
            Indexing::Named => NodeIndexing::Named,
            Indexing::Zero => NodeIndexing::ZeroBased,
            Indexing::One => NodeIndexing::OneBased,
        },
        ..LoadOptions::default()
    };
    let (graph, report) = load_edge_list(&args.graph, &opts)?;
    if report.self_loops + report.duplicate_edges > 0 {
        log::info!(
            "ignored {} self-loops and {} duplicate edges",
            report.self_loops,
            report.duplicate_edges
        );
    }
    let truth = args.labels.as_ref().map(|p| load_labels(p, &graph)).transpose()?;
    Ok((graph, truth))
}

/// Parses `a,b,c` with optional `start:end[:step]` ranges (inclusive).
fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidArgument(format!("cannot parse grid {text:?}"));
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let nums: Vec<f64> = part
            .split(':')
            .map(|x| x.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        match nums[..] {
            [v] => out.push(v),
            [a, b] | [a, b, _] => {
                let step = if nums.len() == 3 { nums[2] } else { 1.0 };
                if step.is_nan() || step <= 0.0 || b < a {
                    return Err(bad());
                }
                let count = ((b - a) / step + 1e-9).floor() as usize;
                out.extend((0..=count).map(|i| a + step * i as f64));
            }
            _ => return Err(bad()),
        }
    }
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::InvalidArgument(format!("cannot serialise output: {e}")))?;
    println!("{text}");
    Ok(())
}

fn emit_sweep(rows: &[SweepRow], out: Option<&Path>, svg: Option<&Path>, x_label: &str) -> Result<()> {
    match out {
        Some(path) => write_sweep(rows, create(path)?)?,
        None => write_sweep(rows, io::stdout().lock())?,
    }
    if let Some(path) = svg {
        let series = Series {
            name: rows.first().map(|r| r.method.clone()).unwrap_or_default(),
            points: rows.iter().filter(|r| !r.is_default || x_label == "M_k").map(|r| (r.value, r.mismatches as f64)).collect(),
        };
        write_text(path, &line_chart("mismatches", x_label, "errors", &[series]))?;
    }
    Ok(())
}

fn experiment_svg(spec: &ExperimentSpec, output: &ExperimentOutput) -> String {
    let series: Vec<Series> = spec
        .methods
        .iter()
        .map(|m| Series {
            name: m.to_string(),
            points: output
                .summary
                .iter()
                .filter(|r| r.method == m.name())
                .map(|r| (r.value, r.mean_error))
                .collect(),
        })
        .collect();
    line_chart(&format!("experiment {}", spec.id), &spec.grid_param, "error rate", &series)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Detect { input, method, seed, out } => {
            let (graph, truth) = load_graph(&input)?;
            let m: Method = method.method.parse()?;
            let k = method.k(truth.as_ref())?;
            let (mut report, detection) = detect_report(&graph, truth.as_ref(), m, k, &method.options(seed))?;
            if let Some(path) = &out {
                let mut w = create(path)?;
                let ids = graph.node_ids();
                let io_err = |source| Error::Io { path: path.clone(), source };
                for (&node, label) in detection.nodes.iter().zip(detection.labels.to_one_based()) {
                    writeln!(w, "{} {}", ids[node], label).map_err(io_err)?;
                }
                w.flush().map_err(io_err)?;
                report.labels_file = Some(path.display().to_string());
            }
            print_json(&report)?;
            Ok(true)
        }
        Command::Simulate {
            experiment,
            spec,
            reps,
            seed,
            methods,
            grid,
            tau,
            threshold_t,
            mk,
            no_timing,
            out,
            raw,
            svg,
            print_spec,
        } => {
            let mut spec: ExperimentSpec = match (experiment, spec) {
                (Some(id), None) => builtin_spec(id.parse::<ExperimentId>()?)?,
                (None, Some(path)) => read_json(&path)?,
                _ => return Err(Error::InvalidArgument("pass --experiment or --spec".into())),
            };
            if let Some(r) = reps {
                spec.reps = r;
            }
            if let Some(s) = seed {
                spec.seed = s;
            }
            if let Some(list) = methods {
                spec.methods = list.iter().map(|m| m.parse()).collect::<Result<_>>()?;
            }
            if let Some(g) = grid {
                spec.grid = parse_grid(&g)?;
            }
            if tau.is_some() {
                spec.options.tau = tau;
            }
            if let Some(t) = threshold_t {
                spec.options.threshold_t = t;
            }
            if mk.is_some() {
                spec.options.mk = mk;
            }
            if no_timing {
                spec.timing = false;
            }
            spec.outputs.csv = out.or(spec.outputs.csv.take());
            spec.outputs.raw = raw.or(spec.outputs.raw.take());
            spec.outputs.svg = svg.or(spec.outputs.svg.take());
            if print_spec {
                print_json(&spec)?;
                return Ok(true);
            }
            let output = run_experiment(&spec)?;
            match &spec.outputs.csv {
                Some(path) => write_summary(&output.summary, create(path)?)?,
                None => write_summary(&output.summary, io::stdout().lock())?,
            }
            if let Some(path) = &spec.outputs.raw {
                write_raw(&output.raw, create(path)?)?;
            }
            if let Some(path) = &spec.outputs.svg {
                write_text(path, &experiment_svg(&spec, &output))?;
            }
            Ok(true)
        }
        Command::SweepMk { input, method, seed, grid, out, svg } => {
            let (graph, truth) = load_graph(&input)?;
            let truth = truth.ok_or_else(|| Error::InvalidArgument("sweeps need --labels".into()))?;
            let m: Method = method.method.parse()?;
            let m = match m {
                Method::Pcc => Method::PccStar,
                Method::Npcc => Method::NpccStar,
                other => other,
            };
            let k = method.k(Some(&truth))?;
            let grid: Vec<usize> = parse_grid(&grid)?
                .into_iter()
                .map(|v| if v >= 1.0 && v.fract() == 0.0 { Ok(v as usize) } else { Err(Error::InvalidArgument(format!("M_k must be a positive integer, got {v}"))) })
                .collect::<Result<_>>()?;
            let rows = sweep_mk(&graph, &truth, k, m, &grid, &method.options(seed))?;
            emit_sweep(&rows, out.as_deref(), svg.as_deref(), "M_k")?;
            Ok(true)
        }
        Command::SweepTau { input, method, seed, grid, out, svg } => {
            let (graph, truth) = load_graph(&input)?;
            let truth = truth.ok_or_else(|| Error::InvalidArgument("sweeps need --labels".into()))?;
            let m: Method = method.method.parse()?;
            let m = if m == Method::Pcc { Method::Npcc } else { m };
            let k = method.k(Some(&truth))?;
            let rows = sweep_tau(&graph, &truth, k, m, &parse_grid(&grid)?, &method.options(seed))?;
            emit_sweep(&rows, out.as_deref(), svg.as_deref(), "tau")?;
            Ok(true)
        }
        Command::Oracle { params, draws, seed, tau } => {
            let cfg = KMeansConfig { seed, ..KMeansConfig::default() };
            let lines: Vec<OracleLine> = match params {
                Some(path) => {
                    let spec: ParamSpec = read_json(&path)?;
                    vec![oracle_case(&path.display().to_string(), &spec.build(seed)?, tau, &cfg)?]
                }
                None => oracle_suite(draws, seed, tau, &cfg)?,
            };
            for line in &lines {
                let status = if line.passed() { "ok" } else { "FAILED" };
                eprintln!(
                    "{:<14} n={:<4} K={} pcc: {} errors, {} rows | npcc: {} errors, {} rows  {status}",
                    line.case, line.n, line.k, line.pcc.mismatches, line.pcc.distinct_rows,
                    line.npcc.mismatches, line.npcc.distinct_rows
                );
            }
            print_json(&lines)?;
            Ok(lines.iter().all(OracleLine::passed))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}
