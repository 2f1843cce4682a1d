use std::fs;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use exroute::format::{self, GraphFile};
use exroute::trace::{self, RunOptions};
use exroute::workload::{self, WorkloadKind, WorkloadParams};
use exroute_core::expander::{self, DEFAULT_SUBSET_BUDGET};
use exroute_core::preprocess::{self, SplitParams};
use exroute_core::{RouterProfile, RoutingEngine};

#[derive(Parser)]
#[command(name = "route", version, about = "Edge-disjoint path routing on regular expanders")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Serve a trace of find/remove requests.
    Run(RunArgs),
    /// Generate a random regular graph.
    Gen(GenArgs),
    /// Generate a request trace.
    GenWorkload(WorkloadArgs),
    /// Orient and split a graph, writing D, G1, G2, G3.
    Preprocess(PreprocessArgs),
    /// Look for a set spanning too many edges.
    CheckExpansion(ExpansionArgs),
    /// Estimate the non-trivial adjacency spectrum edge.
    Spectrum(SpectrumArgs),
    /// Print a profile file.
    Profile(ProfileCmd),
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    /// Relaxed constants tuned for a few hundred vertices.
    Desk,
    /// Every field derived from (n, d, beta, gamma).
    Derived,
}

#[derive(Args)]
struct ProfileArgs {
    /// Profile file (key=value lines).
    #[arg(long, conflicts_with = "preset")]
    profile: Option<PathBuf>,
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    #[arg(long, default_value_t = 0.01)]
    beta: f64,
    #[arg(long, default_value_t = 0.0005)]
    gamma: f64,
    #[arg(long)]
    relaxed: bool,
    /// Override a single field, e.g. `--set fanout=3`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl ProfileArgs {
    fn resolve(&self, n: usize, d: usize) -> Result<RouterProfile> {
        let mut p = match (&self.profile, self.preset) {
            (Some(path), _) => format::parse_profile(&read(path)?)?,
            (None, Some(Preset::Desk) | None) => expander::desk_profile(n, d),
            (None, Some(Preset::Derived)) => expander::derive_profile(n, d, self.beta, self.gamma, self.relaxed)?,
        };
        for s in &self.set {
            let (k, v) = format::split_assignment(s).with_context(|| format!("`{s}` is not KEY=VALUE"))?;
            format::set_profile_field(&mut p, k, v)?;
        }
        Ok(p)
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    graph: PathBuf,
    #[command(flatten)]
    profile: ProfileArgs,
    /// Trace file, or `-` for standard input.
    #[arg(long)]
    trace: String,
    #[arg(long)]
    verify_every: Option<usize>,
    #[arg(long)]
    stop_on_failure: bool,
    /// Write the run report as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Leave wall-clock percentiles out of the report.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Union of random permutations instead of an undirected graph.
    #[arg(long)]
    directed: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct WorkloadArgs {
    #[arg(long, value_enum)]
    kind: WorkloadKind,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1000)]
    ops: usize,
    #[arg(long)]
    target: usize,
    #[arg(long, default_value_t = 1)]
    endpoint_cap: usize,
    #[arg(long)]
    r: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PreprocessArgs {
    /// Undirected input graph.
    graph: PathBuf,
    /// Output files are `<prefix>D.txt`, `<prefix>G1.txt`, `<prefix>G2.txt`,
    /// `<prefix>G3.txt` and `<prefix>split.txt`.
    prefix: String,
    /// Oracle-host degree; defaults to ⌊k/10⌋.
    #[arg(long)]
    d_prime: Option<usize>,
    #[arg(long, default_value_t = 0)]
    min_degree: usize,
}

#[derive(Args)]
struct ExpansionArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    beta: f64,
    #[arg(long)]
    gamma: f64,
    /// Largest subset size to enumerate.
    #[arg(long, default_value_t = 6)]
    max_size: usize,
    /// Probe this many sampled sets instead of enumerating.
    #[arg(long)]
    sampled: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct SpectrumArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, default_value_t = 100_000)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Also report the mixing-lemma certificate for this beta.
    #[arg(long)]
    beta: Option<f64>,
}

#[derive(Args)]
struct ProfileCmd {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[command(flatten)]
    profile: ProfileArgs,
    /// Spectral bound; shrinks the depth budget to ⌈ln n / ln(c0·d²/λ²)⌉.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    c0: f64,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => io::stdout().write_all(text.as_bytes()).context("writing stdout"),
    }
}

fn load_undirected(path: &Path) -> Result<exroute_core::UndirectedGraph> {
    Ok(format::parse_graph(&read(path)?)?.into_undirected()?)
}

fn run(args: RunArgs) -> Result<bool> {
    let g = format::parse_graph(&read(&args.graph)?)?;
    let text = if args.trace == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        s
    } else {
        read(Path::new(&args.trace))?
    };
    let commands = trace::parse_trace(&text)?;
    let (n, d) = match &g {
        GraphFile::Undirected(u) => (u.vertex_count(), u.regular_degree().unwrap_or(0)),
        GraphFile::Directed(dg) => (dg.vertex_count(), 2 * dg.regular_degree().unwrap_or(0)),
    };
    let profile = args.profile.resolve(n, d)?;
    let mut engine = match g {
        GraphFile::Undirected(u) => RoutingEngine::new(&u, profile)?,
        GraphFile::Directed(dg) => RoutingEngine::from_digraph(dg, profile)?,
    };
    let options = RunOptions {
        verify_every: args.verify_every,
        stop_on_failure: args.stop_on_failure,
        timing: !args.no_timing,
    };
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let report = trace::run_trace(&mut engine, &commands, &options, &mut out)?;
    out.flush()?;
    if let Some(path) = &args.json {
        fs::write(path, serde_json::to_string_pretty(&report)? + "\n")?;
    }
    eprintln!(
        "{} commands, {} served, {} failures ({} expansion), {} verifies, {} with findings",
        report.commands,
        report.requests_served,
        report.failures.len(),
        report.expansion_failures(),
        report.verify_runs,
        report.verify_findings.len()
    );
    Ok(report.is_clean())
}

fn gen(args: GenArgs) -> Result<()> {
    let text = if args.directed {
        format::write_digraph(&expander::gen_random_regular_digraph(args.n, args.d, args.seed)?)
    } else {
        format::write_undirected(&expander::gen_random_regular_graph(args.n, args.d, args.seed)?)
    };
    emit(&args.out, &text)
}

fn gen_workload(args: WorkloadArgs) -> Result<()> {
    let params = WorkloadParams { ops: args.ops, target: args.target, endpoint_cap: args.endpoint_cap, r: args.r };
    let cmds = workload::gen_workload(args.kind, args.n, &params, args.seed)?;
    workload::validate_trace(&cmds, args.n, args.endpoint_cap, args.r)?;
    emit(&args.out, &trace::write_trace(&cmds))
}

fn preprocess(args: PreprocessArgs) -> Result<()> {
    let g = load_undirected(&args.graph)?;
    let split = preprocess::pre_process(&g, &SplitParams { min_degree: args.min_degree, d_prime: args.d_prime })?;
    let path = |name: &str| PathBuf::from(format!("{}{name}.txt", args.prefix));
    if let Some(dir) = path("D").parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path("D"), format::write_digraph(&split.host))?;
    let d = g.regular_degree().unwrap_or(0);
    let mut header = format!("n={}\nd={d}\nk={}\nd_prime={}\n", g.vertex_count(), split.k, split.d_prime);
    for (name, sub) in [("G1", &split.g1), ("G2", &split.g2), ("G3", &split.g3)] {
        fs::write(path(name), format::write_digraph(&sub.graph))?;
        let ids: Vec<String> = sub.origin.iter().map(|e| e.0.to_string()).collect();
        header.push_str(&format!("{name}.origin={}\n", ids.join(" ")));
    }
    fs::write(path("split"), header)?;
    Ok(())
}

fn check_expansion(args: ExpansionArgs) -> Result<bool> {
    let g = load_undirected(&args.graph)?;
    let report = match args.sampled {
        Some(samples) => expander::check_expansion_sampled(&g, args.beta, args.gamma, samples, args.seed)?,
        None => expander::check_expansion_exhaustive(&g, args.beta, args.gamma, args.max_size, DEFAULT_SUBSET_BUDGET)?,
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(report.holds)
}

fn spectrum(args: SpectrumArgs) -> Result<bool> {
    let g = load_undirected(&args.graph)?;
    let mut report = expander::estimate_second_eigenvalue(&g, args.max_iters, args.tol)?;
    if let Some(beta) = args.beta {
        report = report.with_certification(g.regular_degree().unwrap_or(0), beta);
    }
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(report.converged)
}

fn profile(args: ProfileCmd) -> Result<()> {
    let p = match args.lambda {
        Some(lambda) => {
            let a = &args.profile;
            let mut p = expander::derive_profile_spectral(args.n, args.d, a.beta, a.gamma, a.relaxed, lambda, args.c0)?;
            for s in &a.set {
                let (k, v) = format::split_assignment(s).with_context(|| format!("`{s}` is not KEY=VALUE"))?;
                format::set_profile_field(&mut p, k, v)?;
            }
            p
        }
        None => args.profile.resolve(args.n, args.d)?,
    };
    let (first, second) = p.chains_hold();
    if !p.relaxed && !(first && second) {
        bail!("capacity chains violated");
    }
    print!("{}", format::write_profile(&p));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Gen(a) => gen(a).map(|_| true),
        Command::GenWorkload(a) => gen_workload(a).map(|_| true),
        Command::Preprocess(a) => preprocess(a).map(|_| true),
        Command::CheckExpansion(a) => check_expansion(a),
        Command::Spectrum(a) => spectrum(a),
        Command::Profile(a) => profile(a).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
