use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use idgen_core::identify::{id, idc, Traced};
use idgen_core::idgen::{
    build_query, sample_query, BuildConfig, Proposal, QuerySpec, SamplingNetwork, TrainingData,
};
use idgen_core::scm::{catalog, empirical_distribution, tvd, DiscreteScm};
use idgen_core::{Admg, Assignment, Dataset};

/// Seed offsets so data generation, network building and sampling draw from
/// unrelated streams under one user seed.
const DATA_SEED: u64 = 0x5eed_da7a;
const BUILD_SEED: u64 = 0x5eed_b11d;

#[derive(Parser)]
#[command(
    name = "idgen",
    version,
    about = "Identify and sample interventional queries on discrete ADMGs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the estimand and recursion trace for a query.
    Identify {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        query: PathBuf,
    },
    /// Build a sampling network and draw samples of the query targets.
    Sample(SampleArgs),
    /// Score sampled queries against the exact interventional distribution.
    Eval(EvalArgs),
    /// Draw observational rows from an SCM.
    GenData {
        #[arg(long)]
        scm: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the reference graphs, SCMs and queries to a directory.
    Catalog {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ProposalArg {
    Uniform,
    Marginal,
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long, value_enum, default_value = "uniform")]
    proposal: ProposalArg,
    /// Size of regenerated training sets relative to the data they replace.
    #[arg(long, default_value_t = 1.0)]
    dprime_mult: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    workers: Option<usize>,
}

impl BuildArgs {
    fn config(&self) -> Result<BuildConfig> {
        if !(self.dprime_mult > 0.0) {
            bail!("--dprime-mult must be positive");
        }
        Ok(BuildConfig {
            proposal: match self.proposal {
                ProposalArg::Uniform => Proposal::Uniform,
                ProposalArg::Marginal => Proposal::Marginal,
            },
            dprime_mult: self.dprime_mult,
            seed: self.seed ^ BUILD_SEED,
        })
    }
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long, requires = "data", conflicts_with = "scm")]
    graph: Option<PathBuf>,
    #[arg(long, requires = "graph")]
    data: Option<PathBuf>,
    #[arg(long, required_unless_present = "graph")]
    scm: Option<PathBuf>,
    /// Observational rows drawn from the SCM when `--scm` is given.
    #[arg(long, default_value_t = 500_000, value_parser = clap::value_parser!(u64).range(1..))]
    data_n: u64,
    #[arg(long)]
    query: PathBuf,
    #[arg(long, default_value_t = 200_000, value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    build: BuildArgs,
}

#[derive(Args)]
struct EvalArgs {
    /// SCM to score; the whole catalog when omitted.
    #[arg(long, requires = "query")]
    scm: Option<PathBuf>,
    #[arg(long)]
    query: Vec<PathBuf>,
    #[arg(long, default_value_t = 500_000, value_parser = clap::value_parser!(u64).range(1..))]
    data_n: u64,
    #[arg(long, default_value_t = 200_000, value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
    /// Largest accepted TVD for fitted models.
    #[arg(long, default_value_t = 0.03)]
    tolerance: f64,
    #[command(flatten)]
    build: BuildArgs,
}

/// Failure with a specific exit status.
#[derive(Debug)]
struct Exit(u8);

impl std::fmt::Display for Exit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "exit {}", self.0)
    }
}

impl std::error::Error for Exit {}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_graph(path: &Path) -> Result<Admg> {
    read(path)?
        .parse()
        .with_context(|| format!("parsing graph {}", path.display()))
}

fn load_scm(path: &Path) -> Result<DiscreteScm> {
    DiscreteScm::parse(&read(path)?).with_context(|| format!("parsing SCM {}", path.display()))
}

fn load_query(path: &Path, g: &Admg) -> Result<QuerySpec> {
    let q: QuerySpec = read(path)?
        .parse()
        .with_context(|| format!("parsing query {}", path.display()))?;
    q.check(g)
        .with_context(|| format!("query {} does not fit the graph", path.display()))?;
    Ok(q)
}

fn hedge_exit<T>(t: &Traced<T>, out: &mut impl Write) -> Result<()> {
    if let Err(h) = &t.outcome {
        writeln!(out, "not identifiable: {h}")?;
        write!(out, "trace:\n{}", t.trace)?;
        return Err(Exit(2).into());
    }
    Ok(())
}

fn identify(graph: &Path, query: &Path) -> Result<()> {
    let g = load_graph(graph)?;
    let q = load_query(query, &g)?;
    let t = if q.given.is_empty() {
        id(&q.targets, &q.do_vars(), &g)?
    } else {
        idc(&q.targets, &q.do_vars(), &q.given_vars(), &g)?
    };
    let mut out = io::stdout().lock();
    hedge_exit(&t, &mut out)?;
    let e = t.outcome.as_ref().expect("checked above");
    writeln!(out, "{}", e.pretty(&g))?;
    write!(out, "trace:\n{}", t.trace)?;
    Ok(())
}

fn build(
    q: &QuerySpec,
    g: &Admg,
    data: TrainingData,
    cfg: &BuildConfig,
) -> Result<SamplingNetwork> {
    let t = build_query(q, g, data, cfg)?;
    hedge_exit(&t, &mut io::stdout().lock())?;
    Ok(t.outcome.expect("checked above"))
}

fn write_dataset(d: &Dataset, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => d
            .save(p)
            .with_context(|| format!("writing {}", p.display()))?,
        None => d.write_csv(BufWriter::new(io::stdout().lock()))?,
    }
    Ok(())
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".network");
    PathBuf::from(s)
}

fn sample(a: &SampleArgs) -> Result<()> {
    let cfg = a.build.config()?;
    let (g, data) = match (&a.scm, &a.graph, &a.data) {
        (Some(scm), _, _) => {
            let m = load_scm(scm)?;
            let d = m.sample_observational(a.data_n as usize, a.build.seed ^ DATA_SEED)?;
            (m.graph().clone(), d)
        }
        (None, Some(graph), Some(data)) => {
            let g = load_graph(graph)?;
            let d = Dataset::load(data, g.variables())
                .with_context(|| format!("reading data {}", data.display()))?;
            (g, d)
        }
        _ => bail!("give either --scm or both --graph and --data"),
    };
    let q = load_query(&a.query, &g)?;
    let h = build(&q, &g, TrainingData::Samples(Arc::new(data)), &cfg)?;
    let samples = sample_query(&h, &q, a.n as usize, a.build.seed)?;
    write_dataset(&samples, a.out.as_deref())?;
    if let Some(out) = &a.out {
        let path = manifest_path(out);
        fs::write(&path, h.to_manifest()?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

struct Row {
    model: String,
    query: String,
    fitted: Option<f64>,
    exact: Option<f64>,
    bound: f64,
}

fn score(
    m: &DiscreteScm,
    q: &QuerySpec,
    a: &EvalArgs,
    cfg: &BuildConfig,
) -> Result<(Option<f64>, Option<f64>, f64)> {
    let g = m.graph();
    let truth = m.exact_query(q)?;
    let k = truth.len() as f64;
    let bound = 0.01 + 3.0 * (k / a.n as f64).sqrt();
    let run = |data: TrainingData| -> Result<Option<f64>> {
        let t = build_query(q, g, data, cfg)?;
        match t.outcome {
            Err(_) => Ok(None),
            Ok(h) => {
                let s = sample_query(&h, q, a.n as usize, a.build.seed)?;
                let emp = empirical_distribution(&s, &q.targets)?;
                Ok(Some(tvd(&emp, &truth)?))
            }
        }
    };
    let obs = m.sample_observational(a.data_n as usize, a.build.seed ^ DATA_SEED)?;
    let fitted = run(TrainingData::Samples(Arc::new(obs)))?;
    let exact = run(TrainingData::Exact(Arc::new(m.exact_joint()?)))?;
    Ok((fitted, exact, bound))
}

fn eval(a: &EvalArgs) -> Result<()> {
    let cfg = a.build.config()?;
    let mut jobs: Vec<(String, DiscreteScm, QuerySpec)> = Vec::new();
    match &a.scm {
        Some(path) => {
            let m = load_scm(path)?;
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            for qp in &a.query {
                jobs.push((name.clone(), m.clone(), load_query(qp, m.graph())?));
            }
        }
        None => {
            for e in catalog() {
                for q in e.queries {
                    jobs.push((e.name.clone(), e.scm.clone(), q.query));
                }
            }
        }
    }
    let mut rows = Vec::with_capacity(jobs.len());
    for (name, m, q) in &jobs {
        let (fitted, exact, bound) = score(m, q, a, &cfg)?;
        rows.push(Row {
            model: name.clone(),
            query: q.to_string(),
            fitted,
            exact,
            bound,
        });
    }
    let mut out = io::stdout().lock();
    writeln!(
        out,
        "| model | query | fitted TVD | exact TVD | exact bound | status |"
    )?;
    writeln!(out, "|---|---|---|---|---|---|")?;
    let mut all_ok = true;
    for r in &rows {
        let (f, e, status) = match (r.fitted, r.exact) {
            (Some(f), Some(e)) => {
                let ok = f <= a.tolerance && e <= r.bound;
                all_ok &= ok;
                (
                    format!("{f:.4}"),
                    format!("{e:.4}"),
                    if ok { "ok" } else { "FAIL" },
                )
            }
            _ => ("-".to_string(), "-".to_string(), "HEDGE"),
        };
        writeln!(
            out,
            "| {} | {} | {f} | {e} | {:.4} | {status} |",
            r.model, r.query, r.bound
        )?;
    }
    if !all_ok {
        writeln!(out, "some queries exceed tolerance")?;
    }
    Ok(())
}

fn gen_data(scm: &Path, n: u64, seed: u64, out: Option<&Path>) -> Result<()> {
    let m = load_scm(scm)?;
    let d = m.sample_observational(n as usize, seed)?;
    write_dataset(&d, out)
}

fn write_catalog(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for e in catalog() {
        fs::write(
            dir.join(format!("{}.graph", e.name)),
            e.scm.graph().to_text(),
        )?;
        fs::write(dir.join(format!("{}.scm", e.name)), e.scm.to_text())?;
        for (i, q) in e.queries.iter().enumerate() {
            let mut text = format!(
                "target={}\n",
                e.scm.graph().ordered(&q.query.targets).join(",")
            );
            let list = |a: &Assignment| {
                a.iter()
                    .map(|(k, v)| format!("{k}={v}"))
                    .collect::<Vec<_>>()
                    .join(",")
            };
            if !q.query.intervention.is_empty() {
                text.push_str(&format!("do={}\n", list(&q.query.intervention)));
            }
            if !q.query.given.is_empty() {
                text.push_str(&format!("given={}\n", list(&q.query.given)));
            }
            fs::write(dir.join(format!("{}_{}.query", e.name, i + 1)), text)?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Identify { graph, query } => identify(graph, query),
        Command::Sample(a) => {
            install_pool(a.build.workers)?;
            sample(a)
        }
        Command::Eval(a) => {
            install_pool(a.build.workers)?;
            eval(a)
        }
        Command::GenData { scm, n, seed, out } => gen_data(scm, *n, *seed, out.as_deref()),
        Command::Catalog { out } => write_catalog(out),
    }
}

fn install_pool(workers: Option<usize>) -> Result<()> {
    if let Some(w) = workers {
        if w == 0 {
            bail!("--workers must be positive");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .context("configuring worker threads")?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => match e.downcast_ref::<Exit>() {
            Some(Exit(code)) => ExitCode::from(*code),
            None => {
                eprintln!("error: {e:#}");
                ExitCode::from(1)
            }
        },
    }
}
