mod io;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use nmg_select::bench::{
    correlation_study, pareto_dump, random_candidate_matrix, run_trials, BenchConfig,
    CorrelationConfig, IndexPair, Method,
};
use nmg_select::greedy::pure_greedy;
use nmg_select::group_greedy::group_greedy;
use nmg_select::nmg::nmg_select;
use nmg_select::Archive;

use io::{indices_cell, num, objective_cells, read_matrix, write_matrix, persist_all, Report};

#[derive(Debug, Parser)]
#[command(name = "nmg-select", version, about = "Multiobjective greedy sensor selection")]
struct Cli {
    /// Worker threads; defaults to one per core.
    #[arg(long, global = true, env = "OED_THREADS", value_parser = positive)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a random standard-normal candidate matrix.
    Generate(GenerateArgs),
    /// Run one selection method on a matrix file.
    Select(SelectArgs),
    /// Compare methods over many random matrices.
    Benchmark(BenchmarkArgs),
    /// Dump final solutions of every method and archive correlations.
    Pareto(ParetoArgs),
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long, value_parser = positive)]
    n: usize,
    #[arg(long, value_parser = positive)]
    r: usize,
    /// Defaults to the current time; the value used is echoed in the file.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SelectArgs {
    #[arg(long, value_parser = parse_method)]
    method: Method,
    #[arg(long, value_parser = positive)]
    p: usize,
    /// Archive capacity for nmg and the group-greedy methods.
    #[arg(long, value_parser = positive, default_value_t = 10)]
    lmax: usize,
    /// Required by nmg.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct BenchmarkArgs {
    #[arg(long, value_parser = positive, default_value_t = 200)]
    n: usize,
    #[arg(long, value_parser = positive, default_value_t = 10)]
    r: usize,
    #[arg(long, value_parser = positive, default_value_t = 20)]
    p: usize,
    #[arg(long, value_parser = positive, default_value_t = 10)]
    lmax: usize,
    #[arg(long, value_parser = positive, default_value_t = 20)]
    trials: usize,
    /// Seed of trial 0; trial t uses seed + t.
    #[arg(long)]
    seed: u64,
    /// Comma-separated; dg, ag and eg always run as normalizers.
    #[arg(long, value_delimiter = ',', value_parser = parse_method, default_value = "nmg,dg,ag,eg,dgg,agg,egg")]
    methods: Vec<Method>,
    /// Aggregate CSV.
    #[arg(long)]
    out: PathBuf,
    /// Per-trial CSV with raw index values.
    #[arg(long)]
    trials_out: PathBuf,
}

#[derive(Debug, Args)]
struct ParetoArgs {
    #[arg(long, value_parser = positive, default_value_t = 1000)]
    n: usize,
    #[arg(long, value_parser = positive, default_value_t = 10)]
    r: usize,
    #[arg(long, value_parser = positive, default_value_t = 20)]
    p: usize,
    #[arg(long, value_parser = positive, default_value_t = 50)]
    lmax: usize,
    /// Trials for the correlation statistics; the dump uses trial 0.
    #[arg(long, value_parser = positive, default_value_t = 100)]
    trials: usize,
    #[arg(long)]
    seed: u64,
    /// Solutions CSV.
    #[arg(long)]
    out: PathBuf,
    /// Correlation CSV.
    #[arg(long)]
    corr_out: PathBuf,
}

fn positive(s: &str) -> std::result::Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse().map_err(|_| "expected one of nmg, dg, ag, eg, dgg, agg, egg".to_string())
}

fn generate(args: GenerateArgs) -> Result<()> {
    let seed = match args.seed {
        Some(s) => s,
        None => SystemTime::now().duration_since(UNIX_EPOCH)?.as_nanos() as u64,
    };
    let u = random_candidate_matrix(args.n, args.r, seed)?;
    let config = [
        ("command", "generate".to_string()),
        ("n", args.n.to_string()),
        ("r", args.r.to_string()),
        ("seed", seed.to_string()),
    ];
    write_matrix(&u, &config, &args.out)
}

fn archive_rows(report: &mut Report, trajectory: &[Archive]) {
    report.row(["step", "member", "indices", "logdet_d", "trace_a", "lambda_e"]);
    for (k, archive) in trajectory.iter().enumerate() {
        for (j, m) in archive.members().iter().enumerate() {
            let [d, a, e] = objective_cells(&m.objectives);
            report.row([(k + 1).to_string(), j.to_string(), indices_cell(&m.set), d, a, e]);
        }
    }
}

fn select(args: SelectArgs) -> Result<()> {
    let u = read_matrix(&args.input)?;
    let mut config = vec![
        ("command", "select".to_string()),
        ("method", args.method.to_string()),
        ("in", args.input.display().to_string()),
        ("n", u.n().to_string()),
        ("r", u.r().to_string()),
        ("p", args.p.to_string()),
    ];
    if args.method == Method::Nmg || args.method.is_group() {
        config.push(("lmax", args.lmax.to_string()));
    }
    let context = || format!("{} with p={} on {} candidates", args.method, args.p, u.n());
    let mut report;
    match args.method {
        Method::Nmg => {
            let Some(seed) = args.seed else {
                bail!("--seed is required for method nmg");
            };
            config.push(("seed", seed.to_string()));
            report = Report::new(&config);
            let traj = nmg_select(&u, args.p, args.lmax, seed).with_context(context)?;
            archive_rows(&mut report, &traj);
        }
        m if m.is_group() => {
            report = Report::new(&config);
            let kind = m.objective().expect("group method has an objective");
            let traj = group_greedy(&u, args.p, args.lmax, kind).with_context(context)?;
            archive_rows(&mut report, &traj);
        }
        m => {
            report = Report::new(&config);
            let kind = m.objective().expect("pure method has an objective");
            let steps = pure_greedy(&u, args.p, kind).with_context(context)?;
            report.row(["step", "index", "logdet_d", "trace_a", "lambda_e"]);
            for (k, s) in steps.iter().enumerate() {
                let [d, a, e] = objective_cells(&s.objectives);
                report.row([(k + 1).to_string(), s.added.to_string(), d, a, e]);
            }
        }
    }
    report.persist(&args.out)
}

fn benchmark(args: BenchmarkArgs) -> Result<()> {
    let config = BenchConfig {
        n: args.n,
        r: args.r,
        p_max: args.p,
        capacity: args.lmax,
        trials: args.trials,
        base_seed: args.seed,
        methods: args.methods.clone(),
    };
    let result = run_trials(&config).context("benchmark failed")?;
    let methods: Vec<String> = args.methods.iter().map(Method::to_string).collect();
    let echo = [
        ("command", "benchmark".to_string()),
        ("n", args.n.to_string()),
        ("r", args.r.to_string()),
        ("p", args.p.to_string()),
        ("lmax", args.lmax.to_string()),
        ("trials", args.trials.to_string()),
        ("seed", args.seed.to_string()),
        ("methods", methods.join(" ")),
    ];

    let mut aggregate = Report::new(&echo);
    aggregate.row(["p", "method", "mean_D_ratio", "mean_A_ratio", "mean_E_ratio", "mean_time_s"]);
    for row in &result.aggregate {
        aggregate.row([
            row.p.to_string(),
            row.method.to_string(),
            num(row.mean_d_ratio),
            num(row.mean_a_ratio),
            num(row.mean_e_ratio),
            num(row.mean_time_s),
        ]);
    }

    let mut per_trial = Report::new(&echo);
    per_trial.row(["trial", "seed", "method", "p", "logdet_d", "trace_a", "lambda_e", "time_s"]);
    for (t, trial) in result.trials.iter().enumerate() {
        for (method, records) in &trial.records {
            for (k, rec) in records.iter().enumerate() {
                let [d, a, e] = objective_cells(&rec.objectives);
                per_trial.row([
                    t.to_string(),
                    trial.seed.to_string(),
                    method.to_string(),
                    (k + 1).to_string(),
                    d,
                    a,
                    e,
                    num(rec.time_s),
                ]);
            }
        }
    }
    persist_all(vec![(aggregate, &args.out), (per_trial, &args.trials_out)])
}

fn pareto(args: ParetoArgs) -> Result<()> {
    let echo = [
        ("command", "pareto".to_string()),
        ("n", args.n.to_string()),
        ("r", args.r.to_string()),
        ("p", args.p.to_string()),
        ("lmax", args.lmax.to_string()),
        ("trials", args.trials.to_string()),
        ("seed", args.seed.to_string()),
    ];
    let u = random_candidate_matrix(args.n, args.r, args.seed)?;
    let dump = pareto_dump(&u, args.p, args.lmax, args.seed).context("pareto dump failed")?;
    if !dump.nmg_mutually_nondominated() {
        bail!("internal error: dumped NMG solutions dominate each other");
    }
    let mut solutions = Report::new(&echo);
    solutions.row(["method", "indices", "logdet_d", "trace_a", "lambda_e"]);
    for entry in &dump.entries {
        let [d, a, e] = objective_cells(&entry.objectives);
        solutions.row([entry.method.to_string(), indices_cell(&entry.set), d, a, e]);
    }

    let mut corr = Report::new(&echo);
    corr.row(["pair", "mean_r", "trials_used"]);
    // Pearson needs at least three archive members per trial.
    if args.lmax >= 3 {
        let summary = correlation_study(&CorrelationConfig {
            n: args.n,
            r: args.r,
            p: args.p,
            capacity: args.lmax,
            trials: args.trials,
            base_seed: args.seed,
        })
        .context("correlation study failed")?;
        for (pair, r) in &summary.mean {
            corr.row([pair.label().to_string(), num(*r), summary.trials_used.to_string()]);
        }
    } else {
        for pair in IndexPair::ALL {
            corr.row([pair.label(), "nan", "0"]);
        }
    }
    persist_all(vec![(solutions, &args.out), (corr, &args.corr_out)])
}

fn run(cli: Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("cannot start the worker pool")?;
    }
    match cli.command {
        Command::Generate(a) => generate(a),
        Command::Select(a) => select(a),
        Command::Benchmark(a) => benchmark(a),
        Command::Pareto(a) => pareto(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
