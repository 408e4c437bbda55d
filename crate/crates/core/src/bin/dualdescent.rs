use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dualdescent::baselines::equivalence_report;
use dualdescent::gallery;
use dualdescent::harness::run::{EXIT_CONFIG, EXIT_INVARIANT, EXIT_SUCCESS};
use dualdescent::harness::{self, ProblemSource, RunConfig, Scope, SolverKind, SolverParams};
use dualdescent::monitor::MonitorPolicy;
use dualdescent::sdd::{RhoMode, Sweep};
use dualdescent::{Error, Result};

#[derive(Parser)]
#[command(name = "dualdescent", version, about = "Dual-descent augmented Lagrangian solvers with lemma monitors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem; writes trace.csv, certificate.json and summary.json.
    Run(RunArgs),
    /// Solve for a decreasing list of tolerances and fit the iteration slope.
    Sweep(SweepArgs),
    /// Run the monitor and oracle checks and print a JSON report.
    Verify {
        #[arg(long, default_value = "fast")]
        scope: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Gallery commands.
    Gallery {
        #[command(subcommand)]
        action: GalleryAction,
    },
    /// Compare SDD-ADMM with the linearized penalty ADMM under the parameter mapping.
    Equivalence {
        #[arg(long, default_value = "G1")]
        problem: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_delimiter = ',', default_values_t = vec![1.0 / 3.0, 1.0, 3.0])]
        gamma: Vec<f64>,
        #[arg(long, default_value_t = 10.0)]
        rho: f64,
        #[arg(long, default_value_t = 2.0)]
        theta: f64,
        #[arg(long, default_value_t = 50)]
        iters: usize,
    },
}

#[derive(Subcommand)]
enum GalleryAction {
    /// Print the gallery instances and their metadata as JSON.
    List,
}

#[derive(Args)]
struct ProblemArgs {
    /// Gallery id (G1..G4) or path to a problem JSON file.
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    solver: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ParamArgs {
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    varrho: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// explicit, eps2_rule or eps1_rule
    #[arg(long)]
    rho_mode: Option<String>,
    /// gauss_seidel or jacobi
    #[arg(long)]
    sweep: Option<String>,
    /// Record monitor failures instead of aborting on the first one.
    #[arg(long)]
    record: bool,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Base configuration (JSON); flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    trace_every: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    params: ParamArgs,
    /// Decreasing tolerances, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = vec![1e-1, 1e-2, 1e-3, 1e-4])]
    eps: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_enum<T: serde::de::DeserializeOwned>(what: &str, s: &str) -> Result<T> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| Error::Config(format!("invalid {what} {s:?}")))
}

fn apply(params: &mut SolverParams, a: &ParamArgs) -> Result<()> {
    params.rho = a.rho.or(params.rho);
    params.omega = a.omega.or(params.omega);
    params.theta = a.theta.or(params.theta);
    params.tau = a.tau.or(params.tau);
    params.varrho = a.varrho.or(params.varrho);
    params.c = a.c.or(params.c);
    params.beta = a.beta.or(params.beta);
    if let Some(n) = a.max_iters {
        params.max_iters = n;
    }
    match &a.rho_mode {
        Some(m) => params.rho_mode = parse_enum::<RhoMode>("rho mode", m)?,
        None if a.rho.is_some() => params.rho_mode = RhoMode::Explicit,
        None => {}
    }
    if let Some(s) = &a.sweep {
        params.sweep = parse_enum::<Sweep>("sweep", s)?;
    }
    if a.record {
        params.policy = MonitorPolicy::Record;
    }
    Ok(())
}

fn run_config(args: &RunArgs) -> Result<RunConfig> {
    let base = match &args.config {
        Some(path) => Some(RunConfig::from_file(path)?),
        None => None,
    };
    let problem = match (&args.problem.problem, &base) {
        (Some(p), _) => ProblemSource::parse(p, args.problem.seed),
        (None, Some(b)) => b.problem.clone(),
        (None, None) => return Err(Error::Config("--problem is required".into())),
    };
    let solver = match (&args.problem.solver, &base) {
        (Some(s), _) => s.parse::<SolverKind>()?,
        (None, Some(b)) => b.solver,
        (None, None) => return Err(Error::Config("--solver is required".into())),
    };
    let mut cfg = base.unwrap_or_else(|| RunConfig::new(problem.clone(), solver));
    cfg.problem = problem;
    cfg.solver = solver;
    apply(&mut cfg.params, &args.params)?;
    if let Some(eps) = args.eps {
        cfg.params.eps = eps;
    }
    if args.out.is_some() {
        cfg.out = args.out.clone();
    }
    if let Some(every) = args.trace_every {
        cfg.trace_every = every;
    }
    Ok(cfg)
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Run(args) => {
            let cfg = run_config(&args)?;
            let report = harness::execute(&cfg)?;
            print_json(&report.summary)?;
            Ok(report.exit_code())
        }
        Command::Sweep(args) => {
            let problem_spec = args
                .problem
                .problem
                .as_deref()
                .ok_or_else(|| Error::Config("--problem is required".into()))?;
            let source = ProblemSource::parse(problem_spec, args.problem.seed);
            let solver = args
                .problem
                .solver
                .as_deref()
                .ok_or_else(|| Error::Config("--solver is required".into()))?
                .parse::<SolverKind>()?;
            let mut params = SolverParams::default();
            apply(&mut params, &args.params)?;
            let loaded = source.load()?;
            let report = harness::rate_sweep(&loaded, &source.label(), solver, &params, &args.eps)?;
            if let Some(dir) = &args.out {
                std::fs::create_dir_all(dir)?;
                std::fs::write(dir.join("rate_report.json"), serde_json::to_string_pretty(&report)?)?;
                let mut csv = String::from("eps,k_star,iterations,bound,within_bound\n");
                for r in &report.rows {
                    let opt = |v: Option<String>| v.unwrap_or_default();
                    csv.push_str(&format!(
                        "{},{},{},{},{}\n",
                        r.eps,
                        opt(r.k_star.map(|v| v.to_string())),
                        opt(r.iterations.map(|v| v.to_string())),
                        opt(r.bound.map(|v| v.to_string())),
                        r.within_bound
                    ));
                }
                std::fs::write(dir.join("rate.csv"), csv)?;
            }
            print_json(&report)?;
            Ok(if report.passed() { EXIT_SUCCESS } else { EXIT_INVARIANT })
        }
        Command::Verify { scope, out } => {
            let scope: Scope = scope.parse()?;
            let report = harness::verify_suite(scope)?;
            if let Some(path) = out {
                std::fs::write(path, serde_json::to_string_pretty(&report)?)?;
            }
            print_json(&report)?;
            Ok(if report.passed { EXIT_SUCCESS } else { EXIT_INVARIANT })
        }
        Command::Gallery {
            action: GalleryAction::List,
        } => {
            let entries: Vec<_> = gallery::list()
                .into_iter()
                .map(|(id, meta)| serde_json::json!({ "id": id, "metadata": meta }))
                .collect();
            print_json(&entries)?;
            Ok(EXIT_SUCCESS)
        }
        Command::Equivalence {
            problem,
            seed,
            gamma,
            rho,
            theta,
            iters,
        } => {
            let inst = ProblemSource::parse(&problem, seed).load()?.instance;
            let mut reports = Vec::new();
            for g in gamma {
                reports.push(equivalence_report(&inst, g, rho, theta, iters)?);
            }
            print_json(&reports)?;
            Ok(if reports.iter().all(|r| r.pass) { EXIT_SUCCESS } else { EXIT_INVARIANT })
        }
    }
}

fn init_logging() -> Result<()> {
    let level = match std::env::var("DUALDESCENT_LOG") {
        Ok(v) => v,
        Err(_) => "error".to_string(),
    };
    if !matches!(level.as_str(), "error" | "info" | "debug") {
        return Err(Error::Config(format!("DUALDESCENT_LOG must be error, info or debug; got {level:?}")));
    }
    env_logger::Builder::new().parse_filters(&level).format_timestamp(None).init();
    Ok(())
}

fn main() -> ExitCode {
    // usage errors share the configuration exit code
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG as u8 } else { EXIT_SUCCESS as u8 });
        }
    };
    let code = init_logging().and_then(|_| dispatch(cli)).unwrap_or_else(|e| {
        eprintln!("error: {e}");
        harness::exit_code_for(&e)
    });
    ExitCode::from(code as u8)
}
