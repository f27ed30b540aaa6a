use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, ValueEnum};
use mgp_bench::{aggregate, load_problem, render_table, run_sweep, write_csv, CellSpec, HarnessError, RunSettings};
use mgp_core::agent::Algorithm;
use mgp_core::budget::{ClockKind, Limits};
use mgp_core::search::SearchTree;
use mgp_core::HeuristicKind;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Profile {
    /// 30 runs, 10 s, g_r sweep 1,5,10,30,100
    Desk,
    /// 100 runs, 60 s
    Paper,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Clock {
    Cpu,
    /// no timing: cpu_time_ms is 0 and there is no time budget
    None,
}

/// Runs moving-goal planning experiments and writes one CSV row per run.
#[derive(Debug, Parser)]
#[command(name = "mgp-bench", version)]
struct Cli {
    #[arg(long)]
    domain: PathBuf,
    #[arg(long)]
    problem: PathBuf,
    /// Comma-separated algorithms; all six when omitted
    #[arg(long, value_delimiter = ',', value_parser = parse_alg)]
    alg: Vec<Algorithm>,
    #[arg(long, default_value_t = 1.0)]
    weight: f64,
    /// Weight used by the gfra baseline
    #[arg(long, default_value_t = 1.0)]
    gfra_weight: f64,
    /// Comma-separated delay coefficients
    #[arg(long, value_delimiter = ',', default_value = "1.2")]
    delay_coef: Vec<f64>,
    /// Comma-separated goal evolution rates (counter units per goal step)
    #[arg(long, value_delimiter = ',')]
    goal_rate: Vec<u64>,
    #[arg(long)]
    runs: Option<u32>,
    #[arg(long)]
    timeout_s: Option<f64>,
    /// Cap on stored search nodes; derived from --memory-mb when omitted
    #[arg(long)]
    max_nodes: Option<usize>,
    #[arg(long, default_value_t = 4096)]
    memory_mb: u64,
    #[arg(long)]
    max_expansions: Option<u64>,
    /// Seed of run 0; run k uses seed + k
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "ff", value_parser = parse_heuristic)]
    heuristic: HeuristicKind,
    /// CSV output; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    trace_dir: Option<PathBuf>,
    #[arg(long, value_enum)]
    profile: Option<Profile>,
    #[arg(long, value_enum, default_value = "cpu")]
    clock: Clock,
    /// Print the per-cell summary table to stderr
    #[arg(long)]
    summary: bool,
}

fn parse_alg(s: &str) -> Result<Algorithm, String> {
    s.parse()
}

fn parse_heuristic(s: &str) -> Result<HeuristicKind, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn usage(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(1)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };

    let (default_runs, default_timeout, default_rates): (u32, f64, &[u64]) = match cli.profile {
        Some(Profile::Desk) => (30, 10.0, &[1, 5, 10, 30, 100]),
        Some(Profile::Paper) => (100, 60.0, &[]),
        None => (100, 60.0, &[]),
    };
    let goal_rates = if cli.goal_rate.is_empty() {
        default_rates.to_vec()
    } else {
        cli.goal_rate.clone()
    };
    if goal_rates.is_empty() {
        return usage("--goal-rate is required unless --profile desk is given");
    }
    if goal_rates.contains(&0) {
        return usage("--goal-rate values must be positive");
    }
    if !(cli.weight >= 1.0 && cli.gfra_weight >= 1.0) {
        return usage("weights must be >= 1");
    }
    if cli.delay_coef.iter().any(|c| !c.is_finite() || *c <= 0.0) {
        return usage("--delay-coef values must be positive");
    }
    let timeout = cli.timeout_s.unwrap_or(default_timeout);
    if !(timeout.is_finite() && timeout > 0.0) {
        return usage("--timeout-s must be positive");
    }
    let algs = if cli.alg.is_empty() {
        Algorithm::ALL.to_vec()
    } else {
        cli.alg.clone()
    };

    let loaded = match load_problem(&cli.domain, &cli.problem) {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    eprintln!("domain  {} sha256={}", cli.domain.display(), loaded.domain_sha256);
    eprintln!("problem {} sha256={}", cli.problem.display(), loaded.problem_sha256);

    let max_nodes = cli.max_nodes.unwrap_or_else(|| {
        let bytes = cli.memory_mb.saturating_mul(1 << 20) as usize;
        bytes / SearchTree::node_footprint(loaded.problem.universe()).max(1)
    });
    let clock = match cli.clock {
        Clock::Cpu => ClockKind::ThreadCpu,
        Clock::None => ClockKind::Disabled,
    };
    let settings = RunSettings {
        runs: cli.runs.unwrap_or(default_runs),
        seed_base: cli.seed,
        heuristic: cli.heuristic,
        limits: Limits {
            cpu_time: (clock != ClockKind::Disabled).then(|| Duration::from_secs_f64(timeout)),
            max_nodes: Some(max_nodes),
            max_expansions: cli.max_expansions,
        },
        clock,
        trace_dir: cli.trace_dir.clone(),
    };

    let mut cells = Vec::new();
    for &algorithm in &algs {
        let w = if algorithm == Algorithm::Gfra {
            cli.gfra_weight
        } else {
            cli.weight
        };
        for &c in &cli.delay_coef {
            for &g_r in &goal_rates {
                cells.push(CellSpec { algorithm, w, c, g_r });
            }
        }
    }

    let records = match run_sweep(&loaded, &cells, &settings) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if cli.summary {
        eprint!("{}", render_table(&aggregate(&records)));
    }
    let written = match &cli.out {
        Some(path) => fs::File::create(path)
            .map_err(|e| e.to_string())
            .and_then(|f| write_csv(io::BufWriter::new(f), &records).map_err(|e| e.to_string())),
        None => write_csv(io::stdout().lock(), &records).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        eprintln!("error: writing CSV: {e}");
        return ExitCode::from(HarnessError::Io {
            path: cli.out.clone().unwrap_or_default(),
            source: io::Error::other(e),
        }
        .exit_code() as u8);
    }
    let _ = io::stderr().flush();
    ExitCode::SUCCESS
}
