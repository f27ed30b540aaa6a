//! Running experiment cells: one cell is (algorithm, w, c, g_r) on a
//! problem, repeated `runs` times with seeds `seed_base..seed_base+runs`.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use mgp_core::agent::{self, trace, AgentConfig, Algorithm, AgentError, RunStatus};
use mgp_core::budget::{ClockKind, Limits};
use mgp_core::dynamics::GoalDynamicsConfig;
use mgp_core::pddl::{self, PddlError};
use mgp_core::{GroundProblem, HeuristicKind};
use rayon::prelude::*;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::record::ExperimentRecord;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Pddl { path: PathBuf, source: PddlError },
    #[error("{alg} run {run_id}: {source}")]
    Agent {
        alg: Algorithm,
        run_id: u32,
        source: AgentError,
    },
    #[error("trace {path}: {source}")]
    Replay { path: PathBuf, source: trace::TraceError },
}

impl HarnessError {
    /// Process exit code for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Pddl { .. } => 2,
            HarnessError::Io { .. } => 2,
            HarnessError::Agent { .. } | HarnessError::Replay { .. } => 3,
        }
    }
}

/// A grounded problem plus the provenance of its input files.
#[derive(Clone, Debug)]
pub struct LoadedProblem {
    pub problem: GroundProblem,
    pub domain_sha256: String,
    pub problem_sha256: String,
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn read(path: &Path) -> Result<String, HarnessError> {
    fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_problem(domain: &Path, problem: &Path) -> Result<LoadedProblem, HarnessError> {
    let dtext = read(domain)?;
    let ptext = read(problem)?;
    let d = pddl::parse_domain(&dtext).map_err(|source| HarnessError::Pddl {
        path: domain.to_path_buf(),
        source,
    })?;
    let p = pddl::parse_problem(&ptext, &d).map_err(|source| HarnessError::Pddl {
        path: problem.to_path_buf(),
        source,
    })?;
    let ground = pddl::ground(&d, &p, &pddl::GroundOptions::default()).map_err(|source| HarnessError::Pddl {
        path: problem.to_path_buf(),
        source,
    })?;
    Ok(LoadedProblem {
        problem: ground,
        domain_sha256: sha256_hex(dtext.as_bytes()),
        problem_sha256: sha256_hex(ptext.as_bytes()),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellSpec {
    pub algorithm: Algorithm,
    pub w: f64,
    pub c: f64,
    pub g_r: u64,
}

#[derive(Clone, Debug)]
pub struct RunSettings {
    pub runs: u32,
    pub seed_base: u64,
    pub heuristic: HeuristicKind,
    pub limits: Limits,
    pub clock: ClockKind,
    /// Write one trace per run here and replay-check successes.
    pub trace_dir: Option<PathBuf>,
}

impl RunSettings {
    pub fn seed(&self, run_id: u32) -> u64 {
        self.seed_base.wrapping_add(run_id as u64)
    }
}

fn trace_path(dir: &Path, problem: &GroundProblem, cell: &CellSpec, run_id: u32) -> PathBuf {
    dir.join(format!(
        "{}-{}-w{}-c{}-gr{}-run{:03}.trace",
        problem.problem_name,
        cell.algorithm.tag(),
        cell.w,
        cell.c,
        cell.g_r,
        run_id
    ))
}

fn write_trace_file(
    path: &Path,
    loaded: &LoadedProblem,
    cell: &CellSpec,
    seed: u64,
    events: &[agent::Event],
) -> io::Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    writeln!(out, "# domain {} sha256={}", loaded.problem.domain_name, loaded.domain_sha256)?;
    writeln!(out, "# problem {} sha256={}", loaded.problem.problem_name, loaded.problem_sha256)?;
    writeln!(
        out,
        "# alg={} w={} c={} g_r={} seed={}",
        cell.algorithm, cell.w, cell.c, cell.g_r, seed
    )?;
    trace::write_trace(&mut out, events)?;
    out.flush()
}

/// Executes a single run and turns it into a record.
pub fn run_one(
    loaded: &LoadedProblem,
    cell: &CellSpec,
    settings: &RunSettings,
    run_id: u32,
) -> Result<ExperimentRecord, HarnessError> {
    let problem = &loaded.problem;
    let seed = settings.seed(run_id);
    let cfg = AgentConfig {
        weight: cell.w,
        delay_coef: cell.c,
        heuristic: settings.heuristic,
        limits: settings.limits,
        clock: settings.clock,
        record_trace: settings.trace_dir.is_some(),
        ..AgentConfig::default()
    };
    let out = agent::run(cell.algorithm, problem, &cfg, GoalDynamicsConfig::new(cell.g_r, seed)).map_err(
        |source| HarnessError::Agent {
            alg: cell.algorithm,
            run_id,
            source,
        },
    )?;
    if let (Some(dir), Some(events)) = (&settings.trace_dir, &out.trace) {
        let path = trace_path(dir, problem, cell, run_id);
        write_trace_file(&path, loaded, cell, seed, events).map_err(|source| HarnessError::Io {
            path: path.clone(),
            source,
        })?;
        if out.status == RunStatus::Success {
            trace::replay(problem, events).map_err(|source| HarnessError::Replay { path, source })?;
        }
    }
    Ok(ExperimentRecord {
        domain: problem.domain_name.clone(),
        problem: problem.problem_name.clone(),
        algorithm: cell.algorithm,
        w: cell.w,
        c: cell.c,
        g_r: cell.g_r,
        run_id,
        seed,
        status: out.status,
        cpu_time_ms: out.cpu_time.as_secs_f64() * 1e3,
        executed_actions: out.executed_actions,
        search_episodes: out.search_episodes,
        expansions: out.expansions,
        heuristic_calls: out.heuristic_calls,
        goal_changes: out.goal_changes,
    })
}

/// Runs every cell `settings.runs` times, in parallel. Records come back
/// ordered by cell (in the order given) and then by run id.
pub fn run_sweep(
    loaded: &LoadedProblem,
    cells: &[CellSpec],
    settings: &RunSettings,
) -> Result<Vec<ExperimentRecord>, HarnessError> {
    if let Some(dir) = &settings.trace_dir {
        fs::create_dir_all(dir).map_err(|source| HarnessError::Io {
            path: dir.clone(),
            source,
        })?;
    }
    let jobs: Vec<(usize, u32)> = (0..cells.len())
        .flat_map(|c| (0..settings.runs).map(move |r| (c, r)))
        .collect();
    let mut results: Vec<((usize, u32), ExperimentRecord)> = jobs
        .into_par_iter()
        .map(|(c, r)| run_one(loaded, &cells[c], settings, r).map(|rec| ((c, r), rec)))
        .collect::<Result<_, _>>()?;
    results.sort_by_key(|(k, _)| *k);
    Ok(results.into_iter().map(|(_, rec)| rec).collect())
}

pub fn run_cell(
    loaded: &LoadedProblem,
    cell: CellSpec,
    settings: &RunSettings,
) -> Result<Vec<ExperimentRecord>, HarnessError> {
    run_sweep(loaded, &[cell], settings)
}
