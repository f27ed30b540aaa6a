//! Acceptance run. Prints one PASS/FAIL line per criterion, then a
//! summary. Set `MGP_ACCEPTANCE_STRICT=1` to exit non-zero when any
//! criterion fails.
//!
//! The experiment criteria run at desk scale: 30 runs per cell, 10 s of
//! thread CPU per run, seeds 1..=30 shared by every algorithm.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use mgp_bench::{aggregate, load_problem, run_sweep, CellSpec, CellSummary, ExperimentRecord, LoadedProblem, RunSettings};
use mgp_core::agent::{trace, Algorithm, Event, RunStatus};
use mgp_core::agent::trace::UpdateKind;
use mgp_core::budget::{ClockKind, Limits};
use mgp_core::dynamics::CostCounter;
use mgp_core::heuristics::HeuristicEvaluator;
use mgp_core::search::{search, SearchContext, SearchTree};
use mgp_core::strips::{apply, Proposition};
use mgp_core::{ActionId, Goal, GroundAction, GroundProblem, HeuristicKind, PropSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const RUNS: u32 = 30;
const BUDGET: Duration = Duration::from_secs(10);
const MEMORY_BYTES: usize = 2 << 30;
const SEED_BASE: u64 = 1;
const GOAL_RATES: [u64; 5] = [1, 5, 10, 30, 100];
const DELAY_COEFS: [f64; 4] = [1.0, 1.2, 1.5, 2.0];
const WEIGHTS: [f64; 3] = [1.0, 1.5, 2.0];

const BW_DOMAIN: &str = "blocksworld/domain.pddl";
const BW_PROBLEM: &str = "blocksworld/bw-08-0.pddl";
const TABLE_PROBLEMS: [(&str, &str); 2] = [
    ("driverlog/domain.pddl", "driverlog/driverlog-3.pddl"),
    ("depot/domain.pddl", "depot/depot-2.pddl"),
];

struct Report {
    lines: Vec<(String, bool)>,
}

impl Report {
    fn record(&mut self, name: &str, pass: bool, detail: String) {
        println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        let _ = std::io::stdout().flush();
        self.lines.push((name.to_string(), pass));
    }
}

fn loaded(domain: &str, problem: &str) -> LoadedProblem {
    let dir = common::benchmarks();
    load_problem(&dir.join(domain), &dir.join(problem)).unwrap()
}

fn settings(problem: &GroundProblem, trace_dir: &Path) -> RunSettings {
    RunSettings {
        runs: RUNS,
        seed_base: SEED_BASE,
        heuristic: HeuristicKind::Ff,
        limits: Limits {
            cpu_time: Some(BUDGET),
            max_nodes: Some(MEMORY_BYTES / SearchTree::node_footprint(problem.universe())),
            max_expansions: None,
        },
        clock: ClockKind::ThreadCpu,
        trace_dir: Some(trace_dir.to_path_buf()),
    }
}

fn cell<'a>(cells: &'a [CellSummary], alg: Algorithm, w: f64, c: f64, g_r: u64) -> &'a CellSummary {
    cells
        .iter()
        .find(|s| s.key.algorithm == alg && s.key.w == w && s.key.c == c && s.key.g_r == g_r)
        .expect("cell was run")
}

fn pct(x: f64) -> String {
    format!("{:.1}%", 100.0 * x)
}

fn ms(x: Option<f64>) -> String {
    x.map_or("-".into(), |v| format!("{v:.1}ms"))
}

fn semantics(report: &mut Report) {
    const N: usize = 40;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let ids = |rng: &mut ChaCha8Rng| -> Vec<u32> {
        let k = rng.gen_range(0..8);
        (0..k).map(|_| rng.gen_range(0..N as u32)).collect()
    };
    let props: Vec<Proposition> = (0..N).map(|i| Proposition::new("p", &[&i.to_string()])).collect();
    let mut bad = 0;
    let cases = 10_000;
    for _ in 0..cases {
        let mut s = ids(&mut rng);
        let (pre1, add1, del1) = (ids(&mut rng), ids(&mut rng), ids(&mut rng));
        let (pre2, add2, del2) = (ids(&mut rng), ids(&mut rng), ids(&mut rng));
        if rng.gen_bool(0.5) {
            s.extend(&pre1);
        }
        let set = |v: &[u32]| v.iter().copied().collect::<common::Set>();
        let state = PropSet::from_ids(N, s.iter().copied());
        let a = GroundAction::new("a", N, pre1.clone(), add1.clone(), del1.clone()).0;
        let b = GroundAction::new("b", N, pre2, add2, del2).0;
        let del_eff: common::Set = set(&del1).difference(&set(&add1)).copied().collect();
        let expected = common::oracle_apply(&set(&s), &set(&pre1), &set(&add1), &del_eff);
        let got = apply(&state, &a).ok().map(|x| common::set_of(&x));
        let problem = GroundProblem::new(
            "d",
            "p",
            props.clone(),
            vec![a.clone(), b.clone()],
            state.clone(),
            Goal::partial(PropSet::empty(N)),
            vec![],
        );
        let seq = problem.apply_sequence(&state, &[ActionId(0), ActionId(1)]).ok();
        let stepwise = apply(&state, &a).ok().and_then(|m| apply(&m, &b).ok());
        if got != expected || seq != stepwise {
            bad += 1;
        }
    }
    let elapsed = start.elapsed();
    report.record(
        "strips-semantics",
        bad == 0 && elapsed < Duration::from_secs(5),
        format!("{cases} cases, {bad} mismatches, {:.2}s (limit 5s)", elapsed.as_secs_f64()),
    );
}

fn optimality(report: &mut Report) {
    let instances = common::small_instances();
    let mut mismatches = Vec::new();
    for p in &instances {
        let (_, opt) = common::bfs(p);
        let plan = common::solve(p, HeuristicKind::Max, 1.0);
        if opt != plan.as_ref().map(Vec::len) {
            mismatches.push(p.problem_name.clone());
        }
    }
    report.record(
        "optimality-oracle",
        instances.len() >= 20 && mismatches.is_empty(),
        format!("{} instances, mismatches: {mismatches:?}", instances.len()),
    );
}

fn update_costs(report: &mut Report, trace_dirs: &[PathBuf]) {
    // direct: a grown tree, one conservative update and one full refresh
    let mut detail = Vec::new();
    let mut ok = true;
    for f in ["bw-05-1", "bw-06-0", "bw-07-2"] {
        let p = common::load(BW_DOMAIN, &format!("blocksworld/{f}.pddl"));
        let mut ev = HeuristicEvaluator::new(HeuristicKind::Ff, &p);
        let mut counter = CostCounter::default();
        let mut budget = mgp_core::budget::Budget::unlimited();
        let mut tree = SearchTree::seeded(&p, p.init.clone(), &p.goal, 1, 1.0, &mut ev, &mut counter);
        let mut ctx = SearchContext {
            problem: &p,
            evaluator: &mut ev,
            counter: &mut counter,
            budget: &mut budget,
        };
        let goal_node = search(&mut ctx, &mut tree, &p.goal, 1).unwrap().goal_node().unwrap();
        let other = tree
            .iter()
            .map(|(_, s, _)| s.clone())
            .find(|s| s != tree.state(goal_node))
            .unwrap();
        let g = Goal::complete(other);
        let n = tree.len() as u64;
        let mut a = tree.clone();
        let before = counter.heuristic_calls();
        a.update_search_tree(&p, &p.init, &g, 2, &mut ev, &mut counter);
        let mgp_calls = counter.heuristic_calls() - before;
        let mut b = tree.clone();
        let before = counter.heuristic_calls();
        b.refresh_all(&p, &g, 2, &mut ev, &mut counter);
        let gfra_calls = counter.heuristic_calls() - before;
        ok &= mgp_calls == 1 && gfra_calls == n;
        detail.push(format!("{f}: N={n} mgp={mgp_calls} gfra={gfra_calls}"));
    }
    // every conservative update logged during the sweeps
    let mut updates = 0;
    let mut wrong = 0;
    for dir in trace_dirs {
        for entry in std::fs::read_dir(dir).unwrap() {
            let text = std::fs::read_to_string(entry.unwrap().path()).unwrap();
            for e in trace::parse_trace(&text).unwrap() {
                if let Event::Update {
                    kind: UpdateKind::Conservative,
                    heuristic_calls,
                } = e
                {
                    updates += 1;
                    if heuristic_calls != 1 {
                        wrong += 1;
                    }
                }
            }
        }
    }
    ok &= wrong == 0;
    report.record(
        "update-cost-accounting",
        ok,
        format!("{}; {updates} logged MGP updates, {wrong} with != 1 call", detail.join(", ")),
    );
}

fn soundness(report: &mut Report, runs: &[(&LoadedProblem, &Path, &[ExperimentRecord])]) {
    let mut successes = 0;
    let mut failures = Vec::new();
    for (problem, dir, records) in runs {
        let mut files: Vec<PathBuf> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
        files.sort();
        let traced_successes = records.iter().filter(|r| r.status == RunStatus::Success).count();
        let mut seen = 0;
        for f in files {
            let text = std::fs::read_to_string(&f).unwrap();
            let events = trace::parse_trace(&text).unwrap();
            if events.last() != Some(&Event::Status(RunStatus::Success)) {
                continue;
            }
            seen += 1;
            match trace::replay(&problem.problem, &events) {
                Ok(r) if r.status == Some(RunStatus::Success) => successes += 1,
                Ok(_) => failures.push(format!("{}: no status", f.display())),
                Err(e) => failures.push(format!("{}: {e}", f.display())),
            }
        }
        if seen != traced_successes {
            failures.push(format!("{}: {seen} success traces for {traced_successes} records", dir.display()));
        }
    }
    report.record(
        "soundness-replay",
        failures.is_empty() && successes > 0,
        format!("{successes} success traces replayed, failures: {failures:?}"),
    );
}

fn fig1(report: &mut Report, cells: &[CellSummary]) {
    let ocpf = |g_r| cell(cells, Algorithm::MgpOcPf, 1.0, 1.2, g_r).success_rate;
    let sa = |g_r| cell(cells, Algorithm::SaStar, 1.0, 1.2, g_r).success_rate;
    let mut rows = Vec::new();
    for &g_r in &GOAL_RATES {
        let rates: Vec<String> = Algorithm::ALL
            .iter()
            .map(|&a| format!("{}={}", a, pct(cell(cells, a, 1.0, 1.2, g_r).success_rate)))
            .collect();
        rows.push(format!("g_r={g_r} [{}]", rates.join(" ")));
    }
    println!("  fig1 success rates: {}", rows.join("; "));
    let a = GOAL_RATES.iter().all(|&g| ocpf(g) >= sa(g)) && ocpf(1) - sa(1) >= 0.20;
    report.record(
        "fig1-a ocpf>=sastar, gap at g_r=1 >= 20pt",
        a,
        format!("g_r=1 ocpf={} sastar={}", pct(ocpf(1)), pct(sa(1))),
    );
    report.record("fig1-b ocpf success at g_r=1 >= 0.80", ocpf(1) >= 0.80, format!("{}", pct(ocpf(1))));
    let mut worst = Vec::new();
    let mut c_ok = true;
    for g_r in [1, 5, 10] {
        let gfra = cell(cells, Algorithm::Gfra, 1.0, 1.2, g_r).success_rate;
        let min_mgp = [Algorithm::Mgp, Algorithm::MgpOc, Algorithm::MgpPf, Algorithm::MgpOcPf]
            .iter()
            .map(|&a| cell(cells, a, 1.0, 1.2, g_r).success_rate)
            .fold(f64::INFINITY, f64::min);
        c_ok &= gfra <= min_mgp;
        worst.push(format!("g_r={g_r} gfra={} min-mgp={}", pct(gfra), pct(min_mgp)));
    }
    report.record("fig1-c gfra<=every mgp variant at g_r<=10", c_ok, worst.join(", "));
}

fn fig2(report: &mut Report, cells: &[CellSummary]) {
    let series: Vec<&CellSummary> = DELAY_COEFS
        .iter()
        .map(|&c| cell(cells, Algorithm::MgpOcPf, 1.0, c, 1))
        .collect();
    let mut ok = true;
    for pair in series.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        match (lo.mean_cpu_ms, hi.mean_cpu_ms, lo.mean_executed_actions, hi.mean_executed_actions) {
            (Some(t0), Some(t1), Some(l0), Some(l1)) => ok &= t1 <= 1.1 * t0 && l1 >= 0.9 * l0,
            _ => ok = false,
        }
    }
    let detail: Vec<String> = series
        .iter()
        .map(|s| {
            format!(
                "c={} cpu={} len={} ok={}",
                s.key.c,
                ms(s.mean_cpu_ms),
                s.mean_executed_actions.map_or("-".into(), |v| format!("{v:.1}")),
                pct(s.success_rate)
            )
        })
        .collect();
    report.record("fig2 cpu non-increasing and length non-decreasing in c (10% band)", ok, detail.join(", "));
}

fn fig3(report: &mut Report, cells: &[CellSummary]) {
    let w1 = cell(cells, Algorithm::MgpOcPf, 1.0, 1.2, 1);
    let w2 = cell(cells, Algorithm::MgpOcPf, 2.0, 1.2, 1);
    let ok = match (w1.mean_cpu_ms, w2.mean_cpu_ms, w1.mean_executed_actions, w2.mean_executed_actions) {
        (Some(t1), Some(t2), Some(l1), Some(l2)) => t2 <= 0.6 * t1 && (l2 - l1).abs() <= 0.25 * l1,
        _ => false,
    };
    let detail: Vec<String> = WEIGHTS
        .iter()
        .map(|&w| {
            let s = cell(cells, Algorithm::MgpOcPf, w, 1.2, 1);
            format!(
                "w={w} cpu={} len={}",
                ms(s.mean_cpu_ms),
                s.mean_executed_actions.map_or("-".into(), |v| format!("{v:.1}"))
            )
        })
        .collect();
    report.record("fig3 cpu(w=2)<=0.6 cpu(w=1), length within 25%", ok, detail.join(", "));
}

fn table2(report: &mut Report, results: &[(String, Vec<CellSummary>)]) {
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, cells) in results {
        let r = |a| cell(cells, a, 1.0, 1.2, 1).success_rate;
        let (ocpf, mgp, sa) = (r(Algorithm::MgpOcPf), r(Algorithm::Mgp), r(Algorithm::SaStar));
        ok &= ocpf >= mgp && mgp >= sa;
        detail.push(format!("{name}: ocpf={} mgp={} sastar={}", pct(ocpf), pct(mgp), pct(sa)));
    }
    report.record("table2 ocpf>=mgp>=sastar", ok, detail.join(", "));
}

fn determinism(report: &mut Report) {
    let dir = common::benchmarks().join("blocksworld");
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_mgp-bench"))
            .arg("--domain")
            .arg(dir.join("domain.pddl"))
            .arg("--problem")
            .arg(dir.join("bw-06-1.pddl"))
            .args(["--goal-rate", "1,5", "--runs", "5", "--seed", "7", "--clock", "none"])
            .output()
            .unwrap()
    };
    let (a, b) = (run(), run());
    let ok = a.status.success() && b.status.success() && a.stdout == b.stdout && !a.stdout.is_empty();
    report.record(
        "determinism",
        ok,
        format!("{} CSV bytes, identical={}", a.stdout.len(), a.stdout == b.stdout),
    );
}

fn main() {
    let started = Instant::now();
    let mut report = Report { lines: Vec::new() };
    let scratch = tempfile::tempdir().unwrap();

    semantics(&mut report);
    optimality(&mut report);
    determinism(&mut report);

    let bw = loaded(BW_DOMAIN, BW_PROBLEM);
    let mut cells = Vec::new();
    for alg in Algorithm::ALL {
        for g_r in GOAL_RATES {
            cells.push(CellSpec {
                algorithm: alg,
                w: 1.0,
                c: 1.2,
                g_r,
            });
        }
    }
    for c in DELAY_COEFS.into_iter().filter(|&c| c != 1.2) {
        cells.push(CellSpec {
            algorithm: Algorithm::MgpOcPf,
            w: 1.0,
            c,
            g_r: 1,
        });
    }
    for w in WEIGHTS.into_iter().filter(|&w| w != 1.0) {
        cells.push(CellSpec {
            algorithm: Algorithm::MgpOcPf,
            w,
            c: 1.2,
            g_r: 1,
        });
    }
    let bw_dir = scratch.path().join(&bw.problem.problem_name);
    let t = Instant::now();
    let bw_records = run_sweep(&bw, &cells, &settings(&bw.problem, &bw_dir)).unwrap();
    println!(
        "  {}: {} runs in {:.0}s",
        bw.problem.problem_name,
        bw_records.len(),
        t.elapsed().as_secs_f64()
    );
    let bw_cells = aggregate(&bw_records);
    fig1(&mut report, &bw_cells);
    fig2(&mut report, &bw_cells);
    fig3(&mut report, &bw_cells);

    let mut table = Vec::new();
    let mut table_runs = Vec::new();
    for (d, p) in TABLE_PROBLEMS {
        let lp = loaded(d, p);
        let cells: Vec<CellSpec> = [Algorithm::SaStar, Algorithm::Mgp, Algorithm::MgpOcPf]
            .into_iter()
            .map(|algorithm| CellSpec {
                algorithm,
                w: 1.0,
                c: 1.2,
                g_r: 1,
            })
            .collect();
        let dir = scratch.path().join(&lp.problem.problem_name);
        let t = Instant::now();
        let records = run_sweep(&lp, &cells, &settings(&lp.problem, &dir)).unwrap();
        println!(
            "  {}: {} runs in {:.0}s",
            lp.problem.problem_name,
            records.len(),
            t.elapsed().as_secs_f64()
        );
        table.push((lp.problem.problem_name.clone(), aggregate(&records)));
        table_runs.push((lp, dir, records));
    }
    table2(&mut report, &table);

    let mut all: Vec<(&LoadedProblem, &Path, &[ExperimentRecord])> = vec![(&bw, &bw_dir, &bw_records)];
    for (lp, dir, records) in &table_runs {
        all.push((lp, dir, records));
    }
    soundness(&mut report, &all);
    let dirs: Vec<PathBuf> = all.iter().map(|(_, d, _)| d.to_path_buf()).collect();
    update_costs(&mut report, &dirs);

    let passed = report.lines.iter().filter(|(_, p)| *p).count();
    println!(
        "acceptance: {passed}/{} criteria pass ({:.0}s)",
        report.lines.len(),
        started.elapsed().as_secs_f64()
    );
    let strict = std::env::var("MGP_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if strict && passed != report.lines.len() {
        std::process::exit(1);
    }
}
