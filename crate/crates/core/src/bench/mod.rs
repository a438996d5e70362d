//! Task suites with embedded ground truth, the solution-shift study, and
//! experiment runs over a suite.

mod experiment;

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use experiment::{
    audit_dir, build_maps, load_manifest, load_runs, load_traces, render_reports, run_experiment, ExperimentConfig,
    ExperimentSummary, Manifest, ReportEntry, RunRecord, TraceLine, MANIFEST_FILE, REPORT_CSV_FILE,
    REPORT_TABLE_FILE, RUNS_FILE, TRACES_FILE,
};

use crate::cost::{Cost, CostSchedule};
use crate::domain::{self, hand_empty_states, Action, DomainError, Goal, Support, WorldState};
use crate::eval::EvalError;
use crate::oracle::{is_shifted, GroundTruth, Oracle, OracleError, ShiftCriterion, ShiftRates};
use crate::search::SearchError;
use crate::util::rng_for;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {source}")]
    Json {
        path: PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("task {id}: {reason}")]
    InvalidTask { id: String, reason: String },
    #[error("invalid experiment config: {0}")]
    Config(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

pub(crate) fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> BenchError + '_ {
    move |source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// One planning problem plus its ground truth under its own schedule and under
/// uniform costs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Task {
    pub id: String,
    pub n_blocks: usize,
    pub initial: WorldState,
    pub goal: Goal,
    pub schedule: CostSchedule,
    pub c_opt: Cost,
    pub plan: Vec<Action>,
    /// Difficulty class: the length of the shortest plan.
    pub difficulty: usize,
    pub uniform_plan: Vec<Action>,
}

impl Task {
    pub fn truth(&self) -> GroundTruth {
        GroundTruth {
            cost: self.c_opt,
            plan: self.plan.clone(),
        }
    }

    pub fn uniform_truth(&self) -> GroundTruth {
        GroundTruth {
            cost: self.uniform_plan.len() as Cost,
            plan: self.uniform_plan.clone(),
        }
    }

    /// Annotates `(initial, goal)` with both ground truths.
    pub fn annotate(
        id: String,
        oracle: &Oracle,
        initial: WorldState,
        goal: Goal,
        schedule: CostSchedule,
    ) -> Result<Self, OracleError> {
        let truth = oracle.optimal_plan(&initial, &goal, &schedule)?;
        let uniform = oracle.optimal_plan(&initial, &goal, &CostSchedule::uniform())?;
        Ok(Self {
            id,
            n_blocks: initial.len(),
            initial,
            goal,
            schedule,
            c_opt: truth.cost,
            plan: truth.plan,
            difficulty: uniform.plan.len(),
            uniform_plan: uniform.plan,
        })
    }

    /// Replays both plans and checks their costs and lengths.
    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |reason: String| BenchError::InvalidTask {
            id: self.id.clone(),
            reason,
        };
        if self.initial.len() != self.n_blocks {
            return Err(bad(format!("initial state has {} blocks, expected {}", self.initial.len(), self.n_blocks)));
        }
        if let Some(b) = self.goal.max_block().filter(|b| b.index() >= self.n_blocks) {
            return Err(bad(format!("goal mentions unknown block {b}")));
        }
        for (name, plan) in [("plan", &self.plan), ("uniform plan", &self.uniform_plan)] {
            let end = domain::replay(&self.initial, plan).map_err(|e| bad(format!("{name}: {e}")))?;
            if !self.goal.satisfied_by(&end) {
                return Err(bad(format!("{name} does not reach the goal")));
            }
        }
        if self.schedule.plan_cost(&self.plan) != self.c_opt {
            return Err(bad("plan cost differs from c_opt".into()));
        }
        if self.uniform_plan.len() != self.difficulty {
            return Err(bad("difficulty differs from the uniform plan length".into()));
        }
        if self.plan.len() < self.difficulty {
            return Err(bad("plan is shorter than the shortest plan".into()));
        }
        Ok(())
    }
}

/// Goal sampling options.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoalSampling {
    /// Use the complete configuration of the second state instead of a subset
    /// of its `on` relations.
    pub full_goals: bool,
}

fn sample_goal(rng: &mut impl Rng, target: &WorldState, opts: GoalSampling) -> Option<Goal> {
    if opts.full_goals {
        return Goal::from_state(target).ok();
    }
    let mut on: Vec<_> = target
        .blocks()
        .filter_map(|b| match target.support(b) {
            Some(Support::Block(t)) => Some((b, Support::Block(t))),
            _ => None,
        })
        .collect();
    if on.is_empty() {
        return None;
    }
    let k = rng.random_range(1..=on.len());
    // Partial Fisher-Yates: the first k entries become a uniform k-subset.
    for i in 0..k {
        let j = rng.random_range(i..on.len());
        on.swap(i, j);
    }
    on.truncate(k);
    Goal::new(on).ok()
}

/// Samples `count` tasks: the initial state is a uniform hand-empty state, the
/// goal a uniform-size random subset of the `on` relations of a second uniform
/// hand-empty state. Pairs whose initial state already satisfies the goal are
/// resampled.
pub fn generate_tasks(
    n_blocks: usize,
    count: usize,
    seed: u64,
    schedule: CostSchedule,
    opts: GoalSampling,
) -> Result<Vec<Task>, BenchError> {
    if n_blocks < 2 {
        return Err(BenchError::Config("task generation needs at least 2 blocks".into()));
    }
    let oracle = Oracle::new(n_blocks)?;
    let states = hand_empty_states(n_blocks)?;
    let mut rng = rng_for(&[seed, n_blocks as u64, u64::from(opts.full_goals)]);
    let mut tasks = Vec::with_capacity(count);
    while tasks.len() < count {
        let initial = states[rng.random_range(0..states.len())];
        let target = states[rng.random_range(0..states.len())];
        let Some(goal) = sample_goal(&mut rng, &target, opts) else { continue };
        if goal.satisfied_by(&initial) {
            continue;
        }
        let id = format!("b{n_blocks}-s{seed}-{:05}", tasks.len());
        tasks.push(Task::annotate(id, &oracle, initial, goal, schedule)?);
    }
    Ok(tasks)
}

pub fn save_tasks(path: &Path, tasks: &[Task]) -> Result<(), BenchError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    for t in tasks {
        let line = serde_json::to_string(t).map_err(|source| BenchError::Json {
            path: path.to_path_buf(),
            line: 0,
            source,
        })?;
        writeln!(w, "{line}").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Reads a line-delimited JSON file, skipping blank lines.
pub(crate) fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, BenchError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|source| BenchError::Json {
            path: path.to_path_buf(),
            line: i + 1,
            source,
        })?);
    }
    Ok(out)
}

/// Loads a suite and validates every task.
pub fn load_tasks(path: &Path) -> Result<Vec<Task>, BenchError> {
    let tasks: Vec<Task> = read_jsonl(path)?;
    for t in &tasks {
        t.validate()?;
    }
    Ok(tasks)
}

/// Shift rate of `schedule` over the tasks' `(initial, goal)` pairs, bucketed
/// by difficulty. Each task's own schedule is ignored.
pub fn shift_rates(
    tasks: &[Task],
    schedule: &CostSchedule,
    oracle: &Oracle,
    criterion: ShiftCriterion,
) -> Result<ShiftRates, OracleError> {
    let mut rates = ShiftRates::default();
    for t in tasks {
        let costed = oracle.optimal_plan(&t.initial, &t.goal, schedule)?;
        rates.record(t.difficulty, is_shifted(&t.uniform_truth(), &costed, criterion));
    }
    Ok(rates)
}

/// Candidates ranked by overall shift rate, highest first, ties kept in
/// candidate order; the first `k` are returned with their rates.
pub fn select_schedules(
    tasks: &[Task],
    candidates: &[CostSchedule],
    k: usize,
    oracle: &Oracle,
    criterion: ShiftCriterion,
) -> Result<Vec<(CostSchedule, ShiftRates)>, OracleError> {
    let mut ranked = candidates
        .iter()
        .map(|s| Ok((*s, shift_rates(tasks, s, oracle, criterion)?)))
        .collect::<Result<Vec<_>, OracleError>>()?;
    ranked.sort_by(|a, b| {
        let (ra, rb) = (a.1.overall().unwrap_or(0.0), b.1.overall().unwrap_or(0.0));
        rb.total_cmp(&ra)
    });
    ranked.truncate(k);
    Ok(ranked)
}

/// Aligned table of shift rates, one row per schedule, one column per difficulty.
pub fn render_shift_table(rows: &[(CostSchedule, ShiftRates)]) -> String {
    let mut ls: Vec<usize> = rows.iter().flat_map(|(_, r)| r.buckets.keys().copied()).collect();
    ls.sort_unstable();
    ls.dedup();
    let mut lines = vec![];
    let mut header = vec!["schedule".to_string()];
    header.extend(ls.iter().map(|l| format!("L={l}")));
    header.push("all".into());
    lines.push(header);
    let pct = |v: Option<f64>| v.map_or_else(|| "--".to_string(), |x| format!("{:.0}%", 100.0 * x));
    let mut counts = vec!["tasks".to_string()];
    if let Some((_, first)) = rows.first() {
        counts.extend(ls.iter().map(|l| first.buckets.get(l).map_or(0, |b| b.1).to_string()));
        counts.push(first.buckets.values().map(|b| b.1).sum::<usize>().to_string());
    }
    for (s, r) in rows {
        let mut row = vec![s.to_string()];
        row.extend(ls.iter().map(|&l| pct(r.rate(l))));
        row.push(pct(r.overall()));
        lines.push(row);
    }
    lines.push(counts);
    let widths: Vec<usize> = (0..lines[0].len())
        .map(|c| lines.iter().map(|r| r.get(c).map_or(0, String::len)).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in lines {
        let cells: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, s)| if c == 0 { format!("{s:<w$}", w = widths[c]) } else { format!("{s:>w$}", w = widths[c]) })
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}
