use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{io_err, load_tasks, read_jsonl, BenchError, Task};
use crate::cost::{resolve_budget, Budget, BudgetRegime, Cost};
use crate::domain::Action;
use crate::eval::{
    aggregate_report, audit_bound, audit_infeasibility, render_csv_rows, render_table, AuditBound, AuditReport, AuditRun,
    MetricReport, RunSummary, CSV_HEADER,
};
use crate::oracle::Oracle;
use crate::scorer::{CostMaps, ScorerConfig};
use crate::search::{PlannerKind, Problem, RunOutcome, RunStatus, SearchConfig, TraceRecord};
use crate::util::mix;

pub const RUNS_FILE: &str = "runs.jsonl";
pub const TRACES_FILE: &str = "traces.jsonl";
pub const REPORT_TABLE_FILE: &str = "report.txt";
pub const REPORT_CSV_FILE: &str = "report.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

/// A sweep over planners and regimes, all with one scorer and search config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub suite: PathBuf,
    pub out: PathBuf,
    pub planners: Vec<PlannerKind>,
    pub regimes: Vec<BudgetRegime>,
    pub scorer: ScorerConfig,
    pub search: SearchConfig,
    pub seed: u64,
    /// Worker threads; `None` uses the global pool.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.planners.is_empty() || self.regimes.is_empty() {
            return Err(BenchError::Config("need at least one planner and one regime".into()));
        }
        if !self.suite.is_file() {
            return Err(BenchError::Config(format!("suite {} not found", self.suite.display())));
        }
        if self.threads == Some(0) {
            return Err(BenchError::Config("threads must be >= 1".into()));
        }
        self.search.validate()?;
        Ok(())
    }
}

/// One line of `runs.jsonl`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub task: String,
    pub planner: PlannerKind,
    pub scorer: String,
    pub regime: BudgetRegime,
    pub seed: u64,
    pub difficulty: usize,
    pub c_opt: Cost,
    pub budget: Budget,
    /// Absent when the run aborted with an error.
    pub status: Option<RunStatus>,
    pub plan: Option<Vec<Action>>,
    pub cost: Option<Cost>,
    pub expansions_used: usize,
    pub expansion_limit: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl RunRecord {
    pub fn summary(&self) -> RunSummary {
        RunSummary {
            difficulty: self.difficulty,
            c_opt: self.c_opt,
            status: self.status.unwrap_or(RunStatus::SearchExhaustion),
            cost: self.cost,
            expansions_used: self.expansions_used,
            expansion_limit: self.expansion_limit,
            error: self.error.clone(),
        }
    }

    /// Rebuilds the outcome from this record and its trace lines.
    pub fn outcome(&self, trace: Vec<TraceRecord>) -> Option<RunOutcome> {
        Some(RunOutcome {
            status: self.status?,
            plan: self.plan.clone(),
            cost: self.cost,
            expansions_used: self.expansions_used,
            expansion_limit: self.expansion_limit,
            budget: self.budget,
            trace,
        })
    }
}

/// One line of `traces.jsonl`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceLine {
    pub run: usize,
    pub task: String,
    #[serde(flatten)]
    pub record: TraceRecord,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub planner: PlannerKind,
    pub regime: BudgetRegime,
    pub runs: usize,
    pub report: MetricReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub config: ExperimentConfig,
    pub tasks: usize,
    pub n_blocks: Vec<usize>,
    pub files: Vec<String>,
    pub reports: Vec<ReportEntry>,
}

pub struct ExperimentSummary {
    pub manifest: Manifest,
    pub records: Vec<RunRecord>,
    pub table: String,
}

fn run_seed(master: u64, task: usize, planner: PlannerKind, regime: BudgetRegime) -> u64 {
    mix(&[master, task as u64, planner as u64, regime as u64])
}

/// Cost maps per task for scorers that consult them; one oracle per block count.
pub fn build_maps(tasks: &[Task]) -> Result<Vec<Arc<CostMaps>>, BenchError> {
    let mut oracles: BTreeMap<usize, Oracle> = BTreeMap::new();
    for t in tasks {
        if let std::collections::btree_map::Entry::Vacant(e) = oracles.entry(t.n_blocks) {
            e.insert(Oracle::new(t.n_blocks)?);
        }
    }
    tasks
        .par_iter()
        .map(|t| {
            let o = &oracles[&t.n_blocks];
            Ok(Arc::new(CostMaps::build(o, &t.initial, &t.goal, &t.schedule)?))
        })
        .collect()
}

fn run_one(
    task: &Task,
    maps: Option<Arc<CostMaps>>,
    planner: PlannerKind,
    regime: BudgetRegime,
    cfg: &ExperimentConfig,
    seed: u64,
) -> (RunRecord, Vec<TraceRecord>) {
    let budget = resolve_budget(regime, task.c_opt, &task.schedule);
    let problem = Problem {
        initial: task.initial,
        goal: task.goal.clone(),
        schedule: task.schedule,
        budget,
    };
    let search = SearchConfig {
        seed,
        ..cfg.search.clone()
    };
    let mut record = RunRecord {
        run: 0,
        task: task.id.clone(),
        planner,
        scorer: cfg.scorer.kind.name().to_string(),
        regime,
        seed,
        difficulty: task.difficulty,
        c_opt: task.c_opt,
        budget,
        status: None,
        plan: None,
        cost: None,
        expansions_used: 0,
        expansion_limit: search.expansion_limit,
        error: None,
    };
    let result = cfg
        .scorer
        .build(seed, maps)
        .map_err(|e| e.to_string())
        .and_then(|mut scorer| planner.run(&problem, scorer.as_mut(), &search).map_err(|e| e.to_string()));
    match result {
        Ok(out) => {
            record.status = Some(out.status);
            record.plan = out.plan;
            record.cost = out.cost;
            record.expansions_used = out.expansions_used;
            (record, out.trace)
        }
        Err(e) => {
            record.error = Some(e);
            (record, Vec::new())
        }
    }
}

fn write_lines<T: Serialize>(path: &Path, items: impl IntoIterator<Item = T>) -> Result<(), BenchError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    for item in items {
        let line = serde_json::to_string(&item).map_err(|source| BenchError::Json {
            path: path.to_path_buf(),
            line: 0,
            source,
        })?;
        writeln!(w, "{line}").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

fn write_text(path: &Path, text: &str) -> Result<(), BenchError> {
    fs::write(path, text).map_err(io_err(path))
}

/// Runs every planner × regime combination over the suite and writes
/// `runs.jsonl`, `traces.jsonl`, `report.txt`, `report.csv` and
/// `manifest.json` into `cfg.out`. Run order, and hence every output file,
/// is independent of thread scheduling.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentSummary, BenchError> {
    cfg.validate()?;
    let tasks = load_tasks(&cfg.suite)?;
    fs::create_dir_all(&cfg.out).map_err(io_err(&cfg.out))?;
    let maps = if cfg.scorer.kind.needs_cost_maps() {
        Some(build_maps(&tasks)?)
    } else {
        None
    };

    let combos: Vec<(PlannerKind, BudgetRegime)> = cfg
        .planners
        .iter()
        .flat_map(|&p| cfg.regimes.iter().map(move |&r| (p, r)))
        .collect();
    let jobs: Vec<(usize, PlannerKind, BudgetRegime)> = combos
        .iter()
        .flat_map(|&(p, r)| (0..tasks.len()).map(move |i| (i, p, r)))
        .collect();
    let work = || -> Vec<(RunRecord, Vec<TraceRecord>)> {
        jobs.par_iter()
            .map(|&(i, p, r)| {
                let m = maps.as_ref().map(|m| m[i].clone());
                run_one(&tasks[i], m, p, r, cfg, run_seed(cfg.seed, i, p, r))
            })
            .collect()
    };
    let results = match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| BenchError::Config(e.to_string()))?
            .install(work),
        None => work(),
    };

    let mut records = Vec::with_capacity(results.len());
    let mut traces = Vec::new();
    for (k, (mut rec, trace)) in results.into_iter().enumerate() {
        rec.run = k;
        traces.extend(trace.into_iter().map(|record| TraceLine {
            run: k,
            task: rec.task.clone(),
            record,
        }));
        records.push(rec);
    }

    let (reports, table, csv) = render_reports(&records)?;
    write_lines(&cfg.out.join(RUNS_FILE), &records)?;
    write_lines(&cfg.out.join(TRACES_FILE), &traces)?;
    write_text(&cfg.out.join(REPORT_TABLE_FILE), &table)?;
    write_text(&cfg.out.join(REPORT_CSV_FILE), &csv)?;

    let mut n_blocks: Vec<usize> = tasks.iter().map(|t| t.n_blocks).collect();
    n_blocks.sort_unstable();
    n_blocks.dedup();
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        tasks: tasks.len(),
        n_blocks,
        files: [RUNS_FILE, TRACES_FILE, REPORT_TABLE_FILE, REPORT_CSV_FILE]
            .map(String::from)
            .to_vec(),
        reports,
    };
    let path = cfg.out.join(MANIFEST_FILE);
    let mut json = serde_json::to_string_pretty(&manifest).map_err(|source| BenchError::Json {
        path: path.clone(),
        line: 0,
        source,
    })?;
    json.push('\n');
    write_text(&path, &json)?;
    Ok(ExperimentSummary {
        manifest,
        records,
        table,
    })
}

/// Groups runs by (planner, scorer, regime) in first-appearance order and
/// renders one table and one CSV block per group.
pub fn render_reports(records: &[RunRecord]) -> Result<(Vec<ReportEntry>, String, String), BenchError> {
    let mut groups: Vec<((PlannerKind, String, BudgetRegime), Vec<RunSummary>)> = Vec::new();
    for r in records {
        let key = (r.planner, r.scorer.clone(), r.regime);
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(r.summary()),
            None => groups.push((key, vec![r.summary()])),
        }
    }
    let mut entries = Vec::new();
    let mut table = String::new();
    let mut csv = format!("{CSV_HEADER}\n");
    for ((planner, scorer, regime), runs) in groups {
        let report = aggregate_report(&runs)?;
        if !table.is_empty() {
            table.push('\n');
        }
        table.push_str(&render_table(&format!("{planner} / {scorer} / {regime}"), &report));
        csv.push_str(&render_csv_rows(planner.name(), &scorer, regime.name(), &report));
        entries.push(ReportEntry {
            planner,
            regime,
            runs: runs.len(),
            report,
        });
    }
    Ok((entries, table, csv))
}

pub fn load_runs(dir: &Path) -> Result<Vec<RunRecord>, BenchError> {
    read_jsonl(&dir.join(RUNS_FILE))
}

pub fn load_traces(dir: &Path) -> Result<Vec<TraceLine>, BenchError> {
    read_jsonl(&dir.join(TRACES_FILE))
}

pub fn load_manifest(dir: &Path) -> Result<Manifest, BenchError> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    serde_json::from_str(&text).map_err(|source| BenchError::Json { path, line: 0, source })
}

/// Audits the failed runs stored in an experiment directory against the
/// suite recorded in its manifest.
pub fn audit_dir(dir: &Path, samples: usize, bound: AuditBound, seed: u64) -> Result<AuditReport, BenchError> {
    let manifest = load_manifest(dir)?;
    let tasks = load_tasks(&manifest.config.suite)?;
    let runs = load_runs(dir)?;
    let mut traces: BTreeMap<usize, Vec<TraceRecord>> = BTreeMap::new();
    for line in load_traces(dir)? {
        traces.entry(line.run).or_default().push(line.record);
    }
    let failed: Vec<&RunRecord> = runs
        .iter()
        .filter(|r| r.status.is_some_and(|s| s != RunStatus::Solved))
        .collect();
    let by_id: BTreeMap<&str, usize> = tasks.iter().enumerate().map(|(i, t)| (t.id.as_str(), i)).collect();
    let needed: Vec<Task> = {
        let mut ids: Vec<usize> = failed.iter().filter_map(|r| by_id.get(r.task.as_str()).copied()).collect();
        ids.sort_unstable();
        ids.dedup();
        ids.into_iter().map(|i| tasks[i].clone()).collect()
    };
    let maps = build_maps(&needed)?;
    let map_of: BTreeMap<&str, &CostMaps> = needed.iter().zip(&maps).map(|(t, m)| (t.id.as_str(), m.as_ref())).collect();
    let outcomes: Vec<RunOutcome> = failed
        .iter()
        .filter_map(|r| r.outcome(traces.remove(&r.run).unwrap_or_default()))
        .collect();
    let audit_runs: Vec<AuditRun<'_>> = failed
        .iter()
        .zip(&outcomes)
        .map(|(r, outcome)| AuditRun {
            task_id: &r.task,
            outcome,
            maps: map_of.get(r.task.as_str()).copied(),
            bound: audit_bound(bound, r.regime, r.c_opt, r.budget),
        })
        .collect();
    Ok(audit_infeasibility(&audit_runs, samples, seed)?)
}
