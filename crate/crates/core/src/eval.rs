//! Success rate, optimality and efficiency metrics, failure-mode
//! classification, and the audit of doomed prefixes that a planner expanded.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::index;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cost::{Budget, BudgetRegime, Cost};
use crate::scorer::CostMaps;
use crate::search::{Direction, RunOutcome, RunStatus, TraceRecord};
use crate::util::rng_for;

pub const DEFAULT_AUDIT_SAMPLES: usize = 1000;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("generated plan cost {c_gen} is below the optimum {c_opt}")]
    OracleViolation { c_opt: Cost, c_gen: Cost },
    #[error("expansions used {used} outside [0, {limit}]")]
    ExpansionCount { used: usize, limit: usize },
    #[error("cannot classify a solved run as a failure")]
    SolvedRun,
    #[error("no cost map for task {0}")]
    MissingHMap(String),
    #[error("no cost estimate for state {key} in task {task}")]
    MissingEstimate { task: String, key: String },
}

/// `c_opt / c_gen`, or `None` for empty-plan tasks (`c_opt = 0`).
pub fn optimality(c_opt: Cost, c_gen: Cost) -> Result<Option<f64>, EvalError> {
    if c_gen < c_opt {
        return Err(EvalError::OracleViolation { c_opt, c_gen });
    }
    if c_opt == 0 {
        return Ok(None);
    }
    Ok(Some(c_opt as f64 / c_gen as f64))
}

/// Unused fraction of the expansion limit.
pub fn efficiency(used: usize, limit: usize) -> Result<f64, EvalError> {
    if limit == 0 || used > limit {
        return Err(EvalError::ExpansionCount { used, limit });
    }
    Ok(1.0 - used as f64 / limit as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureMode {
    BudgetViolation,
    SearchExhaustion,
}

/// Budget violation if the trace holds a goal-reaching plan over the budget,
/// search exhaustion otherwise.
pub fn classify_failure(outcome: &RunOutcome) -> Result<FailureMode, EvalError> {
    if outcome.solved() {
        return Err(EvalError::SolvedRun);
    }
    Ok(if outcome.over_budget_plans().next().is_some() {
        FailureMode::BudgetViolation
    } else {
        FailureMode::SearchExhaustion
    })
}

/// The fields of one run that the report needs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub difficulty: usize,
    pub c_opt: Cost,
    pub status: RunStatus,
    pub cost: Option<Cost>,
    pub expansions_used: usize,
    pub expansion_limit: usize,
    /// Set when the run aborted with an error; counted as unsolved.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BucketMetrics {
    pub runs: usize,
    pub solved: usize,
    pub success_rate: Option<f64>,
    pub optimality: Option<f64>,
    pub efficiency: Option<f64>,
    pub budget_violations: usize,
    pub search_exhaustions: usize,
    pub errors: usize,
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

impl BucketMetrics {
    fn from_runs(runs: &[&RunSummary]) -> Result<Self, EvalError> {
        let mut m = BucketMetrics {
            runs: runs.len(),
            ..Default::default()
        };
        let mut opt = Vec::new();
        let mut eff = Vec::new();
        for r in runs {
            if r.error.is_some() {
                m.errors += 1;
                continue;
            }
            match r.status {
                RunStatus::Solved => {
                    m.solved += 1;
                    let cost = r.cost.unwrap_or(0);
                    if let Some(o) = optimality(r.c_opt, cost)? {
                        opt.push(o);
                    }
                    eff.push(efficiency(r.expansions_used, r.expansion_limit)?);
                }
                RunStatus::BudgetViolation => m.budget_violations += 1,
                RunStatus::SearchExhaustion => m.search_exhaustions += 1,
            }
        }
        m.success_rate = (m.runs > 0).then(|| m.solved as f64 / m.runs as f64);
        m.optimality = mean(&opt);
        m.efficiency = mean(&eff);
        Ok(m)
    }
}

/// Metrics per difficulty bucket plus an average row.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub buckets: BTreeMap<usize, BucketMetrics>,
    /// Pooled counts over all runs.
    pub total: BucketMetrics,
}

impl MetricReport {
    /// Unweighted mean of a per-bucket metric over the buckets where it exists.
    pub fn average(&self, metric: fn(&BucketMetrics) -> Option<f64>) -> Option<f64> {
        mean(&self.buckets.values().filter_map(metric).collect::<Vec<_>>())
    }
}

pub fn aggregate_report(runs: &[RunSummary]) -> Result<MetricReport, EvalError> {
    let mut by_l: BTreeMap<usize, Vec<&RunSummary>> = BTreeMap::new();
    for r in runs {
        by_l.entry(r.difficulty).or_default().push(r);
    }
    let buckets = by_l
        .iter()
        .map(|(l, rs)| Ok((*l, BucketMetrics::from_runs(rs)?)))
        .collect::<Result<_, EvalError>>()?;
    let all: Vec<&RunSummary> = runs.iter().collect();
    Ok(MetricReport {
        buckets,
        total: BucketMetrics::from_runs(&all)?,
    })
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "--".to_string(), |x| format!("{x:.2}"))
}

fn csv_cell(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:.6}"))
}

type Row = (&'static str, fn(&BucketMetrics) -> Option<f64>);
type CountRow = (&'static str, fn(&BucketMetrics) -> usize);

const ROWS: [Row; 3] = [
    ("success", |b| b.success_rate),
    ("optimality", |b| b.optimality),
    ("efficiency", |b| b.efficiency),
];

/// Aligned text table: one column per difficulty, then the average.
pub fn render_table(title: &str, report: &MetricReport) -> String {
    let mut header = vec!["".to_string()];
    header.extend(report.buckets.keys().map(|l| format!("L={l}")));
    header.push("avg".into());
    let mut lines = vec![header];
    for (name, f) in ROWS {
        let mut row = vec![name.to_string()];
        row.extend(report.buckets.values().map(|b| cell(f(b))));
        row.push(cell(report.average(f)));
        lines.push(row);
    }
    let counts: [CountRow; 3] = [
        ("runs", |b| b.runs),
        ("budget-violation", |b| b.budget_violations),
        ("exhaustion", |b| b.search_exhaustions),
    ];
    for (name, f) in counts {
        let mut row = vec![name.to_string()];
        row.extend(report.buckets.values().map(|b| f(b).to_string()));
        row.push(f(&report.total).to_string());
        lines.push(row);
    }
    if report.total.errors > 0 {
        let mut row = vec!["errors".to_string()];
        row.extend(report.buckets.values().map(|b| b.errors.to_string()));
        row.push(report.total.errors.to_string());
        lines.push(row);
    }
    let widths: Vec<usize> = (0..lines[0].len())
        .map(|c| lines.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = format!("{title}\n");
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

pub const CSV_HEADER: &str =
    "planner,scorer,regime,L,runs,solved,success_rate,optimality,efficiency,budget_violation,search_exhaustion,errors";

/// CSV rows for one report; `L` is `avg` on the average row. Empty fields mean "no value".
pub fn render_csv_rows(planner: &str, scorer: &str, regime: &str, report: &MetricReport) -> String {
    let mut out = String::new();
    for (l, b) in &report.buckets {
        let _ = writeln!(
            out,
            "{planner},{scorer},{regime},{l},{},{},{},{},{},{},{},{}",
            b.runs,
            b.solved,
            csv_cell(b.success_rate),
            csv_cell(b.optimality),
            csv_cell(b.efficiency),
            b.budget_violations,
            b.search_exhaustions,
            b.errors
        );
    }
    let t = &report.total;
    let _ = writeln!(
        out,
        "{planner},{scorer},{regime},avg,{},{},{},{},{},{},{},{}",
        t.runs,
        t.solved,
        csv_cell(report.average(|b| b.success_rate)),
        csv_cell(report.average(|b| b.optimality)),
        csv_cell(report.average(|b| b.efficiency)),
        t.budget_violations,
        t.search_exhaustions,
        t.errors
    );
    out
}

/// Reference cost a prefix must stay within to count as feasible.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AuditBound {
    /// The task's optimal cost.
    #[serde(rename = "C")]
    Optimal,
    /// The run's budget.
    #[serde(rename = "B")]
    Budget,
}

impl std::str::FromStr for AuditBound {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "C" | "c" => Ok(AuditBound::Optimal),
            "B" | "b" => Ok(AuditBound::Budget),
            _ => Err(format!("unknown audit bound `{s}` (expected C|B)")),
        }
    }
}

/// The bound for one run. Tight budgets equal `c_opt`, so both choices agree there.
pub fn audit_bound(kind: AuditBound, regime: BudgetRegime, c_opt: Cost, budget: Budget) -> Budget {
    match (kind, regime) {
        (AuditBound::Optimal, _) | (_, BudgetRegime::Tight) => Budget::Finite(c_opt),
        (AuditBound::Budget, _) => budget,
    }
}

/// One failed run offered to the audit.
pub struct AuditRun<'a> {
    pub task_id: &'a str,
    pub outcome: &'a RunOutcome,
    pub maps: Option<&'a CostMaps>,
    pub bound: Budget,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    FeasiblePrefix,
    InfeasiblePrefix,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditSample {
    pub task_id: String,
    pub index: usize,
    pub direction: Direction,
    pub g: Cost,
    pub h: Cost,
    pub bound: Budget,
    pub verdict: Verdict,
    pub pruned: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    /// Expanded, unpruned records across all failed runs.
    pub population: usize,
    pub samples: Vec<AuditSample>,
    pub infeasible: usize,
    pub rate: Option<f64>,
}

fn auditable(r: &TraceRecord) -> bool {
    r.expanded.is_some() && !r.pruned
}

/// Samples up to `n` expanded, unpruned records of failed runs and reports the
/// fraction whose `g + h` exceeds the bound (a doomed prefix that was expanded
/// anyway). Forward records use the remaining cost to the goal as `h`, backward
/// records the cost from the initial state.
pub fn audit_infeasibility(runs: &[AuditRun<'_>], n: usize, seed: u64) -> Result<AuditReport, EvalError> {
    let mut population: Vec<(usize, &TraceRecord)> = Vec::new();
    for (i, run) in runs.iter().enumerate() {
        if run.outcome.solved() {
            continue;
        }
        population.extend(run.outcome.trace.iter().filter(|r| auditable(r)).map(|r| (i, r)));
    }
    let mut picks: Vec<usize> = if population.len() <= n {
        (0..population.len()).collect()
    } else {
        index::sample(&mut rng_for(&[seed, 0xa0d1]), population.len(), n).into_vec()
    };
    picks.sort_unstable();

    let mut samples = Vec::with_capacity(picks.len());
    for p in picks {
        let (i, r) = population[p];
        let run = &runs[i];
        let maps = run.maps.ok_or_else(|| EvalError::MissingHMap(run.task_id.to_string()))?;
        let map = match r.direction {
            Direction::Forward => &maps.to_goal,
            Direction::Backward => &maps.from_initial,
        };
        let h = map.get_key(r.key).ok_or_else(|| EvalError::MissingEstimate {
            task: run.task_id.to_string(),
            key: r.key.to_string(),
        })?;
        let verdict = if run.bound.allows(r.g + h) {
            Verdict::FeasiblePrefix
        } else {
            Verdict::InfeasiblePrefix
        };
        samples.push(AuditSample {
            task_id: run.task_id.to_string(),
            index: r.index,
            direction: r.direction,
            g: r.g,
            h,
            bound: run.bound,
            verdict,
            pruned: r.pruned,
        });
    }
    let infeasible = samples.iter().filter(|s| s.verdict == Verdict::InfeasiblePrefix).count();
    Ok(AuditReport {
        population: population.len(),
        rate: (!samples.is_empty()).then(|| infeasible as f64 / samples.len() as f64),
        samples,
        infeasible,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::cost::CostSchedule;
    use crate::domain::{self, Action, BlockId, Goal, Support, WorldState};
    use crate::oracle::Oracle;
    use crate::search::{RecordKind, TraceRecord};

    #[test]
    fn metric_examples() {
        assert_eq!(optimality(2, 2), Ok(Some(1.0)));
        assert_eq!(optimality(24, 30), Ok(Some(0.8)));
        assert!((optimality(4, 23).unwrap().unwrap() - 4.0 / 23.0).abs() < 1e-15);
        assert_eq!(optimality(0, 0), Ok(None));
        assert_eq!(optimality(5, 4), Err(EvalError::OracleViolation { c_opt: 5, c_gen: 4 }));
        assert!((efficiency(45, 500).unwrap() - 0.91).abs() < 1e-12);
        assert_eq!(efficiency(500, 500), Ok(0.0));
        assert_eq!(efficiency(0, 500), Ok(1.0));
        assert!(efficiency(501, 500).is_err());
    }

    fn record(index: usize, g: Cost, complete: bool) -> TraceRecord {
        TraceRecord {
            index,
            parent: None,
            kind: RecordKind::Child,
            direction: Direction::Forward,
            depth: 0,
            key: WorldState::all_on_table(3).unwrap().key(),
            action: None,
            g,
            reward: 0.0,
            visits: 0,
            value: 0.0,
            expanded: None,
            pruned: false,
            complete,
        }
    }

    fn outcome(status: RunStatus, trace: Vec<TraceRecord>) -> RunOutcome {
        RunOutcome {
            status,
            plan: None,
            cost: None,
            expansions_used: 0,
            expansion_limit: 500,
            budget: Budget::Finite(4),
            trace,
        }
    }

    #[test]
    fn failure_classes() {
        let violated = outcome(RunStatus::BudgetViolation, vec![record(0, 0, false), record(1, 23, true)]);
        assert_eq!(classify_failure(&violated), Ok(FailureMode::BudgetViolation));
        let exhausted = outcome(RunStatus::SearchExhaustion, vec![record(0, 0, false)]);
        assert_eq!(classify_failure(&exhausted), Ok(FailureMode::SearchExhaustion));
        assert_eq!(classify_failure(&outcome(RunStatus::Solved, vec![])), Err(EvalError::SolvedRun));
    }

    fn summary(l: usize, status: RunStatus, cost: Option<Cost>) -> RunSummary {
        RunSummary {
            difficulty: l,
            c_opt: 4,
            status,
            cost,
            expansions_used: 50,
            expansion_limit: 500,
            error: None,
        }
    }

    #[test]
    fn report_buckets() {
        let mut runs: Vec<_> = (0..7).map(|_| summary(2, RunStatus::Solved, Some(4))).collect();
        runs.extend((0..3).map(|_| summary(2, RunStatus::SearchExhaustion, None)));
        runs.push(summary(4, RunStatus::BudgetViolation, None));
        let r = aggregate_report(&runs).unwrap();
        let b2 = &r.buckets[&2];
        assert_eq!(b2.success_rate, Some(0.7));
        assert_eq!(b2.optimality, Some(1.0));
        assert!((b2.efficiency.unwrap() - 0.9).abs() < 1e-12);
        let b4 = &r.buckets[&4];
        assert_eq!(b4.success_rate, Some(0.0));
        assert_eq!(b4.optimality, None);
        assert_eq!(r.average(|b| b.success_rate), Some(0.35));
        let table = render_table("t", &r);
        assert!(table.contains("--"));
        let csv = render_csv_rows("bfs", "oracle", "tight", &r);
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.lines().nth(1).unwrap().starts_with("bfs,oracle,tight,4,1,0,0.000000,,,1,0,0"));
    }

    #[test]
    fn audit_flags_doomed_put_down_prefix() {
        let (a, b, c) = (BlockId(0), BlockId(1), BlockId(2));
        let initial = WorldState::from_stacks(3, &[vec![b, a], vec![c]], None).unwrap();
        let goal = Goal::new([(b, Support::Block(a))]).unwrap();
        let schedule = CostSchedule::new(1, 1, 20, 1).unwrap();
        let oracle = Oracle::new(3).unwrap();
        let maps = Arc::new(CostMaps::build(&oracle, &initial, &goal, &schedule).unwrap());
        let doomed = domain::replay(&initial, &[Action::Unstack(a, b), Action::PutDown(a)]).unwrap();
        let on_path = domain::replay(&initial, &[Action::Unstack(a, b), Action::Stack(a, c)]).unwrap();
        let mut r1 = record(0, 21, false);
        r1.key = doomed.key();
        r1.expanded = Some(0);
        let mut r2 = record(1, 2, false);
        r2.key = on_path.key();
        r2.expanded = Some(1);
        let mut r3 = record(2, 40, false);
        r3.pruned = true;
        r3.expanded = Some(2);
        let out = outcome(RunStatus::SearchExhaustion, vec![r1, r2, r3]);
        let runs = [AuditRun {
            task_id: "t2",
            outcome: &out,
            maps: Some(&maps),
            bound: Budget::Finite(4),
        }];
        let report = audit_infeasibility(&runs, DEFAULT_AUDIT_SAMPLES, 0).unwrap();
        assert_eq!(report.population, 2);
        assert_eq!(report.samples[0].h, 2);
        assert_eq!(report.samples[0].verdict, Verdict::InfeasiblePrefix);
        assert_eq!(report.samples[1].verdict, Verdict::FeasiblePrefix);
        assert_eq!(report.rate, Some(0.5));

        let missing = [AuditRun { maps: None, ..runs[0] }];
        assert!(matches!(audit_infeasibility(&missing, 10, 0), Err(EvalError::MissingHMap(_))));
    }

    #[test]
    fn audit_sampling_is_seeded() {
        let trace: Vec<_> = (0..50)
            .map(|i| {
                let mut r = record(i, 0, false);
                r.expanded = Some(i);
                r
            })
            .collect();
        let out = outcome(RunStatus::SearchExhaustion, trace);
        let oracle = Oracle::new(3).unwrap();
        let s = WorldState::all_on_table(3).unwrap();
        let goal = Goal::new([(BlockId(1), Support::Block(BlockId(2)))]).unwrap();
        let maps = CostMaps::build(&oracle, &s, &goal, &CostSchedule::uniform()).unwrap();
        let runs = [AuditRun {
            task_id: "x",
            outcome: &out,
            maps: Some(&maps),
            bound: Budget::Infinite,
        }];
        let a = audit_infeasibility(&runs, 10, 3).unwrap();
        let b = audit_infeasibility(&runs, 10, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.samples.len(), 10);
        assert_eq!(a.rate, Some(0.0));
    }
}
