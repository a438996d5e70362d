use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use costplan::bench::{
    audit_dir, generate_tasks, load_runs, load_tasks, render_reports, render_shift_table, run_experiment,
    save_tasks, select_schedules, ExperimentConfig, GoalSampling,
};
use costplan::cost::{BudgetRegime, CostSchedule};
use costplan::eval::{AuditBound, DEFAULT_AUDIT_SAMPLES};
use costplan::oracle::{Oracle, ShiftCriterion};
use costplan::scorer::{ScorerConfig, ScorerKind, SCORER_ENDPOINT_ENV};
use costplan::search::{PlannerKind, SearchConfig};

#[derive(Parser)]
#[command(name = "costplan", version, about = "Cost-aware tree-search planning on budgeted BlocksWorld")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a task suite with ground truth.
    Gen {
        #[arg(long)]
        blocks: usize,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Costs as pick-up,unstack,put-down,stack.
        #[arg(long, default_value = "1,1,20,1")]
        schedule: CostSchedule,
        /// Goals fix every block instead of a subset of `on` relations.
        #[arg(long)]
        full_goals: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Shift-rate table of cost schedules over a suite.
    Shift {
        #[arg(long)]
        suite: PathBuf,
        /// `study` for the ten built-in schedules, or schedules separated by `;`.
        #[arg(long, default_value = "study")]
        schedules: String,
        /// Number of top schedules to list after the table.
        #[arg(long, default_value_t = 3)]
        top: usize,
        /// Count a shift whenever the ground plans differ, not just their action types.
        #[arg(long)]
        exact: bool,
    },
    /// Run planners over a suite and write runs, traces, reports and a manifest.
    Run {
        #[arg(long)]
        suite: PathBuf,
        #[arg(long, value_enum, default_value = "bi")]
        planner: PlannerArg,
        #[arg(long, value_enum, default_value = "heuristic")]
        scorer: ScorerArg,
        #[arg(long, value_enum, default_value = "tight")]
        regime: RegimeArg,
        /// Expansion limit per run.
        #[arg(long, default_value_t = 500)]
        limit: usize,
        /// Proposals per expansion.
        #[arg(long, default_value_t = 5)]
        branch: usize,
        /// Maximum plan length.
        #[arg(long, default_value_t = 24)]
        depth: usize,
        /// Drop children whose cost exceeds the budget.
        #[arg(long)]
        prune: bool,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, default_value_t = 24)]
        rollout_depth: usize,
        /// Bidirectional search expands every candidate.
        #[arg(long)]
        expand_all: bool,
        /// MCTS backs up the squashed child reward instead of a rollout.
        #[arg(long)]
        reward_only: bool,
        #[arg(long, default_value_t = 32)]
        root_cap: usize,
        /// Noise standard deviation for the noisy scorer.
        #[arg(long, default_value_t = 1.0)]
        noise: f64,
        #[arg(long, default_value_t = 1.0)]
        temperature: f64,
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
        /// Remote scorer endpoint; falls back to the COSTPLAN_SCORER_URL variable.
        #[arg(long)]
        endpoint: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render the reports of a finished run directory.
    Report {
        #[arg(long)]
        runs: PathBuf,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Fraction of expanded prefixes in failed runs that were already doomed.
    Audit {
        #[arg(long)]
        runs: PathBuf,
        #[arg(long, default_value_t = DEFAULT_AUDIT_SAMPLES)]
        samples: usize,
        /// `C` audits against the optimal cost, `B` against the budget.
        #[arg(long, default_value = "B")]
        bound: AuditBound,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write one verdict per sampled node to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dump the remaining-cost map of one task as tab-separated text.
    Hmap {
        #[arg(long)]
        suite: PathBuf,
        #[arg(long)]
        task: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PlannerArg {
    Bfs,
    Dfs,
    Mcts,
    Bi,
    All,
}

impl PlannerArg {
    fn kinds(self) -> Vec<PlannerKind> {
        match self {
            PlannerArg::Bfs => vec![PlannerKind::Bfs],
            PlannerArg::Dfs => vec![PlannerKind::Dfs],
            PlannerArg::Mcts => vec![PlannerKind::Mcts],
            PlannerArg::Bi => vec![PlannerKind::Bi],
            PlannerArg::All => PlannerKind::ALL.to_vec(),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ScorerArg {
    Heuristic,
    Noisy,
    Random,
    Oracle,
    Remote,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegimeArg {
    Tight,
    Loose,
    Unlimited,
    All,
}

impl RegimeArg {
    fn regimes(self) -> Vec<BudgetRegime> {
        match self {
            RegimeArg::Tight => vec![BudgetRegime::Tight],
            RegimeArg::Loose => vec![BudgetRegime::Loose],
            RegimeArg::Unlimited => vec![BudgetRegime::Unlimited],
            RegimeArg::All => BudgetRegime::ALL.to_vec(),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Csv,
}

fn parse_schedules(text: &str) -> Result<Vec<CostSchedule>> {
    if text == "study" {
        return Ok(CostSchedule::shift_study());
    }
    text.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse().with_context(|| format!("bad schedule `{s}`")))
        .collect()
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let mut stdout = io::stdout().lock();
    match cli.command {
        Command::Gen {
            blocks,
            count,
            seed,
            schedule,
            full_goals,
            out,
        } => {
            let tasks = generate_tasks(blocks, count, seed, schedule, GoalSampling { full_goals })?;
            save_tasks(&out, &tasks)?;
            writeln!(stdout, "wrote {} tasks to {}", tasks.len(), out.display())?;
        }
        Command::Shift {
            suite,
            schedules,
            top,
            exact,
        } => {
            let tasks = load_tasks(&suite)?;
            let Some(n) = tasks.first().map(|t| t.n_blocks) else { bail!("suite {} is empty", suite.display()) };
            if tasks.iter().any(|t| t.n_blocks != n) {
                bail!("shift study needs a suite with one block count");
            }
            let candidates = parse_schedules(&schedules)?;
            let criterion = if exact { ShiftCriterion::Exact } else { ShiftCriterion::ActionTypes };
            let oracle = Oracle::new(n)?;
            let all = select_schedules(&tasks, &candidates, candidates.len(), &oracle, criterion)?;
            let mut rows = all.clone();
            rows.sort_by_key(|(s, _)| candidates.iter().position(|c| c == s));
            write!(stdout, "{}", render_shift_table(&rows))?;
            writeln!(stdout)?;
            for (i, (s, r)) in all.iter().take(top).enumerate() {
                writeln!(stdout, "top {}: {s} ({:.1}%)", i + 1, 100.0 * r.overall().unwrap_or(0.0))?;
            }
        }
        Command::Run {
            suite,
            planner,
            scorer,
            regime,
            limit,
            branch,
            depth,
            prune,
            beta,
            rollout_depth,
            expand_all,
            reward_only,
            root_cap,
            noise,
            temperature,
            kappa,
            endpoint,
            seed,
            threads,
            out,
        } => {
            let kind = match scorer {
                ScorerArg::Heuristic => ScorerKind::Heuristic,
                ScorerArg::Noisy => ScorerKind::Noisy { sigma: noise },
                ScorerArg::Random => ScorerKind::Random,
                ScorerArg::Oracle => ScorerKind::Oracle,
                ScorerArg::Remote => {
                    let endpoint = match endpoint {
                        Some(e) => e,
                        None => std::env::var(SCORER_ENDPOINT_ENV)
                            .with_context(|| format!("--scorer remote needs --endpoint or {SCORER_ENDPOINT_ENV}"))?,
                    };
                    ScorerKind::Remote { endpoint }
                }
            };
            let cfg = ExperimentConfig {
                suite,
                out,
                planners: planner.kinds(),
                regimes: regime.regimes(),
                scorer: ScorerConfig {
                    kind,
                    temperature,
                    kappa,
                },
                search: SearchConfig {
                    expansion_limit: limit,
                    max_depth: depth,
                    branching: branch,
                    hard_pruning: prune,
                    uct_beta: beta,
                    rollout_depth,
                    seed,
                    expand_all,
                    reward_only_backup: reward_only,
                    backward_root_cap: root_cap,
                },
                seed,
                threads,
            };
            let summary = run_experiment(&cfg)?;
            write!(stdout, "{}", summary.table)?;
            let errors = summary.records.iter().filter(|r| r.error.is_some()).count();
            if errors > 0 {
                let first = summary.records.iter().find_map(|r| r.error.as_deref()).unwrap_or_default();
                eprintln!("{errors} run(s) failed with an error; first: {first}");
            }
        }
        Command::Report { runs, format } => {
            let records = load_runs(&runs)?;
            let (_, table, csv) = render_reports(&records)?;
            match format {
                Format::Table => write!(stdout, "{table}")?,
                Format::Csv => write!(stdout, "{csv}")?,
            }
        }
        Command::Audit {
            runs,
            samples,
            bound,
            seed,
            out,
        } => {
            let report = audit_dir(&runs, samples, bound, seed)?;
            writeln!(stdout, "population  {}", report.population)?;
            writeln!(stdout, "sampled     {}", report.samples.len())?;
            writeln!(stdout, "infeasible  {}", report.infeasible)?;
            match report.rate {
                Some(r) => writeln!(stdout, "rate        {r:.4}")?,
                None => writeln!(stdout, "rate        --")?,
            }
            if let Some(path) = out {
                let mut text = String::new();
                for s in &report.samples {
                    text.push_str(&serde_json::to_string(s)?);
                    text.push('\n');
                }
                fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
            }
        }
        Command::Hmap { suite, task } => {
            let tasks = load_tasks(&suite)?;
            let t = tasks
                .iter()
                .find(|t| t.id == task)
                .with_context(|| format!("no task `{task}` in {}", suite.display()))?;
            let oracle = Oracle::new(t.n_blocks)?;
            let h = oracle.remaining_cost_map(&t.goal, &t.schedule);
            writeln!(stdout, "key\tstate\th")?;
            for (key, state, cost) in h.rows() {
                let cost = cost.map_or_else(|| "-".to_string(), |c| c.to_string());
                writeln!(stdout, "{key}\t{state}\t{cost}")?;
            }
        }
    }
    Ok(())
}
