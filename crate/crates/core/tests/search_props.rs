mod common;

use std::collections::BTreeMap;
use std::sync::OnceLock;

use costplan::bench::{generate_tasks, GoalSampling, Task};
use costplan::cost::BudgetRegime;
use costplan::domain;
use costplan::eval::{classify_failure, FailureMode};
use costplan::oracle::Oracle;
use costplan::scorer::ScorerKind;
use costplan::search::{PlannerKind, RecordKind, RunStatus, SearchConfig};
use proptest::prelude::*;

fn oracles() -> &'static BTreeMap<usize, Oracle> {
    static O: OnceLock<BTreeMap<usize, Oracle>> = OnceLock::new();
    O.get_or_init(|| (3..=4).map(|n| (n, Oracle::new(n).unwrap())).collect())
}

fn scorer_kind() -> impl Strategy<Value = ScorerKind> {
    prop_oneof![
        Just(ScorerKind::Heuristic),
        (0.1f64..3.0).prop_map(|sigma| ScorerKind::Noisy { sigma }),
        Just(ScorerKind::Random),
        Just(ScorerKind::Oracle),
    ]
}

fn task(n: usize, seed: u64, sched: usize) -> Task {
    generate_tasks(n, 1, seed, common::study_schedule(sched), GoalSampling::default())
        .unwrap()
        .remove(0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn outcomes_are_sound(
        n in 3usize..=4,
        seed in 0u64..10_000,
        sched in 0usize..10,
        planner in prop::sample::select(PlannerKind::ALL.to_vec()),
        regime in prop::sample::select(BudgetRegime::ALL.to_vec()),
        kind in scorer_kind(),
        prune in any::<bool>(),
        limit in 1usize..200,
    ) {
        let t = task(n, seed, sched);
        let m = common::maps(&oracles()[&n], &t);
        let cfg = SearchConfig { expansion_limit: limit, hard_pruning: prune, seed, ..SearchConfig::default() };
        let out = common::run(planner, &t, regime, kind.clone(), m.clone(), &cfg).unwrap();
        prop_assert!(out.expansions_used <= limit);
        if let (true, Some(plan)) = (out.solved(), &out.plan) {
            let end = domain::replay(&t.initial, plan).unwrap();
            prop_assert!(t.goal.satisfied_by(&end));
            prop_assert!(out.budget.allows(t.schedule.plan_cost(plan)));
            prop_assert_eq!(out.cost, Some(t.schedule.plan_cost(plan)));
            prop_assert!(t.schedule.plan_cost(plan) >= t.c_opt);
        } else {
            let mode = classify_failure(&out).unwrap();
            let expected = match out.status {
                RunStatus::BudgetViolation => FailureMode::BudgetViolation,
                RunStatus::SearchExhaustion => FailureMode::SearchExhaustion,
                RunStatus::Solved => unreachable!(),
            };
            prop_assert_eq!(mode, expected);
        }
        for r in &out.trace {
            if r.pruned && r.kind == RecordKind::Child {
                prop_assert!(!out.budget.allows(r.g));
            }
        }
        let again = common::run(planner, &t, regime, kind, m, &cfg).unwrap();
        prop_assert_eq!(out, again);
    }

    #[test]
    fn mcts_visits_cover_children(seed in 0u64..10_000, sched in 0usize..10) {
        let t = task(4, seed, sched);
        let m = common::maps(&oracles()[&4], &t);
        let cfg = SearchConfig { expansion_limit: 120, seed, ..SearchConfig::default() };
        let out = common::run(PlannerKind::Mcts, &t, BudgetRegime::Tight, ScorerKind::Noisy { sigma: 2.0 }, m, &cfg).unwrap();
        let mut child_visits: BTreeMap<usize, u32> = BTreeMap::new();
        for r in out.trace.iter().filter(|r| r.kind == RecordKind::Child && !r.pruned) {
            *child_visits.entry(r.parent.unwrap()).or_default() += r.visits;
            prop_assert!((0.0..=1.0).contains(&r.value));
        }
        for (p, sum) in child_visits {
            let parent = &out.trace[p];
            // A parent's own simulation adds exactly one visit beyond its children.
            prop_assert!(parent.visits == sum || parent.visits == sum + 1, "{} vs {}", parent.visits, sum);
        }
    }
}

#[test]
fn bidirectional_plans_replay() {
    let oracle = &oracles()[&4];
    let mut solved = 0;
    for seed in 0..100 {
        let t = task(4, seed, seed as usize);
        let cfg = SearchConfig { seed, ..SearchConfig::default() };
        let out = common::run(PlannerKind::Bi, &t, BudgetRegime::Loose, ScorerKind::Noisy { sigma: 1.0 }, common::maps(oracle, &t), &cfg).unwrap();
        if let Some(plan) = &out.plan {
            assert!(t.goal.satisfied_by(&domain::replay(&t.initial, plan).unwrap()));
            solved += 1;
        }
    }
    assert!(solved > 50, "{solved}");
}

#[test]
fn oracle_scorer_is_optimal_under_every_regime() {
    let oracle = &oracles()[&4];
    for seed in 0..30 {
        let t = task(4, seed, seed as usize);
        for planner in PlannerKind::ALL {
            for regime in BudgetRegime::ALL {
                let out = common::run(planner, &t, regime, ScorerKind::Oracle, common::maps(oracle, &t), &SearchConfig::default()).unwrap();
                assert_eq!(out.cost, Some(t.c_opt), "{planner} {regime} {}", t.id);
            }
        }
    }
}
