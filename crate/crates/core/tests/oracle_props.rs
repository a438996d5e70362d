use std::sync::OnceLock;

use costplan::cost::{CostSchedule, SHIFT_STUDY_SCHEDULES};
use costplan::domain::{self, hand_empty_states, BlockId, Goal, Support, WorldState};
use costplan::oracle::{is_shifted, Oracle, ShiftCriterion};
use proptest::prelude::*;

fn oracle4() -> &'static Oracle {
    static O: OnceLock<Oracle> = OnceLock::new();
    O.get_or_init(|| Oracle::new(4).unwrap())
}

fn schedule() -> impl Strategy<Value = CostSchedule> {
    (1u64..=20, 1u64..=20, 1u64..=20, 1u64..=20).prop_map(|(a, b, c, d)| CostSchedule::new(a, b, c, d).unwrap())
}

fn task() -> impl Strategy<Value = (WorldState, Goal)> {
    let states = hand_empty_states(4).unwrap();
    let n = states.len();
    (0..n, 0..n, 1usize..=3).prop_filter_map("degenerate", move |(i, j, k)| {
        let target = states[j];
        let atoms: Vec<_> = target
            .blocks()
            .filter_map(|b| match target.support(b) {
                Some(Support::Block(t)) => Some((b, Support::Block(t))),
                _ => None,
            })
            .take(k)
            .collect();
        let goal = Goal::new(atoms).ok().filter(|g| !g.is_empty())?;
        (!goal.satisfied_by(&states[i])).then_some((states[i], goal))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn optimal_plan_replays_at_its_cost((initial, goal) in task(), sched in schedule()) {
        let gt = oracle4().optimal_plan(&initial, &goal, &sched).unwrap();
        let end = domain::replay(&initial, &gt.plan).unwrap();
        prop_assert!(goal.satisfied_by(&end));
        prop_assert_eq!(sched.plan_cost(&gt.plan), gt.cost);
        let h = oracle4().remaining_cost_map(&goal, &sched);
        prop_assert_eq!(h.get(&initial), Some(gt.cost));
    }

    #[test]
    fn remaining_cost_is_consistent((_, goal) in task(), sched in schedule()) {
        let h = oracle4().remaining_cost_map(&goal, &sched);
        let g = oracle4().graph();
        for i in 0..g.len() {
            let hi = h.at(i).unwrap();
            if goal.satisfied_by(g.state(i)) {
                prop_assert_eq!(hi, 0);
            }
            for (a, j) in g.successors(i) {
                prop_assert!(hi <= sched.action_cost(a) + h.at(*j).unwrap());
            }
        }
    }

    #[test]
    fn cost_from_is_reverse_consistent((initial, _) in task(), sched in schedule()) {
        let f = oracle4().cost_from_map(&initial, &sched).unwrap();
        let g = oracle4().graph();
        for i in 0..g.len() {
            for (a, j) in g.successors(i) {
                prop_assert!(f.at(*j).unwrap() <= f.at(i).unwrap() + sched.action_cost(a));
            }
        }
    }

    #[test]
    fn uniform_schedule_never_shifts((initial, goal) in task()) {
        let u = oracle4().optimal_plan(&initial, &goal, &CostSchedule::uniform()).unwrap();
        prop_assert!(!is_shifted(&u, &u, ShiftCriterion::ActionTypes));
        prop_assert_eq!(u.cost as usize, u.plan.len());
    }
}

#[test]
fn two_step_tasks_never_shift() {
    let oracle = oracle4();
    let states = hand_empty_states(4).unwrap();
    let uniform = CostSchedule::uniform();
    let mut checked = 0;
    for s in &states {
        for x in 0..4u8 {
            for y in (0..4u8).filter(|&y| y != x) {
                let goal = Goal::new([(BlockId(x), Support::Block(BlockId(y)))]).unwrap();
                if goal.satisfied_by(s) {
                    continue;
                }
                let u = oracle.optimal_plan(s, &goal, &uniform).unwrap();
                if u.plan.len() != 2 {
                    continue;
                }
                for row in SHIFT_STUDY_SCHEDULES {
                    let sched = CostSchedule::new(row[0], row[1], row[2], row[3]).unwrap();
                    let c = oracle.optimal_plan(s, &goal, &sched).unwrap();
                    assert!(!is_shifted(&u, &c, ShiftCriterion::ActionTypes), "{s} {goal:?} {sched}");
                }
                checked += 1;
            }
        }
    }
    assert!(checked > 0);
}
