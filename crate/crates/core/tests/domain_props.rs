use std::collections::BTreeSet;

use costplan::domain::{
    self, applicable_actions, apply, backward_expansions, hand_empty_states, Action, StateKey, WorldState,
};
use costplan::oracle::enumerate_states;
use proptest::prelude::*;

/// A state reached by a random walk of `steps` from the all-on-table state.
fn walk(n: usize, picks: &[usize]) -> WorldState {
    let mut s = WorldState::all_on_table(n).unwrap();
    for &p in picks {
        let acts = applicable_actions(&s);
        s = apply(&s, &acts[p % acts.len()]).unwrap();
    }
    s
}

fn state() -> impl Strategy<Value = WorldState> {
    (1usize..=7, prop::collection::vec(any::<usize>(), 0..40)).prop_map(|(n, picks)| walk(n, &picks))
}

/// Lah-number sum: forests of ordered stacks over `n` labelled blocks.
fn hand_empty_count(n: u64) -> u64 {
    // a(n) = (2n - 1) a(n-1) - (n - 1)(n - 2) a(n-2)
    let (mut prev, mut cur) = (1u64, 1u64);
    for k in 2..=n {
        let next = (2 * k - 1) * cur - (k - 1) * (k - 2) * prev;
        prev = cur;
        cur = next;
    }
    cur
}

#[test]
fn closed_form_counts() {
    for n in 1..=7 {
        assert_eq!(hand_empty_states(n).unwrap().len() as u64, hand_empty_count(n as u64), "n={n}");
    }
    assert_eq!(hand_empty_count(8), 394_353);
    for n in 1..=6usize {
        let total = enumerate_states(n).unwrap().len() as u64;
        let holding = n as u64 * hand_empty_count(n as u64 - 1);
        assert_eq!(total, hand_empty_count(n as u64) + holding, "n={n}");
    }
}

#[test]
fn hand_empty_states_are_distinct_and_valid() {
    let states = hand_empty_states(5).unwrap();
    let keys: BTreeSet<StateKey> = states.iter().map(WorldState::key).collect();
    assert_eq!(keys.len(), states.len());
    assert!(states.iter().all(|s| s.hand_empty() && s.validate().is_ok()));
}

#[test]
fn backward_expansions_match_brute_force_at_three_blocks() {
    let graph = enumerate_states(3).unwrap();
    let literals = Action::all_literals(3);
    for s in graph.states() {
        let mut expected: Vec<(Action, WorldState)> = graph
            .states()
            .iter()
            .flat_map(|p| {
                literals
                    .iter()
                    .filter_map(move |a| apply(p, a).ok().filter(|t| t == s).map(|_| (*a, *p)))
            })
            .collect();
        expected.sort();
        let mut got = backward_expansions(s);
        got.sort();
        assert_eq!(got, expected, "{s}");
    }
}

proptest! {
    #[test]
    fn successors_stay_valid(s in state()) {
        for a in applicable_actions(&s) {
            let t = apply(&s, &a).unwrap();
            prop_assert!(t.validate().is_ok());
            prop_assert_eq!(t.len(), s.len());
            prop_assert_ne!(t.hand_empty(), s.hand_empty());
        }
    }

    #[test]
    fn inverse_undoes_every_action(s in state()) {
        for a in applicable_actions(&s) {
            let t = apply(&s, &a).unwrap();
            let back = apply(&t, &domain::inverse(&a)).unwrap();
            prop_assert_eq!(back, s);
            prop_assert_eq!(domain::inverse(&domain::inverse(&a)), a);
        }
    }

    #[test]
    fn inapplicable_literals_are_rejected(s in state()) {
        let ok: BTreeSet<Action> = applicable_actions(&s).into_iter().collect();
        for a in Action::all_literals(s.len()) {
            prop_assert_eq!(apply(&s, &a).is_ok(), ok.contains(&a));
            prop_assert_eq!(domain::is_applicable(&s, &a), ok.contains(&a));
        }
    }

    #[test]
    fn key_round_trips(s in state()) {
        prop_assert_eq!(WorldState::from_key(s.key()).unwrap(), s);
        let text = s.key().to_string();
        prop_assert_eq!(text.parse::<StateKey>().unwrap(), s.key());
        let json = serde_json::to_string(&s).unwrap();
        prop_assert_eq!(serde_json::from_str::<WorldState>(&json).unwrap(), s);
    }

    #[test]
    fn backward_expansions_lead_back(s in state()) {
        for (a, p) in backward_expansions(&s) {
            prop_assert_eq!(apply(&p, &a).unwrap(), s);
        }
    }

    #[test]
    fn action_text_round_trips(s in state()) {
        for a in applicable_actions(&s) {
            prop_assert_eq!(a.to_string().parse::<Action>().unwrap(), a);
        }
    }
}
