//! Exact ground truth over the enumerated BlocksWorld state space.
//!
//! Optimal plans come from least-cost-first search, which returns the same cost as
//! enumerating every plan because all action costs are positive. Among equal-cost
//! optimal plans the lexicographically smallest action sequence (canonical action
//! order) is returned, so the uniform and cost-aware ground truths are compared
//! under one fixed tie-breaking rule.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap, VecDeque};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cost::{Cost, CostSchedule};
use crate::domain::{self, Action, ActionKind, DomainError, Goal, StateKey, WorldState};

/// Default cap on enumerated states; 8 blocks need about 7e5.
pub const DEFAULT_STATE_CAP: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("state space for {n} blocks exceeds the cap of {cap} states")]
    ResourceLimit { n: usize, cap: usize },
    #[error("no goal state reachable from {0}")]
    Unreachable(StateKey),
    #[error("state {0} is not in the graph")]
    UnknownState(StateKey),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// Every reachable state for `n` blocks with the full labeled edge set.
#[derive(Debug)]
pub struct StateGraph {
    n: usize,
    states: Vec<WorldState>,
    index: HashMap<StateKey, usize>,
    /// `succ[i]` lists `(a, j)` with `apply(states[i], a) == states[j]`, canonical action order.
    succ: Vec<Vec<(Action, usize)>>,
    /// `pred[j]` lists `(a, i)` with `apply(states[i], a) == states[j]`.
    pred: Vec<Vec<(Action, usize)>>,
}

impl StateGraph {
    pub fn n_blocks(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[WorldState] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &WorldState {
        &self.states[i]
    }

    pub fn index_of(&self, state: &WorldState) -> Option<usize> {
        self.index.get(&state.key()).copied()
    }

    pub fn successors(&self, i: usize) -> &[(Action, usize)] {
        &self.succ[i]
    }

    pub fn predecessors(&self, i: usize) -> &[(Action, usize)] {
        &self.pred[i]
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    fn require(&self, state: &WorldState) -> Result<usize, OracleError> {
        self.index_of(state)
            .ok_or_else(|| OracleError::UnknownState(state.key()))
    }
}

pub fn enumerate_states(n_blocks: usize) -> Result<StateGraph, OracleError> {
    enumerate_states_capped(n_blocks, DEFAULT_STATE_CAP)
}

/// Breadth-first enumeration from the all-on-table state.
pub fn enumerate_states_capped(n_blocks: usize, cap: usize) -> Result<StateGraph, OracleError> {
    let start = WorldState::all_on_table(n_blocks)?;
    let mut states = vec![start];
    let mut index = HashMap::from([(start.key(), 0usize)]);
    let mut succ = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let s = states[i];
        let mut edges = Vec::new();
        for a in domain::applicable_actions(&s) {
            let next = domain::apply(&s, &a)?;
            let j = match index.get(&next.key()) {
                Some(&j) => j,
                None => {
                    if states.len() >= cap {
                        return Err(OracleError::ResourceLimit { n: n_blocks, cap });
                    }
                    let j = states.len();
                    states.push(next);
                    index.insert(next.key(), j);
                    queue.push_back(j);
                    j
                }
            };
            edges.push((a, j));
        }
        if succ.len() <= i {
            succ.resize_with(i + 1, Vec::new);
        }
        succ[i] = edges;
    }
    succ.resize_with(states.len(), Vec::new);
    let mut pred = vec![Vec::new(); states.len()];
    for (i, edges) in succ.iter().enumerate() {
        for &(a, j) in edges {
            pred[j].push((a, i));
        }
    }
    Ok(StateGraph {
        n: n_blocks,
        states,
        index,
        succ,
        pred,
    })
}

/// Least cost per state, indexed like the graph it was computed on.
#[derive(Debug, Clone)]
pub struct CostMap {
    graph: Arc<StateGraph>,
    cost: Vec<Option<Cost>>,
}

impl CostMap {
    pub fn get(&self, state: &WorldState) -> Option<Cost> {
        self.graph.index_of(state).and_then(|i| self.cost[i])
    }

    pub fn get_key(&self, key: StateKey) -> Option<Cost> {
        self.graph.index.get(&key).and_then(|&i| self.cost[i])
    }

    pub fn at(&self, i: usize) -> Option<Cost> {
        self.cost[i]
    }

    pub fn graph(&self) -> &StateGraph {
        &self.graph
    }

    /// One `(key, state, cost)` row per state, in key order.
    pub fn rows(&self) -> Vec<(StateKey, WorldState, Option<Cost>)> {
        let mut rows: Vec<_> = self
            .graph
            .states
            .iter()
            .zip(&self.cost)
            .map(|(s, &c)| (s.key(), *s, c))
            .collect();
        rows.sort_by_key(|r| r.0);
        rows
    }
}

fn dijkstra(
    graph: &Arc<StateGraph>,
    seeds: impl IntoIterator<Item = usize>,
    schedule: &CostSchedule,
    reversed: bool,
) -> CostMap {
    let mut cost = vec![None; graph.len()];
    let mut heap = BinaryHeap::new();
    for s in seeds {
        cost[s] = Some(0);
        heap.push(Reverse((0, s)));
    }
    while let Some(Reverse((d, i))) = heap.pop() {
        if cost[i].is_some_and(|c| c < d) {
            continue;
        }
        let edges = if reversed { &graph.pred[i] } else { &graph.succ[i] };
        for &(a, j) in edges {
            let nd = d + schedule.action_cost(&a);
            if cost[j].is_none_or(|c| nd < c) {
                cost[j] = Some(nd);
                heap.push(Reverse((nd, j)));
            }
        }
    }
    CostMap {
        graph: Arc::clone(graph),
        cost,
    }
}

/// Optimal remaining cost `h(s)` to any goal-satisfying state.
pub fn remaining_cost_map(goal: &Goal, schedule: &CostSchedule, graph: &Arc<StateGraph>) -> CostMap {
    let seeds: Vec<usize> = (0..graph.len())
        .filter(|&i| goal.satisfied_by(&graph.states[i]))
        .collect();
    dijkstra(graph, seeds, schedule, true)
}

/// Least cost from `source` to every state.
pub fn cost_from_map(
    source: &WorldState,
    schedule: &CostSchedule,
    graph: &Arc<StateGraph>,
) -> Result<CostMap, OracleError> {
    let i = graph.require(source)?;
    Ok(dijkstra(graph, [i], schedule, false))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub cost: Cost,
    pub plan: Vec<Action>,
}

impl GroundTruth {
    pub fn kinds(&self) -> Vec<ActionKind> {
        self.plan.iter().map(Action::kind).collect()
    }
}

/// Lexicographically smallest optimal plan, walking greedily along `h`.
pub fn extract_optimal_plan(
    initial: &WorldState,
    goal: &Goal,
    schedule: &CostSchedule,
    h: &CostMap,
) -> Result<GroundTruth, OracleError> {
    let graph = h.graph();
    let mut i = graph.require(initial)?;
    let total = h.at(i).ok_or(OracleError::Unreachable(initial.key()))?;
    let mut plan = Vec::new();
    while !goal.satisfied_by(&graph.states[i]) {
        let here = h.at(i).expect("reachable");
        let &(a, j) = graph.succ[i]
            .iter()
            .find(|(a, j)| h.at(*j).is_some_and(|hj| schedule.action_cost(a) + hj == here))
            .expect("consistent cost map has an optimal successor");
        plan.push(a);
        i = j;
    }
    Ok(GroundTruth { cost: total, plan })
}

/// Shared, read-only oracle for one block count.
#[derive(Clone, Debug)]
pub struct Oracle {
    graph: Arc<StateGraph>,
}

impl Oracle {
    pub fn new(n_blocks: usize) -> Result<Self, OracleError> {
        Ok(Self {
            graph: Arc::new(enumerate_states(n_blocks)?),
        })
    }

    pub fn from_graph(graph: StateGraph) -> Self {
        Self {
            graph: Arc::new(graph),
        }
    }

    pub fn graph(&self) -> &Arc<StateGraph> {
        &self.graph
    }

    pub fn n_blocks(&self) -> usize {
        self.graph.n
    }

    pub fn remaining_cost_map(&self, goal: &Goal, schedule: &CostSchedule) -> CostMap {
        remaining_cost_map(goal, schedule, &self.graph)
    }

    pub fn cost_from_map(&self, source: &WorldState, schedule: &CostSchedule) -> Result<CostMap, OracleError> {
        cost_from_map(source, schedule, &self.graph)
    }

    pub fn optimal_plan(
        &self,
        initial: &WorldState,
        goal: &Goal,
        schedule: &CostSchedule,
    ) -> Result<GroundTruth, OracleError> {
        if let Some(b) = goal.max_block().filter(|b| b.index() >= self.graph.n) {
            return Err(DomainError::UnknownBlock(b).into());
        }
        let h = self.remaining_cost_map(goal, schedule);
        extract_optimal_plan(initial, goal, schedule, &h)
    }
}

/// Convenience wrapper building a fresh graph for the state's block count.
pub fn optimal_plan(
    initial: &WorldState,
    goal: &Goal,
    schedule: &CostSchedule,
) -> Result<GroundTruth, OracleError> {
    Oracle::new(initial.len())?.optimal_plan(initial, goal, schedule)
}

/// How two ground-truth plans are compared for a solution shift.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShiftCriterion {
    /// Sequences of action types differ.
    #[default]
    ActionTypes,
    /// Plans differ as ground action sequences.
    Exact,
}

pub fn is_shifted(uniform: &GroundTruth, costed: &GroundTruth, criterion: ShiftCriterion) -> bool {
    match criterion {
        ShiftCriterion::ActionTypes => uniform.kinds() != costed.kinds(),
        ShiftCriterion::Exact => uniform.plan != costed.plan,
    }
}

/// Shift fraction per difficulty class. Empty classes are absent from the map.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ShiftRates {
    /// L → (shifted, total)
    pub buckets: BTreeMap<usize, (usize, usize)>,
}

impl ShiftRates {
    pub fn record(&mut self, difficulty: usize, shifted: bool) {
        let e = self.buckets.entry(difficulty).or_insert((0, 0));
        e.0 += usize::from(shifted);
        e.1 += 1;
    }

    pub fn rate(&self, difficulty: usize) -> Option<f64> {
        self.buckets
            .get(&difficulty)
            .filter(|(_, t)| *t > 0)
            .map(|&(s, t)| s as f64 / t as f64)
    }

    pub fn overall(&self) -> Option<f64> {
        let (s, t) = self
            .buckets
            .values()
            .fold((0, 0), |acc, &(s, t)| (acc.0 + s, acc.1 + t));
        (t > 0).then(|| s as f64 / t as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{BlockId, Support};

    const A: BlockId = BlockId(0);
    const B: BlockId = BlockId(1);
    const C: BlockId = BlockId(2);

    fn pd20() -> CostSchedule {
        CostSchedule::new(1, 1, 20, 1).unwrap()
    }

    fn t2_initial() -> WorldState {
        WorldState::from_stacks(3, &[vec![B, A], vec![C]], None).unwrap()
    }

    fn t2_goal() -> Goal {
        Goal::new([(B, Support::Block(A))]).unwrap()
    }

    #[test]
    fn small_state_counts() {
        assert_eq!(enumerate_states(1).unwrap().len(), 2);
        assert_eq!(enumerate_states(2).unwrap().len(), 5);
        assert!(matches!(
            enumerate_states_capped(4, 10),
            Err(OracleError::ResourceLimit { n: 4, cap: 10 })
        ));
    }

    #[test]
    fn t1_optimal() {
        let oracle = Oracle::new(3).unwrap();
        let init = WorldState::all_on_table(3).unwrap();
        let goal = Goal::new([(B, Support::Block(C))]).unwrap();
        let gt = oracle.optimal_plan(&init, &goal, &pd20()).unwrap();
        assert_eq!(gt.plan, vec![Action::PickUp(B), Action::Stack(B, C)]);
        assert_eq!(gt.cost, 2);
    }

    #[test]
    fn t2_optimal_avoids_put_down() {
        let oracle = Oracle::new(3).unwrap();
        let gt = oracle.optimal_plan(&t2_initial(), &t2_goal(), &pd20()).unwrap();
        assert_eq!(
            gt.plan,
            vec![Action::Unstack(A, B), Action::Stack(A, C), Action::PickUp(B), Action::Stack(B, A)]
        );
        assert_eq!(gt.cost, 4);
        let uniform = oracle
            .optimal_plan(&t2_initial(), &t2_goal(), &CostSchedule::uniform())
            .unwrap();
        assert_eq!(
            uniform.plan,
            vec![Action::Unstack(A, B), Action::PutDown(A), Action::PickUp(B), Action::Stack(B, A)]
        );
        assert!(is_shifted(&uniform, &gt, ShiftCriterion::ActionTypes));
        assert!(is_shifted(&uniform, &gt, ShiftCriterion::Exact));
        assert!(!is_shifted(&uniform, &uniform, ShiftCriterion::ActionTypes));
    }

    #[test]
    fn already_satisfied() {
        let oracle = Oracle::new(3).unwrap();
        let s = WorldState::from_stacks(3, &[vec![A, B], vec![C]], None).unwrap();
        let gt = oracle.optimal_plan(&s, &t2_goal(), &pd20()).unwrap();
        assert!(gt.plan.is_empty());
        assert_eq!(gt.cost, 0);
    }

    #[test]
    fn remaining_costs_for_t2() {
        let oracle = Oracle::new(3).unwrap();
        let h = oracle.remaining_cost_map(&t2_goal(), &pd20());
        let table = WorldState::all_on_table(3).unwrap();
        assert_eq!(h.get(&table), Some(2));
        let after = domain::replay(&t2_initial(), &[Action::Unstack(A, B), Action::PutDown(A)]).unwrap();
        assert_eq!(after, table);
        assert_eq!(pd20().plan_cost(&[Action::Unstack(A, B), Action::PutDown(A)]) + h.get(&after).unwrap(), 23);
        for s in oracle.graph().states() {
            assert_eq!(h.get(s) == Some(0), t2_goal().satisfied_by(s));
        }
    }

    #[test]
    fn shift_rate_buckets() {
        let mut rates = ShiftRates::default();
        for shifted in [true, false, false, false] {
            rates.record(4, shifted);
        }
        assert_eq!(rates.rate(4), Some(0.25));
        assert_eq!(rates.rate(6), None);
    }
}
