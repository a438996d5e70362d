use crate::cost::Cost;
use crate::domain::{self, Action, WorldState};
use crate::scorer::{self, NodeContext, Proposal, Scorer};

use super::tree::{NodeId, SearchNode, SearchTree};
use super::{Direction, Problem, RecordKind, RunOutcome, RunStatus, SearchConfig, SearchError, TraceRecord};

/// Per-run bookkeeping shared by every planner: the scorer, the expansion
/// counter and the trace.
pub(crate) struct Engine<'a> {
    pub problem: &'a Problem,
    pub cfg: &'a SearchConfig,
    scorer: &'a mut dyn Scorer,
    pub trace: Vec<TraceRecord>,
    pub expansions: usize,
}

impl<'a> Engine<'a> {
    pub fn new(
        problem: &'a Problem,
        scorer: &'a mut dyn Scorer,
        cfg: &'a SearchConfig,
    ) -> Result<Self, SearchError> {
        cfg.validate()?;
        Ok(Self {
            problem,
            cfg,
            scorer,
            trace: Vec::new(),
            expansions: 0,
        })
    }

    pub fn exhausted(&self) -> bool {
        self.expansions >= self.cfg.expansion_limit
    }

    pub fn is_complete(&self, direction: Direction, state: &WorldState) -> bool {
        match direction {
            Direction::Forward => self.problem.goal.satisfied_by(state),
            Direction::Backward => *state == self.problem.initial,
        }
    }

    /// Scores candidate backward roots; not counted as an expansion.
    pub fn rank_roots(&mut self, states: &[WorldState]) -> Result<Vec<f64>, SearchError> {
        let ctx = NodeContext {
            direction: Direction::Backward,
            initial: &self.problem.initial,
            state: &self.problem.initial,
            plan: &[],
            goal: &self.problem.goal,
            budget: self.problem.budget,
            g: 0,
            schedule: &self.problem.schedule,
        };
        Ok(self.scorer.rank_roots(&ctx, states)?)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn record(
        &mut self,
        parent: Option<usize>,
        kind: RecordKind,
        direction: Direction,
        depth: usize,
        state: &WorldState,
        action: Option<Action>,
        g: Cost,
        reward: f64,
        pruned: bool,
        complete: bool,
    ) -> usize {
        let index = self.trace.len();
        self.trace.push(TraceRecord {
            index,
            parent,
            kind,
            direction,
            depth,
            key: state.key(),
            action,
            g,
            reward,
            visits: 0,
            value: 0.0,
            expanded: None,
            pruned,
            complete,
        });
        index
    }

    pub fn add_root(&mut self, tree: &mut SearchTree, state: WorldState, reward: f64) -> NodeId {
        let complete = self.is_complete(tree.direction, &state);
        let record = self.record(None, RecordKind::Root, tree.direction, 0, &state, None, 0, reward, false, complete);
        tree.push(SearchNode {
            id: 0,
            parent: None,
            action: None,
            state,
            g: 0,
            reward,
            depth: 0,
            visits: 0,
            value: 0.0,
            terminal: complete,
            complete,
            direction: tree.direction,
            children: Vec::new(),
            expanded: false,
            record,
            simulations: 0,
            dead: complete,
        })
    }

    /// Counts one expansion against the limit and marks `record` as expanded.
    pub fn charge(&mut self, record: usize) {
        let slot = &mut self.trace[record].expanded;
        if slot.is_none() {
            *slot = Some(self.expansions);
        }
        self.expansions += 1;
    }

    /// Proposals for a state reached by `plan` at cost `g`.
    pub fn proposals(
        &mut self,
        direction: Direction,
        state: &WorldState,
        plan: &[Action],
        g: Cost,
        m: usize,
    ) -> Result<Vec<Proposal>, SearchError> {
        let ctx = NodeContext {
            direction,
            initial: &self.problem.initial,
            state,
            plan,
            goal: &self.problem.goal,
            budget: self.problem.budget,
            g,
            schedule: &self.problem.schedule,
        };
        Ok(scorer::propose(&mut *self.scorer, &ctx, m)?)
    }

    /// Expands `id`: one proposal request, one child per surviving proposal.
    /// Returns the created children in proposal order.
    pub fn expand(&mut self, tree: &mut SearchTree, id: NodeId, m: usize) -> Result<Vec<NodeId>, SearchError> {
        let node = tree.get(id).clone();
        debug_assert!(!node.expanded && !node.terminal);
        let plan = tree.plan_fragment(id);
        self.charge(node.record);
        tree.get_mut(id).expanded = true;
        let proposals = self.proposals(tree.direction, &node.state, &plan, node.g, m)?;
        let mut children = Vec::with_capacity(proposals.len());
        for p in proposals {
            let g = node.g + self.problem.schedule.action_cost(&p.action);
            let depth = node.depth + 1;
            let complete = self.is_complete(tree.direction, &p.successor);
            let reward = p.reward();
            if self.cfg.hard_pruning && !self.problem.budget.allows(g) {
                self.record(Some(node.record), RecordKind::Child, tree.direction, depth, &p.successor, Some(p.action), g, reward, true, complete);
                continue;
            }
            let record = self.record(Some(node.record), RecordKind::Child, tree.direction, depth, &p.successor, Some(p.action), g, reward, false, complete);
            let terminal = complete || depth >= self.cfg.max_depth;
            children.push(tree.push(SearchNode {
                id: 0,
                parent: Some(id),
                action: Some(p.action),
                state: p.successor,
                g,
                reward,
                depth,
                visits: 0,
                value: 0.0,
                terminal,
                complete,
                direction: tree.direction,
                children: Vec::new(),
                expanded: false,
                record,
                simulations: 0,
                dead: false,
            }));
        }
        Ok(children)
    }

    fn sync_stats(&mut self, trees: &[&SearchTree]) {
        for tree in trees {
            for n in tree.nodes() {
                let r = &mut self.trace[n.record];
                r.visits = n.visits;
                r.value = n.value;
            }
        }
    }

    /// Validates `plan` by replay and closes the run as solved.
    pub fn solve(mut self, plan: Vec<Action>, trees: &[&SearchTree]) -> Result<RunOutcome, SearchError> {
        let end = domain::replay(&self.problem.initial, &plan)
            .map_err(|e| SearchError::InvalidPlan(e.to_string()))?;
        if !self.problem.goal.satisfied_by(&end) {
            return Err(SearchError::InvalidPlan(format!("plan ends in non-goal state {end}")));
        }
        let cost = self.problem.schedule.plan_cost(&plan);
        if !self.problem.budget.allows(cost) {
            return Err(SearchError::InvalidPlan(format!("cost {cost} exceeds budget {}", self.problem.budget)));
        }
        self.sync_stats(trees);
        Ok(RunOutcome {
            status: RunStatus::Solved,
            plan: Some(plan),
            cost: Some(cost),
            expansions_used: self.expansions,
            expansion_limit: self.cfg.expansion_limit,
            budget: self.problem.budget,
            trace: self.trace,
        })
    }

    /// Closes an unsuccessful run; the failure mode follows from the trace.
    pub fn fail(mut self, trees: &[&SearchTree]) -> RunOutcome {
        self.sync_stats(trees);
        let mut out = RunOutcome {
            status: RunStatus::SearchExhaustion,
            plan: None,
            cost: None,
            expansions_used: self.expansions,
            expansion_limit: self.cfg.expansion_limit,
            budget: self.problem.budget,
            trace: self.trace,
        };
        if out.over_budget_plans().next().is_some() {
            out.status = RunStatus::BudgetViolation;
        }
        out
    }
}
