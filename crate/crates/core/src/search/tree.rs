use std::cmp::Ordering;

use crate::cost::Cost;
use crate::domain::{Action, WorldState};

use super::Direction;

pub type NodeId = usize;

/// A partial plan (forward) or partial reverse plan (backward) and its statistics.
#[derive(Clone, Debug)]
pub struct SearchNode {
    pub id: NodeId,
    pub parent: Option<NodeId>,
    /// Forward: the action leading here from the parent. Backward: the action
    /// leading from this node's state to the parent's state.
    pub action: Option<Action>,
    pub state: WorldState,
    pub g: Cost,
    pub reward: f64,
    pub depth: usize,
    pub visits: u32,
    pub value: f64,
    pub terminal: bool,
    /// Forward: goal reached. Backward: initial state reached.
    pub complete: bool,
    pub direction: Direction,
    pub children: Vec<NodeId>,
    pub expanded: bool,
    /// Trace record index.
    pub record: usize,
    /// MCTS simulations started at this node.
    pub simulations: u32,
    /// MCTS: nothing below can be expanded any more.
    pub dead: bool,
}

#[derive(Clone, Debug)]
pub struct SearchTree {
    pub direction: Direction,
    nodes: Vec<SearchNode>,
}

impl SearchTree {
    pub fn new(direction: Direction) -> Self {
        Self {
            direction,
            nodes: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[SearchNode] {
        &self.nodes
    }

    pub fn get(&self, id: NodeId) -> &SearchNode {
        &self.nodes[id]
    }

    pub(crate) fn get_mut(&mut self, id: NodeId) -> &mut SearchNode {
        &mut self.nodes[id]
    }

    pub(crate) fn push(&mut self, mut node: SearchNode) -> NodeId {
        node.id = self.nodes.len();
        if let Some(p) = node.parent {
            self.nodes[p].children.push(node.id);
        }
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    /// Incoming actions from the root down to `id`.
    pub fn actions_to(&self, id: NodeId) -> Vec<Action> {
        let mut out = Vec::with_capacity(self.nodes[id].depth);
        let mut cur = id;
        while let Some(a) = self.nodes[cur].action {
            out.push(a);
            cur = self.nodes[cur].parent.expect("non-root has a parent");
        }
        out.reverse();
        out
    }

    /// The actions this node contributes to a final plan, in execution order:
    /// root-to-node for forward trees, node-to-root for backward trees.
    pub fn plan_fragment(&self, id: NodeId) -> Vec<Action> {
        let mut actions = self.actions_to(id);
        if self.direction == Direction::Backward {
            actions.reverse();
        }
        actions
    }

    /// Best-first order: higher reward, then canonical action order (roots first), then id.
    pub fn priority(&self, a: NodeId, b: NodeId) -> Ordering {
        let (x, y) = (&self.nodes[a], &self.nodes[b]);
        y.reward
            .total_cmp(&x.reward)
            .then_with(|| x.action.cmp(&y.action))
            .then_with(|| a.cmp(&b))
    }
}
