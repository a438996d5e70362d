use super::engine::Engine;
use super::tree::{NodeId, SearchTree};
use super::{Direction, Problem, RecordKind, RunOutcome, SearchConfig, SearchError};
use crate::domain::Action;
use crate::scorer::Scorer;
use crate::util::sigmoid;

/// Upper-confidence selection score `Q + beta * sqrt(ln(parent_visits) / (1 + N))`.
pub fn uct_score(value: f64, visits: u32, parent_visits: u32, beta: f64) -> f64 {
    let np = f64::from(parent_visits.max(1));
    value + beta * (np.ln() / (1.0 + f64::from(visits))).sqrt()
}

enum Simulation {
    Value(f64),
    Solved(Vec<Action>),
    Exhausted,
}

/// Monte Carlo tree search with greedy top-1 rollouts.
///
/// Ties in selection go to the earliest-inserted child. A node whose subtree
/// can no longer be expanded is marked dead and skipped by selection; when
/// the root dies the search ends.
pub fn mcts(problem: &Problem, scorer: &mut dyn Scorer, cfg: &SearchConfig) -> Result<RunOutcome, SearchError> {
    let mut engine = Engine::new(problem, scorer, cfg)?;
    let mut tree = SearchTree::new(Direction::Forward);
    let root = engine.add_root(&mut tree, problem.initial, 0.0);
    if tree.get(root).complete {
        return engine.solve(Vec::new(), &[&tree]);
    }

    loop {
        if tree.get(root).dead || engine.exhausted() {
            return Ok(engine.fail(&[&tree]));
        }
        let leaf = select(&tree, root, cfg.uct_beta);
        if tree.get(leaf).expanded || tree.get(leaf).terminal {
            mark_dead(&mut tree, leaf);
            continue;
        }
        let children = engine.expand(&mut tree, leaf, cfg.branching)?;
        if children.is_empty() {
            mark_dead(&mut tree, leaf);
            continue;
        }
        for child in children {
            match simulate(&mut engine, &tree, child)? {
                Simulation::Solved(plan) => return engine.solve(plan, &[&tree]),
                Simulation::Value(v) => backpropagate(&mut tree, child, v),
                Simulation::Exhausted => return Ok(engine.fail(&[&tree])),
            }
            if tree.get(child).terminal {
                mark_dead(&mut tree, child);
            }
        }
    }
}

fn select(tree: &SearchTree, root: NodeId, beta: f64) -> NodeId {
    let mut cur = root;
    loop {
        let node = tree.get(cur);
        if !node.expanded {
            return cur;
        }
        let parent_visits = node.visits.max(1);
        let mut best: Option<(NodeId, f64)> = None;
        for &c in &node.children {
            let child = tree.get(c);
            if child.dead {
                continue;
            }
            let score = uct_score(child.value, child.visits, parent_visits, beta);
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((c, score));
            }
        }
        match best {
            Some((c, _)) => cur = c,
            None => return cur,
        }
    }
}

fn mark_dead(tree: &mut SearchTree, id: NodeId) {
    let mut cur = Some(id);
    while let Some(n) = cur {
        tree.get_mut(n).dead = true;
        let parent = tree.get(n).parent;
        match parent {
            Some(p) if tree.get(p).children.iter().all(|&c| tree.get(c).dead) => cur = Some(p),
            _ => cur = None,
        }
    }
}

fn backpropagate(tree: &mut SearchTree, child: NodeId, v: f64) {
    tree.get_mut(child).simulations += 1;
    let mut cur = Some(child);
    while let Some(n) = cur {
        let node = tree.get_mut(n);
        let visits = f64::from(node.visits);
        node.value = (node.value * visits + v) / (visits + 1.0);
        node.visits += 1;
        cur = node.parent;
    }
}

fn simulate(engine: &mut Engine<'_>, tree: &SearchTree, child: NodeId) -> Result<Simulation, SearchError> {
    let problem = engine.problem;
    let cfg = engine.cfg;
    let node = tree.get(child);
    let fallback = sigmoid(node.reward);
    if node.complete {
        if problem.budget.allows(node.g) {
            return Ok(Simulation::Solved(tree.actions_to(child)));
        }
        return Ok(Simulation::Value(fallback));
    }
    if node.terminal || cfg.reward_only_backup {
        return Ok(Simulation::Value(fallback));
    }

    let mut plan = tree.actions_to(child);
    let mut state = node.state;
    let mut g = node.g;
    let mut depth = node.depth;
    let mut source = node.record;
    let width = if cfg.hard_pruning { cfg.branching } else { 1 };
    for _ in 0..cfg.rollout_depth {
        if depth >= cfg.max_depth {
            break;
        }
        if engine.exhausted() {
            return Ok(Simulation::Exhausted);
        }
        engine.charge(source);
        let proposals = engine.proposals(Direction::Forward, &state, &plan, g, width)?;
        let step = proposals.into_iter().find(|p| {
            !cfg.hard_pruning || problem.budget.allows(g + problem.schedule.action_cost(&p.action))
        });
        let Some(p) = step else { break };
        g += problem.schedule.action_cost(&p.action);
        depth += 1;
        plan.push(p.action);
        state = p.successor;
        let complete = problem.goal.satisfied_by(&state);
        source = engine.record(Some(source), RecordKind::Rollout, Direction::Forward, depth, &state, Some(p.action), g, p.reward(), false, complete);
        if complete {
            if problem.budget.allows(g) {
                return Ok(Simulation::Solved(plan));
            }
            break;
        }
    }
    Ok(Simulation::Value(fallback))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uct_examples() {
        assert_eq!(uct_score(0.5, 3, 10, 0.0), 0.5);
        assert_eq!(uct_score(0.0, 0, 1, 1.0), 0.0);
        let v = uct_score(0.3, 1, 8, 1.0);
        assert!((v - (0.3 + (8f64.ln() / 2.0).sqrt())).abs() < 1e-12);
        assert!((v - 1.3197).abs() < 1e-4);
    }

    #[test]
    fn backprop_keeps_visit_consistency() {
        use crate::domain::WorldState;
        use crate::search::tree::SearchNode;
        let mut tree = SearchTree::new(Direction::Forward);
        let mk = |parent| SearchNode {
            id: 0,
            parent,
            action: None,
            state: WorldState::all_on_table(2).unwrap(),
            g: 0,
            reward: 0.0,
            depth: 0,
            visits: 0,
            value: 0.0,
            terminal: false,
            complete: false,
            direction: Direction::Forward,
            children: Vec::new(),
            expanded: true,
            record: 0,
            simulations: 0,
            dead: false,
        };
        let root = tree.push(mk(None));
        let a = tree.push(mk(Some(root)));
        let b = tree.push(mk(Some(root)));
        let c = tree.push(mk(Some(a)));
        backpropagate(&mut tree, a, 0.2);
        backpropagate(&mut tree, b, 0.4);
        backpropagate(&mut tree, c, 1.0);
        for n in tree.nodes() {
            let sum: u32 = n.children.iter().map(|&c| tree.get(c).visits).sum();
            assert_eq!(n.visits, sum + n.simulations);
        }
        assert!((tree.get(root).value - (0.2 + 0.4 + 1.0) / 3.0).abs() < 1e-12);
        assert!((tree.get(a).value - 0.6).abs() < 1e-12);
    }
}
