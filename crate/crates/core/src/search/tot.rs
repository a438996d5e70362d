use super::engine::Engine;
use super::tree::SearchTree;
use super::{Direction, Problem, RunOutcome, SearchConfig, SearchError};
use crate::scorer::Scorer;

/// Level-order Tree-of-Thoughts search. Every node of a level is expanded, in
/// reward order, before the next level; there is no beam. Stops at the first
/// budget-feasible goal node.
pub fn tot_bfs(problem: &Problem, scorer: &mut dyn Scorer, cfg: &SearchConfig) -> Result<RunOutcome, SearchError> {
    let mut engine = Engine::new(problem, scorer, cfg)?;
    let mut tree = SearchTree::new(Direction::Forward);
    let root = engine.add_root(&mut tree, problem.initial, 0.0);
    if tree.get(root).complete {
        return engine.solve(Vec::new(), &[&tree]);
    }
    let mut level = vec![root];
    while !level.is_empty() {
        level.sort_by(|&a, &b| tree.priority(a, b));
        let mut next = Vec::new();
        for id in level {
            if engine.exhausted() {
                return Ok(engine.fail(&[&tree]));
            }
            for child in engine.expand(&mut tree, id, cfg.branching)? {
                let node = tree.get(child);
                if node.complete && problem.budget.allows(node.g) {
                    let plan = tree.actions_to(child);
                    return engine.solve(plan, &[&tree]);
                }
                if !node.terminal {
                    next.push(child);
                }
            }
        }
        level = next;
    }
    Ok(engine.fail(&[&tree]))
}

/// Depth-first Tree-of-Thoughts search: always expands the most recently
/// generated unexpanded node, trying siblings in reward order and backtracking
/// past terminal, pruned or childless nodes.
pub fn tot_dfs(problem: &Problem, scorer: &mut dyn Scorer, cfg: &SearchConfig) -> Result<RunOutcome, SearchError> {
    let mut engine = Engine::new(problem, scorer, cfg)?;
    let mut tree = SearchTree::new(Direction::Forward);
    let root = engine.add_root(&mut tree, problem.initial, 0.0);
    if tree.get(root).complete {
        return engine.solve(Vec::new(), &[&tree]);
    }
    let mut stack = vec![root];
    while let Some(id) = stack.pop() {
        if engine.exhausted() {
            return Ok(engine.fail(&[&tree]));
        }
        let children = engine.expand(&mut tree, id, cfg.branching)?;
        for &child in &children {
            let node = tree.get(child);
            if node.complete && problem.budget.allows(node.g) {
                let plan = tree.actions_to(child);
                return engine.solve(plan, &[&tree]);
            }
        }
        stack.extend(children.into_iter().rev().filter(|&c| !tree.get(c).terminal));
    }
    Ok(engine.fail(&[&tree]))
}
