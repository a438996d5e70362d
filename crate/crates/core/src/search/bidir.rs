use std::collections::HashMap;

use super::engine::Engine;
use super::tree::{NodeId, SearchTree};
use super::{Direction, Problem, RecordKind, RunOutcome, SearchConfig, SearchError};
use crate::cost::Cost;
use crate::domain::{Action, StateKey};
use crate::scorer::Scorer;

/// Joins a forward path and a backward path that end in the same state.
pub fn extract_plan(
    forward: &SearchTree,
    f: NodeId,
    backward: &SearchTree,
    b: NodeId,
) -> Result<Vec<Action>, SearchError> {
    let (fk, bk) = (forward.get(f).state.key(), backward.get(b).state.key());
    if fk != bk {
        return Err(SearchError::IncompatibleMeet { forward: fk, backward: bk });
    }
    let mut plan = forward.plan_fragment(f);
    plan.extend(backward.plan_fragment(b));
    Ok(plan)
}

#[derive(Clone, Copy, Debug)]
struct Meet {
    cost: Cost,
    forward: NodeId,
    /// `None` when the forward node satisfies the goal without a backward partner.
    backward: Option<NodeId>,
}

/// Bidirectional search. The forward tree grows from the initial state, the
/// backward tree from the hand-empty goal states. Each round expands the best
/// open leaf of each tree, then inspects the overlaps found during the round.
///
/// Without hard pruning the first round that produces an overlap ends the
/// search, keeping the cheapest meet. With hard pruning, meets over the
/// budget are rejected and the search continues.
pub fn bi_search(problem: &Problem, scorer: &mut dyn Scorer, cfg: &SearchConfig) -> Result<RunOutcome, SearchError> {
    let mut engine = Engine::new(problem, scorer, cfg)?;
    let mut fwd = SearchTree::new(Direction::Forward);
    let mut bwd = SearchTree::new(Direction::Backward);
    let froot = engine.add_root(&mut fwd, problem.initial, 0.0);
    if fwd.get(froot).complete {
        return engine.solve(Vec::new(), &[&fwd, &bwd]);
    }

    let goal_states = problem.goal.goal_states(problem.initial.len())?;
    let scores = engine.rank_roots(&goal_states)?;
    let mut roots: Vec<_> = goal_states.into_iter().zip(scores).collect();
    roots.sort_by(|(sa, ra), (sb, rb)| rb.total_cmp(ra).then_with(|| sa.key().cmp(&sb.key())));
    if roots.iter().any(|(_, r)| *r > f64::NEG_INFINITY) {
        roots.retain(|(_, r)| *r > f64::NEG_INFINITY);
    }
    roots.truncate(cfg.backward_root_cap);

    let mut fmap: HashMap<StateKey, Vec<NodeId>> = HashMap::new();
    let mut bmap: HashMap<StateKey, Vec<NodeId>> = HashMap::new();
    fmap.entry(problem.initial.key()).or_default().push(froot);
    let mut fopen = vec![froot];
    let mut bopen = Vec::new();
    for (state, reward) in roots {
        let id = engine.add_root(&mut bwd, state, reward);
        bmap.entry(state.key()).or_default().push(id);
        if !bwd.get(id).terminal {
            bopen.push(id);
        }
    }

    loop {
        if engine.exhausted() || (fopen.is_empty() && bopen.is_empty()) {
            return Ok(engine.fail(&[&fwd, &bwd]));
        }
        let mut meets = Vec::new();
        let mut expanded_any = false;
        for direction in [Direction::Forward, Direction::Backward] {
            if engine.exhausted() {
                break;
            }
            let (tree, open, own, other) = match direction {
                Direction::Forward => (&mut fwd, &mut fopen, &mut fmap, &bmap),
                Direction::Backward => (&mut bwd, &mut bopen, &mut bmap, &fmap),
            };
            let Some(pos) = best_open(tree, open) else { continue };
            let id = open.swap_remove(pos);
            let m = if cfg.expand_all { usize::MAX } else { cfg.branching };
            let children = engine.expand(tree, id, m)?;
            expanded_any = true;
            for c in children {
                let node = tree.get(c);
                let key = node.state.key();
                if let Some(partners) = other.get(&key) {
                    for &p in partners {
                        meets.push(match direction {
                            Direction::Forward => (c, Some(p)),
                            Direction::Backward => (p, Some(c)),
                        });
                    }
                }
                if direction == Direction::Forward && node.complete {
                    meets.push((c, None));
                }
                own.entry(key).or_default().push(c);
                if !node.terminal {
                    open.push(c);
                }
            }
        }
        if !expanded_any {
            return Ok(engine.fail(&[&fwd, &bwd]));
        }
        if meets.is_empty() {
            continue;
        }

        let mut best: Option<Meet> = None;
        for (f, b) in meets {
            let meet = Meet {
                cost: fwd.get(f).g + b.map_or(0, |b| bwd.get(b).g),
                forward: f,
                backward: b,
            };
            let feasible = problem.budget.allows(meet.cost);
            if let Some(b) = meet.backward {
                let (fnode, bnode) = (fwd.get(f), bwd.get(b));
                engine.record(
                    Some(fnode.record),
                    RecordKind::Meet,
                    Direction::Forward,
                    fnode.depth + bnode.depth,
                    &fnode.state,
                    None,
                    meet.cost,
                    fnode.reward + bnode.reward,
                    cfg.hard_pruning && !feasible,
                    true,
                );
            }
            if cfg.hard_pruning && !feasible {
                continue;
            }
            let key = |m: &Meet| (m.cost, m.forward, m.backward);
            if best.as_ref().is_none_or(|cur| key(&meet) < key(cur)) {
                best = Some(meet);
            }
        }
        let Some(meet) = best else { continue };
        if !problem.budget.allows(meet.cost) {
            return Ok(engine.fail(&[&fwd, &bwd]));
        }
        let plan = match meet.backward {
            Some(b) => extract_plan(&fwd, meet.forward, &bwd, b)?,
            None => fwd.actions_to(meet.forward),
        };
        return engine.solve(plan, &[&fwd, &bwd]);
    }
}

fn best_open(tree: &SearchTree, open: &[NodeId]) -> Option<usize> {
    (0..open.len()).min_by(|&i, &j| tree.priority(open[i], open[j]))
}
