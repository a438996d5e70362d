use std::sync::Arc;

use super::{Candidate, Confidence, CostMaps, NodeContext, Scorer, ScorerError};
use crate::domain::WorldState;

/// Perfect policy: spreads all probability evenly over candidates on some
/// cost-optimal continuation (`c(a) + h(successor)` minimal) and gives every other
/// candidate probability zero, so it is never proposed.
#[derive(Clone, Debug)]
pub struct OracleScorer {
    maps: Arc<CostMaps>,
}

impl OracleScorer {
    pub fn new(maps: Arc<CostMaps>) -> Self {
        Self { maps }
    }
}

fn uniform_over_minimum(values: &[u64]) -> Vec<f64> {
    let best = values.iter().copied().min().unwrap_or(0);
    let k = values.iter().filter(|&&v| v == best).count() as f64;
    values
        .iter()
        .map(|&v| if v == best { -k.ln() } else { f64::NEG_INFINITY })
        .collect()
}

impl Scorer for OracleScorer {
    fn name(&self) -> &'static str {
        "oracle"
    }

    fn confidences(
        &mut self,
        ctx: &NodeContext<'_>,
        candidates: &[Candidate],
    ) -> Result<Vec<Confidence>, ScorerError> {
        let totals = candidates
            .iter()
            .map(|c| {
                self.maps
                    .remaining(ctx.direction, &c.successor)
                    .map(|d| d + ctx.schedule.action_cost(&c.action))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(uniform_over_minimum(&totals)
            .into_iter()
            .map(|action| Confidence { action, self_eval: 0.0 })
            .collect())
    }

    fn rank_roots(
        &mut self,
        ctx: &NodeContext<'_>,
        states: &[WorldState],
    ) -> Result<Vec<f64>, ScorerError> {
        let dists = states
            .iter()
            .map(|s| self.maps.remaining(ctx.direction, s))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(uniform_over_minimum(&dists))
    }
}
