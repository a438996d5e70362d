use rand::Rng;
use rand_distr::StandardNormal;

use super::{Candidate, Confidence, NodeContext, Scorer, ScorerError};
use crate::domain::WorldState;
use crate::util::{action_word, log_softmax, rng_for};

/// Uninformed policy. Confidences are pseudo-random but a pure function of
/// (seed, node, action), so repeated queries agree.
#[derive(Clone, Debug)]
pub struct RandomScorer {
    seed: u64,
}

impl RandomScorer {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }
}

impl Scorer for RandomScorer {
    fn name(&self) -> &'static str {
        "random"
    }

    fn confidences(
        &mut self,
        ctx: &NodeContext<'_>,
        candidates: &[Candidate],
    ) -> Result<Vec<Confidence>, ScorerError> {
        let node = [self.seed, ctx.direction as u64, ctx.state.key().0, ctx.g];
        let draws: Vec<(f64, f64)> = candidates
            .iter()
            .map(|c| {
                let mut rng = rng_for(&[node[0], node[1], node[2], node[3], action_word(&c.action)]);
                let logit: f64 = rng.sample(StandardNormal);
                let good: f64 = rng.random_range(f64::EPSILON..=1.0);
                (logit, good.ln())
            })
            .collect();
        let logits: Vec<f64> = draws.iter().map(|d| d.0).collect();
        Ok(log_softmax(&logits)
            .into_iter()
            .zip(draws)
            .map(|(action, (_, self_eval))| Confidence { action, self_eval })
            .collect())
    }

    fn rank_roots(
        &mut self,
        _ctx: &NodeContext<'_>,
        states: &[WorldState],
    ) -> Result<Vec<f64>, ScorerError> {
        Ok(states
            .iter()
            .map(|s| {
                let mut rng = rng_for(&[self.seed, 2, s.key().0]);
                rng.random_range(f64::EPSILON..=1.0).ln()
            })
            .collect())
    }
}
