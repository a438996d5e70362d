use std::sync::Arc;

use rand_distr::{Distribution, Normal};

use super::{Candidate, Confidence, CostMaps, NodeContext, Scorer, ScorerError};
use crate::cost::Budget;
use crate::domain::WorldState;
use crate::util::{action_word, log_sigmoid, log_softmax, rng_for};

/// Deterministic stand-in for a well-calibrated language model.
///
/// Action confidence is a log-softmax over candidates of `-h(successor) / τ`.
/// Self confidence is `ln σ(κ · (B − g − c(a) − h(successor)))`, a soft judgment of
/// whether the budget can still be met after taking the action. With `B = ∞` it is 0.
///
/// With noise enabled each confidence receives independent Gaussian noise, seeded
/// from the node and action so the same query always gets the same answer.
#[derive(Clone, Debug)]
pub struct HeuristicScorer {
    maps: Arc<CostMaps>,
    temperature: f64,
    kappa: f64,
    noise: Option<(f64, u64)>,
}

impl HeuristicScorer {
    pub fn new(maps: Arc<CostMaps>, temperature: f64, kappa: f64) -> Self {
        Self {
            maps,
            temperature,
            kappa,
            noise: None,
        }
    }

    pub fn with_noise(mut self, sigma: f64, seed: u64) -> Self {
        self.noise = (sigma > 0.0).then_some((sigma, seed));
        self
    }

    /// The noise-free confidence pair for one candidate among `candidates`.
    pub fn heuristic_confidences(
        &self,
        ctx: &NodeContext<'_>,
        candidates: &[Candidate],
    ) -> Result<Vec<Confidence>, ScorerError> {
        let dists = candidates
            .iter()
            .map(|c| self.maps.remaining(ctx.direction, &c.successor))
            .collect::<Result<Vec<_>, _>>()?;
        let logits: Vec<f64> = dists.iter().map(|&d| -(d as f64) / self.temperature).collect();
        let action = log_softmax(&logits);
        Ok(candidates
            .iter()
            .zip(dists)
            .zip(action)
            .map(|((c, d), a)| Confidence {
                action: a,
                self_eval: self.feasibility(ctx.budget, ctx.g + ctx.schedule.action_cost(&c.action), d),
            })
            .collect())
    }

    fn feasibility(&self, budget: Budget, spent: u64, remaining: u64) -> f64 {
        match budget {
            Budget::Infinite => 0.0,
            Budget::Finite(b) => log_sigmoid(self.kappa * (b as f64 - spent as f64 - remaining as f64)),
        }
    }

    fn perturb(&self, value: f64, words: &[u64]) -> f64 {
        match self.noise {
            None => value,
            Some((sigma, seed)) => {
                let mut key = vec![seed];
                key.extend_from_slice(words);
                let mut rng = rng_for(&key);
                let normal = Normal::new(0.0, sigma).expect("sigma > 0");
                (value + normal.sample(&mut rng)).min(0.0)
            }
        }
    }
}

impl Scorer for HeuristicScorer {
    fn name(&self) -> &'static str {
        if self.noise.is_some() {
            "noisy"
        } else {
            "heuristic"
        }
    }

    fn confidences(
        &mut self,
        ctx: &NodeContext<'_>,
        candidates: &[Candidate],
    ) -> Result<Vec<Confidence>, ScorerError> {
        let base = self.heuristic_confidences(ctx, candidates)?;
        let node = [ctx.direction as u64, ctx.state.key().0, ctx.g];
        Ok(base
            .into_iter()
            .zip(candidates)
            .map(|(k, c)| {
                let a = action_word(&c.action);
                Confidence {
                    action: self.perturb(k.action, &[node[0], node[1], node[2], a, 0]),
                    self_eval: self.perturb(k.self_eval, &[node[0], node[1], node[2], a, 1]),
                }
            })
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
        let logits: Vec<f64> = dists.iter().map(|&d| -(d as f64) / self.temperature).collect();
        Ok(log_softmax(&logits)
            .into_iter()
            .zip(&dists)
            .zip(states)
            .map(|((a, &d), s)| {
                let score = a + self.feasibility(ctx.budget, 0, d);
                self.perturb(score, &[2, s.key().0])
            })
            .collect())
    }
}
