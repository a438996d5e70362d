//! HTTP scorer: one JSON request per candidate action, answered with two
//! log-probabilities. Transport failures are surfaced as errors.
//!
//! Request body (`POST <endpoint>`, `Content-Type: application/json`):
//!
//! | field              | meaning                                                        |
//! |--------------------|----------------------------------------------------------------|
//! | `protocol`         | always `"costplan-score/1"`                                    |
//! | `direction`        | `"forward"` or `"backward"`                                    |
//! | `costs`            | `{pick_up, unstack, put_down, stack}` in cost units            |
//! | `initial_state`    | prose rendering of the initial state                           |
//! | `current_state`    | prose rendering of the node being expanded                     |
//! | `goal`             | prose rendering of the goal                                    |
//! | `previous_actions` | prose actions already in the partial plan                      |
//! | `used`             | accumulated cost of the partial plan                           |
//! | `limit`            | budget, or `null` when unlimited                               |
//! | `used_text`        | `"We have used <used> minutes so far."`                        |
//! | `limit_text`       | `"Our time limit is <limit> minutes."` or `"There is no time limit."` |
//! | `action`           | prose rendering of the candidate action                        |
//! | `action_code`      | machine form of the action, e.g. `"unstack(2,1)"`              |
//! | `action_cost`      | cost of the candidate action                                   |
//! | `candidate_state`  | prose rendering of the state the candidate leads to (forward) or comes from (backward) |
//!
//! Response body: `{"action_logprob": <f64 <= 0>, "self_logprob": <f64 <= 0>}`.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{Candidate, Confidence, NodeContext, Scorer, ScorerError};
use crate::domain::{text, ActionKind};
use crate::search::Direction;

/// Environment variable naming the endpoint for `--scorer remote`.
pub const SCORER_ENDPOINT_ENV: &str = "COSTPLAN_SCORER_URL";

pub const PROTOCOL: &str = "costplan-score/1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostTable {
    pub pick_up: u64,
    pub unstack: u64,
    pub put_down: u64,
    pub stack: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreRequest {
    pub protocol: String,
    pub direction: Direction,
    pub costs: CostTable,
    pub initial_state: String,
    pub current_state: String,
    pub goal: String,
    pub previous_actions: Vec<String>,
    pub used: u64,
    pub limit: Option<u64>,
    pub used_text: String,
    pub limit_text: String,
    pub action: String,
    pub action_code: String,
    pub action_cost: u64,
    pub candidate_state: String,
}

impl ScoreRequest {
    pub fn new(ctx: &NodeContext<'_>, candidate: &Candidate) -> Self {
        let s = ctx.schedule;
        let limit = ctx.budget.limit();
        Self {
            protocol: PROTOCOL.to_string(),
            direction: ctx.direction,
            costs: CostTable {
                pick_up: s.of(ActionKind::PickUp),
                unstack: s.of(ActionKind::Unstack),
                put_down: s.of(ActionKind::PutDown),
                stack: s.of(ActionKind::Stack),
            },
            initial_state: text::describe_state(ctx.initial),
            current_state: text::describe_state(ctx.state),
            goal: ctx.goal.describe(),
            previous_actions: ctx.plan.iter().map(|a| a.describe()).collect(),
            used: ctx.g,
            limit,
            used_text: format!("We have used {} minutes so far.", ctx.g),
            limit_text: match limit {
                Some(l) => format!("Our time limit is {l} minutes."),
                None => "There is no time limit.".to_string(),
            },
            action: candidate.action.describe(),
            action_code: candidate.action.to_string(),
            action_cost: s.action_cost(&candidate.action),
            candidate_state: text::describe_state(&candidate.successor),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreResponse {
    pub action_logprob: f64,
    pub self_logprob: f64,
}

pub struct RemoteScorer {
    endpoint: String,
    agent: ureq::Agent,
}

impl RemoteScorer {
    pub fn new(endpoint: String) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(30)))
            .build()
            .into();
        Self { endpoint, agent }
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    fn query(&self, request: &ScoreRequest) -> Result<ScoreResponse, ScorerError> {
        let mut response = self
            .agent
            .post(&self.endpoint)
            .send_json(request)
            .map_err(|e| ScorerError::RemoteUnavailable(format!("{}: {e}", self.endpoint)))?;
        let parsed: ScoreResponse = response
            .body_mut()
            .read_json()
            .map_err(|e| ScorerError::Protocol(e.to_string()))?;
        for v in [parsed.action_logprob, parsed.self_logprob] {
            if v.is_nan() || v > 0.0 {
                return Err(ScorerError::Protocol(format!("log-probability {v} is not <= 0")));
            }
        }
        Ok(parsed)
    }
}

impl Scorer for RemoteScorer {
    fn name(&self) -> &'static str {
        "remote"
    }

    fn confidences(
        &mut self,
        ctx: &NodeContext<'_>,
        candidates: &[Candidate],
    ) -> Result<Vec<Confidence>, ScorerError> {
        candidates
            .iter()
            .map(|c| {
                let r = self.query(&ScoreRequest::new(ctx, c))?;
                Ok(Confidence {
                    action: r.action_logprob,
                    self_eval: r.self_logprob,
                })
            })
            .collect()
    }
}
