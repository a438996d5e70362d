use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::{Arc, Mutex};
use std::thread;

use costplan::cost::{Budget, CostSchedule};
use costplan::domain::{Action, BlockId, Goal, Support, WorldState};
use costplan::scorer::{RemoteScorer, ScoreRequest, ScorerError};
use costplan::search::{tot_bfs, Problem, RunStatus, SearchConfig, SearchError};

type Responder = fn(&ScoreRequest) -> String;

/// Minimal HTTP/1.1 server: answers every POST with `respond(request)`.
fn serve(respond: Responder) -> (String, Arc<Mutex<Vec<ScoreRequest>>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/score", listener.local_addr().unwrap());
    let seen = Arc::new(Mutex::new(Vec::new()));
    let log = seen.clone();
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(stream) = stream else { break };
            let log = log.clone();
            thread::spawn(move || handle(stream, respond, &log));
        }
    });
    (url, seen)
}

fn handle(stream: TcpStream, respond: Responder, log: &Mutex<Vec<ScoreRequest>>) {
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut out = stream;
    loop {
        let mut length = 0usize;
        let mut line = String::new();
        if reader.read_line(&mut line).unwrap_or(0) == 0 {
            return;
        }
        loop {
            line.clear();
            reader.read_line(&mut line).unwrap();
            let l = line.trim_end();
            if l.is_empty() {
                break;
            }
            if let Some((k, v)) = l.split_once(':') {
                if k.eq_ignore_ascii_case("content-length") {
                    length = v.trim().parse().unwrap();
                }
            }
        }
        let mut body = vec![0; length];
        reader.read_exact(&mut body).unwrap();
        let req: ScoreRequest = serde_json::from_slice(&body).unwrap();
        let reply = respond(&req);
        log.lock().unwrap().push(req);
        let head = format!(
            "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\n\r\n",
            reply.len()
        );
        if out.write_all(head.as_bytes()).and_then(|_| out.write_all(reply.as_bytes())).is_err() {
            return;
        }
    }
}

fn cheap_first(req: &ScoreRequest) -> String {
    format!(
        r#"{{"action_logprob": {}, "self_logprob": -0.1}}"#,
        -(req.action_cost as f64) / 4.0
    )
}

fn t1() -> Problem {
    Problem {
        initial: WorldState::all_on_table(3).unwrap(),
        goal: Goal::new([(BlockId(1), Support::Block(BlockId(2)))]).unwrap(),
        schedule: CostSchedule::new(1, 1, 20, 1).unwrap(),
        budget: Budget::Finite(2),
    }
}

#[test]
fn remote_scorer_drives_a_search() {
    let (url, seen) = serve(cheap_first);
    let mut scorer = RemoteScorer::new(url);
    let out = tot_bfs(&t1(), &mut scorer, &SearchConfig::default()).unwrap();
    assert_eq!(out.status, RunStatus::Solved);
    assert_eq!(out.cost, Some(2));
    let seen = seen.lock().unwrap();
    assert!(!seen.is_empty());
    let first = &seen[0];
    assert_eq!(first.protocol, "costplan-score/1");
    assert_eq!(first.costs.put_down, 20);
    assert_eq!(first.used, 0);
    assert_eq!(first.limit, Some(2));
    assert_eq!(first.used_text, "We have used 0 minutes so far.");
    assert_eq!(first.limit_text, "Our time limit is 2 minutes.");
    assert!(first.goal.contains("the blue block is on top of the orange block"));
    assert!(first.current_state.contains("the hand is empty"));
    let stack = seen.iter().find(|r| r.action_code == Action::Stack(BlockId(1), BlockId(2)).to_string());
    let stack = stack.expect("stack candidate was scored");
    assert_eq!(stack.previous_actions, vec!["pick up the blue block".to_string()]);
    assert_eq!(stack.used, 1);
}

#[test]
fn unreachable_endpoint_is_reported() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/score", listener.local_addr().unwrap());
    drop(listener);
    let err = tot_bfs(&t1(), &mut RemoteScorer::new(url), &SearchConfig::default()).unwrap_err();
    assert!(matches!(err, SearchError::Scorer(ScorerError::RemoteUnavailable(_))), "{err}");
}

#[test]
fn malformed_replies_are_protocol_errors() {
    let (url, _) = serve(|_| r#"{"action_logprob": 0.5, "self_logprob": 0.0}"#.to_string());
    let err = tot_bfs(&t1(), &mut RemoteScorer::new(url), &SearchConfig::default()).unwrap_err();
    assert!(matches!(err, SearchError::Scorer(ScorerError::Protocol(_))), "{err}");
    let (url, _) = serve(|_| "not json".to_string());
    let err = tot_bfs(&t1(), &mut RemoteScorer::new(url), &SearchConfig::default()).unwrap_err();
    assert!(matches!(err, SearchError::Scorer(ScorerError::Protocol(_))), "{err}");
}
