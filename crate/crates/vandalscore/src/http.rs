//! `POST /score` over HTTP, sharing the client's scoring path.

use serde_json::json;
use tiny_http::{Header, Method, Request, Response, Server};
use vandalscore_core::engine::SessionScorer;
use vandalscore_core::ScoringEngine;

use crate::client::parse_payload;

fn reply(req: Request, status: u16, body: serde_json::Value) {
    let header = Header::from_bytes("Content-Type", "application/json").expect("static header");
    let resp = Response::from_string(body.to_string())
        .with_status_code(status)
        .with_header(header);
    if let Err(e) = req.respond(resp) {
        log::warn!("failed to send response: {e}");
    }
}

fn handle(mut req: Request, scorer: &mut SessionScorer<'_>) {
    if req.url() != "/score" {
        return reply(req, 404, json!({"error": "not found"}));
    }
    if *req.method() != Method::Post {
        return reply(req, 405, json!({"error": "use POST"}));
    }
    let mut body = String::new();
    if let Err(e) = req.as_reader().read_to_string(&mut body) {
        return reply(req, 400, json!({"error": format!("unreadable body: {e}")}));
    }
    if body.trim().is_empty() {
        return reply(req, 400, json!({"error": "empty body"}));
    }
    let (rev, meta) = match parse_payload(&body) {
        Ok(p) => p,
        Err(e) => return reply(req, 400, json!({"error": e.to_string()})),
    };
    match scorer.score(&rev, &meta) {
        Ok(score) => reply(
            req,
            200,
            json!({"revisionId": rev.revision_id, "score": score}),
        ),
        Err(e) => reply(req, 500, json!({"error": e.to_string()})),
    }
}

/// Answers requests one at a time, in arrival order, so session means see
/// revisions in the order they were posted. Stops after `max_requests`
/// when given.
pub fn serve_http(server: &Server, engine: &ScoringEngine, max_requests: Option<usize>) {
    let mut scorer = SessionScorer::new(engine);
    let mut served = 0;
    for req in server.incoming_requests() {
        handle(req, &mut scorer);
        served += 1;
        if max_requests.is_some_and(|m| served >= m) {
            break;
        }
    }
}
