mod common;

use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, StatusCode};
use chrono::{TimeDelta, TimeZone, Utc};
use serde_json::{json, Value};

use common::Api;
use peakpoll::{ManualClock, PollService, ServiceConfig};
use peakpoll_core::text::Alternatives;
use peakpoll_core::Ranking;

fn ordinal_poll(names: &[&str], axis: &[&str]) -> Value {
    json!({"name": "p", "alternatives": names, "mode": "ordinal-known", "axis": axis, "robust": false})
}

fn example_three_poll() -> Value {
    json!({
        "name": "cardinal",
        "alternatives": ["a", "b", "c", "d", "e"],
        "mode": "cardinal-known",
        "positions": {"a": ".46", "b": ".92", "c": ".42", "d": ".78", "e": ".02"},
    })
}

fn pair(view: &Value) -> [String; 2] {
    let mut p = [
        view["query"]["left"].as_str().unwrap().to_string(),
        view["query"]["right"].as_str().unwrap().to_string(),
    ];
    p.sort();
    p
}

#[tokio::test]
async fn validation_errors_name_the_field() {
    let api = Api::in_memory();
    let cases = [
        (json!({"name": "p", "alternatives": [], "mode": "unknown-positions"}), "alternatives"),
        (json!({"name": "p", "alternatives": ["a", "a"], "mode": "unknown-positions"}), "alternatives"),
        (json!({"name": " ", "alternatives": ["a"], "mode": "unknown-positions"}), "name"),
        (json!({"name": "p", "alternatives": ["a", "b"], "mode": "ordinal-known"}), "axis"),
        (ordinal_poll(&["a", "b", "c"], &["a", "b"]), "axis"),
        (ordinal_poll(&["a", "b", "c"], &["a", "b", "x"]), "axis"),
        (ordinal_poll(&["a", "b", "c"], &["a", "b", "b"]), "axis"),
        (
            json!({"name": "p", "alternatives": ["a"], "mode": "unknown-positions", "axis": ["a"]}),
            "axis",
        ),
        (json!({"name": "p", "alternatives": ["a", "b"], "mode": "cardinal-known"}), "positions"),
        (
            json!({"name": "p", "alternatives": ["a", "b"], "mode": "cardinal-known", "positions": {"a": "1"}}),
            "positions",
        ),
        (
            json!({"name": "p", "alternatives": ["a", "b"], "mode": "cardinal-known", "positions": {"a": "1", "b": "x"}}),
            "positions",
        ),
    ];
    for (body, field) in cases {
        let (status, v) = api.call(Method::POST, "/polls", Some(body.clone())).await;
        assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY, "{body}");
        assert_eq!(v["error"], "validation");
        assert_eq!(v["field"], field, "{body}: {v}");
    }
}

#[tokio::test]
async fn duplicate_positions_are_rejected() {
    let api = Api::in_memory();
    let body = json!({
        "name": "p", "alternatives": ["a", "b", "c"], "mode": "cardinal-known",
        "positions": {"a": "0.5", "b": "1/2", "c": "0.7"},
    });
    let (status, v) = api.call(Method::POST, "/polls", Some(body)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["field"], "positions");
    assert!(v["message"].as_str().unwrap().contains("a and b share a position"), "{v}");
}

#[tokio::test]
async fn malformed_bodies_are_validation_errors() {
    let api = Api::in_memory();
    let (status, v) = api.raw(Method::POST, "/polls", Body::from("{not json")).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["error"], "validation");
    let (status, _) = api
        .call(Method::POST, "/polls", Some(json!({"name": "p", "alternatives": ["a"], "mode": "psychic"})))
        .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let poll = api.create(json!({"name": "p", "alternatives": ["a", "b"], "mode": "unknown-positions"})).await;
    let session = api.open(&poll).await["session_id"].as_str().unwrap().to_string();
    let (status, _) = api.answer(&session, "both").await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn unknown_ids_are_not_found() {
    let api = Api::in_memory();
    for (method, path) in [
        (Method::POST, "/polls/nope/sessions"),
        (Method::GET, "/polls/nope/aggregate"),
        (Method::GET, "/sessions/nope/next"),
        (Method::GET, "/sessions/nope/result"),
    ] {
        let (status, v) = api.call(method, path, None).await;
        assert_eq!(status, StatusCode::NOT_FOUND, "{path}");
        assert!(v["error"].as_str().unwrap().starts_with("unknown_"));
    }
    let (status, _) = api.answer("nope", "left").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn first_queries() {
    let api = Api::in_memory();
    let ordinal = api
        .create(ordinal_poll(&["a", "b", "c", "d", "e", "f"], &["d", "b", "e", "f", "a", "c"]))
        .await;
    let view = api.open(&ordinal).await;
    // the adjacent pair at axis positions 3 and 4
    assert_eq!(pair(&view), ["e", "f"]);
    assert_eq!(view["progress"], json!({"asked": 0, "bound": 7}));
    assert_eq!(view["done"], false);

    let cardinal = api.create(example_three_poll()).await;
    let view = api.open(&cardinal).await;
    assert_eq!(pair(&view), ["b", "e"]);
    assert_eq!(view["progress"]["bound"], 6);

    let single = api.create(json!({"name": "p", "alternatives": ["only"], "mode": "unknown-positions"})).await;
    let view = api.open(&single).await;
    assert_eq!(view["done"], true);
    assert!(view.get("query").is_none());
    assert_eq!(view["result"]["ranking"], json!(["only"]));
    assert_eq!(view["result"]["queries_used"], 0);
}

#[tokio::test]
async fn example_three_through_the_api() {
    let api = Api::in_memory();
    let poll = api.create(example_three_poll()).await;
    let names = Alternatives::letters(5);
    let truth = names.parse_ranking("a > c > d > b > e").unwrap();
    let (result, asked) = api.drive(&poll, &names, &truth).await;
    let pairs: Vec<[String; 2]> = asked
        .into_iter()
        .map(|(l, r)| {
            let mut p = [l, r];
            p.sort();
            p
        })
        .collect();
    assert_eq!(pairs, [["b", "e"], ["a", "d"], ["c", "d"]].map(|p| p.map(String::from)));
    assert_eq!(result["ranking"], json!(["a", "c", "d", "b", "e"]));
    assert_eq!(result["queries_used"], 3);
}

#[tokio::test]
async fn example_one_replay() {
    let api = Api::in_memory();
    let names = Alternatives::letters(6);
    let poll = api.create(json!({"name": "p", "alternatives": names.names(), "mode": "unknown-positions"})).await;
    let known = names.parse_ranking("a > d > f > b > c > e").unwrap();
    let (first, _) = api.drive(&poll, &names, &known).await;
    assert_eq!(first["ranking"], json!(["a", "d", "f", "b", "c", "e"]));

    let view = api.open(&poll).await;
    assert_eq!(view["progress"]["bound"], 18);
    let truth = names.parse_ranking("c > e > b > f > a > d").unwrap();
    let (result, asked) = api.drive(&poll, &names, &truth).await;
    assert_eq!(result["ranking"], json!(["c", "e", "b", "f", "a", "d"]));
    assert_eq!(result["queries_used"], 11);
    assert_eq!(asked.len(), 11);
}

#[tokio::test]
async fn answers_after_completion_and_stale_answers_are_rejected() {
    let api = Api::in_memory();
    let poll = api.create(json!({"name": "p", "alternatives": ["a", "b", "c"], "mode": "unknown-positions"})).await;
    let view = api.open(&poll).await;
    let session = view["session_id"].as_str().unwrap().to_string();
    let path = format!("/sessions/{session}/answer");

    let (status, v) = api.call(Method::GET, &format!("/sessions/{session}/result"), None).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(v["error"], "not_completed");

    let (status, after_first) = api
        .call(Method::POST, &path, Some(json!({"prefer": "left", "asked": 0})))
        .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(after_first["progress"]["asked"], 1);
    // a resubmission of the first answer
    let (status, v) = api
        .call(Method::POST, &path, Some(json!({"prefer": "left", "asked": 0})))
        .await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(v["error"], "stale_answer");
    let (_, now) = api.call(Method::GET, &format!("/sessions/{session}/next"), None).await;
    assert_eq!(now, after_first);

    let mut view = after_first;
    while view["done"] == false {
        view = api.answer(&session, "left").await.1;
    }
    let (status, v) = api.answer(&session, "left").await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(v["error"], "wrong_state");
    let (status, next) = api.call(Method::GET, &format!("/sessions/{session}/next"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(next, view);
}

#[tokio::test]
async fn robust_poll_recovers_a_non_single_peaked_respondent() {
    let api = Api::in_memory();
    let names = Alternatives::new((1..=8).map(|i| format!("a{i}"))).unwrap();
    let poll = api
        .create(json!({
            "name": "friend", "alternatives": names.names(), "mode": "ordinal-known",
            "axis": names.names(), "robust": true,
        }))
        .await;
    let truth = names.parse_ranking("a1 > a2 > a3 > a5 > a4 > a6 > a7 > a8").unwrap();
    let (result, asked) = api.drive(&poll, &names, &truth).await;
    assert_eq!(result["ranking"], json!(names.ranking_names(&truth)));
    assert_eq!(result["fell_back"], true);
    assert_eq!(result["verified"], false);
    // the as-if phase and the chain alone would be 9 + 7
    assert!(asked.len() > 16);

    let plain = names.parse_ranking("a4 > a5 > a3 > a6 > a2 > a7 > a1 > a8").unwrap();
    let (result, asked) = api.drive(&poll, &names, &plain).await;
    assert_eq!(result["verified"], true);
    assert_eq!(result["fell_back"], false);
    assert!(asked.len() <= 16);
}

#[tokio::test]
async fn aggregate_views() {
    let api = Api::in_memory();
    let names = Alternatives::letters(4);
    let poll = api.create(ordinal_poll(&["a", "b", "c", "d"], &["a", "b", "c", "d"])).await;
    let path = format!("/polls/{poll}/aggregate");
    let (status, v) = api.call(Method::GET, &path, None).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(v["error"], "no_completed_sessions");

    let votes = ["a > b > c > d", "b > c > d > a", "c > b > a > d"];
    api.drive(&poll, &names, &names.parse_ranking(votes[0]).unwrap()).await;
    let (_, one) = api.call(Method::GET, &path, None).await;
    assert_eq!(one["status"], "complete");
    assert_eq!(one["ranking"], json!(["a", "b", "c", "d"]));
    assert_eq!(one["winner"], "a");

    api.drive(&poll, &names, &names.parse_ranking(votes[1]).unwrap()).await;
    let (_, two) = api.call(Method::GET, &path, None).await;
    assert_eq!(two["status"], "partial");
    assert!(two.get("ranking").is_none() && two.get("winner").is_none());
    assert_eq!(two["respondents"], 2);
    assert_eq!(two["margins"][0][1], 0);

    api.drive(&poll, &names, &names.parse_ranking(votes[2]).unwrap()).await;
    let (status, three) = api.call(Method::GET, &path, None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(
        three,
        json!({
            "status": "complete",
            "ranking": ["b", "c", "a", "d"],
            "winner": "b",
            "margins": [[0, -1, -1, 1], [1, 0, 1, 3], [1, -1, 0, 3], [-1, -3, -3, 0]],
            "respondents": 3,
        })
    );
}

#[tokio::test]
async fn non_robust_unknown_poll_can_be_cyclic() {
    let api = Api::in_memory();
    let names = Alternatives::letters(3);
    let poll = api.create(json!({"name": "p", "alternatives": names.names(), "mode": "unknown-positions"})).await;
    for v in [[0, 1, 2], [1, 2, 0], [2, 0, 1]] {
        api.drive(&poll, &names, &Ranking::from_indices(&v).unwrap()).await;
    }
    let (_, view) = api.call(Method::GET, &format!("/polls/{poll}/aggregate"), None).await;
    assert_eq!(view["status"], "cyclic");
    assert!(view.get("winner").is_none());
}

#[tokio::test]
async fn idle_sessions_expire() {
    let clock = Arc::new(ManualClock::new(Utc.with_ymd_and_hms(2026, 5, 1, 9, 0, 0).unwrap()));
    let service = Arc::new(PollService::open(ServiceConfig::default(), clock.clone()).unwrap());
    let api = Api::new(service);
    let poll = api.create(json!({"name": "p", "alternatives": ["a", "b", "c"], "mode": "unknown-positions"})).await;
    let session = api.open(&poll).await["session_id"].as_str().unwrap().to_string();
    clock.advance(TimeDelta::minutes(25));
    assert_eq!(api.answer(&session, "left").await.0, StatusCode::OK);
    // activity resets the timer
    clock.advance(TimeDelta::minutes(25));
    assert_eq!(api.call(Method::GET, &format!("/sessions/{session}/next"), None).await.0, StatusCode::OK);
    clock.advance(TimeDelta::minutes(6));
    for (method, path) in [
        (Method::GET, format!("/sessions/{session}/next")),
        (Method::GET, format!("/sessions/{session}/result")),
        (Method::POST, format!("/sessions/{session}/answer")),
    ] {
        let body = (method == Method::POST).then(|| json!({"prefer": "left"}));
        let (status, v) = api.call(method, &path, body).await;
        assert_eq!(status, StatusCode::GONE, "{path}");
        assert_eq!(v["error"], "expired");
    }
    // expired sessions count nowhere
    let (status, _) = api.call(Method::GET, &format!("/polls/{poll}/aggregate"), None).await;
    assert_eq!(status, StatusCode::CONFLICT);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_sessions_do_not_interfere() {
    let api = Arc::new(Api::in_memory());
    let names = Alternatives::letters(9);
    let axis = names.parse_axis("e < c < g < a < i < b < h < d < f").unwrap();
    let poll = api
        .create(json!({
            "name": "p", "alternatives": names.names(), "mode": "ordinal-known",
            "axis": common::axis_json(&names, &axis), "robust": true,
        }))
        .await;
    let votes = peakpoll_core::single_peaked::enumerate_single_peaked(&axis).unwrap();
    let tasks: Vec<_> = votes
        .iter()
        .take(64)
        .cloned()
        .map(|truth| {
            let api = api.clone();
            let poll = poll.clone();
            let names = names.clone();
            tokio::spawn(async move {
                let (result, _) = api.drive(&poll, &names, &truth).await;
                (truth, result)
            })
        })
        .collect();
    for task in tasks {
        let (truth, result) = task.await.unwrap();
        assert_eq!(result["ranking"], json!(names.ranking_names(&truth)));
        assert_eq!(result["verified"], true);
    }
    let (_, view) = api.call(Method::GET, &format!("/polls/{poll}/aggregate"), None).await;
    assert_eq!(view["respondents"], 64);
}
