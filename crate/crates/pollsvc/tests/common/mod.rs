#![allow(dead_code)]

pub mod crash;

use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::{json, Value};
use tower::ServiceExt;

use peakpoll::model::ReportView;
use peakpoll::{http, PollService};
use peakpoll_core::elicit::{elicit, robust_elicit, ElicitReport, ElicitationContext};
use peakpoll_core::oracle::make_true_ranking_oracle;
use peakpoll_core::text::Alternatives;
use peakpoll_core::{CardinalLayout, OrdinalAxis, Ranking};
use peakpoll_simlab::generate::{perturb_swap, random_axis, random_cardinal_instance, random_sp_ranking};
use peakpoll_simlab::SplitMix64;

pub struct Api {
    pub router: Router,
}

impl Api {
    pub fn new(service: Arc<PollService>) -> Self {
        Api {
            router: http::router(service),
        }
    }

    pub fn in_memory() -> Self {
        Self::new(Arc::new(PollService::in_memory()))
    }

    pub async fn call(&self, method: Method, path: &str, body: Option<Value>) -> (StatusCode, Value) {
        let body = body.map_or_else(Body::empty, |v| Body::from(v.to_string()));
        self.raw(method, path, body).await
    }

    pub async fn raw(&self, method: Method, path: &str, body: Body) -> (StatusCode, Value) {
        let (status, bytes) = self.bytes(method, path, body).await;
        let value = if bytes.is_empty() {
            Value::Null
        } else {
            serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()))
        };
        (status, value)
    }

    pub async fn bytes(&self, method: Method, path: &str, body: Body) -> (StatusCode, Vec<u8>) {
        let request = Request::builder()
            .method(method)
            .uri(path)
            .header("content-type", "application/json")
            .body(body)
            .unwrap();
        let response = self.router.clone().oneshot(request).await.unwrap();
        let status = response.status();
        let bytes = response.into_body().collect().await.unwrap().to_bytes();
        (status, bytes.to_vec())
    }

    pub async fn create(&self, body: Value) -> String {
        let (status, v) = self.call(Method::POST, "/polls", Some(body)).await;
        assert_eq!(status, StatusCode::CREATED, "{v}");
        v["poll_id"].as_str().unwrap().to_string()
    }

    pub async fn open(&self, poll: &str) -> Value {
        let (status, v) = self.call(Method::POST, &format!("/polls/{poll}/sessions"), None).await;
        assert_eq!(status, StatusCode::CREATED, "{v}");
        v
    }

    pub async fn answer(&self, session: &str, prefer: &str) -> (StatusCode, Value) {
        self.call(
            Method::POST,
            &format!("/sessions/{session}/answer"),
            Some(json!({ "prefer": prefer })),
        )
        .await
    }

    /// Runs a fresh session answering from `truth`; returns the result body
    /// and the pairs asked.
    pub async fn drive(&self, poll: &str, names: &Alternatives, truth: &Ranking) -> (Value, Vec<(String, String)>) {
        let (bytes, asked) = self.drive_bytes(poll, names, truth).await;
        (serde_json::from_slice(&bytes).unwrap(), asked)
    }

    /// As [`drive`](Self::drive), returning the raw result body.
    pub async fn drive_bytes(
        &self,
        poll: &str,
        names: &Alternatives,
        truth: &Ranking,
    ) -> (Vec<u8>, Vec<(String, String)>) {
        let mut view = self.open(poll).await;
        let session = view["session_id"].as_str().unwrap().to_string();
        let mut asked = Vec::new();
        while view["done"] == false {
            let left = view["query"]["left"].as_str().unwrap().to_string();
            let right = view["query"]["right"].as_str().unwrap().to_string();
            let prefer = if truth.prefers(names.id(&left).unwrap(), names.id(&right).unwrap()) {
                "left"
            } else {
                "right"
            };
            asked.push((left, right));
            let (status, next) = self.answer(&session, prefer).await;
            assert_eq!(status, StatusCode::OK, "{next}");
            view = next;
        }
        let (status, result) = self
            .bytes(Method::GET, &format!("/sessions/{session}/result"), Body::empty())
            .await;
        assert_eq!(status, StatusCode::OK, "{}", String::from_utf8_lossy(&result));
        assert_eq!(view["result"], serde_json::from_slice::<Value>(&result).unwrap());
        (result, asked)
    }
}

/// Exact decimal text of a rational whose denominator has no prime factors
/// other than 2 and 5.
pub fn to_decimal(x: &BigRational) -> String {
    let mut d = x.denom().clone();
    let (mut twos, mut fives) = (0u32, 0u32);
    let zero = BigInt::from(0);
    while &d % 2 == zero {
        d /= 2;
        twos += 1;
    }
    while &d % 5 == zero {
        d /= 5;
        fives += 1;
    }
    assert_eq!(d, BigInt::from(1), "{x} has no finite decimal expansion");
    let k = twos.max(fives);
    let scaled = x.numer() * BigInt::from(10).pow(k) / x.denom();
    let negative = scaled < zero;
    let digits = format!("{:0>width$}", if negative { -scaled } else { scaled }.to_string(), width = k as usize + 1);
    let (int, frac) = digits.split_at(digits.len() - k as usize);
    let sign = if negative { "-" } else { "" };
    if frac.is_empty() {
        format!("{sign}{int}")
    } else {
        format!("{sign}{int}.{frac}")
    }
}

pub fn names_json(names: &Alternatives) -> Value {
    json!(names.names())
}

pub fn axis_json(names: &Alternatives, axis: &OrdinalAxis) -> Value {
    json!(axis.order().iter().map(|&a| names.name(a)).collect::<Vec<_>>())
}

pub fn positions_json(names: &Alternatives, layout: &CardinalLayout) -> Value {
    let map: serde_json::Map<String, Value> = names
        .names()
        .iter()
        .zip(layout.positions())
        .map(|(n, p)| (n.clone(), Value::String(to_decimal(p))))
        .collect();
    Value::Object(map)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Ordinal,
    Cardinal,
    Unknown,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Ordinal, Mode::Cardinal, Mode::Unknown];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Ordinal => "ordinal-known",
            Mode::Cardinal => "cardinal-known",
            Mode::Unknown => "unknown-positions",
        }
    }
}

fn library(context: &ElicitationContext, truth: &Ranking, robust: bool) -> ElicitReport {
    let mut oracle = make_true_ranking_oracle(truth.clone());
    if robust {
        robust_elicit(&mut oracle, context)
    } else {
        elicit(&mut oracle, context)
    }
    .unwrap()
}

/// Drives `instances` random sessions of `mode` through the API and compares
/// each result body byte for byte with the library's report. Robust polls
/// get a non-single-peaked respondent a third of the time. Returns the
/// number of sessions compared and how many of them fell back, or the
/// first mismatch.
pub async fn equivalence(mode: Mode, instances: usize, seed: u64) -> Result<(usize, usize), String> {
    let api = Api::in_memory();
    let (mut compared, mut fell_back) = (0, 0);
    for k in 0..instances {
        let mut rng = SplitMix64::derive(seed, &[mode as u64, k as u64]);
        let m = 2 + rng.below_usize(15);
        let robust = k % 2 == 1;
        let names = Alternatives::letters(m);
        let axis = random_axis(m, &mut rng);
        let truth = |rng: &mut SplitMix64, sp: Ranking| {
            if robust && m >= 3 && rng.below_usize(3) == 0 {
                perturb_swap(&sp, rng)
            } else {
                sp
            }
        };
        let mut sessions: Vec<(ElicitationContext, Ranking)> = Vec::new();
        let poll = match mode {
            Mode::Ordinal => {
                let t = random_sp_ranking(&axis, &mut rng);
                sessions.push((ElicitationContext::KnownAxis(axis.clone()), truth(&mut rng, t)));
                json!({"name": "eq", "alternatives": names.names(), "mode": mode.name(),
                       "axis": axis_json(&names, &axis), "robust": robust})
            }
            Mode::Cardinal => {
                let instance = random_cardinal_instance(m, &mut rng);
                let t = truth(&mut rng, instance.ranking.clone());
                sessions.push((ElicitationContext::KnownCardinal(instance.layout.clone()), t));
                json!({"name": "eq", "alternatives": names.names(), "mode": mode.name(),
                       "positions": positions_json(&names, &instance.layout), "robust": robust})
            }
            Mode::Unknown => {
                let first = random_sp_ranking(&axis, &mut rng);
                let first = truth(&mut rng, first);
                let second = random_sp_ranking(&axis, &mut rng);
                let second = truth(&mut rng, second);
                // a full sort is exact, so the first ranking becomes the known vote
                sessions.push((ElicitationContext::None, first.clone()));
                sessions.push((ElicitationContext::KnownVote(first), second));
                json!({"name": "eq", "alternatives": names.names(), "mode": mode.name(), "robust": robust})
            }
        };
        let poll_id = api.create(poll).await;
        for (context, truth) in &sessions {
            let (bytes, _) = api.drive_bytes(&poll_id, &names, truth).await;
            let report = library(context, truth, robust);
            fell_back += report.fell_back as usize;
            let expected = serde_json::to_vec(&ReportView::new(&names, &report)).unwrap();
            if bytes != expected {
                return Err(format!(
                    "{} instance {k}: api {} library {}",
                    mode.name(),
                    String::from_utf8_lossy(&bytes),
                    String::from_utf8_lossy(&expected)
                ));
            }
            compared += 1;
        }
    }
    Ok((compared, fell_back))
}
