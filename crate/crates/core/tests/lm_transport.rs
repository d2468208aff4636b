//! Scorer transports against scripted scorer processes and a tiny HTTP
//! server: id matching, batching, retries and error reporting.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use csdial::lm::{EchoScorer, HttpScorer, LmError, LmScore, LmScorer, ScorerEndpoint, StdioScorer, Transport};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

fn script() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/fake_scorer.py")
}

fn stdio(mode: &str, timeout_ms: u64, retries: u32) -> StdioScorer {
    let cmd = format!("python3 '{}' '{}'", script().display(), mode);
    StdioScorer::new(cmd, Duration::from_millis(timeout_ms), retries)
}

fn words(text: &str) -> LmScore {
    let n = text.split_whitespace().count() as u64;
    LmScore {
        logprob_sum: -(n as f64),
        num_tokens: n,
    }
}

const TEXTS: [&str; 6] = [
    "hello there",
    "I got a raise today",
    "congrats",
    "what a lovely day it is outside",
    "ok",
    "the doctor will see you now",
];

#[test]
fn stdio_scores_in_request_order() {
    let s = stdio("normal", 5000, 0);
    let got = s.score_batch(&TEXTS).unwrap();
    assert_eq!(got, TEXTS.map(words));
    assert_eq!(s.score("one two three").unwrap(), words("one two three"));
}

#[test]
fn stdio_reordered_replies_are_matched_by_id() {
    let s = stdio("reverse", 5000, 0);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..5 {
        let mut texts = TEXTS.to_vec();
        texts.shuffle(&mut rng);
        let got = s.score_batch(&texts).unwrap();
        let want: Vec<LmScore> = texts.iter().map(|t| words(t)).collect();
        assert_eq!(got, want);
    }
}

#[test]
fn stdio_batch_equals_singles() {
    let s = stdio("normal", 5000, 0);
    let batch = s.score_batch(&TEXTS).unwrap();
    let singles: Vec<LmScore> = TEXTS.iter().map(|t| s.score(t).unwrap()).collect();
    assert_eq!(batch, singles);
}

#[test]
fn stdio_malformed_reply_quotes_payload() {
    let err = stdio("garbage", 5000, 2).score("hi").unwrap_err();
    match &err {
        LmError::Protocol { payload, .. } => assert_eq!(payload, "this is not json"),
        other => panic!("expected protocol error, got {other}"),
    }
}

#[test]
fn stdio_positive_logprob_rejected() {
    let err = stdio("positive", 5000, 0).score("two words").unwrap_err();
    assert!(matches!(err, LmError::Protocol { .. }), "{err}");
    assert!(err.to_string().contains("positive"), "{err}");
}

#[test]
fn stdio_scorer_error_keeps_stream_usable() {
    let s = stdio("reject:forbidden", 5000, 0);
    let err = s.score_batch(&["fine", "forbidden text", "also fine"]).unwrap_err();
    match &err {
        LmError::Scorer { message, .. } => assert_eq!(message, "text too long"),
        other => panic!("expected scorer error, got {other}"),
    }
    assert_eq!(s.score_batch(&["still works"]).unwrap(), vec![words("still works")]);
}

#[test]
fn stdio_timeout_retries_then_gives_up() {
    let started = Instant::now();
    let err = stdio("hang", 300, 1).score("anyone there").unwrap_err();
    match &err {
        LmError::Exhausted { attempts, last } => {
            assert_eq!(*attempts, 2);
            assert!(matches!(**last, LmError::Timeout { .. }), "{last}");
        }
        other => panic!("expected exhausted retries, got {other}"),
    }
    assert!(started.elapsed() < Duration::from_secs(10));
}

#[test]
fn stdio_crash_is_retried_on_a_fresh_process() {
    let dir = tempfile::tempdir().unwrap();
    let marker = dir.path().join("crashed");
    let s = stdio(&format!("crash-once:{}", marker.display()), 5000, 1);
    assert_eq!(s.score("back again").unwrap(), words("back again"));
    assert!(marker.exists());
}

#[test]
fn stdio_crash_reports_stderr() {
    let err = stdio("die", 5000, 1).score("hello").unwrap_err();
    let msg = err.to_string();
    assert!(matches!(err, LmError::Exhausted { attempts: 2, .. }), "{msg}");
    assert!(msg.contains("CUDA out of memory"), "{msg}");
}

#[test]
fn stdio_missing_command_is_transport_error() {
    let s = StdioScorer::new("/nonexistent/scorer-binary", Duration::from_secs(2), 0);
    let err = s.score("hello").unwrap_err();
    let LmError::Exhausted { last, .. } = &err else {
        panic!("expected exhausted retries, got {err}");
    };
    assert!(matches!(**last, LmError::Transport { .. }), "{last}");
}

#[test]
fn empty_text_never_reaches_the_scorer() {
    let s = StdioScorer::new("/nonexistent/scorer-binary", Duration::from_secs(2), 0);
    assert!(matches!(
        s.score_batch(&["ok", ""]),
        Err(LmError::EmptyText { index: 1 })
    ));
}

/// Minimal HTTP/1.1 server; `respond` sees the request body and the
/// 0-based request number and returns status and body.
struct Server {
    base: String,
    bodies: Arc<Mutex<Vec<String>>>,
}

fn serve<F>(respond: F) -> Server
where
    F: Fn(&str, usize) -> (u16, String) + Send + 'static,
{
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let base = format!("http://{}", listener.local_addr().unwrap());
    let bodies = Arc::new(Mutex::new(Vec::new()));
    let seen = bodies.clone();
    let count = AtomicUsize::new(0);
    std::thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(stream) = stream else { continue };
            let mut reader = BufReader::new(stream);
            let mut length = 0usize;
            loop {
                let mut line = String::new();
                if reader.read_line(&mut line).unwrap_or(0) == 0 {
                    break;
                }
                let line = line.trim_end();
                if line.is_empty() {
                    break;
                }
                if let Some((k, v)) = line.split_once(':') {
                    if k.eq_ignore_ascii_case("content-length") {
                        length = v.trim().parse().unwrap_or(0);
                    }
                }
            }
            let mut body = vec![0u8; length];
            if reader.read_exact(&mut body).is_err() {
                continue;
            }
            let body = String::from_utf8_lossy(&body).into_owned();
            seen.lock().unwrap().push(body.clone());
            let (status, reply) = respond(&body, count.fetch_add(1, Ordering::SeqCst));
            let mut stream = reader.into_inner();
            let _ = write!(
                stream,
                "HTTP/1.1 {status} X\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{reply}",
                reply.len()
            );
        }
    });
    Server { base, bodies }
}

fn score_json(req: &Value) -> Value {
    let s = words(req["text"].as_str().unwrap());
    json!({"id": req["id"], "logprob_sum": s.logprob_sum, "num_tokens": s.num_tokens})
}

/// Scores requests, echoing the request shape and reversing batches.
fn scoring(body: &str, _: usize) -> (u16, String) {
    let v: Value = serde_json::from_str(body).unwrap();
    let out = match v {
        Value::Array(items) => Value::Array(items.iter().rev().map(score_json).collect()),
        single => score_json(&single),
    };
    (200, out.to_string())
}

#[test]
fn http_single_is_object_batch_is_array() {
    let server = serve(scoring);
    let s = HttpScorer::new(&server.base, Duration::from_secs(5), 0).unwrap();
    assert_eq!(s.score("just one").unwrap(), words("just one"));
    assert_eq!(s.score_batch(&TEXTS).unwrap(), TEXTS.map(words));
    let bodies = server.bodies.lock().unwrap();
    let first: Value = serde_json::from_str(&bodies[0]).unwrap();
    assert_eq!(first, json!({"id": "0", "text": "just one"}));
    let second: Value = serde_json::from_str(&bodies[1]).unwrap();
    assert_eq!(second.as_array().map(Vec::len), Some(TEXTS.len()));
}

#[test]
fn http_batch_equals_singles() {
    let server = serve(scoring);
    let s = HttpScorer::new(&server.base, Duration::from_secs(5), 0).unwrap();
    let batch = s.score_batch(&TEXTS).unwrap();
    let singles: Vec<LmScore> = TEXTS.iter().map(|t| s.score(t).unwrap()).collect();
    assert_eq!(batch, singles);
}

#[test]
fn http_server_error_is_retried() {
    let server = serve(|body, n| {
        if n < 2 {
            (503, "warming up".into())
        } else {
            scoring(body, n)
        }
    });
    let s = HttpScorer::new(&server.base, Duration::from_secs(5), 2).unwrap();
    assert_eq!(s.score("third time").unwrap(), words("third time"));
    assert_eq!(server.bodies.lock().unwrap().len(), 3);
}

#[test]
fn http_persistent_error_gives_up() {
    let server = serve(|_, _| (500, "boom".into()));
    let s = HttpScorer::new(&server.base, Duration::from_secs(5), 1).unwrap();
    let err = s.score("hello").unwrap_err();
    assert!(matches!(err, LmError::Exhausted { attempts: 2, .. }), "{err}");
    assert!(err.to_string().contains("boom"), "{err}");
}

#[test]
fn http_unknown_id_is_protocol_error() {
    let server = serve(|_, _| {
        (
            200,
            json!({"id": "zzz", "logprob_sum": -1.0, "num_tokens": 1}).to_string(),
        )
    });
    let s = HttpScorer::new(&server.base, Duration::from_secs(5), 3).unwrap();
    let err = s.score("hello").unwrap_err();
    assert!(matches!(err, LmError::Protocol { .. }), "{err}");
    // Protocol errors are not retried.
    assert_eq!(server.bodies.lock().unwrap().len(), 1);
}

#[test]
fn http_timeout() {
    let server = serve(|body, n| {
        std::thread::sleep(Duration::from_millis(1500));
        scoring(body, n)
    });
    let s = HttpScorer::new(&server.base, Duration::from_millis(200), 0).unwrap();
    let err = s.score("slow").unwrap_err();
    let LmError::Exhausted { last, .. } = &err else {
        panic!("expected exhausted retries, got {err}");
    };
    assert!(matches!(**last, LmError::Timeout { .. }), "{last}");
}

#[test]
fn endpoint_connects_to_each_transport() {
    let cmd = format!("stdio:python3 '{}' normal", script().display());
    let ep: ScorerEndpoint = cmd.parse().unwrap();
    assert!(matches!(ep.transport, Transport::Stdio(_)));
    let scorer = ep.connect().unwrap();
    assert_eq!(scorer.score("a b c d").unwrap(), words("a b c d"));

    let server = serve(scoring);
    let scorer = server.base.parse::<ScorerEndpoint>().unwrap().connect().unwrap();
    assert_eq!(scorer.score("a b").unwrap(), words("a b"));

    let echo = "echo".parse::<ScorerEndpoint>().unwrap().connect().unwrap();
    let s = echo.score("Hi, I want to find a doctor").unwrap();
    assert_eq!((s.logprob_sum, s.num_tokens), (-8.0, 8));
    assert!("null".parse::<ScorerEndpoint>().unwrap().connect().unwrap().is_null());
}

#[test]
fn echo_batch_alignment() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut texts = TEXTS.to_vec();
    for _ in 0..10 {
        texts.shuffle(&mut rng);
        let batch = EchoScorer.score_batch(&texts).unwrap();
        for (t, s) in texts.iter().zip(batch) {
            assert_eq!(s, EchoScorer.score(t).unwrap());
        }
    }
}
