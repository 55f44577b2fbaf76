//! Remote generator/reward clients exercised against a local stub server.

use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use hgs_core::generator::{Generator, GeneratorError, SamplingParams, StepTermination};
use hgs_core::label::RewardLabel;
use hgs_core::reward::{RewardError, RewardModel, RewardRequest};

use hgs::remote::{RemoteConfig, RemoteGenerator, RemoteRewardModel};

/// Minimal HTTP stub: answers every POST on one listener with responses
/// chosen by the handler, which also sees the request body.
fn spawn_stub<F>(handler: F) -> String
where
    F: Fn(usize, &str) -> (u16, String) + Send + 'static,
{
    let listener = TcpListener::bind("127.0.0.1:0").expect("bind stub");
    let addr = listener.local_addr().unwrap();
    let hits = AtomicUsize::new(0);
    std::thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            let hit = hits.fetch_add(1, Ordering::SeqCst);
            let body = read_request_body(&mut stream);
            let (status, response_body) = handler(hit, &body);
            let reason = if status == 200 { "OK" } else { "ERR" };
            let response = format!(
                "HTTP/1.1 {status} {reason}\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{response_body}",
                response_body.len()
            );
            let _ = stream.write_all(response.as_bytes());
        }
    });
    format!("http://{addr}")
}

fn read_request_body(stream: &mut TcpStream) -> String {
    stream
        .set_read_timeout(Some(Duration::from_secs(2)))
        .unwrap();
    let mut buf = Vec::new();
    let mut chunk = [0u8; 1024];
    let header_end;
    loop {
        let n = stream.read(&mut chunk).unwrap_or(0);
        if n == 0 {
            return String::new();
        }
        buf.extend_from_slice(&chunk[..n]);
        if let Some(pos) = find_header_end(&buf) {
            header_end = pos;
            break;
        }
    }
    let headers = String::from_utf8_lossy(&buf[..header_end]).to_lowercase();
    let content_length: usize = headers
        .lines()
        .find_map(|l| l.strip_prefix("content-length:"))
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(0);
    let mut body = buf[header_end + 4..].to_vec();
    while body.len() < content_length {
        let n = stream.read(&mut chunk).unwrap_or(0);
        if n == 0 {
            break;
        }
        body.extend_from_slice(&chunk[..n]);
    }
    String::from_utf8_lossy(&body).into_owned()
}

fn find_header_end(buf: &[u8]) -> Option<usize> {
    buf.windows(4).position(|w| w == b"\r\n\r\n")
}

fn fast_config(url: String) -> RemoteConfig {
    let mut config = RemoteConfig::new(url);
    config.retry_backoff = Duration::from_millis(5);
    config.timeout = Duration::from_secs(5);
    config
}

fn state(parts: &[&str]) -> Vec<String> {
    parts.iter().map(|s| s.to_string()).collect()
}

#[test]
fn completion_returns_the_body_text() {
    let url = spawn_stub(|_, _| (200, r#"{"text": "full tail. The answer is: 5."}"#.into()));
    let mut generator = RemoteGenerator::new(fast_config(url), "\n", vec!["<|eot|>".into()]);
    let text = generator
        .complete(&state(&["Q?"]), &SamplingParams::default(), 0)
        .unwrap();
    assert_eq!(text, "full tail. The answer is: 5.");
    assert_eq!(generator.stats().requests, 1);
    assert_eq!(generator.stats().retries, 0);
}

#[test]
fn next_step_reappends_the_stripped_delimiter() {
    let url = spawn_stub(|_, body| {
        // The wire request must carry the delimiter as a stop sequence.
        let request: serde_json::Value = serde_json::from_str(body).unwrap();
        assert!(request["stop"]
            .as_array()
            .unwrap()
            .iter()
            .any(|s| s == "\n"));
        assert!(request["prompt"].as_str().unwrap().starts_with("Q?"));
        (200, r#"{"text": "step one"}"#.into())
    });
    let mut generator = RemoteGenerator::new(fast_config(url), "\n", vec!["<|eot|>".into()]);
    let step = generator
        .next_step(&state(&["Q?"]), &SamplingParams::default(), 0)
        .unwrap();
    assert_eq!(step.text, "step one\n");
    assert_eq!(step.terminated_by, StepTermination::Delimiter);
}

#[test]
fn next_step_detects_eos() {
    let url = spawn_stub(|_, _| (200, r#"{"text": "The answer is: 9. <|eot|>"}"#.into()));
    let mut generator = RemoteGenerator::new(fast_config(url), "\n", vec!["<|eot|>".into()]);
    let step = generator
        .next_step(&state(&["Q?"]), &SamplingParams::default(), 0)
        .unwrap();
    assert_eq!(step.terminated_by, StepTermination::Eos);
    assert_eq!(step.text, "The answer is: 9. <|eot|>");
}

#[test]
fn transient_failures_are_retried_and_counted() {
    let url = spawn_stub(|hit, _| {
        if hit < 2 {
            (503, r#"{"error": "warming up"}"#.into())
        } else {
            (200, r#"{"text": "ok"}"#.into())
        }
    });
    let mut generator = RemoteGenerator::new(fast_config(url), "\n", vec![]);
    let text = generator
        .complete(&state(&["Q?"]), &SamplingParams::default(), 0)
        .unwrap();
    assert_eq!(text, "ok");
    let stats = generator.stats();
    assert_eq!(stats.requests, 3);
    assert_eq!(stats.retries, 2);
}

#[test]
fn client_errors_do_not_retry() {
    let url = spawn_stub(|_, _| (404, "not here".into()));
    let mut generator = RemoteGenerator::new(fast_config(url), "\n", vec![]);
    let err = generator
        .complete(&state(&["Q?"]), &SamplingParams::default(), 0)
        .unwrap_err();
    match err {
        GeneratorError::Remote { status, message } => {
            assert_eq!(status, Some(404));
            assert!(message.contains("not here"));
        }
        other => panic!("unexpected error {other:?}"),
    }
    assert_eq!(generator.stats().requests, 1);
}

#[test]
fn retries_give_up_after_the_budget() {
    let url = spawn_stub(|_, _| (500, "broken".into()));
    let mut config = fast_config(url);
    config.max_retries = 2;
    let mut generator = RemoteGenerator::new(config, "\n", vec![]);
    let err = generator
        .complete(&state(&["Q?"]), &SamplingParams::default(), 0)
        .unwrap_err();
    assert!(matches!(
        err,
        GeneratorError::Remote {
            status: Some(500),
            ..
        }
    ));
    assert_eq!(generator.stats().requests, 3);
    assert_eq!(generator.stats().retries, 2);
}

#[test]
fn reward_labels_map_strings_and_integers() {
    let url = spawn_stub(|hit, body| {
        let request: serde_json::Value = serde_json::from_str(body).unwrap();
        assert!(request.get("previous_data").is_some());
        assert!(request.get("step").is_some());
        let body = match hit {
            0 => r#"{"label": "negative"}"#,
            1 => r#"{"label": "neutral"}"#,
            2 => r#"{"label": "positive"}"#,
            3 => r#"{"label": 1}"#,
            4 => r#"{"label": 0}"#,
            _ => r#"{"label": -1}"#,
        };
        (200, body.into())
    });
    let mut model = RemoteRewardModel::new(fast_config(url));
    let request = RewardRequest::new("prev", "step\n");
    let expected = [
        RewardLabel::Negative,
        RewardLabel::Neutral,
        RewardLabel::Positive,
        RewardLabel::Positive,
        RewardLabel::Neutral,
        RewardLabel::Negative,
    ];
    for want in expected {
        assert_eq!(model.score_step(&request).unwrap(), want);
    }
}

#[test]
fn unmappable_labels_fail_loudly() {
    let url = spawn_stub(|hit, _| {
        let body = if hit == 0 {
            r#"{"label": "great"}"#
        } else {
            r#"{"score": 0.9}"#
        };
        (200, body.into())
    });
    let mut model = RemoteRewardModel::new(fast_config(url));
    let request = RewardRequest::new("prev", "step\n");
    for _ in 0..2 {
        let err = model.score_step(&request).unwrap_err();
        assert!(matches!(err, RewardError::MalformedResponse { .. }));
    }
}

#[test]
fn auth_token_is_forwarded() {
    let url = spawn_stub(|_, _| (200, r#"{"text": "ok"}"#.into()));
    // The stub ignores headers; this only checks the client accepts a
    // token without breaking the request path.
    let mut config = fast_config(url);
    config.auth_token = Some("secret-token".into());
    let mut generator = RemoteGenerator::new(config, "\n", vec![]);
    assert!(generator
        .complete(&state(&["Q?"]), &SamplingParams::default(), 0)
        .is_ok());
}
