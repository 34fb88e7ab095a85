//! HttpBackend against a scripted local server.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::thread;

use ledma_core::llm::{BackendError, ChatBackend, HttpBackend, LlmConfig};
use ledma_core::rng::from_seed;
use serde_json::Value;

struct Stub {
    url: String,
    requests: Arc<Mutex<Vec<(String, Value)>>>,
}

/// Serves one scripted `(status, body)` per connection, then stops.
fn stub(script: Vec<(u16, String)>) -> Stub {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1/chat/completions", listener.local_addr().unwrap());
    let requests = Arc::new(Mutex::new(Vec::new()));
    let seen = Arc::clone(&requests);
    thread::spawn(move || {
        for (status, body) in script {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut auth = String::new();
            let mut len = 0;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                let line = line.trim_end();
                if line.is_empty() {
                    break;
                }
                let lower = line.to_ascii_lowercase();
                if let Some(v) = lower.strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
                if lower.starts_with("authorization:") {
                    auth = line["authorization:".len()..].trim().to_string();
                }
            }
            let mut buf = vec![0; len];
            reader.read_exact(&mut buf).unwrap();
            seen.lock().unwrap().push((auth, serde_json::from_slice(&buf).unwrap()));
            let mut stream = stream;
            write!(
                stream,
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            )
            .unwrap();
        }
    });
    Stub { url, requests }
}

fn completion(text: &str) -> String {
    serde_json::json!({"choices": [{"message": {"role": "assistant", "content": text}}]}).to_string()
}

fn config(url: &str, key_env: &str) -> LlmConfig {
    std::env::set_var(key_env, "sk-test");
    LlmConfig {
        endpoint: url.to_string(),
        api_key_env: key_env.to_string(),
        backoff_ms: 1,
        timeout_secs: 5.0,
        ..LlmConfig::default()
    }
}

#[test]
fn canned_reply() {
    let s = stub(vec![(200, completion("0.1,0.2\n0.3,0.4"))]);
    let mut b = HttpBackend::new(config(&s.url, "LEDMA_TEST_KEY_A")).unwrap();
    let text = b.complete("hello", &mut from_seed(0)).unwrap();
    assert_eq!(text, "0.1,0.2\n0.3,0.4");
    let reqs = s.requests.lock().unwrap();
    assert_eq!(reqs.len(), 1);
    assert_eq!(reqs[0].0, "Bearer sk-test");
    let body = &reqs[0].1;
    assert_eq!(body["model"], "gpt-3.5-turbo");
    assert_eq!(body["temperature"], 1.0);
    assert_eq!(body["messages"][0]["role"], "system");
    assert_eq!(body["messages"][1]["content"], "hello");
}

#[test]
fn rate_limit_then_success() {
    let s = stub(vec![(429, "{}".into()), (200, completion("ok"))]);
    let mut b = HttpBackend::new(config(&s.url, "LEDMA_TEST_KEY_B")).unwrap();
    assert_eq!(b.complete("p", &mut from_seed(0)).unwrap(), "ok");
    assert_eq!(b.calls, 2);
}

#[test]
fn persistent_server_error_gives_up() {
    let s = stub(vec![(500, "{}".into()); 4]);
    let mut b = HttpBackend::new(config(&s.url, "LEDMA_TEST_KEY_C")).unwrap();
    let err = b.complete("p", &mut from_seed(0)).unwrap_err();
    assert!(matches!(err, BackendError::Transport(_)), "{err:?}");
    // One call plus max_retries retries.
    assert_eq!(b.calls, 4);
}

#[test]
fn client_error_is_not_retried() {
    let s = stub(vec![(401, r#"{"error":"bad key"}"#.into())]);
    let mut b = HttpBackend::new(config(&s.url, "LEDMA_TEST_KEY_D")).unwrap();
    let err = b.complete("p", &mut from_seed(0)).unwrap_err();
    assert!(matches!(err, BackendError::Status(401, _)), "{err:?}");
    assert_eq!(b.calls, 1);
}

#[test]
fn missing_content_is_invalid() {
    let s = stub(vec![(200, r#"{"choices": []}"#.into())]);
    let mut b = HttpBackend::new(config(&s.url, "LEDMA_TEST_KEY_E")).unwrap();
    let err = b.complete("p", &mut from_seed(0)).unwrap_err();
    assert!(matches!(err, BackendError::InvalidResponse(_)));
}

#[test]
fn missing_key_is_config_error() {
    let cfg = LlmConfig {
        api_key_env: "LEDMA_TEST_KEY_NEVER_SET".into(),
        ..LlmConfig::default()
    };
    assert!(matches!(HttpBackend::new(cfg), Err(BackendError::Config(_))));
}
