//! Wire-protocol tests against a minimal in-process HTTP server.

use std::io::{Read, Write};
use std::net::TcpListener;
use std::time::Duration;

use hearth_core::llm::{Backend, ChatMessage, GatewayError, GenerationParams, HttpBackend};
use hearth_core::prefs::{Embedder, HttpEmbedder};

/// One-shot HTTP server: reads a request, hands the body to `respond`, and
/// writes the returned JSON back. Returns the bound address.
fn serve_once(respond: impl FnOnce(String) -> String + Send + 'static) -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let address = format!("http://{}", listener.local_addr().unwrap());
    std::thread::spawn(move || {
        let (mut stream, _) = listener.accept().unwrap();
        let mut buffer = Vec::new();
        let mut chunk = [0u8; 4096];
        let body = loop {
            let n = stream.read(&mut chunk).unwrap();
            buffer.extend_from_slice(&chunk[..n]);
            let text = String::from_utf8_lossy(&buffer).to_string();
            if let Some(split) = text.find("\r\n\r\n") {
                let headers = &text[..split];
                let length: usize = headers
                    .lines()
                    .find_map(|line| line.to_ascii_lowercase().strip_prefix("content-length:").map(str::trim).map(String::from))
                    .and_then(|v| v.parse().ok())
                    .unwrap_or(0);
                let body = &text[split + 4..];
                if body.len() >= length {
                    break body[..length].to_string();
                }
            }
            if n == 0 {
                break String::new();
            }
        };
        let reply = respond(body);
        let response = format!(
            "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{}",
            reply.len(),
            reply
        );
        stream.write_all(response.as_bytes()).unwrap();
    });
    address
}

#[test]
fn chat_backend_round_trips_through_the_wire_protocol() {
    // The stub echoes the last user message back as the completion.
    let address = serve_once(|body| {
        let request: serde_json::Value = serde_json::from_str(&body).unwrap();
        assert_eq!(request["model"], "test-model");
        assert_eq!(request["max_tokens"], 300);
        assert_eq!(request["temperature"], 0.2);
        assert_eq!(request["min_p"], 0.05);
        let content = request["messages"][1]["content"].as_str().unwrap().to_string();
        serde_json::json!({
            "choices": [{"message": {"role": "assistant", "content": content}}]
        })
        .to_string()
    });
    let backend = HttpBackend::new(address, "test-model", None, Duration::from_secs(5));
    let messages = [
        ChatMessage::system("you are a test"),
        ChatMessage::user("echo me"),
    ];
    let reply = backend
        .complete(&messages, &GenerationParams::default())
        .unwrap();
    assert_eq!(reply, "echo me");
}

#[test]
fn unreachable_server_is_a_transport_error() {
    // Port 9 (discard) is almost certainly closed.
    let backend = HttpBackend::new(
        "http://127.0.0.1:9",
        "test-model",
        None,
        Duration::from_millis(300),
    );
    let messages = [ChatMessage::system("sys"), ChatMessage::user("hi")];
    let error = backend
        .complete(&messages, &GenerationParams::default())
        .unwrap_err();
    assert!(matches!(error, GatewayError::Transport { .. }));
}

#[test]
fn http_embedder_sends_texts_and_reads_vectors() {
    let address = serve_once(|body| {
        let request: serde_json::Value = serde_json::from_str(&body).unwrap();
        let inputs = request["inputs"].as_array().unwrap();
        assert_eq!(inputs.len(), 2);
        serde_json::json!([[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]]).to_string()
    });
    let embedder = HttpEmbedder::new(address, 4, Duration::from_secs(5));
    let vectors = embedder.embed_batch(&["first", "second"]).unwrap();
    assert_eq!(vectors.len(), 2);
    assert_eq!(vectors[0], vec![1.0, 0.0, 0.0, 0.0]);
}

#[test]
fn http_embedder_rejects_wrong_dimension() {
    let address = serve_once(|_| serde_json::json!([[1.0, 2.0]]).to_string());
    let embedder = HttpEmbedder::new(address, 4, Duration::from_secs(5));
    assert!(embedder.embed_batch(&["text"]).is_err());
}
