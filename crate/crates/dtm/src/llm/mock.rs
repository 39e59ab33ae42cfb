//! Minimal in-process HTTP server replaying canned chat-completions bodies,
//! so the full decision pipeline runs offline.

use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

/// The documented rejection, as a bare assistant message. The argument body
/// uses the relaxed notation the protocol tolerates.
pub const CANNED_REJECTION_MESSAGE: &str = r#"{"content": null, "function_call": {"arguments": "{decision:false,reason:'The offered data is expected to provide a profit less than the offer price. Considering the conservative risk preference and low data sensitivity, the potential financial benefit does not justify the cost.'}", "name": "offer_decision"}, "role": "assistant"}"#;

/// The same rejection wrapped in a chat-completions envelope.
pub fn canned_rejection_envelope() -> String {
    format!(
        r#"{{"id":"chatcmpl-mock","object":"chat.completion","choices":[{{"index":0,"message":{},"finish_reason":"function_call"}}]}}"#,
        CANNED_REJECTION_MESSAGE
    )
}

/// An acceptance envelope with the given reason.
pub fn acceptance_envelope(reason: &str) -> String {
    let arguments = serde_json::to_string(&serde_json::json!({
        "decision": true,
        "reason": reason,
    }))
    .expect("arguments serialize");
    format!(
        r#"{{"id":"chatcmpl-mock","object":"chat.completion","choices":[{{"index":0,"message":{{"content":null,"function_call":{{"name":"offer_decision","arguments":{}}},"role":"assistant"}},"finish_reason":"function_call"}}]}}"#,
        serde_json::to_string(&arguments).expect("string serializes")
    )
}

/// One scripted reply.
#[derive(Debug, Clone)]
pub struct MockResponse {
    pub status: u16,
    pub body: String,
    pub delay: Option<Duration>,
}

impl MockResponse {
    pub fn json(body: impl Into<String>) -> MockResponse {
        MockResponse {
            status: 200,
            body: body.into(),
            delay: None,
        }
    }

    pub fn canned_rejection() -> MockResponse {
        MockResponse::json(canned_rejection_envelope())
    }

    pub fn status(status: u16) -> MockResponse {
        MockResponse {
            status,
            body: String::from("{}"),
            delay: None,
        }
    }
}

/// A loopback HTTP server that answers each request with the next scripted
/// response (repeating the last one when the script runs out).
pub struct MockServer {
    addr: String,
    stop: Arc<AtomicBool>,
    requests: Arc<Mutex<Vec<String>>>,
    handle: Option<JoinHandle<()>>,
}

impl MockServer {
    pub fn start(script: Vec<MockResponse>) -> std::io::Result<MockServer> {
        assert!(!script.is_empty(), "mock server needs at least one response");
        let listener = TcpListener::bind("127.0.0.1:0")?;
        listener.set_nonblocking(true)?;
        let addr = format!("http://{}", listener.local_addr()?);
        let stop = Arc::new(AtomicBool::new(false));
        let requests = Arc::new(Mutex::new(Vec::new()));
        let cursor = Arc::new(AtomicUsize::new(0));

        let thread_stop = Arc::clone(&stop);
        let thread_requests = Arc::clone(&requests);
        let handle = std::thread::spawn(move || {
            while !thread_stop.load(Ordering::SeqCst) {
                match listener.accept() {
                    Ok((stream, _)) => {
                        let index = cursor.fetch_add(1, Ordering::SeqCst).min(script.len() - 1);
                        let response = script[index].clone();
                        if let Some(body) = handle_connection(stream, &response) {
                            thread_requests.lock().unwrap().push(body);
                        }
                    }
                    Err(ref e) if e.kind() == std::io::ErrorKind::WouldBlock => {
                        std::thread::sleep(Duration::from_millis(5));
                    }
                    Err(_) => break,
                }
            }
        });

        Ok(MockServer {
            addr,
            stop,
            requests,
            handle: Some(handle),
        })
    }

    /// Base URL to point an [`super::EndpointConfig`] at.
    pub fn base_url(&self) -> String {
        self.addr.clone()
    }

    /// Bodies of the requests received so far.
    pub fn received(&self) -> Vec<String> {
        self.requests.lock().unwrap().clone()
    }
}

impl Drop for MockServer {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        if let Some(handle) = self.handle.take() {
            let _ = handle.join();
        }
    }
}

fn handle_connection(mut stream: TcpStream, response: &MockResponse) -> Option<String> {
    stream
        .set_read_timeout(Some(Duration::from_secs(5)))
        .ok()?;
    let mut buffer = Vec::new();
    let mut chunk = [0u8; 4096];
    let (headers_end, content_length) = loop {
        match stream.read(&mut chunk) {
            Ok(0) => return None,
            Ok(n) => {
                buffer.extend_from_slice(&chunk[..n]);
                if let Some(pos) = find_header_end(&buffer) {
                    let headers = String::from_utf8_lossy(&buffer[..pos]);
                    let length = headers
                        .lines()
                        .find_map(|line| {
                            let (name, value) = line.split_once(':')?;
                            name.eq_ignore_ascii_case("content-length")
                                .then(|| value.trim().parse::<usize>().ok())?
                        })
                        .unwrap_or(0);
                    break (pos + 4, length);
                }
            }
            Err(_) => return None,
        }
    };
    while buffer.len() < headers_end + content_length {
        match stream.read(&mut chunk) {
            Ok(0) => break,
            Ok(n) => buffer.extend_from_slice(&chunk[..n]),
            Err(_) => break,
        }
    }
    let body = String::from_utf8_lossy(&buffer[headers_end..]).to_string();

    if let Some(delay) = response.delay {
        std::thread::sleep(delay);
    }
    let reply = format!(
        "HTTP/1.1 {} {}\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{}",
        response.status,
        status_text(response.status),
        response.body.len(),
        response.body
    );
    let _ = stream.write_all(reply.as_bytes());
    let _ = stream.flush();
    Some(body)
}

fn find_header_end(buffer: &[u8]) -> Option<usize> {
    buffer.windows(4).position(|w| w == b"\r\n\r\n")
}

fn status_text(status: u16) -> &'static str {
    match status {
        200 => "OK",
        401 => "Unauthorized",
        403 => "Forbidden",
        429 => "Too Many Requests",
        500 => "Internal Server Error",
        _ => "Status",
    }
}
