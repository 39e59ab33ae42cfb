//! Client for an OpenAI-compatible chat-completions endpoint speaking the
//! `offer_decision` function-calling protocol, plus an offline mock server
//! for tests and examples.

pub mod mock;

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::agents::{AgentProfile, DecisionRequest, DecisionResponse, ValueEstimate};
use crate::currency::Currency;
use crate::error::LlmError;

pub const ENV_API_KEY: &str = "DTM_LLM_API_KEY";
pub const ENV_BASE_URL: &str = "DTM_LLM_BASE_URL";
pub const DEFAULT_BASE_URL: &str = "https://api.openai.com";
pub const DEFAULT_MODEL: &str = "gpt-4-1106-preview";
pub const DEFAULT_TIMEOUT_S: u64 = 30;
pub const DEFAULT_RETRIES: u32 = 2;

/// Market and traffic context sent as the system message: the common-sense
/// grounding the model decides with.
pub const SYSTEM_PREAMBLE: &str = "You are a trading participant in a road-traffic data market. \
Signalized intersections serve two phase groups (north-south and east-west); granting an approach \
more green time discharges its queue faster and lowers waiting time, at the cost of the crossing \
phase. Connected vehicles sell accident observations (location, time, severity, observed flow); a \
signal controller buys data it expects to reduce average waiting time, and sellers pay a fixed fee \
per proposal. Prices are in the market's currency, worth one expected second of saved average \
waiting time each. Weigh the stated risk preference and data-value sensitivity, then answer by \
calling the offer_decision function.";

/// Connection settings for the chat-completions endpoint. The API key is
/// read from the environment and never serialized or printed.
#[derive(Clone)]
pub struct EndpointConfig {
    pub base_url: String,
    pub api_key: Option<String>,
    pub model: String,
    pub timeout_s: u64,
    pub retries: u32,
    pub temperature: f32,
}

impl Default for EndpointConfig {
    fn default() -> Self {
        EndpointConfig {
            base_url: std::env::var(ENV_BASE_URL).unwrap_or_else(|_| DEFAULT_BASE_URL.to_string()),
            api_key: std::env::var(ENV_API_KEY).ok(),
            model: DEFAULT_MODEL.to_string(),
            timeout_s: DEFAULT_TIMEOUT_S,
            retries: DEFAULT_RETRIES,
            temperature: 0.0,
        }
    }
}

impl std::fmt::Debug for EndpointConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EndpointConfig")
            .field("base_url", &self.base_url)
            .field("api_key", &self.api_key.as_ref().map(|_| "<redacted>"))
            .field("model", &self.model)
            .field("timeout_s", &self.timeout_s)
            .field("retries", &self.retries)
            .field("temperature", &self.temperature)
            .finish()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertySchema {
    #[serde(rename = "type")]
    pub kind: String,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionProperties {
    pub decision: PropertySchema,
    pub reason: PropertySchema,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionParameters {
    #[serde(rename = "type")]
    pub kind: String,
    pub properties: FunctionProperties,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionSchema {
    pub name: String,
    pub description: String,
    pub parameters: FunctionParameters,
    pub required: Vec<String>,
}

/// The canonical `offer_decision` schema sent with every request.
pub fn offer_decision_schema() -> FunctionSchema {
    FunctionSchema {
        name: "offer_decision".to_string(),
        description: "Decide whether to accept the offer based on the context and available information."
            .to_string(),
        parameters: FunctionParameters {
            kind: "object".to_string(),
            properties: FunctionProperties {
                decision: PropertySchema {
                    kind: "boolean".to_string(),
                    description:
                        "Acceptance of the offer, where True indicates acceptance and False indicates rejection."
                            .to_string(),
                },
                reason: PropertySchema {
                    kind: "string".to_string(),
                    description: "a concise reason why make this decision".to_string(),
                },
            },
        },
        required: vec!["content".to_string()],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionCallTarget {
    pub name: String,
}

/// A complete chat-completions request body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub functions: Vec<FunctionSchema>,
    pub function_call: FunctionCallTarget,
    pub temperature: f32,
}

impl ChatRequest {
    pub fn to_body(&self) -> String {
        serde_json::to_string(self).expect("request serializes")
    }
}

/// The extracted function call of a response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionCall {
    pub name: String,
    pub arguments: String,
}

/// Raw response body plus the function call pulled out of it, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct ChatResponse {
    pub raw: serde_json::Value,
    pub function_call: Option<FunctionCall>,
}

impl ChatResponse {
    /// Accepts either a full chat-completions envelope or a bare assistant
    /// message object.
    pub fn from_body(body: &str) -> Result<ChatResponse, LlmError> {
        let raw: serde_json::Value = serde_json::from_str(body)
            .map_err(|e| LlmError::MalformedResponse(format!("body is not JSON: {e}")))?;
        let message = raw
            .get("choices")
            .and_then(|c| c.get(0))
            .and_then(|c| c.get("message"))
            .unwrap_or(&raw);
        let function_call = message.get("function_call").map(|fc| FunctionCall {
            name: fc
                .get("name")
                .and_then(|n| n.as_str())
                .unwrap_or_default()
                .to_string(),
            arguments: fc
                .get("arguments")
                .and_then(|a| a.as_str())
                .unwrap_or_default()
                .to_string(),
        });
        Ok(ChatResponse { raw, function_call })
    }
}

/// Builds the deterministic request for one offer decision: fixed system
/// preamble, the request fields as the user message, and the
/// `offer_decision` schema.
pub fn build_prompt(
    endpoint: &EndpointConfig,
    profile: &AgentProfile,
    value: &ValueEstimate,
    offer_price: Currency,
) -> ChatRequest {
    let request = DecisionRequest::new(profile, value, offer_price);
    ChatRequest {
        model: endpoint.model.clone(),
        messages: vec![
            ChatMessage {
                role: "system".to_string(),
                content: SYSTEM_PREAMBLE.to_string(),
            },
            ChatMessage {
                role: "user".to_string(),
                content: request.to_prompt_json(),
            },
        ],
        functions: vec![offer_decision_schema()],
        function_call: FunctionCallTarget {
            name: "offer_decision".to_string(),
        },
        temperature: endpoint.temperature,
    }
}

/// One POST to `{base_url}/v1/chat/completions` with bearer auth, a hard
/// timeout, and fixed-backoff retries on transport faults. 4xx statuses are
/// never retried.
pub fn call(endpoint: &EndpointConfig, request: &ChatRequest) -> Result<ChatResponse, LlmError> {
    let api_key = endpoint
        .api_key
        .as_ref()
        .ok_or_else(|| LlmError::Auth(format!("no API key; set {ENV_API_KEY}")))?;
    let url = format!(
        "{}/v1/chat/completions",
        endpoint.base_url.trim_end_matches('/')
    );
    let client = reqwest::blocking::Client::builder()
        .timeout(Duration::from_secs(endpoint.timeout_s))
        .build()
        .map_err(|e| LlmError::Transport(e.to_string()))?;

    let attempts = endpoint.retries + 1;
    let mut last_error = LlmError::Transport("no attempt made".into());
    for attempt in 0..attempts {
        if attempt > 0 {
            std::thread::sleep(Duration::from_millis(200));
        }
        let sent = client
            .post(&url)
            .bearer_auth(api_key)
            .header("content-type", "application/json")
            .body(request.to_body())
            .send();
        match sent {
            Ok(response) => {
                let status = response.status();
                let body = response.text().unwrap_or_default();
                if status.is_success() {
                    return ChatResponse::from_body(&body);
                }
                match status.as_u16() {
                    401 | 403 => return Err(LlmError::Auth(format!("status {status}"))),
                    429 => return Err(LlmError::RateLimited),
                    code if (400..500).contains(&code) => {
                        return Err(LlmError::Transport(format!("status {status}")))
                    }
                    _ => last_error = LlmError::Transport(format!("status {status}")),
                }
            }
            Err(e) if e.is_timeout() => last_error = LlmError::Timeout(attempt + 1),
            Err(e) => last_error = LlmError::Transport(e.to_string()),
        }
    }
    Err(last_error)
}

/// Extracts and parses the `offer_decision` call of a response.
///
/// Arguments are accepted both as strict JSON and in the relaxed notation
/// models sometimes emit (`{decision:false,reason:'...'}` with bare keys and
/// single quotes).
pub fn parse_decision(response: &ChatResponse) -> Result<DecisionResponse, LlmError> {
    let call = response
        .function_call
        .as_ref()
        .ok_or_else(|| LlmError::MalformedResponse("no function_call in response".into()))?;
    if call.name != "offer_decision" {
        return Err(LlmError::MalformedResponse(format!(
            "unexpected function name {:?}",
            call.name
        )));
    }
    let (decision, reason) = parse_arguments(&call.arguments)?;
    if reason.is_empty() {
        return Err(LlmError::MalformedResponse("empty reason".into()));
    }
    Ok(DecisionResponse { decision, reason })
}

fn parse_arguments(arguments: &str) -> Result<(bool, String), LlmError> {
    if let Ok(value) = serde_json::from_str::<serde_json::Value>(arguments) {
        let decision = value.get("decision").and_then(|d| d.as_bool());
        let reason = value.get("reason").and_then(|r| r.as_str());
        if let (Some(decision), Some(reason)) = (decision, reason) {
            return Ok((decision, reason.to_string()));
        }
        return Err(LlmError::MalformedResponse(
            "arguments lack decision or reason".into(),
        ));
    }
    parse_relaxed_arguments(arguments)
        .ok_or_else(|| LlmError::MalformedResponse("unparseable arguments".into()))
}

/// Fallback parser for unquoted-key, single-quoted-string argument bodies.
fn parse_relaxed_arguments(arguments: &str) -> Option<(bool, String)> {
    let decision = scan_bool_after_key(arguments, "decision")?;
    let reason = scan_string_after_key(arguments, "reason")?;
    Some((decision, reason))
}

fn position_after_key(text: &str, key: &str) -> Option<usize> {
    let start = text.find(key)? + key.len();
    let rest = &text[start..];
    let colon = rest.find(':')?;
    Some(start + colon + 1)
}

fn scan_bool_after_key(text: &str, key: &str) -> Option<bool> {
    let at = position_after_key(text, key)?;
    let rest = text[at..].trim_start();
    if rest.starts_with("true") || rest.starts_with("True") {
        Some(true)
    } else if rest.starts_with("false") || rest.starts_with("False") {
        Some(false)
    } else {
        None
    }
}

fn scan_string_after_key(text: &str, key: &str) -> Option<String> {
    let at = position_after_key(text, key)?;
    let rest = text[at..].trim_start();
    let mut chars = rest.chars();
    let quote = chars.next()?;
    if quote != '\'' && quote != '"' {
        return None;
    }
    let mut out = String::new();
    let mut escaped = false;
    for c in chars {
        if escaped {
            out.push(c);
            escaped = false;
        } else if c == '\\' {
            escaped = true;
        } else if c == quote {
            return Some(out);
        } else {
            out.push(c);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::{RiskPreference, Role, ValueMethod, ValueSensitivity};

    fn controller() -> AgentProfile {
        AgentProfile {
            id: "controller".into(),
            role: Role::Controller,
            risk: RiskPreference::Conservative,
            sensitivity: ValueSensitivity::Low,
            endowment: Currency::from_major(100.0),
        }
    }

    fn estimate(seconds: f64) -> ValueEstimate {
        ValueEstimate::from_seconds(seconds, 1.0, ValueMethod::Oracle, 230)
    }

    #[test]
    fn schema_serializes_to_the_canonical_form() {
        let expected = concat!(
            r#"{"name":"offer_decision","description":"Decide whether to accept the offer "#,
            r#"based on the context and available information.","parameters":{"type":"object","#,
            r#""properties":{"decision":{"type":"boolean","description":"Acceptance of the offer, "#,
            r#"where True indicates acceptance and False indicates rejection."},"reason":"#,
            r#"{"type":"string","description":"a concise reason why make this decision"}}},"#,
            r#""required":["content"]}"#
        );
        assert_eq!(serde_json::to_string(&offer_decision_schema()).unwrap(), expected);
    }

    #[test]
    fn prompt_building_is_deterministic() {
        let endpoint = EndpointConfig {
            api_key: Some("k".into()),
            ..EndpointConfig::default()
        };
        let a = build_prompt(&endpoint, &controller(), &estimate(10.0), Currency::from_major(12.0));
        let b = build_prompt(&endpoint, &controller(), &estimate(10.0), Currency::from_major(12.0));
        assert_eq!(a.to_body(), b.to_body());
        assert!(a.to_body().contains("decrease average delay by 10 seconds"));
        assert!(a.to_body().contains("offered at 12 dollars"));
        assert_eq!(a.model, DEFAULT_MODEL);
        assert_eq!(a.temperature, 0.0);
    }

    #[test]
    fn parses_the_documented_rejection_verbatim() {
        let response = ChatResponse::from_body(mock::CANNED_REJECTION_MESSAGE).unwrap();
        let decision = parse_decision(&response).unwrap();
        assert!(!decision.decision);
        assert!(decision.reason.starts_with("The offered data is expected"));
    }

    #[test]
    fn parses_strict_json_arguments() {
        let body = r#"{"choices":[{"message":{"role":"assistant","content":null,
            "function_call":{"name":"offer_decision","arguments":"{\"decision\":true,\"reason\":\"ok\"}"}}}]}"#;
        let response = ChatResponse::from_body(body).unwrap();
        let decision = parse_decision(&response).unwrap();
        assert!(decision.decision);
        assert_eq!(decision.reason, "ok");
    }

    #[test]
    fn content_only_response_is_malformed() {
        let body = r#"{"choices":[{"message":{"role":"assistant","content":"plain text"}}]}"#;
        let response = ChatResponse::from_body(body).unwrap();
        assert!(matches!(
            parse_decision(&response),
            Err(LlmError::MalformedResponse(_))
        ));
    }

    #[test]
    fn wrong_function_name_is_malformed() {
        let body = r#"{"function_call":{"name":"other","arguments":"{\"decision\":true,\"reason\":\"x\"}"}}"#;
        let response = ChatResponse::from_body(body).unwrap();
        assert!(parse_decision(&response).is_err());
    }

    #[test]
    fn relaxed_arguments_handle_escapes() {
        let (d, r) = parse_relaxed_arguments(r"{decision:true,reason:'it\'s fine'}").unwrap();
        assert!(d);
        assert_eq!(r, "it's fine");
    }

    #[test]
    fn missing_key_fails_before_any_io() {
        let endpoint = EndpointConfig {
            api_key: None,
            base_url: "http://127.0.0.1:1".into(),
            ..EndpointConfig::default()
        };
        let request = build_prompt(&endpoint, &controller(), &estimate(1.0), Currency::from_major(1.0));
        assert!(matches!(call(&endpoint, &request), Err(LlmError::Auth(_))));
    }

    #[test]
    fn debug_never_shows_the_key() {
        let endpoint = EndpointConfig {
            api_key: Some("super-secret".into()),
            ..EndpointConfig::default()
        };
        let shown = format!("{endpoint:?}");
        assert!(!shown.contains("super-secret"));
    }
}
