//! Drives the LLM decision backend against the offline mock server: builds
//! the function-calling prompt, posts it, and parses the canned reply.
//!
//! ```bash
//! cargo run -p dtm --example llm_mock
//! ```

use dtm::agents::{
    decide, AgentProfile, Backend, BackendErrorPolicy, DecisionRequest, MarketObservation,
    PolicyParams, RiskPreference, Role, ValueEstimate, ValueMethod, ValueSensitivity,
};
use dtm::currency::Currency;
use dtm::llm::mock::{MockResponse, MockServer};
use dtm::llm::EndpointConfig;

fn main() {
    let server = MockServer::start(vec![MockResponse::canned_rejection()]).unwrap();
    println!("mock endpoint at {}", server.base_url());

    let endpoint = EndpointConfig {
        base_url: server.base_url(),
        api_key: Some("offline-test-key".into()),
        timeout_s: 5,
        retries: 1,
        ..EndpointConfig::default()
    };
    let backend = Backend::Llm {
        endpoint,
        on_error: BackendErrorPolicy::RejectAndLog,
    };

    let params = PolicyParams::default();
    let buyer = AgentProfile {
        id: "controller".into(),
        role: Role::Controller,
        risk: RiskPreference::Conservative,
        sensitivity: ValueSensitivity::Low,
        endowment: Currency::from_major(100.0),
    };
    let value = ValueEstimate::from_seconds(10.0, params.conversion_rate, ValueMethod::Llm, 230);
    let request = DecisionRequest::new(&buyer, &value, Currency::from_major(12.0));
    println!("user message: {}", request.to_prompt_json());

    let response = decide(&backend, &params, &buyer, &request, &value, &MarketObservation::default());
    println!("decision: {}", response.decision);
    println!("reason:   {}", response.reason);

    let seen = server.received();
    println!("server saw {} request(s)", seen.len());
}
