//! Agent profiles, data-value estimation and buy/sell decision policies
//! behind a single backend interface.
//!
//! Value estimation is evidence-based: the same scenario is simulated twice,
//! with and without the data-driven signal adjustment, and the drop in
//! average waiting time is the data's worth (converted 1:1 into currency by
//! default).

use serde::{Deserialize, Serialize};

use crate::currency::Currency;
use crate::error::TrafficError;
use crate::llm::{self, EndpointConfig};
use crate::market::AgentId;
use crate::metrics::average_waiting_time;
use crate::traffic::{
    apply_data_driven_adjustment, run, run_with_plan_switch, DataProduct, Scenario, SignalPlan,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Vehicle,
    Controller,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RiskPreference {
    Aggressive,
    Conservative,
}

impl RiskPreference {
    pub fn as_str(self) -> &'static str {
        match self {
            RiskPreference::Aggressive => "aggressive",
            RiskPreference::Conservative => "conservative",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueSensitivity {
    High,
    Low,
}

impl ValueSensitivity {
    pub fn as_str(self) -> &'static str {
        match self {
            ValueSensitivity::High => "high",
            ValueSensitivity::Low => "low",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentProfile {
    pub id: AgentId,
    pub role: Role,
    pub risk: RiskPreference,
    pub sensitivity: ValueSensitivity,
    pub endowment: Currency,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueMethod {
    Oracle,
    Llm,
}

/// An estimate of what a data product is worth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueEstimate {
    /// Expected reduction in average waiting time, clamped at zero.
    pub seconds_saved: f64,
    pub currency_value: Currency,
    pub method: ValueMethod,
    pub basis_s: u32,
}

impl ValueEstimate {
    pub fn from_seconds(seconds_saved: f64, conversion_rate: f64, method: ValueMethod, basis_s: u32) -> ValueEstimate {
        let clamped = seconds_saved.max(0.0);
        ValueEstimate {
            seconds_saved: clamped,
            currency_value: Currency::from_major(clamped * conversion_rate),
            method,
            basis_s,
        }
    }
}

/// The five request fields, rendered exactly as the function-calling
/// protocol spells them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionRequest {
    pub background: String,
    pub risk_preference: String,
    pub data_sensitivity: String,
    pub expected_data_value: String,
    #[serde(skip)]
    pub offer_price: Currency,
}

/// Renders a waiting-time figure for prompt text: whole seconds without a
/// decimal part, otherwise trimmed to at most three decimals.
pub fn seconds_text(value: f64) -> String {
    let mut s = format!("{:.3}", value);
    while s.ends_with('0') {
        s.pop();
    }
    if s.ends_with('.') {
        s.pop();
    }
    s
}

impl DecisionRequest {
    /// Builds the request an agent answers: buyer (controller) or seller
    /// (vehicle) background, preference sentences and the offer.
    pub fn new(profile: &AgentProfile, value: &ValueEstimate, offer_price: Currency) -> DecisionRequest {
        let background = match profile.role {
            Role::Controller => {
                "I am a traffic light controller in an intelligent transportation system, looking to purchase data for controlling support."
            }
            Role::Vehicle => {
                "I am a connected vehicle in an intelligent transportation system, looking to sell observed traffic data."
            }
        };
        DecisionRequest {
            background: background.to_string(),
            risk_preference: format!("My risk preference is {}.", profile.risk.as_str()),
            data_sensitivity: format!("My data sensitivity is {}.", profile.sensitivity.as_str()),
            expected_data_value: format!(
                "I expect the data to decrease average delay by {} seconds",
                seconds_text(value.seconds_saved)
            ),
            offer_price,
        }
    }

    /// The user-message JSON with `offer_price` spelled as a sentence.
    pub fn to_prompt_json(&self) -> String {
        serde_json::json!({
            "background": self.background,
            "risk_preference": self.risk_preference,
            "data_sensitivity": self.data_sensitivity,
            "expected_data_value": self.expected_data_value,
            "offer_price": format!("The data is offered at {} dollars.", self.offer_price.to_text()),
        })
        .to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionResponse {
    pub decision: bool,
    pub reason: String,
}

/// Aggregated market context an agent may condition on.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MarketObservation {
    pub open_proposals: usize,
    /// Most recent settle prices, oldest first, at most `OBSERVATION_WINDOW`.
    pub last_trade_prices: Vec<Currency>,
    /// Ask prices of the most recent rejected proposals, oldest first.
    pub last_rejection_prices: Vec<Currency>,
}

pub const OBSERVATION_WINDOW: usize = 5;

/// Tunable policy constants; the defaults reproduce the documented scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyParams {
    /// Currency per expected second of waiting-time reduction.
    pub conversion_rate: f64,
    /// Price-threshold multiplier for aggressive buyers.
    pub aggressive_multiplier: f64,
    pub ask_markup_aggressive: f64,
    pub ask_markup_conservative: f64,
    pub proposal_fee: Currency,
}

impl Default for PolicyParams {
    fn default() -> Self {
        PolicyParams {
            conversion_rate: 1.0,
            aggressive_multiplier: 1.3,
            ask_markup_aggressive: 1.5,
            ask_markup_conservative: 1.1,
            proposal_fee: Currency::from_major(1.0),
        }
    }
}

impl PolicyParams {
    /// Value as the profile perceives it: low sensitivity coarsens to the
    /// nearest 5 currency, high sensitivity tracks it exactly.
    pub fn effective_value(&self, profile: &AgentProfile, value: &ValueEstimate) -> Currency {
        match profile.sensitivity {
            ValueSensitivity::High => value.currency_value,
            ValueSensitivity::Low => value.currency_value.round_to_nearest_five(),
        }
    }

    /// The most a buyer with this profile will pay.
    pub fn buyer_threshold(&self, profile: &AgentProfile, value: &ValueEstimate) -> Currency {
        let effective = self.effective_value(profile, value);
        match profile.risk {
            RiskPreference::Aggressive => effective.scale(self.aggressive_multiplier),
            RiskPreference::Conservative => effective,
        }
    }

    /// The least a seller can accept without the sale itself losing money.
    pub fn seller_floor(&self) -> Currency {
        self.proposal_fee + Currency::from_cents(1)
    }
}

/// Deterministic buy/sell decision rule: accept iff the offer does not
/// exceed the risk-scaled perceived value.
pub fn rule_decide(
    params: &PolicyParams,
    profile: &AgentProfile,
    request: &DecisionRequest,
    value: &ValueEstimate,
    _obs: &MarketObservation,
) -> DecisionResponse {
    let effective = params.effective_value(profile, value);
    let threshold = params.buyer_threshold(profile, value);
    let offer = request.offer_price;
    if offer <= threshold {
        DecisionResponse {
            decision: true,
            reason: format!(
                "The offered data is expected to be worth {} against a price of {}. \
                 Given the {} risk preference and {} data sensitivity, the expected \
                 benefit justifies the cost.",
                effective,
                offer,
                profile.risk.as_str(),
                profile.sensitivity.as_str()
            ),
        }
    } else {
        DecisionResponse {
            decision: false,
            reason: format!(
                "The offered data is expected to provide a profit less than the offer price \
                 ({} expected against {} asked). Given the {} risk preference and {} data \
                 sensitivity, the cost is not justified.",
                effective,
                offer,
                profile.risk.as_str(),
                profile.sensitivity.as_str()
            ),
        }
    }
}

/// A seller's opening ask: risk-scaled markup on the perceived value,
/// floored just above the proposal fee.
pub fn seller_initial_ask(
    params: &PolicyParams,
    profile: &AgentProfile,
    value: &ValueEstimate,
    _obs: &MarketObservation,
) -> Currency {
    let effective = params.effective_value(profile, value);
    let markup = match profile.risk {
        RiskPreference::Aggressive => params.ask_markup_aggressive,
        RiskPreference::Conservative => params.ask_markup_conservative,
    };
    effective.scale(markup).max(params.seller_floor())
}

/// Twin-run data valuation: simulate the scenario with the baseline plan and
/// with the plan adjusted at `trade_time_s`, and credit the data with the
/// waiting time it removes.
pub fn oracle_value(
    scenario: &Scenario,
    plan: &SignalPlan,
    product: &DataProduct,
    trade_time_s: u32,
    horizon_s: u32,
    delta_s: u32,
    conversion_rate: f64,
) -> Result<ValueEstimate, TrafficError> {
    if trade_time_s >= horizon_s {
        return Err(TrafficError::InvalidScenario(
            "trade time must fall inside the horizon".into(),
        ));
    }
    let adjusted = apply_data_driven_adjustment(plan, &scenario.network, product, delta_s)?;
    let baseline = run(scenario, plan, horizon_s)?;
    let treated = run_with_plan_switch(scenario, plan, Some((trade_time_s, &adjusted)), horizon_s)?;
    let seconds_saved = if baseline.n == 0 {
        0.0
    } else {
        let phi_baseline = average_waiting_time(&baseline)
            .map_err(|_| TrafficError::InvalidScenario("empty population".into()))?;
        let phi_treated = average_waiting_time(&treated)
            .map_err(|_| TrafficError::InvalidScenario("empty population".into()))?;
        phi_baseline - phi_treated
    };
    Ok(ValueEstimate::from_seconds(
        seconds_saved,
        conversion_rate,
        ValueMethod::Oracle,
        trade_time_s,
    ))
}

/// What to do when the LLM backend cannot produce a decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendErrorPolicy {
    RejectAndLog,
    RetryThenReject,
}

/// Decision backend: the deterministic rule policy or a live LLM endpoint.
#[derive(Debug, Clone)]
pub enum Backend {
    Rule,
    Llm {
        endpoint: EndpointConfig,
        on_error: BackendErrorPolicy,
    },
}

/// Dispatches a decision to the configured backend. LLM failures degrade to
/// a rejection carrying the reason `backend_unavailable`.
pub fn decide(
    backend: &Backend,
    params: &PolicyParams,
    profile: &AgentProfile,
    request: &DecisionRequest,
    value: &ValueEstimate,
    obs: &MarketObservation,
) -> DecisionResponse {
    match backend {
        Backend::Rule => rule_decide(params, profile, request, value, obs),
        Backend::Llm { endpoint, on_error } => {
            let chat = llm::build_prompt(endpoint, profile, value, request.offer_price);
            let attempts = match on_error {
                BackendErrorPolicy::RejectAndLog => 1,
                BackendErrorPolicy::RetryThenReject => 2,
            };
            for _ in 0..attempts {
                match llm::call(endpoint, &chat).and_then(|resp| llm::parse_decision(&resp)) {
                    Ok(decision) => return decision,
                    Err(_) => continue,
                }
            }
            DecisionResponse {
                decision: false,
                reason: "backend_unavailable".to_string(),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::traffic::{build_grid, generate_demand, AccidentEvent, LinkId};

    fn profile(risk: RiskPreference, sensitivity: ValueSensitivity) -> AgentProfile {
        AgentProfile {
            id: "controller".into(),
            role: Role::Controller,
            risk,
            sensitivity,
            endowment: Currency::from_major(100.0),
        }
    }

    fn estimate(seconds: f64) -> ValueEstimate {
        ValueEstimate::from_seconds(seconds, 1.0, ValueMethod::Oracle, 230)
    }

    fn request_at(profile: &AgentProfile, value: &ValueEstimate, offer: f64) -> DecisionRequest {
        DecisionRequest::new(profile, value, Currency::from_major(offer))
    }

    #[test]
    fn conservative_low_rejects_twelve_for_ten() {
        let p = profile(RiskPreference::Conservative, ValueSensitivity::Low);
        let v = estimate(10.0);
        let req = request_at(&p, &v, 12.0);
        let resp = rule_decide(&PolicyParams::default(), &p, &req, &v, &MarketObservation::default());
        assert!(!resp.decision);
        assert!(resp.reason.contains("profit less than the offer price"));
    }

    #[test]
    fn aggressive_high_accepts_twelve_for_ten() {
        let p = profile(RiskPreference::Aggressive, ValueSensitivity::High);
        let v = estimate(10.0);
        let req = request_at(&p, &v, 12.0);
        let resp = rule_decide(&PolicyParams::default(), &p, &req, &v, &MarketObservation::default());
        assert!(resp.decision);
    }

    #[test]
    fn preference_grid_at_offer_twelve_value_ten() {
        // Thresholds: conservative 10, aggressive 13; sensitivity does not
        // move a value of 10 (already a multiple of 5).
        let params = PolicyParams::default();
        let v = estimate(10.0);
        let expectations = [
            (RiskPreference::Conservative, ValueSensitivity::High, false),
            (RiskPreference::Conservative, ValueSensitivity::Low, false),
            (RiskPreference::Aggressive, ValueSensitivity::High, true),
            (RiskPreference::Aggressive, ValueSensitivity::Low, true),
        ];
        for (risk, sensitivity, expected) in expectations {
            let p = profile(risk, sensitivity);
            let req = request_at(&p, &v, 12.0);
            let got = rule_decide(&params, &p, &req, &v, &MarketObservation::default()).decision;
            assert_eq!(got, expected, "{risk:?}/{sensitivity:?}");
        }
    }

    #[test]
    fn zero_offers_are_always_accepted() {
        let params = PolicyParams::default();
        for risk in [RiskPreference::Aggressive, RiskPreference::Conservative] {
            for sensitivity in [ValueSensitivity::High, ValueSensitivity::Low] {
                let p = profile(risk, sensitivity);
                for v in [estimate(0.0), estimate(7.3)] {
                    let req = request_at(&p, &v, 0.0);
                    assert!(rule_decide(&params, &p, &req, &v, &MarketObservation::default()).decision);
                }
            }
        }
    }

    #[test]
    fn low_sensitivity_is_constant_within_coarsening_buckets() {
        let params = PolicyParams::default();
        let p = profile(RiskPreference::Conservative, ValueSensitivity::Low);
        for offer in [0.0, 2.5, 5.0, 7.5, 9.0, 10.0, 11.0] {
            let a = estimate(8.0);
            let b = estimate(9.0);
            let req_a = request_at(&p, &a, offer);
            let req_b = request_at(&p, &b, offer);
            assert_eq!(
                rule_decide(&params, &p, &req_a, &a, &MarketObservation::default()).decision,
                rule_decide(&params, &p, &req_b, &b, &MarketObservation::default()).decision,
            );
        }
    }

    #[test]
    fn acceptance_is_monotone_in_price() {
        let params = PolicyParams::default();
        let p = profile(RiskPreference::Conservative, ValueSensitivity::High);
        let v = estimate(7.0);
        let mut last = true;
        for cents in (0..2000).step_by(50) {
            let req = DecisionRequest::new(&p, &v, Currency::from_cents(cents));
            let now = rule_decide(&params, &p, &req, &v, &MarketObservation::default()).decision;
            assert!(!(now && !last), "acceptance regained at a higher price");
            last = now;
        }
    }

    #[test]
    fn opening_asks_follow_the_markup() {
        let params = PolicyParams::default();
        let obs = MarketObservation::default();
        let v = estimate(10.0);
        let conservative = profile(RiskPreference::Conservative, ValueSensitivity::High);
        let aggressive = profile(RiskPreference::Aggressive, ValueSensitivity::High);
        assert_eq!(seller_initial_ask(&params, &conservative, &v, &obs), Currency::from_major(11.0));
        assert_eq!(seller_initial_ask(&params, &aggressive, &v, &obs), Currency::from_major(15.0));
        let worthless = estimate(0.0);
        assert_eq!(
            seller_initial_ask(&params, &conservative, &worthless, &obs),
            Currency::from_major(1.01)
        );
    }

    #[test]
    fn prompt_renders_value_and_offer_sentences() {
        let p = profile(RiskPreference::Conservative, ValueSensitivity::Low);
        let v = estimate(10.0);
        let req = request_at(&p, &v, 12.0);
        let json = req.to_prompt_json();
        assert!(json.contains("decrease average delay by 10 seconds"));
        assert!(json.contains("The data is offered at 12 dollars."));
        assert!(json.contains("My risk preference is conservative."));
        assert!(json.contains("My data sensitivity is low."));
        let zero = request_at(&p, &estimate(0.0), 12.0);
        assert!(zero.to_prompt_json().contains("decrease average delay by 0 seconds"));
    }

    fn accident_scenario() -> (Scenario, SignalPlan) {
        let network = build_grid(1, 1, 500.0, 3).unwrap();
        let demand = generate_demand(&network, 220.0, 1000, 7);
        let accidents = vec![AccidentEvent {
            link_id: LinkId(0),
            start_s: 200,
            end_s: 700,
            severity: 0.5,
            position_m: 250.0,
        }];
        let plan = SignalPlan::uniform(&network, 60, 30, 30).unwrap();
        (Scenario::new(network, demand, accidents).unwrap(), plan)
    }

    fn product() -> DataProduct {
        DataProduct {
            link_id: LinkId(0),
            position_m: 250.0,
            observed_at_s: 230,
            severity: 0.5,
            observed_flow_vph: 220.0,
        }
    }

    #[test]
    fn zero_delta_oracle_value_is_zero() {
        let (scenario, plan) = accident_scenario();
        let v = oracle_value(&scenario, &plan, &product(), 230, 1000, 0, 1.0).unwrap();
        assert_eq!(v.seconds_saved, 0.0);
        assert_eq!(v.currency_value, Currency::ZERO);
        assert_eq!(v.method, ValueMethod::Oracle);
    }

    #[test]
    fn empty_demand_oracle_value_is_zero() {
        let network = build_grid(1, 1, 500.0, 3).unwrap();
        let accidents = vec![AccidentEvent {
            link_id: LinkId(0),
            start_s: 200,
            end_s: 700,
            severity: 0.5,
            position_m: 250.0,
        }];
        let plan = SignalPlan::uniform(&network, 60, 30, 30).unwrap();
        let scenario = Scenario::new(network, Vec::new(), accidents).unwrap();
        let v = oracle_value(&scenario, &plan, &product(), 230, 1000, 3, 1.0).unwrap();
        assert_eq!(v.seconds_saved, 0.0);
    }

    #[test]
    fn default_scenario_adjustment_saves_time() {
        let (scenario, plan) = accident_scenario();
        let v = oracle_value(&scenario, &plan, &product(), 230, 1000, 3, 1.0).unwrap();
        assert!(v.seconds_saved > 0.0, "expected positive savings, got {}", v.seconds_saved);
    }

    #[test]
    fn oracle_is_deterministic() {
        let (scenario, plan) = accident_scenario();
        let a = oracle_value(&scenario, &plan, &product(), 230, 1000, 3, 1.0).unwrap();
        let b = oracle_value(&scenario, &plan, &product(), 230, 1000, 3, 1.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn trade_time_must_precede_horizon() {
        let (scenario, plan) = accident_scenario();
        assert!(oracle_value(&scenario, &plan, &product(), 1000, 1000, 3, 1.0).is_err());
    }

    #[test]
    fn rule_backend_dispatch_matches_rule_decide() {
        let params = PolicyParams::default();
        let p = profile(RiskPreference::Conservative, ValueSensitivity::Low);
        let v = estimate(10.0);
        let req = request_at(&p, &v, 12.0);
        let obs = MarketObservation::default();
        let direct = rule_decide(&params, &p, &req, &v, &obs);
        let dispatched = decide(&Backend::Rule, &params, &p, &req, &v, &obs);
        assert_eq!(direct, dispatched);
    }
}
