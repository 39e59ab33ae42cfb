//! Property tests over the market, negotiation, decision and traffic
//! invariants.

use proptest::prelude::*;

use dtm::agents::{
    rule_decide, AgentProfile, DecisionRequest, MarketObservation, PolicyParams, RiskPreference,
    Role, ValueEstimate, ValueMethod, ValueSensitivity,
};
use dtm::currency::Currency;
use dtm::llm::{parse_decision, ChatResponse};
use dtm::market::TradeLedger;
use dtm::negotiation::{final_price, run_negotiation, Outcome};
use dtm::traffic::{build_grid, generate_demand, run, AccidentEvent, LinkId, Scenario, SignalPlan};

fn profile(risk: RiskPreference, sensitivity: ValueSensitivity, role: Role) -> AgentProfile {
    AgentProfile {
        id: "p".into(),
        role,
        risk,
        sensitivity,
        endowment: Currency::from_major(100.0),
    }
}

fn risk_strategy() -> impl Strategy<Value = RiskPreference> {
    prop_oneof![
        Just(RiskPreference::Aggressive),
        Just(RiskPreference::Conservative)
    ]
}

fn sensitivity_strategy() -> impl Strategy<Value = ValueSensitivity> {
    prop_oneof![Just(ValueSensitivity::High), Just(ValueSensitivity::Low)]
}

proptest! {
    /// The public trade history is append-only: an earlier cutoff is always
    /// a prefix of a later one.
    #[test]
    fn history_cutoffs_nest(prices in prop::collection::vec(0i64..3000, 1..20), s1 in 0u32..100, s2 in 0u32..100) {
        let (early, late) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
        let mut ledger = TradeLedger::new(Currency::from_major(1.0));
        ledger.register_agent("seller", Currency::from_major(1000.0)).unwrap();
        ledger.register_agent("buyer", Currency::from_major(100000.0)).unwrap();
        let product = dtm::traffic::DataProduct {
            link_id: LinkId(0),
            position_m: 250.0,
            observed_at_s: 0,
            severity: 0.5,
            observed_flow_vph: 220.0,
        };
        for (i, cents) in prices.iter().enumerate() {
            let t = (i as u32 * 100) / prices.len() as u32;
            let id = ledger.submit_proposal("seller", product.clone(), Currency::from_cents(*cents), t).unwrap();
            ledger.settle(id, "buyer", Currency::from_cents(*cents), t).unwrap();
        }
        let a = ledger.public_history(early);
        let b = ledger.public_history(late);
        prop_assert!(a.len() <= b.len());
        prop_assert_eq!(&b[..a.len()], &a[..]);
        prop_assert!(ledger.conservation_holds());
    }

    /// Valid function-call payloads round-trip through the parser exactly.
    #[test]
    fn decision_payloads_round_trip(decision in any::<bool>(), reason in "[ -~]{1,60}") {
        let arguments = serde_json::json!({"decision": decision, "reason": reason}).to_string();
        let body = serde_json::json!({
            "choices": [{
                "message": {
                    "role": "assistant",
                    "content": null,
                    "function_call": {"name": "offer_decision", "arguments": arguments}
                }
            }]
        })
        .to_string();
        let response = ChatResponse::from_body(&body).unwrap();
        let parsed = parse_decision(&response).unwrap();
        prop_assert_eq!(parsed.decision, decision);
        prop_assert_eq!(parsed.reason, reason);
    }

    /// Negotiations terminate inside the round budget with monotone
    /// concession, and agreements land between the reservations.
    #[test]
    fn negotiation_terminates_and_concedes(
        value_cents in 0i64..2000,
        ask_cents in 0i64..3000,
        step_cents in 1i64..300,
        max_rounds in 1u32..10,
        risk in risk_strategy(),
        sensitivity in sensitivity_strategy(),
    ) {
        let params = PolicyParams::default();
        let buyer = profile(risk, sensitivity, Role::Controller);
        let seller = profile(RiskPreference::Conservative, ValueSensitivity::High, Role::Vehicle);
        let value = ValueEstimate {
            seconds_saved: value_cents as f64 / 100.0,
            currency_value: Currency::from_cents(value_cents),
            method: ValueMethod::Oracle,
            basis_s: 0,
        };
        let transcript = run_negotiation(
            &params,
            &buyer,
            &value,
            &seller,
            &value,
            Currency::from_cents(ask_cents),
            max_rounds,
            Currency::from_cents(step_cents),
        );
        prop_assert!(transcript.rounds.len() as u32 <= max_rounds);
        for pair in transcript.rounds.windows(2) {
            prop_assert!(pair[1].ask <= pair[0].ask);
            prop_assert!(pair[1].bid >= pair[0].bid);
        }
        if let Outcome::Agreed { price } = transcript.outcome {
            prop_assert!(price >= transcript.seller_reservation);
            prop_assert!(price <= transcript.buyer_reservation);
        }
    }

    /// The blended price is affine in the weight and bounded by the value
    /// and the bargained price.
    #[test]
    fn blended_price_stays_bounded(w in 0.0f64..=1.0, value_cents in 101i64..2000, ask_cents in 101i64..2000) {
        let params = PolicyParams::default();
        let buyer = profile(RiskPreference::Conservative, ValueSensitivity::High, Role::Controller);
        let seller = profile(RiskPreference::Conservative, ValueSensitivity::High, Role::Vehicle);
        let value = ValueEstimate {
            seconds_saved: value_cents as f64 / 100.0,
            currency_value: Currency::from_cents(value_cents),
            method: ValueMethod::Oracle,
            basis_s: 0,
        };
        let transcript = run_negotiation(
            &params, &buyer, &value, &seller, &value,
            Currency::from_cents(ask_cents), 8, Currency::from_major(1.0),
        );
        if let Outcome::Agreed { price: agreed } = transcript.outcome {
            let blended = final_price(w, &value, &transcript).unwrap();
            let low = agreed.min(value.currency_value) - Currency::from_cents(1);
            let high = agreed.max(value.currency_value) + Currency::from_cents(1);
            prop_assert!(blended >= low && blended <= high);
            // Affine reconstruction at the same weight.
            let expected = w * value.currency_value.as_major() + (1.0 - w) * agreed.as_major();
            prop_assert!((blended.as_major() - expected).abs() <= 0.005 + 1e-9);
        }
    }

    /// If the rule policy accepts a price, it accepts every cheaper price.
    #[test]
    fn acceptance_is_downward_closed(
        value_cents in 0i64..2000,
        offer_cents in 0i64..3000,
        cheaper in 0i64..3000,
        risk in risk_strategy(),
        sensitivity in sensitivity_strategy(),
    ) {
        prop_assume!(cheaper <= offer_cents);
        let params = PolicyParams::default();
        let buyer = profile(risk, sensitivity, Role::Controller);
        let value = ValueEstimate {
            seconds_saved: value_cents as f64 / 100.0,
            currency_value: Currency::from_cents(value_cents),
            method: ValueMethod::Oracle,
            basis_s: 0,
        };
        let obs = MarketObservation::default();
        let at = |cents: i64| {
            let request = DecisionRequest::new(&buyer, &value, Currency::from_cents(cents));
            rule_decide(&params, &buyer, &request, &value, &obs).decision
        };
        if at(offer_cents) {
            prop_assert!(at(cheaper));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// A full blockage never waits less than a partial one on the same
    /// scenario.
    #[test]
    fn heavier_incidents_wait_longer(flow in 80.0f64..400.0, seed in 0u64..50, severity in 0.1f64..0.9) {
        let network = build_grid(1, 1, 500.0, 3).unwrap();
        let demand = generate_demand(&network, flow, 400, seed);
        let plan = SignalPlan::uniform(&network, 60, 30, 30).unwrap();
        let wait_at = |sev: f64| {
            let scenario = Scenario::new(
                network.clone(),
                demand.clone(),
                vec![AccidentEvent {
                    link_id: LinkId(0),
                    start_s: 100,
                    end_s: 300,
                    severity: sev,
                    position_m: 250.0,
                }],
            )
            .unwrap();
            run(&scenario, &plan, 400).unwrap().total_wait_s()
        };
        prop_assert!(wait_at(1.0) >= wait_at(severity));
    }

    /// Demand generation and simulation are reproducible end to end.
    #[test]
    fn same_seed_same_run(flow in 50.0f64..300.0, seed in 0u64..100) {
        let network = build_grid(1, 1, 500.0, 3).unwrap();
        let a = generate_demand(&network, flow, 300, seed);
        let b = generate_demand(&network, flow, 300, seed);
        prop_assert_eq!(&a, &b);
        let scenario = Scenario::new(network, a, Vec::new()).unwrap();
        let plan = SignalPlan::uniform(&scenario.network, 60, 30, 30).unwrap();
        let x = run(&scenario, &plan, 300).unwrap();
        let y = run(&scenario, &plan, 300).unwrap();
        prop_assert_eq!(x, y);
    }
}
