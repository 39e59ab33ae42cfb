//! Prints the deterministic decision rule over the preference grid at a few
//! offer prices.
//!
//! ```bash
//! cargo run -p dtm --example rule_policy
//! ```

use dtm::agents::{
    rule_decide, seller_initial_ask, AgentProfile, DecisionRequest, MarketObservation,
    PolicyParams, RiskPreference, Role, ValueEstimate, ValueMethod, ValueSensitivity,
};
use dtm::currency::Currency;

fn main() {
    let params = PolicyParams::default();
    let obs = MarketObservation::default();
    let value = ValueEstimate::from_seconds(10.0, params.conversion_rate, ValueMethod::Oracle, 230);

    println!("expected value: 10 seconds saved = {}", value.currency_value);
    println!();
    println!("{:<14} {:<12} {:>8} {:>8} {:>8}", "risk", "sensitivity", "offer 8", "offer 12", "offer 14");
    for risk in [RiskPreference::Conservative, RiskPreference::Aggressive] {
        for sensitivity in [ValueSensitivity::High, ValueSensitivity::Low] {
            let buyer = AgentProfile {
                id: "controller".into(),
                role: Role::Controller,
                risk,
                sensitivity,
                endowment: Currency::from_major(100.0),
            };
            let decide_at = |offer: f64| {
                let request = DecisionRequest::new(&buyer, &value, Currency::from_major(offer));
                if rule_decide(&params, &buyer, &request, &value, &obs).decision {
                    "accept"
                } else {
                    "reject"
                }
            };
            println!(
                "{:<14} {:<12} {:>8} {:>8} {:>8}",
                risk.as_str(),
                sensitivity.as_str(),
                decide_at(8.0),
                decide_at(12.0),
                decide_at(14.0)
            );
        }
    }

    println!();
    for risk in [RiskPreference::Conservative, RiskPreference::Aggressive] {
        let seller = AgentProfile {
            id: "vehicle_0".into(),
            role: Role::Vehicle,
            risk,
            sensitivity: ValueSensitivity::High,
            endowment: Currency::from_major(30.0),
        };
        println!(
            "{} seller opens at {}",
            risk.as_str(),
            seller_initial_ask(&params, &seller, &value, &obs)
        );
    }
}
