//! Runs one alternating-offers negotiation and prints the transcript, the
//! blended final price, utilities and the equilibrium verdict.
//!
//! ```bash
//! cargo run -p dtm --example negotiate
//! ```

use dtm::agents::{
    AgentProfile, PolicyParams, RiskPreference, Role, ValueEstimate, ValueMethod, ValueSensitivity,
};
use dtm::currency::Currency;
use dtm::negotiation::{equilibrium_check, final_price, run_negotiation, utilities, Outcome};

fn main() {
    let params = PolicyParams::default();
    let buyer = AgentProfile {
        id: "controller".into(),
        role: Role::Controller,
        risk: RiskPreference::Conservative,
        sensitivity: ValueSensitivity::High,
        endowment: Currency::from_major(100.0),
    };
    let seller = AgentProfile {
        id: "vehicle_0".into(),
        role: Role::Vehicle,
        risk: RiskPreference::Conservative,
        sensitivity: ValueSensitivity::High,
        endowment: Currency::from_major(30.0),
    };
    let value = ValueEstimate::from_seconds(10.0, params.conversion_rate, ValueMethod::Oracle, 230);
    let opening_ask = Currency::from_major(11.0);

    let transcript = run_negotiation(
        &params,
        &buyer,
        &value,
        &seller,
        &value,
        opening_ask,
        5,
        Currency::from_major(1.0),
    );

    println!(
        "reservations: seller {} / buyer {}",
        transcript.seller_reservation, transcript.buyer_reservation
    );
    for round in &transcript.rounds {
        println!(
            "round {}: ask {} bid {} ({:?})",
            round.round, round.ask, round.bid, round.buyer_decision
        );
    }
    match transcript.outcome {
        Outcome::Agreed { price } => {
            println!("agreed at {price}");
            let blended = final_price(0.5, &value, &transcript).unwrap();
            println!("blended final price (w=0.5): {blended}");
            let report = utilities(&transcript, &value, blended, params.proposal_fee);
            println!(
                "utilities: buyer {} / seller {}",
                report.buyer_utility, report.seller_utility
            );
            let stable = equilibrium_check(&transcript, &value, &value, Currency::from_cents(1)).unwrap();
            println!("equilibrium: {stable}");
        }
        Outcome::Failed => println!("no agreement"),
    }
}
