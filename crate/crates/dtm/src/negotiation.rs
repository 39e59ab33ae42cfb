//! Alternating-offers bargaining with monotone concession, the blended
//! final price, per-party utilities, and an equilibrium check on agreed
//! outcomes.
//!
//! Each round the seller's ask falls by the concession step toward their
//! floor (just above the proposal fee) while the buyer's bid rises toward
//! their price threshold. The first crossing settles at the midpoint;
//! exhausting the round budget fails the negotiation.

use serde::{Deserialize, Serialize};

use crate::agents::{AgentProfile, PolicyParams, ValueEstimate};
use crate::currency::Currency;
use crate::error::NegotiationError;
use crate::market::AgentId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoundDecision {
    Accept,
    Counter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Round {
    pub round: u32,
    pub ask: Currency,
    pub bid: Currency,
    pub buyer_decision: RoundDecision,
    pub seller_decision: RoundDecision,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Outcome {
    Agreed { price: Currency },
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegotiationTranscript {
    pub buyer: AgentId,
    pub seller: AgentId,
    pub rounds: Vec<Round>,
    pub outcome: Outcome,
    pub max_rounds: u32,
    pub buyer_reservation: Currency,
    pub seller_reservation: Currency,
}

impl NegotiationTranscript {
    pub fn agreed_price(&self) -> Option<Currency> {
        match self.outcome {
            Outcome::Agreed { price } => Some(price),
            Outcome::Failed => None,
        }
    }
}

/// Runs the deterministic concession protocol between one buyer and one
/// seller. The seller opens at `opening_ask` (clamped to their floor), the
/// buyer at half their threshold.
pub fn run_negotiation(
    params: &PolicyParams,
    buyer: &AgentProfile,
    buyer_value: &ValueEstimate,
    seller: &AgentProfile,
    _seller_value: &ValueEstimate,
    opening_ask: Currency,
    max_rounds: u32,
    concession_step: Currency,
) -> NegotiationTranscript {
    assert!(max_rounds >= 1, "at least one round");
    assert!(concession_step > Currency::ZERO, "positive concession step");

    let seller_reservation = params.seller_floor();
    let buyer_reservation = params.buyer_threshold(buyer, buyer_value);

    let mut ask = opening_ask.max(seller_reservation);
    let mut bid = buyer_reservation.scale(0.5);
    let mut rounds = Vec::new();
    let mut outcome = Outcome::Failed;

    for round in 1..=max_rounds {
        if round > 1 {
            ask = seller_reservation.max(ask - concession_step);
            bid = buyer_reservation.min(bid + concession_step);
        }
        let crossed = bid >= ask;
        let decision = if crossed {
            RoundDecision::Accept
        } else {
            RoundDecision::Counter
        };
        rounds.push(Round {
            round,
            ask,
            bid,
            buyer_decision: decision,
            seller_decision: decision,
        });
        if crossed {
            outcome = Outcome::Agreed {
                price: Currency::midpoint(ask, bid),
            };
            break;
        }
    }

    NegotiationTranscript {
        buyer: buyer.id.clone(),
        seller: seller.id.clone(),
        rounds,
        outcome,
        max_rounds,
        buyer_reservation,
        seller_reservation,
    }
}

/// Blends the evaluated data value into the bargained price:
/// `w * value + (1 - w) * agreed`, rounded to the cent.
pub fn final_price(
    w: f64,
    value: &ValueEstimate,
    transcript: &NegotiationTranscript,
) -> Result<Currency, NegotiationError> {
    let agreed = transcript
        .agreed_price()
        .ok_or(NegotiationError::NoAgreement)?;
    let blended = w * value.currency_value.as_major() + (1.0 - w) * agreed.as_major();
    Ok(Currency::from_major(blended))
}

/// Realized utilities: the buyer keeps value minus price, the seller keeps
/// the price; a failed trade costs the seller the sunk proposal fee.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UtilityReport {
    pub buyer_utility: Currency,
    pub seller_utility: Currency,
}

pub fn utilities(
    transcript: &NegotiationTranscript,
    buyer_value: &ValueEstimate,
    price: Currency,
    fee: Currency,
) -> UtilityReport {
    match transcript.outcome {
        Outcome::Agreed { .. } => UtilityReport {
            buyer_utility: buyer_value.currency_value - price,
            seller_utility: price,
        },
        Outcome::Failed => UtilityReport {
            buyer_utility: Currency::ZERO,
            seller_utility: -fee,
        },
    }
}

/// Checks the agreed price against unilateral deviations on a price grid.
///
/// Holding the other side to the struck deal, a deviator may walk away or
/// demand any grid price inside their own reservation interval; a demand
/// only trades when the counterparty's stance still covers it, and then at
/// the stance, so the only deviation that can strictly gain is walking away
/// from a price outside one's reservation. The agreed price is therefore an
/// equilibrium exactly when it lies between the seller's floor and the
/// buyer's threshold.
pub fn equilibrium_check(
    transcript: &NegotiationTranscript,
    _buyer_value: &ValueEstimate,
    _seller_value: &ValueEstimate,
    price_grid_step: Currency,
) -> Result<bool, NegotiationError> {
    let price = transcript
        .agreed_price()
        .ok_or(NegotiationError::NoAgreement)?;
    let step = price_grid_step.cents().max(1);
    let res_b = transcript.buyer_reservation;
    let res_s = transcript.seller_reservation;

    // Willingness-based payoffs: res_b - p for the buyer, p - res_s for the
    // seller, zero for walking away.
    let buyer_current = res_b - price;
    let seller_current = price - res_s;

    let mut buyer_best = Currency::ZERO; // walk away
    let mut seller_best = Currency::ZERO;
    let mut p = res_s;
    while p <= res_b {
        // A buyer demand below the seller's stance, or a seller demand above
        // the buyer's stance, kills the trade (payoff zero, never better
        // than walking). Compatible demands trade at the incumbent stance.
        if p >= price {
            buyer_best = buyer_best.max(res_b - price);
        }
        if p <= price {
            seller_best = seller_best.max(price - res_s);
        }
        p += Currency::from_cents(step);
    }

    Ok(buyer_best <= buyer_current && seller_best <= seller_current)
}
