//! Trading engine: accounts, fee-bearing proposals, settlement with product
//! delivery, and the public trade history.
//!
//! The ledger is a single-owner state machine. Every mutation either commits
//! fully or leaves the ledger untouched, currency never leaves the closed
//! system (fees go to a fee pool, not into thin air), and no balance can go
//! below zero.

use serde::{Deserialize, Serialize};

use crate::currency::Currency;
use crate::error::MarketError;
use crate::traffic::{DataProduct, LinkId};

pub type AgentId = String;

/// Default cost of posting a proposal.
pub const DEFAULT_PROPOSAL_FEE: Currency = Currency::from_cents(100);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProposalStatus {
    Open,
    Accepted,
    Rejected,
    Expired,
}

/// What buyers can see before settlement: where and when the observation was
/// made plus a content hash, with severity and flow withheld.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductDigest {
    pub link_id: LinkId,
    pub observed_at_s: u32,
    pub content_hash: u64,
}

impl ProductDigest {
    pub fn of(product: &DataProduct) -> ProductDigest {
        ProductDigest {
            link_id: product.link_id,
            observed_at_s: product.observed_at_s,
            content_hash: product.content_hash(),
        }
    }

    pub fn matches(&self, product: &DataProduct) -> bool {
        self.link_id == product.link_id
            && self.observed_at_s == product.observed_at_s
            && self.content_hash == product.content_hash()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Proposal {
    pub id: u64,
    pub seller: AgentId,
    pub digest: ProductDigest,
    pub ask_price: Currency,
    pub created_s: u32,
    pub status: ProposalStatus,
    pub resolved_s: Option<u32>,
    /// Held in escrow until settlement; not part of the public digest view.
    product: DataProduct,
}

impl Proposal {
    pub fn is_open(&self) -> bool {
        self.status == ProposalStatus::Open
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeRecord {
    pub proposal_id: u64,
    pub buyer: AgentId,
    pub seller: AgentId,
    pub price: Currency,
    pub settled_s: u32,
    pub delivered: DataProduct,
}

/// Accounts, fee pool, proposals and the append-only public trade history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeLedger {
    accounts: Vec<(AgentId, Currency)>,
    fee_pool: Currency,
    proposal_fee: Currency,
    trades: Vec<TradeRecord>,
    proposals: Vec<Proposal>,
    next_proposal_id: u64,
    initial_endowment_total: Currency,
}

impl TradeLedger {
    pub fn new(proposal_fee: Currency) -> TradeLedger {
        TradeLedger {
            accounts: Vec::new(),
            fee_pool: Currency::ZERO,
            proposal_fee,
            trades: Vec::new(),
            proposals: Vec::new(),
            next_proposal_id: 0,
            initial_endowment_total: Currency::ZERO,
        }
    }

    pub fn proposal_fee(&self) -> Currency {
        self.proposal_fee
    }

    pub fn fee_pool(&self) -> Currency {
        self.fee_pool
    }

    pub fn balance(&self, agent: &str) -> Result<Currency, MarketError> {
        self.accounts
            .iter()
            .find(|(id, _)| id == agent)
            .map(|(_, bal)| *bal)
            .ok_or_else(|| MarketError::UnknownAgent(agent.to_string()))
    }

    pub fn is_registered(&self, agent: &str) -> bool {
        self.accounts.iter().any(|(id, _)| id == agent)
    }

    /// Opens an account with the given endowment.
    pub fn register_agent(&mut self, agent: &str, endowment: Currency) -> Result<(), MarketError> {
        if endowment.is_negative() {
            return Err(MarketError::InsufficientFunds {
                agent: agent.to_string(),
                need: Currency::ZERO,
                have: endowment,
            });
        }
        if self.is_registered(agent) {
            return Err(MarketError::DuplicateAgent(agent.to_string()));
        }
        self.accounts.push((agent.to_string(), endowment));
        self.initial_endowment_total += endowment;
        Ok(())
    }

    /// Posts a sell proposal, moving the proposal fee into the fee pool.
    /// The full product stays escrowed; only its digest is public.
    pub fn submit_proposal(
        &mut self,
        seller: &str,
        product: DataProduct,
        ask_price: Currency,
        now_s: u32,
    ) -> Result<u64, MarketError> {
        let balance = self.balance(seller)?;
        if balance < self.proposal_fee {
            return Err(MarketError::InsufficientFunds {
                agent: seller.to_string(),
                need: self.proposal_fee,
                have: balance,
            });
        }
        self.credit(seller, -self.proposal_fee);
        self.fee_pool += self.proposal_fee;
        let id = self.next_proposal_id;
        self.next_proposal_id += 1;
        self.proposals.push(Proposal {
            id,
            seller: seller.to_string(),
            digest: ProductDigest::of(&product),
            ask_price,
            created_s: now_s,
            status: ProposalStatus::Open,
            resolved_s: None,
            product,
        });
        Ok(id)
    }

    /// Settles an open proposal: price moves buyer to seller, the product is
    /// delivered inside the appended trade record.
    pub fn settle(
        &mut self,
        proposal_id: u64,
        buyer: &str,
        price: Currency,
        now_s: u32,
    ) -> Result<TradeRecord, MarketError> {
        let buyer_balance = self.balance(buyer)?;
        let proposal = self
            .proposals
            .iter()
            .find(|p| p.id == proposal_id)
            .ok_or(MarketError::UnknownProposal(proposal_id))?;
        if !proposal.is_open() {
            return Err(MarketError::ProposalClosed(proposal_id));
        }
        if buyer_balance < price {
            return Err(MarketError::InsufficientFunds {
                agent: buyer.to_string(),
                need: price,
                have: buyer_balance,
            });
        }
        let seller = proposal.seller.clone();
        let delivered = proposal.product.clone();
        debug_assert!(proposal.digest.matches(&delivered));

        self.credit(buyer, -price);
        self.credit(&seller, price);
        let proposal = self
            .proposals
            .iter_mut()
            .find(|p| p.id == proposal_id)
            .expect("proposal present");
        proposal.status = ProposalStatus::Accepted;
        proposal.resolved_s = Some(now_s);

        let record = TradeRecord {
            proposal_id,
            buyer: buyer.to_string(),
            seller,
            price,
            settled_s: now_s,
            delivered,
        };
        self.trades.push(record.clone());
        Ok(record)
    }

    /// Closes an open proposal without a transfer; the fee stays sunk.
    pub fn reject(&mut self, proposal_id: u64, _buyer: &str, now_s: u32) -> Result<(), MarketError> {
        let proposal = self
            .proposals
            .iter_mut()
            .find(|p| p.id == proposal_id)
            .ok_or(MarketError::UnknownProposal(proposal_id))?;
        if !proposal.is_open() {
            return Err(MarketError::ProposalClosed(proposal_id));
        }
        proposal.status = ProposalStatus::Rejected;
        proposal.resolved_s = Some(now_s);
        Ok(())
    }

    /// Marks every proposal still open as expired (end-of-run cleanup).
    pub fn expire_open(&mut self, now_s: u32) {
        for proposal in &mut self.proposals {
            if proposal.is_open() {
                proposal.status = ProposalStatus::Expired;
                proposal.resolved_s = Some(now_s);
            }
        }
    }

    /// All trades settled at or before `up_to_s`, in settlement order.
    pub fn public_history(&self, up_to_s: u32) -> Vec<TradeRecord> {
        self.trades
            .iter()
            .filter(|t| t.settled_s <= up_to_s)
            .cloned()
            .collect()
    }

    pub fn trades(&self) -> &[TradeRecord] {
        &self.trades
    }

    pub fn proposals(&self) -> &[Proposal] {
        &self.proposals
    }

    pub fn open_proposals(&self) -> impl Iterator<Item = &Proposal> {
        self.proposals.iter().filter(|p| p.is_open())
    }

    /// Exact closed-sum check: every cent handed out as endowment is either
    /// in an account or in the fee pool.
    pub fn conservation_holds(&self) -> bool {
        let balances: Currency = self.accounts.iter().map(|(_, b)| *b).sum();
        balances + self.fee_pool == self.initial_endowment_total
            && self.accounts.iter().all(|(_, b)| !b.is_negative())
    }

    pub fn initial_endowment_total(&self) -> Currency {
        self.initial_endowment_total
    }

    fn credit(&mut self, agent: &str, amount: Currency) {
        let entry = self
            .accounts
            .iter_mut()
            .find(|(id, _)| id == agent)
            .expect("credit target registered");
        entry.1 += amount;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn product() -> DataProduct {
        DataProduct {
            link_id: LinkId(0),
            position_m: 250.0,
            observed_at_s: 230,
            severity: 0.5,
            observed_flow_vph: 220.0,
        }
    }

    fn ledger_with_agents() -> TradeLedger {
        let mut ledger = TradeLedger::new(Currency::from_major(1.0));
        ledger.register_agent("vehicle_0", Currency::from_major(30.0)).unwrap();
        ledger.register_agent("controller", Currency::from_major(100.0)).unwrap();
        ledger
    }

    #[test]
    fn registration_sets_starting_balances() {
        let ledger = ledger_with_agents();
        assert_eq!(ledger.balance("vehicle_0").unwrap(), Currency::from_major(30.0));
        assert_eq!(ledger.balance("controller").unwrap(), Currency::from_major(100.0));
    }

    #[test]
    fn duplicate_registration_fails() {
        let mut ledger = ledger_with_agents();
        assert_eq!(
            ledger.register_agent("vehicle_0", Currency::ZERO).unwrap_err(),
            MarketError::DuplicateAgent("vehicle_0".into())
        );
    }

    #[test]
    fn proposal_fee_moves_to_the_pool() {
        let mut ledger = ledger_with_agents();
        ledger.submit_proposal("vehicle_0", product(), Currency::from_major(12.0), 230).unwrap();
        assert_eq!(ledger.balance("vehicle_0").unwrap(), Currency::from_major(29.0));
        assert_eq!(ledger.fee_pool(), Currency::from_major(1.0));
        assert_eq!(ledger.open_proposals().count(), 1);
        assert!(ledger.conservation_holds());
    }

    #[test]
    fn submission_needs_the_fee() {
        let mut ledger = TradeLedger::new(Currency::from_major(1.0));
        ledger.register_agent("poor", Currency::from_major(0.5)).unwrap();
        let before = ledger.clone();
        let err = ledger
            .submit_proposal("poor", product(), Currency::from_major(5.0), 0)
            .unwrap_err();
        assert!(matches!(err, MarketError::InsufficientFunds { .. }));
        assert_eq!(ledger, before);
    }

    #[test]
    fn proposal_ids_strictly_increase() {
        let mut ledger = ledger_with_agents();
        let a = ledger.submit_proposal("vehicle_0", product(), Currency::from_major(2.0), 0).unwrap();
        let b = ledger.submit_proposal("vehicle_0", product(), Currency::from_major(2.0), 5).unwrap();
        assert!(b > a);
    }

    #[test]
    fn settlement_transfers_price_and_delivers() {
        let mut ledger = ledger_with_agents();
        let id = ledger.submit_proposal("vehicle_0", product(), Currency::from_major(12.0), 230).unwrap();
        let record = ledger.settle(id, "controller", Currency::from_major(12.0), 230).unwrap();
        assert_eq!(ledger.balance("controller").unwrap(), Currency::from_major(88.0));
        assert_eq!(ledger.balance("vehicle_0").unwrap(), Currency::from_major(41.0));
        assert_eq!(record.delivered, product());
        assert!(ledger.conservation_holds());
    }

    #[test]
    fn zero_price_trade_is_recorded() {
        let mut ledger = ledger_with_agents();
        let id = ledger.submit_proposal("vehicle_0", product(), Currency::ZERO, 0).unwrap();
        let before_buyer = ledger.balance("controller").unwrap();
        ledger.settle(id, "controller", Currency::ZERO, 1).unwrap();
        assert_eq!(ledger.balance("controller").unwrap(), before_buyer);
        assert_eq!(ledger.trades().len(), 1);
    }

    #[test]
    fn double_settlement_is_rejected() {
        let mut ledger = ledger_with_agents();
        let id = ledger.submit_proposal("vehicle_0", product(), Currency::from_major(1.0), 0).unwrap();
        ledger.settle(id, "controller", Currency::from_major(1.0), 1).unwrap();
        assert_eq!(
            ledger.settle(id, "controller", Currency::from_major(1.0), 2).unwrap_err(),
            MarketError::ProposalClosed(id)
        );
    }

    #[test]
    fn reject_then_settle_is_closed() {
        let mut ledger = ledger_with_agents();
        let id = ledger.submit_proposal("vehicle_0", product(), Currency::from_major(1.0), 0).unwrap();
        ledger.reject(id, "controller", 1).unwrap();
        assert_eq!(
            ledger.settle(id, "controller", Currency::from_major(1.0), 2).unwrap_err(),
            MarketError::ProposalClosed(id)
        );
        assert!(ledger.conservation_holds());
    }

    #[test]
    fn rejecting_unknown_proposal_fails() {
        let mut ledger = ledger_with_agents();
        assert_eq!(
            ledger.reject(42, "controller", 0).unwrap_err(),
            MarketError::UnknownProposal(42)
        );
    }

    #[test]
    fn history_is_a_time_filtered_prefix() {
        let mut ledger = ledger_with_agents();
        assert!(ledger.public_history(1000).is_empty());
        for (t, _) in [(230u32, 0), (235, 1), (240, 2)] {
            let id = ledger.submit_proposal("vehicle_0", product(), Currency::from_major(12.0), t).unwrap();
            ledger.settle(id, "controller", Currency::from_major(12.0), t).unwrap();
        }
        assert_eq!(ledger.public_history(240).len(), 3);
        let prefix = ledger.public_history(236);
        assert_eq!(prefix.len(), 2);
        assert_eq!(prefix, ledger.public_history(240)[..2].to_vec());
    }

    #[test]
    fn buyer_cannot_overspend() {
        let mut ledger = TradeLedger::new(Currency::from_major(1.0));
        ledger.register_agent("seller", Currency::from_major(30.0)).unwrap();
        ledger.register_agent("buyer", Currency::from_major(2.0)).unwrap();
        let id = ledger.submit_proposal("seller", product(), Currency::from_major(5.0), 0).unwrap();
        let before = ledger.clone();
        let err = ledger.settle(id, "buyer", Currency::from_major(5.0), 1).unwrap_err();
        assert!(matches!(err, MarketError::InsufficientFunds { .. }));
        assert_eq!(ledger, before);
        assert!(ledger.conservation_holds());
    }
}
