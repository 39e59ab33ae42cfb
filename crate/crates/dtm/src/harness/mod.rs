//! End-to-end orchestration: the per-tick observe/propose/decide/negotiate/
//! settle loop, the sweep runner, and the replay driver.

pub mod replay;
pub mod report;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::agents::{
    decide, oracle_value, seller_initial_ask, AgentProfile, Backend, DecisionRequest,
    MarketObservation, PolicyParams, RiskPreference, ValueEstimate, ValueMethod,
    ValueSensitivity, OBSERVATION_WINDOW,
};
use crate::config::{AgentConfig, BackendMode, ScenarioConfig};
use crate::currency::Currency;
use crate::error::Error;
use crate::llm::EndpointConfig;
use crate::market::{ProposalStatus, TradeLedger};
use crate::metrics::{report_from_phis, MetricReport, PriceValueRow, RunSummary};
use crate::negotiation::{
    final_price, run_negotiation, NegotiationTranscript, Outcome, Round, RoundDecision,
};
use crate::traffic::{
    apply_data_driven_adjustment, build_grid, generate_demand, run, AccidentEvent, DataProduct,
    EventKind, LinkId, Scenario, SignalPlan, SimResult, Simulation, VehicleId,
};

pub const CONTROLLER_ID: &str = "controller";

/// One row of trades.csv: a resolved proposal. Rejected ones carry the final
/// ask as their price.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeRow {
    pub t_s: u32,
    pub seller: String,
    pub buyer: String,
    pub price: Currency,
    pub accepted: bool,
}

/// One row of negotiations.csv.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegotiationRow {
    pub trade_id: u64,
    pub round: u32,
    pub ask: Currency,
    pub bid: Currency,
    pub outcome: String,
}

/// Event-log digest: counts per kind.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EventDigest {
    pub spawns: usize,
    pub queue_joins: usize,
    pub discharges: usize,
    pub completes: usize,
    pub accidents_on: usize,
    pub accidents_off: usize,
    pub total: usize,
}

impl EventDigest {
    fn from_result(result: &SimResult) -> EventDigest {
        let mut digest = EventDigest {
            total: result.events.len(),
            ..EventDigest::default()
        };
        for event in &result.events {
            match event.kind {
                EventKind::Spawn => digest.spawns += 1,
                EventKind::QueueJoin => digest.queue_joins += 1,
                EventKind::Discharge => digest.discharges += 1,
                EventKind::Complete => digest.completes += 1,
                EventKind::AccidentOn => digest.accidents_on += 1,
                EventKind::AccidentOff => digest.accidents_off += 1,
            }
        }
        digest
    }
}

/// Everything one run produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutput {
    pub report: MetricReport,
    pub trades: Vec<TradeRow>,
    pub negotiations: Vec<NegotiationRow>,
    pub event_digest: EventDigest,
    pub config_echo: Vec<(String, String)>,
    pub seed: u64,
    pub summary: RunSummary,
}

/// Builds the simulation scenario a config describes.
pub fn scenario_from_config(config: &ScenarioConfig) -> Result<(Scenario, SignalPlan), Error> {
    let network = build_grid(
        config.network.rows,
        config.network.cols,
        config.network.link_length_m,
        config.network.lanes,
    )?;
    let demand = generate_demand(
        &network,
        config.demand.flow_vph,
        config.run.horizon_s,
        config.demand.seed,
    );
    let accidents = if config.accident.severity > 0.0 {
        vec![AccidentEvent {
            link_id: LinkId(config.accident.link),
            start_s: config.accident.start_s,
            end_s: config.accident.end_s,
            severity: config.accident.severity,
            position_m: config.accident.position_m,
        }]
    } else {
        Vec::new()
    };
    let plan = SignalPlan::uniform(
        &network,
        config.signal.cycle_s,
        config.signal.green_ns_s,
        config.signal.green_ew_s,
    )?;
    let scenario = Scenario::new(network, demand, accidents)?;
    Ok((scenario, plan))
}

pub fn policy_params(config: &ScenarioConfig) -> PolicyParams {
    PolicyParams {
        conversion_rate: config.pricing.conversion_rate,
        aggressive_multiplier: config.pricing.aggressive_multiplier,
        ask_markup_aggressive: config.pricing.ask_markup_aggressive,
        ask_markup_conservative: config.pricing.ask_markup_conservative,
        proposal_fee: config.market.proposal_fee,
    }
}

fn backend_from_config(config: &ScenarioConfig) -> Backend {
    match config.backend.mode {
        BackendMode::Rule => Backend::Rule,
        BackendMode::Llm => {
            let mut endpoint = EndpointConfig::default();
            if let Some(url) = &config.backend.base_url {
                endpoint.base_url = url.clone();
            }
            endpoint.model = config.backend.model.clone();
            endpoint.timeout_s = config.backend.timeout_s;
            endpoint.retries = config.backend.retries;
            Backend::Llm {
                endpoint,
                on_error: config.backend.on_error,
            }
        }
    }
}

fn profile_from(config: &AgentConfig, id: String) -> AgentProfile {
    AgentProfile {
        id,
        role: config.role,
        risk: config.risk,
        sensitivity: config.sensitivity,
        endowment: config.endowment,
    }
}

fn market_observation(ledger: &TradeLedger, now_s: u32) -> MarketObservation {
    let trades = ledger.public_history(now_s);
    let trade_prices: Vec<Currency> = trades
        .iter()
        .rev()
        .take(OBSERVATION_WINDOW)
        .map(|t| t.price)
        .rev()
        .collect();
    let mut rejections: Vec<Currency> = ledger
        .proposals()
        .iter()
        .filter(|p| p.status == ProposalStatus::Rejected)
        .map(|p| p.ask_price)
        .collect();
    if rejections.len() > OBSERVATION_WINDOW {
        rejections = rejections.split_off(rejections.len() - OBSERVATION_WINDOW);
    }
    MarketObservation {
        open_proposals: ledger.open_proposals().count(),
        last_trade_prices: trade_prices,
        last_rejection_prices: rejections,
    }
}

fn transcript_rows(transcript: &NegotiationTranscript, trade_id: u64) -> Vec<NegotiationRow> {
    let last = transcript.rounds.len();
    transcript
        .rounds
        .iter()
        .enumerate()
        .map(|(i, round)| {
            let outcome = if i + 1 < last {
                "counter"
            } else {
                match transcript.outcome {
                    Outcome::Agreed { .. } => "agreed",
                    Outcome::Failed => "failed",
                }
            };
            NegotiationRow {
                trade_id,
                round: round.round,
                ask: round.ask,
                bid: round.bid,
                outcome: outcome.to_string(),
            }
        })
        .collect()
}

fn direct_accept_transcript(
    buyer: &AgentProfile,
    seller_id: &str,
    ask: Currency,
    params: &PolicyParams,
    buyer_value: &ValueEstimate,
) -> NegotiationTranscript {
    NegotiationTranscript {
        buyer: buyer.id.clone(),
        seller: seller_id.to_string(),
        rounds: vec![Round {
            round: 1,
            ask,
            bid: ask,
            buyer_decision: RoundDecision::Accept,
            seller_decision: RoundDecision::Accept,
        }],
        outcome: Outcome::Agreed { price: ask },
        max_rounds: 1,
        buyer_reservation: params.buyer_threshold(buyer, buyer_value),
        seller_reservation: params.seller_floor(),
    }
}

#[derive(Debug, Clone)]
struct SellerSlot {
    product: DataProduct,
    proposed: bool,
    sold: bool,
}

/// Runs the full pipeline once. Deterministic under the rule backend.
pub fn run_once(config: &ScenarioConfig) -> Result<RunOutput, Error> {
    config.validate()?;
    let (scenario, base_plan) = scenario_from_config(config)?;
    let horizon = config.run.horizon_s;
    let params = policy_params(config);
    let backend = backend_from_config(config);
    let delta_s = config.signal.adjustment_delta_s;
    let w = config.pricing.w;

    let baseline_result = run(&scenario, &base_plan, horizon)?;

    let controller_profile = profile_from(config.controller(), CONTROLLER_ID.to_string());
    let vehicle_template = config.vehicle_template();

    let mut ledger = TradeLedger::new(config.market.proposal_fee);
    ledger.register_agent(CONTROLLER_ID, controller_profile.endowment)?;

    let mut sim = Simulation::new(&scenario)?;
    let mut current_plan = base_plan.clone();
    let mut adjusted_accidents: Vec<LinkId> = Vec::new();
    let mut sellers: BTreeMap<VehicleId, SellerSlot> = BTreeMap::new();
    let mut proposal_products: BTreeMap<u64, (VehicleId, DataProduct)> = BTreeMap::new();
    let mut value_cache: BTreeMap<u32, ValueEstimate> = BTreeMap::new();
    let mut trades_rows: Vec<TradeRow> = Vec::new();
    let mut negotiation_rows: Vec<NegotiationRow> = Vec::new();

    // The data's worth right now: zero once the accident has already been
    // compensated (a second identical adjustment is not on the table), the
    // twin-run oracle otherwise.
    let evaluate = |link: LinkId,
                        now: u32,
                        adjusted: &[LinkId],
                        cache: &mut BTreeMap<u32, ValueEstimate>|
     -> Result<ValueEstimate, Error> {
        if adjusted.contains(&link) {
            return Ok(ValueEstimate::from_seconds(
                0.0,
                params.conversion_rate,
                ValueMethod::Oracle,
                now,
            ));
        }
        if let Some(value) = cache.get(&now) {
            return Ok(value.clone());
        }
        let probe = DataProduct {
            link_id: link,
            position_m: 0.0,
            observed_at_s: now,
            severity: 0.0,
            observed_flow_vph: 0.0,
        };
        let value = oracle_value(
            &scenario,
            &base_plan,
            &probe,
            now,
            horizon,
            delta_s,
            params.conversion_rate,
        )?;
        cache.insert(now, value.clone());
        Ok(value)
    };

    for t in 0..horizon {
        if t % config.market.observe_period_s == 0 {
            // Sellers: observe, then propose unsold products once each while
            // the incident is still active.
            for vehicle_id in sim.active_vehicles() {
                if !sellers.contains_key(&vehicle_id) {
                    if let Some(product) = sim.observe_accident(vehicle_id)? {
                        sellers.insert(
                            vehicle_id,
                            SellerSlot {
                                product,
                                proposed: false,
                                sold: false,
                            },
                        );
                    }
                }
                let Some(slot) = sellers.get(&vehicle_id) else {
                    continue;
                };
                if slot.proposed || slot.sold {
                    continue;
                }
                let accident_active = scenario
                    .accidents
                    .iter()
                    .any(|a| a.link_id == slot.product.link_id && a.active_at(t));
                if !accident_active {
                    continue;
                }
                let seller_id = format!("vehicle_{}", vehicle_id.0);
                if !ledger.is_registered(&seller_id) {
                    ledger.register_agent(&seller_id, vehicle_template.endowment)?;
                }
                if ledger.balance(&seller_id)? < ledger.proposal_fee() {
                    continue;
                }
                let seller_profile = profile_from(&vehicle_template, seller_id.clone());
                let value = evaluate(slot.product.link_id, t, &adjusted_accidents, &mut value_cache)?;
                let obs = market_observation(&ledger, t);
                let ask = seller_initial_ask(&params, &seller_profile, &value, &obs);
                let product = slot.product.clone();
                let id = ledger.submit_proposal(&seller_id, product.clone(), ask, t)?;
                proposal_products.insert(id, (vehicle_id, product));
                sellers.get_mut(&vehicle_id).expect("slot present").proposed = true;
            }

            // Controller: evaluate open proposals in id order.
            let open_ids: Vec<u64> = ledger.open_proposals().map(|p| p.id).collect();
            for proposal_id in open_ids {
                let (ask, digest_link, seller_id) = {
                    let proposal = ledger
                        .proposals()
                        .iter()
                        .find(|p| p.id == proposal_id)
                        .expect("proposal listed as open");
                    (proposal.ask_price, proposal.digest.link_id, proposal.seller.clone())
                };
                let buyer_value = evaluate(digest_link, t, &adjusted_accidents, &mut value_cache)?;
                let request = DecisionRequest::new(&controller_profile, &buyer_value, ask);
                let obs = market_observation(&ledger, t);
                let response = decide(&backend, &params, &controller_profile, &request, &buyer_value, &obs);

                let seller_profile = profile_from(&vehicle_template, seller_id.clone());
                let transcript = if response.decision {
                    direct_accept_transcript(&controller_profile, &seller_id, ask, &params, &buyer_value)
                } else {
                    run_negotiation(
                        &params,
                        &controller_profile,
                        &buyer_value,
                        &seller_profile,
                        &buyer_value,
                        ask,
                        config.pricing.max_rounds,
                        config.pricing.concession_step,
                    )
                };
                negotiation_rows.extend(transcript_rows(&transcript, proposal_id));

                let mut settled = false;
                if transcript.agreed_price().is_some() {
                    let price = final_price(w, &buyer_value, &transcript)?;
                    if ledger.balance(CONTROLLER_ID)? >= price {
                        let record = ledger.settle(proposal_id, CONTROLLER_ID, price, t)?;
                        settled = true;
                        trades_rows.push(TradeRow {
                            t_s: t,
                            seller: record.seller.clone(),
                            buyer: record.buyer.clone(),
                            price: record.price,
                            accepted: true,
                        });
                        if let Some((vehicle_id, product)) = proposal_products.get(&proposal_id) {
                            if let Some(slot) = sellers.get_mut(vehicle_id) {
                                slot.sold = true;
                            }
                            if !adjusted_accidents.contains(&product.link_id) {
                                current_plan = apply_data_driven_adjustment(
                                    &current_plan,
                                    &scenario.network,
                                    product,
                                    delta_s,
                                )?;
                                adjusted_accidents.push(product.link_id);
                            }
                        }
                        sim.take_snapshot();
                    }
                }
                if !settled {
                    ledger.reject(proposal_id, CONTROLLER_ID, t)?;
                    trades_rows.push(TradeRow {
                        t_s: t,
                        seller: seller_id,
                        buyer: CONTROLLER_ID.to_string(),
                        price: ask,
                        accepted: false,
                    });
                }
            }
        }
        sim.step(&current_plan);
    }

    ledger.expire_open(horizon);
    assert!(ledger.conservation_holds(), "ledger conservation violated");

    let treated_result = sim.into_result();
    let phi_baseline = baseline_average(&baseline_result);
    let phi_treated = baseline_average(&treated_result);
    let mut report = report_from_phis(phi_baseline, phi_treated);
    let prices: Vec<Currency> = ledger.trades().iter().map(|t| t.price).collect();
    report.total_spend = prices.iter().copied().sum();
    report.trade_count = prices.len();

    let summary = RunSummary {
        risk: controller_profile.risk,
        sensitivity: controller_profile.sensitivity,
        flow_vph: config.demand.flow_vph,
        proposals: ledger.proposals().len(),
        accepted: prices.len(),
        trade_prices: prices,
        improvement_pct: report.improvement_pct,
    };

    Ok(RunOutput {
        report,
        trades: trades_rows,
        negotiations: negotiation_rows,
        event_digest: EventDigest::from_result(&treated_result),
        config_echo: config.echo(),
        seed: config.run.seed,
        summary,
    })
}

fn baseline_average(result: &SimResult) -> f64 {
    if result.n == 0 {
        0.0
    } else {
        result.total_wait_s() as f64 / result.n as f64
    }
}

/// One heatmap row: a (risk, sensitivity, flow) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapRow {
    pub risk: RiskPreference,
    pub sensitivity: ValueSensitivity,
    pub flow_vph: f64,
    pub accept_probability: f64,
    pub mean_price: Currency,
    pub mean_improvement_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOutput {
    pub heatmap: Vec<HeatmapRow>,
    pub price_value: Vec<PriceValueRow>,
    /// (cell, message) pairs for cells that failed; the rest still run.
    pub errors: Vec<(String, String)>,
}

pub const DEFAULT_SWEEP_FLOWS: [f64; 5] = [100.0, 200.0, 300.0, 400.0, 500.0];

const PREFERENCE_CELLS: [(RiskPreference, ValueSensitivity); 4] = [
    (RiskPreference::Aggressive, ValueSensitivity::High),
    (RiskPreference::Aggressive, ValueSensitivity::Low),
    (RiskPreference::Conservative, ValueSensitivity::High),
    (RiskPreference::Conservative, ValueSensitivity::Low),
];

/// Runs every (flow x risk x sensitivity) cell independently and merges the
/// results in deterministic cell order. Cell failures are recorded without
/// aborting the sweep.
pub fn run_sweep(config: &ScenarioConfig, flows: &[f64]) -> SweepOutput {
    let mut heatmap = Vec::new();
    let mut price_value = Vec::new();
    let mut errors = Vec::new();

    for &flow in flows {
        for (risk, sensitivity) in PREFERENCE_CELLS {
            let mut cell_config = config.clone();
            cell_config.demand.flow_vph = flow;
            for agent in &mut cell_config.agents {
                agent.risk = risk;
                agent.sensitivity = sensitivity;
            }
            let cell_name = format!(
                "flow={},risk={},sensitivity={}",
                report::fmt_flow(flow),
                risk.as_str(),
                sensitivity.as_str()
            );
            match cell_config.validate().map_err(Error::from).and_then(|_| run_once(&cell_config)) {
                Ok(output) => {
                    let summary = &output.summary;
                    if summary.proposals > 0 {
                        let mean_price = if summary.trade_prices.is_empty() {
                            Currency::ZERO
                        } else {
                            let total: Currency = summary.trade_prices.iter().copied().sum();
                            total.scale(1.0 / summary.trade_prices.len() as f64)
                        };
                        heatmap.push(HeatmapRow {
                            risk,
                            sensitivity,
                            flow_vph: flow,
                            accept_probability: summary.accepted as f64 / summary.proposals as f64,
                            mean_price,
                            mean_improvement_pct: summary.improvement_pct,
                        });
                    }
                    for &price in &summary.trade_prices {
                        price_value.push(PriceValueRow {
                            achieved_price: price,
                            improvement_pct: summary.improvement_pct,
                            risk,
                            sensitivity,
                        });
                    }
                }
                Err(error) => errors.push((cell_name, error.to_string())),
            }
        }
    }

    SweepOutput {
        heatmap,
        price_value,
        errors,
    }
}

/// Twin-run oracle numbers for the config's accident, printed by the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub phi_baseline: f64,
    pub phi_treated: f64,
    pub seconds_saved: f64,
    pub currency_value: Currency,
}

pub fn oracle_report(
    config: &ScenarioConfig,
    trade_time_s: u32,
    delta_override: Option<u32>,
) -> Result<OracleReport, Error> {
    config.validate()?;
    let (scenario, plan) = scenario_from_config(config)?;
    let delta = delta_override.unwrap_or(config.signal.adjustment_delta_s);
    let product = DataProduct {
        link_id: LinkId(config.accident.link),
        position_m: config.accident.position_m,
        observed_at_s: trade_time_s,
        severity: config.accident.severity,
        observed_flow_vph: config.demand.flow_vph,
    };
    let value = oracle_value(
        &scenario,
        &plan,
        &product,
        trade_time_s,
        config.run.horizon_s,
        delta,
        config.pricing.conversion_rate,
    )?;
    let baseline = run(&scenario, &plan, config.run.horizon_s)?;
    let phi_baseline = baseline_average(&baseline);
    Ok(OracleReport {
        phi_baseline,
        phi_treated: phi_baseline - value.seconds_saved,
        seconds_saved: value.seconds_saved,
        currency_value: value.currency_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_run_is_deterministic() {
        let config = ScenarioConfig::default();
        let a = run_once(&config).unwrap();
        let b = run_once(&config).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn default_run_trades_and_improves() {
        let config = ScenarioConfig::default();
        let output = run_once(&config).unwrap();
        assert!(output.summary.accepted >= 1, "expected at least one trade");
        assert!(
            output.report.improvement_pct > 0.0,
            "expected positive improvement, got {}",
            output.report.improvement_pct
        );
        assert!(output.event_digest.accidents_on == 1);
        assert!(output.event_digest.accidents_off == 1);
    }

    #[test]
    fn zero_severity_changes_nothing() {
        let mut config = ScenarioConfig::default();
        config.accident.severity = 0.0;
        let output = run_once(&config).unwrap();
        assert_eq!(output.report.improvement_pct, 0.0);
        assert_eq!(output.summary.proposals, 0);
    }

    #[test]
    fn zero_delta_changes_nothing() {
        let mut config = ScenarioConfig::default();
        config.signal.adjustment_delta_s = 0;
        let output = run_once(&config).unwrap();
        assert_eq!(output.report.improvement_pct, 0.0);
    }

    #[test]
    fn run_output_round_trips_through_json() {
        let config = ScenarioConfig::default();
        let output = run_once(&config).unwrap();
        let json = serde_json::to_string(&output).unwrap();
        let reloaded: RunOutput = serde_json::from_str(&json).unwrap();
        assert_eq!(output, reloaded);
    }

    #[test]
    fn sweep_emits_rows_per_cell_and_isolates_errors() {
        let mut config = ScenarioConfig::default();
        config.run.horizon_s = 750; // keep the test quick
        let output = run_sweep(&config, &[0.0, 220.0]);
        // flow 0 cells produce no proposals and hence no heatmap rows.
        assert!(output
            .heatmap
            .iter()
            .all(|row| row.flow_vph == 220.0));
        assert_eq!(output.heatmap.len(), 4);
        assert!(output.errors.is_empty());
    }

    #[test]
    fn oracle_report_zero_delta_saves_nothing() {
        let config = ScenarioConfig::default();
        let report = oracle_report(&config, 230, Some(0)).unwrap();
        assert_eq!(report.seconds_saved, 0.0);
    }
}
