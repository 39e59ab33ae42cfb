//! Replay driver: runs the pipeline with a canned trade script instead of
//! live decisions, so a documented trading session can be reproduced without
//! any backend.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    baseline_average, profile_from, scenario_from_config, EventDigest, RunOutput, TradeRow,
    CONTROLLER_ID,
};
use crate::config::ScenarioConfig;
use crate::currency::Currency;
use crate::error::{ConfigError, Error};
use crate::market::TradeLedger;
use crate::metrics::{report_from_phis, RunSummary};
use crate::traffic::{apply_data_driven_adjustment, run, LinkId, Simulation};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptedTrade {
    pub t_s: u32,
    pub price: Currency,
}

/// An ordered list of trades to force through the market.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayScript {
    pub trades: Vec<ScriptedTrade>,
}

/// The shipped replay: three settlements shortly after the incident starts,
/// 12 currency each.
pub fn builtin_script() -> ReplayScript {
    ReplayScript {
        trades: vec![
            ScriptedTrade {
                t_s: 230,
                price: Currency::from_major(12.0),
            },
            ScriptedTrade {
                t_s: 235,
                price: Currency::from_major(12.0),
            },
            ScriptedTrade {
                t_s: 240,
                price: Currency::from_major(12.0),
            },
        ],
    }
}

/// Loads a fixture file: ordinary scenario keys plus `replay.<n>.t_s` and
/// `replay.<n>.price` rows describing the scripted trades.
pub fn load_fixture(path: &Path) -> Result<(ScenarioConfig, ReplayScript), Error> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(e.to_string()))?;
    let (config, extras) = ScenarioConfig::from_str_with_extras(&text)?;

    let mut t_by_index: BTreeMap<usize, u32> = BTreeMap::new();
    let mut price_by_index: BTreeMap<usize, Currency> = BTreeMap::new();
    for (line, key) in &extras {
        let Some(rest) = key.strip_prefix("replay.") else {
            return Err(ConfigError::Parse {
                line: *line,
                message: format!("unknown key {key:?}"),
            }
            .into());
        };
        // Re-read the value from the file text: extras only carry keys.
        let value = text
            .lines()
            .nth(line - 1)
            .and_then(|l| l.split_once('=').map(|(_, v)| v.trim().to_string()))
            .unwrap_or_default();
        let (index, field) = rest.split_once('.').ok_or(ConfigError::Parse {
            line: *line,
            message: format!("replay key must be replay.<n>.<field>, got {key:?}"),
        })?;
        let index: usize = index.parse().map_err(|_| ConfigError::Parse {
            line: *line,
            message: format!("bad replay index in {key:?}"),
        })?;
        match field {
            "t_s" => {
                let t = value.parse::<u32>().map_err(|_| ConfigError::Parse {
                    line: *line,
                    message: format!("replay.{index}.t_s expects an integer"),
                })?;
                t_by_index.insert(index, t);
            }
            "price" => {
                let p = value.parse::<f64>().map_err(|_| ConfigError::Parse {
                    line: *line,
                    message: format!("replay.{index}.price expects a number"),
                })?;
                price_by_index.insert(index, Currency::from_major(p));
            }
            _ => {
                return Err(ConfigError::Parse {
                    line: *line,
                    message: format!("unknown key {key:?}"),
                }
                .into())
            }
        }
    }

    let mut trades = Vec::new();
    for (expected, (&index, &t_s)) in t_by_index.iter().enumerate() {
        if index != expected {
            return Err(ConfigError::Range(format!(
                "replay.{index} (indices must be contiguous from 0)"
            ))
            .into());
        }
        let price = *price_by_index
            .get(&index)
            .ok_or_else(|| ConfigError::Range(format!("replay.{index}.price (missing)")))?;
        trades.push(ScriptedTrade { t_s, price });
    }
    if trades.len() != price_by_index.len() {
        return Err(ConfigError::Range("replay (price without t_s)".to_string()).into());
    }
    if trades.is_empty() {
        return Err(ConfigError::Range("replay (no trades)".to_string()).into());
    }
    Ok((config, ReplayScript { trades }))
}

/// Runs the scenario, forcing the scripted settlements: at each scripted
/// tick the lowest-id observing vehicle (preferring ones that have not sold
/// yet) posts a proposal at the scripted price and the controller settles it
/// immediately. The signal adjustment is applied at the first settlement.
pub fn run_replay(config: &ScenarioConfig, script: &ReplayScript) -> Result<RunOutput, Error> {
    config.validate()?;
    for trade in &script.trades {
        if trade.t_s >= config.run.horizon_s {
            return Err(Error::Replay(format!(
                "scripted trade at {} s lies outside the {} s horizon",
                trade.t_s, config.run.horizon_s
            )));
        }
    }
    let (scenario, base_plan) = scenario_from_config(config)?;
    let horizon = config.run.horizon_s;
    let delta_s = config.signal.adjustment_delta_s;

    let baseline_result = run(&scenario, &base_plan, horizon)?;

    let controller_profile = profile_from(config.controller(), CONTROLLER_ID.to_string());
    let vehicle_template = config.vehicle_template();
    let mut ledger = TradeLedger::new(config.market.proposal_fee);
    ledger.register_agent(CONTROLLER_ID, controller_profile.endowment)?;

    let mut sim = Simulation::new(&scenario)?;
    let mut current_plan = base_plan.clone();
    let mut adjusted_accidents: Vec<LinkId> = Vec::new();
    let mut past_sellers: Vec<u32> = Vec::new();
    let mut trades_rows: Vec<TradeRow> = Vec::new();

    let mut script_cursor = 0usize;
    for t in 0..horizon {
        while script_cursor < script.trades.len() && script.trades[script_cursor].t_s == t {
            let scripted = &script.trades[script_cursor];
            script_cursor += 1;

            // Lowest-id vehicle with a view of the incident; sellers that
            // already sold only repeat when nobody fresh is available.
            let mut candidate: Option<(u32, _)> = None;
            for vehicle_id in sim.active_vehicles() {
                if let Some(product) = sim.observe_accident(vehicle_id)? {
                    let fresh = !past_sellers.contains(&vehicle_id.0);
                    match candidate {
                        None => candidate = Some((vehicle_id.0, product)),
                        Some((prev, _)) if fresh && past_sellers.contains(&prev) => {
                            candidate = Some((vehicle_id.0, product))
                        }
                        _ => {}
                    }
                }
            }
            let (vehicle, product) = candidate.ok_or_else(|| {
                Error::Replay(format!("no vehicle can observe the incident at {t} s"))
            })?;

            let seller_id = format!("vehicle_{vehicle}");
            if !ledger.is_registered(&seller_id) {
                ledger.register_agent(&seller_id, vehicle_template.endowment)?;
            }
            let proposal_id = ledger.submit_proposal(&seller_id, product.clone(), scripted.price, t)?;
            let record = ledger.settle(proposal_id, CONTROLLER_ID, scripted.price, t)?;
            past_sellers.push(vehicle);
            trades_rows.push(TradeRow {
                t_s: t,
                seller: record.seller.clone(),
                buyer: record.buyer.clone(),
                price: record.price,
                accepted: true,
            });
            if !adjusted_accidents.contains(&product.link_id) {
                current_plan =
                    apply_data_driven_adjustment(&current_plan, &scenario.network, &product, delta_s)?;
                adjusted_accidents.push(product.link_id);
            }
            sim.take_snapshot();
        }
        sim.step(&current_plan);
    }

    ledger.expire_open(horizon);
    assert!(ledger.conservation_holds(), "ledger conservation violated");

    let treated_result = sim.into_result();
    let mut report = report_from_phis(
        baseline_average(&baseline_result),
        baseline_average(&treated_result),
    );
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
        negotiations: Vec::new(),
        event_digest: EventDigest::from_result(&treated_result),
        config_echo: config.echo(),
        seed: config.run.seed,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_replay_settles_three_trades_for_36() {
        let config = ScenarioConfig::default();
        let output = run_replay(&config, &builtin_script()).unwrap();
        assert_eq!(output.trades.len(), 3);
        let times: Vec<u32> = output.trades.iter().map(|t| t.t_s).collect();
        assert_eq!(times, vec![230, 235, 240]);
        assert_eq!(output.report.total_spend, Currency::from_major(36.0));
        assert_eq!(output.report.trade_count, 3);
    }

    #[test]
    fn replay_is_deterministic() {
        let config = ScenarioConfig::default();
        let a = run_replay(&config, &builtin_script()).unwrap();
        let b = run_replay(&config, &builtin_script()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn scripted_trade_past_horizon_is_rejected() {
        let config = ScenarioConfig::default();
        let script = ReplayScript {
            trades: vec![ScriptedTrade {
                t_s: 5000,
                price: Currency::from_major(1.0),
            }],
        };
        assert!(run_replay(&config, &script).is_err());
    }

    #[test]
    fn fixture_parsing_round_trip() {
        let dir = std::env::temp_dir().join(format!("dtm-fixture-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("fixture.cfg");
        std::fs::write(
            &path,
            "demand.flow_vph=220\nreplay.0.t_s=230\nreplay.0.price=12\nreplay.1.t_s=235\nreplay.1.price=12\n",
        )
        .unwrap();
        let (config, script) = load_fixture(&path).unwrap();
        assert_eq!(config.demand.flow_vph, 220.0);
        assert_eq!(script.trades.len(), 2);
        assert_eq!(script.trades[0].price, Currency::from_major(12.0));
        std::fs::remove_dir_all(&dir).ok();
    }
}
