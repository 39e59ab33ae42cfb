//! Waiting-time metrics and tabular aggregates over runs and trades.

use serde::{Deserialize, Serialize};

use crate::agents::{RiskPreference, ValueSensitivity};
use crate::currency::Currency;
use crate::error::MetricsError;
use crate::traffic::SimResult;

/// Headline evaluation figures for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    /// Average waiting time of the measured (treated) run, seconds.
    pub phi: f64,
    pub phi_baseline: f64,
    pub phi_treated: f64,
    /// Signed change, treated minus baseline: negative when waits shrink.
    pub delta_phi: f64,
    /// 100 * (baseline - treated) / baseline: positive when waits shrink.
    pub improvement_pct: f64,
    pub total_spend: Currency,
    pub trade_count: usize,
}

/// Mean accumulated waiting time over every spawned vehicle.
pub fn average_waiting_time(result: &SimResult) -> Result<f64, MetricsError> {
    if result.n == 0 {
        return Err(MetricsError::EmptyPopulation);
    }
    Ok(result.total_wait_s() as f64 / result.n as f64)
}

/// Builds the waiting-time comparison between a baseline and a treated run.
/// Spend and trade count start at zero; the harness fills them in.
pub fn delta_phi(baseline: &SimResult, treated: &SimResult) -> Result<MetricReport, MetricsError> {
    let phi_baseline = average_waiting_time(baseline)?;
    let phi_treated = average_waiting_time(treated)?;
    Ok(report_from_phis(phi_baseline, phi_treated))
}

/// Same report, straight from the two averages.
pub fn report_from_phis(phi_baseline: f64, phi_treated: f64) -> MetricReport {
    let improvement_pct = if phi_baseline == 0.0 {
        0.0
    } else {
        100.0 * (phi_baseline - phi_treated) / phi_baseline
    };
    MetricReport {
        phi: phi_treated,
        phi_baseline,
        phi_treated,
        delta_phi: phi_treated - phi_baseline,
        improvement_pct,
        total_spend: Currency::ZERO,
        trade_count: 0,
    }
}

/// Per-run summary consumed by the sweep aggregators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub risk: RiskPreference,
    pub sensitivity: ValueSensitivity,
    pub flow_vph: f64,
    pub proposals: usize,
    pub accepted: usize,
    pub trade_prices: Vec<Currency>,
    pub improvement_pct: f64,
}

/// One cell of the acceptance-probability table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceRow {
    pub risk: RiskPreference,
    pub sensitivity: ValueSensitivity,
    pub accept_probability: f64,
    pub mean_price: f64,
    pub mean_improvement_pct: f64,
}

/// Aggregates run summaries into one row per (risk, sensitivity) cell.
/// Cells with zero proposals are omitted.
pub fn acceptance_table(runs: &[RunSummary]) -> Vec<AcceptanceRow> {
    let mut rows = Vec::new();
    for risk in [RiskPreference::Aggressive, RiskPreference::Conservative] {
        for sensitivity in [ValueSensitivity::High, ValueSensitivity::Low] {
            let cell: Vec<&RunSummary> = runs
                .iter()
                .filter(|r| r.risk == risk && r.sensitivity == sensitivity)
                .collect();
            let proposals: usize = cell.iter().map(|r| r.proposals).sum();
            if proposals == 0 {
                continue;
            }
            let accepted: usize = cell.iter().map(|r| r.accepted).sum();
            let prices: Vec<Currency> = cell
                .iter()
                .flat_map(|r| r.trade_prices.iter().copied())
                .collect();
            let mean_price = if prices.is_empty() {
                0.0
            } else {
                prices.iter().map(|p| p.as_major()).sum::<f64>() / prices.len() as f64
            };
            let mean_improvement_pct =
                cell.iter().map(|r| r.improvement_pct).sum::<f64>() / cell.len() as f64;
            rows.push(AcceptanceRow {
                risk,
                sensitivity,
                accept_probability: accepted as f64 / proposals as f64,
                mean_price,
                mean_improvement_pct,
            });
        }
    }
    rows
}

/// One settled trade with the run context it happened in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceValueRow {
    pub achieved_price: Currency,
    pub improvement_pct: f64,
    pub risk: RiskPreference,
    pub sensitivity: ValueSensitivity,
}

/// Flattens run summaries into one row per settled trade.
pub fn price_value_table(runs: &[RunSummary]) -> Vec<PriceValueRow> {
    let mut rows = Vec::new();
    for run in runs {
        for &price in &run.trade_prices {
            rows.push(PriceValueRow {
                achieved_price: price,
                improvement_pct: run.improvement_pct,
                risk: run.risk,
                sensitivity: run.sensitivity,
            });
        }
    }
    rows
}
