//! CSV emission with pinned column orders and number formats: currency with
//! two fractional digits, seconds and percentages with three.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::{RunOutput, SweepOutput};

pub fn fmt_seconds(value: f64) -> String {
    format!("{value:.3}")
}

pub fn fmt_percent(value: f64) -> String {
    format!("{value:.3}")
}

pub fn fmt_flow(value: f64) -> String {
    if value == value.trunc() {
        format!("{}", value as i64)
    } else {
        format!("{value}")
    }
}

/// Writes trades.csv, metrics.csv, negotiations.csv and run.json.
pub fn write_run_outputs(out_dir: &Path, output: &RunOutput) -> std::io::Result<()> {
    fs::create_dir_all(out_dir)?;

    let mut trades = String::from("t_s,seller,buyer,price,accepted\n");
    for row in &output.trades {
        trades.push_str(&format!(
            "{},{},{},{},{}\n",
            row.t_s, row.seller, row.buyer, row.price, row.accepted
        ));
    }
    write_file(&out_dir.join("trades.csv"), &trades)?;

    let report = &output.report;
    let metrics = format!(
        "phi_baseline,phi_treated,delta_phi,improvement_pct,total_spend,trades\n{},{},{},{},{},{}\n",
        fmt_seconds(report.phi_baseline),
        fmt_seconds(report.phi_treated),
        fmt_seconds(report.delta_phi),
        fmt_percent(report.improvement_pct),
        report.total_spend,
        report.trade_count
    );
    write_file(&out_dir.join("metrics.csv"), &metrics)?;

    let mut negotiations = String::from("trade_id,round,ask,bid,outcome\n");
    for row in &output.negotiations {
        negotiations.push_str(&format!(
            "{},{},{},{},{}\n",
            row.trade_id, row.round, row.ask, row.bid, row.outcome
        ));
    }
    write_file(&out_dir.join("negotiations.csv"), &negotiations)?;

    write_file(
        &out_dir.join("run.json"),
        &serde_json::to_string_pretty(output).expect("run output serializes"),
    )?;
    Ok(())
}

/// Writes heatmap.csv, price_value.csv, errors.csv and sweep.json.
pub fn write_sweep_outputs(out_dir: &Path, output: &SweepOutput) -> std::io::Result<()> {
    fs::create_dir_all(out_dir)?;

    let mut heatmap = String::from(
        "risk,sensitivity,flow_vph,accept_probability,mean_price,mean_improvement_pct\n",
    );
    for row in &output.heatmap {
        heatmap.push_str(&format!(
            "{},{},{},{},{:.2},{}\n",
            row.risk.as_str(),
            row.sensitivity.as_str(),
            fmt_flow(row.flow_vph),
            fmt_percent(row.accept_probability),
            row.mean_price,
            fmt_percent(row.mean_improvement_pct)
        ));
    }
    write_file(&out_dir.join("heatmap.csv"), &heatmap)?;

    let mut prices = String::from("achieved_price,improvement_pct,risk,sensitivity\n");
    for row in &output.price_value {
        prices.push_str(&format!(
            "{},{},{},{}\n",
            row.achieved_price,
            fmt_percent(row.improvement_pct),
            row.risk.as_str(),
            row.sensitivity.as_str()
        ));
    }
    write_file(&out_dir.join("price_value.csv"), &prices)?;

    let mut errors = String::from("cell,error\n");
    for (cell, error) in &output.errors {
        errors.push_str(&format!("{},{}\n", cell, error.replace(',', ";")));
    }
    write_file(&out_dir.join("errors.csv"), &errors)?;

    write_file(
        &out_dir.join("sweep.json"),
        &serde_json::to_string_pretty(output).expect("sweep output serializes"),
    )?;
    Ok(())
}

fn write_file(path: &Path, content: &str) -> std::io::Result<()> {
    let mut file = fs::File::create(path)?;
    file.write_all(content.as_bytes())
}
