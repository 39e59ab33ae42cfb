//! Thin CLI over the library: load a config, dispatch, report.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dtm::config::ScenarioConfig;
use dtm::harness::report::{write_run_outputs, write_sweep_outputs};
use dtm::harness::replay::{builtin_script, load_fixture, run_replay};
use dtm::harness::{oracle_report, run_once, run_sweep, DEFAULT_SWEEP_FLOWS};
use dtm::Error;

#[derive(Parser)]
#[command(name = "dtm", version, about = "Vehicular data-trading market simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write trades.csv, metrics.csv, negotiations.csv.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every (flow x preference) cell and write heatmap.csv, price_value.csv.
    Sweep {
        config: PathBuf,
        /// Comma-separated flows in veh/hour (default 100,200,300,400,500).
        #[arg(long)]
        flows: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the twin-run valuation of the configured accident.
    Oracle {
        config: PathBuf,
        /// When the adjustment takes effect.
        #[arg(long, default_value_t = 230)]
        trade_time: u32,
        /// Override the green-time shift in seconds.
        #[arg(long)]
        delta: Option<u32>,
    },
    /// Replay a canned trade script (the built-in one with "builtin").
    Replay {
        fixture: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Check a config file and exit.
    Validate { config: PathBuf },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(error.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run { config, out } => {
            let config = ScenarioConfig::load(&config)?;
            let output = run_once(&config)?;
            write_run_outputs(&out, &output)?;
            println!(
                "phi_baseline={:.3} phi_treated={:.3} improvement_pct={:.3} trades={} spend={}",
                output.report.phi_baseline,
                output.report.phi_treated,
                output.report.improvement_pct,
                output.report.trade_count,
                output.report.total_spend
            );
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::Sweep { config, flows, out } => {
            let config = ScenarioConfig::load(&config)?;
            let flows = match flows {
                Some(list) => parse_flows(&list)?,
                None => DEFAULT_SWEEP_FLOWS.to_vec(),
            };
            let output = run_sweep(&config, &flows);
            write_sweep_outputs(&out, &output)?;
            println!(
                "cells={} rows={} trades={} errors={}",
                flows.len() * 4,
                output.heatmap.len(),
                output.price_value.len(),
                output.errors.len()
            );
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::Oracle {
            config,
            trade_time,
            delta,
        } => {
            let config = ScenarioConfig::load(&config)?;
            let report = oracle_report(&config, trade_time, delta)?;
            println!("phi_baseline={:.3}", report.phi_baseline);
            println!("phi_treated={:.3}", report.phi_treated);
            println!("seconds_saved={:.3}", report.seconds_saved);
            println!("currency_value={}", report.currency_value);
            Ok(())
        }
        Command::Replay { fixture, out } => {
            let (config, script) = if fixture.as_os_str() == "builtin" {
                (ScenarioConfig::default(), builtin_script())
            } else {
                load_fixture(&fixture)?
            };
            let output = run_replay(&config, &script)?;
            write_run_outputs(&out, &output)?;
            for trade in &output.trades {
                println!(
                    "trade t_s={} seller={} buyer={} price={}",
                    trade.t_s, trade.seller, trade.buyer, trade.price
                );
            }
            println!(
                "total_spend={} improvement_pct={:.3}",
                output.report.total_spend, output.report.improvement_pct
            );
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::Validate { config } => {
            ScenarioConfig::load(&config)?;
            println!("ok");
            Ok(())
        }
    }
}

fn parse_flows(list: &str) -> Result<Vec<f64>, Error> {
    let mut flows = Vec::new();
    for part in list.split(',') {
        let flow: f64 = part
            .trim()
            .parse()
            .map_err(|_| dtm::error::ConfigError::Range(format!("--flows entry {part:?}")))?;
        flows.push(flow);
    }
    if flows.is_empty() {
        return Err(dtm::error::ConfigError::Range("--flows (empty)".to_string()).into());
    }
    Ok(flows)
}
