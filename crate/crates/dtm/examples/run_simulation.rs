//! Runs the default traffic scenario (no trading) and summarizes waits and
//! events.
//!
//! ```bash
//! cargo run -p dtm --example run_simulation
//! ```

use dtm::config::ScenarioConfig;
use dtm::harness::scenario_from_config;
use dtm::metrics::average_waiting_time;
use dtm::traffic::{run, EventKind};

fn main() {
    let config = ScenarioConfig::default();
    let (scenario, plan) = scenario_from_config(&config).unwrap();
    let result = run(&scenario, &plan, config.run.horizon_s).unwrap();

    println!(
        "{} vehicles over {} s, total queued time {} s",
        result.n,
        config.run.horizon_s,
        result.total_wait_s()
    );
    println!(
        "average waiting time: {:.3} s",
        average_waiting_time(&result).unwrap()
    );

    let accident_on = result
        .events
        .iter()
        .find(|e| e.kind == EventKind::AccidentOn)
        .map(|e| e.t_s);
    let accident_off = result
        .events
        .iter()
        .find(|e| e.kind == EventKind::AccidentOff)
        .map(|e| e.t_s);
    println!("accident window in the log: {accident_on:?} .. {accident_off:?}");

    let discharges = result
        .events
        .iter()
        .filter(|e| e.kind == EventKind::Discharge)
        .count();
    println!("{} queue discharges, {} events total", discharges, result.events.len());
}
