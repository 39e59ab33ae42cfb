//! Runs the complete observe/propose/decide/negotiate/settle pipeline on the
//! default scenario and writes the CSV reports to ./out/full_run.
//!
//! ```bash
//! cargo run -p dtm --example full_run
//! ```

use std::path::Path;

use dtm::config::ScenarioConfig;
use dtm::harness::report::write_run_outputs;
use dtm::harness::run_once;

fn main() {
    let config = ScenarioConfig::default();
    let output = run_once(&config).unwrap();

    println!(
        "baseline {:.3} s -> treated {:.3} s ({:.2}% improvement)",
        output.report.phi_baseline, output.report.phi_treated, output.report.improvement_pct
    );
    println!(
        "{} proposals, {} settled, controller spent {}",
        output.summary.proposals, output.summary.accepted, output.report.total_spend
    );
    for trade in output.trades.iter().filter(|t| t.accepted) {
        println!("  trade at {} s: {} -> {} for {}", trade.t_s, trade.seller, trade.buyer, trade.price);
    }
    println!(
        "events: {} spawns, {} discharges, {} completions",
        output.event_digest.spawns, output.event_digest.discharges, output.event_digest.completes
    );

    let out = Path::new("out/full_run");
    write_run_outputs(out, &output).unwrap();
    println!("reports written to {}", out.display());
}
