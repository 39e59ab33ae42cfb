//! Replays the built-in scripted session: three settlements at 230, 235 and
//! 240 seconds, 12 currency each.
//!
//! ```bash
//! cargo run -p dtm --example replay
//! ```

use dtm::config::ScenarioConfig;
use dtm::harness::replay::{builtin_script, run_replay};

fn main() {
    let config = ScenarioConfig::default();
    let script = builtin_script();
    let output = run_replay(&config, &script).unwrap();

    for trade in &output.trades {
        println!(
            "t={} s: {} sold to {} for {}",
            trade.t_s, trade.seller, trade.buyer, trade.price
        );
    }
    println!(
        "total spend {} over {} trades",
        output.report.total_spend, output.report.trade_count
    );
    println!(
        "waiting time {:.3} s -> {:.3} s ({:.2}% improvement)",
        output.report.phi_baseline, output.report.phi_treated, output.report.improvement_pct
    );
}
