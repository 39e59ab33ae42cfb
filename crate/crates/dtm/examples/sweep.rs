//! Sweeps traffic flows against the four preference cells and prints the
//! acceptance heatmap.
//!
//! ```bash
//! cargo run -p dtm --example sweep
//! ```

use std::path::Path;

use dtm::config::ScenarioConfig;
use dtm::harness::report::write_sweep_outputs;
use dtm::harness::run_sweep;

fn main() {
    let config = ScenarioConfig::default();
    let flows = [100.0, 200.0, 300.0];
    let output = run_sweep(&config, &flows);

    println!(
        "{:<13} {:<12} {:>6} {:>8} {:>11} {:>13}",
        "risk", "sensitivity", "flow", "accept", "mean price", "improvement"
    );
    for row in &output.heatmap {
        println!(
            "{:<13} {:<12} {:>6} {:>8.3} {:>11} {:>12.2}%",
            row.risk.as_str(),
            row.sensitivity.as_str(),
            row.flow_vph,
            row.accept_probability,
            row.mean_price.to_string(),
            row.mean_improvement_pct
        );
    }
    println!("{} settled trades across the sweep", output.price_value.len());
    if !output.errors.is_empty() {
        println!("failed cells: {:?}", output.errors);
    }

    let out = Path::new("out/sweep");
    write_sweep_outputs(out, &output).unwrap();
    println!("reports written to {}", out.display());
}
