//! Shows the key=value config format: parsing, defaults, validation errors
//! and the effective-configuration echo.
//!
//! ```bash
//! cargo run -p dtm --example config_file
//! ```

use dtm::config::ScenarioConfig;

fn main() {
    let text = "\
# peak-hour variant of the default scenario
demand.flow_vph=340
accident.severity=0.8
agents.0.role=controller
agents.0.risk=aggressive
agents.0.sensitivity=high
agents.0.endowment=100
agents.1.role=vehicle
agents.1.risk=aggressive
agents.1.sensitivity=high
agents.1.endowment=30
";
    let config = ScenarioConfig::from_text(text).unwrap();
    println!("flow {} veh/h, severity {}", config.demand.flow_vph, config.accident.severity);
    println!("controller risk: {}", config.controller().risk.as_str());

    println!();
    println!("effective configuration:");
    for (key, value) in config.echo().into_iter().take(12) {
        println!("  {key}={value}");
    }
    println!("  ...");

    println!();
    for bad in ["accident.severity=1.5", "demand.floww=3", "run.seed"] {
        match ScenarioConfig::from_text(bad) {
            Ok(_) => println!("{bad:?}: accepted"),
            Err(e) => println!("{bad:?}: {e}"),
        }
    }
}
