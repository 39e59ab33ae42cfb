//! Values the default accident observation with the twin-run oracle at
//! several trade times and green-shift sizes.
//!
//! ```bash
//! cargo run -p dtm --example oracle_value
//! ```

use dtm::agents::oracle_value;
use dtm::config::ScenarioConfig;
use dtm::harness::scenario_from_config;
use dtm::traffic::{DataProduct, LinkId};

fn main() {
    let config = ScenarioConfig::default();
    let (scenario, plan) = scenario_from_config(&config).unwrap();
    let product = DataProduct {
        link_id: LinkId(config.accident.link),
        position_m: config.accident.position_m,
        observed_at_s: 230,
        severity: config.accident.severity,
        observed_flow_vph: config.demand.flow_vph,
    };

    println!("{:>10} {:>6} {:>14} {:>14}", "trade time", "delta", "seconds saved", "currency");
    for trade_time in [205u32, 230, 400, 650] {
        for delta in [0u32, 3] {
            let value = oracle_value(
                &scenario,
                &plan,
                &product,
                trade_time,
                config.run.horizon_s,
                delta,
                config.pricing.conversion_rate,
            )
            .unwrap();
            println!(
                "{:>10} {:>6} {:>14.3} {:>14}",
                trade_time, delta, value.seconds_saved, value.currency_value
            );
        }
    }
    println!();
    println!("earlier trades are worth more: the adjustment helps for longer");
}
