//! Steps the simulation through the accident window and shows what a
//! connected vehicle can observe.
//!
//! ```bash
//! cargo run -p dtm --example observe_accident
//! ```

use dtm::config::ScenarioConfig;
use dtm::harness::scenario_from_config;
use dtm::traffic::Simulation;

fn main() {
    let config = ScenarioConfig::default();
    let (scenario, plan) = scenario_from_config(&config).unwrap();
    let mut sim = Simulation::new(&scenario).unwrap();

    let mut first_product = None;
    for t in 0..400u32 {
        if t % config.market.observe_period_s == 0 {
            for vehicle in sim.active_vehicles() {
                if let Some(product) = sim.observe_accident(vehicle).unwrap() {
                    if first_product.is_none() {
                        println!("vehicle {vehicle} observes the incident at t={t} s:");
                        println!("  link          {}", product.link_id);
                        println!("  position      {} m", product.position_m);
                        println!("  severity      {}", product.severity);
                        println!("  observed flow {} veh/h", product.observed_flow_vph);
                        first_product = Some(product);
                    }
                }
            }
        }
        sim.step(&plan);
    }

    match first_product {
        Some(product) => println!("content hash: {:016x}", product.content_hash()),
        None => println!("no observation inside the window"),
    }
}
