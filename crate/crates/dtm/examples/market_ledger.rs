//! Walks the trade ledger through registration, a fee-bearing proposal,
//! settlement and the public history, checking conservation throughout.
//!
//! ```bash
//! cargo run -p dtm --example market_ledger
//! ```

use dtm::currency::Currency;
use dtm::market::TradeLedger;
use dtm::traffic::{DataProduct, LinkId};

fn main() {
    let mut ledger = TradeLedger::new(Currency::from_major(1.0));
    ledger.register_agent("vehicle_0", Currency::from_major(30.0)).unwrap();
    ledger.register_agent("controller", Currency::from_major(100.0)).unwrap();
    println!(
        "start: vehicle_0 {} / controller {}",
        ledger.balance("vehicle_0").unwrap(),
        ledger.balance("controller").unwrap()
    );

    let product = DataProduct {
        link_id: LinkId(0),
        position_m: 250.0,
        observed_at_s: 230,
        severity: 0.5,
        observed_flow_vph: 220.0,
    };
    let id = ledger
        .submit_proposal("vehicle_0", product, Currency::from_major(12.0), 230)
        .unwrap();
    println!(
        "proposal {id}: fee paid, vehicle_0 now {}, fee pool {}",
        ledger.balance("vehicle_0").unwrap(),
        ledger.fee_pool()
    );

    let record = ledger
        .settle(id, "controller", Currency::from_major(12.0), 230)
        .unwrap();
    println!(
        "settled at {}: vehicle_0 {}, controller {}",
        record.price,
        ledger.balance("vehicle_0").unwrap(),
        ledger.balance("controller").unwrap()
    );
    println!("delivered severity {}", record.delivered.severity);

    // Double settlement is refused and leaves everything intact.
    let err = ledger.settle(id, "controller", Currency::from_major(12.0), 231).unwrap_err();
    println!("second settle: {err}");

    println!("history up to 230 s: {} trade(s)", ledger.public_history(230).len());
    println!("conservation holds: {}", ledger.conservation_holds());
}
