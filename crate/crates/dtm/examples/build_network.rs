//! Builds grid networks and prints their topology.
//!
//! ```bash
//! cargo run -p dtm --example build_network
//! ```

use dtm::traffic::{build_grid, route_to_opposite_boundary};

fn main() {
    for (rows, cols) in [(1, 1), (2, 2), (2, 3)] {
        let net = build_grid(rows, cols, 500.0, 3).unwrap();
        println!(
            "{rows}x{cols} grid: {} intersections, {} directed links, {} entries",
            net.intersections.len(),
            net.links.len(),
            net.entries.len()
        );
        for &entry in net.entries.iter().take(2) {
            let route = route_to_opposite_boundary(&net, entry).unwrap();
            let hops: Vec<String> = route.iter().map(|l| l.to_string()).collect();
            println!("  route from entry {entry}: links [{}]", hops.join(" -> "));
        }
    }

    // Degenerate arguments are rejected.
    let err = build_grid(0, 1, 500.0, 3).unwrap_err();
    println!("zero rows: {err}");
}
