//! Deterministic demand generation: fixed-headway arrivals per entry with a
//! seeded phase offset, each spawn carrying a fixed route to the opposite
//! boundary.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::network::{LinkId, NodeId, RoadNetwork};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpawnEvent {
    /// Arrival time in seconds; may be fractional, the vehicle enters on the
    /// tick containing it.
    pub time_s: f64,
    pub entry: LinkId,
    pub route: Vec<LinkId>,
    pub flow_vph: f64,
}

/// Fixed-headway arrival times for one entry: `offset + k * headway` below
/// the horizon.
pub fn spawn_times_for_entry(offset_s: f64, headway_s: f64, horizon_s: u32) -> Vec<f64> {
    let mut times = Vec::new();
    let mut t = offset_s;
    while t < horizon_s as f64 {
        times.push(t);
        t += headway_s;
    }
    times
}

/// Per-entry phase offset in [0, headway), drawn from a stream keyed by the
/// demand seed and the entry link id.
pub fn entry_offset(seed: u64, entry: LinkId, headway_s: f64) -> f64 {
    let key = seed ^ (u64::from(entry.0) + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.gen_range(0.0..headway_s)
}

/// Shortest route from an entry link to the boundary opposite its origin,
/// ties broken toward lower link ids.
pub fn route_to_opposite_boundary(network: &RoadNetwork, entry: LinkId) -> Option<Vec<LinkId>> {
    let entry_link = network.link(entry).ok()?;
    let target = network.mirror_boundary(entry_link.from_node)?;

    // BFS over directed links; expanding neighbors in ascending link-id order
    // makes the first path found the lowest-id tie-break.
    let node_count = network
        .links
        .iter()
        .map(|l| l.from_node.0.max(l.to_node.0) + 1)
        .max()? as usize;
    let mut parent: Vec<Option<LinkId>> = vec![None; node_count];
    let mut seen = vec![false; node_count];
    let mut queue = VecDeque::new();
    seen[entry_link.to_node.0 as usize] = true;
    queue.push_back(entry_link.to_node);

    while let Some(node) = queue.pop_front() {
        if node == target {
            break;
        }
        for link in network.out_links(node) {
            let next = link.to_node.0 as usize;
            if !seen[next] {
                seen[next] = true;
                parent[next] = Some(link.id);
                queue.push_back(link.to_node);
            }
        }
    }
    if !seen[target.0 as usize] {
        return None;
    }

    let mut route = Vec::new();
    let mut node = target;
    while node != entry_link.to_node {
        let via = parent[node.0 as usize]?;
        route.push(via);
        node = network.link(via).ok()?.from_node;
    }
    route.push(entry);
    route.reverse();
    Some(route)
}

/// Deterministic demand for every entry of the network, merged in time order
/// (ties broken by entry id). Flow 0 yields no arrivals.
pub fn generate_demand(
    network: &RoadNetwork,
    flow_vph: f64,
    horizon_s: u32,
    seed: u64,
) -> Vec<SpawnEvent> {
    if flow_vph <= 0.0 {
        return Vec::new();
    }
    let headway = 3600.0 / flow_vph;
    let mut events = Vec::new();
    for &entry in &network.entries {
        let route = match route_to_opposite_boundary(network, entry) {
            Some(r) => r,
            None => continue,
        };
        let offset = entry_offset(seed, entry, headway);
        for t in spawn_times_for_entry(offset, headway, horizon_s) {
            events.push(SpawnEvent {
                time_s: t,
                entry,
                route: route.clone(),
                flow_vph,
            });
        }
    }
    events.sort_by(|a, b| {
        a.time_s
            .partial_cmp(&b.time_s)
            .unwrap()
            .then(a.entry.cmp(&b.entry))
    });
    events
}

/// Routing helper used by tests and callers that look up a spawn's origin.
pub fn entry_for_route(route: &[LinkId]) -> Option<LinkId> {
    route.first().copied()
}

#[allow(dead_code)]
fn _assert_node_unused(_: NodeId) {}
