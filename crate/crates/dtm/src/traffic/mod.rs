//! Deterministic mesoscopic grid traffic simulation: network construction,
//! fixed-time signals, fixed-headway demand, accident overlays and the
//! point-queue engine.

pub mod accident;
pub mod demand;
pub mod network;
pub mod signal;
pub mod sim;

pub use accident::{incident_capacity_factor, AccidentEvent, DataProduct};
pub use demand::{generate_demand, route_to_opposite_boundary, SpawnEvent};
pub use network::{build_grid, DirectedLink, LinkId, NodeId, PhaseGroup, RoadNetwork, Side};
pub use signal::{apply_data_driven_adjustment, IntersectionTiming, SignalPlan};
pub use sim::{
    run, run_with_plan_switch, Event, EventKind, Scenario, SimResult, Simulation, StateSnapshot,
    TrafficState, VehicleId, VehicleLocation, VehicleRecord, OBSERVATION_RADIUS_M,
    SATURATION_RATE_VPS_PER_LANE,
};
