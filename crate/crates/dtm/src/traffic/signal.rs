//! Fixed-time two-phase signal plans and the data-driven green reallocation.

use serde::{Deserialize, Serialize};

use super::accident::DataProduct;
use super::network::{PhaseGroup, RoadNetwork};
use crate::error::TrafficError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntersectionTiming {
    pub cycle_s: u32,
    pub green_ns_s: u32,
    pub green_ew_s: u32,
    pub offset_s: u32,
}

impl IntersectionTiming {
    pub fn validate(&self) -> Result<(), TrafficError> {
        if self.green_ns_s < 1 || self.green_ew_s < 1 {
            return Err(TrafficError::InvalidScenario(
                "phase greens must be at least 1 s".into(),
            ));
        }
        if self.green_ns_s + self.green_ew_s != self.cycle_s {
            return Err(TrafficError::InvalidScenario(
                "phase greens must sum to the cycle".into(),
            ));
        }
        Ok(())
    }

    /// The phase group served at second `t`.
    pub fn green_group(&self, t: u32) -> PhaseGroup {
        let tau = (t + self.offset_s) % self.cycle_s;
        if tau < self.green_ns_s {
            PhaseGroup::NorthSouth
        } else {
            PhaseGroup::EastWest
        }
    }
}

/// Per-intersection timings, indexed like `RoadNetwork::intersections`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignalPlan {
    pub timings: Vec<IntersectionTiming>,
}

impl SignalPlan {
    /// A uniform plan for every intersection of the network.
    pub fn uniform(
        network: &RoadNetwork,
        cycle_s: u32,
        green_ns_s: u32,
        green_ew_s: u32,
    ) -> Result<SignalPlan, TrafficError> {
        let timing = IntersectionTiming {
            cycle_s,
            green_ns_s,
            green_ew_s,
            offset_s: 0,
        };
        timing.validate()?;
        Ok(SignalPlan {
            timings: vec![timing; network.intersections.len()],
        })
    }

    pub fn validate(&self) -> Result<(), TrafficError> {
        self.timings.iter().try_for_each(IntersectionTiming::validate)
    }
}

/// Reallocates green time at the intersection fed by the product's link:
/// the accident approach's phase group gains `delta_s`, the other loses it,
/// the cycle stays unchanged, every other intersection is untouched.
pub fn apply_data_driven_adjustment(
    plan: &SignalPlan,
    network: &RoadNetwork,
    product: &DataProduct,
    delta_s: u32,
) -> Result<SignalPlan, TrafficError> {
    let link = network.link(product.link_id)?;
    let idx = network
        .downstream_intersection(product.link_id)?
        .ok_or(TrafficError::UnknownLink(product.link_id.0))?;

    let mut adjusted = plan.clone();
    let timing = &mut adjusted.timings[idx];
    let (gain, lose) = match link.phase_group {
        PhaseGroup::NorthSouth => (&mut timing.green_ns_s, &mut timing.green_ew_s),
        PhaseGroup::EastWest => (&mut timing.green_ew_s, &mut timing.green_ns_s),
    };
    if *lose <= delta_s {
        return Err(TrafficError::InvalidAdjustment(format!(
            "shortening a {} s green by {} s would drop it below 1 s",
            lose, delta_s
        )));
    }
    *gain += delta_s;
    *lose -= delta_s;
    Ok(adjusted)
}
