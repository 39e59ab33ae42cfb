//! Accident events and the observations vehicles trade.

use serde::{Deserialize, Serialize};

use super::network::LinkId;
use crate::error::TrafficError;

/// A capacity-reducing incident on one link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccidentEvent {
    pub link_id: LinkId,
    pub start_s: u32,
    pub end_s: u32,
    /// Fraction of the approach capacity lost, in (0, 1].
    pub severity: f64,
    /// Meters from the link entrance.
    pub position_m: f64,
}

impl AccidentEvent {
    pub fn validate(&self, link_length_m: f64) -> Result<(), TrafficError> {
        if self.start_s >= self.end_s {
            return Err(TrafficError::InvalidScenario(
                "accident must start before it ends".into(),
            ));
        }
        if !(self.severity > 0.0 && self.severity <= 1.0) {
            return Err(TrafficError::InvalidScenario(
                "accident severity must be in (0, 1]".into(),
            ));
        }
        if self.position_m < 0.0 || self.position_m > link_length_m {
            return Err(TrafficError::InvalidScenario(
                "accident position must lie on the link".into(),
            ));
        }
        Ok(())
    }

    pub fn active_at(&self, t_s: u32) -> bool {
        t_s >= self.start_s && t_s < self.end_s
    }
}

/// Discharge-capacity multiplier for an approach while an incident is active.
///
/// Capacity past an incident collapses much faster than the blocked-lane
/// share alone: stopped vehicles, merging and rubbernecking throttle the
/// open lanes too. The quartic keeps the factor at 1 for severity 0 and 0
/// for a full blockage, and is calibrated so a half-severity incident
/// saturates an approach fed at a few hundred vehicles per hour.
pub fn incident_capacity_factor(severity: f64) -> f64 {
    let open = (1.0 - severity).clamp(0.0, 1.0);
    open.powi(4)
}

/// A tradable accident observation: where and when it was seen, how bad it
/// is, and the flow level the observer entered the network with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataProduct {
    pub link_id: LinkId,
    pub position_m: f64,
    pub observed_at_s: u32,
    pub severity: f64,
    pub observed_flow_vph: f64,
}

impl DataProduct {
    /// Stable content hash (FNV-1a over the canonical JSON encoding) used to
    /// match delivered products against their pre-trade digest.
    pub fn content_hash(&self) -> u64 {
        let encoded = serde_json::to_string(self).expect("product serializes");
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
        for byte in encoded.as_bytes() {
            hash ^= u64::from(*byte);
            hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        }
        hash
    }
}
