//! Grid road network: directed links, boundary entries and signalized
//! intersections with two phase groups.

use serde::{Deserialize, Serialize};

use crate::error::TrafficError;

/// Default free-flow speed in m/s (roughly 50 km/h).
pub const DEFAULT_FREE_SPEED_MPS: f64 = 13.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LinkId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl std::fmt::Display for LinkId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Which signal phase group serves an approach.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PhaseGroup {
    NorthSouth,
    EastWest,
}

/// Compass side of the grid a boundary node sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    North,
    West,
    East,
    South,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::North => Side::South,
            Side::South => Side::North,
            Side::West => Side::East,
            Side::East => Side::West,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectedLink {
    pub id: LinkId,
    pub from_node: NodeId,
    pub to_node: NodeId,
    pub length_m: f64,
    pub lanes: u32,
    pub free_speed_mps: f64,
    /// Orientation of travel; vertical links feed the north-south phase group.
    pub phase_group: PhaseGroup,
}

impl DirectedLink {
    /// Free-flow traversal time rounded to whole 1-second ticks (at least 1).
    pub fn travel_ticks(&self) -> u32 {
        ((self.length_m / self.free_speed_mps).round() as u32).max(1)
    }
}

/// A signalized node with its incoming approaches split into phase groups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Intersection {
    pub node: NodeId,
    pub approaches_ns: Vec<LinkId>,
    pub approaches_ew: Vec<LinkId>,
}

/// A node on the grid boundary where vehicles enter or leave.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryNode {
    pub node: NodeId,
    pub side: Side,
    /// Grid row for east/west boundaries, grid column for north/south ones.
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoadNetwork {
    pub rows: usize,
    pub cols: usize,
    pub links: Vec<DirectedLink>,
    /// Inbound boundary links, in id order.
    pub entries: Vec<LinkId>,
    /// Outbound boundary links, in id order.
    pub exits: Vec<LinkId>,
    pub intersections: Vec<Intersection>,
    pub boundary_nodes: Vec<BoundaryNode>,
    node_count: u32,
}

/// Builds a rows x cols grid with bidirectional links on every edge and
/// entry/exit stubs on the boundary. Node and link ids are assigned in a
/// row-major sweep so construction is deterministic.
pub fn build_grid(
    rows: usize,
    cols: usize,
    link_length_m: f64,
    lanes: u32,
) -> Result<RoadNetwork, TrafficError> {
    if rows == 0 || cols == 0 {
        return Err(TrafficError::InvalidScenario(
            "grid must have at least one row and one column".into(),
        ));
    }
    if link_length_m <= 0.0 {
        return Err(TrafficError::InvalidScenario(
            "link length must be positive".into(),
        ));
    }
    if lanes == 0 {
        return Err(TrafficError::InvalidScenario(
            "links need at least one lane".into(),
        ));
    }

    let mut net = RoadNetwork {
        rows,
        cols,
        links: Vec::new(),
        entries: Vec::new(),
        exits: Vec::new(),
        intersections: Vec::new(),
        boundary_nodes: Vec::new(),
        node_count: (rows * cols) as u32,
    };

    let grid_node = |r: usize, c: usize| NodeId((r * cols + c) as u32);

    let new_boundary = |net: &mut RoadNetwork, side: Side, index: usize| {
        let node = NodeId(net.node_count);
        net.node_count += 1;
        net.boundary_nodes.push(BoundaryNode { node, side, index });
        node
    };

    // Emits the directed pair for one undirected edge, a->b first.
    let add_edge = |net: &mut RoadNetwork, a: NodeId, b: NodeId, group: PhaseGroup| {
        for (from, to) in [(a, b), (b, a)] {
            let id = LinkId(net.links.len() as u32);
            net.links.push(DirectedLink {
                id,
                from_node: from,
                to_node: to,
                length_m: link_length_m,
                lanes,
                free_speed_mps: DEFAULT_FREE_SPEED_MPS,
                phase_group: group,
            });
        }
    };

    for r in 0..rows {
        for c in 0..cols {
            let node = grid_node(r, c);
            if r == 0 {
                let b = new_boundary(&mut net, Side::North, c);
                add_edge(&mut net, b, node, PhaseGroup::NorthSouth);
            }
            if c == 0 {
                let b = new_boundary(&mut net, Side::West, r);
                add_edge(&mut net, b, node, PhaseGroup::EastWest);
            }
            if c + 1 < cols {
                add_edge(&mut net, node, grid_node(r, c + 1), PhaseGroup::EastWest);
            } else {
                let b = new_boundary(&mut net, Side::East, r);
                add_edge(&mut net, node, b, PhaseGroup::EastWest);
            }
            if r + 1 < rows {
                add_edge(&mut net, node, grid_node(r + 1, c), PhaseGroup::NorthSouth);
            } else {
                let b = new_boundary(&mut net, Side::South, c);
                add_edge(&mut net, node, b, PhaseGroup::NorthSouth);
            }
        }
    }

    for link in &net.links {
        if net.is_boundary(link.from_node) {
            net.entries.push(link.id);
        }
        if net.is_boundary(link.to_node) {
            net.exits.push(link.id);
        }
    }

    for r in 0..rows {
        for c in 0..cols {
            let node = grid_node(r, c);
            let mut ns = Vec::new();
            let mut ew = Vec::new();
            for link in &net.links {
                if link.to_node == node {
                    match link.phase_group {
                        PhaseGroup::NorthSouth => ns.push(link.id),
                        PhaseGroup::EastWest => ew.push(link.id),
                    }
                }
            }
            net.intersections.push(Intersection {
                node,
                approaches_ns: ns,
                approaches_ew: ew,
            });
        }
    }

    Ok(net)
}

impl RoadNetwork {
    pub fn link(&self, id: LinkId) -> Result<&DirectedLink, TrafficError> {
        self.links
            .get(id.0 as usize)
            .ok_or(TrafficError::UnknownLink(id.0))
    }

    pub fn is_boundary(&self, node: NodeId) -> bool {
        node.0 >= (self.rows * self.cols) as u32
    }

    pub fn is_intersection(&self, node: NodeId) -> bool {
        !self.is_boundary(node)
    }

    pub fn intersection(&self, node: NodeId) -> Option<&Intersection> {
        self.intersections.iter().find(|i| i.node == node)
    }

    /// Index of the intersection a link feeds, if its head is signalized.
    pub fn downstream_intersection(&self, link: LinkId) -> Result<Option<usize>, TrafficError> {
        let link = self.link(link)?;
        if self.is_boundary(link.to_node) {
            return Ok(None);
        }
        Ok(self
            .intersections
            .iter()
            .position(|i| i.node == link.to_node))
    }

    /// Outgoing links of a node in ascending id order.
    pub fn out_links(&self, node: NodeId) -> impl Iterator<Item = &DirectedLink> {
        self.links.iter().filter(move |l| l.from_node == node)
    }

    pub fn boundary_info(&self, node: NodeId) -> Option<&BoundaryNode> {
        self.boundary_nodes.iter().find(|b| b.node == node)
    }

    /// The boundary node geometrically opposite the given one (same row or
    /// column on the far side).
    pub fn mirror_boundary(&self, node: NodeId) -> Option<NodeId> {
        let info = self.boundary_info(node)?;
        let target = info.side.opposite();
        self.boundary_nodes
            .iter()
            .find(|b| b.side == target && b.index == info.index)
            .map(|b| b.node)
    }
}
