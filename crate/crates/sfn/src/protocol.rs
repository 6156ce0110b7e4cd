//! Asynchronous distributed clustering protocol.
//!
//! Core nodes flood cluster-initiation (`Type1`) announcements through the
//! network; service nodes track the nearest announcement per core in their
//! `temp_tab` and, when the shared timeout expires, commit to the closest
//! core and send a join request (`Type2`) source-routed back along the
//! announcement's path. Every node is a pure state machine driven by the
//! [`simnet`](crate::simnet) event loop.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::graph::{CorePartition, Graph, NodeId};
use crate::simnet::{
    DelayModel, Node, Output, Payload, SimError, Simulator, Time, TraceEvent,
};

pub const DEFAULT_D_MAX: u32 = 10;

#[derive(Debug, thiserror::Error)]
pub enum ProtocolError {
    #[error("no core nodes at threshold {threshold}; nothing can initiate a cluster")]
    NoCores { threshold: u32 },
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// The two message kinds of the protocol. The network address of a node in
/// the simulated transport is its node id, so the `(nodeId, netAddr)` pair
/// collapses to one field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProtocolMessage {
    /// Cluster initiation, flooded outward from `origin`. `path` holds the
    /// intermediate nodes traversed so far, excluding the origin and the
    /// receiver; `hop_cnt` starts at 1 on the core's own sends.
    Type1 {
        origin: NodeId,
        path: Vec<NodeId>,
        hop_cnt: u32,
    },
    /// Join request from `service` to `core`, carrying the distance and
    /// path copied from the winning announcement. `route` lists the hops
    /// still to traverse, ending at the core.
    Type2 {
        service: NodeId,
        core: NodeId,
        hop_cnt: u32,
        path: Vec<NodeId>,
        route: Vec<NodeId>,
    },
}

impl Payload for ProtocolMessage {
    fn label(&self) -> &'static str {
        match self {
            ProtocolMessage::Type1 { .. } => "type1",
            ProtocolMessage::Type2 { .. } => "type2",
        }
    }
    fn hop_count(&self) -> Option<u32> {
        match self {
            ProtocolMessage::Type1 { hop_cnt, .. } => Some(*hop_cnt),
            ProtocolMessage::Type2 { hop_cnt, .. } => Some(*hop_cnt),
        }
    }
}

/// Best announcement seen from one core.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TempEntry {
    pub via: NodeId,
    pub hop_cnt: u32,
    pub path: Vec<NodeId>,
}

#[derive(Debug, Clone)]
pub struct ServiceNodeState {
    pub node_id: NodeId,
    pub neighbors: Vec<NodeId>,
    /// At most one entry per core: the minimum hop count seen so far.
    pub temp_tab: BTreeMap<NodeId, TempEntry>,
    pub committed: Option<NodeId>,
    pub committed_hops: Option<u32>,
    pub committed_at: Option<Time>,
    /// Set when the timer expired with an empty `temp_tab`.
    pub isolated: bool,
    d_max: u32,
}

impl ServiceNodeState {
    fn new(node_id: NodeId, neighbors: Vec<NodeId>, d_max: u32) -> Self {
        Self {
            node_id,
            neighbors,
            temp_tab: BTreeMap::new(),
            committed: None,
            committed_hops: None,
            committed_at: None,
            isolated: false,
            d_max,
        }
    }

    /// Builds the join request for `core` and the send reaching the first
    /// hop of the reverse route.
    fn join_request(&self, core: NodeId, entry: &TempEntry) -> Output<ProtocolMessage> {
        let mut route: Vec<NodeId> = entry.path.iter().rev().copied().collect();
        route.push(core);
        let first_hop = route.remove(0);
        Output::Send {
            to: first_hop,
            msg: ProtocolMessage::Type2 {
                service: self.node_id,
                core,
                hop_cnt: entry.hop_cnt,
                path: entry.path.clone(),
                route,
            },
        }
    }

    /// Handles a cluster initiation: keep the entry when it is the first or
    /// strictly shorter than the stored one, then re-flood it to every
    /// neighbor except the deliverer. Anything else is dropped.
    pub fn on_type1(
        &mut self,
        origin: NodeId,
        path: &[NodeId],
        hop_cnt: u32,
        from: NodeId,
        now: Time,
    ) -> Vec<Output<ProtocolMessage>> {
        if self.committed.is_some() || hop_cnt > self.d_max {
            return Vec::new();
        }
        match self.temp_tab.get(&origin) {
            Some(entry) if hop_cnt >= entry.hop_cnt => return Vec::new(),
            _ => {}
        }
        self.temp_tab.insert(
            origin,
            TempEntry {
                via: from,
                hop_cnt,
                path: path.to_vec(),
            },
        );

        let mut outputs = Vec::new();

        // A node with a single neighbor directly attached to a core can
        // commit without waiting: no other announcement can beat hop 1.
        if self.neighbors.len() == 1 && hop_cnt == 1 {
            self.committed = Some(origin);
            self.committed_hops = Some(hop_cnt);
            self.committed_at = Some(now);
            let entry = self.temp_tab[&origin].clone();
            outputs.push(self.join_request(origin, &entry));
            return outputs;
        }

        let next_hop_cnt = hop_cnt + 1;
        if next_hop_cnt <= self.d_max {
            let mut forwarded_path = path.to_vec();
            forwarded_path.push(self.node_id);
            for &nb in &self.neighbors {
                if nb == from {
                    continue;
                }
                outputs.push(Output::Send {
                    to: nb,
                    msg: ProtocolMessage::Type1 {
                        origin,
                        path: forwarded_path.clone(),
                        hop_cnt: next_hop_cnt,
                    },
                });
            }
        }
        outputs
    }

    /// Timeout decision: commit to the entry with minimum hop count, ties
    /// to the lowest core id, and send the join request; an empty table
    /// marks the node isolated. A no-op when already committed.
    pub fn on_timer(&mut self, now: Time) -> Vec<Output<ProtocolMessage>> {
        if self.committed.is_some() {
            return Vec::new();
        }
        // BTreeMap iterates cores in ascending id order, so strict `<`
        // keeps the lowest id among equal hop counts.
        let best = self
            .temp_tab
            .iter()
            .reduce(|best, cand| if cand.1.hop_cnt < best.1.hop_cnt { cand } else { best });
        match best {
            None => {
                self.isolated = true;
                Vec::new()
            }
            Some((&core, entry)) => {
                let entry = entry.clone();
                self.committed = Some(core);
                self.committed_hops = Some(entry.hop_cnt);
                self.committed_at = Some(now);
                vec![self.join_request(core, &entry)]
            }
        }
    }
}

/// A joined service node as the core records it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterEntry {
    pub service: NodeId,
    pub hop_cnt: u32,
    pub path: Vec<NodeId>,
}

#[derive(Debug, Clone)]
pub struct CoreNodeState {
    pub node_id: NodeId,
    pub neighbors: Vec<NodeId>,
    /// Service nodes that joined this cluster, one entry per service.
    pub cluster_tab: BTreeMap<NodeId, ClusterEntry>,
    /// Other cores whose announcements reached this node.
    pub core_tab: BTreeSet<NodeId>,
    /// Best hop count relayed per origin, bounding the re-flood.
    relay_best: BTreeMap<NodeId, u32>,
    d_max: u32,
}

impl CoreNodeState {
    fn new(node_id: NodeId, neighbors: Vec<NodeId>, d_max: u32) -> Self {
        Self {
            node_id,
            neighbors,
            cluster_tab: BTreeMap::new(),
            core_tab: BTreeSet::new(),
            relay_best: BTreeMap::new(),
            d_max,
        }
    }

    /// Another core's announcement: record it in `core_tab` and relay it
    /// like a service node would, so nodes beyond this core still learn
    /// their distances.
    pub fn on_type1(
        &mut self,
        origin: NodeId,
        path: &[NodeId],
        hop_cnt: u32,
        from: NodeId,
    ) -> Vec<Output<ProtocolMessage>> {
        if origin == self.node_id || hop_cnt > self.d_max {
            return Vec::new();
        }
        self.core_tab.insert(origin);
        match self.relay_best.get(&origin) {
            Some(&best) if hop_cnt >= best => return Vec::new(),
            _ => {}
        }
        self.relay_best.insert(origin, hop_cnt);

        let next_hop_cnt = hop_cnt + 1;
        if next_hop_cnt > self.d_max {
            return Vec::new();
        }
        let mut forwarded_path = path.to_vec();
        forwarded_path.push(self.node_id);
        self.neighbors
            .iter()
            .filter(|&&nb| nb != from)
            .map(|&nb| Output::Send {
                to: nb,
                msg: ProtocolMessage::Type1 {
                    origin,
                    path: forwarded_path.clone(),
                    hop_cnt: next_hop_cnt,
                },
            })
            .collect()
    }

    /// A join request addressed to this core.
    pub fn on_type2(&mut self, service: NodeId, hop_cnt: u32, path: &[NodeId]) {
        let entry = ClusterEntry {
            service,
            hop_cnt,
            path: path.to_vec(),
        };
        if let Some(old) = self.cluster_tab.insert(service, entry) {
            log::warn!(
                "core {}: duplicate join from service {service} (had hop {})",
                self.node_id,
                old.hop_cnt
            );
        }
    }
}

/// A node participating in a clustering round.
#[derive(Debug, Clone)]
pub enum ClusterNode {
    Core(CoreNodeState),
    Service(ServiceNodeState),
}

impl ClusterNode {
    fn node_id(&self) -> NodeId {
        match self {
            ClusterNode::Core(c) => c.node_id,
            ClusterNode::Service(s) => s.node_id,
        }
    }

    /// Forwards a routed join request one hop, or consumes it at its core.
    fn handle_type2(
        &mut self,
        service: NodeId,
        core: NodeId,
        hop_cnt: u32,
        path: &[NodeId],
        route: &[NodeId],
    ) -> Vec<Output<ProtocolMessage>> {
        if route.is_empty() {
            // reached the addressee
            if let ClusterNode::Core(state) = self {
                debug_assert_eq!(state.node_id, core);
                state.on_type2(service, hop_cnt, path);
            } else {
                log::warn!(
                    "join request for core {core} ended at service node {}",
                    self.node_id()
                );
            }
            return Vec::new();
        }
        let mut rest = route.to_vec();
        let next = rest.remove(0);
        vec![Output::Send {
            to: next,
            msg: ProtocolMessage::Type2 {
                service,
                core,
                hop_cnt,
                path: path.to_vec(),
                route: rest,
            },
        }]
    }
}

impl Node<ProtocolMessage> for ClusterNode {
    fn id(&self) -> NodeId {
        self.node_id()
    }

    fn on_message(
        &mut self,
        from: NodeId,
        msg: &ProtocolMessage,
        now: Time,
    ) -> Vec<Output<ProtocolMessage>> {
        match msg {
            ProtocolMessage::Type1 {
                origin,
                path,
                hop_cnt,
            } => match self {
                ClusterNode::Core(state) => state.on_type1(*origin, path, *hop_cnt, from),
                ClusterNode::Service(state) => {
                    state.on_type1(*origin, path, *hop_cnt, from, now)
                }
            },
            ProtocolMessage::Type2 {
                service,
                core,
                hop_cnt,
                path,
                route,
            } => self.handle_type2(*service, *core, *hop_cnt, path, route),
        }
    }

    fn on_timer(&mut self, now: Time) -> Vec<Output<ProtocolMessage>> {
        match self {
            ClusterNode::Core(_) => Vec::new(),
            ClusterNode::Service(state) => state.on_timer(now),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RoundConfig {
    pub delays: DelayModel,
    /// Shared decision timeout; defaults to `4 * d_max * max_delay`, which
    /// satisfies the optimality sufficiency condition.
    pub tau_end: Option<f64>,
    pub d_max: u32,
    pub event_cap: Option<u64>,
}

impl RoundConfig {
    pub fn new(delays: DelayModel) -> Self {
        Self {
            delays,
            tau_end: None,
            d_max: DEFAULT_D_MAX,
            event_cap: None,
        }
    }

    pub fn with_tau_end(mut self, tau_end: f64) -> Self {
        self.tau_end = Some(tau_end);
        self
    }

    pub fn effective_tau_end(&self) -> f64 {
        self.tau_end
            .unwrap_or_else(|| 4.0 * self.d_max as f64 * self.delays.max_delay())
    }
}

#[derive(Debug)]
pub struct RoundOutcome {
    pub cores: BTreeMap<NodeId, CoreNodeState>,
    pub services: BTreeMap<NodeId, ServiceNodeState>,
    pub trace: Vec<TraceEvent>,
    pub tau_end: f64,
}

impl RoundOutcome {
    /// Service -> (core, hop count) as the cores recorded it.
    pub fn assignment_pairs(&self) -> BTreeMap<NodeId, (NodeId, u32)> {
        let mut out = BTreeMap::new();
        for (&core, state) in &self.cores {
            for entry in state.cluster_tab.values() {
                out.insert(entry.service, (core, entry.hop_cnt));
            }
        }
        out
    }

    /// Service nodes whose timer expired with an empty table.
    pub fn isolated(&self) -> Vec<NodeId> {
        self.services
            .values()
            .filter(|s| s.isolated)
            .map(|s| s.node_id)
            .collect()
    }
}

/// Runs one clustering round to quiescence: every node arms its timeout,
/// every core announces itself with hop count 1, announcements flood, and
/// service nodes commit when their timer fires.
pub fn start_round(
    g: &Graph,
    part: &CorePartition,
    config: &RoundConfig,
) -> Result<RoundOutcome, ProtocolError> {
    if part.n_cores() == 0 {
        return Err(ProtocolError::NoCores {
            threshold: part.threshold(),
        });
    }
    let tau_end = config.effective_tau_end();

    let nodes: Vec<ClusterNode> = (1..=g.n_nodes())
        .map(|id| {
            let neighbors = g.neighbors(id).to_vec();
            if part.is_core(id) {
                ClusterNode::Core(CoreNodeState::new(id, neighbors, config.d_max))
            } else {
                ClusterNode::Service(ServiceNodeState::new(id, neighbors, config.d_max))
            }
        })
        .collect();

    let mut sim = Simulator::new(g, nodes, config.delays.clone())?;
    if let Some(cap) = config.event_cap {
        sim = sim.with_event_cap(cap);
    }

    for id in 1..=g.n_nodes() {
        sim.set_timer(id, tau_end);
    }
    for &core in part.core_ids() {
        for &nb in g.neighbors(core) {
            sim.send(
                core,
                nb,
                ProtocolMessage::Type1 {
                    origin: core,
                    path: Vec::new(),
                    hop_cnt: 1,
                },
            )?;
        }
    }
    sim.run(None)?;

    let trace = sim.trace().to_vec();
    let mut cores = BTreeMap::new();
    let mut services = BTreeMap::new();
    for node in sim.into_nodes() {
        match node {
            ClusterNode::Core(state) => {
                cores.insert(state.node_id, state);
            }
            ClusterNode::Service(state) => {
                services.insert(state.node_id, state);
            }
        }
    }
    Ok(RoundOutcome {
        cores,
        services,
        trace,
        tau_end,
    })
}

/// Exportable snapshot of a finished round.
#[derive(Debug, Serialize)]
pub struct RoundExport {
    pub cores: Vec<CoreExport>,
    pub isolated: Vec<NodeId>,
    pub params: RoundParams,
}

#[derive(Debug, Serialize)]
pub struct CoreExport {
    pub id: NodeId,
    pub cluster: Vec<ClusterEntry>,
    pub core_tab: Vec<NodeId>,
}

#[derive(Debug, Serialize)]
pub struct RoundParams {
    pub n_nodes: u32,
    pub threshold: u32,
    pub tau_end: f64,
    pub d_max: u32,
}

impl RoundOutcome {
    pub fn export(&self, g: &Graph, part: &CorePartition, d_max: u32) -> RoundExport {
        RoundExport {
            cores: self
                .cores
                .values()
                .map(|c| CoreExport {
                    id: c.node_id,
                    cluster: c.cluster_tab.values().cloned().collect(),
                    core_tab: c.core_tab.iter().copied().collect(),
                })
                .collect(),
            isolated: self.isolated(),
            params: RoundParams {
                n_nodes: g.n_nodes(),
                threshold: part.threshold(),
                tau_end: self.tau_end,
                d_max,
            },
        }
    }
}
