//! Deterministic discrete-event simulated network.
//!
//! Nodes exchange messages only along edges of a frozen [`Graph`]; each
//! message is delivered after a configurable delay, and every node owns a
//! single resettable timer. Events fire in `(time, sequence)` order, so a
//! run is fully determined by the graph, the delay model, the seed and the
//! node handlers. The event loop is single-threaded by contract: a handler
//! has exclusive access to its own state while it runs and talks to the
//! world only through the outputs it returns.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::graph::{Graph, NodeId};

pub type Time = f64;

pub const DEFAULT_EVENT_CAP: u64 = 5_000_000;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("send from {from} to {to} is not along an edge; nodes only know their neighbors")]
    NonAdjacentSend { from: NodeId, to: NodeId },
    #[error("event cap {cap} exceeded; the protocol looks runaway")]
    EventCapExceeded { cap: u64 },
    #[error("graph has {nodes} nodes but {handlers} handlers were supplied")]
    HandlerCountMismatch { nodes: u32, handlers: usize },
    #[error("delays must be positive, got {0}")]
    NonPositiveDelay(f64),
}

/// Message delay per link.
#[derive(Debug, Clone)]
pub enum DelayModel {
    Fixed(f64),
    /// Independent uniform draw in `[lo, hi)` per send, from this seed.
    Uniform { lo: f64, hi: f64, seed: u64 },
    /// Fixed delay per undirected edge, `default` for unlisted edges.
    PerLink {
        delays: BTreeMap<(NodeId, NodeId), f64>,
        default: f64,
    },
}

impl DelayModel {
    pub fn fixed(delay: f64) -> Result<Self, SimError> {
        if delay <= 0.0 {
            return Err(SimError::NonPositiveDelay(delay));
        }
        Ok(DelayModel::Fixed(delay))
    }

    /// Default model: uniform in `[0.5, 1.5)`.
    pub fn uniform_default(seed: u64) -> Self {
        DelayModel::Uniform {
            lo: 0.5,
            hi: 1.5,
            seed,
        }
    }

    pub fn uniform(lo: f64, hi: f64, seed: u64) -> Result<Self, SimError> {
        if lo <= 0.0 {
            return Err(SimError::NonPositiveDelay(lo));
        }
        if hi < lo {
            return Err(SimError::NonPositiveDelay(hi));
        }
        Ok(DelayModel::Uniform { lo, hi, seed })
    }

    pub fn per_link(
        delays: BTreeMap<(NodeId, NodeId), f64>,
        default: f64,
    ) -> Result<Self, SimError> {
        if default <= 0.0 {
            return Err(SimError::NonPositiveDelay(default));
        }
        if let Some(bad) = delays.values().find(|&&d| d <= 0.0) {
            return Err(SimError::NonPositiveDelay(*bad));
        }
        Ok(DelayModel::PerLink { delays, default })
    }

    /// Largest delay this model can produce.
    pub fn max_delay(&self) -> f64 {
        match self {
            DelayModel::Fixed(d) => *d,
            DelayModel::Uniform { hi, .. } => *hi,
            DelayModel::PerLink { delays, default } => {
                delays.values().copied().fold(*default, f64::max)
            }
        }
    }
}

/// What the trace records about a payload.
pub trait Payload: Clone {
    fn label(&self) -> &'static str;
    fn hop_count(&self) -> Option<u32>;
}

/// Effects a handler hands back to the event loop.
#[derive(Debug, Clone)]
pub enum Output<M> {
    Send { to: NodeId, msg: M },
    /// (Re)arms the node's timer; an earlier pending expiry is superseded.
    SetTimer { duration: f64 },
}

/// Per-node state machine driven by the event loop.
pub trait Node<M> {
    fn id(&self) -> NodeId;
    fn on_message(&mut self, from: NodeId, msg: &M, now: Time) -> Vec<Output<M>>;
    fn on_timer(&mut self, now: Time) -> Vec<Output<M>>;
}

#[derive(Debug, Clone)]
enum EventKind<M> {
    Deliver { from: NodeId, to: NodeId, msg: M },
    TimerExpiry { node: NodeId, generation: u64 },
}

/// A scheduled event; `sequence` breaks ties between equal fire times.
#[derive(Debug, Clone)]
struct SimEvent<M> {
    fire_time: Time,
    sequence: u64,
    kind: EventKind<M>,
}

impl<M> PartialEq for SimEvent<M> {
    fn eq(&self, other: &Self) -> bool {
        self.sequence == other.sequence && self.fire_time == other.fire_time
    }
}
impl<M> Eq for SimEvent<M> {}

impl<M> Ord for SimEvent<M> {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed: BinaryHeap is a max-heap, we pop the smallest (time, seq)
        other
            .fire_time
            .total_cmp(&self.fire_time)
            .then_with(|| other.sequence.cmp(&self.sequence))
    }
}
impl<M> PartialOrd for SimEvent<M> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// One line of the run trace; serializes to the line-delimited JSON export.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEvent {
    pub t: Time,
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub from: Option<NodeId>,
    pub to: NodeId,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub msg_type: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hop_cnt: Option<u32>,
}

/// Serializes a trace as one JSON object per line.
pub fn trace_to_jsonl(trace: &[TraceEvent]) -> String {
    let mut out = String::new();
    for ev in trace {
        out.push_str(&serde_json::to_string(ev).expect("trace events serialize"));
        out.push('\n');
    }
    out
}

pub struct Simulator<'g, M, N> {
    graph: &'g Graph,
    nodes: Vec<N>,
    delays: DelayModel,
    rng: ChaCha8Rng,
    queue: BinaryHeap<SimEvent<M>>,
    now: Time,
    sequence: u64,
    timer_generation: Vec<u64>,
    trace: Vec<TraceEvent>,
    event_cap: u64,
    processed: u64,
}

impl<'g, M: Payload, N: Node<M>> Simulator<'g, M, N> {
    /// One handler per node, in node-id order.
    pub fn new(graph: &'g Graph, nodes: Vec<N>, delays: DelayModel) -> Result<Self, SimError> {
        if nodes.len() != graph.n_nodes() as usize {
            return Err(SimError::HandlerCountMismatch {
                nodes: graph.n_nodes(),
                handlers: nodes.len(),
            });
        }
        let seed = match &delays {
            DelayModel::Uniform { seed, .. } => *seed,
            _ => 0,
        };
        Ok(Self {
            graph,
            nodes,
            delays,
            rng: ChaCha8Rng::seed_from_u64(seed),
            queue: BinaryHeap::new(),
            now: 0.0,
            sequence: 0,
            timer_generation: vec![0; graph.n_nodes() as usize + 1],
            trace: Vec::new(),
            event_cap: DEFAULT_EVENT_CAP,
            processed: 0,
        })
    }

    pub fn with_event_cap(mut self, cap: u64) -> Self {
        self.event_cap = cap;
        self
    }

    pub fn now(&self) -> Time {
        self.now
    }

    pub fn trace(&self) -> &[TraceEvent] {
        &self.trace
    }

    pub fn node(&self, id: NodeId) -> &N {
        &self.nodes[id as usize - 1]
    }

    /// Consumes the simulator, returning the final node states.
    pub fn into_nodes(self) -> Vec<N> {
        self.nodes
    }

    fn delay_for(&mut self, from: NodeId, to: NodeId) -> f64 {
        match &self.delays {
            DelayModel::Fixed(d) => *d,
            DelayModel::Uniform { lo, hi, .. } => {
                if lo == hi {
                    *lo
                } else {
                    self.rng.gen_range(*lo..*hi)
                }
            }
            DelayModel::PerLink { delays, default } => {
                let key = (from.min(to), from.max(to));
                delays.get(&key).copied().unwrap_or(*default)
            }
        }
    }

    fn push(&mut self, fire_time: Time, kind: EventKind<M>) {
        let sequence = self.sequence;
        self.sequence += 1;
        self.queue.push(SimEvent {
            fire_time,
            sequence,
            kind,
        });
    }

    /// Schedules delivery of `msg` after this link's delay. Sending to a
    /// non-neighbor is an error: a node only knows its neighbor list.
    pub fn send(&mut self, from: NodeId, to: NodeId, msg: M) -> Result<(), SimError> {
        if !self.graph.has_edge(from, to) {
            return Err(SimError::NonAdjacentSend { from, to });
        }
        let delay = self.delay_for(from, to);
        self.push(self.now + delay, EventKind::Deliver { from, to, msg });
        Ok(())
    }

    /// Arms (or re-arms) the timer of `node` to fire after `duration`.
    pub fn set_timer(&mut self, node: NodeId, duration: f64) {
        self.timer_generation[node as usize] += 1;
        let generation = self.timer_generation[node as usize];
        self.push(
            self.now + duration,
            EventKind::TimerExpiry { node, generation },
        );
    }

    fn apply_outputs(&mut self, from: NodeId, outputs: Vec<Output<M>>) -> Result<(), SimError> {
        for out in outputs {
            match out {
                Output::Send { to, msg } => self.send(from, to, msg)?,
                Output::SetTimer { duration } => self.set_timer(from, duration),
            }
        }
        Ok(())
    }

    /// Processes events in order until the queue drains or `until` is
    /// passed. Returns the number of events processed by this call.
    pub fn run(&mut self, until: Option<Time>) -> Result<u64, SimError> {
        let start_processed = self.processed;
        while let Some(event) = self.queue.peek() {
            if let Some(limit) = until {
                if event.fire_time > limit {
                    break;
                }
            }
            let event = self.queue.pop().expect("peeked");
            debug_assert!(event.fire_time >= self.now, "event fired in the past");
            self.now = self.now.max(event.fire_time);
            self.processed += 1;
            if self.processed - start_processed > self.event_cap {
                return Err(SimError::EventCapExceeded {
                    cap: self.event_cap,
                });
            }
            match event.kind {
                EventKind::Deliver { from, to, msg } => {
                    self.trace.push(TraceEvent {
                        t: event.fire_time,
                        kind: "deliver",
                        from: Some(from),
                        to,
                        msg_type: Some(msg.label()),
                        hop_cnt: msg.hop_count(),
                    });
                    let outputs = self.nodes[to as usize - 1].on_message(from, &msg, self.now);
                    self.apply_outputs(to, outputs)?;
                }
                EventKind::TimerExpiry { node, generation } => {
                    if generation != self.timer_generation[node as usize] {
                        continue; // superseded by a later set_timer
                    }
                    self.trace.push(TraceEvent {
                        t: event.fire_time,
                        kind: "timer",
                        from: None,
                        to: node,
                        msg_type: None,
                        hop_cnt: None,
                    });
                    let outputs = self.nodes[node as usize - 1].on_timer(self.now);
                    self.apply_outputs(node, outputs)?;
                }
            }
        }
        Ok(self.processed - start_processed)
    }
}
