//! Distributed construction: every edge of an existing graph is rewired by
//! a pair of biased random walks that pick the new endpoints, using only
//! neighbor-local information at each hop.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{Graph, GraphBuilder, NodeId};

#[derive(Debug, thiserror::Error)]
pub enum RewireError {
    #[error("graph has no edges to rewire")]
    NoEdges,
    #[error("node {0} has no neighbors to walk to")]
    IsolatedNode(NodeId),
}

/// Grouping of the hop-acceptance exponent `1 / (alpha gamma - 1)`; the
/// alternative `1 / (gamma - 1)` matches the bias-matrix form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExponentGrouping {
    #[default]
    AlphaGammaMinusOne,
    GammaMinusOne,
}

#[derive(Debug, Clone)]
pub struct RewireWalkConfig {
    /// Hops per walk; each edge rewiring runs two walks of this length.
    pub walk_length: u32,
    pub gamma: f64,
    /// Vertex-weight exponent, `1 / (gamma - 1)` unless overridden.
    pub alpha: f64,
    pub seed: u64,
    pub exponent_grouping: ExponentGrouping,
    /// Re-runs of the second walk when it lands on the first target or on
    /// an existing edge, before the edge is skipped.
    pub max_retries: u32,
}

impl RewireWalkConfig {
    pub fn new(gamma: f64, seed: u64) -> Self {
        Self {
            walk_length: 10,
            gamma,
            alpha: 1.0 / (gamma - 1.0),
            seed,
            exponent_grouping: ExponentGrouping::default(),
            max_retries: 16,
        }
    }

    /// Exponent applied to the id ratio in the hop decision.
    pub fn hop_exponent(&self) -> f64 {
        match self.exponent_grouping {
            ExponentGrouping::AlphaGammaMinusOne => 1.0 / (self.alpha * self.gamma - 1.0),
            ExponentGrouping::GammaMinusOne => 1.0 / (self.gamma - 1.0),
        }
    }
}

fn hop_ratio(deg_a: u32, deg_b: u32, id_a: NodeId, id_b: NodeId, exponent: f64) -> f64 {
    (deg_a as f64 / deg_b as f64) * (id_a as f64 / id_b as f64).powf(exponent)
}

/// One biased hop decision: given the walk cursor `current` and a neighbor
/// `candidate` drawn uniformly at random, move to the candidate when
/// `h = (d_a/d_b) * (id_a/id_b)^exponent` beats a uniform draw, otherwise
/// stay.
pub fn bias_step<R: Rng>(
    g: &Graph,
    current: NodeId,
    candidate: NodeId,
    config: &RewireWalkConfig,
    rng: &mut R,
) -> NodeId {
    let h = hop_ratio(
        g.degree(current),
        g.degree(candidate),
        current,
        candidate,
        config.hop_exponent(),
    );
    let kappa: f64 = rng.gen();
    if h > kappa {
        candidate
    } else {
        current
    }
}

#[derive(Debug)]
pub struct WalkRewireOutcome {
    pub graph: Graph,
    /// Original edges replaced by a walked pair.
    pub rewired: u64,
    /// Original edges left in place after the retry budget ran out.
    pub skipped: u64,
}

/// Substrate the distributed builder starts from when none is supplied: a
/// connected random graph with `n` edges (mean degree 2). Walk length 10
/// needs a small-diameter start; a ring lattice, whose diameter grows with
/// `n`, keeps every rewired edge local and never develops hubs.
pub fn default_substrate(n: u32, seed: u64) -> Graph {
    crate::topology::random_connected(n, 1, seed)
}

/// Mutable edge structure used while rewiring: adjacency lists plus an edge
/// vector with positions indexed for O(1) removal. The vector order is the
/// construction order, which keeps the output deterministic.
struct Working {
    adj: Vec<Vec<NodeId>>,
    edges: Vec<(NodeId, NodeId)>,
    index: HashMap<(NodeId, NodeId), usize>,
}

impl Working {
    fn key(i: NodeId, j: NodeId) -> (NodeId, NodeId) {
        (i.min(j), i.max(j))
    }

    fn from_graph(g: &Graph) -> Self {
        let mut w = Working {
            adj: vec![Vec::new(); g.n_nodes() as usize],
            edges: Vec::with_capacity(g.n_edges()),
            index: HashMap::with_capacity(g.n_edges()),
        };
        for &(i, j) in g.edges() {
            w.insert(i, j);
        }
        w
    }

    fn degree(&self, i: NodeId) -> u32 {
        self.adj[i as usize - 1].len() as u32
    }

    fn contains(&self, i: NodeId, j: NodeId) -> bool {
        self.index.contains_key(&Self::key(i, j))
    }

    fn insert(&mut self, i: NodeId, j: NodeId) {
        self.index.insert(Self::key(i, j), self.edges.len());
        self.edges.push((i, j));
        self.adj[i as usize - 1].push(j);
        self.adj[j as usize - 1].push(i);
    }

    fn remove(&mut self, i: NodeId, j: NodeId) {
        let pos = self.index.remove(&Self::key(i, j)).expect("edge present");
        self.edges.swap_remove(pos);
        if pos < self.edges.len() {
            let moved = self.edges[pos];
            self.index.insert(Self::key(moved.0, moved.1), pos);
        }
        for (a, b) in [(i, j), (j, i)] {
            let list = &mut self.adj[a as usize - 1];
            let at = list.iter().position(|&x| x == b).expect("adjacent");
            list.swap_remove(at);
        }
    }

    fn random_neighbor<R: Rng>(&self, i: NodeId, rng: &mut R) -> Result<NodeId, RewireError> {
        let list = &self.adj[i as usize - 1];
        if list.is_empty() {
            return Err(RewireError::IsolatedNode(i));
        }
        Ok(list[rng.gen_range(0..list.len())])
    }

    /// `hops` hop decisions from `start`; the cursor advances on each
    /// accepted candidate and stays put otherwise.
    fn walk<R: Rng>(
        &self,
        start: NodeId,
        hops: u32,
        exponent: f64,
        rng: &mut R,
    ) -> Result<NodeId, RewireError> {
        let mut cursor = start;
        for _ in 0..hops {
            let candidate = self.random_neighbor(cursor, rng)?;
            let h = hop_ratio(
                self.degree(cursor),
                self.degree(candidate),
                cursor,
                candidate,
                exponent,
            );
            let kappa: f64 = rng.gen();
            if h > kappa {
                cursor = candidate;
            }
        }
        Ok(cursor)
    }
}

/// Rewires every original edge exactly once: pick a random node with an
/// un-rewired edge, walk `L` biased hops from the edge's higher-degree
/// endpoint to find the first new endpoint, walk `L` more for the second,
/// connect the two targets and drop the original edge. Edge count is
/// conserved; an edge whose replacement keeps colliding with existing edges
/// is skipped and logged. Deterministic for a fixed seed.
pub fn rewire_all(g: &Graph, config: &RewireWalkConfig) -> Result<WalkRewireOutcome, RewireError> {
    if g.n_edges() == 0 {
        return Err(RewireError::NoEdges);
    }
    let n = g.n_nodes();
    let exponent = config.hop_exponent();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut working = Working::from_graph(g);

    let original: Vec<(NodeId, NodeId)> = g.edges().to_vec();
    let mut processed = vec![false; original.len()];
    // per-node lists of original-edge indices, consumed as edges are processed
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n as usize];
    for (idx, &(i, j)) in original.iter().enumerate() {
        incident[i as usize - 1].push(idx);
        incident[j as usize - 1].push(idx);
    }

    let mut remaining = original.len();
    let mut rewired = 0u64;
    let mut skipped = 0u64;

    while remaining > 0 {
        // draw nodes until one still has an unprocessed original edge
        let edge_idx = loop {
            let node = rng.gen_range(1..=n);
            let list = &mut incident[node as usize - 1];
            while let Some(&last) = list.last() {
                if processed[last] {
                    list.pop();
                } else {
                    break;
                }
            }
            let open: Vec<usize> = list.iter().copied().filter(|&e| !processed[e]).collect();
            if !open.is_empty() {
                break open[rng.gen_range(0..open.len())];
            }
        };
        let (u, v) = original[edge_idx];
        processed[edge_idx] = true;
        remaining -= 1;

        let (du, dv) = (working.degree(u), working.degree(v));
        let start = if du > dv {
            u
        } else if dv > du {
            v
        } else if rng.gen::<bool>() {
            u
        } else {
            v
        };

        let first = working.walk(start, config.walk_length, exponent, &mut rng)?;
        let mut second = None;
        for _ in 0..=config.max_retries {
            let d = working.walk(first, config.walk_length, exponent, &mut rng)?;
            if d != first && !working.contains(first, d) {
                second = Some(d);
                break;
            }
        }
        match second {
            Some(d) => {
                working.insert(first, d);
                working.remove(u, v);
                rewired += 1;
            }
            None => {
                log::debug!(
                    "edge ({u},{v}) kept: no fresh target pair in {} tries",
                    config.max_retries + 1
                );
                skipped += 1;
            }
        }
    }

    let mut builder = GraphBuilder::new(n).metadata(config.gamma, config.seed);
    for &(i, j) in &working.edges {
        builder.add_edge(i, j).expect("working set holds simple edges");
    }
    Ok(WalkRewireOutcome {
        graph: builder.freeze(),
        rewired,
        skipped,
    })
}
