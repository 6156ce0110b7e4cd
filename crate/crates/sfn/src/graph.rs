//! Graph data model shared by all builders.
//!
//! Nodes are identified by 1-based ids. A [`GraphBuilder`] owns the mutable
//! degree vector and edge list while a network is being constructed; calling
//! [`GraphBuilder::freeze`] produces an immutable [`Graph`] with adjacency
//! lists, which is then safe to read from any number of threads.

use std::collections::{HashMap, HashSet};
use std::io::{self, BufRead, Write};
use std::path::Path;

use crate::powerlaw::DegreeDistribution;

pub type NodeId = u32;

#[derive(Debug, thiserror::Error)]
pub enum GraphError {
    #[error("node id {0} is outside 1..={1}")]
    InvalidNode(NodeId, u32),
    #[error("self-loop ({0},{0}) rejected")]
    SelfLoop(NodeId),
    #[error("edge-list parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Result of inserting an edge: duplicates are signalled, not errors, so the
/// caller can decide whether to re-draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeInsert {
    Added,
    Duplicate,
}

fn ordered(i: NodeId, j: NodeId) -> (NodeId, NodeId) {
    if i <= j {
        (i, j)
    } else {
        (j, i)
    }
}

/// Mutable graph under construction. Single-threaded by contract.
#[derive(Debug, Clone)]
pub struct GraphBuilder {
    n: u32,
    edges: Vec<(NodeId, NodeId)>,
    degree: Vec<u32>,
    edge_set: HashSet<(NodeId, NodeId)>,
    gamma: f64,
    seed: u64,
}

impl GraphBuilder {
    pub fn new(n: u32) -> Self {
        Self {
            n,
            edges: Vec::new(),
            degree: vec![0; n as usize],
            edge_set: HashSet::new(),
            gamma: 0.0,
            seed: 0,
        }
    }

    /// Records the build parameters carried in the edge-list file header.
    pub fn metadata(mut self, gamma: f64, seed: u64) -> Self {
        self.gamma = gamma;
        self.seed = seed;
        self
    }

    fn check_node(&self, i: NodeId) -> Result<(), GraphError> {
        if i < 1 || i > self.n {
            Err(GraphError::InvalidNode(i, self.n))
        } else {
            Ok(())
        }
    }

    /// Appends the edge if absent and increments both endpoint degrees.
    pub fn add_edge(&mut self, i: NodeId, j: NodeId) -> Result<EdgeInsert, GraphError> {
        self.check_node(i)?;
        self.check_node(j)?;
        if i == j {
            return Err(GraphError::SelfLoop(i));
        }
        if !self.edge_set.insert(ordered(i, j)) {
            return Ok(EdgeInsert::Duplicate);
        }
        self.edges.push((i, j));
        self.degree[i as usize - 1] += 1;
        self.degree[j as usize - 1] += 1;
        Ok(EdgeInsert::Added)
    }

    pub fn has_edge(&self, i: NodeId, j: NodeId) -> bool {
        self.edge_set.contains(&ordered(i, j))
    }

    pub fn degree(&self, i: NodeId) -> u32 {
        self.degree[i as usize - 1]
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Builds adjacency lists and returns the immutable graph.
    pub fn freeze(self) -> Graph {
        let mut adj = vec![Vec::new(); self.n as usize];
        for &(i, j) in &self.edges {
            adj[i as usize - 1].push(j);
            adj[j as usize - 1].push(i);
        }
        Graph {
            n: self.n,
            edges: self.edges,
            degree: self.degree,
            adj,
            gamma: self.gamma,
            seed: self.seed,
        }
    }
}

/// Immutable simple graph over nodes `1..=n`.
#[derive(Debug, Clone)]
pub struct Graph {
    n: u32,
    edges: Vec<(NodeId, NodeId)>,
    degree: Vec<u32>,
    adj: Vec<Vec<NodeId>>,
    gamma: f64,
    seed: u64,
}

impl Graph {
    pub fn n_nodes(&self) -> u32 {
        self.n
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn degree(&self, i: NodeId) -> u32 {
        self.degree[i as usize - 1]
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degree
    }

    pub fn max_degree(&self) -> u32 {
        self.degree.iter().copied().max().unwrap_or(0)
    }

    pub fn neighbors(&self, i: NodeId) -> &[NodeId] {
        &self.adj[i as usize - 1]
    }

    pub fn has_edge(&self, i: NodeId, j: NodeId) -> bool {
        self.adj[i as usize - 1].contains(&j)
    }

    /// Exponent recorded by the builder, 0 when not built from one.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Splits nodes into core (degree >= threshold) and server nodes.
    ///
    /// A threshold above the maximum degree yields an empty core set; that
    /// is a degenerate run, not an error.
    pub fn partition(&self, threshold: u32) -> CorePartition {
        let mut core_ids = Vec::new();
        let mut server_ids = Vec::new();
        for i in 1..=self.n {
            if self.degree(i) >= threshold {
                core_ids.push(i);
            } else {
                server_ids.push(i);
            }
        }
        CorePartition {
            threshold,
            core_ids,
            server_ids,
        }
    }

    /// Minimum hop counts from `source` to every node reachable within
    /// `d_max` hops. The source itself is not in the map; nodes farther than
    /// `d_max` are absent.
    pub fn bfs_distances(&self, source: NodeId, d_max: u32) -> HashMap<NodeId, u32> {
        let mut dist = HashMap::new();
        let mut frontier = vec![source];
        let mut depth = 0;
        while !frontier.is_empty() && depth < d_max {
            depth += 1;
            let mut next = Vec::new();
            for &u in &frontier {
                for &v in self.neighbors(u) {
                    if v != source && !dist.contains_key(&v) {
                        dist.insert(v, depth);
                        next.push(v);
                    }
                }
            }
            frontier = next;
        }
        dist
    }

    /// BFS distances with parent tracking; returns (distance, predecessor)
    /// so shortest paths can be reconstructed.
    pub fn bfs_tree(&self, source: NodeId, d_max: u32) -> HashMap<NodeId, (u32, NodeId)> {
        let mut tree = HashMap::new();
        let mut frontier = vec![source];
        let mut depth = 0;
        while !frontier.is_empty() && depth < d_max {
            depth += 1;
            let mut next = Vec::new();
            for &u in &frontier {
                for &v in self.neighbors(u) {
                    if v != source && !tree.contains_key(&v) {
                        tree.insert(v, (depth, u));
                        next.push(v);
                    }
                }
            }
            frontier = next;
        }
        tree
    }

    /// Histogram of node degrees as a probability distribution. Degree-0
    /// nodes are excluded from the support but still counted in `n`, so the
    /// stored mass can be below 1.
    pub fn empirical_degree_distribution(&self) -> DegreeDistribution {
        let max_deg = self.max_degree() as usize;
        let mut counts = vec![0u64; max_deg];
        for &d in &self.degree {
            if d > 0 {
                counts[d as usize - 1] += 1;
            }
        }
        DegreeDistribution::empirical(&counts, self.n as u64)
    }

    /// Writes the edge list with its `# nodes=.. gamma=.. seed=..` header.
    /// The output round-trips byte-exactly through [`Graph::read_edge_list`].
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> Result<(), GraphError> {
        writeln!(w, "# nodes={} gamma={} seed={}", self.n, self.gamma, self.seed)?;
        for &(i, j) in &self.edges {
            writeln!(w, "{i},{j}")?;
        }
        Ok(())
    }

    pub fn read_edge_list<R: BufRead>(r: R) -> Result<Graph, GraphError> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| GraphError::Parse {
                line: 1,
                reason: "empty file".into(),
            })?
            .map_err(GraphError::Io)?;
        let fields: HashMap<&str, &str> = header
            .trim_start_matches('#')
            .split_whitespace()
            .filter_map(|tok| tok.split_once('='))
            .collect();
        let missing = |key: &str| GraphError::Parse {
            line: 1,
            reason: format!("missing {key}= in header"),
        };
        let n: u32 = fields
            .get("nodes")
            .ok_or_else(|| missing("nodes"))?
            .parse()
            .map_err(|e| GraphError::Parse {
                line: 1,
                reason: format!("bad node count: {e}"),
            })?;
        let gamma: f64 = fields
            .get("gamma")
            .ok_or_else(|| missing("gamma"))?
            .parse()
            .map_err(|e| GraphError::Parse {
                line: 1,
                reason: format!("bad gamma: {e}"),
            })?;
        let seed: u64 = fields
            .get("seed")
            .ok_or_else(|| missing("seed"))?
            .parse()
            .map_err(|e| GraphError::Parse {
                line: 1,
                reason: format!("bad seed: {e}"),
            })?;

        let mut builder = GraphBuilder::new(n).metadata(gamma, seed);
        for (idx, line) in lines.enumerate() {
            let line = line.map_err(GraphError::Io)?;
            let lineno = idx + 2;
            if line.trim().is_empty() {
                continue;
            }
            let (a, b) = line.split_once(',').ok_or_else(|| GraphError::Parse {
                line: lineno,
                reason: "expected i,j".into(),
            })?;
            let parse = |s: &str| {
                s.trim().parse::<u32>().map_err(|e| GraphError::Parse {
                    line: lineno,
                    reason: format!("bad node id: {e}"),
                })
            };
            builder.add_edge(parse(a)?, parse(b)?)?;
        }
        Ok(builder.freeze())
    }

    pub fn save<P: AsRef<Path>>(&self, path: P) -> Result<(), GraphError> {
        let mut file = io::BufWriter::new(std::fs::File::create(path)?);
        self.write_edge_list(&mut file)
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Graph, GraphError> {
        let file = io::BufReader::new(std::fs::File::open(path)?);
        Self::read_edge_list(file)
    }
}

/// Core/server split of a graph at a degree threshold. `core_ids` and
/// `server_ids` are sorted and together cover every node exactly once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorePartition {
    threshold: u32,
    core_ids: Vec<NodeId>,
    server_ids: Vec<NodeId>,
}

impl CorePartition {
    pub fn threshold(&self) -> u32 {
        self.threshold
    }

    pub fn core_ids(&self) -> &[NodeId] {
        &self.core_ids
    }

    pub fn server_ids(&self) -> &[NodeId] {
        &self.server_ids
    }

    /// Number of core nodes, which equals the number of clusters.
    pub fn n_cores(&self) -> usize {
        self.core_ids.len()
    }

    pub fn is_core(&self, i: NodeId) -> bool {
        self.core_ids.binary_search(&i).is_ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology;
    use proptest::prelude::*;

    #[test]
    fn add_edge_updates_degrees() {
        let mut b = GraphBuilder::new(5);
        assert_eq!(b.add_edge(1, 2).unwrap(), EdgeInsert::Added);
        assert_eq!(b.degree(1), 1);
        assert_eq!(b.degree(2), 1);
        assert_eq!(b.degree(3), 0);

        // duplicate is a signalled no-op
        assert_eq!(b.add_edge(2, 1).unwrap(), EdgeInsert::Duplicate);
        assert_eq!(b.degree(1), 1);

        b.add_edge(1, 3).unwrap();
        b.add_edge(1, 4).unwrap();
        assert_eq!(b.degree(1), 3);
    }

    #[test]
    fn self_loop_and_bad_ids_rejected() {
        let mut b = GraphBuilder::new(3);
        assert!(matches!(b.add_edge(2, 2), Err(GraphError::SelfLoop(2))));
        assert!(matches!(b.add_edge(0, 1), Err(GraphError::InvalidNode(0, 3))));
        assert!(matches!(b.add_edge(1, 4), Err(GraphError::InvalidNode(4, 3))));
    }

    #[test]
    fn partition_star() {
        let g = topology::star(6); // center 1, leaves 2..=6
        let part = g.partition(3);
        assert_eq!(part.core_ids(), &[1]);
        assert_eq!(part.server_ids(), &[2, 3, 4, 5, 6]);
        assert_eq!(part.n_cores(), 1);

        // threshold above max degree: empty core set, not an error
        let empty = g.partition(100);
        assert_eq!(empty.n_cores(), 0);
        assert_eq!(empty.server_ids().len(), 6);

        // threshold 1: every non-isolated node is core
        let all = g.partition(1);
        assert_eq!(all.n_cores(), 6);
    }

    #[test]
    fn bfs_on_path() {
        let g = topology::path(4);
        let d = g.bfs_distances(1, 3);
        assert_eq!(d.len(), 3);
        assert_eq!(d[&2], 1);
        assert_eq!(d[&3], 2);
        assert_eq!(d[&4], 3);

        // d_max cuts the search off
        let d1 = g.bfs_distances(1, 1);
        assert_eq!(d1.len(), 1);
        assert_eq!(d1[&2], 1);
    }

    /// All-pairs shortest hop counts by repeated relaxation, kept separate
    /// from the BFS being checked.
    fn floyd_warshall(g: &Graph) -> Vec<Vec<u32>> {
        let n = g.n_nodes() as usize;
        const INF: u32 = u32::MAX / 4;
        let mut d = vec![vec![INF; n]; n];
        for v in 0..n {
            d[v][v] = 0;
        }
        for &(i, j) in g.edges() {
            d[i as usize - 1][j as usize - 1] = 1;
            d[j as usize - 1][i as usize - 1] = 1;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let via = d[i][k] + d[k][j];
                    if via < d[i][j] {
                        d[i][j] = via;
                    }
                }
            }
        }
        d
    }

    #[test]
    fn bfs_matches_all_pairs_oracle() {
        let g = topology::random_connected(30, 15, 42);
        let oracle = floyd_warshall(&g);
        for source in 1..=30u32 {
            let bfs = g.bfs_distances(source, 30);
            for target in 1..=30u32 {
                if target == source {
                    continue;
                }
                let expected = oracle[source as usize - 1][target as usize - 1];
                assert_eq!(bfs.get(&target).copied(), Some(expected));
            }
        }
    }

    #[test]
    fn empirical_distribution_examples() {
        let g = topology::cycle(4);
        let d = g.empirical_degree_distribution();
        assert_eq!(d.prob(2), 1.0);

        let star = topology::star(4); // K_{1,3}
        let d = star.empirical_degree_distribution();
        assert_eq!(d.prob(1), 0.75);
        assert_eq!(d.prob(3), 0.25);

        // one isolated node among 4
        let mut b = GraphBuilder::new(4);
        b.add_edge(1, 2).unwrap();
        b.add_edge(2, 3).unwrap();
        b.add_edge(3, 1).unwrap();
        let d = b.freeze().empirical_degree_distribution();
        assert!((d.total_mass() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn edge_list_round_trip_is_byte_identical() {
        let g = topology::random_connected(20, 10, 7);
        let mut first = Vec::new();
        g.write_edge_list(&mut first).unwrap();
        let reread = Graph::read_edge_list(&first[..]).unwrap();
        let mut second = Vec::new();
        reread.write_edge_list(&mut second).unwrap();
        assert_eq!(first, second);
        assert_eq!(reread.gamma(), g.gamma());
        assert_eq!(reread.seed(), g.seed());
    }

    #[test]
    fn edge_list_rejects_garbage() {
        assert!(matches!(
            Graph::read_edge_list(&b"# nodes=x gamma=0 seed=0\n"[..]),
            Err(GraphError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            Graph::read_edge_list(&b"# nodes=3 gamma=0 seed=0\n1;2\n"[..]),
            Err(GraphError::Parse { line: 2, .. })
        ));
    }

    proptest! {
        #[test]
        fn handshake_lemma(pairs in proptest::collection::vec((1u32..=20, 1u32..=20), 0..60)) {
            let mut b = GraphBuilder::new(20);
            for (i, j) in pairs {
                if i != j {
                    b.add_edge(i, j).unwrap();
                }
            }
            let g = b.freeze();
            let total: u32 = (1..=20).map(|i| g.degree(i)).sum();
            prop_assert_eq!(total as usize, 2 * g.n_edges());

            // degree vector equals a rebuild from the edge list
            let mut rebuilt = vec![0u32; 20];
            for &(i, j) in g.edges() {
                rebuilt[i as usize - 1] += 1;
                rebuilt[j as usize - 1] += 1;
            }
            prop_assert_eq!(rebuilt, g.degrees().to_vec());

            // partition covers every node exactly once
            let part = g.partition(2);
            prop_assert_eq!(part.core_ids().len() + part.server_ids().len(), 20);
        }

        #[test]
        fn bfs_triangle_consistency(seed in 0u64..500) {
            let g = topology::random_connected(25, 10, seed);
            let d = g.bfs_distances(1, 25);
            for &(u, v) in g.edges() {
                let du = if u == 1 { Some(0) } else { d.get(&u).copied() };
                let dv = if v == 1 { Some(0) } else { d.get(&v).copied() };
                if let (Some(du), Some(dv)) = (du, dv) {
                    prop_assert!(du.abs_diff(dv) <= 1);
                }
            }
        }
    }
}
