//! Master-driven route: probabilistic edge rewiring toward a power-law
//! degree sequence, followed by nearest-core cluster assignment over
//! breadth-first distances.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{CorePartition, EdgeInsert, Graph, GraphBuilder, GraphError, NodeId};
use crate::metrics;
use crate::powerlaw::{DegreeDistribution, PowerLawError, PowerLawParams};

#[derive(Debug, thiserror::Error)]
pub enum CentralizedError {
    #[error(
        "stopping rule not satisfied within {draws} draws; best distance reached was {best_distance}"
    )]
    StoppingNotReached { draws: u64, best_distance: f64 },
    #[error("no node reaches degree threshold {threshold}; maximum degree is {max_degree}")]
    EmptyCoreSet { threshold: u32, max_degree: u32 },
    #[error("need at least 2 nodes, got {0}")]
    TooFewNodes(u32),
    #[error(transparent)]
    PowerLaw(#[from] PowerLawError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// How the sampling exponent `alpha` is derived from `gamma`.
///
/// The equilibrium-model convention `alpha = 1 / (gamma - 1)` produces a
/// decaying power law and is the default; `alpha = 1 / (1 - gamma)` is kept
/// selectable because the rewiring procedure is sometimes stated that way,
/// even though it flips the sign for `gamma > 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AlphaConvention {
    #[default]
    Goh,
    AsWritten,
}

impl AlphaConvention {
    pub fn alpha(self, gamma: f64) -> f64 {
        match self {
            AlphaConvention::Goh => 1.0 / (gamma - 1.0),
            AlphaConvention::AsWritten => 1.0 / (1.0 - gamma),
        }
    }
}

/// When to stop the rewiring loop. Exactly one rule is active per run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StoppingRule {
    /// Stop once the trace distance to the theoretical pmf drops below
    /// `target`, checking every `check_interval` recorded links
    /// (default `n / 10`).
    Epsilon {
        target: f64,
        check_interval: Option<u64>,
    },
    /// Stop after exactly this many iterations.
    FixedIterations(u64),
}

#[derive(Debug, Clone)]
pub struct RewireConfig {
    pub n_nodes: u32,
    pub gamma: f64,
    pub stop: StoppingRule,
    pub seed: u64,
    pub alpha_convention: AlphaConvention,
    /// Hard cap on node-pair draws; exceeding it aborts the run with
    /// [`CentralizedError::StoppingNotReached`]. Defaults to `100 * n`.
    pub max_draws: Option<u64>,
}

impl RewireConfig {
    pub fn fixed(n_nodes: u32, gamma: f64, iterations: u64, seed: u64) -> Self {
        Self {
            n_nodes,
            gamma,
            stop: StoppingRule::FixedIterations(iterations),
            seed,
            alpha_convention: AlphaConvention::default(),
            max_draws: None,
        }
    }

    pub fn epsilon(n_nodes: u32, gamma: f64, target: f64, seed: u64) -> Self {
        Self {
            n_nodes,
            gamma,
            stop: StoppingRule::Epsilon {
                target,
                check_interval: None,
            },
            seed,
            alpha_convention: AlphaConvention::default(),
            max_draws: None,
        }
    }
}

/// Sampling weight of node `i`: `i^-alpha` normalized by the partial sum
/// `sum_{m=1}^{i} m^-alpha`. The sum starts at 1 because the `m = 0` term
/// is undefined for positive `alpha`.
pub fn node_weight(i: NodeId, alpha: f64) -> f64 {
    let mut denom = 0.0;
    for m in 1..=i {
        denom += (m as f64).powf(-alpha);
    }
    (i as f64).powf(-alpha) / denom
}

fn weight_table(n: u32, alpha: f64) -> Vec<f64> {
    let mut weights = Vec::with_capacity(n as usize);
    let mut partial = 0.0;
    for i in 1..=n {
        let w = (i as f64).powf(-alpha);
        partial += w;
        weights.push(w / partial);
    }
    weights
}

#[derive(Debug)]
pub struct RewireOutcome {
    pub graph: Graph,
    /// Iterations performed, i.e. links recorded in the edge table.
    pub iterations: u64,
    /// Total node-pair draws, including rejected and duplicate proposals.
    pub draws: u64,
    /// Final trace distance to the theoretical degree distribution.
    pub trace_distance: f64,
}

/// Builds a scale-free overlay by repeated probabilistic edge acceptance:
/// draw two distinct nodes uniformly, accept the edge between them with
/// probability `1 - exp(-2 n p_i p_j)`, and repeat until the stopping rule
/// fires. An iteration is a recorded link, so a fixed budget of `1.4 n`
/// yields `1.4 n` edges; a proposal that duplicates an existing edge is
/// re-drawn. Deterministic for a fixed seed.
pub fn rewire(config: &RewireConfig) -> Result<RewireOutcome, CentralizedError> {
    let n = config.n_nodes;
    if n < 2 {
        return Err(CentralizedError::TooFewNodes(n));
    }
    let params = PowerLawParams::new(config.gamma, 1)?.with_tail_correction();
    let theory = DegreeDistribution::theoretical(&params, 1);
    let alpha = config.alpha_convention.alpha(config.gamma);
    let weights = weight_table(n, alpha);

    let (target_links, epsilon, check_interval) = match config.stop {
        StoppingRule::FixedIterations(t) => (t, None, u64::MAX),
        StoppingRule::Epsilon {
            target,
            check_interval,
        } => (
            u64::MAX,
            Some(target),
            check_interval.unwrap_or((n as u64 / 10).max(1)),
        ),
    };
    let max_draws = config.max_draws.unwrap_or_else(|| {
        let floor = 100 * n as u64;
        match config.stop {
            // a fixed budget must never be cut short by the safety cap
            StoppingRule::FixedIterations(t) => floor.max(200 * t),
            StoppingRule::Epsilon { .. } => floor,
        }
    });

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut builder = GraphBuilder::new(n).metadata(config.gamma, config.seed);
    let mut links = 0u64;
    let mut draws = 0u64;
    let mut best_distance = f64::INFINITY;

    while links < target_links {
        if draws >= max_draws {
            let current = metrics::trace_distance(
                &builder.clone().freeze().empirical_degree_distribution(),
                &theory,
            );
            return Err(CentralizedError::StoppingNotReached {
                draws,
                best_distance: best_distance.min(current),
            });
        }
        draws += 1;

        let i = rng.gen_range(1..=n);
        let mut j = rng.gen_range(1..=n);
        while j == i {
            j = rng.gen_range(1..=n);
        }
        let p_i = weights[i as usize - 1];
        let p_j = weights[j as usize - 1];
        let kappa: f64 = rng.gen();
        let accept = 1.0 - (-2.0 * n as f64 * p_i * p_j).exp();
        if accept <= kappa {
            continue;
        }
        if builder.add_edge(i, j)? == EdgeInsert::Duplicate {
            // duplicate proposals are re-drawn so the graph stays simple
            continue;
        }
        links += 1;

        if let Some(target) = epsilon {
            if links % check_interval == 0 {
                let current = metrics::trace_distance(
                    &builder.clone().freeze().empirical_degree_distribution(),
                    &theory,
                );
                best_distance = best_distance.min(current);
                if current < target {
                    break;
                }
            }
        }
    }

    let graph = builder.freeze();
    let trace_distance =
        metrics::trace_distance(&graph.empirical_degree_distribution(), &theory);
    Ok(RewireOutcome {
        graph,
        iterations: links,
        draws,
        trace_distance,
    })
}

/// How equally distant cores are chosen between.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TieBreak {
    /// Uniform random choice among the minimal cores, from this seed.
    Random(u64),
    /// Deterministic lowest core id; matches the distributed protocol.
    LowestCoreId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub core: NodeId,
    pub hops: u32,
    /// Intermediate nodes on a shortest path from the core to the server,
    /// excluding both endpoints.
    pub path: Vec<NodeId>,
}

/// Nearest-core assignment of every server node.
#[derive(Debug, Clone, Default)]
pub struct ClusterAssignment {
    pub assignments: BTreeMap<NodeId, Assignment>,
    pub members: BTreeMap<NodeId, Vec<NodeId>>,
    /// Servers with no core within `d_max` hops.
    pub unassigned: Vec<NodeId>,
}

impl ClusterAssignment {
    pub fn cluster_sizes(&self) -> Vec<usize> {
        self.members.values().map(Vec::len).collect()
    }
}

/// Assigns every server to a core node at minimum hop distance, breaking
/// ties per `tie_break`. Servers farther than `d_max` from every core land
/// in the `unassigned` list.
pub fn assign_clusters(
    g: &Graph,
    part: &CorePartition,
    d_max: u32,
    tie_break: TieBreak,
) -> Result<ClusterAssignment, CentralizedError> {
    if part.n_cores() == 0 {
        return Err(CentralizedError::EmptyCoreSet {
            threshold: part.threshold(),
            max_degree: g.max_degree(),
        });
    }

    let trees: BTreeMap<NodeId, _> = part
        .core_ids()
        .iter()
        .map(|&c| (c, g.bfs_tree(c, d_max)))
        .collect();

    let mut rng = match tie_break {
        TieBreak::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        TieBreak::LowestCoreId => None,
    };

    let mut out = ClusterAssignment::default();
    for &core in part.core_ids() {
        out.members.insert(core, Vec::new());
    }

    for &server in part.server_ids() {
        let mut best_hops = u32::MAX;
        let mut minimal: Vec<NodeId> = Vec::new();
        for (&core, tree) in &trees {
            if let Some(&(hops, _)) = tree.get(&server) {
                match hops.cmp(&best_hops) {
                    std::cmp::Ordering::Less => {
                        best_hops = hops;
                        minimal.clear();
                        minimal.push(core);
                    }
                    std::cmp::Ordering::Equal => minimal.push(core),
                    std::cmp::Ordering::Greater => {}
                }
            }
        }
        if minimal.is_empty() {
            out.unassigned.push(server);
            continue;
        }
        let core = match rng.as_mut() {
            Some(rng) => minimal[rng.gen_range(0..minimal.len())],
            None => minimal[0], // core ids iterate in ascending order
        };

        // walk predecessors back to the core, recording intermediates
        let tree = &trees[&core];
        let mut path = Vec::new();
        let mut cursor = server;
        loop {
            let &(_, parent) = tree.get(&cursor).expect("on a tree path");
            if parent == core {
                break;
            }
            path.push(parent);
            cursor = parent;
        }
        path.reverse();

        out.members.get_mut(&core).unwrap().push(server);
        out.assignments.insert(
            server,
            Assignment {
                core,
                hops: best_hops,
                path,
            },
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology;

    #[test]
    fn node_weight_base_cases() {
        assert_eq!(node_weight(1, 0.5), 1.0);
        assert_eq!(node_weight(1, -3.0), 1.0);
        let w = node_weight(2, 2.0 / 3.0);
        let expected = 2f64.powf(-2.0 / 3.0) / (1.0 + 2f64.powf(-2.0 / 3.0));
        assert!((w - expected).abs() < 1e-12);
        assert!((w - 0.386).abs() < 1e-3);
    }

    #[test]
    fn node_weight_matches_running_sum_oracle() {
        // independent accumulation of the same series for n = 100
        let alpha = 2.0 / 3.0;
        let raw: Vec<f64> = (1..=100u32).map(|m| (m as f64).powf(-alpha)).collect();
        for i in 1..=100u32 {
            let denom: f64 = raw[..i as usize].iter().sum();
            let expected = raw[i as usize - 1] / denom;
            assert!((node_weight(i, alpha) - expected).abs() < 1e-12);
        }
        let table = weight_table(100, alpha);
        for i in 1..=100u32 {
            assert!((table[i as usize - 1] - node_weight(i, alpha)).abs() < 1e-12);
        }
    }

    #[test]
    fn weights_decreasing_for_positive_alpha() {
        // higher weight for smaller ids means the acceptance probability
        // 1 - exp(-2 n p_i p_j) never decreases as i gets smaller
        let table = weight_table(1000, 2.0 / 3.0);
        for w in table.windows(2) {
            assert!(w[0] > w[1]);
        }
    }

    #[test]
    fn rewire_two_nodes_caps_at_one_edge() {
        let out = rewire(&RewireConfig::fixed(2, 2.5, 1, 7)).unwrap();
        assert_eq!(out.graph.n_edges(), 1);
        let (i, j) = out.graph.edges()[0];
        assert_eq!((i.min(j), i.max(j)), (1, 2));
    }

    #[test]
    fn rewire_is_deterministic() {
        let cfg = RewireConfig::fixed(200, 2.5, 280, 99);
        let a = rewire(&cfg).unwrap();
        let b = rewire(&cfg).unwrap();
        assert_eq!(a.graph.edges(), b.graph.edges());
        assert_eq!(a.draws, b.draws);

        let mut buf_a = Vec::new();
        a.graph.write_edge_list(&mut buf_a).unwrap();
        let mut buf_b = Vec::new();
        b.graph.write_edge_list(&mut buf_b).unwrap();
        assert_eq!(buf_a, buf_b);
    }

    #[test]
    fn rewire_records_requested_link_count() {
        let out = rewire(&RewireConfig::fixed(300, 2.5, 420, 3)).unwrap();
        assert_eq!(out.iterations, 420);
        assert_eq!(out.graph.n_edges(), 420);
        let total: u32 = (1..=300).map(|i| out.graph.degree(i)).sum();
        assert_eq!(total as usize, 2 * out.graph.n_edges());
    }

    #[test]
    fn epsilon_rule_times_out_when_unreachable() {
        let mut cfg = RewireConfig::epsilon(50, 2.5, 1e-12, 5);
        cfg.max_draws = Some(2_000);
        match rewire(&cfg) {
            Err(CentralizedError::StoppingNotReached { draws, .. }) => assert_eq!(draws, 2_000),
            other => panic!("expected timeout, got {other:?}"),
        }
    }

    #[test]
    fn epsilon_rule_stops_on_loose_target() {
        let cfg = RewireConfig::epsilon(200, 2.5, 0.9, 5);
        let out = rewire(&cfg).unwrap();
        assert!(out.trace_distance < 0.9);
    }

    #[test]
    fn assign_on_star_sends_all_leaves_to_center() {
        let g = topology::star(8);
        let part = g.partition(3);
        let out = assign_clusters(&g, &part, 10, TieBreak::LowestCoreId).unwrap();
        assert_eq!(out.members[&1].len(), 7);
        assert!(out.unassigned.is_empty());
        for (_, a) in &out.assignments {
            assert_eq!(a.core, 1);
            assert_eq!(a.hops, 1);
            assert!(a.path.is_empty());
        }
    }

    #[test]
    fn empty_core_set_is_an_error() {
        let g = topology::path(4);
        let part = g.partition(10);
        match assign_clusters(&g, &part, 10, TieBreak::LowestCoreId) {
            Err(CentralizedError::EmptyCoreSet {
                threshold: 10,
                max_degree: 2,
            }) => {}
            other => panic!("unexpected: {other:?}"),
        }
    }

    /// All-pairs hop counts for the assignment optimality oracle.
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
    fn assignment_distance_is_optimal() {
        let g = topology::random_connected(25, 12, 11);
        let mut threshold = 1;
        // pick the threshold giving three or more cores
        for t in (1..=g.max_degree()).rev() {
            if g.partition(t).n_cores() >= 3 {
                threshold = t;
                break;
            }
        }
        let part = g.partition(threshold);
        let oracle = floyd_warshall(&g);
        let out = assign_clusters(&g, &part, 25, TieBreak::Random(17)).unwrap();
        assert!(out.unassigned.is_empty());
        for &server in part.server_ids() {
            let best = part
                .core_ids()
                .iter()
                .map(|&c| oracle[server as usize - 1][c as usize - 1])
                .min()
                .unwrap();
            let assignment = &out.assignments[&server];
            assert_eq!(assignment.hops, best, "server {server}");
            // the recorded path really is a path of that length
            assert_eq!(assignment.path.len() as u32, assignment.hops.saturating_sub(1));
        }
        // members and assignments are mutually consistent
        for (core, members) in &out.members {
            for m in members {
                assert_eq!(out.assignments[m].core, *core);
            }
        }
        let member_total: usize = out.members.values().map(Vec::len).sum();
        assert_eq!(member_total, out.assignments.len());
    }

    #[test]
    fn tie_break_is_roughly_uniform() {
        // two cores, one server adjacent to both
        let mut b = crate::graph::GraphBuilder::new(7);
        b.add_edge(1, 3).unwrap();
        b.add_edge(2, 3).unwrap();
        for (core, leaves) in [(1u32, [4u32, 5]), (2, [6, 7])] {
            for leaf in leaves {
                b.add_edge(core, leaf).unwrap();
            }
        }
        let g = b.freeze();
        let part = g.partition(3);
        assert_eq!(part.core_ids(), &[1, 2]);

        let mut first = 0;
        for seed in 0..1000u64 {
            let out = assign_clusters(&g, &part, 5, TieBreak::Random(seed)).unwrap();
            if out.assignments[&3].core == 1 {
                first += 1;
            }
        }
        assert!((400..=600).contains(&first), "core 1 chosen {first}/1000");

        // deterministic rule always picks the lower id
        let out = assign_clusters(&g, &part, 5, TieBreak::LowestCoreId).unwrap();
        assert_eq!(out.assignments[&3].core, 1);
    }
}
