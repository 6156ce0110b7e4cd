//! Ready-made topologies: substrates for the rewiring builders, small fixed
//! shapes for tests, and the three-core race used to demonstrate why the
//! clustering protocol needs its timeout.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{Graph, GraphBuilder, NodeId};

/// Path `1 - 2 - ... - n`.
pub fn path(n: u32) -> Graph {
    let mut b = GraphBuilder::new(n);
    for i in 1..n {
        b.add_edge(i, i + 1).unwrap();
    }
    b.freeze()
}

/// Cycle over `1..=n`.
pub fn cycle(n: u32) -> Graph {
    assert!(n >= 3);
    let mut b = GraphBuilder::new(n);
    for i in 1..n {
        b.add_edge(i, i + 1).unwrap();
    }
    b.add_edge(n, 1).unwrap();
    b.freeze()
}

/// Star with center 1 and leaves `2..=n`.
pub fn star(n: u32) -> Graph {
    let mut b = GraphBuilder::new(n);
    for i in 2..=n {
        b.add_edge(1, i).unwrap();
    }
    b.freeze()
}

/// Ring lattice where every node connects to its `m` nearest neighbors on
/// each side, so the graph is `2m`-regular with `m * n` edges.
pub fn ring_lattice(n: u32, m: u32) -> Graph {
    assert!(n > 2 * m, "ring lattice needs n > 2m");
    let mut b = GraphBuilder::new(n);
    for i in 1..=n {
        for step in 1..=m {
            let j = (i - 1 + step) % n + 1;
            b.add_edge(i, j).unwrap();
        }
    }
    b.freeze()
}

/// Connected random graph: a random recursive tree plus `extra_edges`
/// uniformly drawn chords. Deterministic for a fixed seed.
pub fn random_connected(n: u32, extra_edges: u32, seed: u64) -> Graph {
    assert!(n >= 2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = GraphBuilder::new(n);
    for i in 2..=n {
        let parent = rng.gen_range(1..i);
        b.add_edge(i, parent).unwrap();
    }
    let mut added = 0;
    let mut attempts = 0;
    while added < extra_edges && attempts < 50 * extra_edges + 100 {
        attempts += 1;
        let i = rng.gen_range(1..=n);
        let j = rng.gen_range(1..=n);
        if i == j {
            continue;
        }
        if b.add_edge(i, j).unwrap() == crate::graph::EdgeInsert::Added {
            added += 1;
        }
    }
    b.freeze()
}

/// Fixture where three core nodes race to claim one contested service node.
///
/// The contested node sits 3 hops from `near_core`, 4 from `fallback_core`
/// and 5 from the third core, with each announcement arriving over a
/// different neighbor. The final hop of the nearest core's announcement
/// crosses `slow_link`; delaying that link past the decision timeout makes
/// the contested node commit to the fallback core instead.
#[derive(Debug, Clone)]
pub struct ThreeCoreRace {
    pub graph: Graph,
    /// Service node with three neighbors, one per competing announcement.
    pub contested: NodeId,
    /// All core ids under `threshold`.
    pub cores: [NodeId; 3],
    /// Degree threshold that makes exactly `cores` the core set.
    pub threshold: u32,
    /// Core at hop distance 3 from the contested node.
    pub near_core: NodeId,
    /// Core at hop distance 4, chosen when the near announcement is late.
    pub fallback_core: NodeId,
    /// Last link on the shortest path from `near_core` to `contested`.
    pub slow_link: (NodeId, NodeId),
}

pub fn three_core_race() -> ThreeCoreRace {
    let mut b = GraphBuilder::new(22);
    // chain from core 1 (4 hops to node 7): 1-4-5-6-7
    for (i, j) in [(1, 4), (4, 5), (5, 6), (6, 7)] {
        b.add_edge(i, j).unwrap();
    }
    // chain from core 2 (5 hops): 2-8-9-10-11-7
    for (i, j) in [(2, 8), (8, 9), (9, 10), (10, 11), (11, 7)] {
        b.add_edge(i, j).unwrap();
    }
    // chain from core 3 (3 hops): 3-12-13-7
    for (i, j) in [(3, 12), (12, 13), (13, 7)] {
        b.add_edge(i, j).unwrap();
    }
    // leaves lifting each core to degree 4
    for (core, leaves) in [(1, [14, 15, 16]), (2, [17, 18, 19]), (3, [20, 21, 22])] {
        for leaf in leaves {
            b.add_edge(core, leaf).unwrap();
        }
    }
    ThreeCoreRace {
        graph: b.freeze(),
        contested: 7,
        cores: [1, 2, 3],
        threshold: 4,
        near_core: 3,
        fallback_core: 1,
        slow_link: (13, 7),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_lattice_is_regular() {
        let g = ring_lattice(10, 2);
        assert_eq!(g.n_edges(), 20);
        for i in 1..=10 {
            assert_eq!(g.degree(i), 4);
        }
    }

    #[test]
    fn random_connected_reaches_every_node() {
        let g = random_connected(40, 20, 3);
        let d = g.bfs_distances(1, 40);
        assert_eq!(d.len(), 39);
        // same seed reproduces the same edge list
        let h = random_connected(40, 20, 3);
        assert_eq!(g.edges(), h.edges());
    }

    #[test]
    fn race_distances_and_partition() {
        let race = three_core_race();
        let g = &race.graph;
        let part = g.partition(race.threshold);
        assert_eq!(part.core_ids(), &race.cores);

        let d = g.bfs_distances(race.contested, 10);
        assert_eq!(d[&race.near_core], 3);
        assert_eq!(d[&race.fallback_core], 4);
        let third = race
            .cores
            .iter()
            .copied()
            .find(|c| *c != race.near_core && *c != race.fallback_core)
            .unwrap();
        assert_eq!(d[&third], 5);

        assert_eq!(g.neighbors(race.contested).len(), 3);
        assert!(g.has_edge(race.slow_link.0, race.slow_link.1));
    }
}
