//! Browser bindings for the demo page: each function runs one operation of
//! the toolkit and returns a JSON string for the page's plotting code.

use serde_json::json;
use wasm_bindgen::prelude::*;

use sfn::centralized::{assign_clusters, rewire, RewireConfig, TieBreak};
use sfn::graph::Graph;
use sfn::metrics::{fidelity, trace_distance};
use sfn::powerlaw::{DegreeDistribution, PowerLawParams};
use sfn::protocol::{start_round, RoundConfig};
use sfn::rewire::{default_substrate, rewire_all, RewireWalkConfig};
use sfn::simnet::DelayModel;
use sfn::topology;

const MAX_BUILD_NODES: u32 = 20_000;
const MAX_DRAW_NODES: u32 = 800;

fn build_graph(mode: &str, n: u32, gamma: f64, iters_multiple: f64, walk_length: u32, seed: u64) -> Result<Graph, String> {
    match mode {
        "centralized" => {
            let iterations = (iters_multiple * n as f64).round().max(1.0) as u64;
            let out = rewire(&RewireConfig::fixed(n, gamma, iterations, seed))
                .map_err(|e| e.to_string())?;
            Ok(out.graph)
        }
        "distributed" => {
            let substrate = default_substrate(n, seed);
            let mut config = RewireWalkConfig::new(gamma, seed);
            config.walk_length = walk_length.max(1);
            let out = rewire_all(&substrate, &config).map_err(|e| e.to_string())?;
            Ok(out.graph)
        }
        other => Err(format!("unknown mode {other:?}")),
    }
}

fn build_json(mode: &str, n: u32, gamma: f64, iters_multiple: f64, walk_length: u32, seed: u64) -> Result<String, String> {
    if !(2..=MAX_BUILD_NODES).contains(&n) {
        return Err(format!("n must be between 2 and {MAX_BUILD_NODES}"));
    }
    if gamma <= 1.0 {
        return Err("gamma must exceed 1".into());
    }
    let graph = build_graph(mode, n, gamma, iters_multiple, walk_length, seed)?;
    let params = PowerLawParams::with_zeta_terms(gamma, 1, 1_000_000)
        .map_err(|e| e.to_string())?
        .with_tail_correction();
    let empirical = graph.empirical_degree_distribution();
    let theoretical = DegreeDistribution::theoretical(&params, empirical.support_max().max(1));
    let histogram: Vec<_> = (1..=empirical.support_max().max(1))
        .map(|k| json!({"k": k, "empirical": empirical.prob(k), "theoretical": theoretical.prob(k)}))
        .collect();
    let isolated = graph.degrees().iter().filter(|&&d| d == 0).count();
    Ok(json!({
        "mode": mode,
        "n": n,
        "gamma": gamma,
        "seed": seed,
        "edges": graph.n_edges(),
        "max_degree": graph.max_degree(),
        "isolated": isolated,
        "trace_distance": trace_distance(&empirical, &theoretical),
        "fidelity": fidelity(&empirical, &theoretical),
        "histogram": histogram,
    })
    .to_string())
}

fn cluster_json(mode: &str, n: u32, gamma: f64, seed: u64, threshold: u32, d_max: u32) -> Result<String, String> {
    if !(2..=MAX_DRAW_NODES).contains(&n) {
        return Err(format!("n must be between 2 and {MAX_DRAW_NODES} for drawing"));
    }
    let graph = build_graph("centralized", n, gamma, 1.4, 10, seed)?;
    let part = graph.partition(threshold);
    if part.n_cores() == 0 {
        return Err(format!(
            "threshold {threshold} yields no cores; maximum degree is {}",
            graph.max_degree()
        ));
    }

    let mut assigned: std::collections::BTreeMap<u32, (u32, u32)> = std::collections::BTreeMap::new();
    let mut tau_end = None;
    match mode {
        "centralized" => {
            let out = assign_clusters(&graph, &part, d_max, TieBreak::Random(seed))
                .map_err(|e| e.to_string())?;
            for (&service, a) in &out.assignments {
                assigned.insert(service, (a.core, a.hops));
            }
        }
        "protocol" => {
            let config = RoundConfig::new(DelayModel::uniform_default(seed));
            let round = start_round(&graph, &part, &config).map_err(|e| e.to_string())?;
            tau_end = Some(round.tau_end);
            for (service, (core, hops)) in round.assignment_pairs() {
                assigned.insert(service, (core, hops));
            }
        }
        other => return Err(format!("unknown mode {other:?}")),
    }

    let nodes: Vec<_> = (1..=n)
        .map(|id| {
            let core = part.is_core(id);
            let a = assigned.get(&id);
            json!({
                "id": id,
                "degree": graph.degree(id),
                "core": core,
                "cluster": if core { Some(id) } else { a.map(|&(c, _)| c) },
                "hops": a.map(|&(_, h)| h),
            })
        })
        .collect();
    let edges: Vec<_> = graph.edges().iter().map(|&(i, j)| json!([i, j])).collect();
    let sizes: Vec<_> = part
        .core_ids()
        .iter()
        .map(|&c| {
            let size = assigned.values().filter(|&&(core, _)| core == c).count();
            json!({"core": c, "size": size})
        })
        .collect();
    Ok(json!({
        "mode": mode,
        "n": n,
        "threshold": threshold,
        "n_cores": part.n_cores(),
        "isolated": part.server_ids().len() - assigned.len(),
        "tau_end": tau_end,
        "nodes": nodes,
        "edges": edges,
        "sizes": sizes,
    })
    .to_string())
}

fn race_json(slow_delay: f64, tau_end: f64) -> Result<String, String> {
    if slow_delay <= 0.0 || tau_end <= 0.0 {
        return Err("delay and timeout must be positive".into());
    }
    let race = topology::three_core_race();
    let part = race.graph.partition(race.threshold);
    let key = (
        race.slow_link.0.min(race.slow_link.1),
        race.slow_link.0.max(race.slow_link.1),
    );
    let delays = DelayModel::per_link(
        std::collections::BTreeMap::from([(key, slow_delay)]),
        1.0,
    )
    .map_err(|e| e.to_string())?;
    let config = RoundConfig::new(delays).with_tau_end(tau_end);
    let round = start_round(&race.graph, &part, &config).map_err(|e| e.to_string())?;

    let contested = &round.services[&race.contested];
    let trace: Vec<_> = round
        .trace
        .iter()
        .map(|e| {
            json!({
                "t": e.t, "kind": e.kind, "from": e.from, "to": e.to,
                "msg_type": e.msg_type, "hop_cnt": e.hop_cnt,
            })
        })
        .collect();
    let nodes: Vec<_> = (1..=race.graph.n_nodes())
        .map(|id| {
            json!({
                "id": id,
                "core": part.is_core(id),
                "contested": id == race.contested,
                "degree": race.graph.degree(id),
            })
        })
        .collect();
    let edges: Vec<_> = race.graph.edges().iter().map(|&(i, j)| json!([i, j])).collect();
    Ok(json!({
        "nodes": nodes,
        "edges": edges,
        "contested": race.contested,
        "near_core": race.near_core,
        "fallback_core": race.fallback_core,
        "slow_link": [race.slow_link.0, race.slow_link.1],
        "tau_end": tau_end,
        "slow_delay": slow_delay,
        "committed": contested.committed,
        "committed_hops": contested.committed_hops,
        "trace": trace,
    })
    .to_string())
}

/// Builds an overlay network and returns its degree histogram against the
/// theoretical power law, plus the fit metrics.
#[wasm_bindgen]
pub fn build_network(
    mode: &str,
    n: u32,
    gamma: f64,
    iters_multiple: f64,
    walk_length: u32,
    seed: u64,
) -> Result<String, JsError> {
    build_json(mode, n, gamma, iters_multiple, walk_length, seed).map_err(|e| JsError::new(&e))
}

/// Builds a small network, clusters it around its high-degree cores
/// (centralized assignment or the message-passing protocol), and returns
/// nodes, edges and cluster sizes for drawing.
#[wasm_bindgen]
pub fn cluster_network(
    mode: &str,
    n: u32,
    gamma: f64,
    seed: u64,
    threshold: u32,
    d_max: u32,
) -> Result<String, JsError> {
    cluster_json(mode, n, gamma, seed, threshold, d_max).map_err(|e| JsError::new(&e))
}

/// Runs the three-core race: how long the last link of the nearest core's
/// announcement may stall before the contested node commits to the wrong
/// core. Returns the topology, the outcome and the full event trace.
#[wasm_bindgen]
pub fn protocol_race(slow_delay: f64, tau_end: f64) -> Result<String, JsError> {
    race_json(slow_delay, tau_end).map_err(|e| JsError::new(&e))
}
