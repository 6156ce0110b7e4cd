//! Implementations of the `build`, `cluster` and `stats` subcommands.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use sfn::centralized::{
    assign_clusters, rewire, AlphaConvention, RewireConfig, StoppingRule, TieBreak,
};
use sfn::graph::Graph;
use sfn::metrics;
use sfn::powerlaw::{DegreeDistribution, PowerLawParams};
use sfn::protocol::{start_round, ClusterEntry, RoundConfig};
use sfn::rewire::{default_substrate, rewire_all, ExponentGrouping, RewireWalkConfig};
use sfn::simnet::{trace_to_jsonl, DelayModel};

use crate::report::{ClusterFile, ClusterParams, CoreCluster, RunReport, SizeStats};
use crate::{
    AlphaConventionArg, BuildArgs, ClusterArgs, ExponentGroupingArg, Format, Mode, StatsArgs,
    TieBreakArg,
};

/// Parses an iteration budget: a plain count, or a multiple of `n` written
/// like `1.4N`.
fn parse_iters(spec: &str, n: u32) -> Result<u64> {
    let trimmed = spec.trim();
    if let Some(prefix) = trimmed.strip_suffix(['n', 'N']) {
        let multiple: f64 = prefix
            .parse()
            .with_context(|| format!("bad iteration multiple {trimmed:?}"))?;
        if multiple <= 0.0 {
            bail!("iteration multiple must be positive, got {multiple}");
        }
        Ok((multiple * n as f64).round() as u64)
    } else {
        let count: u64 = trimmed
            .parse()
            .with_context(|| format!("bad iteration count {trimmed:?}"))?;
        if count == 0 {
            bail!("iteration count must be positive");
        }
        Ok(count)
    }
}

/// Parses `fixed:D` or `uniform:LO:HI` into a delay model.
fn parse_delay(spec: &str, seed: u64) -> Result<DelayModel> {
    let parts: Vec<&str> = spec.split(':').collect();
    let model = match parts.as_slice() {
        ["fixed", d] => DelayModel::fixed(d.parse().context("bad fixed delay")?),
        ["uniform", lo, hi] => DelayModel::uniform(
            lo.parse().context("bad uniform delay bound")?,
            hi.parse().context("bad uniform delay bound")?,
            seed,
        ),
        _ => bail!("delay must be written fixed:D or uniform:LO:HI, got {spec:?}"),
    };
    model.map_err(Into::into)
}

fn report_path(out: &Path, explicit: Option<PathBuf>) -> PathBuf {
    explicit.unwrap_or_else(|| {
        let mut path = out.as_os_str().to_owned();
        path.push(".report.json");
        PathBuf::from(path)
    })
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn build(args: BuildArgs) -> Result<()> {
    let started = Instant::now();
    let (graph, iterations, skipped, trace_distance) = match args.mode {
        Mode::Centralized => {
            let stop = match (args.epsilon, &args.iters) {
                (Some(target), _) => StoppingRule::Epsilon {
                    target,
                    check_interval: None,
                },
                (None, spec) => {
                    let budget = parse_iters(spec.as_deref().unwrap_or("1.4N"), args.n)?;
                    StoppingRule::FixedIterations(budget)
                }
            };
            let config = RewireConfig {
                n_nodes: args.n,
                gamma: args.gamma,
                stop,
                seed: args.seed,
                alpha_convention: match args.alpha_convention {
                    AlphaConventionArg::Goh => AlphaConvention::Goh,
                    AlphaConventionArg::AsWritten => AlphaConvention::AsWritten,
                },
                max_draws: None,
            };
            let out = rewire(&config).context("centralized build failed")?;
            (out.graph, out.iterations, None, out.trace_distance)
        }
        Mode::Distributed => {
            let substrate = default_substrate(args.n, args.seed);
            let mut config = RewireWalkConfig::new(args.gamma, args.seed);
            config.walk_length = args.walk_length;
            config.exponent_grouping = match args.exponent_grouping {
                ExponentGroupingArg::AlphaGammaMinusOne => ExponentGrouping::AlphaGammaMinusOne,
                ExponentGroupingArg::GammaMinusOne => ExponentGrouping::GammaMinusOne,
            };
            let out = rewire_all(&substrate, &config).context("distributed build failed")?;
            let params = PowerLawParams::new(args.gamma, 1)
                .context("invalid gamma")?
                .with_tail_correction();
            let distance = metrics::distance_to_power_law(&out.graph, &params);
            (out.graph, out.rewired, Some(out.skipped), distance)
        }
    };

    graph
        .save(&args.out)
        .with_context(|| format!("writing {}", args.out.display()))?;

    let report = RunReport {
        command: "build".into(),
        mode: args.mode.as_str().into(),
        n: args.n,
        gamma: args.gamma,
        seed: args.seed,
        iterations: Some(iterations),
        skipped_edges: skipped,
        trace_distance: Some(trace_distance),
        threshold: None,
        n_cores: None,
        cluster_sizes: None,
        cluster_size_stats: None,
        isolated: None,
        wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
    };
    write_json(&report_path(&args.out, args.report), &report)?;
    println!(
        "built n={} gamma={} edges={} trace_distance={:.4}",
        args.n,
        args.gamma,
        graph.n_edges(),
        trace_distance
    );
    Ok(())
}

pub fn cluster(args: ClusterArgs) -> Result<()> {
    let started = Instant::now();
    let graph = Graph::load(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let part = graph.partition(args.threshold);
    if part.n_cores() == 0 {
        bail!(
            "threshold {} yields zero core nodes; the maximum degree is {}",
            args.threshold,
            graph.max_degree()
        );
    }

    let (cores, isolated, tau_end) = match args.mode {
        Mode::Centralized => {
            let tie_break = match args.tie_break {
                TieBreakArg::Random => TieBreak::Random(args.seed),
                TieBreakArg::LowestId => TieBreak::LowestCoreId,
            };
            let assignment = assign_clusters(&graph, &part, args.dmax, tie_break)?;
            let cores = part
                .core_ids()
                .iter()
                .map(|&core| CoreCluster {
                    id: core,
                    cluster: assignment.members[&core]
                        .iter()
                        .map(|&service| {
                            let a = &assignment.assignments[&service];
                            ClusterEntry {
                                service,
                                hop_cnt: a.hops,
                                path: a.path.clone(),
                            }
                        })
                        .collect(),
                    core_tab: Vec::new(),
                })
                .collect();
            (cores, assignment.unassigned, None)
        }
        Mode::Distributed => {
            let delays = parse_delay(&args.delay, args.seed)?;
            let mut config = RoundConfig::new(delays);
            config.d_max = args.dmax;
            config.tau_end = args.tau_end;
            let round = start_round(&graph, &part, &config)?;
            if let Some(trace_path) = &args.trace_out {
                fs::write(trace_path, trace_to_jsonl(&round.trace))
                    .with_context(|| format!("writing {}", trace_path.display()))?;
            }
            let tau_end = round.tau_end;
            let cores = round
                .cores
                .values()
                .map(|state| CoreCluster {
                    id: state.node_id,
                    cluster: state.cluster_tab.values().cloned().collect(),
                    core_tab: state.core_tab.iter().copied().collect(),
                })
                .collect();
            let mut isolated = round.isolated();
            isolated.sort_unstable();
            (cores, isolated, Some(tau_end))
        }
    };

    let cluster_file = ClusterFile {
        cores,
        isolated,
        params: ClusterParams {
            mode: args.mode.as_str().into(),
            n_nodes: graph.n_nodes(),
            threshold: args.threshold,
            d_max: args.dmax,
            tau_end,
            seed: args.seed,
        },
    };
    write_json(&args.out, &cluster_file)?;

    let sizes: Vec<u32> = cluster_file
        .cores
        .iter()
        .map(|c| c.cluster.len() as u32)
        .collect();
    let report = RunReport {
        command: "cluster".into(),
        mode: args.mode.as_str().into(),
        n: graph.n_nodes(),
        gamma: graph.gamma(),
        seed: args.seed,
        iterations: None,
        skipped_edges: None,
        trace_distance: None,
        threshold: Some(args.threshold),
        n_cores: Some(part.n_cores() as u32),
        cluster_size_stats: SizeStats::from_sizes(&sizes),
        cluster_sizes: Some(sizes),
        isolated: Some(cluster_file.isolated.len() as u32),
        wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
    };
    write_json(&report_path(&args.out, args.report), &report)?;
    println!(
        "clustered n={} threshold={} cores={} isolated={}",
        graph.n_nodes(),
        args.threshold,
        part.n_cores(),
        cluster_file.isolated.len()
    );
    Ok(())
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

pub fn stats(args: StatsArgs) -> Result<()> {
    if let Some(sweep) = &args.sweep {
        return sweep_stats(&args, sweep);
    }
    let input = args.input.as_ref().expect("clap enforces input|sweep");
    let graph = Graph::load(input).with_context(|| format!("reading {}", input.display()))?;
    let gamma = args.gamma.unwrap_or_else(|| graph.gamma());
    if gamma <= 1.0 {
        bail!("need --gamma > 1 (the edge-list header carries gamma={})", graph.gamma());
    }
    let params = PowerLawParams::new(gamma, 1)?.with_tail_correction();
    let empirical = graph.empirical_degree_distribution();
    let theoretical = DegreeDistribution::theoretical(&params, empirical.support_max().max(1));
    let distance = metrics::trace_distance(&empirical, &theoretical);
    let fidelity = metrics::fidelity(&empirical, &theoretical);

    let k_max = empirical.support_max().max(1);
    match args.format {
        Format::Csv => {
            let mut text = format!("# trace_distance={distance} fidelity={fidelity} gamma={gamma}\n");
            text.push_str("k,empirical,theoretical\n");
            for k in 1..=k_max {
                text.push_str(&format!("{k},{},{}\n", empirical.prob(k), theoretical.prob(k)));
            }
            write_output(args.out.as_deref(), &text)?;
        }
        Format::Json => {
            let per_degree: Vec<serde_json::Value> = (1..=k_max)
                .map(|k| {
                    serde_json::json!({
                        "k": k,
                        "empirical": empirical.prob(k),
                        "theoretical": theoretical.prob(k),
                    })
                })
                .collect();
            let doc = serde_json::json!({
                "gamma": gamma,
                "trace_distance": distance,
                "fidelity": fidelity,
                "per_degree": per_degree,
            });
            write_output(args.out.as_deref(), &format!("{:#}\n", doc))?;
        }
    }
    Ok(())
}

/// Re-runs the centralized builder across a range of iteration budgets and
/// emits the achieved distance per budget.
fn sweep_stats(args: &StatsArgs, sweep: &str) -> Result<()> {
    let n = args.n.context("--sweep needs --n")?;
    let gamma = args.gamma.context("--sweep needs --gamma")?;
    let parts: Vec<&str> = sweep.split(':').collect();
    let [lo, hi, step] = parts.as_slice() else {
        bail!("sweep must be written LO:HI:STEP in multiples of n, got {sweep:?}");
    };
    let (lo, hi, step): (f64, f64, f64) = (
        lo.parse().context("bad sweep start")?,
        hi.parse().context("bad sweep end")?,
        step.parse().context("bad sweep step")?,
    );
    if step <= 0.0 || lo <= 0.0 || hi < lo {
        bail!("sweep range must satisfy 0 < LO <= HI with a positive STEP");
    }

    let mut text = format!("# n={n} gamma={gamma} seed={}\n", args.seed);
    text.push_str("multiple,iterations,trace_distance\n");
    let mut multiple = lo;
    while multiple <= hi + 1e-9 {
        let iterations = (multiple * n as f64).round() as u64;
        let config = RewireConfig::fixed(n, gamma, iterations, args.seed);
        let out = rewire(&config)?;
        text.push_str(&format!("{multiple},{iterations},{}\n", out.trace_distance));
        multiple += step;
    }
    write_output(args.out.as_deref(), &text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iteration_budget_accepts_multiples_of_n() {
        assert_eq!(parse_iters("1.4N", 1000).unwrap(), 1400);
        assert_eq!(parse_iters("2n", 50).unwrap(), 100);
        assert_eq!(parse_iters("700", 1000).unwrap(), 700);
        assert!(parse_iters("xN", 10).is_err());
        assert!(parse_iters("-1N", 10).is_err());
        assert!(parse_iters("0", 10).is_err());
    }

    #[test]
    fn delay_spec_parsing() {
        assert!(matches!(
            parse_delay("fixed:2.5", 0).unwrap(),
            DelayModel::Fixed(d) if d == 2.5
        ));
        assert!(matches!(
            parse_delay("uniform:0.5:1.5", 7).unwrap(),
            DelayModel::Uniform { lo: 0.5, hi: 1.5, seed: 7 }
        ));
        assert!(parse_delay("gauss:1", 0).is_err());
        assert!(parse_delay("fixed:-1", 0).is_err());
    }

    #[test]
    fn report_path_defaults_next_to_out() {
        let path = report_path(Path::new("/tmp/g.edges"), None);
        assert_eq!(path, PathBuf::from("/tmp/g.edges.report.json"));
        let explicit = report_path(Path::new("/tmp/g.edges"), Some(PathBuf::from("/r.json")));
        assert_eq!(explicit, PathBuf::from("/r.json"));
    }
}
