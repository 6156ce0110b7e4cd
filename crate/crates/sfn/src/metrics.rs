//! Similarity measures between discrete degree distributions.
//!
//! Both measures align the two supports over `k = 1..=max(support_p,
//! support_q)`: an empirical distribution contributes zero mass past its
//! maximum observed degree, while a theoretical one keeps contributing exact
//! pmf values.

use crate::graph::Graph;
use crate::powerlaw::{DegreeDistribution, PowerLawParams};

/// Trace (Kolmogorov, L1) distance `0.5 * sum_k |p(k) - q(k)|`, in `[0, 1]`.
pub fn trace_distance(p: &DegreeDistribution, q: &DegreeDistribution) -> f64 {
    let k_max = p.support_max().max(q.support_max());
    let mut sum = 0.0;
    for k in 1..=k_max {
        sum += (p.prob(k) - q.prob(k)).abs();
    }
    0.5 * sum
}

/// Fidelity `sum_k sqrt(p(k) q(k))`, in `[0, 1]`, equal to 1 iff the
/// distributions agree on the aligned support. Not a metric.
pub fn fidelity(p: &DegreeDistribution, q: &DegreeDistribution) -> f64 {
    let k_max = p.support_max().max(q.support_max());
    let mut sum = 0.0;
    for k in 1..=k_max {
        sum += (p.prob(k) * q.prob(k)).sqrt();
    }
    sum
}

/// Trace distance between a graph's empirical degree distribution and the
/// theoretical power law with these parameters.
pub fn distance_to_power_law(g: &Graph, params: &PowerLawParams) -> f64 {
    let empirical = g.empirical_degree_distribution();
    trace_distance(&empirical, &DegreeDistribution::theoretical(params, 1))
}
