//! Biased-random-walk machinery: Metropolis and Baker acceptance rules,
//! explicit transition matrices with their stationary distributions, and the
//! degree/id-biased walk matrix used by the distributed network builder.

use rand::Rng;

use crate::graph::{Graph, NodeId};

#[derive(Debug, thiserror::Error)]
pub enum WalkError {
    #[error("stationary probabilities must be positive, got {0}")]
    NonPositiveTarget(f64),
    #[error("proposal row {row} sums to {sum}, expected 1")]
    ProposalNotStochastic { row: usize, sum: f64 },
    #[error("row {row} sums to {sum}, expected 1")]
    RowNotStochastic { row: usize, sum: f64 },
    #[error("proposal has {q} states but target has {pi}")]
    DimensionMismatch { q: usize, pi: usize },
    #[error("graph splits into {0} components (sizes {1:?}); walk needs a connected graph")]
    Disconnected(usize, Vec<usize>),
    #[error("bias exponent requires gamma > 1, got {0}")]
    BadGamma(f64),
}

/// Acceptance probability of the Metropolis rule: 1 when the target ratio
/// `pi_j / pi_i` is at least 1, the ratio itself otherwise.
pub fn metropolis_accept(pi_i: f64, pi_j: f64) -> Result<f64, WalkError> {
    check_positive(pi_i)?;
    check_positive(pi_j)?;
    Ok((pi_j / pi_i).min(1.0))
}

/// Acceptance probability of Baker's rule, `pi_j / (pi_i + pi_j)`.
pub fn baker_accept(pi_i: f64, pi_j: f64) -> Result<f64, WalkError> {
    check_positive(pi_i)?;
    check_positive(pi_j)?;
    Ok(pi_j / (pi_i + pi_j))
}

fn check_positive(pi: f64) -> Result<(), WalkError> {
    if pi <= 0.0 || !pi.is_finite() {
        Err(WalkError::NonPositiveTarget(pi))
    } else {
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AcceptanceRule {
    Metropolis,
    Baker,
}

impl AcceptanceRule {
    pub fn accept(self, pi_i: f64, pi_j: f64) -> Result<f64, WalkError> {
        match self {
            AcceptanceRule::Metropolis => metropolis_accept(pi_i, pi_j),
            AcceptanceRule::Baker => baker_accept(pi_i, pi_j),
        }
    }
}

const ROW_SUM_TOL: f64 = 1e-9;

/// Row-stochastic transition matrix over states `0..n_states` together with
/// the stationary distribution it targets. Rows are stored sparsely.
#[derive(Debug, Clone)]
pub struct MarkovChain {
    rows: Vec<Vec<(u32, f64)>>,
    target: Vec<f64>,
}

impl MarkovChain {
    /// Wraps an explicit dense matrix, checking row stochasticity.
    pub fn from_dense(dense: Vec<Vec<f64>>, target: Vec<f64>) -> Result<Self, WalkError> {
        let n = dense.len();
        if target.len() != n {
            return Err(WalkError::DimensionMismatch {
                q: n,
                pi: target.len(),
            });
        }
        let mut rows = Vec::with_capacity(n);
        for (i, r) in dense.into_iter().enumerate() {
            let sum: f64 = r.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(WalkError::RowNotStochastic { row: i, sum });
            }
            rows.push(
                r.into_iter()
                    .enumerate()
                    .filter(|&(_, p)| p != 0.0)
                    .map(|(j, p)| (j as u32, p))
                    .collect(),
            );
        }
        Ok(Self { rows, target })
    }

    pub fn n_states(&self) -> usize {
        self.rows.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.rows[i]
            .iter()
            .find(|&&(s, _)| s as usize == j)
            .map(|&(_, p)| p)
            .unwrap_or(0.0)
    }

    pub fn row(&self, i: usize) -> &[(u32, f64)] {
        &self.rows[i]
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    /// Largest deviation of any row sum from 1.
    pub fn row_sum_residual(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| (r.iter().map(|&(_, p)| p).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Largest violation of `pi_i p_ij = pi_j p_ji` over all pairs.
    pub fn detailed_balance_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, p) in row {
                let j = j as usize;
                let flow = self.target[i] * p;
                let back = self.target[j] * self.entry(j, i);
                worst = worst.max((flow - back).abs());
            }
        }
        worst
    }

    /// One application of the chain to a distribution: `out = pi P`.
    pub fn apply(&self, pi: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_states()];
        for (i, row) in self.rows.iter().enumerate() {
            let mass = pi[i];
            if mass == 0.0 {
                continue;
            }
            for &(j, p) in row {
                out[j as usize] += mass * p;
            }
        }
        out
    }

    /// Largest component of `pi P - pi` for the stored target.
    pub fn stationarity_residual(&self) -> f64 {
        self.apply(&self.target)
            .iter()
            .zip(&self.target)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Stationary distribution by damped power iteration from `start`.
    /// The damping `(P + I) / 2` removes periodicity without moving the
    /// fixed point.
    pub fn stationary_from(&self, start: &[f64], tol: f64, max_iter: usize) -> Vec<f64> {
        let mut pi = start.to_vec();
        for _ in 0..max_iter {
            let next = self.apply(&pi);
            let mut delta: f64 = 0.0;
            for (v, prev) in next.iter().zip(pi.iter_mut()) {
                let damped = 0.5 * (*v + *prev);
                delta = delta.max((damped - *prev).abs());
                *prev = damped;
            }
            if delta < tol {
                break;
            }
        }
        pi
    }

    /// Samples the next state from the row of `state`.
    pub fn step<R: Rng>(&self, state: usize, rng: &mut R) -> usize {
        let row = &self.rows[state];
        let mut u = rng.gen::<f64>();
        for &(j, p) in row {
            u -= p;
            if u <= 0.0 {
                return j as usize;
            }
        }
        row.last().map(|&(j, _)| j as usize).unwrap_or(state)
    }
}

/// Samples the successor of `state`; thin wrapper over [`MarkovChain::step`]
/// so walks read as `walk_step(&chain, s, &mut rng)`.
pub fn walk_step<R: Rng>(chain: &MarkovChain, state: usize, rng: &mut R) -> usize {
    chain.step(state, rng)
}

/// Builds the Hastings chain `p_ij = q_ij * alpha_ij` (for `i != j`) with
/// `p_ii = 1 - sum_{j != i} p_ij`, where `alpha` comes from the chosen
/// acceptance rule. For a symmetric proposal the result satisfies detailed
/// balance with respect to `target`.
pub fn build_chain(
    proposal: &[Vec<f64>],
    target: &[f64],
    rule: AcceptanceRule,
) -> Result<MarkovChain, WalkError> {
    let n = proposal.len();
    if target.len() != n {
        return Err(WalkError::DimensionMismatch {
            q: n,
            pi: target.len(),
        });
    }
    for pi in target {
        check_positive(*pi)?;
    }
    for (i, row) in proposal.iter().enumerate() {
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOL {
            return Err(WalkError::ProposalNotStochastic { row: i, sum });
        }
    }

    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::new();
        let mut off_diagonal = 0.0;
        for (j, &q) in proposal[i].iter().enumerate() {
            if i == j || q == 0.0 {
                continue;
            }
            let p = q * rule.accept(target[i], target[j])?;
            off_diagonal += p;
            row.push((j as u32, p));
        }
        let diag = 1.0 - off_diagonal;
        assert!(
            diag >= -1e-12,
            "row {i} off-diagonal mass {off_diagonal} exceeds 1"
        );
        if diag > 0.0 {
            row.push((i as u32, diag.max(0.0)));
        }
        row.sort_by_key(|&(j, _)| j);
        rows.push(row);
    }
    Ok(MarkovChain {
        rows,
        target: normalized(target),
    })
}

fn normalized(pi: &[f64]) -> Vec<f64> {
    let total: f64 = pi.iter().sum();
    pi.iter().map(|p| p / total).collect()
}

/// Connected components by repeated breadth-first sweeps.
fn components(g: &Graph) -> Vec<Vec<NodeId>> {
    let n = g.n_nodes();
    let mut seen = vec![false; n as usize + 1];
    let mut comps = Vec::new();
    for start in 1..=n {
        if seen[start as usize] {
            continue;
        }
        let mut comp = vec![start];
        seen[start as usize] = true;
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            for &v in g.neighbors(u) {
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    comp.push(v);
                    stack.push(v);
                }
            }
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    comps
}

/// Degree- and id-biased walk matrix over a connected graph: state `i`
/// corresponds to node id `i + 1`, and for an edge `(i, j)`
///
/// ```text
/// p_ij = (1 / k_i) * min( (1 / j)^(1 / (gamma - 1)) * k_i / k_j , 1 )
/// ```
///
/// with the diagonal taken as one minus the degree-weighted sum of incoming
/// entries. That diagonal does not make rows exactly stochastic, so each row
/// is renormalized afterwards; the pre-normalization residual is logged. The
/// stored target is the stationary distribution obtained by power iteration
/// on the renormalized chain.
pub fn degree_bias_matrix(g: &Graph, gamma: f64) -> Result<MarkovChain, WalkError> {
    if gamma <= 1.0 {
        return Err(WalkError::BadGamma(gamma));
    }
    let comps = components(g);
    if comps.len() != 1 {
        return Err(WalkError::Disconnected(
            comps.len(),
            comps.iter().map(Vec::len).collect(),
        ));
    }

    let n = g.n_nodes() as usize;
    let exponent = 1.0 / (gamma - 1.0);
    let accept = |from: NodeId, to: NodeId| -> f64 {
        let bias = (1.0 / to as f64).powf(exponent);
        (bias * g.degree(from) as f64 / g.degree(to) as f64).min(1.0)
    };

    let mut rows = Vec::with_capacity(n);
    let mut worst_residual: f64 = 0.0;
    for i in 1..=g.n_nodes() {
        let k_i = g.degree(i) as f64;
        let mut row: Vec<(u32, f64)> = g
            .neighbors(i)
            .iter()
            .map(|&j| (j - 1, accept(i, j) / k_i))
            .collect();
        // diagonal as typeset: incoming transition probabilities, scaled by 1/k_i
        let incoming: f64 = g
            .neighbors(i)
            .iter()
            .map(|&l| accept(l, i) / g.degree(l) as f64)
            .sum();
        let diag = 1.0 - incoming / k_i;
        if diag > 0.0 {
            row.push((i - 1, diag));
        }
        let sum: f64 = row.iter().map(|&(_, p)| p).sum();
        worst_residual = worst_residual.max((sum - 1.0).abs());
        for (_, p) in &mut row {
            *p /= sum;
        }
        row.sort_by_key(|&(j, _)| j);
        rows.push(row);
    }
    log::debug!("degree bias matrix: max pre-normalization row residual {worst_residual:.3e}");

    let uniform = vec![1.0 / n as f64; n];
    let mut chain = MarkovChain {
        rows,
        target: uniform.clone(),
    };
    chain.target = chain.stationary_from(&uniform, 1e-13, 100_000);
    Ok(chain)
}
