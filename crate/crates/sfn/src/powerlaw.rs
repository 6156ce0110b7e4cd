//! Discrete power-law degree distributions.
//!
//! The probability that a node has degree `k` is
//! `p(k) = k^{-gamma} / zeta(gamma, k_min)`, where `zeta` is the Hurwitz
//! zeta function evaluated by truncated summation. Everything here is a
//! pure function of the parameters, so values are safe to share across
//! threads.

use rand::Rng;
use thiserror::Error;

/// Series length used when none is given. Long enough that the truncation
/// error is far below the 1e-9 normalization tolerance for gamma >= 2.
pub const DEFAULT_ZETA_TERMS: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PowerLawError {
    #[error("zeta series diverges for gamma = {gamma}; gamma > 1 is required")]
    DivergentSeries { gamma: f64 },
    #[error("k_min must be at least 1, got {0}")]
    InvalidKMin(u32),
    #[error("series truncation length must be at least 1")]
    InvalidTerms,
    #[error("degree {k} is below the minimum admissible degree {k_min}")]
    DegreeBelowMinimum { k: u32, k_min: u32 },
    #[error("node count must be at least 1")]
    EmptyNetwork,
}

/// Truncated Hurwitz zeta sum `sum_{n=0}^{terms-1} (k_min + n)^{-gamma}`.
///
/// Summation runs from the smallest term upward so that rounding error does
/// not grow with the series length. The result is monotone nondecreasing in
/// `terms` and converges for `gamma > 1`.
pub fn hurwitz_zeta(gamma: f64, k_min: u32, terms: u64) -> Result<f64, PowerLawError> {
    if gamma <= 1.0 {
        return Err(PowerLawError::DivergentSeries { gamma });
    }
    if k_min < 1 {
        return Err(PowerLawError::InvalidKMin(k_min));
    }
    if terms < 1 {
        return Err(PowerLawError::InvalidTerms);
    }
    let mut sum = 0.0;
    for n in (0..terms).rev() {
        sum += (k_min as f64 + n as f64).powf(-gamma);
    }
    Ok(sum)
}

/// Euler-Maclaurin estimate of the dropped tail `sum_{n=terms}^{inf}`.
///
/// First unsummed index is `m = k_min + terms`; the tail is approximately
/// `m^{1-gamma}/(gamma-1) + m^{-gamma}/2`.
fn zeta_tail_estimate(gamma: f64, k_min: u32, terms: u64) -> f64 {
    let m = k_min as f64 + terms as f64;
    m.powf(1.0 - gamma) / (gamma - 1.0) + 0.5 * m.powf(-gamma)
}

/// Exponent and minimum degree of a theoretical power-law degree
/// distribution, with the zeta normalization cached at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerLawParams {
    gamma: f64,
    k_min: u32,
    zeta_terms: u64,
    tail_correction: bool,
    zeta: f64,
}

impl PowerLawParams {
    /// Validates `gamma > 1` and `k_min >= 1` and precomputes the
    /// normalization with [`DEFAULT_ZETA_TERMS`] series terms.
    ///
    /// Exponents outside the usual `[2, 3]` range are accepted with a
    /// warning as long as the series converges.
    pub fn new(gamma: f64, k_min: u32) -> Result<Self, PowerLawError> {
        Self::with_zeta_terms(gamma, k_min, DEFAULT_ZETA_TERMS)
    }

    /// Like [`PowerLawParams::new`] with an explicit truncation length.
    pub fn with_zeta_terms(gamma: f64, k_min: u32, zeta_terms: u64) -> Result<Self, PowerLawError> {
        if !(2.0..=3.0).contains(&gamma) && gamma > 1.0 {
            log::warn!("power-law exponent gamma = {gamma} is outside the usual [2, 3] range");
        }
        let zeta = hurwitz_zeta(gamma, k_min, zeta_terms)?;
        Ok(Self {
            gamma,
            k_min,
            zeta_terms,
            tail_correction: false,
            zeta,
        })
    }

    /// Adds the analytic tail estimate of the truncated series to the cached
    /// normalization. Off by default; the default series length already
    /// leaves a negligible truncation error for gamma >= 2.
    pub fn with_tail_correction(mut self) -> Self {
        if !self.tail_correction {
            self.zeta += zeta_tail_estimate(self.gamma, self.k_min, self.zeta_terms);
            self.tail_correction = true;
        }
        self
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn k_min(&self) -> u32 {
        self.k_min
    }

    /// The cached normalization `zeta(gamma, k_min)`.
    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    /// Probability that a node has degree exactly `k`.
    pub fn pmf(&self, k: u32) -> Result<f64, PowerLawError> {
        if k < self.k_min {
            return Err(PowerLawError::DegreeBelowMinimum {
                k,
                k_min: self.k_min,
            });
        }
        Ok((k as f64).powf(-self.gamma) / self.zeta)
    }

    /// Probability that a node has degree strictly greater than
    /// `k_threshold`, i.e. `1 - sum_{k=k_min}^{k_threshold} p(k)`.
    pub fn tail_prob(&self, k_threshold: u32) -> Result<f64, PowerLawError> {
        if k_threshold < self.k_min {
            return Err(PowerLawError::DegreeBelowMinimum {
                k: k_threshold,
                k_min: self.k_min,
            });
        }
        let mut head = 0.0;
        for k in (self.k_min..=k_threshold).rev() {
            head += self.pmf(k)?;
        }
        Ok((1.0 - head).max(0.0))
    }

    /// Expected number of nodes of each degree `k = 1..=k_max` in a network
    /// of `n_nodes` nodes. Entries below `k_min` are zero.
    pub fn expected_counts(&self, n_nodes: u64, k_max: u32) -> Result<Vec<f64>, PowerLawError> {
        if n_nodes < 1 {
            return Err(PowerLawError::EmptyNetwork);
        }
        let mut counts = Vec::with_capacity(k_max as usize);
        for k in 1..=k_max {
            if k < self.k_min {
                counts.push(0.0);
            } else {
                counts.push(n_nodes as f64 * self.pmf(k)?);
            }
        }
        Ok(counts)
    }
}

/// A discrete probability distribution over node degrees `k = 1..=support_max`.
///
/// Empirical distributions are truncated at the maximum observed degree and
/// carry zero mass beyond it; theoretical ones extend past their stored
/// support with exact pmf values, so comparisons between the two are always
/// taken over the longer support.
#[derive(Debug, Clone)]
pub struct DegreeDistribution {
    probs: Vec<f64>,
    source: Source,
}

#[derive(Debug, Clone)]
enum Source {
    Empirical,
    Theoretical(PowerLawParams),
}

impl DegreeDistribution {
    /// Exact pmf values for `k = 1..=support_max`. Entries below `k_min`
    /// are zero; the mass above `support_max` stays addressable through
    /// [`DegreeDistribution::prob`].
    pub fn theoretical(params: &PowerLawParams, support_max: u32) -> Self {
        let probs = (1..=support_max)
            .map(|k| {
                if k < params.k_min {
                    0.0
                } else {
                    params.pmf(k).expect("k >= k_min")
                }
            })
            .collect();
        Self {
            probs,
            source: Source::Theoretical(params.clone()),
        }
    }

    /// Builds an empirical distribution from degree counts, where
    /// `counts[i]` is the number of nodes with degree `i + 1`.
    ///
    /// Degree-0 nodes are not part of the support but still divide the
    /// mass, so the probabilities sum to (nodes of degree >= 1) / n_nodes.
    pub fn empirical(counts: &[u64], n_nodes: u64) -> Self {
        let support = counts
            .iter()
            .rposition(|&c| c > 0)
            .map(|i| i + 1)
            .unwrap_or(0);
        let probs = counts[..support]
            .iter()
            .map(|&c| c as f64 / n_nodes as f64)
            .collect();
        Self {
            probs,
            source: Source::Empirical,
        }
    }

    /// Largest degree stored explicitly.
    pub fn support_max(&self) -> u32 {
        self.probs.len() as u32
    }

    /// Probability of degree `k`, defined for every `k >= 0`.
    pub fn prob(&self, k: u32) -> f64 {
        if k == 0 {
            return 0.0;
        }
        if let Some(&p) = self.probs.get(k as usize - 1) {
            return p;
        }
        match &self.source {
            Source::Empirical => 0.0,
            Source::Theoretical(params) => {
                if k < params.k_min {
                    0.0
                } else {
                    params.pmf(k).expect("k >= k_min")
                }
            }
        }
    }

    /// Total mass stored on the explicit support.
    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Probabilities over the explicit support, index 0 holding `p(1)`.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Draws a degree from the explicit support by inverse cdf, conditioning
    /// on the stored mass (degree-0 nodes and any truncated tail excluded).
    pub fn sample<R: Rng>(&self, rng: &mut R) -> u32 {
        let total = self.total_mass();
        assert!(total > 0.0, "cannot sample an empty distribution");
        let mut u = rng.gen::<f64>() * total;
        for (i, &p) in self.probs.iter().enumerate() {
            u -= p;
            if u <= 0.0 {
                return i as u32 + 1;
            }
        }
        self.support_max()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zeta_matches_reported_constant() {
        // zeta(2.5, 1) ~ 1.341
        let z = hurwitz_zeta(2.5, 1, 1_000_000).unwrap();
        assert!((z - 1.341).abs() < 1e-3, "zeta(2.5,1) = {z}");
    }

    #[test]
    fn zeta_large_gamma_keeps_only_first_term() {
        let z = hurwitz_zeta(60.0, 1, 1000).unwrap();
        assert_abs_diff_eq!(z, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn zeta_two_approaches_basel_constant() {
        // Riemann zeta(2) = pi^2 / 6; independent closed form for the
        // truncated sum to converge against.
        let basel = std::f64::consts::PI * std::f64::consts::PI / 6.0;
        let truncated = hurwitz_zeta(2.0, 1, 10_000_000).unwrap();
        assert!((truncated - basel).abs() < 1e-6);
        let corrected = truncated + super::zeta_tail_estimate(2.0, 1, 10_000_000);
        assert!((corrected - basel).abs() < 1e-12);
    }

    #[test]
    fn zeta_rejects_divergent_exponent() {
        assert_eq!(
            hurwitz_zeta(1.0, 1, 100),
            Err(PowerLawError::DivergentSeries { gamma: 1.0 })
        );
        assert!(hurwitz_zeta(0.3, 1, 100).is_err());
    }

    #[test]
    fn zeta_monotone_in_terms() {
        let mut prev = 0.0;
        for t in [1, 2, 5, 10, 100, 1000] {
            let z = hurwitz_zeta(2.5, 1, t).unwrap();
            assert!(z >= prev);
            prev = z;
        }
    }

    #[test]
    fn zeta_truncation_gap_shrinks() {
        // |zeta(T) - zeta(2T)| strictly decreasing in T.
        let mut prev_gap = f64::INFINITY;
        for t in [100u64, 200, 400, 800, 1600] {
            let gap =
                (hurwitz_zeta(2.5, 1, t).unwrap() - hurwitz_zeta(2.5, 1, 2 * t).unwrap()).abs();
            assert!(gap < prev_gap);
            prev_gap = gap;
        }
    }

    fn gamma25() -> PowerLawParams {
        PowerLawParams::with_zeta_terms(2.5, 1, 1_000_000).unwrap()
    }

    #[test]
    fn pmf_reproduces_reference_values() {
        let p = gamma25();
        assert!((p.pmf(1).unwrap() - 0.745).abs() < 1e-3);
        assert!((p.pmf(2).unwrap() - 0.131).abs() < 1e-3);
        assert!((p.pmf(10).unwrap() - 0.002).abs() < 1e-3);
    }

    #[test]
    fn pmf_rejects_degree_below_minimum() {
        let p = PowerLawParams::with_zeta_terms(2.5, 2, 10_000).unwrap();
        assert_eq!(
            p.pmf(1),
            Err(PowerLawError::DegreeBelowMinimum { k: 1, k_min: 2 })
        );
    }

    #[test]
    fn tail_prob_reference_values() {
        let p = gamma25();
        let tail10 = p.tail_prob(10).unwrap();
        assert!((tail10 - 0.015).abs() < 1e-3, "tail(10) = {tail10}");
        // 92.5% of nodes have degree 1, 2 or 3.
        let tail3 = p.tail_prob(3).unwrap();
        assert!((tail3 - 0.075).abs() < 1e-3, "tail(3) = {tail3}");
        assert!(p.tail_prob(2_000_000).unwrap() < 1e-6);
    }

    #[test]
    fn expected_counts_scale_with_n() {
        let p = gamma25();
        let counts = p.expected_counts(100_000_000, 10).unwrap();
        assert!((counts[0] - 74.5e6).abs() < 0.1e6);
        assert!((counts[4] - 1.3e6).abs() < 0.05e6);

        assert_eq!(p.expected_counts(0, 5), Err(PowerLawError::EmptyNetwork));
        let unit = p.expected_counts(1, 5).unwrap();
        for (k, c) in unit.iter().enumerate() {
            assert_abs_diff_eq!(*c, p.pmf(k as u32 + 1).unwrap(), epsilon = 1e-15);
        }
    }

    #[test]
    fn pmf_strictly_decreasing() {
        let p = gamma25();
        let mut prev = f64::INFINITY;
        for k in 1..=500 {
            let v = p.pmf(k).unwrap();
            assert!(v < prev, "pmf not decreasing at k = {k}");
            prev = v;
        }
    }

    #[test]
    fn normalization_identity() {
        // sum_{k=1}^{S} pmf(k) + tail_prob(S) = 1 for any truncation point.
        for gamma in [2.0, 2.5, 3.0] {
            let p = PowerLawParams::with_zeta_terms(gamma, 1, 1_000_000).unwrap();
            for support in [1u32, 3, 10, 100, 1000] {
                let head: f64 = (1..=support).map(|k| p.pmf(k).unwrap()).sum();
                let total = head + p.tail_prob(support).unwrap();
                assert!(
                    (total - 1.0).abs() < 1e-9,
                    "gamma={gamma} S={support} total={total}"
                );
            }
        }
    }

    #[test]
    fn theoretical_distribution_extends_past_support() {
        let p = gamma25();
        let d = DegreeDistribution::theoretical(&p, 5);
        assert_eq!(d.support_max(), 5);
        assert_abs_diff_eq!(d.prob(7), p.pmf(7).unwrap(), epsilon = 1e-15);
        assert_eq!(d.prob(0), 0.0);
    }

    #[test]
    fn empirical_distribution_counts_isolated_nodes_in_n() {
        // one isolated node among 4: mass sums to 0.75
        let d = DegreeDistribution::empirical(&[2, 1], 4);
        assert_abs_diff_eq!(d.total_mass(), 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(d.prob(1), 0.5, epsilon = 1e-15);
        assert_eq!(d.prob(3), 0.0);
    }

    #[test]
    fn sample_stays_on_support() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let d = DegreeDistribution::empirical(&[5, 0, 3], 8);
        for _ in 0..200 {
            let k = d.sample(&mut rng);
            assert!(k == 1 || k == 3);
        }
    }
}
