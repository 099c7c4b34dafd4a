//! Photon-pair statistics of a phase-randomised type-II PDC source.
//!
//! After phase randomisation the source is a classical mixture of n-pair
//! states emitted with probability
//!
//! ```text
//! P_n(λ) = (n + 1) λⁿ / (1 + λ)^(n + 2)
//! ```
//!
//! where λ is half the mean number of pairs per pump pulse.

use crate::error::{Error, Result};

pub const DEFAULT_TAIL_BOUND: f64 = 1e-12;
pub const DEFAULT_TRUNCATION_CAP: usize = 10_000;

/// Half the average number of photon pairs per pump pulse.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct PairIntensity(f64);

impl PairIntensity {
    pub const VACUUM: PairIntensity = PairIntensity(0.0);

    pub fn new(lambda: f64) -> Result<Self> {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::param(
                "lambda",
                format!("must be finite and >= 0, got {lambda}"),
            ));
        }
        Ok(PairIntensity(lambda))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn probability(self, n: usize) -> f64 {
        pair_probability(self, n)
    }
}

/// `P_n(λ)`, evaluated in log space so large `n` does not underflow early.
pub fn pair_probability(lambda: PairIntensity, n: usize) -> f64 {
    let l = lambda.value();
    if l == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let n_f = n as f64;
    let ln_p = (n_f + 1.0).ln() + n_f * l.ln() - (n_f + 2.0) * l.ln_1p();
    ln_p.exp()
}

/// Truncated pair-number distribution `p[0..=n_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairDistribution {
    lambda: PairIntensity,
    tail_bound: f64,
    probabilities: Vec<f64>,
}

impl PairDistribution {
    pub fn lambda(&self) -> PairIntensity {
        self.lambda
    }

    pub fn n_max(&self) -> usize {
        self.probabilities.len() - 1
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Probability mass dropped by the truncation.
    pub fn tail(&self) -> f64 {
        (1.0 - self.probabilities.iter().sum::<f64>()).max(0.0)
    }

    pub fn mean(&self) -> f64 {
        self.probabilities
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum()
    }
}

pub fn build_distribution(lambda: PairIntensity, tail_bound: f64) -> Result<PairDistribution> {
    build_distribution_capped(lambda, tail_bound, DEFAULT_TRUNCATION_CAP)
}

/// Smallest `n_max` whose truncation tail is at most `tail_bound`. The tail is
/// evaluated in closed form rather than as `1 − Σ p`, which loses everything
/// below ~1e-16.
pub fn build_distribution_capped(
    lambda: PairIntensity,
    tail_bound: f64,
    cap: usize,
) -> Result<PairDistribution> {
    if !(tail_bound > 0.0 && tail_bound < 1.0) {
        return Err(Error::param(
            "tail_bound",
            format!("must lie in (0, 1), got {tail_bound}"),
        ));
    }
    let mut probabilities = Vec::new();
    let mut n = 0usize;
    loop {
        probabilities.push(pair_probability(lambda, n));
        if tail_mass(lambda, n) <= tail_bound {
            break;
        }
        n += 1;
        if n > cap {
            return Err(Error::TruncationCap {
                lambda: lambda.value(),
                tail_bound,
                cap,
            });
        }
    }
    Ok(PairDistribution {
        lambda,
        tail_bound,
        probabilities,
    })
}

/// `Σ_{m>n} P_m(λ)` without cancellation.
///
/// With `r = λ/(1+λ)` the distribution is `P_m = (m+1) rᵐ (1−r)²`, whose
/// upper tail sums to `r^{n+1} (n + 2 − (n + 1) r)`.
fn tail_mass(lambda: PairIntensity, n: usize) -> f64 {
    let l = lambda.value();
    if l == 0.0 {
        return 0.0;
    }
    let r = l / (1.0 + l);
    let n_f = n as f64;
    ((n_f + 1.0) * r.ln()).exp() * (n_f + 2.0 - (n_f + 1.0) * r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn lam(x: f64) -> PairIntensity {
        PairIntensity::new(x).unwrap()
    }

    #[test]
    fn vacuum_source() {
        assert_eq!(pair_probability(PairIntensity::VACUUM, 0), 1.0);
        for n in 1..5 {
            assert_eq!(pair_probability(PairIntensity::VACUUM, n), 0.0);
        }
        let d = build_distribution(PairIntensity::VACUUM, 1e-12).unwrap();
        assert_eq!(d.n_max(), 0);
        assert_eq!(d.probabilities(), &[1.0]);
    }

    #[test]
    fn single_pair_probability_at_point_one() {
        // 2·0.1 / 1.1³
        let expected = 0.2 / (1.1f64 * 1.1 * 1.1);
        assert_relative_eq!(
            pair_probability(lam(0.1), 1),
            expected,
            max_relative = 1e-14
        );
        assert_relative_eq!(expected, 0.150_262_960_180_315, max_relative = 1e-12);
    }

    #[test]
    fn direct_and_log_space_agree_for_small_n() {
        for &l in &[0.01f64, 0.1, 0.5, 2.0] {
            for n in 0..20 {
                let direct = (n as f64 + 1.0) * l.powi(n as i32) / (1.0 + l).powi(n as i32 + 2);
                assert_relative_eq!(pair_probability(lam(l), n), direct, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn large_n_stays_finite() {
        // 5⁵⁰⁰ and 6⁵⁰² overflow on their own; the ratio is about 1e-38.
        let p = pair_probability(lam(5.0), 500);
        let expected = (501f64.ln() + 500.0 * (5.0f64 / 6.0).ln() - 2.0 * 6f64.ln()).exp();
        assert!(p.is_finite() && p > 0.0);
        assert_relative_eq!(p, expected, max_relative = 1e-10);
    }

    #[test]
    fn tail_bound_is_met_by_summation() {
        let d = build_distribution(lam(0.1), 1e-12).unwrap();
        let sum: f64 = d.probabilities().iter().sum();
        assert!(sum >= 1.0 - 1e-12);
        assert!(sum <= 1.0 + 1e-15);
        // N_max is the smallest such truncation.
        let shorter: f64 = d.probabilities()[..d.n_max()].iter().sum();
        assert!(1.0 - shorter > 1e-12);
    }

    #[test]
    fn smaller_intensity_truncates_earlier() {
        let big = build_distribution(lam(0.1), 1e-12).unwrap();
        let small = build_distribution(lam(0.01), 1e-12).unwrap();
        assert!(small.n_max() < big.n_max());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(PairIntensity::new(-0.1).is_err());
        assert!(PairIntensity::new(f64::NAN).is_err());
        assert!(build_distribution(lam(0.1), 0.0).is_err());
        assert!(build_distribution(lam(0.1), 1.0).is_err());
        assert!(matches!(
            build_distribution(lam(1e6), 1e-12),
            Err(Error::TruncationCap { .. })
        ));
    }

    #[test]
    fn closed_form_tail_matches_summed_complement() {
        let l = lam(0.5);
        for n in 0..30 {
            let partial: f64 = (0..=n).map(|m| pair_probability(l, m)).sum();
            assert_relative_eq!(tail_mass(l, n), 1.0 - partial, epsilon = 1e-14);
        }
    }
}
