//! Lossy fiber with dark counts: per-n-pair yields `S_n`, error-weighted
//! yields `e_n S_n`, and the counting rate `Q_λ` and QBER `E_λ` Bob observes.
//!
//! Bob has two detectors per spatial mode and keeps an event only when
//! exactly one detector fires in each of modes `a` and `b`. Detector
//! efficiency and DFS projection loss are folded into the transmittance.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::source::{build_distribution, PairDistribution, PairIntensity, DEFAULT_TAIL_BOUND};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    k_db_per_km: f64,
    length_km: f64,
    dark_count: f64,
}

impl ChannelParams {
    pub fn new(k_db_per_km: f64, length_km: f64, dark_count: f64) -> Result<Self> {
        if !(k_db_per_km.is_finite() && k_db_per_km >= 0.0) {
            return Err(Error::param(
                "k_db_per_km",
                format!("must be >= 0, got {k_db_per_km}"),
            ));
        }
        if !(length_km.is_finite() && length_km >= 0.0) {
            return Err(Error::param(
                "length_km",
                format!("must be >= 0, got {length_km}"),
            ));
        }
        if !(dark_count.is_finite() && (0.0..1.0).contains(&dark_count)) {
            return Err(Error::param(
                "dark_count",
                format!("must lie in [0, 1), got {dark_count}"),
            ));
        }
        Ok(ChannelParams {
            k_db_per_km,
            length_km,
            dark_count,
        })
    }

    pub fn with_length(&self, length_km: f64) -> Result<Self> {
        ChannelParams::new(self.k_db_per_km, length_km, self.dark_count)
    }

    pub fn k_db_per_km(&self) -> f64 {
        self.k_db_per_km
    }

    pub fn length_km(&self) -> f64 {
        self.length_km
    }

    pub fn dark_count(&self) -> f64 {
        self.dark_count
    }

    /// `η = 10^(−kL/10)`
    pub fn eta(&self) -> f64 {
        10f64.powf(-self.k_db_per_km * self.length_km / 10.0)
    }

    pub fn loss_db(&self) -> f64 {
        self.k_db_per_km * self.length_km
    }
}

/// `(1 − η)ⁿ` with `0⁰ = 1`.
fn all_lost(eta: f64, n: usize) -> f64 {
    if n == 0 {
        1.0
    } else {
        (1.0 - eta).powi(n as i32)
    }
}

/// `η_n = 1 − (1 − η)ⁿ`, the chance that at least one of `n` photons survives.
pub fn transmittance_n(eta: f64, n: usize) -> f64 {
    1.0 - all_lost(eta, n)
}

/// Form of the both-modes-lost term in the error yield.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Eq20Variant {
    /// `2D (1−η)^{2n}`, one power of the dark-count probability.
    AsPrinted,
    /// `2D² (1−η)^{2n}`, one dark count in each mode.
    #[default]
    SquaredDark,
}

impl Eq20Variant {
    pub const ALL: [Eq20Variant; 2] = [Eq20Variant::AsPrinted, Eq20Variant::SquaredDark];

    pub fn name(self) -> &'static str {
        match self {
            Eq20Variant::AsPrinted => "as_printed",
            Eq20Variant::SquaredDark => "squared_dark",
        }
    }
}

impl fmt::Display for Eq20Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Eq20Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "as_printed" => Ok(Eq20Variant::AsPrinted),
            "squared_dark" => Ok(Eq20Variant::SquaredDark),
            other => Err(Error::param(
                "eq20_variant",
                format!("expected as_printed or squared_dark, got `{other}`"),
            )),
        }
    }
}

/// Counting rate `S_n` of an n-pair emission.
///
/// The n-pair state is an equal mixture over `m = 0..=n` of patterns with
/// `n − m` photons on one detector and `m` on the other in each mode. For
/// each `m` the event registers when one detector fires per mode, from
/// photons or a dark count; the two idle detectors must stay dark.
pub fn yield_n(params: &ChannelParams, n: usize) -> f64 {
    let eta = params.eta();
    let d = params.dark_count();
    let lost_all = all_lost(eta, n);
    let sum: f64 = (0..=n)
        .map(|m| {
            let first_only = transmittance_n(eta, n - m) * all_lost(eta, m);
            let second_only = transmittance_n(eta, m) * all_lost(eta, n - m);
            let one_click = first_only + second_only;
            one_click * one_click
                + 4.0 * first_only * lost_all * d
                + 4.0 * second_only * lost_all * d
                + 4.0 * lost_all * lost_all * d * d
        })
        .sum();
    (1.0 - d).powi(2) / (n as f64 + 1.0) * sum
}

/// Error-weighted counting rate `e_n S_n`. Photons are assumed to hit the
/// correct detector; errors come from mismatched clicks across the two
/// modes, half of the photon-plus-dark events, and the all-dark term whose
/// form is selected by `variant`.
pub fn error_yield_n(params: &ChannelParams, n: usize, variant: Eq20Variant) -> f64 {
    let eta = params.eta();
    let d = params.dark_count();
    let lost_all = all_lost(eta, n);
    let dark_term = match variant {
        Eq20Variant::AsPrinted => 2.0 * d,
        Eq20Variant::SquaredDark => 2.0 * d * d,
    };
    let sum: f64 = (0..=n)
        .map(|m| {
            let first_only = transmittance_n(eta, n - m) * all_lost(eta, m);
            let second_only = transmittance_n(eta, m) * all_lost(eta, n - m);
            2.0 * first_only * second_only
                + 2.0 * second_only * lost_all * d
                + 2.0 * first_only * lost_all * d
                + lost_all * lost_all * dark_term
        })
        .sum();
    (1.0 - d).powi(2) / (n as f64 + 1.0) * sum
}

#[derive(Debug, Clone, PartialEq)]
pub struct YieldTable {
    pub s: Vec<f64>,
    pub es: Vec<f64>,
}

impl YieldTable {
    pub fn build(params: &ChannelParams, n_max: usize, variant: Eq20Variant) -> Self {
        YieldTable {
            s: (0..=n_max).map(|n| yield_n(params, n)).collect(),
            es: (0..=n_max)
                .map(|n| error_yield_n(params, n, variant))
                .collect(),
        }
    }

    /// Photon numbers where `0 ≤ e_n S_n ≤ S_n ≤ 1` fails.
    pub fn invariant_violations(&self) -> Vec<usize> {
        self.s
            .iter()
            .zip(&self.es)
            .enumerate()
            .filter(|(_, (s, es))| !(0.0 <= **es && **es <= **s && **s <= 1.0))
            .map(|(n, _)| n)
            .collect()
    }

    /// `e_n`, or `None` when `S_n = 0`.
    pub fn error_rate(&self, n: usize) -> Option<f64> {
        let s = *self.s.get(n)?;
        (s > 0.0).then(|| self.es[n] / s)
    }
}

/// Counting rate and QBER at one intensity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservedStatistics {
    lambda: PairIntensity,
    q: f64,
    e: f64,
    zero_count: bool,
}

impl ObservedStatistics {
    /// Takes `Q` and the error-weighted rate `E·Q`. A zero counting rate
    /// reports `E = 0` with the zero-count flag set.
    pub fn from_rates(lambda: PairIntensity, q: f64, eq: f64) -> Result<Self> {
        if q == 0.0 {
            return ObservedStatistics::new(lambda, 0.0, 0.0).map(|mut o| {
                o.zero_count = true;
                o
            });
        }
        ObservedStatistics::new(lambda, q, eq / q)
    }

    pub fn new(lambda: PairIntensity, q: f64, e: f64) -> Result<Self> {
        let slack = 1e-12;
        if !((0.0..=1.0 + slack).contains(&q) && (0.0..=1.0).contains(&e)) {
            return Err(Error::PathologicalObservation {
                lambda: lambda.value(),
                q,
                e,
            });
        }
        Ok(ObservedStatistics {
            lambda,
            q: q.min(1.0),
            e,
            zero_count: q == 0.0,
        })
    }

    pub fn lambda(&self) -> PairIntensity {
        self.lambda
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn e(&self) -> f64 {
        self.e
    }

    /// `E·Q`
    pub fn error_rate_product(&self) -> f64 {
        self.e * self.q
    }

    pub fn zero_count(&self) -> bool {
        self.zero_count
    }
}

/// Closed forms for `Q_λ` and `E_λ` after summing the yields against
/// `P_n(λ)`.
pub fn observed_closed_form(
    lambda: PairIntensity,
    params: &ChannelParams,
) -> Result<ObservedStatistics> {
    let l = lambda.value();
    let eta = params.eta();
    let d = params.dark_count();
    let one_minus = 1.0 - eta;
    let le = 1.0 + l * eta;
    let bracket = 4.0 * l * eta * d * one_minus * le
        + 2.0 * d * d * le * le
        + l * eta * eta * (1.0 + l * l * (2.0 - eta) * eta + l * (eta * eta - 2.0 * eta + 3.0));
    let den = 1.0 + l * eta * (3.0 - eta) + l * l * eta * eta * (2.0 - eta);
    let q = 2.0 * (1.0 - d).powi(2) / (den * den) * bracket;
    let e = if bracket > 0.0 {
        let num = d + l * d * eta + l * eta * one_minus;
        num * num / bracket
    } else {
        0.0
    };
    if q == 0.0 {
        return ObservedStatistics::from_rates(lambda, 0.0, 0.0);
    }
    ObservedStatistics::new(lambda, q, e)
}

/// `Q = Σ P_n S_n` and `E·Q = Σ P_n e_n S_n` over the truncated distribution.
pub fn observed_series(
    params: &ChannelParams,
    dist: &PairDistribution,
    variant: Eq20Variant,
) -> Result<ObservedStatistics> {
    let (q, eq) = dist
        .probabilities()
        .iter()
        .enumerate()
        .fold((0.0, 0.0), |(q, eq), (n, p)| {
            (
                q + p * yield_n(params, n),
                eq + p * error_yield_n(params, n, variant),
            )
        });
    ObservedStatistics::from_rates(dist.lambda(), q, eq)
}

/// How observations are generated for a given intensity and channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ObservationModel {
    ClosedForm,
    Series {
        variant: Eq20Variant,
        tail_bound: f64,
    },
}

impl Default for ObservationModel {
    fn default() -> Self {
        ObservationModel::Series {
            variant: Eq20Variant::default(),
            tail_bound: DEFAULT_TAIL_BOUND,
        }
    }
}

impl ObservationModel {
    pub fn series(variant: Eq20Variant) -> Self {
        ObservationModel::Series {
            variant,
            tail_bound: DEFAULT_TAIL_BOUND,
        }
    }

    pub fn observe(
        &self,
        lambda: PairIntensity,
        params: &ChannelParams,
    ) -> Result<ObservedStatistics> {
        match *self {
            ObservationModel::ClosedForm => observed_closed_form(lambda, params),
            ObservationModel::Series {
                variant,
                tail_bound,
            } => {
                let dist = build_distribution(lambda, tail_bound)?;
                observed_series(params, &dist, variant)
            }
        }
    }
}
