//! Decoy-state estimates of the single-pair yield `S₁ᴸ` and error rate
//! `e₁ᵁ` from observed statistics.
//!
//! Three protocols are supported: signal + decoy + vacuum, signal + decoy,
//! and signal only. The bounds rest on `P₂(λ)/P₂(λ′)·P_n(λ′) ≤ P_n(λ)` for
//! `n ≥ 2` and `λ > λ′`, which lets the unknown multi-pair contribution at
//! the signal intensity be bounded by the one at the decoy intensity.
//!
//! Every bound is clamped to its physical range; [`Bound`] keeps the raw
//! value so callers can see when that happened.

use std::fmt;
use std::str::FromStr;

use crate::channel::ObservedStatistics;
use crate::error::{Error, Result};
use crate::source::PairIntensity;

const DEGENERATE_DENOMINATOR: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecoyProtocol {
    ThreeIntensity {
        signal: PairIntensity,
        decoy: PairIntensity,
    },
    TwoIntensity {
        signal: PairIntensity,
        decoy: PairIntensity,
    },
    NoDecoy {
        signal: PairIntensity,
    },
}

fn ordered(signal: f64, decoy: f64) -> Result<(PairIntensity, PairIntensity)> {
    let s = PairIntensity::new(signal)?;
    let d = PairIntensity::new(decoy)?;
    if !(signal > decoy && decoy > 0.0) {
        return Err(Error::param(
            "lambda_prime",
            format!("need lambda > lambda' > 0, got lambda = {signal}, lambda' = {decoy}"),
        ));
    }
    Ok((s, d))
}

impl DecoyProtocol {
    pub fn three_intensity(signal: f64, decoy: f64) -> Result<Self> {
        let (signal, decoy) = ordered(signal, decoy)?;
        Ok(DecoyProtocol::ThreeIntensity { signal, decoy })
    }

    pub fn two_intensity(signal: f64, decoy: f64) -> Result<Self> {
        let (signal, decoy) = ordered(signal, decoy)?;
        Ok(DecoyProtocol::TwoIntensity { signal, decoy })
    }

    pub fn no_decoy(signal: f64) -> Result<Self> {
        let signal = PairIntensity::new(signal)?;
        if signal.value() == 0.0 {
            return Err(Error::param("lambda", "signal intensity must be positive"));
        }
        Ok(DecoyProtocol::NoDecoy { signal })
    }

    pub fn signal(&self) -> PairIntensity {
        match *self {
            DecoyProtocol::ThreeIntensity { signal, .. }
            | DecoyProtocol::TwoIntensity { signal, .. }
            | DecoyProtocol::NoDecoy { signal } => signal,
        }
    }

    pub fn decoy(&self) -> Option<PairIntensity> {
        match *self {
            DecoyProtocol::ThreeIntensity { decoy, .. }
            | DecoyProtocol::TwoIntensity { decoy, .. } => Some(decoy),
            DecoyProtocol::NoDecoy { .. } => None,
        }
    }

    pub fn kind(&self) -> ProtocolKind {
        match self {
            DecoyProtocol::ThreeIntensity { .. } => ProtocolKind::ThreeIntensity,
            DecoyProtocol::TwoIntensity { .. } => ProtocolKind::TwoIntensity,
            DecoyProtocol::NoDecoy { .. } => ProtocolKind::NoDecoy,
        }
    }

    pub fn name(&self) -> &'static str {
        self.kind().name()
    }
}

/// Protocol family without intensities attached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ProtocolKind {
    #[default]
    ThreeIntensity,
    TwoIntensity,
    NoDecoy,
}

impl ProtocolKind {
    pub const ALL: [ProtocolKind; 3] = [
        ProtocolKind::ThreeIntensity,
        ProtocolKind::TwoIntensity,
        ProtocolKind::NoDecoy,
    ];

    /// `decoy` is ignored for [`ProtocolKind::NoDecoy`].
    pub fn with_intensities(self, signal: f64, decoy: f64) -> Result<DecoyProtocol> {
        match self {
            ProtocolKind::ThreeIntensity => DecoyProtocol::three_intensity(signal, decoy),
            ProtocolKind::TwoIntensity => DecoyProtocol::two_intensity(signal, decoy),
            ProtocolKind::NoDecoy => DecoyProtocol::no_decoy(signal),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ProtocolKind::ThreeIntensity => "three_intensity",
            ProtocolKind::TwoIntensity => "two_intensity",
            ProtocolKind::NoDecoy => "no_decoy",
        }
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProtocolKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ProtocolKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                Error::param(
                    "protocol",
                    format!("expected three_intensity, two_intensity or no_decoy, got {s:?}"),
                )
            })
    }
}

/// A clamped estimate together with its unclamped value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bound {
    pub value: f64,
    pub raw: f64,
}

impl Bound {
    fn clamp(raw: f64, lo: f64, hi: f64) -> Self {
        Bound {
            value: raw.clamp(lo, hi),
            raw,
        }
    }

    pub fn clamped(&self) -> bool {
        self.value != self.raw
    }
}

fn p(lambda: PairIntensity, n: usize) -> f64 {
    lambda.probability(n)
}

/// `P₂(λ)P₁(λ′) − P₂(λ′)P₁(λ)`, positive whenever `λ > λ′ > 0`.
fn decoy_denominator(signal: PairIntensity, decoy: PairIntensity) -> Result<f64> {
    let den = p(signal, 2) * p(decoy, 1) - p(decoy, 2) * p(signal, 1);
    if den.abs() < DEGENERATE_DENOMINATOR {
        return Err(Error::DegenerateIntensities { denominator: den });
    }
    Ok(den)
}

fn s1_lower_raw(signal: &ObservedStatistics, decoy: &ObservedStatistics, s0: f64) -> Result<f64> {
    let (l, lp) = (signal.lambda(), decoy.lambda());
    let den = decoy_denominator(l, lp)?;
    let num = (p(lp, 2) * p(l, 0) - p(l, 2) * p(lp, 0)) * s0 + p(l, 2) * decoy.q()
        - p(lp, 2) * signal.q();
    Ok(num / den)
}

/// Lower bound on `S₁` from signal, decoy and the vacuum yield `S₀`.
pub fn s1_lower_three(
    signal: &ObservedStatistics,
    decoy: &ObservedStatistics,
    s0: f64,
) -> Result<Bound> {
    if !(0.0..=1.0).contains(&s0) {
        return Err(Error::param("s0", format!("must lie in [0, 1], got {s0}")));
    }
    Ok(Bound::clamp(s1_lower_raw(signal, decoy, s0)?, 0.0, 1.0))
}

fn e1_upper_with(signal: &ObservedStatistics, s0: f64, s1_lower: f64) -> Result<Bound> {
    if s1_lower <= 0.0 {
        return Err(Error::BoundUnavailable { s1_lower });
    }
    let l = signal.lambda();
    let raw = (signal.error_rate_product() - s0 * p(l, 0) / 2.0) / (p(l, 1) * s1_lower);
    Ok(Bound::clamp(raw, 0.0, 0.5))
}

/// Upper bound on `e₁`, attributing half of the vacuum counts to errors.
pub fn e1_upper_three(signal: &ObservedStatistics, s0: f64, s1_lower: f64) -> Result<Bound> {
    e1_upper_with(signal, s0, s1_lower)
}

/// `S₀ᵁ = 2 E_λ Q_λ / P₀(λ)`: vacuum counts are at most twice the error
/// counts at the signal intensity.
pub fn s0_upper_two(signal: &ObservedStatistics) -> f64 {
    2.0 * signal.error_rate_product() / p(signal.lambda(), 0)
}

/// Lower bound on `S₁` without a vacuum decoy: the three-intensity bound with
/// `S₀` replaced by [`s0_upper_two`]. The `S₀` coefficient is negative for
/// `λ > λ′`, so the upper bound is the worst case.
pub fn s1_lower_two(signal: &ObservedStatistics, decoy: &ObservedStatistics) -> Result<Bound> {
    Ok(Bound::clamp(
        s1_lower_raw(signal, decoy, s0_upper_two(signal))?,
        0.0,
        1.0,
    ))
}

/// Upper bound on `e₁` with `S₀ᴸ = 0`.
pub fn e1_upper_two(signal: &ObservedStatistics, s1_lower: f64) -> Result<Bound> {
    e1_upper_with(signal, 0.0, s1_lower)
}

/// Signal-only lower bound on `S₁`, pessimistically taking `S_n = 1` for
/// every `n ≥ 2` and `S₀ = S₀ᵁ`:
/// `[Q_λ(1 − 2E_λ) − (1 − P₀ − P₁)] / P₁`.
pub fn s1_lower_none(signal: &ObservedStatistics) -> Bound {
    let l = signal.lambda();
    let multi = 1.0 - p(l, 0) - p(l, 1);
    let raw = (signal.q() * (1.0 - 2.0 * signal.e()) - multi) / p(l, 1);
    Bound::clamp(raw, 0.0, 1.0)
}

/// Signal-only upper bound on `e₁`, using `S₀ᴸ = 0`.
pub fn e1_upper_none(signal: &ObservedStatistics, s1_lower: f64) -> Result<Bound> {
    e1_upper_two(signal, s1_lower)
}

/// Observations a protocol consumes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolObservations {
    pub signal: ObservedStatistics,
    pub decoy: Option<ObservedStatistics>,
    /// Counting rate at intensity zero, i.e. `S₀`.
    pub vacuum_yield: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BoundFlags {
    pub s1_clamped: bool,
    pub e1_clamped: bool,
    /// `S₁ᴸ ≤ 0`: no single-pair contribution can be certified.
    pub e1_unavailable: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoyBounds {
    pub s1_lower: Bound,
    /// Set to 0.5 when unavailable.
    pub e1_upper: Bound,
    /// `S₀` value used in the `e₁` bound.
    pub s0_used: f64,
    pub protocol: DecoyProtocol,
    pub flags: BoundFlags,
}

pub fn estimate(protocol: &DecoyProtocol, obs: &ProtocolObservations) -> Result<DecoyBounds> {
    let missing = |what: &str| {
        Error::param(
            "observations",
            format!("{} requires {what}", protocol.name()),
        )
    };
    let (s1, s0_used) = match protocol {
        DecoyProtocol::ThreeIntensity { .. } => {
            let decoy = obs
                .decoy
                .as_ref()
                .ok_or_else(|| missing("a decoy observation"))?;
            let s0 = obs.vacuum_yield.ok_or_else(|| missing("a vacuum yield"))?;
            (s1_lower_three(&obs.signal, decoy, s0)?, s0)
        }
        DecoyProtocol::TwoIntensity { .. } => {
            let decoy = obs
                .decoy
                .as_ref()
                .ok_or_else(|| missing("a decoy observation"))?;
            (s1_lower_two(&obs.signal, decoy)?, 0.0)
        }
        DecoyProtocol::NoDecoy { .. } => (s1_lower_none(&obs.signal), 0.0),
    };
    let (e1, unavailable) = match e1_upper_with(&obs.signal, s0_used, s1.value) {
        Ok(b) => (b, false),
        Err(Error::BoundUnavailable { .. }) => (
            Bound {
                value: 0.5,
                raw: f64::NAN,
            },
            true,
        ),
        Err(e) => return Err(e),
    };
    Ok(DecoyBounds {
        s1_lower: s1,
        e1_upper: e1,
        s0_used,
        protocol: *protocol,
        flags: BoundFlags {
            s1_clamped: s1.clamped(),
            e1_clamped: !unavailable && e1.clamped(),
            e1_unavailable: unavailable,
        },
    })
}
