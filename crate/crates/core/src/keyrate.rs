//! GLLP key-rate lower bound, secure-distance searches and the distance at
//! which a photon-number-splitting attack breaks an undecoyed source.

use rayon::prelude::*;

use crate::bounds::{estimate, DecoyBounds, DecoyProtocol, ProtocolKind, ProtocolObservations};
use crate::channel::{ChannelParams, ObservationModel, ObservedStatistics};
use crate::error::{Error, Result};
use crate::source::PairIntensity;

pub const DEFAULT_SIFTING: f64 = 0.5;
pub const DEFAULT_EC_INEFFICIENCY: f64 = 1.2;
pub const DEFAULT_ATTACK_SUCCESS: f64 = 0.30;

/// `H₂(x)` in bits.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::param(
            "x",
            format!("binary entropy needs x in [0, 1], got {x}"),
        ));
    }
    if x == 0.0 || x == 1.0 {
        return Ok(0.0);
    }
    Ok(-x * x.log2() - (1.0 - x) * (1.0 - x).log2())
}

fn h2(x: f64) -> f64 {
    binary_entropy(x.clamp(0.0, 1.0)).unwrap_or(0.0)
}

/// Error-correction inefficiency `f(E)`.
#[derive(Debug, Clone, Copy)]
pub enum ErrorCorrection {
    Constant(f64),
    /// Must return values `≥ 1`.
    Function(fn(f64) -> f64),
}

impl ErrorCorrection {
    pub fn at(&self, e: f64) -> f64 {
        match *self {
            ErrorCorrection::Constant(f) => f,
            ErrorCorrection::Function(f) => f(e),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ProtocolConstants {
    sifting: f64,
    ec: ErrorCorrection,
}

impl Default for ProtocolConstants {
    fn default() -> Self {
        ProtocolConstants {
            sifting: DEFAULT_SIFTING,
            ec: ErrorCorrection::Constant(DEFAULT_EC_INEFFICIENCY),
        }
    }
}

impl ProtocolConstants {
    pub fn new(sifting: f64, ec: ErrorCorrection) -> Result<Self> {
        if !(sifting > 0.0 && sifting <= 1.0) {
            return Err(Error::param(
                "q",
                format!("must lie in (0, 1], got {sifting}"),
            ));
        }
        if let ErrorCorrection::Constant(f) = ec {
            if !(f >= 1.0 && f.is_finite()) {
                return Err(Error::param(
                    "f_ec",
                    format!("must be finite and >= 1, got {f}"),
                ));
            }
        }
        Ok(ProtocolConstants { sifting, ec })
    }

    pub fn with_constant_f(sifting: f64, f: f64) -> Result<Self> {
        Self::new(sifting, ErrorCorrection::Constant(f))
    }

    pub fn sifting(&self) -> f64 {
        self.sifting
    }

    pub fn error_correction(&self) -> ErrorCorrection {
        self.ec
    }
}

/// A key rate floored at zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeyRate {
    pub value: f64,
    /// Unfloored formula value; `-inf` when no single-pair bound exists.
    pub raw: f64,
    pub floored: bool,
}

impl KeyRate {
    pub fn is_secure(&self) -> bool {
        self.value > 0.0
    }
}

/// `q·[−Q f(E) H₂(E) + P₁ S₁ᴸ (1 − H₂(e₁ᵁ))]`.
pub fn gllp_rate(
    obs: &ObservedStatistics,
    bounds: &DecoyBounds,
    consts: &ProtocolConstants,
) -> KeyRate {
    if bounds.flags.e1_unavailable {
        return KeyRate {
            value: 0.0,
            raw: f64::NEG_INFINITY,
            floored: true,
        };
    }
    let e = obs.e();
    let p1 = obs.lambda().probability(1);
    let raw = consts.sifting
        * (-obs.q() * consts.ec.at(e) * h2(e)
            + p1 * bounds.s1_lower.value * (1.0 - h2(bounds.e1_upper.value)));
    if raw > 0.0 {
        KeyRate {
            value: raw,
            raw,
            floored: false,
        }
    } else {
        KeyRate {
            value: 0.0,
            raw,
            floored: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeyRatePoint {
    pub length_km: f64,
    pub lambda: PairIntensity,
    pub lambda_prime: Option<PairIntensity>,
    pub signal: ObservedStatistics,
    pub bounds: DecoyBounds,
    pub rate: KeyRate,
}

impl KeyRatePoint {
    pub fn r_lower(&self) -> f64 {
        self.rate.value
    }
}

/// Observe the channel at every intensity the protocol uses and bound the rate.
pub fn evaluate_point(
    protocol: &DecoyProtocol,
    params: &ChannelParams,
    consts: &ProtocolConstants,
    model: &ObservationModel,
) -> Result<KeyRatePoint> {
    let signal = model.observe(protocol.signal(), params)?;
    let decoy = protocol
        .decoy()
        .map(|d| model.observe(d, params))
        .transpose()?;
    let vacuum_yield = match protocol.kind() {
        ProtocolKind::ThreeIntensity => Some(model.observe(PairIntensity::VACUUM, params)?.q()),
        _ => None,
    };
    let bounds = estimate(
        protocol,
        &ProtocolObservations {
            signal,
            decoy,
            vacuum_yield,
        },
    )?;
    Ok(KeyRatePoint {
        length_km: params.length_km(),
        lambda: protocol.signal(),
        lambda_prime: protocol.decoy(),
        signal,
        bounds,
        rate: gllp_rate(&signal, &bounds, consts),
    })
}

/// Grid and tolerance of [`max_secure_distance`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceSearch {
    pub max_km: f64,
    pub coarse_step_km: f64,
    pub tolerance_km: f64,
}

impl Default for DistanceSearch {
    fn default() -> Self {
        DistanceSearch {
            max_km: 100.0,
            coarse_step_km: 1.0,
            tolerance_km: 0.01,
        }
    }
}

/// Largest distance with a positive rate. The scan must see exactly one
/// secure-to-insecure transition.
pub fn max_secure_distance(
    protocol: &DecoyProtocol,
    params: &ChannelParams,
    consts: &ProtocolConstants,
    model: &ObservationModel,
    search: &DistanceSearch,
) -> Result<f64> {
    if !(search.coarse_step_km > 0.0 && search.tolerance_km > 0.0 && search.max_km > 0.0) {
        return Err(Error::param(
            "search",
            "step, tolerance and range must be positive",
        ));
    }
    let secure_at = |l: f64| -> Result<bool> {
        Ok(
            evaluate_point(protocol, &params.with_length(l)?, consts, model)?
                .rate
                .is_secure(),
        )
    };
    if !secure_at(0.0)? {
        return Err(Error::NoSecureDistance);
    }
    let steps = (search.max_km / search.coarse_step_km).ceil() as usize;
    let grid: Vec<f64> = (0..=steps)
        .map(|i| (i as f64 * search.coarse_step_km).min(search.max_km))
        .collect();
    let secure: Vec<bool> = grid
        .par_iter()
        .map(|&l| secure_at(l))
        .collect::<Result<_>>()?;
    let changes: Vec<usize> = (1..secure.len())
        .filter(|&i| secure[i] != secure[i - 1])
        .collect();
    match changes.as_slice() {
        [] => Err(Error::param(
            "search_max_km",
            format!("rate still positive at {} km", search.max_km),
        )),
        [i] => {
            let (mut lo, mut hi) = (grid[i - 1], grid[*i]);
            while hi - lo > search.tolerance_km {
                let mid = 0.5 * (lo + hi);
                if secure_at(mid)? {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(lo)
        }
        many => Err(Error::MultipleRoots(many.len())),
    }
}

/// Distance beyond which `P₁(λ) η² < s·P₂(λ)`: Eve can replace every
/// single-pair event with a successful attack on multi-pair events.
/// Returns `+inf` when `s = 0` and `0` when the inequality fails at `L = 0`.
pub fn pns_limit_distance(
    lambda: PairIntensity,
    k_db_per_km: f64,
    attack_success: f64,
) -> Result<f64> {
    let l = lambda.value();
    if l <= 0.0 {
        return Err(Error::param("lambda", "must be positive"));
    }
    if !(k_db_per_km > 0.0 && k_db_per_km.is_finite()) {
        return Err(Error::param(
            "k_db_per_km",
            format!("must be positive, got {k_db_per_km}"),
        ));
    }
    if !(0.0..=1.0).contains(&attack_success) {
        return Err(Error::param(
            "attack_success",
            format!("must lie in [0, 1], got {attack_success}"),
        ));
    }
    if attack_success == 0.0 {
        return Ok(f64::INFINITY);
    }
    let ratio = attack_success * lambda.probability(2) / lambda.probability(1);
    if ratio >= 1.0 {
        return Ok(0.0);
    }
    Ok(-5.0 * ratio.log10() / k_db_per_km)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Optimum {
    pub lambda: f64,
    pub lambda_prime: f64,
    pub point: KeyRatePoint,
}

/// Exhaustive search over `(λ, λ′)` pairs at fixed distance. Pairs the
/// protocol rejects are skipped; ties go to the smaller `λ`, then `λ′`.
pub fn optimize_intensities(
    kind: ProtocolKind,
    params: &ChannelParams,
    consts: &ProtocolConstants,
    model: &ObservationModel,
    grid: &[(f64, f64)],
) -> Result<Optimum> {
    let mut feasible: Vec<(f64, f64, DecoyProtocol)> = grid
        .iter()
        .filter_map(|&(l, lp)| kind.with_intensities(l, lp).ok().map(|p| (l, lp, p)))
        .collect();
    if feasible.is_empty() {
        return Err(Error::EmptyGrid);
    }
    feasible.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let points: Vec<KeyRatePoint> = feasible
        .par_iter()
        .map(|(_, _, p)| evaluate_point(p, params, consts, model))
        .collect::<Result<_>>()?;
    let mut best: Option<usize> = None;
    for (i, pt) in points.iter().enumerate() {
        if pt.rate.is_secure() && best.is_none_or(|b| pt.r_lower() > points[b].r_lower()) {
            best = Some(i);
        }
    }
    let i = best.ok_or(Error::NoSecureRate)?;
    Ok(Optimum {
        lambda: feasible[i].0,
        lambda_prime: feasible[i].1,
        point: points[i],
    })
}
