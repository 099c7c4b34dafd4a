use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("pair intensity {lambda} needs more than {cap} photon-number terms to reach tail bound {tail_bound}")]
    TruncationCap {
        lambda: f64,
        tail_bound: f64,
        cap: usize,
    },

    #[error("state has photons on modes outside the operation's domain: {0}")]
    ModeDomain(String),

    #[error("isometry `{isometry}` does not cover pattern {pattern}")]
    UncoveredPattern { isometry: String, pattern: String },

    #[error("isometry `{isometry}` is not inner-product preserving (max deviation {deviation:e})")]
    NotAnIsometry { isometry: String, deviation: f64 },

    #[error("ancilla already attached ({0}); project it before applying another isometry")]
    AncillaInUse(String),

    #[error("observed statistics out of range (Q = {q}, E = {e}) at lambda = {lambda}")]
    PathologicalObservation { lambda: f64, q: f64, e: f64 },

    #[error("signal and decoy intensities are degenerate (denominator {denominator:e})")]
    DegenerateIntensities { denominator: f64 },

    #[error("single-pair bound unavailable: S1 lower bound is {s1_lower}")]
    BoundUnavailable { s1_lower: f64 },

    #[error("no positive key rate at zero distance")]
    NoSecureDistance,

    #[error("key rate changes sign {0} times over the scan window")]
    MultipleRoots(usize),

    #[error("no grid point yields a positive key rate")]
    NoSecureRate,

    #[error("empty intensity grid (no pair with lambda > lambda')")]
    EmptyGrid,
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
