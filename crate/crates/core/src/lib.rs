//! Security analysis for decoy-state QKD over decoherence-free subspaces with
//! a parametric down-conversion pair source.
//!
//! The crate is organised bottom-up:
//!
//! - [`source`]: photon-pair-number statistics of a phase-randomised PDC source.
//! - [`optics`]: sparse Fock-state simulator used to replay the PNS attack on
//!   two-pair emissions.
//! - [`channel`]: lossy fiber with dark counts, per-n yields and observed
//!   counting rate / QBER.
//! - [`bounds`]: decoy-state bounds on the single-pair yield and error rate.
//! - [`keyrate`]: GLLP key-rate lower bound, distance searches and intensity
//!   optimisation.
//! - [`cli`]: configuration, sweeps and reports behind the `dfs-decoy` binary.

pub mod bounds;
pub mod channel;
pub mod cli;
pub mod error;
pub mod keyrate;
pub mod optics;
pub mod source;

pub use error::{Error, Result};
