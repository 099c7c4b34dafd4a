//! Exact sparse Fock-state simulation of the two-pair PNS attack.

pub mod attack;
pub mod fock;
pub mod isometry;

pub use attack::{
    apply_beamsplitter, dfs_components, encoded_pair_state, eve_u1, eve_u2, expected_final_state,
    pair_factorization, pair_fidelity, postselect_one_per_mode, run_full_attack,
    single_pair_amplitudes, single_pair_state, AttackTrace, Code, DfsComponents, Factorization,
    PairAmplitudes, StageProbabilities,
};
pub use fock::{
    fidelity, Ancilla, BasisKey, FockState, ModeLabel, Occupation, Polarization, Projected, Spatial,
};
pub use isometry::{
    apply_isometry, apply_isometry_and_project, project_ancilla, IsoOutput, IsoTarget, Isometry,
    SuperpositionRule,
};
