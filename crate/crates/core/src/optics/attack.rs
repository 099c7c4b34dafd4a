//! Photon-number-splitting attack on two-pair emissions of a DFS-encoded
//! PDC source.
//!
//! The attack chain is: split modes `a` and `b` on 50/50 beam splitters,
//! post-select one photon in each of `a1`, `a2`, `b1`, `b2`, then apply two
//! ancilla-assisted isometries with projections. When every stage succeeds
//! the four photons factor into a pair on `(a1, b2)` and a pair on
//! `(a2, b1)`, each carrying Alice's code.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::Matrix4;
use num_complex::Complex64;

use super::fock::{Ancilla, BasisKey, FockState, ModeLabel, Polarization, Projected, Spatial};
use super::isometry::{
    apply_isometry_and_project, IsoOutput, IsoTarget, Isometry, SubPattern, SuperpositionRule,
};
use crate::error::{Error, Result};

/// Alice's four encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Code {
    Minus,
    Plus,
    Zero,
    One,
}

impl Code {
    pub const ALL: [Code; 4] = [Code::Minus, Code::Plus, Code::Zero, Code::One];

    pub fn name(self) -> &'static str {
        match self {
            Code::Minus => "minus",
            Code::Plus => "plus",
            Code::Zero => "zero",
            Code::One => "one",
        }
    }

    /// Relative phase between the `HV` and `VH` components of one pair.
    pub fn pair_phase(self) -> Complex64 {
        match self {
            Code::Minus => c(-1.0, 0.0),
            Code::Plus => c(1.0, 0.0),
            Code::Zero => c(0.0, 1.0),
            Code::One => c(0.0, -1.0),
        }
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

const HA: ModeLabel = ModeLabel::h(Spatial::A);
const VA: ModeLabel = ModeLabel::v(Spatial::A);
const HB: ModeLabel = ModeLabel::h(Spatial::B);
const VB: ModeLabel = ModeLabel::v(Spatial::B);

const SPLIT: [Spatial; 4] = [Spatial::A1, Spatial::B1, Spatial::A2, Spatial::B2];

/// Two-pair state of modes `a`, `b` for `code`:
///
/// ```text
/// (1/2√3) (H_a†² V_b†² + 2s H_a† V_a† H_b† V_b† + t V_a†² H_b†²) |vac⟩
/// ```
///
/// with `(s, t)` = `(−1, 1)`, `(1, 1)`, `(i, −1)`, `(−i, −1)` for minus, plus,
/// zero, one.
pub fn encoded_pair_state(code: Code) -> FockState {
    let s = code.pair_phase();
    let t = if matches!(code, Code::Minus | Code::Plus) {
        c(1.0, 0.0)
    } else {
        c(-1.0, 0.0)
    };
    let vac = FockState::vacuum();
    let hh_vv = vac.create_all(&[HA, HA, VB, VB]);
    let hv_hv = vac.create_all(&[HA, VA, HB, VB]);
    let vv_hh = vac.create_all(&[VA, VA, HB, HB]);
    let norm = 1.0 / (2.0 * 3f64.sqrt());
    FockState::superpose([
        (c(norm, 0.0), &hh_vv),
        (2.0 * s * norm, &hv_hv),
        (t * norm, &vv_hh),
    ])
}

/// Replaces each creation operator on the listed modes by a linear
/// combination of creation operators on other modes.
fn substitute_modes(
    state: &FockState,
    substitutions: &[(ModeLabel, [(ModeLabel, Complex64); 2])],
) -> FockState {
    let mut parts = Vec::new();
    for (key, amp) in state.terms() {
        let mut base = key.occupation;
        for (m, _) in substitutions {
            base.set_count(*m, 0);
        }
        let mut acc = FockState::basis(BasisKey {
            occupation: base,
            ancilla: key.ancilla,
        });
        for (m, combo) in substitutions {
            let k = key.occupation.count(*m);
            for _ in 0..k {
                let l = acc.create(combo[0].0);
                let r = acc.create(combo[1].0);
                acc = FockState::superpose([(combo[0].1, &l), (combo[1].1, &r)]);
            }
            // |k⟩ = a†ᵏ/√k! |0⟩
            let fact: f64 = (1..=k as u32).map(f64::from).product();
            acc = acc.scaled(c(1.0 / fact.sqrt(), 0.0));
        }
        parts.push(acc.scaled(*amp));
    }
    parts
        .iter()
        .fold(FockState::zero(), |total, p| total.plus(p))
}

/// 50/50 splitting of both `a` and `b`: `X_a† → (X_{a1}† − X_{a2}†)/√2` and
/// likewise for `b`, for both polarisations.
pub fn apply_beamsplitter(state: &FockState) -> Result<FockState> {
    for (key, _) in state.terms() {
        if key.occupation.is_sink() || SPLIT.iter().any(|s| key.occupation.photons_in(*s) > 0) {
            return Err(Error::ModeDomain(format!(
                "beam splitter input already populates split modes ({})",
                key.occupation
            )));
        }
    }
    let r = c(FRAC_1_SQRT_2, 0.0);
    let subs = [
        (Spatial::A, Spatial::A1, Spatial::A2),
        (Spatial::B, Spatial::B1, Spatial::B2),
    ]
    .into_iter()
    .flat_map(|(src, out1, out2)| {
        [Polarization::H, Polarization::V]
            .into_iter()
            .map(move |p| {
                (
                    ModeLabel::new(src, p),
                    [(ModeLabel::new(out1, p), r), (ModeLabel::new(out2, p), -r)],
                )
            })
    })
    .collect::<Vec<_>>();
    Ok(substitute_modes(state, &subs))
}

/// Keeps the component with exactly one photon (either polarisation) in
/// each of `a1`, `a2`, `b1`, `b2`.
pub fn postselect_one_per_mode(state: &FockState) -> Result<Projected> {
    for (key, _) in state.terms() {
        if key.occupation.photons_in(Spatial::A) > 0 || key.occupation.photons_in(Spatial::B) > 0 {
            return Err(Error::ModeDomain(format!(
                "post-selection expects split modes only ({})",
                key.occupation
            )));
        }
    }
    let kept = FockState::from_terms(
        state
            .terms()
            .filter(|(k, _)| {
                !k.occupation.is_sink() && SPLIT.iter().all(|s| k.occupation.photons_in(*s) == 1)
            })
            .map(|(k, a)| (*k, *a)),
    );
    Ok(Projected::from_kept(kept, state.norm_sqr()))
}

fn u1_modes() -> Vec<ModeLabel> {
    vec![
        ModeLabel::h(Spatial::A1),
        ModeLabel::v(Spatial::A1),
        ModeLabel::h(Spatial::B2),
        ModeLabel::v(Spatial::B2),
    ]
}

/// First isometry, on the photons in `a1` and `b2`: opposite polarisations
/// (`HV`, `VH`) tag `E1`, equal polarisations (`HH`, `VV`) tag `E2`.
pub fn eve_u1() -> Isometry {
    let rule = |a1: Polarization, b2: Polarization, anc: Ancilla| {
        let mut p = vec![0u8; 4];
        p[a1 as usize] = 1;
        p[2 + b2 as usize] = 1;
        (
            p.clone(),
            vec![IsoOutput::new(IsoTarget::Pattern(p), anc, c(1.0, 0.0))],
        )
    };
    use Polarization::{H, V};
    Isometry::new(
        "U1",
        u1_modes(),
        [
            rule(H, V, Ancilla::E1),
            rule(V, H, Ancilla::E1),
            rule(H, H, Ancilla::E2),
            rule(V, V, Ancilla::E2),
        ],
    )
    .expect("U1 maps basis patterns to orthonormal outputs")
}

/// Declared modes of [`eve_u2`]: `a1`, `b1`, `a2`, `b2`, each as `(H, V)`.
pub fn u2_modes() -> Vec<ModeLabel> {
    SPLIT
        .iter()
        .flat_map(|s| [ModeLabel::h(*s), ModeLabel::v(*s)])
        .collect()
}

/// One-photon-per-mode pattern over `(a1, b1, a2, b2)`, written as a
/// polarisation string such as `"HVHV"`.
pub fn four_mode_pattern(pols: &str) -> SubPattern {
    assert_eq!(pols.len(), 4, "need one polarisation per split mode");
    let mut p = vec![0u8; 8];
    for (i, ch) in pols.chars().enumerate() {
        let offset = match ch {
            'H' => 0,
            'V' => 1,
            _ => panic!("polarisation must be H or V, got {ch}"),
        };
        p[2 * i + offset] = 1;
    }
    p
}

/// The four-mode DFS vectors `X`, `X′`, `Y` and the completion `Y′`.
fn dfs_vector(first: &str, second: &str, sign: f64) -> Vec<(SubPattern, Complex64)> {
    vec![
        (four_mode_pattern(first), c(FRAC_1_SQRT_2, 0.0)),
        (four_mode_pattern(second), c(sign * FRAC_1_SQRT_2, 0.0)),
    ]
}

/// Second isometry, stated on the DFS vectors
///
/// ```text
/// X  E0 → (√3 Z E1 + X  E2)/2
/// X′ E0 → (√3 Z E3 + X′ E2)/2
/// Y  E0 → Y E2
/// Y′ E0 → Y′ E2        (completion)
/// ```
///
/// with `X = (HVHV + VHVH)/√2`, `X′ = (HVHV − VHVH)/√2`,
/// `Y = (HHVV + VVHH)/√2`, `Y′ = (HHVV − VVHH)/√2` over `(a1, b1, a2, b2)`
/// and `Z` the sink vector.
pub fn eve_u2() -> Isometry {
    let half = c(0.5, 0.0);
    let garbage = c(3f64.sqrt() / 2.0, 0.0);
    let expand = |v: &[(SubPattern, Complex64)], scale: Complex64, anc: Ancilla| {
        v.iter()
            .map(|(p, a)| IsoOutput::new(IsoTarget::Pattern(p.clone()), anc, a * scale))
            .collect::<Vec<_>>()
    };
    let x = dfs_vector("HVHV", "VHVH", 1.0);
    let x_prime = dfs_vector("HVHV", "VHVH", -1.0);
    let y = dfs_vector("HHVV", "VVHH", 1.0);
    let y_prime = dfs_vector("HHVV", "VVHH", -1.0);

    let mut x_out = vec![IsoOutput::new(IsoTarget::Sink, Ancilla::E1, garbage)];
    x_out.extend(expand(&x, half, Ancilla::E2));
    let mut xp_out = vec![IsoOutput::new(IsoTarget::Sink, Ancilla::E3, garbage)];
    xp_out.extend(expand(&x_prime, half, Ancilla::E2));

    let rules = vec![
        SuperpositionRule {
            outputs: x_out,
            input: x,
        },
        SuperpositionRule {
            outputs: xp_out,
            input: x_prime,
        },
        SuperpositionRule {
            outputs: expand(&y, c(1.0, 0.0), Ancilla::E2),
            input: y,
        },
        SuperpositionRule {
            outputs: expand(&y_prime, c(1.0, 0.0), Ancilla::E2),
            input: y_prime,
        },
    ];
    Isometry::from_superposition_rules("U2", u2_modes(), rules)
        .expect("U2 rules are stated on an orthonormal basis of their patterns")
}

/// Amplitudes of `⟨X|ψ⟩`, `⟨X′|ψ⟩`, `⟨Y|ψ⟩`, `⟨Y′|ψ⟩` for a photonic state
/// on the split modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DfsComponents {
    pub x: Complex64,
    pub x_prime: Complex64,
    pub y: Complex64,
    pub y_prime: Complex64,
}

pub fn dfs_components(state: &FockState) -> DfsComponents {
    let project = |v: Vec<(SubPattern, Complex64)>| -> Complex64 {
        let modes = u2_modes();
        let basis = FockState::from_terms(v.into_iter().map(|(p, a)| {
            let pattern: Vec<ModeLabel> = modes
                .iter()
                .zip(&p)
                .filter(|(_, n)| **n == 1)
                .map(|(m, _)| *m)
                .collect();
            (
                BasisKey::photonic(super::fock::Occupation::from_modes(&pattern)),
                a,
            )
        }));
        basis.inner(state)
    };
    DfsComponents {
        x: project(dfs_vector("HVHV", "VHVH", 1.0)),
        x_prime: project(dfs_vector("HVHV", "VHVH", -1.0)),
        y: project(dfs_vector("HHVV", "VVHH", 1.0)),
        y_prime: project(dfs_vector("HHVV", "VVHH", -1.0)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageProbabilities {
    /// Single beam splitter per mode, one photon in each output mode.
    pub postselection: f64,
    pub u1: f64,
    pub u2: f64,
}

impl StageProbabilities {
    /// Success probability given that post-selection succeeded.
    pub fn overall_conditional(&self) -> f64 {
        self.u1 * self.u2
    }
}

#[derive(Debug, Clone)]
pub struct AttackTrace {
    pub code: Code,
    pub encoded: FockState,
    pub split: FockState,
    pub postselected: FockState,
    pub after_u1: FockState,
    pub final_state: FockState,
    pub probabilities: StageProbabilities,
}

fn require(stage: &'static str, p: Projected) -> Result<(FockState, f64)> {
    match p.state {
        Some(s) => Ok((s, p.probability)),
        None => Err(Error::ModeDomain(format!("{stage} annihilated the state"))),
    }
}

pub fn run_full_attack(code: Code) -> Result<AttackTrace> {
    let encoded = encoded_pair_state(code);
    let split = apply_beamsplitter(&encoded)?;
    let (postselected, p_ps) = require("post-selection", postselect_one_per_mode(&split)?)?;
    let (after_u1, p1) = require(
        "U1/P1",
        apply_isometry_and_project(&postselected, &eve_u1(), Ancilla::E1)?,
    )?;
    let (final_state, p2) = require(
        "U2/P2",
        apply_isometry_and_project(&after_u1, &eve_u2(), Ancilla::E2)?,
    )?;
    Ok(AttackTrace {
        code,
        encoded,
        split,
        postselected,
        after_u1,
        final_state,
        probabilities: StageProbabilities {
            postselection: p_ps,
            u1: p1,
            u2: p2,
        },
    })
}

/// Amplitudes of a one-photon-per-mode pair state on two spatial modes, in
/// the order `HH, HV, VH, VV`.
pub type PairAmplitudes = [Complex64; 4];

/// `(H_x V_y + s V_x H_y)/√2` with `s` the code's pair phase.
pub fn single_pair_amplitudes(code: Code) -> PairAmplitudes {
    let r = FRAC_1_SQRT_2;
    [c(0.0, 0.0), c(r, 0.0), code.pair_phase() * r, c(0.0, 0.0)]
}

pub fn single_pair_state(code: Code, first: Spatial, second: Spatial) -> FockState {
    let amps = single_pair_amplitudes(code);
    FockState::from_terms(pair_basis(first, second).into_iter().zip(amps))
}

fn pair_basis(first: Spatial, second: Spatial) -> [BasisKey; 4] {
    use Polarization::{H, V};
    [(H, H), (H, V), (V, H), (V, V)].map(|(p, q)| {
        BasisKey::photonic(super::fock::Occupation::from_modes(&[
            ModeLabel::new(first, p),
            ModeLabel::new(second, q),
        ]))
    })
}

/// The factorised target: one pair on `(a1, b2)` and one on `(a2, b1)`,
/// both carrying `code`.
pub fn expected_final_state(code: Code) -> FockState {
    single_pair_state(code, Spatial::A1, Spatial::B2).tensor(&single_pair_state(
        code,
        Spatial::A2,
        Spatial::B1,
    ))
}

pub fn pair_fidelity(a: &PairAmplitudes, b: &PairAmplitudes) -> f64 {
    let inner: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    let na: f64 = a.iter().map(|x| x.norm_sqr()).sum();
    let nb: f64 = b.iter().map(|x| x.norm_sqr()).sum();
    inner.norm_sqr() / (na * nb)
}

/// Schmidt decomposition of a four-photon state across two spatial pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Factorization {
    /// Descending.
    pub singular_values: [f64; 4],
    /// Dominant factor on the first pair, unit norm.
    pub first: PairAmplitudes,
    /// Dominant factor on the second pair, unit norm.
    pub second: PairAmplitudes,
}

impl Factorization {
    pub fn second_singular_value(&self) -> f64 {
        self.singular_values[1]
    }
}

/// Reshapes `state` into the 4×4 matrix between the pattern bases of the two
/// pairs and takes its SVD.
pub fn pair_factorization(
    state: &FockState,
    first: (Spatial, Spatial),
    second: (Spatial, Spatial),
) -> Result<Factorization> {
    let pol_index = |occ: &super::fock::Occupation, s: Spatial| -> Option<usize> {
        match (occ.count(ModeLabel::h(s)), occ.count(ModeLabel::v(s))) {
            (1, 0) => Some(0),
            (0, 1) => Some(1),
            _ => None,
        }
    };
    let involved = [first.0, first.1, second.0, second.1];
    let mut m = Matrix4::<Complex64>::zeros();
    for (key, amp) in state.terms() {
        let occ = &key.occupation;
        let stray = Spatial::ALL
            .iter()
            .any(|s| !involved.contains(s) && occ.photons_in(*s) > 0);
        let idx = (
            pol_index(occ, first.0),
            pol_index(occ, first.1),
            pol_index(occ, second.0),
            pol_index(occ, second.1),
        );
        match idx {
            (Some(p), Some(q), Some(r), Some(s))
                if !stray && !occ.is_sink() && key.ancilla == Ancilla::None =>
            {
                m[(2 * p + q, 2 * r + s)] += amp;
            }
            _ => {
                return Err(Error::ModeDomain(format!(
                    "pattern {occ} is not one photon per mode on the two pairs"
                )))
            }
        }
    }
    let svd = m.svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^H");
    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let top = order[0];
    let singular_values = order.map(|i| svd.singular_values[i]);
    // ψ_ij = Σ σ u_i (v^H)_j
    let first_factor = [0, 1, 2, 3].map(|i| u[(i, top)]);
    let second_factor = [0, 1, 2, 3].map(|j| v_t[(top, j)]);
    Ok(Factorization {
        singular_values,
        first: first_factor,
        second: second_factor,
    })
}
