//! Isometries acting on a declared subset of modes plus Eve's ancilla.
//!
//! An [`Isometry`] is stored as the images of the occupation patterns of its
//! declared modes, each image a superposition of output patterns (or the
//! sink vector) tagged with an ancilla label. The input ancilla is always a
//! fresh `E0`; a state must not carry an attached ancilla when one is
//! applied.

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::fock::{Ancilla, BasisKey, FockState, ModeLabel, Projected};
use crate::error::{Error, Result};

const ISOMETRY_TOLERANCE: f64 = 1e-12;

/// Occupation numbers on an isometry's declared modes, in declaration order.
pub type SubPattern = Vec<u8>;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IsoTarget {
    Pattern(SubPattern),
    Sink,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsoOutput {
    pub target: IsoTarget,
    pub ancilla: Ancilla,
    pub amplitude: Complex64,
}

impl IsoOutput {
    pub fn new(target: IsoTarget, ancilla: Ancilla, amplitude: Complex64) -> Self {
        IsoOutput {
            target,
            ancilla,
            amplitude,
        }
    }
}

/// A rule stated on a superposition of input patterns.
#[derive(Debug, Clone)]
pub struct SuperpositionRule {
    pub input: Vec<(SubPattern, Complex64)>,
    pub outputs: Vec<IsoOutput>,
}

#[derive(Debug, Clone)]
pub struct Isometry {
    name: String,
    modes: Vec<ModeLabel>,
    rules: BTreeMap<SubPattern, Vec<IsoOutput>>,
}

impl Isometry {
    /// Builds from basis-pattern images and checks inner-product preservation.
    pub fn new(
        name: impl Into<String>,
        modes: Vec<ModeLabel>,
        rules: impl IntoIterator<Item = (SubPattern, Vec<IsoOutput>)>,
    ) -> Result<Self> {
        let name = name.into();
        let mut map = BTreeMap::new();
        for (pattern, outputs) in rules {
            if pattern.len() != modes.len() {
                return Err(Error::param(
                    "isometry rule",
                    format!(
                        "pattern {pattern:?} does not match {} declared modes",
                        modes.len()
                    ),
                ));
            }
            for out in &outputs {
                if let IsoTarget::Pattern(p) = &out.target {
                    if p.len() != modes.len() {
                        return Err(Error::param(
                            "isometry rule",
                            format!("output pattern {p:?} does not match the declared modes"),
                        ));
                    }
                }
            }
            if map.insert(pattern.clone(), outputs).is_some() {
                return Err(Error::param(
                    "isometry rule",
                    format!("pattern {pattern:?} defined twice"),
                ));
            }
        }
        let iso = Isometry {
            name,
            modes,
            rules: map,
        };
        let deviation = iso.max_inner_product_deviation();
        if deviation > ISOMETRY_TOLERANCE {
            return Err(Error::NotAnIsometry {
                isometry: iso.name,
                deviation,
            });
        }
        Ok(iso)
    }

    /// Builds from rules stated on an orthonormal family of input vectors.
    ///
    /// The family must span every pattern it touches; the image of pattern
    /// `p` is then `Σ_j ⟨v_j|p⟩ U|v_j⟩`.
    pub fn from_superposition_rules(
        name: impl Into<String>,
        modes: Vec<ModeLabel>,
        rules: Vec<SuperpositionRule>,
    ) -> Result<Self> {
        let name = name.into();
        let vectors: Vec<BTreeMap<SubPattern, Complex64>> = rules
            .iter()
            .map(|r| {
                let mut v: BTreeMap<SubPattern, Complex64> = BTreeMap::new();
                for (p, c) in &r.input {
                    *v.entry(p.clone()).or_default() += c;
                }
                v
            })
            .collect();

        for (i, vi) in vectors.iter().enumerate() {
            for (j, vj) in vectors.iter().enumerate() {
                let g: Complex64 = vi
                    .iter()
                    .filter_map(|(p, a)| vj.get(p).map(|b| a.conj() * b))
                    .sum();
                let want = if i == j { 1.0 } else { 0.0 };
                if (g - want).norm() > ISOMETRY_TOLERANCE {
                    return Err(Error::param(
                        "isometry rule",
                        format!("{name}: input vectors {i} and {j} are not orthonormal"),
                    ));
                }
            }
        }

        let patterns: Vec<SubPattern> = {
            let mut ps: Vec<SubPattern> = vectors.iter().flat_map(|v| v.keys().cloned()).collect();
            ps.sort();
            ps.dedup();
            ps
        };

        let mut basis_rules = Vec::with_capacity(patterns.len());
        for p in patterns {
            let weight: f64 = vectors
                .iter()
                .map(|v| v.get(&p).map_or(0.0, |c| c.norm_sqr()))
                .sum();
            if (weight - 1.0).abs() > ISOMETRY_TOLERANCE {
                return Err(Error::param(
                    "isometry rule",
                    format!("{name}: inputs do not span pattern {p:?} (weight {weight})"),
                ));
            }
            let mut acc: BTreeMap<(IsoTarget, Ancilla), Complex64> = BTreeMap::new();
            for (v, rule) in vectors.iter().zip(&rules) {
                // ⟨v|p⟩ = conj(v[p])
                let Some(c) = v.get(&p) else { continue };
                for out in &rule.outputs {
                    *acc.entry((out.target.clone(), out.ancilla)).or_default() +=
                        c.conj() * out.amplitude;
                }
            }
            let outputs = acc
                .into_iter()
                .filter(|(_, a)| a.norm() >= super::fock::PRUNE_EPSILON)
                .map(|((target, ancilla), amplitude)| IsoOutput::new(target, ancilla, amplitude))
                .collect();
            basis_rules.push((p, outputs));
        }
        Isometry::new(name, modes, basis_rules)
    }

    /// Maps every listed pattern to itself, tagging the ancilla `label`.
    pub fn identity(
        name: impl Into<String>,
        modes: Vec<ModeLabel>,
        patterns: impl IntoIterator<Item = SubPattern>,
        label: Ancilla,
    ) -> Result<Self> {
        let rules = patterns.into_iter().map(|p| {
            let out = IsoOutput::new(
                IsoTarget::Pattern(p.clone()),
                label,
                Complex64::new(1.0, 0.0),
            );
            (p, vec![out])
        });
        Isometry::new(name, modes, rules)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn modes(&self) -> &[ModeLabel] {
        &self.modes
    }

    pub fn domain(&self) -> impl Iterator<Item = &SubPattern> {
        self.rules.keys()
    }

    pub fn image(&self, pattern: &[u8]) -> Option<&[IsoOutput]> {
        self.rules.get(pattern).map(Vec::as_slice)
    }

    /// Largest `|⟨U p|U p'⟩ − δ_{pp'}|` over all domain pairs.
    pub fn max_inner_product_deviation(&self) -> f64 {
        let images: Vec<BTreeMap<(IsoTarget, Ancilla), Complex64>> = self
            .rules
            .values()
            .map(|outs| {
                let mut m: BTreeMap<(IsoTarget, Ancilla), Complex64> = BTreeMap::new();
                for o in outs {
                    *m.entry((o.target.clone(), o.ancilla)).or_default() += o.amplitude;
                }
                m
            })
            .collect();
        let mut worst: f64 = 0.0;
        for (i, a) in images.iter().enumerate() {
            for (j, b) in images.iter().enumerate().skip(i) {
                let g: Complex64 = a
                    .iter()
                    .filter_map(|(k, x)| b.get(k).map(|y| x.conj() * y))
                    .sum();
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - want).norm());
            }
        }
        worst
    }

    fn sub_pattern(&self, key: &BasisKey) -> SubPattern {
        self.modes
            .iter()
            .map(|m| key.occupation.count(*m))
            .collect()
    }

    fn describe(&self, pattern: &[u8]) -> String {
        let parts: Vec<String> = self
            .modes
            .iter()
            .zip(pattern)
            .map(|(m, n)| format!("{m}:{n}"))
            .collect();
        format!("[{}]", parts.join(" "))
    }
}

/// Applies `iso` with a fresh `E0` ancilla; output terms carry the ancilla
/// labels of the images.
pub fn apply_isometry(state: &FockState, iso: &Isometry) -> Result<FockState> {
    let mut out = Vec::new();
    for (key, amp) in state.terms() {
        if key.ancilla != Ancilla::None {
            return Err(Error::AncillaInUse(key.ancilla.to_string()));
        }
        if key.occupation.is_sink() {
            return Err(Error::UncoveredPattern {
                isometry: iso.name.clone(),
                pattern: "<sink>".to_string(),
            });
        }
        let pattern = iso.sub_pattern(key);
        let image = iso.image(&pattern).ok_or_else(|| Error::UncoveredPattern {
            isometry: iso.name.clone(),
            pattern: iso.describe(&pattern),
        })?;
        for o in image {
            let mut occ = key.occupation;
            match &o.target {
                IsoTarget::Pattern(p) => {
                    for (m, n) in iso.modes.iter().zip(p) {
                        occ.set_count(*m, *n);
                    }
                }
                IsoTarget::Sink => {
                    for m in &iso.modes {
                        occ.set_count(*m, 0);
                    }
                    occ.mark_sink();
                }
            }
            out.push((
                BasisKey {
                    occupation: occ,
                    ancilla: o.ancilla,
                },
                amp * o.amplitude,
            ));
        }
    }
    Ok(FockState::from_terms(out))
}

/// Projects the ancilla onto `keep` and detaches it.
pub fn project_ancilla(state: &FockState, keep: Ancilla) -> Projected {
    let kept = FockState::from_terms(
        state
            .terms()
            .filter(|(k, _)| k.ancilla == keep)
            .map(|(k, a)| (BasisKey::photonic(k.occupation), *a)),
    );
    Projected::from_kept(kept, state.norm_sqr())
}

pub fn apply_isometry_and_project(
    state: &FockState,
    iso: &Isometry,
    keep: Ancilla,
) -> Result<Projected> {
    let mapped = apply_isometry(state, iso)?;
    Ok(project_ancilla(&mapped, keep))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::fock::Spatial;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn two_modes() -> Vec<ModeLabel> {
        vec![ModeLabel::h(Spatial::A1), ModeLabel::v(Spatial::A1)]
    }

    #[test]
    fn identity_with_e2_is_transparent() {
        let modes = two_modes();
        let iso =
            Isometry::identity("id", modes.clone(), [vec![1, 0], vec![0, 1]], Ancilla::E2).unwrap();
        let h = FockState::vacuum().create(modes[0]);
        let v = FockState::vacuum().create(modes[1]);
        let s = FockState::superpose([(c(0.6, 0.0), &h), (c(0.0, 0.8), &v)]);
        let p = apply_isometry_and_project(&s, &iso, Ancilla::E2).unwrap();
        assert!((p.probability - 1.0).abs() < 1e-15);
        assert_eq!(p.state.unwrap(), s);
    }

    #[test]
    fn projection_onto_absent_label_is_empty() {
        let modes = two_modes();
        let iso = Isometry::identity("id", modes.clone(), [vec![1, 0]], Ancilla::E2).unwrap();
        let h = FockState::vacuum().create(modes[0]);
        let p = apply_isometry_and_project(&h, &iso, Ancilla::E1).unwrap();
        assert!(p.is_empty());
        assert_eq!(p.probability, 0.0);
    }

    #[test]
    fn uncovered_pattern_is_named() {
        let modes = two_modes();
        let iso = Isometry::identity("only-h", modes.clone(), [vec![1, 0]], Ancilla::E2).unwrap();
        let v = FockState::vacuum().create(modes[1]);
        match apply_isometry(&v, &iso) {
            Err(Error::UncoveredPattern { isometry, pattern }) => {
                assert_eq!(isometry, "only-h");
                assert_eq!(pattern, "[H_a1:0 V_a1:1]");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn attached_ancilla_is_rejected() {
        let modes = two_modes();
        let iso = Isometry::identity("id", modes.clone(), [vec![1, 0]], Ancilla::E2).unwrap();
        let h = FockState::vacuum().create(modes[0]);
        let attached = apply_isometry(&h, &iso).unwrap();
        assert!(matches!(
            apply_isometry(&attached, &iso),
            Err(Error::AncillaInUse(_))
        ));
    }

    #[test]
    fn non_isometric_rules_are_rejected() {
        let modes = two_modes();
        let same = IsoOutput::new(IsoTarget::Pattern(vec![1, 0]), Ancilla::E1, c(1.0, 0.0));
        let err = Isometry::new(
            "collapse",
            modes,
            [(vec![1, 0], vec![same.clone()]), (vec![0, 1], vec![same])],
        )
        .unwrap_err();
        assert!(matches!(err, Error::NotAnIsometry { .. }));
    }

    #[test]
    fn superposition_rules_expand_to_basis_images() {
        // Hadamard-like rule on (|H⟩ ± |V⟩)/√2 mapped to |H⟩, |V⟩.
        let modes = two_modes();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let rules = vec![
            SuperpositionRule {
                input: vec![(vec![1, 0], c(r, 0.0)), (vec![0, 1], c(r, 0.0))],
                outputs: vec![IsoOutput::new(
                    IsoTarget::Pattern(vec![1, 0]),
                    Ancilla::E1,
                    c(1.0, 0.0),
                )],
            },
            SuperpositionRule {
                input: vec![(vec![1, 0], c(r, 0.0)), (vec![0, 1], c(-r, 0.0))],
                outputs: vec![IsoOutput::new(
                    IsoTarget::Pattern(vec![0, 1]),
                    Ancilla::E1,
                    c(1.0, 0.0),
                )],
            },
        ];
        let iso = Isometry::from_superposition_rules("had", modes, rules).unwrap();
        let img_v = iso.image(&[0, 1]).unwrap();
        assert_eq!(img_v.len(), 2);
        let amp = |t: &[u8]| {
            img_v
                .iter()
                .find(|o| o.target == IsoTarget::Pattern(t.to_vec()))
                .unwrap()
                .amplitude
        };
        assert!((amp(&[1, 0]) - c(r, 0.0)).norm() < 1e-15);
        assert!((amp(&[0, 1]) - c(-r, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn superposition_rules_must_span_their_patterns() {
        let modes = two_modes();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let rules = vec![SuperpositionRule {
            input: vec![(vec![1, 0], c(r, 0.0)), (vec![0, 1], c(r, 0.0))],
            outputs: vec![IsoOutput::new(
                IsoTarget::Pattern(vec![1, 0]),
                Ancilla::E1,
                c(1.0, 0.0),
            )],
        }];
        assert!(Isometry::from_superposition_rules("half", modes, rules).is_err());
    }

    #[test]
    fn sink_output_replaces_declared_modes() {
        let modes = two_modes();
        let iso = Isometry::new(
            "dump",
            modes.clone(),
            [(
                vec![1, 0],
                vec![IsoOutput::new(IsoTarget::Sink, Ancilla::E3, c(1.0, 0.0))],
            )],
        )
        .unwrap();
        let other = ModeLabel::h(Spatial::B1);
        let s = FockState::vacuum().create(modes[0]).create(other);
        let out = apply_isometry(&s, &iso).unwrap();
        let (key, _) = out.terms().next().unwrap();
        assert!(key.occupation.is_sink());
        assert_eq!(key.occupation.count(modes[0]), 0);
        assert_eq!(key.occupation.count(other), 1);
        assert_eq!(key.ancilla, Ancilla::E3);
    }
}
