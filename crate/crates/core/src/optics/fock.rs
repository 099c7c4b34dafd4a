//! Sparse bosonic Fock states over polarisation-labelled spatial modes, with
//! an optional ancilla register label per term.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

/// Amplitudes with magnitude below this are dropped.
pub const PRUNE_EPSILON: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Spatial {
    A,
    B,
    A1,
    A2,
    B1,
    B2,
}

impl Spatial {
    pub const ALL: [Spatial; 6] = [
        Spatial::A,
        Spatial::B,
        Spatial::A1,
        Spatial::A2,
        Spatial::B1,
        Spatial::B2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Spatial::A => "a",
            Spatial::B => "b",
            Spatial::A1 => "a1",
            Spatial::A2 => "a2",
            Spatial::B1 => "b1",
            Spatial::B2 => "b2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarization {
    H,
    V,
}

impl Polarization {
    pub fn flip(self) -> Self {
        match self {
            Polarization::H => Polarization::V,
            Polarization::V => Polarization::H,
        }
    }
}

/// One bosonic mode: a spatial path with a polarisation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeLabel {
    pub spatial: Spatial,
    pub polarization: Polarization,
}

pub const MODE_COUNT: usize = 12;

impl ModeLabel {
    pub const fn new(spatial: Spatial, polarization: Polarization) -> Self {
        ModeLabel {
            spatial,
            polarization,
        }
    }

    pub const fn h(spatial: Spatial) -> Self {
        ModeLabel::new(spatial, Polarization::H)
    }

    pub const fn v(spatial: Spatial) -> Self {
        ModeLabel::new(spatial, Polarization::V)
    }

    pub fn index(self) -> usize {
        self.spatial as usize * 2 + self.polarization as usize
    }

    pub fn all() -> impl Iterator<Item = ModeLabel> {
        Spatial::ALL.into_iter().flat_map(|s| {
            [Polarization::H, Polarization::V]
                .into_iter()
                .map(move |p| ModeLabel::new(s, p))
        })
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = match self.polarization {
            Polarization::H => 'H',
            Polarization::V => 'V',
        };
        write!(f, "{p}_{}", self.spatial.name())
    }
}

/// Occupation numbers of all modes. The `sink` flag marks a dedicated basis
/// vector orthogonal to every physical pattern, used as a garbage output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Occupation {
    counts: [u8; MODE_COUNT],
    sink: bool,
}

impl Occupation {
    pub fn vacuum() -> Self {
        Occupation {
            counts: [0; MODE_COUNT],
            sink: false,
        }
    }

    pub fn from_modes(modes: &[ModeLabel]) -> Self {
        let mut occ = Self::vacuum();
        for m in modes {
            occ.counts[m.index()] += 1;
        }
        occ
    }

    pub fn count(&self, mode: ModeLabel) -> u8 {
        self.counts[mode.index()]
    }

    pub fn set_count(&mut self, mode: ModeLabel, n: u8) {
        self.counts[mode.index()] = n;
    }

    pub fn photons_in(&self, spatial: Spatial) -> u32 {
        self.count(ModeLabel::h(spatial)) as u32 + self.count(ModeLabel::v(spatial)) as u32
    }

    pub fn total(&self) -> u32 {
        self.counts.iter().map(|&c| c as u32).sum()
    }

    pub fn is_sink(&self) -> bool {
        self.sink
    }

    pub(crate) fn mark_sink(&mut self) {
        self.sink = true;
    }
}

impl fmt::Display for Occupation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = ModeLabel::all()
            .filter(|m| self.count(*m) > 0)
            .map(|m| format!("{m}:{}", self.count(m)))
            .collect();
        if self.sink {
            parts.insert(0, "<sink>".to_string());
        }
        if parts.is_empty() {
            f.write_str("vac")
        } else {
            f.write_str(&parts.join(" "))
        }
    }
}

/// Eve's auxiliary register. `None` means no ancilla is attached, which an
/// isometry treats as a fresh register prepared in `E0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ancilla {
    None,
    E0,
    E1,
    E2,
    E3,
}

impl fmt::Display for Ancilla {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ancilla::None => "-",
            Ancilla::E0 => "E0",
            Ancilla::E1 => "E1",
            Ancilla::E2 => "E2",
            Ancilla::E3 => "E3",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisKey {
    pub occupation: Occupation,
    pub ancilla: Ancilla,
}

impl BasisKey {
    pub fn photonic(occupation: Occupation) -> Self {
        BasisKey {
            occupation,
            ancilla: Ancilla::None,
        }
    }
}

/// Sparse superposition of [`BasisKey`]s. Iteration order is the key order,
/// so anything derived from a state is deterministic.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FockState {
    terms: BTreeMap<BasisKey, Complex64>,
}

impl FockState {
    pub fn zero() -> Self {
        FockState::default()
    }

    pub fn vacuum() -> Self {
        Self::basis(BasisKey::photonic(Occupation::vacuum()))
    }

    pub fn basis(key: BasisKey) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(key, Complex64::new(1.0, 0.0));
        FockState { terms }
    }

    /// Sums amplitudes of repeated keys, then prunes.
    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (BasisKey, Complex64)>,
    {
        let mut map: BTreeMap<BasisKey, Complex64> = BTreeMap::new();
        for (k, a) in terms {
            *map.entry(k).or_default() += a;
        }
        FockState { terms: map }.pruned()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BasisKey, &Complex64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn amplitude(&self, key: &BasisKey) -> Complex64 {
        self.terms.get(key).copied().unwrap_or_default()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &FockState) -> Complex64 {
        // iterate the smaller map
        let (small, large, conj_small) = if self.len() <= other.len() {
            (self, other, true)
        } else {
            (other, self, false)
        };
        small
            .terms
            .iter()
            .filter_map(|(k, a)| large.terms.get(k).map(|b| (a, b)))
            .map(|(a, b)| {
                if conj_small {
                    a.conj() * b
                } else {
                    b.conj() * a
                }
            })
            .sum()
    }

    pub fn scaled(&self, c: Complex64) -> FockState {
        FockState::from_terms(self.terms.iter().map(|(k, a)| (*k, a * c)))
    }

    pub fn plus(&self, other: &FockState) -> FockState {
        FockState::from_terms(
            self.terms
                .iter()
                .chain(other.terms.iter())
                .map(|(k, a)| (*k, *a)),
        )
    }

    /// `Σ cᵢ |ψᵢ⟩`
    pub fn superpose<'a, I>(parts: I) -> FockState
    where
        I: IntoIterator<Item = (Complex64, &'a FockState)>,
    {
        FockState::from_terms(
            parts
                .into_iter()
                .flat_map(|(c, s)| s.terms.iter().map(move |(k, a)| (*k, a * c))),
        )
    }

    pub fn normalized(&self) -> Option<FockState> {
        let n = self.norm_sqr();
        if n <= 0.0 {
            return None;
        }
        Some(self.scaled(Complex64::new(1.0 / n.sqrt(), 0.0)))
    }

    pub fn pruned(mut self) -> FockState {
        self.terms.retain(|_, a| a.norm() >= PRUNE_EPSILON);
        self
    }

    /// Applies the creation operator `a†` of `mode`: `|k⟩ → √(k+1) |k+1⟩`.
    pub fn create(&self, mode: ModeLabel) -> FockState {
        FockState::from_terms(self.terms.iter().map(|(k, a)| {
            let mut occ = k.occupation;
            let n = occ.count(mode);
            occ.set_count(mode, n + 1);
            (
                BasisKey {
                    occupation: occ,
                    ancilla: k.ancilla,
                },
                a * ((n as f64) + 1.0).sqrt(),
            )
        }))
    }

    /// Applies `Π a†` for each listed mode, in order.
    pub fn create_all(&self, modes: &[ModeLabel]) -> FockState {
        modes.iter().fold(self.clone(), |s, m| s.create(*m))
    }

    /// Product of two states living on disjoint modes without ancillas.
    pub fn tensor(&self, other: &FockState) -> FockState {
        let mut out = Vec::with_capacity(self.len() * other.len());
        for (ka, a) in &self.terms {
            for (kb, b) in &other.terms {
                let mut occ = ka.occupation;
                for m in ModeLabel::all() {
                    occ.set_count(m, occ.count(m) + kb.occupation.count(m));
                }
                out.push((BasisKey::photonic(occ), a * b));
            }
        }
        FockState::from_terms(out)
    }

    /// Tab-separated dump: pattern, ancilla, real, imag (15 significant digits).
    pub fn to_table(&self) -> String {
        let mut s = String::from("pattern\tancilla\treal\timag\n");
        for (k, a) in &self.terms {
            s.push_str(&format!(
                "{}\t{}\t{:.14e}\t{:.14e}\n",
                k.occupation, k.ancilla, a.re, a.im
            ));
        }
        s
    }
}

/// Global-phase-insensitive overlap `|⟨a|b⟩|² / (‖a‖²‖b‖²)`.
pub fn fidelity(a: &FockState, b: &FockState) -> f64 {
    let na = a.norm_sqr();
    let nb = b.norm_sqr();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    a.inner(b).norm_sqr() / (na * nb)
}

/// Outcome of a projective post-selection. `state` is `None` when the
/// projection annihilates the input.
#[derive(Debug, Clone, PartialEq)]
pub struct Projected {
    pub state: Option<FockState>,
    pub probability: f64,
}

impl Projected {
    pub(crate) fn from_kept(kept: FockState, input_norm_sqr: f64) -> Self {
        if input_norm_sqr <= 0.0 {
            return Projected {
                state: None,
                probability: 0.0,
            };
        }
        let probability = (kept.norm_sqr() / input_norm_sqr).clamp(0.0, 1.0);
        Projected {
            state: kept.normalized(),
            probability,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.state.is_none()
    }
}
