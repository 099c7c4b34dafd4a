//! Decoy bounds against the true single-pair yield and error rate of the
//! detector model.

use dfs_decoy::bounds::{
    e1_upper_three, e1_upper_two, estimate, s1_lower_none, s1_lower_three, s1_lower_two,
    DecoyProtocol, ProtocolObservations,
};
use dfs_decoy::channel::{
    error_yield_n, yield_n, ChannelParams, Eq20Variant, ObservationModel, ObservedStatistics,
};
use dfs_decoy::source::{build_distribution, PairIntensity};

const LAMBDAS: [f64; 3] = [0.05, 0.1, 0.2];
const DECOYS: [f64; 3] = [0.005, 0.01, 0.05];
const LENGTHS: [f64; 5] = [0.0, 10.0, 20.0, 30.0, 40.0];
const DARKS: [f64; 2] = [1e-6, 1e-5];

fn lam(x: f64) -> PairIntensity {
    PairIntensity::new(x).unwrap()
}

fn grid() -> impl Iterator<Item = (f64, f64, ChannelParams)> {
    LAMBDAS.into_iter().flat_map(|l| {
        DECOYS
            .into_iter()
            .filter(move |lp| l > *lp)
            .flat_map(move |lp| {
                LENGTHS.into_iter().flat_map(move |len| {
                    DARKS
                        .into_iter()
                        .map(move |d| (l, lp, ChannelParams::new(0.2, len, d).unwrap()))
                })
            })
    })
}

#[test]
fn bounds_never_exceed_the_truth() {
    let model = ObservationModel::default();
    let mut checked = 0;
    for (l, lp, params) in grid() {
        let s1 = yield_n(&params, 1);
        let e1 = error_yield_n(&params, 1, Eq20Variant::SquaredDark) / s1;
        let signal = model.observe(lam(l), &params).unwrap();
        let decoy = model.observe(lam(lp), &params).unwrap();
        let s0 = model.observe(PairIntensity::VACUUM, &params).unwrap().q();
        let obs = ProtocolObservations {
            signal,
            decoy: Some(decoy),
            vacuum_yield: Some(s0),
        };
        let protocols = [
            DecoyProtocol::three_intensity(l, lp).unwrap(),
            DecoyProtocol::two_intensity(l, lp).unwrap(),
            DecoyProtocol::no_decoy(l).unwrap(),
        ];
        for p in protocols {
            let b = estimate(&p, &obs).unwrap();
            let ctx = format!(
                "{} l={l} lp={lp} L={} D={}",
                p.name(),
                params.length_km(),
                params.dark_count()
            );
            assert!(
                b.s1_lower.value <= s1 + 1e-12,
                "S1L {} > S1 {s1} ({ctx})",
                b.s1_lower.value
            );
            assert!(
                b.e1_upper.value >= e1 - 1e-12,
                "e1U {} < e1 {e1} ({ctx})",
                b.e1_upper.value
            );
            checked += 1;
        }
        let three = s1_lower_three(&signal, &decoy, s0).unwrap();
        assert!(three.value >= s1_lower_none(&signal).value);
    }
    // 8 feasible (λ, λ′) pairs × 5 lengths × 2 dark rates × 3 protocols
    assert_eq!(checked, 240);
}

#[test]
fn three_intensity_bound_is_tight_at_small_decoy() {
    // With λ′ → 0 the multi-pair correction vanishes and S₁ᴸ approaches S₁.
    let params = ChannelParams::new(0.2, 10.0, 1e-6).unwrap();
    let model = ObservationModel::default();
    let s1 = yield_n(&params, 1);
    let sig = model.observe(lam(0.1), &params).unwrap();
    let s0 = model.observe(PairIntensity::VACUUM, &params).unwrap().q();
    let gap = |lp: f64| {
        let dec = model.observe(lam(lp), &params).unwrap();
        s1 - s1_lower_three(&sig, &dec, s0).unwrap().value
    };
    assert!(gap(0.001) < gap(0.01));
    assert!(gap(0.01) < gap(0.05));
    assert!(gap(0.001) / s1 < 0.05);
}

/// Observations of a channel that only ever counts vacuum and single pairs.
fn zero_one_channel(l: f64, s0: f64, s1: f64, e1: f64) -> ObservedStatistics {
    let p = lam(l);
    let q = p.probability(0) * s0 + p.probability(1) * s1;
    let eq = p.probability(0) * s0 / 2.0 + p.probability(1) * s1 * e1;
    ObservedStatistics::from_rates(p, q, eq).unwrap()
}

#[test]
fn zero_one_pair_channels_are_recovered_exactly() {
    for &(s0, s1, e1) in &[
        (0.0, 0.3, 0.0),
        (1e-5, 0.5, 0.02),
        (4e-12, 1.0, 0.1),
        (1e-3, 0.01, 0.25),
    ] {
        for &(l, lp) in &[(0.1, 0.01), (0.2, 0.05), (0.5, 0.1)] {
            let sig = zero_one_channel(l, s0, s1, e1);
            let dec = zero_one_channel(lp, s0, s1, e1);
            let b = s1_lower_three(&sig, &dec, s0).unwrap();
            assert!((b.value - s1).abs() <= 1e-10, "S1 {s1} got {}", b.value);
            let e = e1_upper_three(&sig, s0, b.value).unwrap();
            assert!((e.value - e1).abs() <= 1e-10, "e1 {e1} got {}", e.value);
            if s0 == 0.0 {
                let b2 = s1_lower_two(&sig, &dec).unwrap();
                assert!((b2.value - s1).abs() <= 1e-10);
                let e2 = e1_upper_two(&sig, b2.value).unwrap();
                assert!((e2.value - e1).abs() <= 1e-10);
            }
        }
    }
}

#[test]
fn multi_pair_contribution_scales_with_p2_ratio() {
    // Σ_{n≥2} P_n(λ) S_n ≥ P₂(λ)/P₂(λ′) · Σ_{n≥2} P_n(λ′) S_n
    for (l, lp, params) in grid() {
        let multi = |x: f64| {
            let dist = build_distribution(lam(x), 1e-15).unwrap();
            dist.probabilities()
                .iter()
                .enumerate()
                .skip(2)
                .map(|(n, p)| p * yield_n(&params, n))
                .sum::<f64>()
        };
        let ratio = lam(l).probability(2) / lam(lp).probability(2);
        assert!(multi(l) >= ratio * multi(lp) * (1.0 - 1e-12));
    }
}
