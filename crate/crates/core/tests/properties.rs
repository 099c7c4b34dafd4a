use dfs_decoy::bounds::DecoyProtocol;
use dfs_decoy::channel::{error_yield_n, yield_n, ChannelParams, Eq20Variant, ObservationModel};
use dfs_decoy::keyrate::{evaluate_point, pns_limit_distance, ProtocolConstants};
use dfs_decoy::optics::{apply_beamsplitter, FockState, ModeLabel, Spatial};
use dfs_decoy::source::{build_distribution, PairIntensity};
use num_complex::Complex64;
use proptest::prelude::*;

fn lam(x: f64) -> PairIntensity {
    PairIntensity::new(x).unwrap()
}

const INPUT_MODES: [ModeLabel; 4] = [
    ModeLabel::h(Spatial::A),
    ModeLabel::v(Spatial::A),
    ModeLabel::h(Spatial::B),
    ModeLabel::v(Spatial::B),
];

fn input_state(terms: &[(Vec<usize>, f64, f64)]) -> FockState {
    let vac = FockState::vacuum();
    terms
        .iter()
        .fold(FockState::zero(), |acc, (modes, re, im)| {
            let ops: Vec<ModeLabel> = modes.iter().map(|i| INPUT_MODES[*i]).collect();
            acc.plus(&vac.create_all(&ops).scaled(Complex64::new(*re, *im)))
        })
}

proptest! {
    #[test]
    fn beamsplitter_preserves_norm(
        terms in prop::collection::vec(
            (prop::collection::vec(0usize..4, 0..=4), -1.0f64..1.0, -1.0f64..1.0),
            1..6,
        )
    ) {
        let state = input_state(&terms);
        prop_assume!(state.norm_sqr() > 1e-6);
        let state = state.normalized().unwrap();
        let out = apply_beamsplitter(&state).unwrap();
        prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn truncated_distribution_meets_its_tail_bound(l in 1e-4f64..3.0, exp in 6i32..15) {
        let tail = 10f64.powi(-exp);
        let d = build_distribution(lam(l), tail).unwrap();
        let sum: f64 = d.probabilities().iter().sum();
        prop_assert!(sum >= 1.0 - tail - 1e-15);
        prop_assert!(d.probabilities().iter().all(|p| (0.0..=1.0).contains(p)));
    }

    #[test]
    fn mean_pair_number_is_twice_lambda(l in 1e-3f64..1.0) {
        let d = build_distribution(lam(l), 1e-15).unwrap();
        prop_assert!((d.mean() - 2.0 * l).abs() <= 1e-9 * 2.0 * l);
    }

    #[test]
    fn multi_pair_probabilities_scale_monotonically(
        a in 1e-4f64..2.0, b in 1e-4f64..2.0, n in 2usize..=50
    ) {
        prop_assume!((a - b).abs() > 1e-9);
        let (l, lp) = if a > b { (lam(a), lam(b)) } else { (lam(b), lam(a)) };
        let lhs = l.probability(2) / lp.probability(2) * lp.probability(n);
        prop_assert!(lhs <= l.probability(n) * (1.0 + 1e-12));
    }

    #[test]
    fn yields_are_ordered_probabilities(
        len in 0.0f64..200.0, d in 0.0f64..0.2, n in 0usize..30
    ) {
        let p = ChannelParams::new(0.2, len, d).unwrap();
        let s = yield_n(&p, n);
        let es = error_yield_n(&p, n, Eq20Variant::SquaredDark);
        prop_assert!(es >= 0.0);
        prop_assert!(es <= s + 1e-15);
        prop_assert!(s <= 1.0 + 1e-15);
    }

    #[test]
    fn rate_does_not_grow_with_distance(a in 0.0f64..60.0, b in 0.0f64..60.0) {
        let (near, far) = if a < b { (a, b) } else { (b, a) };
        let consts = ProtocolConstants::default();
        let model = ObservationModel::default();
        for p in [DecoyProtocol::three_intensity(0.1, 0.01).unwrap(), DecoyProtocol::no_decoy(0.1).unwrap()] {
            let r = |l: f64| evaluate_point(&p, &ChannelParams::new(0.2, l, 1e-6).unwrap(), &consts, &model)
                .unwrap()
                .r_lower();
            prop_assert!(r(far) <= r(near) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn decoys_never_lower_the_rate(len in 0.0f64..60.0) {
        let params = ChannelParams::new(0.2, len, 1e-6).unwrap();
        let consts = ProtocolConstants::default();
        let model = ObservationModel::default();
        let three = evaluate_point(&DecoyProtocol::three_intensity(0.1, 0.01).unwrap(), &params, &consts, &model).unwrap();
        let none = evaluate_point(&DecoyProtocol::no_decoy(0.1).unwrap(), &params, &consts, &model).unwrap();
        prop_assert!(three.r_lower() >= none.r_lower());
    }

    #[test]
    fn pns_limit_monotonicity(l in 0.01f64..1.0, s in 0.05f64..0.95) {
        let h = 1e-3;
        let base = pns_limit_distance(lam(l), 0.2, s).unwrap();
        prop_assert!(pns_limit_distance(lam(l), 0.2, s - h).unwrap() >= base);
        prop_assert!(pns_limit_distance(lam(l + h), 0.2, s).unwrap() <= base);
    }
}
