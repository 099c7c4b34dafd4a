//! End-to-end runs of the two-pair splitting attack for every code.

use std::time::Instant;

use dfs_decoy::optics::{
    dfs_components, expected_final_state, fidelity, pair_factorization, pair_fidelity,
    run_full_attack, single_pair_amplitudes, Code, Spatial,
};
use num_complex::Complex64;

const TOL: f64 = 1e-10;

#[test]
fn stage_probabilities_are_exact_fractions() {
    for code in Code::ALL {
        let p = run_full_attack(code).unwrap().probabilities;
        assert!(
            (p.postselection - 0.25).abs() <= TOL,
            "{code:?}: {}",
            p.postselection
        );
        assert!((p.u1 - 5.0 / 6.0).abs() <= TOL, "{code:?}: {}", p.u1);
        assert!((p.u2 - 0.4).abs() <= TOL, "{code:?}: {}", p.u2);
        assert!((p.overall_conditional() - 1.0 / 3.0).abs() <= TOL);
    }
}

#[test]
fn every_stage_preserves_normalisation() {
    for code in Code::ALL {
        let t = run_full_attack(code).unwrap();
        for s in [
            &t.encoded,
            &t.split,
            &t.postselected,
            &t.after_u1,
            &t.final_state,
        ] {
            assert!((s.norm_sqr() - 1.0).abs() <= TOL);
        }
    }
}

#[test]
fn final_state_is_the_two_pair_product() {
    for code in Code::ALL {
        let t = run_full_attack(code).unwrap();
        let f = fidelity(&t.final_state, &expected_final_state(code));
        assert!(f >= 1.0 - TOL, "{code:?}: fidelity {f}");
        let fact = pair_factorization(
            &t.final_state,
            (Spatial::A1, Spatial::B2),
            (Spatial::A2, Spatial::B1),
        )
        .unwrap();
        assert!(fact.second_singular_value() <= TOL);
        assert!((fact.singular_values[0] - 1.0).abs() <= TOL);
    }
}

#[test]
fn eavesdropper_holds_a_faithful_copy() {
    let eve: Vec<_> = Code::ALL
        .iter()
        .map(|&code| {
            let t = run_full_attack(code).unwrap();
            let fact = pair_factorization(
                &t.final_state,
                (Spatial::A1, Spatial::B2),
                (Spatial::A2, Spatial::B1),
            )
            .unwrap();
            let want = single_pair_amplitudes(code);
            assert!(pair_fidelity(&fact.first, &want) >= 1.0 - TOL);
            assert!(pair_fidelity(&fact.second, &want) >= 1.0 - TOL);
            fact.second
        })
        .collect();
    // Within a basis Eve's copies are orthogonal; across bases they overlap by 1/2.
    assert!(pair_fidelity(&eve[0], &eve[1]) <= TOL);
    assert!(pair_fidelity(&eve[2], &eve[3]) <= TOL);
    assert!((pair_fidelity(&eve[0], &eve[2]) - 0.5).abs() <= TOL);
}

#[test]
fn intermediate_state_after_first_isometry() {
    let i = Complex64::i();
    let r = Complex64::from(1.0 / 5f64.sqrt());
    let zero = Complex64::from(0.0);
    let expected = [
        (Code::Minus, [2.0 * r, zero, -r, zero]),
        (Code::Plus, [2.0 * r, zero, r, zero]),
        (Code::Zero, [zero, 2.0 * r, i * r, zero]),
        (Code::One, [zero, 2.0 * r, -i * r, zero]),
    ];
    for (code, want) in expected {
        let t = run_full_attack(code).unwrap();
        let d = dfs_components(&t.after_u1);
        // Fix the global phase on the X or X′ component.
        let phase = if d.x.norm() > 0.5 {
            d.x / d.x.norm()
        } else {
            d.x_prime / d.x_prime.norm()
        };
        let got = [d.x, d.x_prime, d.y, d.y_prime].map(|z| z / phase);
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).norm() <= TOL, "{code:?}: {got:?}");
        }
    }
}

#[test]
fn full_attack_runs_quickly() {
    let start = Instant::now();
    for code in Code::ALL {
        run_full_attack(code).unwrap();
    }
    assert!(start.elapsed().as_secs_f64() < 1.0);
}
