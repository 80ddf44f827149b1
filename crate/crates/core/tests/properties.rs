use std::sync::Arc;

use proptest::prelude::*;

use memvac::capacity::registry::{CodeSource, Registry};
use memvac::capacity::{fidelity_matrix, Clock};
use memvac::su11::{log_overlap, theta_from_beta, Code, MemoryState, ModeList};
use memvac::thermo;
use memvac::Execution;

fn modes_and_codes(max_k: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>)> {
    (1..=max_k).prop_flat_map(|k| {
        (
            prop::collection::vec(0.2f64..3.0, k),
            prop::collection::vec(0.1f64..2.0, k),
            prop::collection::vec(0.0f64..3.0, k),
            prop::collection::vec(0.0f64..3.0, k),
        )
    })
}

fn state(omegas: &[f64], gammas: &[f64], thetas: &[f64], t: f64) -> MemoryState {
    let modes = Arc::new(ModeList::new(omegas, gammas).unwrap());
    MemoryState::at_time(modes, Code::new(thetas.to_vec()).unwrap(), t).unwrap()
}

proptest! {
    #[test]
    fn overlap_symmetric_and_bounded((om, ga, a, b) in modes_and_codes(8), t in 0.0f64..5.0) {
        let sa = state(&om, &ga, &a, t);
        let sb = state(&om, &ga, &b, t);
        let ab = log_overlap(&sa, &sb).unwrap();
        prop_assert_eq!(ab, log_overlap(&sb, &sa).unwrap());
        prop_assert!(ab <= 0.0);
        prop_assert_eq!(log_overlap(&sa, &sa).unwrap(), 0.0);
    }

    #[test]
    fn same_time_overlap_is_time_invariant((om, ga, a, b) in modes_and_codes(8), t in 0.0f64..20.0) {
        let at0 = log_overlap(&state(&om, &ga, &a, 0.0), &state(&om, &ga, &b, 0.0)).unwrap();
        let at_t = log_overlap(&state(&om, &ga, &a, t), &state(&om, &ga, &b, t)).unwrap();
        prop_assert!((at0 - at_t).abs() <= 1e-12 * (1.0 + at0.abs()));
    }

    #[test]
    fn squeezed_quadratures_saturate_uncertainty(theta in 0.0f64..4.0, t in 0.0f64..6.0, g in 0.1f64..2.0) {
        // x = (a + a†)/2, so the bound is Δx²Δy² ≥ 1/16
        let s = state(&[1.0], &[g], &[theta], t);
        let v = s.variances(0).unwrap();
        prop_assert!((16.0 * v.dx2 * v.dy2 - 1.0).abs() <= 1e-12);
        prop_assert!((16.0 * v.dxt2 * v.dyt2 - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn entropy_even_and_nonnegative(theta in 0.0f64..50.0) {
        let s = thermo::mode_entropy(theta);
        prop_assert!(s >= 0.0 && s.is_finite());
        prop_assert_eq!(s, thermo::mode_entropy(-theta));
        prop_assert_eq!(thermo::mode_entropy_slope(theta), -thermo::mode_entropy_slope(-theta));
    }

    #[test]
    fn beta_round_trip(be in 1e-3f64..40.0, energy in 0.1f64..5.0) {
        let beta = be / energy;
        let th = theta_from_beta(beta, energy).unwrap();
        let s = state(&[energy], &[1.0], &[th], 0.0);
        let back = thermo::effective_beta(&s, 0).unwrap();
        prop_assert!(((back - beta) / beta).abs() <= 1e-12);
    }

    #[test]
    fn fidelity_matrix_symmetric_and_time_invariant(
        (om, ga, a, b) in modes_and_codes(6),
        c in prop::collection::vec(0.0f64..3.0, 6),
        t in 0.0f64..10.0,
    ) {
        let k = om.len();
        let modes = Arc::new(ModeList::new(&om, &ga).unwrap());
        let reg = Registry::new(modes)
            .print("a", &CodeSource::Thetas(a), 0.0).unwrap()
            .print("b", &CodeSource::Thetas(b), 0.0).unwrap()
            .print("c", &CodeSource::Thetas(c[..k].to_vec()), 0.0).unwrap();
        let m0 = fidelity_matrix(&reg, 0.0, Clock::Common, Execution::Sequential).unwrap();
        let mt = fidelity_matrix(&reg, t, Clock::Common, Execution::Parallel).unwrap();
        for i in 0..3 {
            prop_assert_eq!(m0.values[i][i], 1.0);
            for j in 0..3 {
                prop_assert_eq!(m0.values[i][j], m0.values[j][i]);
                prop_assert!((m0.log_values[i][j] - mt.log_values[i][j]).abs() <= 1e-12 * (1.0 + m0.log_values[i][j].abs()));
            }
        }
    }

    #[test]
    fn registry_json_round_trips(thetas in prop::collection::vec(0.0f64..5.0, 1..6), at in 0.0f64..10.0) {
        let k = thetas.len();
        let reg = Registry::new(Arc::new(ModeList::uniform(k, 1.0, 0.5).unwrap()))
            .print("m", &CodeSource::Thetas(thetas), at).unwrap();
        let text = reg.to_json();
        let back = Registry::from_json(&text).unwrap();
        prop_assert_eq!(&back, &reg);
        prop_assert_eq!(back.to_json(), text);
    }
}
