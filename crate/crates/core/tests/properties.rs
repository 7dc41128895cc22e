use cqed_metrology::dynamics::{atomic_phase_flip, jc_propagate};
use cqed_metrology::fisher::{fi_analytic, precision_report, qfi_analytic};
use cqed_metrology::montecarlo::{cramer_rao_trial, TrialConfig};
use cqed_metrology::protocol::{apply_detection_error, run_protocol_numeric};
use cqed_metrology::{AtomFieldState, FieldVector, ProtocolParams, C64};
use proptest::prelude::*;

const N_MAX: usize = 24;

fn field() -> impl Strategy<Value = FieldVector> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), N_MAX + 1).prop_filter_map(
        "zero vector",
        |v| {
            FieldVector::from_amplitudes(v.into_iter().map(|(r, i)| C64::new(r, i)).collect())
                .ok()?
                .normalized()
                .ok()
        },
    )
}

fn atom_field() -> impl Strategy<Value = AtomFieldState> {
    (field(), field(), 0.0f64..1.0).prop_map(|(g, e, mix)| {
        let g = g.scaled(C64::new(mix.sqrt(), 0.0));
        let e = e.scaled(C64::new((1.0 - mix).sqrt(), 0.0));
        AtomFieldState::new(g, e).unwrap()
    })
}

fn omega0() -> f64 {
    cqed_metrology::CavityMode::default().omega0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn propagation_preserves_norm(s in atom_field(), t in 0.0f64..40.0) {
        let out = jc_propagate(&s, t, omega0()).unwrap();
        prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn propagation_composes(s in atom_field(), t1 in 0.0f64..20.0, t2 in 0.0f64..20.0) {
        let w = omega0();
        let two = jc_propagate(&jc_propagate(&s, t1, w).unwrap(), t2, w).unwrap();
        let one = jc_propagate(&s, t1 + t2, w).unwrap();
        prop_assert!(two.fidelity(&one) > 1.0 - 1e-12);
    }

    #[test]
    fn flip_reverses_propagation(s in atom_field(), t in 0.0f64..40.0) {
        let w = omega0();
        let there = atomic_phase_flip(&jc_propagate(&s, t, w).unwrap());
        let back = atomic_phase_flip(&jc_propagate(&there, t, w).unwrap());
        prop_assert!(back.fidelity(&s) > 1.0 - 1e-12);
    }

    #[test]
    fn detection_channel_is_affine_monotone(p in 0.0f64..=1.0, q in 0.0f64..=1.0, eps in 0.0f64..=0.5) {
        let (a, b) = (apply_detection_error(p, eps).unwrap(), apply_detection_error(q, eps).unwrap());
        prop_assert!((0.0..=1.0).contains(&a));
        let mid = apply_detection_error(0.5 * (p + q), eps).unwrap();
        prop_assert!((mid - 0.5 * (a + b)).abs() < 1e-14);
        if p < q {
            prop_assert!(a <= b);
        }
    }

    #[test]
    fn db_gain_increases_with_fisher(f in 1e-3f64..1e3, step in 1e-6f64..10.0) {
        let a = precision_report(f).unwrap();
        let b = precision_report(f + step).unwrap();
        prop_assert!(b.db_gain > a.db_gain);
        prop_assert!((a.delta_beta * f.sqrt() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fisher_below_qfi_for_moderate_preparation(t1 in 0.0f64..13.0, t2 in 0.0f64..29.0, beta in -1.0f64..1.0) {
        let p = ProtocolParams::default().with_times(t1, t2);
        prop_assert!(fi_analytic(beta, &p) <= qfi_analytic(&p) + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn larger_truncation_changes_little(t1 in 2.0f64..14.7, t2 in 2.0f64..14.7, beta in -1.0f64..1.0) {
        let p = ProtocolParams::default().with_times(t1, t2).with_beta(beta).with_sufficient_truncation();
        let wider = ProtocolParams { n_max: p.n_max + 8, ..p };
        let a = run_protocol_numeric(&p).unwrap().ground_probability;
        let b = run_protocol_numeric(&wider).unwrap().ground_probability;
        prop_assert!((a - b).abs() < 1e-6);
    }

    #[test]
    fn trials_repeat_bit_for_bit(seed in any::<u64>()) {
        let cfg = TrialConfig { seed, nu: 1000, replicas: 16, ..TrialConfig::default() };
        prop_assert_eq!(cramer_rao_trial(&cfg).unwrap(), cramer_rao_trial(&cfg).unwrap());
    }
}
