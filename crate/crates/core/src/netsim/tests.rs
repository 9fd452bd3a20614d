use super::*;
use crate::qcore::{fidelity_to_pure, make_target_state};

fn shipped() -> Calibration {
    Calibration::default_shipped()
}

#[test]
fn kind_names_round_trip() {
    for k in ExperimentKind::ALL {
        assert_eq!(k.name().parse::<ExperimentKind>().unwrap(), k);
        assert_eq!(serde_json::to_string(&k).unwrap(), format!("\"{}\"", k.name()));
    }
    assert!("sr-xx".parse::<ExperimentKind>().is_err());
}

#[test]
fn noiseless_states_are_ideal() {
    let cal = shipped().noiseless();
    for k in ExperimentKind::ALL {
        let mut rng = RngStream::new(11);
        let (st, rounds) = prepare_entangled(k, &cal, &mut rng).unwrap();
        assert_eq!(rounds.len(), 1, "{k}");
        assert_eq!(st.labels(), k.labels().as_slice());
        let f = fidelity_to_pure(&st, &make_target_state(k.n_qubits(), 0.0).unwrap()).unwrap();
        assert!(f > 1.0 - 1e-10, "{k}: {f}");
    }
}

#[test]
fn noiseless_ghz4_outcomes_are_uniform_parity() {
    let cal = shipped().noiseless();
    let exp = Experiment::new(ExperimentKind::Ghz4, SettingsPlan::partial_default(ExperimentKind::Ghz4));
    let set = run_experiment(&exp, 200, &cal, &RngStream::new(2)).unwrap();
    for r in set.records.iter().filter(|r| r.setting.iter().all(|&s| s == 0)) {
        let ones: u8 = r.outcomes.iter().sum();
        assert!(ones == 0 || ones == 4, "{:?}", r.outcomes);
    }
}

#[test]
fn partial_plan_layout() {
    let plan = SettingsPlan::Partial { n_phases: 6 };
    let s = plan.settings(2, 20, &RngStream::new(0)).unwrap();
    assert!(s[..10].iter().all(|m| m.is_population()));
    let phases: Vec<_> = s[10..].iter().map(|m| m.parity_phase().unwrap()).collect();
    assert_eq!(phases, vec![0, 1, 2, 3, 4, 5, 0, 1, 2, 3]);
}

#[test]
fn network_rate_matches_schedule() {
    let cal = shipped();
    let exp = Experiment::new(ExperimentKind::SrSr, SettingsPlan::partial_default(ExperimentKind::SrSr));
    let set = run_experiment(&exp, 20_000, &cal, &RngStream::new(5)).unwrap();
    let stats = rate_report(&set.records).unwrap();
    assert!((stats.rate_hz / 39.31 - 1.0).abs() < 0.02, "{stats:?}");
    assert_eq!(stats.abort_fraction, 0.0);
}

#[test]
fn rate_model_agrees_with_sampled_rates() {
    let cal = shipped();
    for (kind, want) in [(ExperimentKind::SrSr, 39.31), (ExperimentKind::SrCa, 7.14)] {
        let model = rate_model(kind, &cal, 2_000, &RngStream::new(8)).unwrap();
        assert!((model.rate_hz / want - 1.0).abs() < 0.01, "{kind}: {model:?}");
        let exp = Experiment::new(kind, SettingsPlan::partial_default(kind));
        let stats = rate_report(&run_experiment(&exp, 20_000, &cal, &RngStream::new(9)).unwrap().records).unwrap();
        // geometric herald counts give a relative standard error of about 1/sqrt(shots)
        assert!((stats.rate_hz / model.rate_hz - 1.0).abs() < 4.0 / (20_000f64).sqrt(), "{kind}: {stats:?} vs {model:?}");
    }
    assert!(rate_model(ExperimentKind::SrSr, &cal, 0, &RngStream::new(1)).is_err());
}

#[test]
fn abort_fractions() {
    let cal = shipped();
    for (kind, want, tol) in [(ExperimentKind::SrCa, 0.042, 0.004), (ExperimentKind::CaCa, 0.084, 0.006)] {
        let exp = Experiment::new(kind, SettingsPlan::partial_default(kind));
        let set = run_experiment(&exp, 20_000, &cal, &RngStream::new(6)).unwrap();
        let stats = rate_report(&set.records).unwrap();
        assert!((stats.abort_fraction - want).abs() < tol, "{kind}: {stats:?}");
    }
}

#[test]
fn run_is_deterministic() {
    let cal = shipped();
    let exp = Experiment::new(ExperimentKind::Ghz3, SettingsPlan::Full);
    let a = run_experiment(&exp, 300, &cal, &RngStream::new(77)).unwrap();
    let b = run_experiment(&exp, 300, &cal, &RngStream::new(77)).unwrap();
    assert_eq!(a, b);
    let c = run_experiment(&exp, 300, &cal, &RngStream::new(78)).unwrap();
    assert_ne!(a.records, c.records);
}

#[test]
fn storage_lowers_fidelity() {
    let cal = shipped();
    let mut rng = RngStream::new(3);
    let (st, _) = prepare_entangled(ExperimentKind::StorageNet, &cal, &mut rng).unwrap();
    let target = make_target_state(2, 0.0).unwrap();
    let f0 = fidelity_to_pure(&st, &target).unwrap();
    let f1 = fidelity_to_pure(&store(&st, &cal, 44.0).unwrap(), &target).unwrap();
    assert!(f1 < f0);
    assert!(store(&st, &cal, -1.0).is_err());
}
