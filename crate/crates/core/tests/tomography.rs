mod common;

use common::{sample_shot, tomography_data};
use qnet_core::device::ReadoutErrorModel;
use qnet_core::netsim::ShotRecord;
use qnet_core::qcore::{fidelity_to_pure, make_target_state, CMatrix};
use qnet_core::tomo::settings::{phase_grid, PARITY_OFFSET};
use qnet_core::tomo::{
    bootstrap_reconstruction, entanglement_fidelity, estimate_parity_population, mle_reconstruct, EntanglementKind, MeasurementSetting, MleOptions,
    TomographyDataset,
};
use qnet_core::{Error, RngStream};

fn bell() -> CMatrix {
    make_target_state(2, 0.0).unwrap().projector()
}

fn assert_monotone(ll: &[f64]) {
    for w in ll.windows(2) {
        assert!(w[1] >= w[0], "log-likelihood decreased: {} -> {}", w[0], w[1]);
    }
}

#[test]
fn mixed_qubit_reconstruction() {
    // |rho_01| < 0.02 holds in about 93% of 10^4-shot runs (each axis gets a third of the shots)
    let ro = [ReadoutErrorModel::perfect()];
    let runs = 20;
    let mut within = 0;
    for seed in 0..runs {
        let ds = tomography_data(&CMatrix::identity(2, 2).scale(0.5), 1, 10_000, &ro, &ro, seed);
        let res = mle_reconstruct(&ds, &MleOptions::default()).unwrap();
        assert_monotone(&res.trace.log_likelihood);
        let m = res.rho.matrix();
        assert!((m[(0, 0)].re - 0.5).abs() < 0.03);
        if m[(0, 1)].norm() < 0.02 {
            within += 1;
        }
    }
    assert!(within >= 16, "{within} of {runs} runs within 0.02");
}

#[test]
fn bell_state_with_device_readout() {
    let ro = [ReadoutErrorModel::new(0.534e-3, 0.534e-3).unwrap(), ReadoutErrorModel::new(0.543e-3, 0.543e-3).unwrap()];
    let ds = tomography_data(&bell(), 2, 10_000, &ro, &ro, 2);
    let res = mle_reconstruct(&ds, &MleOptions::default()).unwrap();
    assert_monotone(&res.trace.log_likelihood);
    assert!(res.trace.converged);
    let f = fidelity_to_pure(&res.rho, &make_target_state(2, 0.0).unwrap()).unwrap();
    assert!(f >= 0.99, "{f}");
    assert!(res.rho.validate().is_ok());
}

#[test]
fn readout_aware_reconstruction_removes_bias() {
    let noisy = [ReadoutErrorModel::new(0.02, 0.02).unwrap(); 2];
    let blind = [ReadoutErrorModel::perfect(); 2];
    let target = make_target_state(2, 0.0).unwrap();
    let mut bias_aware = 0.0;
    let mut bias_blind = 0.0;
    let seeds = 4;
    for seed in 0..seeds {
        let ds = tomography_data(&bell(), 2, 40_000, &noisy, &noisy, 100 + seed);
        let aware = mle_reconstruct(&ds, &MleOptions::default()).unwrap();
        let naive = mle_reconstruct(&ds.with_readout(blind.to_vec()).unwrap(), &MleOptions::default()).unwrap();
        assert_monotone(&aware.trace.log_likelihood);
        assert_monotone(&naive.trace.log_likelihood);
        bias_aware += 1.0 - fidelity_to_pure(&aware.rho, &target).unwrap();
        bias_blind += 1.0 - fidelity_to_pure(&naive.rho, &target).unwrap();
    }
    let (a, b) = (bias_aware / seeds as f64, bias_blind / seeds as f64);
    assert!(b >= 5.0 * a, "blind bias {b} vs aware bias {a}");
}

#[test]
fn incomplete_data_rejected() {
    let mut ds = TomographyDataset::new(1, vec![ReadoutErrorModel::perfect()], vec![]).unwrap();
    ds.add(&MeasurementSetting(vec![0]), 0, 50).unwrap();
    ds.add(&MeasurementSetting(vec![2]), 1, 50).unwrap();
    assert!(matches!(mle_reconstruct(&ds, &MleOptions::default()), Err(Error::InsufficientData(_))));
}

#[test]
fn bipartite_fidelity_of_reconstruction_of_flipped_bell() {
    let x = qnet_core::qcore::embed(&qnet_core::qcore::gates::x(), &[0], 2).unwrap();
    let rho = &x * bell() * &x;
    let ro = [ReadoutErrorModel::perfect(); 2];
    let ds = tomography_data(&rho, 2, 10_000, &ro, &ro, 4);
    let res = mle_reconstruct(&ds, &MleOptions::default()).unwrap();
    let f = entanglement_fidelity(&res.rho, EntanglementKind::Bipartite).unwrap().fidelity;
    assert!(f > 0.98, "{f}");
}

fn pst_records(rho: &CMatrix, n: usize, shots: usize, n_phases: usize, seed: u64) -> Vec<ShotRecord> {
    let phases = phase_grid(n_phases, n);
    let mut rng = RngStream::new(seed);
    let ro = vec![ReadoutErrorModel::perfect(); n];
    (0..shots)
        .map(|i| {
            let idx = if i < shots / 2 { 0 } else { PARITY_OFFSET + ((i - shots / 2) % n_phases) as u8 };
            let s = MeasurementSetting(vec![idx; n]);
            let outcomes = sample_shot(rho, &s, &ro, &phases, &mut rng);
            ShotRecord {
                shot: i as u64,
                attempts: 1,
                elapsed_us: 0.0,
                aborts: 0,
                setting: s.0,
                outcomes,
            }
        })
        .collect()
}

#[test]
fn ideal_ghz3_partial_tomography() {
    let rho = make_target_state(3, 0.0).unwrap().projector();
    let recs = pst_records(&rho, 3, 4000, 8, 5);
    let est = estimate_parity_population(&recs, 3, &phase_grid(8, 3)).unwrap();
    assert_eq!(est.population, 1.0);
    assert!((est.contrast - 1.0).abs() < 1e-12, "{}", est.contrast);
    assert!((est.fidelity - 1.0).abs() < 1e-12);
    assert_eq!(est.fringe.n_lock, 3);
}

#[test]
fn mixed_state_has_no_contrast() {
    let rho = CMatrix::identity(4, 4).scale(0.25);
    let recs = pst_records(&rho, 2, 8000, 6, 6);
    let est = estimate_parity_population(&recs, 2, &phase_grid(6, 2)).unwrap();
    let sigma = (est.fringe.covariance[0][0] + est.fringe.covariance[1][1]).sqrt();
    assert!(est.fringe.contrast_raw < 3.0 * sigma, "{} vs sigma {sigma}", est.fringe.contrast_raw);
    assert!((est.population - 0.5).abs() < 4.0 * est.population_err);
}

#[test]
fn too_few_phases_reported() {
    let rho = bell();
    let recs = pst_records(&rho, 2, 2000, 4, 7);
    assert!(matches!(
        estimate_parity_population(&recs, 2, &phase_grid(4, 2)),
        Err(Error::InsufficientData(_))
    ));
}

#[test]
fn partial_and_full_tomography_agree() {
    let p = 0.1;
    let rho = bell().scale(1.0 - p) + CMatrix::identity(4, 4).scale(p / 4.0);
    let ro = [ReadoutErrorModel::perfect(); 2];
    let ds = tomography_data(&rho, 2, 10_000, &ro, &ro, 9);
    let full = mle_reconstruct(&ds, &MleOptions::default()).unwrap();
    let f_full = fidelity_to_pure(&full.rho, &make_target_state(2, 0.0).unwrap()).unwrap();
    let recs = pst_records(&rho, 2, 10_000, 6, 10);
    let est = estimate_parity_population(&recs, 2, &phase_grid(6, 2)).unwrap();
    let target = make_target_state(2, 0.0).unwrap();
    let ci = bootstrap_reconstruction(
        &ds,
        &MleOptions::default(),
        |r| fidelity_to_pure(r, &target),
        100,
        &RngStream::new(11),
    )
    .unwrap();
    let combined = (est.fidelity_err.powi(2) + ci.std.powi(2)).sqrt();
    assert!((est.fidelity - f_full).abs() <= 2.0 * combined, "{} vs {f_full} (2 sigma {})", est.fidelity, 2.0 * combined);
}
