//! Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned here.
//!
//! Run with `cargo test -p qnet-cli --test acceptance -- --nocapture` to see
//! the lines interleaved with timing; they are written straight to stdout
//! and also appear in captured runs.

use std::io::Write;
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::Instant;

use qnet_cli::analysis::{rates, simulate, RATE_MODEL_ROUNDS};
use qnet_cli::{storage, table1, RunContext};
use qnet_core::device::{PrepErrorModel, ReadoutErrorModel};
use qnet_core::fitstats::fit_parity_fringe;
use qnet_core::netsim::{rate_model, ExperimentKind, SettingsPlan};
use qnet_core::proc::{
    build_transfer_superop, gate_superop, monte_carlo_ed_metrics, reconstruct_process, simulate_process_data,
};
use qnet_core::qcore::{embed, gates, kraus_to_superop, make_target_state, tensor, vectorize, CMatrix};
use qnet_core::tomo::settings::{phase_grid, setting_unitary};
use qnet_core::tomo::{build_povm, generate_settings, ghz_fidelity, mle_reconstruct, MeasurementSetting, MleOptions, TomographyDataset};
use qnet_core::{DensityMatrix, Node, QuantumChannel, RngStream, Superoperator};
use rand::Rng;

// criterion 1
const TABLE1_SHOTS: usize = 10_000;
const TABLE1_PST_TOL_PP: f64 = 2.0;
const TABLE1_MAX_SECONDS: f64 = 300.0;
// criterion 2
const RATE_SHOTS: usize = 10_000;
const SRSR_RATE: (f64, f64) = (39.31, 0.02);
const SRCA_RATE: (f64, f64) = (7.14, 0.05);
const RATES_MAX_SECONDS: f64 = 10.0;
// criterion 3 (percent, tolerance in percentage points)
const SRCA_ABORT: (f64, f64) = (4.2, 0.5);
const CACA_ABORT: (f64, f64) = (8.4, 0.8);
// criterion 4
const HAAR_SAMPLES: usize = 10_000;
const PLAIN_TRANSFER: [(Node, f64); 2] = [(Node::Alice, 0.978), (Node::Bob, 0.979)];
const PLAIN_TRANSFER_TOL: f64 = 5e-4;
const ED_TRANSFER: [(Node, f64, f64); 2] = [(Node::Alice, 0.990, 0.028), (Node::Bob, 0.990, 0.022)];
const MC_SIGMAS: f64 = 2.0;
const MC_FLOOR: f64 = 1e-9;
// criterion 5
const STORAGE_SHOTS: usize = 4_000;
const CIRCUIT_F10S: (f64, f64) = (0.69, 0.04);
// criterion 6
const KNOWN_STATE_SHOTS: usize = 10_000;
const KNOWN_STATE_MIN_FIDELITY: f64 = 0.99;
const BIAS_EPS: f64 = 0.02;
const BIAS_SHOTS: usize = 40_000;
const BIAS_SEEDS: u64 = 4;
const BIAS_MIN_REDUCTION: f64 = 5.0;
// criterion 7
const RANDOM_CHANNELS: usize = 100;
const ALGEBRA_TOL: f64 = 1e-10;
const GHZ_TOL: f64 = 1e-12;

struct Ledger {
    results: Vec<(u32, bool)>,
}

impl Ledger {
    fn record(&mut self, id: u32, name: &str, pass: bool, detail: String) {
        let mut out = std::io::stdout().lock();
        let _ = writeln!(out, "{} {id}. {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        self.results.push((id, pass));
    }
}

fn ctx(seed: u64) -> RunContext {
    RunContext::load(None, seed).unwrap()
}

fn table1_check(ledger: &mut Ledger) -> table1::Table1Report {
    let start = Instant::now();
    let report = table1::table1(&ctx(1), TABLE1_SHOTS, 0).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let text = report.text();
    let mut pass = text.is_ok() && secs < TABLE1_MAX_SECONDS;
    let mut detail = Vec::new();
    for r in &report.rows {
        let ok = (r.pst.value - r.pst_ref.value).abs() <= TABLE1_PST_TOL_PP;
        pass &= ok;
        detail.push(format!("{} {:.2}% (ref {:.1})", r.kind, r.pst.value, r.pst_ref.value));
    }
    ledger.record(
        1,
        "entanglement summary fidelities within ±2 pp at 1e4 shots",
        pass,
        format!("{}; {secs:.1} s (limit {TABLE1_MAX_SECONDS} s); tags {}", detail.join(", "), if text.is_ok() { "ok" } else { "missing" }),
    );

    report
}

fn abort_check(ledger: &mut Ledger, report: &table1::Table1Report) {
    let row = |k| report.rows.iter().find(|r| r.kind == k).unwrap();
    let mut pass = true;
    let mut detail = Vec::new();
    for (k, (want, tol)) in [(ExperimentKind::SrCa, SRCA_ABORT), (ExperimentKind::CaCa, CACA_ABORT)] {
        let got = row(k).error_prob.value;
        pass &= (got - want).abs() <= tol;
        detail.push(format!("{k} {got:.2}% (want {want} ± {tol} pp)"));
    }
    ledger.record(3, "error-detection probabilities", pass, detail.join(", "));
}

fn rate_check(ledger: &mut Ledger) {
    let start = Instant::now();
    let c = ctx(2);
    let mut pass = true;
    let mut detail = Vec::new();
    for (k, (want, rel)) in [(ExperimentKind::SrSr, SRSR_RATE), (ExperimentKind::SrCa, SRCA_RATE)] {
        let model = rate_model(k, &c.cal, RATE_MODEL_ROUNDS, &c.rng("rates")).unwrap().rate_hz;
        pass &= ((model - want) / want).abs() <= rel;
        let set = simulate(&c, k, SettingsPlan::partial_default(k), RATE_SHOTS, 0.0).unwrap();
        let sampled = rates(&c, &set).unwrap().stats.rate_hz;
        detail.push(format!(
            "{k} {model:.3}/s (want {want} ± {:.0}%; sampled {sampled:.3}/s over {RATE_SHOTS} shots)",
            100.0 * rel
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs < RATES_MAX_SECONDS;
    ledger.record(2, "entanglement rates", pass, format!("{}; {secs:.1} s", detail.join(", ")));
}

fn transfer_check(ledger: &mut Ledger) {
    let cal = qnet_core::config::Calibration::default_shipped();
    let mut pass = true;
    let mut detail = Vec::new();
    for ((node, plain_want), (_, f_want, p_want)) in PLAIN_TRANSFER.into_iter().zip(ED_TRANSFER) {
        let m = cal.module(node);
        let s = gate_superop(m, "iswap").unwrap();
        let plain = build_transfer_superop(&s, m.prep.auxiliary, None).unwrap();
        let ed = build_transfer_superop(&s, m.prep.auxiliary, Some(m.readout.network)).unwrap();
        let mc = monte_carlo_ed_metrics(&ed, HAAR_SAMPLES, &RngStream::new(10).derive(&node.to_string())).unwrap();
        pass &= (plain.fidelity - plain_want).abs() <= PLAIN_TRANSFER_TOL;
        pass &= (mc.f_bar - f_want).abs() <= MC_SIGMAS * mc.f_se + MC_FLOOR;
        pass &= (mc.p_bar - p_want).abs() <= MC_SIGMAS * mc.p_se + MC_FLOOR;
        detail.push(format!(
            "{node} F {:.4} F̄ {:.5}±{:.1e} p̄ {:.5}±{:.1e}",
            plain.fidelity, mc.f_bar, mc.f_se, mc.p_bar, mc.p_se
        ));
    }
    let ideal = Superoperator::from_unitary(&gates::iswap());
    let oracle = build_transfer_superop(&ideal, PrepErrorModel::new(0.01).unwrap(), Some(ReadoutErrorModel::perfect())).unwrap();
    let mc = monte_carlo_ed_metrics(&oracle, HAAR_SAMPLES, &RngStream::new(11)).unwrap();
    pass &= (mc.f_bar - 1.0).abs() <= MC_SIGMAS * mc.f_se + MC_FLOOR;
    pass &= (mc.p_bar - 0.01).abs() <= MC_SIGMAS * mc.p_se + MC_FLOOR;
    detail.push(format!("oracle F̄ {:.12} p̄ {:.12}", mc.f_bar, mc.p_bar));
    ledger.record(4, "transfer metrics", pass, detail.join("; "));
}

fn storage_check(ledger: &mut Ledger) {
    let c = ctx(3);
    let mut pass = true;
    let mut detail = Vec::new();
    for spec in &storage::SWEEPS {
        let curve = storage::sweep(&c, spec, STORAGE_SHOTS, 0).unwrap();
        let (lo, hi) = curve.fit.t_ci;
        let ok = curve.fit.identifiable && lo <= spec.reference_ms && spec.reference_ms <= hi;
        pass &= ok;
        detail.push(format!("{} T {:.1} ms CI [{lo:.1}, {hi:.1}] (ref {})", spec.kind, curve.fit.t, spec.reference_ms));
        if spec.kind == ExperimentKind::StorageCir {
            let f10 = curve.fit.predict(10_000.0);
            pass &= (f10 - CIRCUIT_F10S.0).abs() <= CIRCUIT_F10S.1;
            detail.push(format!("F(10 s) {f10:.3} (want {} ± {})", CIRCUIT_F10S.0, CIRCUIT_F10S.1));
        }
    }
    ledger.record(5, "storage decay constants", pass, detail.join(", "));
}

/// Rotate, sample the true outcome, then flip reported bits.
fn sample_dataset(rho: &CMatrix, n: usize, shots: usize, truth: &[ReadoutErrorModel], model: &[ReadoutErrorModel], seed: u64) -> TomographyDataset {
    let mut rng = RngStream::new(seed);
    let settings = generate_settings(n, shots, &mut rng).unwrap();
    let mut ds = TomographyDataset::new(n, model.to_vec(), vec![]).unwrap();
    for s in &settings {
        let u = s.0.iter().fold(CMatrix::identity(1, 1), |acc, &i| tensor(&acc, &setting_unitary(i, &[]).unwrap()));
        let rotated = &u * rho * u.adjoint();
        let x: f64 = rng.random();
        let mut acc = 0.0;
        let mut k = rotated.nrows() - 1;
        for j in 0..rotated.nrows() {
            acc += rotated[(j, j)].re;
            if x < acc {
                k = j;
                break;
            }
        }
        let mut idx = 0;
        for q in 0..n {
            let bit = (k >> (n - 1 - q)) & 1;
            let flip = if bit == 0 { truth[q].eps0 } else { truth[q].eps1 };
            let reported = if rng.random::<f64>() < flip { 1 - bit } else { bit };
            idx = (idx << 1) | reported;
        }
        ds.add(s, idx, 1).unwrap();
    }
    ds
}

fn monotone(ll: &[f64]) -> bool {
    ll.windows(2).all(|w| w[1] >= w[0])
}

fn mle_check(ledger: &mut Ledger) {
    let opts = MleOptions::default();
    let mut traces_ok = true;
    let mut n_traces = 0;

    let cal = qnet_core::config::Calibration::default_shipped();
    let ro = [cal.alice.readout.network, cal.bob.readout.network];
    let local = tensor(&gates::euler(0.3, 1.2, -0.7), &gates::euler(-1.1, 0.4, 2.0));
    let psi = &local * make_target_state(2, 0.0).unwrap().amplitudes();
    let known = &psi * psi.adjoint();
    let ds = sample_dataset(&known, 2, KNOWN_STATE_SHOTS, &ro, &ro, 20);
    let res = mle_reconstruct(&ds, &opts).unwrap();
    traces_ok &= monotone(&res.trace.log_likelihood);
    n_traces += 1;
    let f_known = psi.dotc(&(res.rho.matrix() * &psi)).re;

    let noisy = [ReadoutErrorModel::new(BIAS_EPS, BIAS_EPS).unwrap(); 2];
    let blind = [ReadoutErrorModel::perfect(); 2];
    let bell = make_target_state(2, 0.0).unwrap();
    let bell_m = bell.projector();
    let (mut aware, mut naive) = (0.0, 0.0);
    for seed in 0..BIAS_SEEDS {
        let ds = sample_dataset(&bell_m, 2, BIAS_SHOTS, &noisy, &noisy, 100 + seed);
        let a = mle_reconstruct(&ds, &opts).unwrap();
        let b = mle_reconstruct(&ds.with_readout(blind.to_vec()).unwrap(), &opts).unwrap();
        traces_ok &= monotone(&a.trace.log_likelihood) && monotone(&b.trace.log_likelihood);
        n_traces += 2;
        aware += 1.0 - bell.amplitudes().dotc(&(a.rho.matrix() * bell.amplitudes())).re;
        naive += 1.0 - bell.amplitudes().dotc(&(b.rho.matrix() * bell.amplitudes())).re;
    }
    let reduction = naive / aware;

    for (i, kind) in [ExperimentKind::Ghz3, ExperimentKind::SrCa].into_iter().enumerate() {
        let c = ctx(30 + i as u64);
        let set = simulate(&c, kind, SettingsPlan::Full, 5_000, 0.0).unwrap();
        let ds = TomographyDataset::from_records(&set.records, c.cal.readout_models(&kind.labels()), vec![]).unwrap();
        traces_ok &= monotone(&mle_reconstruct(&ds, &opts).unwrap().trace.log_likelihood);
        n_traces += 1;
    }
    let cnot = gate_superop(&cal.alice, "cnot").unwrap();
    let pd = simulate_process_data(&cnot, &ro, 25, &mut RngStream::new(21)).unwrap();
    traces_ok &= monotone(&reconstruct_process(&pd, &opts).unwrap().trace.log_likelihood);
    n_traces += 1;

    let pass = traces_ok && f_known >= KNOWN_STATE_MIN_FIDELITY && reduction >= BIAS_MIN_REDUCTION;
    ledger.record(
        6,
        "maximum-likelihood reconstruction",
        pass,
        format!(
            "monotone on {n_traces} datasets: {traces_ok}; known-state F {f_known:.4} (min {KNOWN_STATE_MIN_FIDELITY}); bias reduction {reduction:.1}x (min {BIAS_MIN_REDUCTION}x)"
        ),
    );
}

fn random_matrix(rows: usize, cols: usize, rng: &mut RngStream) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        qnet_core::qcore::c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

fn random_density(d: usize, rng: &mut RngStream) -> CMatrix {
    let a = random_matrix(d, d, rng);
    let m = &a * a.adjoint();
    let t = m.trace();
    m / t
}

fn algebra_check(ledger: &mut Ledger) {
    let mut rng = RngStream::new(40);
    let mut worst_kraus: f64 = 0.0;
    for _ in 0..RANDOM_CHANNELS {
        let d = if rng.random::<bool>() { 2 } else { 4 };
        let r = rng.random_range(1..=4usize);
        // Kraus operators from the blocks of a random isometry
        let v = random_matrix(d * r, d, &mut rng).qr().q();
        let kraus: Vec<CMatrix> = (0..r).map(|i| v.rows(i * d, d).into_owned()).collect();
        let ch = QuantumChannel::new(kraus.clone()).unwrap();
        let s = kraus_to_superop(&ch);
        let direct = kraus.iter().fold(CMatrix::zeros(d * d, d * d), |acc, k| acc + tensor(&k.conjugate(), k));
        worst_kraus = worst_kraus.max((s.matrix() - &direct).camax());
        let rho = random_density(d, &mut rng);
        let via_kraus = kraus.iter().fold(CMatrix::zeros(d, d), |acc, k| acc + k * &rho * k.adjoint());
        worst_kraus = worst_kraus.max((vectorize(&s.apply(&rho).unwrap()) - vectorize(&via_kraus)).camax());
    }

    let mut worst_povm: f64 = 0.0;
    let phases = phase_grid(10, 4);
    for _ in 0..100 {
        let n = rng.random_range(1..=4usize);
        let setting = MeasurementSetting((0..n).map(|_| rng.random_range(0..16u8)).collect());
        let ro: Vec<_> = (0..n)
            .map(|_| ReadoutErrorModel::new(rng.random_range(0.0..0.2), rng.random_range(0.0..0.2)).unwrap())
            .collect();
        let sum = build_povm(&setting, &ro, &phases)
            .unwrap()
            .into_iter()
            .fold(CMatrix::zeros(1 << n, 1 << n), |acc, (_, m)| acc + m);
        worst_povm = worst_povm.max((sum - CMatrix::identity(1 << n, 1 << n)).camax());
    }

    let mut worst_fringe: f64 = 0.0;
    for n in 2..=4usize {
        let (amp, phi0) = (0.83, 0.61);
        let xs = phase_grid(2 * n + 2, n);
        let ys: Vec<f64> = xs.iter().map(|&x| amp * (n as f64 * x - phi0).cos()).collect();
        let fit = fit_parity_fringe(&xs, &ys, &vec![0.0; xs.len()], n).unwrap();
        worst_fringe = worst_fringe.max((fit.contrast_raw - amp).abs()).max((fit.phase - phi0).abs());
    }

    let mut worst_ghz: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.random_range(2..=4usize);
        let rho = random_density(1 << n, &mut rng);
        let z = (0..n).fold(CMatrix::identity(1 << n, 1 << n), |acc, q| {
            acc * embed(&gates::rz(rng.random_range(-3.0..3.0)), &[q], n).unwrap()
        });
        let rotated = &z * &rho * z.adjoint();
        worst_ghz = worst_ghz.max((ghz_fidelity(&rotated) - ghz_fidelity(&rho)).abs());
        DensityMatrix::from_matrix(rotated).unwrap();
    }

    let pass = worst_kraus <= ALGEBRA_TOL && worst_povm <= ALGEBRA_TOL && worst_fringe <= ALGEBRA_TOL && worst_ghz <= GHZ_TOL;
    ledger.record(
        7,
        "algebraic oracles",
        pass,
        format!(
            "kraus/superop {worst_kraus:.1e}, povm completeness {worst_povm:.1e}, fringe {worst_fringe:.1e} (tol {ALGEBRA_TOL:.0e}); ghz Z-invariance {worst_ghz:.1e} (tol {GHZ_TOL:.0e})"
        ),
    );
}

fn qnet(out: &Path, args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_qnet"))
        .args(args)
        .arg("--out")
        .arg(out)
        .arg("--seed")
        .arg("7")
        .stdout(Stdio::null())
        .status()
        .unwrap()
        .success()
}

fn determinism_check(ledger: &mut Ledger) {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut ran = true;
    for d in &dirs {
        let p = d.path();
        let rec = p.join("ghz3.jsonl");
        let rec = rec.to_str().unwrap();
        ran &= qnet(p, &["simulate", "ghz3", "--shots", "2000"]);
        ran &= qnet(p, &["pst", rec, "--resamples", "100"]);
        ran &= qnet(p, &["rates", rec]);
    }
    let files = ["ghz3.jsonl", "pst-ghz3.txt", "pst-ghz3.json", "rates-ghz3.txt", "rates-ghz3.json"];
    let same = files.iter().all(|f| {
        let a = std::fs::read(dirs[0].path().join(f));
        let b = std::fs::read(dirs[1].path().join(f));
        matches!((a, b), (Ok(a), Ok(b)) if a == b)
    });
    ledger.record(
        8,
        "determinism",
        ran && same,
        format!("two runs, seed 7: {} output files byte-identical: {same}", files.len()),
    );
}

#[test]
fn acceptance_criteria() {
    // libtest has already written "test acceptance_criteria ... " without a newline
    let _ = writeln!(std::io::stdout().lock());
    let mut ledger = Ledger { results: Vec::new() };
    let report = table1_check(&mut ledger);
    rate_check(&mut ledger);
    abort_check(&mut ledger, &report);
    transfer_check(&mut ledger);
    storage_check(&mut ledger);
    mle_check(&mut ledger);
    algebra_check(&mut ledger);
    determinism_check(&mut ledger);
    let mut failed: Vec<u32> = ledger.results.iter().filter(|r| !r.1).map(|r| r.0).collect();
    failed.sort_unstable();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
