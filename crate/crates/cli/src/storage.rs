//! Storage sweeps: fidelity against storage time and exponential decay fits.

use qnet_core::fitstats::{bootstrap_decay, fit_exp_decay, DecayFit, DecayModel};
use qnet_core::netsim::{run_experiment, Experiment, ExperimentKind, SettingsPlan};
use qnet_core::tomo::estimate_parity_population;
use qnet_core::tomo::settings::phase_grid;
use serde::Serialize;

use crate::report::{key_values, Tagged};
use crate::{CliError, CliResult, RunContext};

pub const NETWORK_TIMES_MS: [f64; 10] = [0.0, 5.0, 10.0, 20.0, 40.0, 60.0, 80.0, 100.0, 150.0, 200.0];
pub const CIRCUIT_TIMES_MS: [f64; 6] = [0.0, 500.0, 1000.0, 2000.0, 5000.0, 10000.0];
/// Published pair decay constants (ms).
pub const NETWORK_REFERENCE_MS: f64 = 44.0;
pub const CIRCUIT_REFERENCE_MS: f64 = 14_000.0;
/// Published circuit-pair fidelity after 10 s.
pub const CIRCUIT_F10S_REFERENCE: (f64, f64) = (0.69, 0.04);

#[derive(Clone, Copy, Debug)]
pub struct SweepSpec {
    pub kind: ExperimentKind,
    pub times_ms: &'static [f64],
    pub model: DecayModel,
    pub reference_ms: f64,
}

pub const SWEEPS: [SweepSpec; 2] = [
    SweepSpec {
        kind: ExperimentKind::StorageNet,
        times_ms: &NETWORK_TIMES_MS,
        model: DecayModel::FreeAsymptote,
        reference_ms: NETWORK_REFERENCE_MS,
    },
    SweepSpec {
        kind: ExperimentKind::StorageCir,
        times_ms: &CIRCUIT_TIMES_MS,
        model: DecayModel::Floor(0.5),
        reference_ms: CIRCUIT_REFERENCE_MS,
    },
];

#[derive(Clone, Debug, Serialize)]
pub struct StoragePoint {
    pub time_ms: f64,
    pub fidelity: f64,
    pub fidelity_err: f64,
    pub shots: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct StorageCurve {
    pub kind: ExperimentKind,
    pub points: Vec<StoragePoint>,
    pub fit: DecayFit,
    /// Parametric bootstrap interval for the time constant, when requested.
    pub t_bootstrap_ci: Option<(f64, f64)>,
    pub t_fit: Tagged,
    pub t_ref: Tagged,
    /// Fitted fidelity at the last grid time.
    pub f_last: Tagged,
}

#[derive(Clone, Debug, Serialize)]
pub struct StorageReport {
    pub shots_per_point: usize,
    pub curves: Vec<StorageCurve>,
}

pub fn sweep(ctx: &RunContext, spec: &SweepSpec, shots: usize, resamples: usize) -> CliResult<StorageCurve> {
    if shots == 0 {
        return Err(CliError::Infeasible("storage sweep needs shots at every point".into()));
    }
    let n = spec.kind.n_qubits();
    let plan = SettingsPlan::partial_default(spec.kind);
    let SettingsPlan::Partial { n_phases } = plan else {
        unreachable!("partial plan")
    };
    let phases = phase_grid(n_phases, n);
    let mut points = Vec::new();
    for (i, &t) in spec.times_ms.iter().enumerate() {
        let exp = Experiment::new(spec.kind, plan).with_storage(t);
        let rng = ctx.rng(spec.kind.name()).substream(i as u64);
        let set = run_experiment(&exp, shots, &ctx.cal, &rng)?;
        let est = estimate_parity_population(&set.records, n, &phases)?;
        log::info!("{} t={t} ms: F={:.4}", spec.kind, est.fidelity);
        points.push(StoragePoint {
            time_ms: t,
            fidelity: est.fidelity,
            fidelity_err: est.fidelity_err,
            shots,
        });
    }
    let times: Vec<f64> = points.iter().map(|p| p.time_ms).collect();
    let values: Vec<f64> = points.iter().map(|p| p.fidelity).collect();
    let errors: Vec<f64> = points.iter().map(|p| p.fidelity_err).collect();
    let fit = fit_exp_decay(&times, &values, &errors, spec.model)?;
    let t_bootstrap_ci = if resamples > 0 {
        Some(bootstrap_decay(
            &times,
            &values,
            &errors,
            spec.model,
            resamples,
            0.95,
            &ctx.rng("storage-bootstrap").derive(spec.kind.name()),
        )?)
    } else {
        None
    };
    let last = *spec.times_ms.last().expect("non-empty grid");
    Ok(StorageCurve {
        kind: spec.kind,
        t_fit: Tagged::sim(fit.t, Some(fit.t_err)),
        t_ref: Tagged::reference(spec.reference_ms, None),
        f_last: Tagged::sim(fit.predict(last), None),
        points,
        fit,
        t_bootstrap_ci,
    })
}

pub fn storage(ctx: &RunContext, shots: usize, resamples: usize) -> CliResult<StorageReport> {
    let curves = SWEEPS.iter().map(|s| sweep(ctx, s, shots, resamples)).collect::<CliResult<_>>()?;
    Ok(StorageReport {
        shots_per_point: shots,
        curves,
    })
}

impl StorageReport {
    pub fn text(&self) -> String {
        let mut out = String::new();
        for c in &self.curves {
            let f = &c.fit;
            let mut items = vec![
                ("model", format!("{:?}", f.model)),
                ("T fit (ms)", c.t_fit.render(2)),
                ("T 95% profile CI (ms)", format!("[{:.2}, {:.2}]", f.t_ci.0, f.t_ci.1)),
            ];
            if let Some((lo, hi)) = c.t_bootstrap_ci {
                items.push(("T 95% bootstrap CI (ms)", format!("[{lo:.2}, {hi:.2}]")));
            }
            items.extend([
                ("T reference (ms)", c.t_ref.render(1)),
                ("amplitude", format!("{:.4}", f.amplitude)),
                ("offset", format!("{:.4}", f.offset)),
                ("chi2", format!("{:.3}", f.chi2)),
                ("identifiable", f.identifiable.to_string()),
                ("F at last time", c.f_last.render(4)),
            ]);
            out.push_str(&key_values(&format!("storage decay: {} ({} shots per point)", c.kind, self.shots_per_point), &items));
            out.push_str("  points (time ms, fidelity, error)\n");
            for p in &c.points {
                out.push_str(&format!("    {:>8.1}  {:.5}  {:.5}\n", p.time_ms, p.fidelity, p.fidelity_err));
            }
            out.push('\n');
        }
        out
    }
}
