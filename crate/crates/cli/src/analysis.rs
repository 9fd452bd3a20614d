//! Record-level commands: simulate, reconstruct, pst, rates.

use qnet_core::netsim::{rate_model, rate_report, run_experiment, Experiment, ExperimentKind, RateModel, RateStats, RecordSet, SettingsPlan};
use qnet_core::qcore::CMatrix;
use qnet_core::tomo::settings::phase_grid;
use qnet_core::tomo::{
    bootstrap_pst, bootstrap_reconstruction, entanglement_fidelity, estimate_parity_population, mle_reconstruct,
    EntanglementKind, MleOptions, ParityPopulationEstimate, TomographyDataset,
};
use qnet_core::fitstats::BootstrapCi;
use serde::Serialize;

use crate::report::key_values;
use crate::{CliError, CliResult, RunContext};

pub fn simulate(
    ctx: &RunContext,
    kind: ExperimentKind,
    plan: SettingsPlan,
    shots: usize,
    storage_ms: f64,
) -> CliResult<RecordSet> {
    if !(storage_ms >= 0.0 && storage_ms.is_finite()) {
        return Err(CliError::Infeasible(format!("storage time {storage_ms} ms")));
    }
    let exp = Experiment::new(kind, plan).with_storage(storage_ms);
    Ok(run_experiment(&exp, shots, &ctx.cal, &ctx.rng(kind.name()))?)
}

fn check_labels(set: &RecordSet) -> CliResult<()> {
    let want: Vec<String> = set.header.kind.labels().iter().map(ToString::to_string).collect();
    if set.header.labels != want {
        return Err(CliError::Other(format!(
            "record labels {:?} do not match kind {}",
            set.header.labels, set.header.kind
        )));
    }
    Ok(())
}

fn dataset(ctx: &RunContext, set: &RecordSet) -> CliResult<TomographyDataset> {
    check_labels(set)?;
    let kind = set.header.kind;
    let readout = ctx.cal.readout_models(&kind.labels());
    let phases = phase_grid(set.header.n_phases, kind.n_qubits());
    Ok(TomographyDataset::from_records(&set.records, readout, phases)?)
}

fn entanglement_kind(n_qubits: usize) -> EntanglementKind {
    if n_qubits == 2 {
        EntanglementKind::Bipartite
    } else {
        EntanglementKind::Ghz
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ReconstructReport {
    pub kind: ExperimentKind,
    pub shots: usize,
    pub fidelity: f64,
    pub fidelity_ci: Option<BootstrapCi>,
    pub purity: f64,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    pub clamped_outcomes: usize,
}

/// Readout-aware maximum-likelihood state plus its entanglement fidelity.
pub fn reconstruct(ctx: &RunContext, set: &RecordSet, resamples: usize) -> CliResult<(ReconstructReport, CMatrix)> {
    let data = dataset(ctx, set)?;
    let opts = MleOptions::default();
    let res = mle_reconstruct(&data, &opts)?;
    let ek = entanglement_kind(data.n_qubits());
    let fid = entanglement_fidelity(&res.rho, ek)?;
    let fidelity_ci = if resamples > 0 {
        Some(bootstrap_reconstruction(
            &data,
            &opts,
            |rho| entanglement_fidelity(rho, ek).map(|f| f.fidelity),
            resamples,
            &ctx.rng("reconstruct-bootstrap"),
        )?)
    } else {
        None
    };
    let m = res.rho.matrix();
    let report = ReconstructReport {
        kind: set.header.kind,
        shots: set.records.len(),
        fidelity: fid.fidelity,
        fidelity_ci,
        purity: (m * m).trace().re,
        log_likelihood: res.trace.log_likelihood.last().copied().unwrap_or(f64::NAN),
        iterations: res.trace.iterations,
        converged: res.trace.converged,
        clamped_outcomes: res.trace.clamped_outcomes,
    };
    Ok((report, m.clone()))
}

impl ReconstructReport {
    pub fn text(&self) -> String {
        let mut items = vec![
            ("kind", self.kind.to_string()),
            ("shots", self.shots.to_string()),
            ("fidelity", format!("{:.5}", self.fidelity)),
        ];
        if let Some(ci) = &self.fidelity_ci {
            items.push(("fidelity 95% CI", format!("[{:.5}, {:.5}] ({} resamples)", ci.lo, ci.hi, ci.n_resamples)));
        }
        items.extend([
            ("purity", format!("{:.5}", self.purity)),
            ("log-likelihood", format!("{:.6}", self.log_likelihood)),
            ("iterations", self.iterations.to_string()),
            ("converged", self.converged.to_string()),
            ("clamped outcomes", self.clamped_outcomes.to_string()),
        ]);
        key_values("full tomography (maximum likelihood)", &items)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PstReport {
    pub kind: ExperimentKind,
    pub shots: usize,
    pub estimate: ParityPopulationEstimate,
    pub fidelity_ci: Option<BootstrapCi>,
}

pub fn pst(ctx: &RunContext, set: &RecordSet, resamples: usize) -> CliResult<PstReport> {
    check_labels(set)?;
    let n = set.header.kind.n_qubits();
    if set.header.n_phases == 0 {
        return Err(CliError::Infeasible("records carry no parity phase grid".into()));
    }
    let phases = phase_grid(set.header.n_phases, n);
    let estimate = estimate_parity_population(&set.records, n, &phases)?;
    let fidelity_ci = if resamples > 0 {
        Some(bootstrap_pst(&set.records, n, &phases, resamples, &ctx.rng("pst-bootstrap"))?)
    } else {
        None
    };
    Ok(PstReport {
        kind: set.header.kind,
        shots: set.records.len(),
        estimate,
        fidelity_ci,
    })
}

impl PstReport {
    pub fn text(&self) -> String {
        let e = &self.estimate;
        let mut items = vec![
            ("kind", self.kind.to_string()),
            ("shots", self.shots.to_string()),
            ("population", format!("{:.5} ± {:.5} (n={})", e.population, e.population_err, e.population_shots)),
            ("contrast", format!("{:.5} ± {:.5}", e.contrast, e.fringe.contrast_err)),
            ("fringe phase", format!("{:.4} ± {:.4} rad", e.phase, e.fringe.phase_err)),
            ("fidelity", format!("{:.5} ± {:.5}", e.fidelity, e.fidelity_err)),
        ];
        if let Some(ci) = &self.fidelity_ci {
            items.push(("fidelity 95% CI", format!("[{:.5}, {:.5}] ({} resamples)", ci.lo, ci.hi, ci.n_resamples)));
        }
        let mut out = key_values("partial tomography (population + parity)", &items);
        out.push_str("  parity points (phase, expectation, error, shots)\n");
        for p in &e.parity {
            out.push_str(&format!("    {:.5}  {:+.5}  {:.5}  {}\n", p.phase, p.expectation, p.error, p.shots));
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RatesReport {
    pub kind: ExperimentKind,
    /// Measured from the shot records.
    pub stats: RateStats,
    /// Expected from the schedule and the herald model.
    pub model: RateModel,
}

/// Protocol rounds averaged by the rate model.
pub const RATE_MODEL_ROUNDS: usize = 2_000;

pub fn rates(ctx: &RunContext, set: &RecordSet) -> CliResult<RatesReport> {
    let kind = set.header.kind;
    Ok(RatesReport {
        kind,
        stats: rate_report(&set.records)?,
        model: rate_model(kind, &ctx.cal, RATE_MODEL_ROUNDS, &ctx.rng("rate-model").derive(kind.name()))?,
    })
}

impl RatesReport {
    pub fn text(&self) -> String {
        let s = &self.stats;
        key_values(
            "entanglement rate",
            &[
                ("kind", self.kind.to_string()),
                ("shots", s.shots.to_string()),
                ("success prob per attempt", format!("{:.4e}", s.mean_success_prob)),
                ("mean time to entanglement", format!("{:.4} ms", s.mean_time_to_entanglement_ms)),
                ("rate", format!("{:.3} /s", s.rate_hz)),
                ("abort fraction", format!("{:.4}", s.abort_fraction)),
                ("model herald rate", format!("{:.3} /s", self.model.herald_rate_hz)),
                ("model acceptance", format!("{:.4}", self.model.acceptance)),
                ("model round overhead", format!("{:.1} us", self.model.round_overhead_us)),
                ("model rate", format!("{:.3} /s", self.model.rate_hz)),
            ],
        )
    }
}
