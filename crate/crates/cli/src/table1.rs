//! End-to-end reproduction of the entanglement summary table.

use std::time::Instant;

use qnet_core::fitstats::BootstrapCi;
use qnet_core::netsim::{ExperimentKind, RateModel, RateStats, SettingsPlan};
use serde::Serialize;

use crate::analysis::{pst, rates, simulate};
use crate::report::{tagged_table, Column, Tagged};
use crate::{CliResult, RunContext};

pub const ROW_KINDS: [ExperimentKind; 5] = [
    ExperimentKind::SrSr,
    ExperimentKind::SrCa,
    ExperimentKind::CaCa,
    ExperimentKind::Ghz3,
    ExperimentKind::Ghz4,
];

/// Published values for one row (percent, percent, percent, 1e-4, 1/s).
#[derive(Clone, Copy, Debug)]
pub struct ReferenceRow {
    pub kind: ExperimentKind,
    pub pst: (f64, f64),
    pub fst: Option<(f64, f64)>,
    pub error_prob: Option<(f64, f64)>,
    pub success_prob: (f64, f64),
    pub rate: (f64, f64),
}

pub const REFERENCE: [ReferenceRow; 5] = [
    ReferenceRow {
        kind: ExperimentKind::SrSr,
        pst: (96.0, 0.7),
        fst: None,
        error_prob: None,
        success_prob: (1.236, 0.003),
        rate: (39.31, 0.09),
    },
    ReferenceRow {
        kind: ExperimentKind::SrCa,
        pst: (95.1, 0.8),
        fst: Some((94.1, 0.6)),
        error_prob: Some((4.2, 0.2)),
        success_prob: (1.03, 0.01),
        rate: (7.14, 0.07),
    },
    ReferenceRow {
        kind: ExperimentKind::CaCa,
        pst: (92.0, 1.0),
        fst: Some((93.1, 0.7)),
        error_prob: Some((8.4, 0.3)),
        success_prob: (1.24, 0.01),
        rate: (8.6, 0.1),
    },
    ReferenceRow {
        kind: ExperimentKind::Ghz3,
        pst: (94.0, 1.0),
        fst: None,
        error_prob: None,
        success_prob: (1.20, 0.01),
        rate: (8.26, 0.08),
    },
    ReferenceRow {
        kind: ExperimentKind::Ghz4,
        pst: (91.0, 1.0),
        fst: None,
        error_prob: None,
        success_prob: (1.44, 0.02),
        rate: (9.9, 0.1),
    },
];

pub fn reference(kind: ExperimentKind) -> Option<&'static ReferenceRow> {
    REFERENCE.iter().find(|r| r.kind == kind)
}

#[derive(Clone, Debug, Serialize)]
pub struct Table1Row {
    pub kind: ExperimentKind,
    pub shots: usize,
    pub pst: Tagged,
    pub pst_ref: Tagged,
    pub fst_ref: Option<Tagged>,
    pub error_prob: Tagged,
    pub error_prob_ref: Option<Tagged>,
    pub success_prob: Tagged,
    pub success_prob_ref: Tagged,
    pub rate: Tagged,
    pub rate_model: Tagged,
    pub rate_ref: Tagged,
    pub pst_ci: Option<BootstrapCi>,
    pub stats: RateStats,
    pub model: RateModel,
}

#[derive(Clone, Debug, Serialize)]
pub struct Table1Report {
    pub shots_per_row: usize,
    pub rows: Vec<Table1Row>,
}

fn tag(pair: (f64, f64)) -> Tagged {
    Tagged::reference(pair.0, Some(pair.1))
}

/// Simulate every row with the partial-tomography plan at `shots` shots and
/// evaluate fidelity, detection probability, success probability and rate.
pub fn table1(ctx: &RunContext, shots: usize, resamples: usize) -> CliResult<Table1Report> {
    let mut rows = Vec::new();
    for r in &REFERENCE {
        let start = Instant::now();
        let set = simulate(ctx, r.kind, SettingsPlan::partial_default(r.kind), shots, 0.0)?;
        let p = pst(ctx, &set, resamples)?;
        let rr = rates(ctx, &set)?;
        let s = rr.stats;
        let pst_err = p.fidelity_ci.as_ref().map_or(p.estimate.fidelity_err, |ci| ci.std);
        let abort_err = (s.abort_fraction * (1.0 - s.abort_fraction) / (s.shots as f64 / (1.0 - s.abort_fraction))).sqrt();
        log::info!("{}: {} shots in {:.1} s", r.kind, shots, start.elapsed().as_secs_f64());
        rows.push(Table1Row {
            kind: r.kind,
            shots,
            pst: Tagged::sim(100.0 * p.estimate.fidelity, Some(100.0 * pst_err)),
            pst_ref: tag(r.pst),
            fst_ref: r.fst.map(tag),
            error_prob: Tagged::sim(100.0 * s.abort_fraction, Some(100.0 * abort_err)),
            error_prob_ref: r.error_prob.map(tag),
            success_prob: Tagged::sim(1e4 * s.mean_success_prob, None),
            success_prob_ref: tag(r.success_prob),
            rate: Tagged::sim(s.rate_hz, None),
            rate_model: Tagged::sim(rr.model.rate_hz, None),
            rate_ref: tag(r.rate),
            pst_ci: p.fidelity_ci,
            stats: s,
            model: rr.model,
        });
    }
    Ok(Table1Report {
        shots_per_row: shots,
        rows,
    })
}

impl Table1Report {
    pub fn text(&self) -> CliResult<String> {
        let cols = [
            Column { header: "PST_%", decimals: 2 },
            Column { header: "PST_ref_%", decimals: 1 },
            Column { header: "FST_ref_%", decimals: 1 },
            Column { header: "iSWAP_err_%", decimals: 2 },
            Column { header: "iSWAP_err_ref_%", decimals: 1 },
            Column { header: "success_1e-4", decimals: 3 },
            Column { header: "success_ref_1e-4", decimals: 3 },
            Column { header: "rate_/s", decimals: 2 },
            Column { header: "rate_model_/s", decimals: 2 },
            Column { header: "rate_ref_/s", decimals: 2 },
        ];
        let rows: Vec<_> = self
            .rows
            .iter()
            .map(|r| {
                (
                    r.kind.to_string(),
                    vec![
                        Some(r.pst),
                        Some(r.pst_ref),
                        r.fst_ref,
                        Some(r.error_prob),
                        r.error_prob_ref,
                        Some(r.success_prob),
                        Some(r.success_prob_ref),
                        Some(r.rate),
                        Some(r.rate_model),
                        Some(r.rate_ref),
                    ],
                )
            })
            .collect();
        let mut out = format!(
            "entanglement summary: {} shots per row; [sim] simulated, [ref] published reference\n\n",
            self.shots_per_row
        );
        out.push_str(&tagged_table(&cols, &rows)?);
        Ok(out)
    }
}
