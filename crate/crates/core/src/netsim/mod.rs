//! Discrete-event simulation of the two-module network.

mod link;
mod protocol;
mod record;
mod schedule;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Calibration;
use crate::device::{self, SimClock};
use crate::qcore::{DensityMatrix, Node, QubitLabel, QubitRole, RngStream};
use crate::tomo::settings::{default_phase_count, generate_settings, phase_grid, setting_unitary, MeasurementSetting, PARITY_OFFSET};
use crate::{Error, Result};

pub use link::{generate_raw_pair, sample_attempts, ClassicalLink, Message, RawLinkModel};
pub use protocol::{error_detected_iswap, run_round, scripts, LocalOp, RoundOutcome, Script, TransferOutcome};
pub use record::{RecordHeader, RecordSet, ShotRecord, RECORD_SCHEMA, RECORD_VERSION};
pub use schedule::{ps_to_us, us_to_ps, ScheduleClock, ScheduleConfig, SimTime};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    SrSr,
    SrCa,
    CaCa,
    Ghz3,
    Ghz4,
    StorageNet,
    StorageCir,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::SrSr,
        ExperimentKind::SrCa,
        ExperimentKind::CaCa,
        ExperimentKind::Ghz3,
        ExperimentKind::Ghz4,
        ExperimentKind::StorageNet,
        ExperimentKind::StorageCir,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::SrSr => "sr-sr",
            ExperimentKind::SrCa => "sr-ca",
            ExperimentKind::CaCa => "ca-ca",
            ExperimentKind::Ghz3 => "ghz3",
            ExperimentKind::Ghz4 => "ghz4",
            ExperimentKind::StorageNet => "storage-net",
            ExperimentKind::StorageCir => "storage-cir",
        }
    }

    /// Qubits holding the final state, in measurement order.
    pub fn labels(self) -> Vec<QubitLabel> {
        use Node::*;
        use QubitRole::*;
        let l = QubitLabel::site;
        match self {
            ExperimentKind::SrSr | ExperimentKind::StorageNet => vec![l(Alice, Network), l(Bob, Network)],
            ExperimentKind::SrCa => vec![l(Alice, Network), l(Bob, Auxiliary)],
            ExperimentKind::CaCa => vec![l(Alice, Auxiliary), l(Bob, Auxiliary)],
            ExperimentKind::Ghz3 => vec![l(Alice, Network), l(Bob, Network), l(Bob, Auxiliary)],
            ExperimentKind::Ghz4 => vec![l(Alice, Network), l(Bob, Network), l(Alice, Auxiliary), l(Bob, Auxiliary)],
            ExperimentKind::StorageCir => vec![l(Alice, Circuit), l(Bob, Circuit)],
        }
    }

    pub fn n_qubits(self) -> usize {
        self.labels().len()
    }

    /// Mixed-species experiments use the shorter attempt window.
    pub fn mixed_species(self) -> bool {
        !matches!(self, ExperimentKind::SrSr | ExperimentKind::StorageNet)
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown experiment kind `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SettingsPlan {
    /// Half the shots in the computational basis, the rest spread evenly over
    /// a uniform grid of parity analysis phases.
    Partial { n_phases: usize },
    /// Random tomographic rotations, drawn independently per qubit.
    Full,
}

impl SettingsPlan {
    pub fn partial_default(kind: ExperimentKind) -> Self {
        SettingsPlan::Partial {
            n_phases: default_phase_count(kind.n_qubits()),
        }
    }

    fn n_phases(&self) -> usize {
        match self {
            SettingsPlan::Partial { n_phases } => *n_phases,
            SettingsPlan::Full => 0,
        }
    }

    pub fn settings(&self, n_qubits: usize, n_shots: usize, rng: &RngStream) -> Result<Vec<MeasurementSetting>> {
        if n_shots == 0 {
            return Ok(Vec::new());
        }
        match *self {
            SettingsPlan::Full => generate_settings(n_qubits, n_shots, &mut rng.derive("settings")),
            SettingsPlan::Partial { n_phases } => {
                if n_phases == 0 || n_phases + usize::from(PARITY_OFFSET) > 256 {
                    return Err(Error::InvalidArgument(format!("invalid phase count {n_phases}")));
                }
                let half = n_shots / 2;
                Ok((0..n_shots)
                    .map(|i| {
                        let idx = if i < half {
                            0
                        } else {
                            PARITY_OFFSET + ((i - half) % n_phases) as u8
                        };
                        MeasurementSetting(vec![idx; n_qubits])
                    })
                    .collect())
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Experiment {
    pub kind: ExperimentKind,
    pub plan: SettingsPlan,
    /// Storage time between entanglement and analysis.
    pub storage_ms: f64,
}

impl Experiment {
    pub fn new(kind: ExperimentKind, plan: SettingsPlan) -> Self {
        Self {
            kind,
            plan,
            storage_ms: 0.0,
        }
    }

    pub fn with_storage(mut self, storage_ms: f64) -> Self {
        self.storage_ms = storage_ms;
        self
    }
}

/// Quantum side of one shot; timing is assigned afterwards.
struct ShotSim {
    rounds: Vec<(u64, SimTime)>,
    outcomes: Vec<u8>,
}

const MAX_ROUNDS: usize = 100_000;

/// Entangled state of `kind` after any accepted round, before storage.
pub fn prepare_entangled(
    kind: ExperimentKind,
    cal: &Calibration,
    rng: &mut RngStream,
) -> Result<(DensityMatrix, Vec<(u64, SimTime)>)> {
    let schedule = cal.schedule(kind);
    let link = cal.link();
    let mut classical = ClassicalLink::new(us_to_ps(cal.latency_us()));
    let mut rounds = Vec::new();
    for _ in 0..MAX_ROUNDS {
        let attempts = sample_attempts(schedule.success_prob, rng)?;
        let out = run_round(kind, cal, link.pair(), rng, &mut classical)?;
        rounds.push((attempts, out.duration));
        if out.accepted {
            let labels = kind.labels();
            let order = labels.iter().map(|&l| out.state.position(l)).collect::<Result<Vec<_>>>()?;
            return Ok((out.state.permute(&order)?, rounds));
        }
    }
    Err(Error::NonConvergence(format!("{kind}: no accepted round in {MAX_ROUNDS} tries")))
}

/// Idle every qubit of `state` for `ms`.
pub fn store(state: &DensityMatrix, cal: &Calibration, ms: f64) -> Result<DensityMatrix> {
    if ms < 0.0 {
        return Err(Error::InvalidArgument(format!("negative storage time {ms}")));
    }
    let mut out = state.clone();
    let mut clock = SimClock::new();
    for &l in state.labels() {
        let QubitLabel::Site { node, role } = l else {
            return Err(Error::InvalidArgument(format!("{l} has no site")));
        };
        out = device::idle(&out, cal.module(node), role, ms, None, &mut clock)?;
    }
    Ok(out)
}

/// Apply analysis rotations and read out every qubit.
pub fn measure_setting(
    state: &DensityMatrix,
    cal: &Calibration,
    setting: &MeasurementSetting,
    phases: &[f64],
    rng: &mut RngStream,
) -> Result<Vec<u8>> {
    let mut clock = SimClock::new();
    let mut st = state.clone();
    let labels = state.labels().to_vec();
    for (&l, &idx) in labels.iter().zip(&setting.0) {
        let QubitLabel::Site { node, role } = l else {
            return Err(Error::InvalidArgument(format!("{l} has no site")));
        };
        let u = setting_unitary(idx, phases)?;
        st = device::apply_rotation(&st, cal.module(node), role, &u, &mut clock)?;
    }
    let mut bits = Vec::with_capacity(labels.len());
    for &l in &labels {
        let QubitLabel::Site { node, role } = l else { unreachable!() };
        let (b, collapsed) = device::measure(&st, cal.module(node), role, rng, &mut clock)?;
        st = collapsed;
        bits.push(b);
    }
    Ok(bits)
}

fn simulate_shot(
    exp: &Experiment,
    cal: &Calibration,
    setting: &MeasurementSetting,
    phases: &[f64],
    mut rng: RngStream,
) -> Result<ShotSim> {
    let (state, rounds) = prepare_entangled(exp.kind, cal, &mut rng)?;
    let state = if exp.storage_ms > 0.0 {
        store(&state, cal, exp.storage_ms)?
    } else {
        state
    };
    let outcomes = measure_setting(&state, cal, setting, phases, &mut rng)?;
    Ok(ShotSim { rounds, outcomes })
}

/// Simulate `n_shots` shots of `exp`. Shots run in parallel on independent
/// streams; wall-clock is then assigned sequentially on one schedule clock.
pub fn run_experiment(exp: &Experiment, n_shots: usize, cal: &Calibration, rng: &RngStream) -> Result<RecordSet> {
    let n = exp.kind.n_qubits();
    let settings = exp.plan.settings(n, n_shots, rng)?;
    let phases = phase_grid(exp.plan.n_phases(), n);
    let shot_rng = rng.derive("shots");
    let sims: Vec<ShotSim> = settings
        .par_iter()
        .enumerate()
        .map(|(i, s)| simulate_shot(exp, cal, s, &phases, shot_rng.substream(i as u64)))
        .collect::<Result<_>>()?;
    let mut clock = ScheduleClock::new(&cal.schedule(exp.kind))?;
    let records = sims
        .into_iter()
        .zip(settings)
        .enumerate()
        .map(|(i, (sim, setting))| {
            let start = clock.now();
            let mut attempts = 0;
            for &(a, dur) in &sim.rounds {
                clock.run_attempts(a);
                clock.advance(dur);
                attempts += a;
            }
            ShotRecord {
                shot: i as u64,
                attempts,
                elapsed_us: ps_to_us(clock.now() - start),
                aborts: (sim.rounds.len() - 1) as u32,
                setting: setting.0,
                outcomes: sim.outcomes,
            }
        })
        .collect();
    Ok(RecordSet {
        header: RecordHeader::new(exp.kind, exp.plan.n_phases(), exp.storage_ms, rng.key()),
        records,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RateStats {
    /// Accepted pairs per attempt, counting attempts of aborted rounds.
    pub mean_success_prob: f64,
    pub mean_time_to_entanglement_ms: f64,
    pub rate_hz: f64,
    /// Fraction of heralded rounds discarded by error detection.
    pub abort_fraction: f64,
    pub shots: usize,
}

pub fn rate_report(records: &[ShotRecord]) -> Result<RateStats> {
    if records.is_empty() {
        return Err(Error::InsufficientData("no shot records".into()));
    }
    let shots = records.len();
    let attempts: u64 = records.iter().map(|r| r.attempts).sum();
    let elapsed_us: f64 = records.iter().map(|r| r.elapsed_us).sum();
    let aborts: u64 = records.iter().map(|r| u64::from(r.aborts)).sum();
    Ok(RateStats {
        mean_success_prob: shots as f64 / attempts as f64,
        mean_time_to_entanglement_ms: elapsed_us / shots as f64 * 1e-3,
        rate_hz: shots as f64 / (elapsed_us * 1e-6),
        abort_fraction: aborts as f64 / (aborts + shots as u64) as f64,
        shots,
    })
}

/// Expected rate from the schedule and a geometric herald count, without
/// sampling attempts. Acceptance and per-round local-operation time are
/// averaged over `rounds` protocol rounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RateModel {
    pub herald_rate_hz: f64,
    pub acceptance: f64,
    pub round_overhead_us: f64,
    pub rate_hz: f64,
}

pub fn rate_model(kind: ExperimentKind, cal: &Calibration, rounds: usize, rng: &RngStream) -> Result<RateModel> {
    if rounds == 0 {
        return Err(Error::InvalidArgument("rate model needs at least one round".into()));
    }
    let schedule = cal.schedule(kind);
    schedule.validate()?;
    let link = cal.link();
    let outcomes: Vec<(bool, SimTime)> = (0..rounds)
        .into_par_iter()
        .map(|i| {
            let mut r = rng.substream(i as u64);
            let mut classical = ClassicalLink::new(us_to_ps(cal.latency_us()));
            let out = run_round(kind, cal, link.pair(), &mut r, &mut classical)?;
            Ok((out.accepted, out.duration))
        })
        .collect::<Result<_>>()?;
    let accepted = outcomes.iter().filter(|o| o.0).count();
    if accepted == 0 {
        return Err(Error::NonConvergence(format!("{kind}: no accepted round in {rounds}")));
    }
    let acceptance = accepted as f64 / rounds as f64;
    let round_overhead_us = outcomes.iter().map(|o| ps_to_us(o.1)).sum::<f64>() / rounds as f64;
    let herald_rate_hz = schedule.herald_rate_hz();
    Ok(RateModel {
        herald_rate_hz,
        acceptance,
        round_overhead_us,
        rate_hz: acceptance / (1.0 / herald_rate_hz + round_overhead_us * 1e-6),
    })
}

#[cfg(test)]
mod tests;
