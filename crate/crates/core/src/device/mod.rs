//! Calibrated noise model of one trapped-ion module.
//!
//! Each module hosts one network, one circuit and one auxiliary qubit. Gates are
//! an ideal unitary followed by a Pauli error channel whose weight reproduces the
//! configured average gate fidelity. For a `d`-dimensional depolarizing channel
//! `rho -> (1-p) rho + p I/d` the average gate fidelity is `1 - p (d-1)/d`, so a
//! randomized-benchmarking error `r = 1 - F_avg` maps to `p = r d/(d-1)`.

mod iswap;

use std::collections::BTreeMap;

use rand::Rng;

use crate::qcore::{
    apply_channel, apply_unitary, gates, partial_trace, CMatrix, DensityMatrix, Node, QuantumChannel, QubitLabel,
    QubitRole, RngStream,
};
use crate::{Error, Result};

pub use iswap::{IswapErrorBudget, IswapTargets};

/// Wall-clock of one module, in microseconds.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SimClock {
    now_us: f64,
}

impl SimClock {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn now_us(&self) -> f64 {
        self.now_us
    }

    pub fn advance(&mut self, us: f64) {
        self.now_us += us;
    }
}

/// Per-role table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerRole<T> {
    pub network: T,
    pub circuit: T,
    pub auxiliary: T,
}

impl<T: Copy> PerRole<T> {
    pub fn get(&self, role: QubitRole) -> T {
        match role {
            QubitRole::Network => self.network,
            QubitRole::Circuit => self.circuit,
            QubitRole::Auxiliary => self.auxiliary,
        }
    }

    pub fn uniform(v: T) -> Self {
        Self {
            network: v,
            circuit: v,
            auxiliary: v,
        }
    }
}

/// Assignment errors: `eps0` is P(read 1 | |0>), `eps1` is P(read 0 | |1>).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReadoutErrorModel {
    pub eps0: f64,
    pub eps1: f64,
}

impl ReadoutErrorModel {
    pub fn new(eps0: f64, eps1: f64) -> Result<Self> {
        for e in [eps0, eps1] {
            if !(0.0..0.5).contains(&e) {
                return Err(Error::InvalidArgument(format!("readout error {e} outside [0, 0.5)")));
            }
        }
        Ok(Self { eps0, eps1 })
    }

    pub fn perfect() -> Self {
        Self { eps0: 0.0, eps1: 0.0 }
    }

    /// Probability of reporting `reported` given true bit `truth`.
    pub fn likelihood(&self, reported: u8, truth: u8) -> f64 {
        match (truth, reported) {
            (0, 0) => 1.0 - self.eps0,
            (0, _) => self.eps0,
            (_, 0) => self.eps1,
            _ => 1.0 - self.eps1,
        }
    }

    /// POVM element for reporting `reported`, in the computational basis.
    pub fn effect(&self, reported: u8) -> CMatrix {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = self.likelihood(reported, 0).into();
        m[(1, 1)] = self.likelihood(reported, 1).into();
        m
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrepErrorModel {
    pub eps: f64,
}

impl PrepErrorModel {
    pub fn new(eps: f64) -> Result<Self> {
        if !(0.0..0.5).contains(&eps) {
            return Err(Error::InvalidArgument(format!("preparation error {eps} outside [0, 0.5)")));
        }
        Ok(Self { eps })
    }

    /// `(1-eps)|0><0| + eps|1><1|`.
    pub fn state(&self) -> CMatrix {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = (1.0 - self.eps).into();
        m[(1, 1)] = self.eps.into();
        m
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum NoiseKind {
    /// Uniform Pauli errors on the targets.
    DepolarizingAfter,
    /// Uniform Z-type errors on the targets.
    DephasingAfter,
    /// Explicit Pauli-string probabilities (index 0 is the identity).
    PauliAfter(Vec<f64>),
}

#[derive(Clone, Debug)]
pub struct GateSpec {
    pub name: String,
    pub ideal_unitary: CMatrix,
    pub duration_us: f64,
    pub avg_fidelity: f64,
    pub noise_kind: NoiseKind,
}

impl GateSpec {
    pub fn new(name: &str, ideal_unitary: CMatrix, duration_us: f64, avg_fidelity: f64, noise_kind: NoiseKind) -> Result<Self> {
        if !crate::qcore::state::is_unitary(&ideal_unitary, 1e-10) {
            return Err(Error::InvalidArgument(format!("gate `{name}` is not unitary")));
        }
        if !(avg_fidelity > 0.5 && avg_fidelity <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "gate `{name}` average fidelity {avg_fidelity} outside (0.5, 1]"
            )));
        }
        if duration_us < 0.0 {
            return Err(Error::InvalidArgument(format!("gate `{name}` has negative duration")));
        }
        Ok(Self {
            name: name.to_string(),
            ideal_unitary,
            duration_us,
            avg_fidelity,
            noise_kind,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.ideal_unitary.nrows().trailing_zeros() as usize
    }

    /// Error channel applied after the ideal unitary.
    pub fn error_channel(&self) -> Result<QuantumChannel> {
        let n = self.n_qubits();
        let npaulis = 1usize << (2 * n);
        let d = (1usize << n) as f64;
        // total Pauli error probability giving the configured F_avg
        let p_err = (1.0 - self.avg_fidelity) * (d + 1.0) / d;
        let weights = match &self.noise_kind {
            NoiseKind::DepolarizingAfter => {
                let mut w = vec![p_err / (npaulis - 1) as f64; npaulis];
                w[0] = 1.0 - p_err;
                w
            }
            NoiseKind::DephasingAfter => {
                let z_strings: Vec<usize> = (1..npaulis)
                    .filter(|&k| (0..n).all(|q| matches!((k >> (2 * q)) & 3, 0 | 3)))
                    .collect();
                let mut w = vec![0.0; npaulis];
                w[0] = 1.0 - p_err;
                for &k in &z_strings {
                    w[k] = p_err / z_strings.len() as f64;
                }
                w
            }
            NoiseKind::PauliAfter(w) => w.clone(),
        };
        QuantumChannel::pauli(n, &weights)
    }

    pub fn noisy_channel(&self) -> Result<QuantumChannel> {
        QuantumChannel::unitary(self.ideal_unitary.clone())?.then(&self.error_channel()?)
    }
}

/// Idle decoherence constants. Dephasing constants are per qubit; a pair stored
/// on two qubits of the same role decays with half the single-qubit constant.
#[derive(Clone, Debug, PartialEq)]
pub struct StorageModel {
    pub dephasing_t_ms: PerRole<f64>,
    /// Amplitude damping of the network qubit's upper level.
    pub amp_damping_t1_ms: f64,
    /// Storage duration (ms) -> number of UR pulses, ascending by duration.
    pub dd_schedule: Vec<(f64, u32)>,
}

impl StorageModel {
    /// Universally robust sequence length used for a storage of `duration_ms`.
    pub fn dd_pulses(&self, duration_ms: f64) -> Option<u32> {
        self.dd_schedule
            .iter()
            .rev()
            .find(|(t, _)| duration_ms >= *t)
            .or(self.dd_schedule.first())
            .map(|(_, n)| *n)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HyperfineDirection {
    CircuitToAuxiliary,
    AuxiliaryToCircuit,
}

/// Universally robust dynamical decoupling sequence (metadata only).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UrSequence(pub u32);

#[derive(Clone, Debug)]
pub struct ModuleModel {
    pub node: Node,
    pub readout: PerRole<ReadoutErrorModel>,
    pub prep: PerRole<PrepErrorModel>,
    /// Auxiliary preparation error when the auxiliary is initialised ahead of the
    /// entanglement-generation loop for an error-detected transfer.
    pub sequence_aux_prep: PrepErrorModel,
    pub gates: BTreeMap<String, GateSpec>,
    pub storage: StorageModel,
    pub hyperfine_transfer_error: f64,
    pub hyperfine_duration_us: f64,
    pub single_qubit_error_per_clifford: PerRole<f64>,
    pub single_qubit_duration_us: f64,
    pub readout_duration_us: f64,
}

impl ModuleModel {
    /// Noise-free module with ideal CNOT and iSWAP.
    pub fn ideal(node: Node) -> Self {
        let mut gates = BTreeMap::new();
        for (name, u) in [("cnot", gates::cnot()), ("iswap", gates::iswap())] {
            let g = GateSpec::new(name, u, 0.0, 1.0, NoiseKind::DepolarizingAfter).expect("ideal gate");
            gates.insert(name.to_string(), g);
        }
        Self {
            node,
            readout: PerRole::uniform(ReadoutErrorModel::perfect()),
            prep: PerRole::uniform(PrepErrorModel { eps: 0.0 }),
            sequence_aux_prep: PrepErrorModel { eps: 0.0 },
            gates,
            storage: StorageModel {
                dephasing_t_ms: PerRole::uniform(f64::INFINITY),
                amp_damping_t1_ms: f64::INFINITY,
                dd_schedule: Vec::new(),
            },
            hyperfine_transfer_error: 0.0,
            hyperfine_duration_us: 0.0,
            single_qubit_error_per_clifford: PerRole::uniform(0.0),
            single_qubit_duration_us: 0.0,
            readout_duration_us: 0.0,
        }
    }

    pub fn label(&self, role: QubitRole) -> QubitLabel {
        QubitLabel::site(self.node, role)
    }

    pub fn gate(&self, name: &str) -> Result<&GateSpec> {
        self.gates.get(name).ok_or_else(|| Error::UnknownGate(name.to_string()))
    }
}

/// Fresh single-qubit state for `role` with the module's preparation error.
pub fn prepare(model: &ModuleModel, role: QubitRole) -> DensityMatrix {
    prepare_with(model, role, model.prep.get(role))
}

pub fn prepare_with(model: &ModuleModel, role: QubitRole, prep: PrepErrorModel) -> DensityMatrix {
    DensityMatrix::new(prep.state(), vec![model.label(role)]).expect("diagonal probability state")
}

fn positions(state: &DensityMatrix, model: &ModuleModel, roles: &[QubitRole]) -> Result<Vec<usize>> {
    roles.iter().map(|&r| state.position(model.label(r))).collect()
}

/// Named multi-qubit gate on the module's qubits, in the order given by `targets`.
pub fn apply_gate(
    state: &DensityMatrix,
    model: &ModuleModel,
    gate_name: &str,
    targets: &[QubitRole],
    clock: &mut SimClock,
) -> Result<DensityMatrix> {
    let gate = model.gate(gate_name)?;
    if targets.len() != gate.n_qubits() {
        return Err(Error::DimensionMismatch(format!(
            "gate `{gate_name}` acts on {} qubits, got {} targets",
            gate.n_qubits(),
            targets.len()
        )));
    }
    let pos = positions(state, model, targets)?;
    let mut out = apply_unitary(state, &gate.ideal_unitary, &pos)?;
    if gate.avg_fidelity < 1.0 || matches!(gate.noise_kind, NoiseKind::PauliAfter(_)) {
        out = apply_channel(&out, &gate.error_channel()?, &pos)?;
    }
    clock.advance(gate.duration_us);
    Ok(out)
}

/// Single-qubit rotation with the role's error per Clifford as depolarizing noise.
pub fn apply_rotation(
    state: &DensityMatrix,
    model: &ModuleModel,
    role: QubitRole,
    unitary: &CMatrix,
    clock: &mut SimClock,
) -> Result<DensityMatrix> {
    let pos = state.position(model.label(role))?;
    let mut out = apply_unitary(state, unitary, &[pos])?;
    let r = model.single_qubit_error_per_clifford.get(role);
    if r > 0.0 {
        out = apply_channel(&out, &QuantumChannel::depolarizing(1, 2.0 * r)?, &[pos])?;
    }
    clock.advance(model.single_qubit_duration_us);
    Ok(out)
}

/// Projective measurement dressed with readout error.
///
/// The true branch is drawn from `tr(Pi_k rho)` and the state collapsed onto it;
/// the reported bit is then flipped with the role's assignment error. The
/// marginal distribution of the reported bit is `tr(M rho)` with
/// `M_0 = (1-eps0)|0><0| + eps1|1><1|`.
pub fn measure(
    state: &DensityMatrix,
    model: &ModuleModel,
    role: QubitRole,
    rng: &mut RngStream,
    clock: &mut SimClock,
) -> Result<(u8, DensityMatrix)> {
    let pos = state.position(model.label(role))?;
    let (truth, collapsed) = collapse(state, pos, rng)?;
    let ro = model.readout.get(role);
    let flip = match truth {
        0 => ro.eps0,
        _ => ro.eps1,
    };
    let reported = if rng.random::<f64>() < flip { 1 - truth } else { truth };
    clock.advance(model.readout_duration_us);
    Ok((reported, collapsed))
}

/// Sample a computational-basis outcome of qubit `pos` and collapse.
pub fn collapse(state: &DensityMatrix, pos: usize, rng: &mut RngStream) -> Result<(u8, DensityMatrix)> {
    let n = state.n_qubits();
    let dim = state.dim();
    let bit_of = |i: usize| (i >> (n - 1 - pos)) & 1;
    let p1: f64 = (0..dim).filter(|&i| bit_of(i) == 1).map(|i| state.population(i)).sum();
    let total = state.trace();
    let truth = u8::from(rng.random::<f64>() * total < p1);
    let keep = usize::from(truth);
    let m = state.matrix();
    let mut proj = CMatrix::from_fn(dim, dim, |r, c| {
        if bit_of(r) == keep && bit_of(c) == keep {
            m[(r, c)]
        } else {
            0.0.into()
        }
    });
    let p = if truth == 1 { p1 } else { total - p1 };
    if p <= 0.0 {
        return Err(Error::NotPhysical("sampled a zero-probability branch".into()));
    }
    proj.unscale_mut(p);
    let mut out = state.clone();
    out.set_matrix(proj, false);
    if out.is_subnormalized() {
        out.renormalize()?;
    }
    Ok((truth, out))
}

/// Map between the circuit and auxiliary qubits: relabel, then depolarize with
/// the configured error per transfer.
pub fn hyperfine_transfer(
    state: &DensityMatrix,
    model: &ModuleModel,
    direction: HyperfineDirection,
    clock: &mut SimClock,
) -> Result<DensityMatrix> {
    let (from, to) = match direction {
        HyperfineDirection::CircuitToAuxiliary => (QubitRole::Circuit, QubitRole::Auxiliary),
        HyperfineDirection::AuxiliaryToCircuit => (QubitRole::Auxiliary, QubitRole::Circuit),
    };
    let pos = state.position(model.label(from))?;
    if state.position(model.label(to)).is_ok() {
        return Err(Error::InvalidArgument(format!(
            "{} already holds a qubit; hyperfine transfer would overwrite it",
            model.label(to)
        )));
    }
    let mut labels = state.labels().to_vec();
    labels[pos] = model.label(to);
    let mut out = state.clone();
    out.relabel(labels)?;
    let r = model.hyperfine_transfer_error;
    if r > 0.0 {
        out = apply_channel(&out, &QuantumChannel::depolarizing(1, 2.0 * r)?, &[pos])?;
    }
    clock.advance(model.hyperfine_duration_us);
    Ok(out)
}

/// Idle channel on one qubit for `duration_ms`: dephasing with the role's
/// constant, plus amplitude damping for the network qubit.
pub fn idle_channel(model: &ModuleModel, role: QubitRole, duration_ms: f64) -> Result<QuantumChannel> {
    if duration_ms < 0.0 || !duration_ms.is_finite() {
        return Err(Error::InvalidArgument(format!("idle duration {duration_ms} ms")));
    }
    let t2 = model.storage.dephasing_t_ms.get(role);
    let coherence = (-duration_ms / t2).exp();
    let deph = QuantumChannel::dephasing(coherence)?;
    if role == QubitRole::Network && model.storage.amp_damping_t1_ms.is_finite() {
        let gamma = 1.0 - (-duration_ms / model.storage.amp_damping_t1_ms).exp();
        deph.then(&QuantumChannel::amplitude_damping(gamma)?)
    } else {
        Ok(deph)
    }
}

pub fn idle(
    state: &DensityMatrix,
    model: &ModuleModel,
    role: QubitRole,
    duration_ms: f64,
    _dd: Option<UrSequence>,
    clock: &mut SimClock,
) -> Result<DensityMatrix> {
    let ch = idle_channel(model, role, duration_ms)?;
    let pos = state.position(model.label(role))?;
    let out = apply_channel(state, &ch, &[pos])?;
    clock.advance(duration_ms * 1e3);
    Ok(out)
}

/// Phase correction after the iSWAP transfer: the gate writes `a|0> + i b|1>`
/// onto the auxiliary qubit, so this is `diag(1, -i)`.
pub fn transfer_phase_correction() -> CMatrix {
    gates::s().adjoint()
}

/// Drop `role` from the register.
pub fn discard(state: &DensityMatrix, model: &ModuleModel, role: QubitRole) -> Result<DensityMatrix> {
    let pos = state.position(model.label(role))?;
    let keep: Vec<usize> = (0..state.n_qubits()).filter(|&q| q != pos).collect();
    partial_trace(state, &keep)
}
