//! One heralded round: both modules run their local scripts on a shared
//! register, exchange detection outcomes and decide whether to keep the pair.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use super::link::ClassicalLink;
use super::schedule::{us_to_ps, SimTime};
use super::ExperimentKind;
use crate::config::Calibration;
use crate::device::{self, idle_channel, transfer_phase_correction, HyperfineDirection, ModuleModel, SimClock};
use crate::qcore::{apply_channel, DensityMatrix, Node, QubitLabel, QubitRole, RngStream};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum LocalOp {
    Iswap,
    PhaseCorrection,
    DetectNetwork,
    Cnot,
    ToCircuit,
}

impl LocalOp {
    fn duration(self, m: &ModuleModel) -> Result<SimTime> {
        let us = match self {
            LocalOp::Iswap => m.gate("iswap")?.duration_us,
            LocalOp::Cnot => m.gate("cnot")?.duration_us,
            LocalOp::PhaseCorrection => m.single_qubit_duration_us,
            LocalOp::DetectNetwork => m.readout_duration_us,
            LocalOp::ToCircuit => m.hyperfine_duration_us,
        };
        Ok(us_to_ps(us))
    }

    fn qubits(self, node: Node) -> Vec<QubitLabel> {
        let n = QubitLabel::site(node, QubitRole::Network);
        let x = QubitLabel::site(node, QubitRole::Auxiliary);
        match self {
            LocalOp::Iswap | LocalOp::Cnot => vec![n, x],
            LocalOp::PhaseCorrection | LocalOp::ToCircuit => vec![x],
            LocalOp::DetectNetwork => vec![n],
        }
    }
}

pub const ERROR_DETECTED_TRANSFER: [LocalOp; 3] = [LocalOp::Iswap, LocalOp::PhaseCorrection, LocalOp::DetectNetwork];

#[derive(Clone, Debug, Default)]
pub struct Script {
    /// Operations before the keep/abort decision.
    pub pre: Vec<LocalOp>,
    /// Operations after an accepted decision.
    pub post: Vec<LocalOp>,
}

impl Script {
    fn detects(&self) -> bool {
        self.pre.contains(&LocalOp::DetectNetwork)
    }

    fn needs_aux(&self) -> bool {
        self.pre.iter().any(|op| matches!(op, LocalOp::Iswap | LocalOp::Cnot))
    }
}

pub fn scripts(kind: ExperimentKind) -> [Script; 2] {
    let ed = || Script {
        pre: ERROR_DETECTED_TRANSFER.to_vec(),
        post: vec![],
    };
    let cnot = || Script {
        pre: vec![LocalOp::Cnot],
        post: vec![],
    };
    match kind {
        ExperimentKind::SrSr | ExperimentKind::StorageNet => [Script::default(), Script::default()],
        ExperimentKind::SrCa => [Script::default(), ed()],
        ExperimentKind::CaCa => [ed(), ed()],
        ExperimentKind::StorageCir => {
            let s = Script {
                pre: ERROR_DETECTED_TRANSFER.to_vec(),
                post: vec![LocalOp::ToCircuit],
            };
            [s.clone(), s]
        }
        ExperimentKind::Ghz3 => [Script::default(), cnot()],
        ExperimentKind::Ghz4 => [cnot(), cnot()],
    }
}

/// Register with per-qubit bookkeeping of the last time each qubit was acted on.
pub(crate) struct Register<'a> {
    pub state: DensityMatrix,
    last: HashMap<QubitLabel, SimTime>,
    cal: &'a Calibration,
}

impl<'a> Register<'a> {
    pub fn new(state: DensityMatrix, cal: &'a Calibration) -> Self {
        let last = state.labels().iter().map(|&l| (l, 0)).collect();
        Self { state, last, cal }
    }

    pub fn add(&mut self, part: DensityMatrix, at: SimTime) {
        for &l in part.labels() {
            self.last.insert(l, at);
        }
        self.state = self.state.tensor(&part);
    }

    /// Apply idle decoherence to `label` up to time `t`.
    pub fn catch_up(&mut self, label: QubitLabel, t: SimTime) -> Result<()> {
        let QubitLabel::Site { node, role } = label else {
            return Err(Error::InvalidArgument(format!("register qubit {label} has no site")));
        };
        let last = self.last.get(&label).copied().unwrap_or(t);
        if t > last {
            let ch = idle_channel(self.cal.module(node), role, (t - last) as f64 * 1e-9)?;
            let pos = self.state.position(label)?;
            self.state = apply_channel(&self.state, &ch, &[pos])?;
        }
        self.last.insert(label, t.max(last));
        Ok(())
    }

    pub fn catch_up_all(&mut self, t: SimTime) -> Result<()> {
        let labels: Vec<QubitLabel> = self.state.labels().to_vec();
        for l in labels {
            self.catch_up(l, t)?;
        }
        Ok(())
    }

    fn touch(&mut self, labels: &[QubitLabel], t: SimTime) {
        for &l in labels {
            if self.state.position(l).is_ok() {
                self.last.insert(l, t);
            }
        }
    }

    fn relabel_time(&mut self, from: QubitLabel, to: QubitLabel) {
        if let Some(t) = self.last.remove(&from) {
            self.last.insert(to, t);
        }
    }

    fn forget(&mut self, label: QubitLabel) {
        self.last.remove(&label);
    }
}

/// Apply one local operation's quantum effect. Returns the detection bit for
/// `DetectNetwork`.
pub(crate) fn apply_op(
    state: &DensityMatrix,
    op: LocalOp,
    m: &ModuleModel,
    rng: &mut RngStream,
) -> Result<(DensityMatrix, Option<u8>)> {
    let mut clock = SimClock::new();
    let pair = [QubitRole::Network, QubitRole::Auxiliary];
    Ok(match op {
        LocalOp::Iswap => (device::apply_gate(state, m, "iswap", &pair, &mut clock)?, None),
        LocalOp::Cnot => (device::apply_gate(state, m, "cnot", &pair, &mut clock)?, None),
        LocalOp::PhaseCorrection => (
            device::apply_rotation(state, m, QubitRole::Auxiliary, &transfer_phase_correction(), &mut clock)?,
            None,
        ),
        LocalOp::DetectNetwork => {
            let (bit, collapsed) = device::measure(state, m, QubitRole::Network, rng, &mut clock)?;
            (device::discard(&collapsed, m, QubitRole::Network)?, Some(bit))
        }
        LocalOp::ToCircuit => (
            device::hyperfine_transfer(state, m, HyperfineDirection::AuxiliaryToCircuit, &mut clock)?,
            None,
        ),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum EventKind {
    OpDone,
    Message { bit: u8 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Event {
    time: SimTime,
    node: Node,
    seq: u64,
    kind: EventKind,
}

struct Agent {
    node: Node,
    script: Script,
    pc: usize,
    in_post: bool,
    own_bit: Option<u8>,
    peer_bit: Option<u8>,
    peer_detects: bool,
    decision: Option<bool>,
    done: Option<SimTime>,
}

impl Agent {
    fn current(&self) -> Option<LocalOp> {
        let ops = if self.in_post { &self.script.post } else { &self.script.pre };
        ops.get(self.pc).copied()
    }
}

#[derive(Debug)]
pub struct RoundOutcome {
    pub accepted: bool,
    /// Register at the end of the round (meaningful when accepted).
    pub state: DensityMatrix,
    pub duration: SimTime,
    pub detection_bits: [Option<u8>; 2],
}

fn other(node: Node) -> Node {
    match node {
        Node::Alice => Node::Bob,
        Node::Bob => Node::Alice,
    }
}

fn idx(node: Node) -> usize {
    match node {
        Node::Alice => 0,
        Node::Bob => 1,
    }
}

struct Engine<'a> {
    reg: Register<'a>,
    queue: BinaryHeap<Reverse<Event>>,
    seq: u64,
    agents: [Agent; 2],
}

impl Engine<'_> {
    fn push(&mut self, time: SimTime, node: Node, kind: EventKind) {
        self.seq += 1;
        self.queue.push(Reverse(Event {
            time,
            node,
            seq: self.seq,
            kind,
        }));
    }

    fn schedule_next(&mut self, node: Node, now: SimTime) -> Result<()> {
        let a = &self.agents[idx(node)];
        match a.current() {
            Some(op) => {
                let d = op.duration(self.reg.cal.module(node))?;
                self.push(now + d, node, EventKind::OpDone);
            }
            None if a.in_post => self.agents[idx(node)].done = Some(now),
            None => self.try_decide(node, now)?,
        }
        Ok(())
    }

    fn try_decide(&mut self, node: Node, now: SimTime) -> Result<()> {
        let a = &self.agents[idx(node)];
        if a.decision.is_some() || a.in_post || a.current().is_some() {
            return Ok(());
        }
        if a.script.detects() && a.own_bit.is_none() {
            return Ok(());
        }
        if a.peer_detects && a.peer_bit.is_none() {
            return Ok(());
        }
        let accepted = a.own_bit.unwrap_or(0) == 0 && a.peer_bit.unwrap_or(0) == 0;
        let a = &mut self.agents[idx(node)];
        a.decision = Some(accepted);
        if accepted && !a.script.post.is_empty() {
            a.in_post = true;
            a.pc = 0;
            self.schedule_next(node, now)?;
        } else {
            a.done = Some(now);
        }
        Ok(())
    }
}

/// Run the local scripts of `kind` on a freshly heralded pair.
pub fn run_round(
    kind: ExperimentKind,
    cal: &Calibration,
    pair: DensityMatrix,
    rng: &mut RngStream,
    link: &mut ClassicalLink,
) -> Result<RoundOutcome> {
    let [sa, sb] = scripts(kind);
    let mut reg = Register::new(pair, cal);
    for (node, script) in [(Node::Alice, &sa), (Node::Bob, &sb)] {
        if script.needs_aux() {
            let m = cal.module(node);
            let prep = if script.detects() {
                m.sequence_aux_prep
            } else {
                m.prep.auxiliary
            };
            reg.add(device::prepare_with(m, QubitRole::Auxiliary, prep), 0);
        }
    }
    let agent = |node: Node, script: Script, peer: &Script| Agent {
        node,
        peer_detects: peer.detects(),
        script,
        pc: 0,
        in_post: false,
        own_bit: None,
        peer_bit: None,
        decision: None,
        done: None,
    };
    let agents = [agent(Node::Alice, sa.clone(), &sb), agent(Node::Bob, sb.clone(), &sa)];
    let mut eng = Engine {
        reg,
        queue: BinaryHeap::new(),
        seq: 0,
        agents,
    };
    for node in [Node::Alice, Node::Bob] {
        eng.schedule_next(node, 0)?;
    }
    while let Some(Reverse(ev)) = eng.queue.pop() {
        let node = ev.node;
        match ev.kind {
            EventKind::OpDone => {
                let op = eng.agents[idx(node)].current().expect("scheduled op exists");
                let m = cal.module(node);
                let start = ev.time - op.duration(m)?;
                let qubits = op.qubits(node);
                for &q in &qubits {
                    eng.reg.catch_up(q, start)?;
                }
                let (state, bit) = apply_op(&eng.reg.state, op, m, rng)?;
                eng.reg.state = state;
                match op {
                    LocalOp::DetectNetwork => eng.reg.forget(QubitLabel::site(node, QubitRole::Network)),
                    LocalOp::ToCircuit => eng.reg.relabel_time(
                        QubitLabel::site(node, QubitRole::Auxiliary),
                        QubitLabel::site(node, QubitRole::Circuit),
                    ),
                    _ => {}
                }
                let touched: Vec<QubitLabel> = if op == LocalOp::ToCircuit {
                    vec![QubitLabel::site(node, QubitRole::Circuit)]
                } else {
                    qubits
                };
                eng.reg.touch(&touched, ev.time);
                if let Some(b) = bit {
                    eng.agents[idx(node)].own_bit = Some(b);
                    let at = link.send(node, other(node), ev.time, b);
                    eng.push(at, other(node), EventKind::Message { bit: b });
                }
                eng.agents[idx(node)].pc += 1;
                eng.schedule_next(node, ev.time)?;
            }
            EventKind::Message { bit } => {
                eng.agents[idx(node)].peer_bit = Some(bit);
                eng.try_decide(node, ev.time)?;
            }
        }
    }
    let duration = eng
        .agents
        .iter()
        .map(|a| a.done.ok_or_else(|| Error::NonConvergence(format!("{} never finished its round", a.node))))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .max()
        .unwrap_or(0);
    let accepted = eng.agents.iter().all(|a| a.decision == Some(true));
    if accepted {
        eng.reg.catch_up_all(duration)?;
    }
    Ok(RoundOutcome {
        accepted,
        state: eng.reg.state,
        duration,
        detection_bits: [eng.agents[0].own_bit, eng.agents[1].own_bit],
    })
}

/// Outcome of a stand-alone error-detected transfer on one module.
#[derive(Debug)]
pub enum TransferOutcome {
    Transferred(DensityMatrix),
    Abort,
}

/// iSWAP, phase correction and mid-circuit detection on `module`, whose network
/// qubit must be in `pair_state`. The detection bit is announced to the peer.
pub fn error_detected_iswap(
    pair_state: &DensityMatrix,
    module: &ModuleModel,
    rng: &mut RngStream,
    link: &mut ClassicalLink,
) -> Result<TransferOutcome> {
    pair_state.position(module.label(QubitRole::Network))?;
    let mut state = pair_state.tensor(&device::prepare_with(module, QubitRole::Auxiliary, module.sequence_aux_prep));
    let mut t = 0;
    let mut bit = None;
    for op in ERROR_DETECTED_TRANSFER {
        let (s, b) = apply_op(&state, op, module, rng)?;
        state = s;
        t += op.duration(module)?;
        bit = bit.or(b);
    }
    let bit = bit.expect("detection step yields a bit");
    link.send(module.node, other(module.node), t, bit);
    Ok(if bit == 0 {
        TransferOutcome::Transferred(state)
    } else {
        TransferOutcome::Abort
    })
}
