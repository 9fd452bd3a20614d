//! Calibration file: schema, validation and construction of the module models.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::device::{
    GateSpec, IswapErrorBudget, IswapTargets, ModuleModel, NoiseKind, PerRole, PrepErrorModel, ReadoutErrorModel,
    StorageModel,
};
use crate::netsim::{ExperimentKind, RawLinkModel, ScheduleConfig};
use crate::qcore::{gates, Node, QubitLabel};
use crate::{Error, Result};

pub const DEFAULT_CALIBRATION: &str = include_str!("calibration.toml");
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Measured,
    Derived,
    Uncalibrated,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LinkSection {
    pub population_error: f64,
    pub coherence_error: f64,
    pub latency_us: Option<f64>,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    pub attempt_window_us: f64,
    pub doppler_window_us: f64,
    pub eit_window_us: f64,
    pub attempt_period_us: Option<f64>,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Schedules {
    pub network: ScheduleSection,
    pub mixed: ScheduleSection,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SuccessProb {
    pub sr_sr: f64,
    pub sr_ca: f64,
    pub ca_ca: f64,
    pub ghz3: f64,
    pub ghz4: f64,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct StorageSection {
    /// Per-qubit dephasing constants; a pair decays twice as fast.
    pub network_dephasing_ms: f64,
    pub network_t1_ms: f64,
    pub circuit_dephasing_ms: f64,
    pub auxiliary_dephasing_ms: Option<f64>,
    pub dd_schedule: Option<Vec<(f64, u32)>>,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ModuleSection {
    pub prep_network: f64,
    pub prep_circuit: f64,
    pub prep_auxiliary: f64,
    pub readout_network: [f64; 2],
    pub readout_circuit: [f64; 2],
    pub readout_auxiliary: [f64; 2],
    pub clifford_error_network: f64,
    pub clifford_error_circuit: f64,
    pub clifford_error_auxiliary: f64,
    pub cnot_fidelity: f64,
    pub cnot_duration_us: f64,
    pub iswap_fidelity: f64,
    pub transfer_fidelity: f64,
    pub detected_transfer_fidelity: f64,
    pub detection_probability: f64,
    pub hyperfine_transfer_error: f64,
    pub sequence_aux_prep_error: f64,
    pub readout_duration_us: Option<f64>,
    pub single_qubit_duration_us: Option<f64>,
    pub hyperfine_duration_us: Option<f64>,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CalibrationFile {
    pub version: u32,
    pub link: LinkSection,
    pub schedule: Schedules,
    pub success_prob: SuccessProb,
    pub storage: StorageSection,
    pub alice: ModuleSection,
    pub bob: ModuleSection,
}

/// Validated calibration with module models built.
#[derive(Clone, Debug)]
pub struct Calibration {
    /// File contents with every optional key filled in.
    pub file: CalibrationFile,
    pub alice: ModuleModel,
    pub bob: ModuleModel,
    pub alice_iswap: IswapErrorBudget,
    pub bob_iswap: IswapErrorBudget,
    pub warnings: Vec<String>,
}

const DEFAULT_LATENCY_US: f64 = 0.0;
const DEFAULT_NETWORK_PERIOD_US: f64 = 1.191;
const DEFAULT_MIXED_PERIOD_US: f64 = 2.4043;
const DEFAULT_READOUT_US: f64 = 500.0;
const DEFAULT_SINGLE_QUBIT_US: f64 = 5.0;
const DEFAULT_HYPERFINE_US: f64 = 250.0;
const DEFAULT_AUX_DEPHASING_MS: f64 = 2000.0;

fn default_dd_schedule() -> Vec<(f64, u32)> {
    vec![(0.0, 4), (20.0, 8), (60.0, 16), (1000.0, 32), (5000.0, 48)]
}

/// Provenance of every key, by dotted path (`alice.*` entries apply to both modules).
pub fn provenance() -> BTreeMap<&'static str, Provenance> {
    use Provenance::*;
    let mut p = BTreeMap::new();
    for (k, v) in [
        ("link.population_error", Measured),
        ("link.coherence_error", Derived),
        ("link.latency_us", Uncalibrated),
        ("schedule.attempt_window_us", Measured),
        ("schedule.doppler_window_us", Measured),
        ("schedule.eit_window_us", Measured),
        ("schedule.attempt_period_us", Derived),
        ("success_prob.sr_sr", Measured),
        ("success_prob.sr_ca", Derived),
        ("success_prob.ca_ca", Derived),
        ("success_prob.ghz3", Measured),
        ("success_prob.ghz4", Measured),
        ("storage.network_dephasing_ms", Derived),
        ("storage.network_t1_ms", Measured),
        ("storage.circuit_dephasing_ms", Derived),
        ("storage.auxiliary_dephasing_ms", Uncalibrated),
        ("storage.dd_schedule", Uncalibrated),
        ("module.prep_*", Measured),
        ("module.readout_*", Measured),
        ("module.clifford_error_*", Measured),
        ("module.cnot_fidelity", Measured),
        ("module.cnot_duration_us", Measured),
        ("module.iswap_fidelity", Measured),
        ("module.transfer_fidelity", Measured),
        ("module.detected_transfer_fidelity", Measured),
        ("module.detection_probability", Measured),
        ("module.hyperfine_transfer_error", Measured),
        ("module.sequence_aux_prep_error", Derived),
        ("module.readout_duration_us", Uncalibrated),
        ("module.single_qubit_duration_us", Uncalibrated),
        ("module.hyperfine_duration_us", Uncalibrated),
    ] {
        p.insert(k, v);
    }
    p
}

/// 1-based line of `key` inside `[section]`, for diagnostics.
fn locate(src: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, line) in src.lines().enumerate() {
        let t = line.trim();
        if let Some(rest) = t.strip_prefix('[') {
            current = rest.trim_end_matches(']').trim().to_string();
            continue;
        }
        if current == section && t.split('=').next().map(str::trim) == Some(key) {
            return Some(i + 1);
        }
    }
    None
}

struct Checker<'a> {
    src: &'a str,
}

impl Checker<'_> {
    fn fail(&self, section: &str, key: &str, msg: String) -> Error {
        match locate(self.src, section, key) {
            Some(line) => Error::Config(format!("line {line}: {section}.{key}: {msg}")),
            None => Error::Config(format!("{section}.{key}: {msg}")),
        }
    }

    fn prob(&self, section: &str, key: &str, v: f64, hi: f64) -> Result<()> {
        if !(0.0..hi).contains(&v) {
            return Err(self.fail(section, key, format!("value {v} out of range [0, {hi})")));
        }
        Ok(())
    }

    fn positive(&self, section: &str, key: &str, v: f64) -> Result<()> {
        if !(v > 0.0 && v.is_finite()) {
            return Err(self.fail(section, key, format!("value {v} must be positive")));
        }
        Ok(())
    }

    fn non_negative(&self, section: &str, key: &str, v: f64) -> Result<()> {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(self.fail(section, key, format!("value {v} must be non-negative")));
        }
        Ok(())
    }

    fn fidelity(&self, section: &str, key: &str, v: f64) -> Result<()> {
        if !(v > 0.5 && v <= 1.0) {
            return Err(self.fail(section, key, format!("fidelity {v} out of range (0.5, 1]")));
        }
        Ok(())
    }
}

fn fill<T: Copy>(slot: &mut Option<T>, default: T, key: &str, warnings: &mut Vec<String>) -> T {
    match slot {
        Some(v) => *v,
        None => {
            warnings.push(format!("{key} not set; using uncalibrated default"));
            *slot = Some(default);
            default
        }
    }
}

impl Calibration {
    pub fn default_shipped() -> Self {
        Self::from_toml_str(DEFAULT_CALIBRATION).expect("shipped calibration is valid")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path)?;
        Self::from_toml_str(&src)
    }

    pub fn from_toml_str(src: &str) -> Result<Self> {
        let mut file: CalibrationFile = toml::from_str(src).map_err(|e| Error::Config(e.to_string()))?;
        if file.version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported calibration version {} (expected {SCHEMA_VERSION})",
                file.version
            )));
        }
        let ck = Checker { src };
        let mut warnings = Vec::new();

        ck.prob("link", "population_error", file.link.population_error, 1.0)?;
        ck.prob("link", "coherence_error", file.link.coherence_error, 1.0)?;
        let latency = fill(&mut file.link.latency_us, DEFAULT_LATENCY_US, "link.latency_us", &mut warnings);
        ck.non_negative("link", "latency_us", latency)?;
        let link = RawLinkModel {
            population_error: file.link.population_error,
            coherence_error: file.link.coherence_error,
        };
        link.validate().map_err(|e| ck.fail("link", "coherence_error", e.to_string()))?;

        for (name, sec, default) in [
            ("network", &mut file.schedule.network, DEFAULT_NETWORK_PERIOD_US),
            ("mixed", &mut file.schedule.mixed, DEFAULT_MIXED_PERIOD_US),
        ] {
            let section = format!("schedule.{name}");
            ck.positive(&section, "attempt_window_us", sec.attempt_window_us)?;
            ck.positive(&section, "doppler_window_us", sec.doppler_window_us)?;
            ck.positive(&section, "eit_window_us", sec.eit_window_us)?;
            let period = fill(&mut sec.attempt_period_us, default, &format!("{section}.attempt_period_us"), &mut warnings);
            ck.positive(&section, "attempt_period_us", period)?;
        }

        let sp = &file.success_prob;
        for (key, v) in [
            ("sr_sr", sp.sr_sr),
            ("sr_ca", sp.sr_ca),
            ("ca_ca", sp.ca_ca),
            ("ghz3", sp.ghz3),
            ("ghz4", sp.ghz4),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(ck.fail("success_prob", key, format!("value {v} out of range (0, 1]")));
            }
        }

        let st = &mut file.storage;
        ck.positive("storage", "network_dephasing_ms", st.network_dephasing_ms)?;
        ck.positive("storage", "network_t1_ms", st.network_t1_ms)?;
        ck.positive("storage", "circuit_dephasing_ms", st.circuit_dephasing_ms)?;
        let aux_t = fill(
            &mut st.auxiliary_dephasing_ms,
            DEFAULT_AUX_DEPHASING_MS,
            "storage.auxiliary_dephasing_ms",
            &mut warnings,
        );
        ck.positive("storage", "auxiliary_dephasing_ms", aux_t)?;
        if st.dd_schedule.is_none() {
            warnings.push("storage.dd_schedule not set; using uncalibrated default".into());
            st.dd_schedule = Some(default_dd_schedule());
        }
        let dd = st.dd_schedule.clone().unwrap_or_default();
        if dd.windows(2).any(|w| w[1].0 <= w[0].0) || dd.iter().any(|(t, n)| *t < 0.0 || *n == 0) {
            return Err(ck.fail("storage", "dd_schedule", "entries must be ascending (duration_ms, pulses > 0)".into()));
        }
        let storage = StorageModel {
            dephasing_t_ms: PerRole {
                network: st.network_dephasing_ms,
                circuit: st.circuit_dephasing_ms,
                auxiliary: aux_t,
            },
            amp_damping_t1_ms: st.network_t1_ms,
            dd_schedule: dd,
        };

        let (alice, alice_iswap) = build_module(&ck, "alice", Node::Alice, &mut file.alice, &storage, &mut warnings)?;
        let (bob, bob_iswap) = build_module(&ck, "bob", Node::Bob, &mut file.bob, &storage, &mut warnings)?;
        for w in &warnings {
            log::warn!("{w}");
        }
        Ok(Self {
            file,
            alice,
            bob,
            alice_iswap,
            bob_iswap,
            warnings,
        })
    }

    /// Same schedules and rates with every error source switched off.
    pub fn noiseless(&self) -> Self {
        let mut out = self.clone();
        out.file.link.population_error = 0.0;
        out.file.link.coherence_error = 0.0;
        out.alice = ModuleModel::ideal(Node::Alice);
        out.bob = ModuleModel::ideal(Node::Bob);
        for (dst, src) in [(&mut out.alice, &self.alice), (&mut out.bob, &self.bob)] {
            dst.readout_duration_us = src.readout_duration_us;
            dst.single_qubit_duration_us = src.single_qubit_duration_us;
            dst.hyperfine_duration_us = src.hyperfine_duration_us;
            for (name, g) in &src.gates {
                if let Some(d) = dst.gates.get_mut(name) {
                    d.duration_us = g.duration_us;
                }
            }
        }
        out
    }

    pub fn link(&self) -> RawLinkModel {
        RawLinkModel {
            population_error: self.file.link.population_error,
            coherence_error: self.file.link.coherence_error,
        }
    }

    /// Readout model of each labelled qubit.
    pub fn readout_models(&self, labels: &[QubitLabel]) -> Vec<ReadoutErrorModel> {
        labels
            .iter()
            .map(|l| match *l {
                QubitLabel::Site { node, role } => self.module(node).readout.get(role),
                QubitLabel::Index(_) => ReadoutErrorModel::perfect(),
            })
            .collect()
    }

    pub fn latency_us(&self) -> f64 {
        self.file.link.latency_us.unwrap_or(DEFAULT_LATENCY_US)
    }

    pub fn module(&self, node: Node) -> &ModuleModel {
        match node {
            Node::Alice => &self.alice,
            Node::Bob => &self.bob,
        }
    }

    pub fn module_section(&self, node: Node) -> &ModuleSection {
        match node {
            Node::Alice => &self.file.alice,
            Node::Bob => &self.file.bob,
        }
    }

    pub fn success_prob(&self, kind: ExperimentKind) -> f64 {
        let sp = &self.file.success_prob;
        match kind {
            ExperimentKind::SrSr | ExperimentKind::StorageNet => sp.sr_sr,
            ExperimentKind::SrCa => sp.sr_ca,
            ExperimentKind::CaCa | ExperimentKind::StorageCir => sp.ca_ca,
            ExperimentKind::Ghz3 => sp.ghz3,
            ExperimentKind::Ghz4 => sp.ghz4,
        }
    }

    /// Attempt schedule and herald probability used by `kind`.
    pub fn schedule(&self, kind: ExperimentKind) -> ScheduleConfig {
        let sec = if kind.mixed_species() {
            &self.file.schedule.mixed
        } else {
            &self.file.schedule.network
        };
        ScheduleConfig {
            attempt_window_us: sec.attempt_window_us,
            doppler_window_us: sec.doppler_window_us,
            eit_window_us: sec.eit_window_us,
            attempt_period_us: sec.attempt_period_us.expect("filled during validation"),
            success_prob: self.success_prob(kind),
        }
    }

    pub fn iswap_targets(&self, node: Node) -> IswapTargets {
        iswap_targets(self.module_section(node))
    }

    /// Canonical serialization used for hashing.
    pub fn canonical_toml(&self) -> String {
        toml::to_string(&self.file).expect("calibration serializes")
    }
}

fn readout(v: [f64; 2]) -> Result<ReadoutErrorModel> {
    ReadoutErrorModel::new(v[0], v[1])
}

fn iswap_targets(m: &ModuleSection) -> IswapTargets {
    IswapTargets {
        gate_fidelity: m.iswap_fidelity,
        transfer_fidelity: m.transfer_fidelity,
        detected_transfer_fidelity: m.detected_transfer_fidelity,
        detection_probability: m.detection_probability,
        aux_prep_error: m.prep_auxiliary,
        readout: ReadoutErrorModel {
            eps0: m.readout_network[0],
            eps1: m.readout_network[1],
        },
    }
}

fn build_module(
    ck: &Checker,
    section: &str,
    node: Node,
    m: &mut ModuleSection,
    storage: &StorageModel,
    warnings: &mut Vec<String>,
) -> Result<(ModuleModel, IswapErrorBudget)> {
    for (key, v) in [
        ("prep_network", m.prep_network),
        ("prep_circuit", m.prep_circuit),
        ("prep_auxiliary", m.prep_auxiliary),
        ("sequence_aux_prep_error", m.sequence_aux_prep_error),
        ("readout_network", m.readout_network[0]),
        ("readout_network", m.readout_network[1]),
        ("readout_circuit", m.readout_circuit[0]),
        ("readout_circuit", m.readout_circuit[1]),
        ("readout_auxiliary", m.readout_auxiliary[0]),
        ("readout_auxiliary", m.readout_auxiliary[1]),
    ] {
        ck.prob(section, key, v, 0.5)?;
    }
    for (key, v) in [
        ("clifford_error_network", m.clifford_error_network),
        ("clifford_error_circuit", m.clifford_error_circuit),
        ("clifford_error_auxiliary", m.clifford_error_auxiliary),
        ("hyperfine_transfer_error", m.hyperfine_transfer_error),
    ] {
        // depolarizing strength 2r must stay a probability
        ck.prob(section, key, v, 0.5)?;
    }
    ck.prob(section, "detection_probability", m.detection_probability, 1.0)?;
    for (key, v) in [
        ("cnot_fidelity", m.cnot_fidelity),
        ("iswap_fidelity", m.iswap_fidelity),
        ("transfer_fidelity", m.transfer_fidelity),
        ("detected_transfer_fidelity", m.detected_transfer_fidelity),
    ] {
        ck.fidelity(section, key, v)?;
    }
    ck.non_negative(section, "cnot_duration_us", m.cnot_duration_us)?;
    let readout_us = fill(&mut m.readout_duration_us, DEFAULT_READOUT_US, &format!("{section}.readout_duration_us"), warnings);
    let sq_us = fill(
        &mut m.single_qubit_duration_us,
        DEFAULT_SINGLE_QUBIT_US,
        &format!("{section}.single_qubit_duration_us"),
        warnings,
    );
    let hf_us = fill(&mut m.hyperfine_duration_us, DEFAULT_HYPERFINE_US, &format!("{section}.hyperfine_duration_us"), warnings);
    for (key, v) in [
        ("readout_duration_us", readout_us),
        ("single_qubit_duration_us", sq_us),
        ("hyperfine_duration_us", hf_us),
    ] {
        ck.non_negative(section, key, v)?;
    }

    let budget = IswapErrorBudget::solve(&iswap_targets(m)).map_err(|e| ck.fail(section, "iswap_fidelity", e.to_string()))?;
    let mut gate_set = BTreeMap::new();
    gate_set.insert(
        "cnot".to_string(),
        GateSpec::new("cnot", gates::cnot(), m.cnot_duration_us, m.cnot_fidelity, NoiseKind::DepolarizingAfter)?,
    );
    // two entangling gates per iSWAP
    gate_set.insert(
        "iswap".to_string(),
        GateSpec::new(
            "iswap",
            gates::iswap(),
            2.0 * m.cnot_duration_us,
            m.iswap_fidelity,
            NoiseKind::PauliAfter(budget.pauli_weights()),
        )?,
    );
    let model = ModuleModel {
        node,
        readout: PerRole {
            network: readout(m.readout_network)?,
            circuit: readout(m.readout_circuit)?,
            auxiliary: readout(m.readout_auxiliary)?,
        },
        prep: PerRole {
            network: PrepErrorModel::new(m.prep_network)?,
            circuit: PrepErrorModel::new(m.prep_circuit)?,
            auxiliary: PrepErrorModel::new(m.prep_auxiliary)?,
        },
        sequence_aux_prep: PrepErrorModel::new(m.sequence_aux_prep_error)?,
        gates: gate_set,
        storage: storage.clone(),
        hyperfine_transfer_error: m.hyperfine_transfer_error,
        hyperfine_duration_us: hf_us,
        single_qubit_error_per_clifford: PerRole {
            network: m.clifford_error_network,
            circuit: m.clifford_error_circuit,
            auxiliary: m.clifford_error_auxiliary,
        },
        single_qubit_duration_us: sq_us,
        readout_duration_us: readout_us,
    };
    Ok((model, budget))
}
