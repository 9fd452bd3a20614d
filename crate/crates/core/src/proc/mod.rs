//! Process tomography and state-transfer metrics.

mod tomography;
mod transfer;

pub use tomography::{
    all_settings, avg_gate_fidelity, cardinal_states, diamond_proxy, input_state, reconstruct_process, simulate_process_data,
    ProcessDataset, ProcessEstimate,
};
pub use transfer::{build_transfer_superop, monte_carlo_ed_metrics, EdMetrics, TransferAnalysis, MIN_MC_SAMPLES};

use crate::device::ModuleModel;
use crate::qcore::{kraus_to_superop, Superoperator};
use crate::Result;

/// Calibrated noisy process of a named gate.
pub fn gate_superop(module: &ModuleModel, gate: &str) -> Result<Superoperator> {
    Ok(kraus_to_superop(&module.gate(gate)?.noisy_channel()?))
}
