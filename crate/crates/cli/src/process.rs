//! Gate process tomography and network-to-auxiliary transfer metrics.

use qnet_core::proc::{
    avg_gate_fidelity, build_transfer_superop, diamond_proxy, gate_superop, monte_carlo_ed_metrics, reconstruct_process,
    simulate_process_data, EdMetrics, TransferAnalysis,
};
use qnet_core::qcore::{gates, CMatrix};
use qnet_core::tomo::MleOptions;
use qnet_core::{Node, Superoperator};
use serde::Serialize;

use crate::report::{tagged_table, Column, Tagged};
use crate::{CliError, CliResult, RunContext};

/// Published per-module numbers (fractions).
#[derive(Clone, Copy, Debug)]
pub struct ProcessReference {
    pub node: Node,
    pub cnot: f64,
    pub iswap: f64,
    pub transfer: f64,
    pub detected_transfer: f64,
    pub detection_probability: f64,
}

pub const REFERENCE: [ProcessReference; 2] = [
    ProcessReference {
        node: Node::Alice,
        cnot: 0.976,
        iswap: 0.959,
        transfer: 0.978,
        detected_transfer: 0.990,
        detection_probability: 0.028,
    },
    ProcessReference {
        node: Node::Bob,
        cnot: 0.980,
        iswap: 0.960,
        transfer: 0.979,
        detected_transfer: 0.990,
        detection_probability: 0.022,
    },
];

#[derive(Clone, Debug, Serialize)]
pub struct GateEstimate {
    pub gate: String,
    /// Average gate fidelity of the calibrated channel.
    pub model_fidelity: f64,
    /// Average gate fidelity of the reconstructed channel.
    pub estimated_fidelity: f64,
    /// Diamond-norm proxy between reconstructed and calibrated channels.
    pub distance: f64,
    pub iterations: usize,
    pub shots: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TransferMetrics {
    pub plain_fidelity: f64,
    pub detected: EdMetrics,
    /// Exact detection probability `1 - tr E(I/2)`.
    pub p_detect_exact: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct NodeProcessReport {
    pub node: Node,
    pub cnot: GateEstimate,
    pub iswap: GateEstimate,
    /// Transfer built from the calibrated iSWAP channel.
    pub transfer_model: TransferMetrics,
    /// Transfer built from the reconstructed iSWAP channel.
    pub transfer_estimated: TransferMetrics,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProcessReport {
    pub shots_per_configuration: usize,
    pub mc_samples: usize,
    pub nodes: Vec<NodeProcessReport>,
}

fn transfer_metrics(ctx: &RunContext, node: Node, s: &Superoperator, label: &str, mc: usize) -> CliResult<TransferMetrics> {
    let m = ctx.cal.module(node);
    let plain = build_transfer_superop(s, m.prep.auxiliary, None)?;
    let ed: TransferAnalysis = build_transfer_superop(s, m.prep.auxiliary, Some(m.readout.network))?;
    let detected = monte_carlo_ed_metrics(&ed, mc, &ctx.rng(label).derive(&node.to_string()))?;
    Ok(TransferMetrics {
        plain_fidelity: plain.fidelity,
        detected,
        p_detect_exact: ed.p_detect,
    })
}

fn gate_estimate(ctx: &RunContext, node: Node, gate: &str, ideal: &CMatrix, shots: usize) -> CliResult<(GateEstimate, Superoperator)> {
    let m = ctx.cal.module(node);
    let model = gate_superop(m, gate)?;
    let ro = [m.readout.network, m.readout.auxiliary];
    let mut rng = ctx.rng("process").derive(&format!("{node}-{gate}"));
    let data = simulate_process_data(&model, &ro, shots, &mut rng)?;
    let est = reconstruct_process(&data, &MleOptions::default())?;
    Ok((
        GateEstimate {
            gate: gate.into(),
            model_fidelity: avg_gate_fidelity(&model, ideal)?,
            estimated_fidelity: avg_gate_fidelity(&est.superop, ideal)?,
            distance: diamond_proxy(&est.superop, &model)?,
            iterations: est.trace.iterations,
            shots: data.total_shots(),
        },
        est.superop,
    ))
}

/// Closed-loop process tomography of both two-qubit gates on each module and
/// transfer metrics from the calibrated and the reconstructed iSWAP.
pub fn process(ctx: &RunContext, shots: usize, mc_samples: usize) -> CliResult<ProcessReport> {
    if shots == 0 {
        return Err(CliError::Infeasible("process tomography needs at least one shot per configuration".into()));
    }
    let mut nodes = Vec::new();
    for node in [Node::Alice, Node::Bob] {
        let (cnot, _) = gate_estimate(ctx, node, "cnot", &gates::cnot(), shots)?;
        let (iswap, s_est) = gate_estimate(ctx, node, "iswap", &gates::iswap(), shots)?;
        let s_model = gate_superop(ctx.cal.module(node), "iswap")?;
        nodes.push(NodeProcessReport {
            node,
            cnot,
            iswap,
            transfer_model: transfer_metrics(ctx, node, &s_model, "transfer-model", mc_samples)?,
            transfer_estimated: transfer_metrics(ctx, node, &s_est, "transfer-estimated", mc_samples)?,
        });
    }
    Ok(ProcessReport {
        shots_per_configuration: shots,
        mc_samples,
        nodes,
    })
}

impl ProcessReport {
    pub fn text(&self) -> CliResult<String> {
        let cols = [
            Column { header: "CNOT_%", decimals: 2 },
            Column { header: "iSWAP_%", decimals: 2 },
            Column { header: "transfer_%", decimals: 2 },
            Column { header: "ED_F_%", decimals: 2 },
            Column { header: "ED_p_%", decimals: 2 },
        ];
        let mut rows = Vec::new();
        for n in &self.nodes {
            let r = REFERENCE.iter().find(|r| r.node == n.node).expect("reference for every node");
            let pct = |x: f64| Some(Tagged::sim(100.0 * x, None));
            let pct_se = |x: f64, se: f64| Some(Tagged::sim(100.0 * x, Some(100.0 * se)));
            let refp = |x: f64| Some(Tagged::reference(100.0 * x, None));
            rows.push((
                format!("{}/model", n.node),
                vec![
                    pct(n.cnot.model_fidelity),
                    pct(n.iswap.model_fidelity),
                    pct(n.transfer_model.plain_fidelity),
                    pct_se(n.transfer_model.detected.f_bar, n.transfer_model.detected.f_se),
                    pct_se(n.transfer_model.detected.p_bar, n.transfer_model.detected.p_se),
                ],
            ));
            rows.push((
                format!("{}/tomography", n.node),
                vec![
                    pct(n.cnot.estimated_fidelity),
                    pct(n.iswap.estimated_fidelity),
                    pct(n.transfer_estimated.plain_fidelity),
                    pct_se(n.transfer_estimated.detected.f_bar, n.transfer_estimated.detected.f_se),
                    pct_se(n.transfer_estimated.detected.p_bar, n.transfer_estimated.detected.p_se),
                ],
            ));
            rows.push((
                format!("{}/reference", n.node),
                vec![
                    refp(r.cnot),
                    refp(r.iswap),
                    refp(r.transfer),
                    refp(r.detected_transfer),
                    refp(r.detection_probability),
                ],
            ));
        }
        let mut out = format!(
            "gate processes and transfer: {} shots per input/setting, {} Haar samples; [sim] simulated, [ref] published reference\n\n",
            self.shots_per_configuration, self.mc_samples
        );
        out.push_str(&tagged_table(&cols, &rows)?);
        out.push_str("\nreconstruction distance to calibrated channel (diamond proxy)\n");
        for n in &self.nodes {
            out.push_str(&format!(
                "  {}: cnot {:.4} ({} it), iswap {:.4} ({} it)\n",
                n.node, n.cnot.distance, n.cnot.iterations, n.iswap.distance, n.iswap.iterations
            ));
        }
        Ok(out)
    }
}
