//! State tomography: measurement plans, likelihood reconstruction and parity analysis.

mod dataset;
pub mod dump;
mod fidelity;
mod mle;
mod parity;
pub mod settings;

pub use dataset::TomographyDataset;
pub use fidelity::{bipartite_fidelity, entanglement_fidelity, ghz_fidelity, EntanglementFidelity, EntanglementKind, BIPARTITE_RESTARTS};
pub use mle::{bootstrap_reconstruction, mle_from_terms, mle_reconstruct, LikelihoodTerms, MleOptions, MleTrace, ReconstructionResult, PROB_FLOOR};
pub use parity::{bootstrap_pst, estimate_parity_population, ParityPoint, ParityPopulationEstimate};
pub use settings::{build_povm, generate_settings, MeasurementSetting};
