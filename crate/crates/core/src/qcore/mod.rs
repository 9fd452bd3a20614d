//! Dense complex linear algebra for few-qubit states, channels and superoperators.

pub mod channel;
pub mod rng;
pub mod state;
pub mod superop;

pub use channel::{apply_channel, apply_unitary, embed, pauli_string, QuantumChannel};
pub use rng::RngStream;
pub use state::{
    c, fidelity_to_pure, gates, haar_sample, make_target_state, partial_trace, tensor, CMatrix, CVector,
    DensityMatrix, Node, PureState, QubitLabel, QubitRole, C64,
};
pub use superop::{kraus_to_superop, unravel, unvectorize, vectorize, Superoperator};
