//! Exact statevector simulation for the shared N-qubit resource.

mod density;
mod measure;
mod state;

pub use density::DensityOperator;
pub use measure::{
    bits_to_index, index_to_bits, parity, MeasurementAngles, OutcomeDistribution, SharedState,
    PARITY_TOL,
};
pub use state::{
    canonical_direction, ghz_state, ghz_state_capped, orthogonalize, phi_basis_state,
    state_at_overlap_amp, state_at_trace_distance, Gate, PureState, DEFAULT_QUBIT_CAP, HADAMARD,
    SQRT_Z, VOTER_GATE,
};
