//! ZZ feature-map circuits, a dense statevector simulator and fidelity
//! kernels (exact overlap or shot-sampled inversion test).

mod circuit;
mod kernel;
pub mod qkm;
mod statevector;

pub use circuit::{build_feature_map, inverse, DataMap, FeatureMapSpec, Gate, MAX_QUBITS};
pub use kernel::{
    embed, gram_matrix, inversion_test_state, kernel_exact, kernel_sampled, KernelMatrix,
    KernelMode, PsdRepair,
};
pub use statevector::{simulate, StateVector};

pub(crate) use kernel::rows_of;
