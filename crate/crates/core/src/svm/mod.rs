//! Kernel support vector classification: classical kernels, an SMO dual
//! solver working on precomputed Gram matrices, and grid search.

mod grid;
mod kernels;
mod model;
mod smo;

pub use grid::{grid_search, Gamma, Grid, GridCell, GridResult, KernelKind};
pub use kernels::{classical_kernel, kernel_matrix, KernelSpec};
pub use model::{classify, decision_function, decision_values, TrainedSvcModel};
pub use smo::{
    dual_objective, kkt_violations, smo_train, smo_train_traced, BoxConvention, DualSolution,
    SmoParams, SUPPORT_FLOOR,
};
