//! Ligand-based virtual screening with classical and quantum-kernel support
//! vector classifiers.
//!
//! The crate covers the whole workflow: SMILES parsing and structural
//! descriptors ([`smiles`]), dataset ingestion and class balancing
//! ([`dataset`]), standardization / PCA / ANOVA / angle encoding
//! ([`features`]), a dense statevector simulator for the ZZ feature map and
//! fidelity kernels ([`qkernel`]), an SMO dual solver with grid search
//! ([`svm`]) and the AUC-ROC experiment protocol ([`eval`]). The command-line
//! front end lives in [`cli`].

pub mod cli;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod features;
pub mod qkernel;
pub mod smiles;
pub mod svm;

mod rng;

pub use error::{Error, Result};

/// Library version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
