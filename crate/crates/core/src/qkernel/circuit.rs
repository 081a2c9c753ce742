use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest register the dense simulator accepts (2^24 amplitudes per state).
pub const MAX_QUBITS: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    H(usize),
    /// Phase gate diag(1, e^{iθ}) on a qubit.
    P(usize, f64),
    /// Controlled NOT, (control, target).
    CX(usize, usize),
}

impl Gate {
    pub fn inverse(self) -> Gate {
        match self {
            Gate::P(q, theta) => Gate::P(q, -theta),
            g => g,
        }
    }

    pub fn max_qubit(self) -> usize {
        match self {
            Gate::H(q) | Gate::P(q, _) => q,
            Gate::CX(c, t) => c.max(t),
        }
    }
}

/// Reverses the sequence and negates every phase.
pub fn inverse(gates: &[Gate]) -> Vec<Gate> {
    gates.iter().rev().map(|g| g.inverse()).collect()
}

/// Functions turning angles into phase-gate arguments (before the factor 2).
#[derive(Debug, Clone, Copy, Default)]
pub enum DataMap {
    /// Single qubit `x_i`; pair `(π - x_i)(π - x_j)`.
    #[default]
    PiComplement,
    Custom {
        single: fn(f64) -> f64,
        pair: fn(f64, f64) -> f64,
    },
}

impl DataMap {
    pub fn single(&self, x: f64) -> f64 {
        match self {
            DataMap::PiComplement => x,
            DataMap::Custom { single, .. } => single(x),
        }
    }

    pub fn pair(&self, a: f64, b: f64) -> f64 {
        match self {
            DataMap::PiComplement => (PI - a) * (PI - b),
            DataMap::Custom { pair, .. } => pair(a, b),
        }
    }
}

/// ZZ feature map with linear entanglement.
#[derive(Debug, Clone, Copy)]
pub struct FeatureMapSpec {
    pub n_qubits: usize,
    pub depth: usize,
    pub data_map: DataMap,
}

impl FeatureMapSpec {
    pub fn new(n_qubits: usize, depth: usize) -> Result<Self> {
        let spec = Self {
            n_qubits,
            depth,
            data_map: DataMap::PiComplement,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 || self.n_qubits > MAX_QUBITS {
            return Err(Error::invalid(format!(
                "n_qubits = {} outside 1..={MAX_QUBITS}",
                self.n_qubits
            )));
        }
        if self.depth == 0 {
            return Err(Error::invalid("feature map depth must be >= 1"));
        }
        Ok(())
    }

    /// Entangled pairs of one layer: (0,1), (1,2), ..., (n-2, n-1).
    pub fn entangler_pairs(&self) -> Vec<(usize, usize)> {
        (1..self.n_qubits).map(|j| (j - 1, j)).collect()
    }

    pub fn gates_per_layer(&self) -> usize {
        2 * self.n_qubits + 3 * (self.n_qubits - 1)
    }
}

/// Gate sequence for `U(x)`. Each layer applies H to every qubit, P(2 φ(x_i))
/// to each qubit, then for each linear pair (j, j+1) the block
/// CX(j, j+1) · P(2 φ(x_j, x_{j+1})) on j+1 · CX(j, j+1).
pub fn build_feature_map(x: &[f64], spec: &FeatureMapSpec) -> Result<Vec<Gate>> {
    spec.validate()?;
    if x.len() != spec.n_qubits {
        return Err(Error::DimensionMismatch {
            expected: spec.n_qubits,
            got: x.len(),
        });
    }
    if let Some(bad) = x.iter().find(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("non-finite angle {bad}")));
    }
    let n = spec.n_qubits;
    let mut gates = Vec::with_capacity(spec.depth * spec.gates_per_layer());
    for _ in 0..spec.depth {
        gates.extend((0..n).map(Gate::H));
        gates.extend((0..n).map(|i| Gate::P(i, 2.0 * spec.data_map.single(x[i]))));
        for (a, b) in spec.entangler_pairs() {
            gates.push(Gate::CX(a, b));
            gates.push(Gate::P(b, 2.0 * spec.data_map.pair(x[a], x[b])));
            gates.push(Gate::CX(a, b));
        }
    }
    Ok(gates)
}
