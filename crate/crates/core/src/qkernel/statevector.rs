use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;

use super::circuit::{Gate, MAX_QUBITS};
use crate::error::{Error, Result};

/// Dense state of `n` qubits. Basis index bit `q` is the value of qubit `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// |0...0⟩
    pub fn zero(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::invalid(format!(
                "n_qubits = {n_qubits} outside 1..={MAX_QUBITS}"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn apply(&mut self, gate: Gate) -> Result<()> {
        if gate.max_qubit() >= self.n_qubits {
            return Err(Error::invalid(format!(
                "gate {gate:?} addresses a qubit outside a {}-qubit register",
                self.n_qubits
            )));
        }
        match gate {
            Gate::H(q) => self.hadamard(q),
            Gate::P(q, theta) => self.phase(q, theta),
            Gate::CX(c, t) => {
                if c == t {
                    return Err(Error::invalid("CX control equals target"));
                }
                self.cnot(c, t)
            }
        }
        Ok(())
    }

    pub fn apply_all(&mut self, gates: &[Gate]) -> Result<()> {
        gates.iter().try_for_each(|&g| self.apply(g))
    }

    fn hadamard(&mut self, q: usize) {
        let mask = 1usize << q;
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                let (a, b) = (self.amps[i], self.amps[i | mask]);
                self.amps[i] = (a + b) * FRAC_1_SQRT_2;
                self.amps[i | mask] = (a - b) * FRAC_1_SQRT_2;
            }
        }
    }

    fn phase(&mut self, q: usize, theta: f64) {
        let mask = 1usize << q;
        let w = Complex64::from_polar(1.0, theta);
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & mask != 0 {
                *a *= w;
            }
        }
    }

    fn cnot(&mut self, c: usize, t: usize) {
        let (cm, tm) = (1usize << c, 1usize << t);
        for i in 0..self.amps.len() {
            if i & cm != 0 && i & tm == 0 {
                self.amps.swap(i, i | tm);
            }
        }
    }

    /// Draws `shots` computational-basis outcomes and returns how many were
    /// the all-zeros string.
    pub fn sample_zero_count<R: Rng + ?Sized>(&self, shots: u64, rng: &mut R) -> u64 {
        let mut cumulative = Vec::with_capacity(self.amps.len());
        let mut acc = 0.0;
        for a in &self.amps {
            acc += a.norm_sqr();
            cumulative.push(acc);
        }
        let total = acc;
        let mut zeros = 0;
        for _ in 0..shots {
            let u: f64 = rng.random::<f64>() * total;
            let outcome = cumulative
                .partition_point(|&c| c <= u)
                .min(self.amps.len() - 1);
            if outcome == 0 {
                zeros += 1;
            }
        }
        zeros
    }
}

/// Runs `gates` on |0...0⟩.
pub fn simulate(gates: &[Gate], n_qubits: usize) -> Result<StateVector> {
    let mut s = StateVector::zero(n_qubits)?;
    s.apply_all(gates)?;
    Ok(s)
}
