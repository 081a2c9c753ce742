use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::circuit::{build_feature_map, inverse, FeatureMapSpec};
use super::statevector::{simulate, StateVector};
use crate::error::{Error, Result};
use crate::rng;

/// Feature-map state |φ(x)⟩ = U(x)|0⟩.
pub fn embed(x: &[f64], spec: &FeatureMapSpec) -> Result<StateVector> {
    simulate(&build_feature_map(x, spec)?, spec.n_qubits)
}

fn fidelity(a: &StateVector, b: &StateVector) -> f64 {
    a.inner(b).norm_sqr().min(1.0)
}

/// |⟨φ(x)|φ(x')⟩|² from two simulated statevectors.
pub fn kernel_exact(x: &[f64], x_prime: &[f64], spec: &FeatureMapSpec) -> Result<f64> {
    if x.len() != x_prime.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: x_prime.len(),
        });
    }
    Ok(fidelity(&embed(x, spec)?, &embed(x_prime, spec)?))
}

/// Final state of the inversion test: U†(x) U(x') |0⟩.
pub fn inversion_test_state(
    x: &[f64],
    x_prime: &[f64],
    spec: &FeatureMapSpec,
) -> Result<StateVector> {
    if x.len() != x_prime.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: x_prime.len(),
        });
    }
    let mut gates = build_feature_map(x_prime, spec)?;
    gates.extend(inverse(&build_feature_map(x, spec)?));
    simulate(&gates, spec.n_qubits)
}

/// Shot-sampled inversion test: frequency of the all-zeros outcome over
/// `shots` draws from the exact output distribution.
pub fn kernel_sampled(
    x: &[f64],
    x_prime: &[f64],
    spec: &FeatureMapSpec,
    shots: u64,
    seed: u64,
) -> Result<f64> {
    if shots == 0 {
        return Err(Error::invalid("shots must be >= 1"));
    }
    let state = inversion_test_state(x, x_prime, spec)?;
    let mut rng = rng::seeded(seed);
    Ok(state.sample_zero_count(shots, &mut rng) as f64 / shots as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KernelMode {
    Exact,
    Sampled { shots: u64 },
}

impl KernelMode {
    pub fn shots(&self) -> Option<u64> {
        match self {
            KernelMode::Exact => None,
            KernelMode::Sampled { shots } => Some(*shots),
        }
    }
}

impl std::fmt::Display for KernelMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            KernelMode::Exact => f.write_str("exact"),
            KernelMode::Sampled { .. } => f.write_str("sampled"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PsdRepair {
    None,
    /// `epsilon * I` was added to the matrix.
    Jitter {
        epsilon: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    pub data: DMatrix<f64>,
    pub mode: KernelMode,
    pub symmetric: bool,
    pub psd_repair: PsdRepair,
}

impl KernelMatrix {
    pub fn nrows(&self) -> usize {
        self.data.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.data.ncols()
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        if !self.symmetric {
            return Err(Error::invalid(
                "eigenvalues requested for a rectangular kernel matrix",
            ));
        }
        Ok(min_eigenvalue(&self.data))
    }
}

pub(crate) fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Pairwise kernel values between the rows of `a` and the rows of `b`
/// (`b = None` means a self-Gram of `a`, computed on the upper triangle and
/// mirrored). Entries are filled in parallel; exact results do not depend on
/// the schedule and sampled entries depend only on `(seed, row, col)`.
///
/// `psd_repair` only acts on sampled self-Grams with a negative eigenvalue.
pub fn gram_matrix(
    a: &DMatrix<f64>,
    b: Option<&DMatrix<f64>>,
    spec: &FeatureMapSpec,
    mode: KernelMode,
    seed: u64,
    psd_repair: bool,
) -> Result<KernelMatrix> {
    for m in std::iter::once(a).chain(b) {
        if m.ncols() != spec.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: spec.n_qubits,
                got: m.ncols(),
            });
        }
    }
    if let KernelMode::Sampled { shots: 0 } = mode {
        return Err(Error::invalid("shots must be >= 1"));
    }
    let rows_a = rows_of(a);
    let rows_b = b.map(rows_of);

    let states = |rows: &[Vec<f64>]| -> Result<Vec<StateVector>> {
        rows.par_iter().map(|x| embed(x, spec)).collect()
    };
    let states_a = states(&rows_a)?;
    let states_b = match &rows_b {
        Some(r) => Some(states(r)?),
        None => None,
    };

    let n_rows = rows_a.len();
    let n_cols = rows_b.as_ref().map_or(n_rows, Vec::len);
    let symmetric = b.is_none();
    let right = states_b.as_deref().unwrap_or(&states_a);
    let inverse_gates_a: Option<Vec<_>> = match mode {
        KernelMode::Exact => None,
        KernelMode::Sampled { .. } => Some(
            rows_a
                .iter()
                .map(|x| build_feature_map(x, spec).map(|g| inverse(&g)))
                .collect::<Result<_>>()?,
        ),
    };

    let entry = |i: usize, j: usize| -> Result<f64> {
        match mode {
            KernelMode::Exact => Ok(if symmetric && i == j {
                1.0
            } else {
                fidelity(&states_a[i], &right[j])
            }),
            KernelMode::Sampled { shots } => {
                // U†(a_i) applied to |φ(b_j)⟩
                let mut s = right[j].clone();
                s.apply_all(&inverse_gates_a.as_ref().expect("sampled mode")[i])?;
                let mut r = rng::entry_rng(seed, i, j);
                Ok(s.sample_zero_count(shots, &mut r) as f64 / shots as f64)
            }
        }
    };

    let row_values: Vec<Vec<f64>> = (0..n_rows)
        .into_par_iter()
        .map(|i| {
            let start = if symmetric { i } else { 0 };
            (start..n_cols)
                .map(|j| entry(i, j))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;

    let mut data = DMatrix::zeros(n_rows, n_cols);
    for (i, vals) in row_values.into_iter().enumerate() {
        let start = if symmetric { i } else { 0 };
        for (off, v) in vals.into_iter().enumerate() {
            let j = start + off;
            data[(i, j)] = v;
            if symmetric {
                data[(j, i)] = v;
            }
        }
    }

    let mut repair = PsdRepair::None;
    if psd_repair && symmetric && matches!(mode, KernelMode::Sampled { .. }) && n_rows > 0 {
        let lambda_min = min_eigenvalue(&data);
        if lambda_min < 0.0 {
            let epsilon = -lambda_min + 1e-10;
            for i in 0..n_rows {
                data[(i, i)] += epsilon;
            }
            repair = PsdRepair::Jitter { epsilon };
        }
    }

    Ok(KernelMatrix {
        data,
        mode,
        symmetric,
        psd_repair: repair,
    })
}

pub(crate) fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn self_kernel_is_one() {
        let spec = FeatureMapSpec::new(3, 2).unwrap();
        let x = [0.3, 2.2, 1.7];
        assert_abs_diff_eq!(kernel_exact(&x, &x, &spec).unwrap(), 1.0, epsilon = 1e-12);
        assert_eq!(kernel_sampled(&x, &x, &spec, 4096, 5).unwrap(), 1.0);
    }

    #[test]
    fn one_qubit_closed_form() {
        let spec = FeatureMapSpec::new(1, 1).unwrap();
        assert_abs_diff_eq!(
            kernel_exact(&[0.0], &[FRAC_PI_2], &spec).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        for (a, b) in [(0.1, 0.9), (2.0, 0.3), (PI, 0.0)] {
            let k = kernel_exact(&[a], &[b], &spec).unwrap();
            assert_abs_diff_eq!(k, (b - a).cos().powi(2), epsilon = 1e-12);
        }
        assert_eq!(
            kernel_sampled(&[0.0], &[FRAC_PI_2], &spec, 8192, 1).unwrap(),
            0.0
        );
    }

    #[test]
    fn symmetric_in_arguments() {
        let spec = FeatureMapSpec::new(4, 2).unwrap();
        let x = [0.1, 1.2, 2.3, 3.0];
        let y = [2.9, 0.4, 1.1, 0.2];
        let k1 = kernel_exact(&x, &y, &spec).unwrap();
        let k2 = kernel_exact(&y, &x, &spec).unwrap();
        assert_abs_diff_eq!(k1, k2, epsilon = 1e-12);
        assert!((0.0..=1.0).contains(&k1));
    }

    #[test]
    fn inversion_test_matches_overlap() {
        let spec = FeatureMapSpec::new(3, 2).unwrap();
        let x = [0.5, 1.5, 2.5];
        let y = [1.0, 0.2, 3.1];
        let s = inversion_test_state(&x, &y, &spec).unwrap();
        assert_abs_diff_eq!(
            s.probabilities()[0],
            kernel_exact(&x, &y, &spec).unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn sampled_is_seeded() {
        let spec = FeatureMapSpec::new(2, 2).unwrap();
        let (x, y) = ([0.5, 1.0], [1.3, 2.0]);
        let a = kernel_sampled(&x, &y, &spec, 1000, 42).unwrap();
        assert_eq!(a, kernel_sampled(&x, &y, &spec, 1000, 42).unwrap());
        assert!(kernel_sampled(&x, &y, &spec, 0, 42).is_err());
        assert!(kernel_sampled(&x, &[1.0], &spec, 10, 42).is_err());
    }

    fn sample_rows(n: usize, d: usize, salt: usize) -> DMatrix<f64> {
        DMatrix::from_fn(n, d, |r, c| {
            ((r * 31 + c * 17 + salt * 7) % 23) as f64 / 23.0 * PI
        })
    }

    #[test]
    fn exact_self_gram() {
        let spec = FeatureMapSpec::new(4, 2).unwrap();
        let a = sample_rows(3, 4, 0);
        let k = gram_matrix(&a, None, &spec, KernelMode::Exact, 0, false).unwrap();
        assert!(k.symmetric);
        assert_eq!(k.data, k.data.transpose());
        for i in 0..3 {
            assert_eq!(k.data[(i, i)], 1.0);
        }
        assert!(k.min_eigenvalue().unwrap() >= -1e-10);
        assert_eq!(k.psd_repair, PsdRepair::None);
    }

    #[test]
    fn identical_rows_give_unit_entry() {
        let spec = FeatureMapSpec::new(2, 2).unwrap();
        let a = DMatrix::from_row_slice(3, 2, &[0.4, 1.0, 2.0, 0.1, 0.4, 1.0]);
        let k = gram_matrix(&a, None, &spec, KernelMode::Exact, 0, false).unwrap();
        assert_abs_diff_eq!(k.data[(0, 2)], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn rectangular_matches_pointwise() {
        let spec = FeatureMapSpec::new(3, 2).unwrap();
        let a = sample_rows(2, 3, 1);
        let b = sample_rows(4, 3, 2);
        let k = gram_matrix(&a, Some(&b), &spec, KernelMode::Exact, 0, false).unwrap();
        assert_eq!(k.data.shape(), (2, 4));
        assert!(!k.symmetric);
        let ra = rows_of(&a);
        let rb = rows_of(&b);
        for i in 0..2 {
            for j in 0..4 {
                assert_abs_diff_eq!(
                    k.data[(i, j)],
                    kernel_exact(&ra[i], &rb[j], &spec).unwrap(),
                    epsilon = 1e-14
                );
            }
        }
        assert!(k.min_eigenvalue().is_err());
        let bad = DMatrix::zeros(2, 2);
        assert!(gram_matrix(&a, Some(&bad), &spec, KernelMode::Exact, 0, false).is_err());
    }

    #[test]
    fn sampled_self_gram_with_repair() {
        let spec = FeatureMapSpec::new(3, 2).unwrap();
        let a = sample_rows(12, 3, 3);
        let mode = KernelMode::Sampled { shots: 512 };
        let k = gram_matrix(&a, None, &spec, mode, 9, true).unwrap();
        assert!(k.min_eigenvalue().unwrap() >= 0.0);
        assert_eq!(k.data, k.data.transpose());
        let again = gram_matrix(&a, None, &spec, mode, 9, true).unwrap();
        assert_eq!(k, again);
        let raw = gram_matrix(&a, None, &spec, mode, 9, false).unwrap();
        assert!(raw.data.iter().all(|v| (0.0..=1.0).contains(v)));
        if let PsdRepair::Jitter { epsilon } = k.psd_repair {
            assert!(epsilon > 0.0);
            assert_abs_diff_eq!(k.data[(0, 0)], raw.data[(0, 0)] + epsilon, epsilon = 1e-15);
        }
    }

    #[test]
    fn sampled_entries_depend_only_on_index() {
        let spec = FeatureMapSpec::new(2, 2).unwrap();
        let a = sample_rows(5, 2, 4);
        let b = sample_rows(3, 2, 5);
        let mode = KernelMode::Sampled { shots: 256 };
        let full = gram_matrix(&a, Some(&b), &spec, mode, 3, false).unwrap();
        let top = gram_matrix(&a.rows(0, 2).into_owned(), Some(&b), &spec, mode, 3, false).unwrap();
        for i in 0..2 {
            for j in 0..3 {
                assert_eq!(full.data[(i, j)], top.data[(i, j)]);
            }
        }
    }
}
