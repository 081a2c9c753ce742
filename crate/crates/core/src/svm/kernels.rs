use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qkernel::{self, FeatureMapSpec, KernelMode};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KernelSpec {
    Linear,
    /// `(x·x' + offset)^degree`
    Polynomial {
        degree: u32,
        offset: f64,
    },
    /// `exp(-gamma |x - x'|²)`
    Rbf {
        gamma: f64,
    },
    /// Fidelity kernel of the ZZ feature map; inputs are angles.
    Quantum {
        depth: usize,
    },
    /// Kernel values supplied by the caller.
    Precomputed,
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Polynomial { degree, offset } => {
                if degree < 1 {
                    return Err(Error::invalid("polynomial degree must be >= 1"));
                }
                if !offset.is_finite() {
                    return Err(Error::invalid("polynomial offset must be finite"));
                }
            }
            KernelSpec::Rbf { gamma } if !(gamma > 0.0 && gamma.is_finite()) => {
                return Err(Error::invalid(format!("rbf gamma {gamma} must be > 0")));
            }
            KernelSpec::Quantum { depth: 0 } => {
                return Err(Error::invalid("quantum kernel depth must be >= 1"));
            }
            _ => {}
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            KernelSpec::Linear => "linear",
            KernelSpec::Polynomial { .. } => "poly",
            KernelSpec::Rbf { .. } => "rbf",
            KernelSpec::Quantum { .. } => "quantum",
            KernelSpec::Precomputed => "precomputed",
        }
    }

    pub fn gamma(&self) -> Option<f64> {
        match self {
            KernelSpec::Rbf { gamma } => Some(*gamma),
            _ => None,
        }
    }
}

impl std::fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            KernelSpec::Polynomial { degree, offset } => write!(f, "poly(d={degree},r={offset})"),
            KernelSpec::Rbf { gamma } => write!(f, "rbf(gamma={gamma})"),
            KernelSpec::Quantum { depth } => write!(f, "quantum(depth={depth})"),
            other => f.write_str(other.name()),
        }
    }
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Evaluates a classical kernel on one pair of vectors.
pub fn classical_kernel(spec: &KernelSpec, x: &[f64], x_prime: &[f64]) -> Result<f64> {
    if x.len() != x_prime.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: x_prime.len(),
        });
    }
    spec.validate()?;
    match *spec {
        KernelSpec::Linear => Ok(dot(x, x_prime)),
        KernelSpec::Polynomial { degree, offset } => {
            Ok((dot(x, x_prime) + offset).powi(degree as i32))
        }
        KernelSpec::Rbf { gamma } => {
            let d2: f64 = x.iter().zip(x_prime).map(|(a, b)| (a - b) * (a - b)).sum();
            Ok((-gamma * d2).exp())
        }
        KernelSpec::Quantum { .. } | KernelSpec::Precomputed => Err(Error::invalid(format!(
            "{} is not a classical kernel",
            spec.name()
        ))),
    }
}

/// Kernel matrix between rows of `a` and rows of `b` (`None`: `a` with itself).
/// Quantum kernels are evaluated exactly here; use [`qkernel::gram_matrix`]
/// directly for sampled estimates.
pub fn kernel_matrix(
    spec: &KernelSpec,
    a: &DMatrix<f64>,
    b: Option<&DMatrix<f64>>,
) -> Result<DMatrix<f64>> {
    if let Some(b) = b {
        if b.ncols() != a.ncols() {
            return Err(Error::DimensionMismatch {
                expected: a.ncols(),
                got: b.ncols(),
            });
        }
    }
    match *spec {
        KernelSpec::Quantum { depth } => {
            let fm = FeatureMapSpec::new(a.ncols(), depth)?;
            Ok(qkernel::gram_matrix(a, b, &fm, KernelMode::Exact, 0, false)?.data)
        }
        KernelSpec::Precomputed => Err(Error::invalid("precomputed kernels cannot be evaluated")),
        _ => {
            spec.validate()?;
            let ra = qkernel::rows_of(a);
            let rb = b.map(qkernel::rows_of);
            let right = rb.as_ref().unwrap_or(&ra);
            let rows: Vec<Vec<f64>> = ra
                .par_iter()
                .map(|x| {
                    right
                        .iter()
                        .map(|y| classical_kernel(spec, x, y))
                        .collect::<Result<_>>()
                })
                .collect::<Result<_>>()?;
            Ok(DMatrix::from_fn(ra.len(), right.len(), |i, j| rows[i][j]))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(
            classical_kernel(&KernelSpec::Rbf { gamma: 1.0 }, &[0.3, 2.0], &[0.3, 2.0]).unwrap(),
            1.0
        );
        assert_eq!(
            classical_kernel(&KernelSpec::Linear, &[1.0, 2.0], &[3.0, 4.0]).unwrap(),
            11.0
        );
        let poly = KernelSpec::Polynomial {
            degree: 2,
            offset: 1.0,
        };
        assert_eq!(
            classical_kernel(&poly, &[1.0, 0.0], &[1.0, 0.0]).unwrap(),
            4.0
        );
        let k = classical_kernel(&KernelSpec::Rbf { gamma: 0.5 }, &[0.0], &[2.0]).unwrap();
        assert!((k - (-2.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        assert!(classical_kernel(&KernelSpec::Linear, &[1.0], &[1.0, 2.0]).is_err());
        assert!(classical_kernel(&KernelSpec::Rbf { gamma: 0.0 }, &[1.0], &[1.0]).is_err());
        assert!(classical_kernel(
            &KernelSpec::Polynomial {
                degree: 0,
                offset: 0.0
            },
            &[1.0],
            &[1.0]
        )
        .is_err());
        assert!(classical_kernel(&KernelSpec::Precomputed, &[1.0], &[1.0]).is_err());
    }

    #[test]
    fn matrix_shapes() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let k = kernel_matrix(&KernelSpec::Linear, &a, None).unwrap();
        assert_eq!(k, &a * a.transpose());
        let b = DMatrix::from_row_slice(1, 2, &[2.0, 3.0]);
        let k = kernel_matrix(&KernelSpec::Linear, &a, Some(&b)).unwrap();
        assert_eq!(k.as_slice(), &[2.0, 3.0, 5.0]);
        let q = kernel_matrix(&KernelSpec::Quantum { depth: 2 }, &a, None).unwrap();
        assert_eq!(q[(0, 0)], 1.0);
        assert!(kernel_matrix(&KernelSpec::Linear, &a, Some(&DMatrix::zeros(1, 3))).is_err());
    }
}
