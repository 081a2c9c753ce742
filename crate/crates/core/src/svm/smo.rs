//! Sequential minimal optimization for the C-SVC dual
//!
//!   max  Σ αᵢ − ½ Σᵢⱼ αᵢ αⱼ yᵢ yⱼ Kᵢⱼ   s.t.  0 ≤ αᵢ ≤ U,  Σ αᵢ yᵢ = 0
//!
//! with the maximal-violating-pair working set. The solver works on the
//! equivalent minimization of f(α) = ½ αᵀQα − eᵀα, Q = (yyᵀ) ∘ K, keeping the
//! gradient G = Qα − e up to date.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numeric floor for counting a coefficient as a support vector.
pub const SUPPORT_FLOOR: f64 = 1e-8;

/// Curvature used when a pair has non-positive curvature; the resulting
/// step is clipped to the box.
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BoxConvention {
    /// 0 ≤ αᵢ ≤ C
    #[default]
    Standard,
    /// 0 ≤ αᵢ ≤ 1/(2nC)
    InverseScaled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoParams {
    pub tol: f64,
    /// Iteration cap; `None` uses max(10⁷, 100 n).
    pub max_iter: Option<usize>,
    pub box_convention: BoxConvention,
}

impl Default for SmoParams {
    fn default() -> Self {
        Self {
            tol: 1e-3,
            max_iter: None,
            box_convention: BoxConvention::Standard,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    pub b: f64,
    pub c: f64,
    /// Box bound actually used for α.
    pub upper_bound: f64,
    /// Rows with α above [`SUPPORT_FLOOR`].
    pub support: Vec<usize>,
    /// Dual objective Σα − ½ αᵀQα.
    pub objective: f64,
    pub iterations: usize,
    /// False when the iteration cap was hit; the iterate is still returned.
    pub converged: bool,
}

/// Dual objective of `alpha` for kernel `k` and labels `y`.
pub fn dual_objective(k: &DMatrix<f64>, y: &[f64], alpha: &[f64]) -> f64 {
    let n = alpha.len();
    let mut quad = 0.0;
    for i in 0..n {
        if alpha[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            quad += alpha[i] * alpha[j] * y[i] * y[j] * k[(i, j)];
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

fn validate(k: &DMatrix<f64>, y: &[f64], c: f64) -> Result<()> {
    if k.nrows() != k.ncols() {
        return Err(Error::invalid(format!(
            "kernel matrix is {}x{}, not square",
            k.nrows(),
            k.ncols()
        )));
    }
    if y.len() != k.nrows() {
        return Err(Error::DimensionMismatch {
            expected: k.nrows(),
            got: y.len(),
        });
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::invalid(format!("C = {c} must be > 0")));
    }
    if y.iter().any(|&v| v != 1.0 && v != -1.0) {
        return Err(Error::invalid("labels must be +1 or -1"));
    }
    if k.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("kernel matrix has non-finite entries"));
    }
    Ok(())
}

pub fn smo_train(k: &DMatrix<f64>, y: &[f64], c: f64, params: &SmoParams) -> Result<DualSolution> {
    smo_train_traced(k, y, c, params, None)
}

/// As [`smo_train`], additionally pushing the dual objective after every
/// update into `trace`.
pub fn smo_train_traced(
    k: &DMatrix<f64>,
    y: &[f64],
    c: f64,
    params: &SmoParams,
    mut trace: Option<&mut Vec<f64>>,
) -> Result<DualSolution> {
    validate(k, y, c)?;
    if params.tol.is_nan() || params.tol <= 0.0 {
        return Err(Error::invalid("SMO tolerance must be > 0"));
    }
    let n = y.len();
    let upper = match params.box_convention {
        BoxConvention::Standard => c,
        BoxConvention::InverseScaled => 1.0 / (2.0 * n.max(1) as f64 * c),
    };
    let max_iter = params
        .max_iter
        .unwrap_or_else(|| 10_000_000usize.max(100 * n));

    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let q = |i: usize, j: usize| y[i] * y[j] * k[(i, j)];

    let in_up = |a: f64, yi: f64| (yi > 0.0 && a < upper) || (yi < 0.0 && a > 0.0);
    let in_low = |a: f64, yi: f64| (yi > 0.0 && a > 0.0) || (yi < 0.0 && a < upper);

    let mut iterations = 0;
    let mut converged = n == 0;
    while iterations < max_iter && n > 0 {
        // maximal violating pair
        let mut gmax = f64::NEG_INFINITY;
        let mut gmin = f64::INFINITY;
        let (mut i, mut j) = (usize::MAX, usize::MAX);
        for t in 0..n {
            let v = -y[t] * grad[t];
            if in_up(alpha[t], y[t]) && v > gmax {
                gmax = v;
                i = t;
            }
            if in_low(alpha[t], y[t]) && v < gmin {
                gmin = v;
                j = t;
            }
        }
        if i == usize::MAX || j == usize::MAX || gmax - gmin < params.tol {
            converged = true;
            break;
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let kii = k[(i, i)];
        let kjj = k[(j, j)];
        let kij = k[(i, j)];
        if y[i] != y[j] {
            let mut quad = kii + kjj - 2.0 * kij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > upper {
                    alpha[i] = upper;
                    alpha[j] = upper - diff;
                }
            } else if alpha[j] > upper {
                alpha[j] = upper;
                alpha[i] = upper + diff;
            }
        } else {
            let mut quad = kii + kjj - 2.0 * kij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > upper {
                if alpha[i] > upper {
                    alpha[i] = upper;
                    alpha[j] = sum - upper;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > upper {
                if alpha[j] > upper {
                    alpha[j] = upper;
                    alpha[i] = sum - upper;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        if di != 0.0 || dj != 0.0 {
            for (t, g) in grad.iter_mut().enumerate() {
                *g += q(t, i) * di + q(t, j) * dj;
            }
        }
        if let Some(tr) = trace.as_deref_mut() {
            tr.push(objective_from_grad(&alpha, &grad));
        }
    }

    let b = -rho(&alpha, &grad, y, upper);
    let support = (0..n).filter(|&t| alpha[t] > SUPPORT_FLOOR).collect();
    Ok(DualSolution {
        objective: objective_from_grad(&alpha, &grad),
        alpha,
        b,
        c,
        upper_bound: upper,
        support,
        iterations,
        converged,
    })
}

// αᵀQα = αᵀ(G + e)
fn objective_from_grad(alpha: &[f64], grad: &[f64]) -> f64 {
    alpha
        .iter()
        .zip(grad)
        .map(|(a, g)| a - 0.5 * a * (g + 1.0))
        .sum()
}

/// Offset ρ (decision = Σ αᵢyᵢKᵢ − ρ): mean of yᵢGᵢ over free coefficients,
/// or the midpoint of the feasible interval when none is free.
fn rho(alpha: &[f64], grad: &[f64], y: &[f64], upper: f64) -> f64 {
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut sum_free = 0.0;
    let mut n_free = 0usize;
    for t in 0..alpha.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= upper {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    if n_free > 0 {
        sum_free / n_free as f64
    } else if ub.is_finite() && lb.is_finite() {
        (ub + lb) / 2.0
    } else if ub.is_finite() {
        ub
    } else if lb.is_finite() {
        lb
    } else {
        0.0
    }
}

/// Rows whose margin yᵢf(xᵢ) violates the KKT conditions by more than `tol`.
pub fn kkt_violations(sol: &DualSolution, k: &DMatrix<f64>, y: &[f64], tol: f64) -> Vec<usize> {
    let n = y.len();
    (0..n)
        .filter(|&i| {
            let f: f64 = (0..n).map(|j| sol.alpha[j] * y[j] * k[(i, j)]).sum::<f64>() + sol.b;
            let m = y[i] * f;
            let a = sol.alpha[i];
            if a <= 0.0 {
                m < 1.0 - tol
            } else if a >= sol.upper_bound {
                m > 1.0 + tol
            } else {
                (m - 1.0).abs() > tol
            }
        })
        .collect()
}
