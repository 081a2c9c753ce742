//! Independent reference implementations used to cross-check the library.
//! None of these call into `qvscreen` numerics.
#![allow(dead_code)]

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;

type CMat = DMatrix<Complex64>;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Full 2ⁿ × 2ⁿ matrix of a one-qubit gate acting on qubit `q`, built as a
/// Kronecker product (qubit 0 is the most significant factor here).
fn lift(g: &CMat, q: usize, n: usize) -> CMat {
    let mut m = CMat::from_element(1, 1, c(1.0));
    for k in 0..n {
        let f = if k == q {
            g.clone()
        } else {
            CMat::identity(2, 2)
        };
        m = m.kronecker(&f);
    }
    m
}

fn cnot(control: usize, target: usize, n: usize) -> CMat {
    let dim = 1 << n;
    let bit = |q: usize| 1usize << (n - 1 - q);
    let mut m = CMat::zeros(dim, dim);
    for col in 0..dim {
        let row = if col & bit(control) != 0 {
            col ^ bit(target)
        } else {
            col
        };
        m[(row, col)] = c(1.0);
    }
    m
}

fn hadamard() -> CMat {
    CMat::from_row_slice(
        2,
        2,
        &[
            c(FRAC_1_SQRT_2),
            c(FRAC_1_SQRT_2),
            c(FRAC_1_SQRT_2),
            c(-FRAC_1_SQRT_2),
        ],
    )
}

fn phase(theta: f64) -> CMat {
    CMat::from_row_slice(
        2,
        2,
        &[c(1.0), c(0.0), c(0.0), Complex64::from_polar(1.0, theta)],
    )
}

/// U(x) of the ZZ feature map as one dense matrix.
pub fn feature_map_unitary(x: &[f64], depth: usize) -> CMat {
    let n = x.len();
    let dim = 1 << n;
    let mut u = CMat::identity(dim, dim);
    for _ in 0..depth {
        let mut layer = CMat::identity(dim, dim);
        for q in 0..n {
            layer = lift(&hadamard(), q, n) * layer;
        }
        for q in 0..n {
            layer = lift(&phase(2.0 * x[q]), q, n) * layer;
        }
        for j in 0..n.saturating_sub(1) {
            let angle = 2.0 * (PI - x[j]) * (PI - x[j + 1]);
            layer = cnot(j, j + 1, n) * lift(&phase(angle), j + 1, n) * cnot(j, j + 1, n) * layer;
        }
        u = layer * u;
    }
    u
}

/// |⟨0|U†(x)U(x′)|0⟩|² from dense matrices.
pub fn dense_kernel(x: &[f64], x_prime: &[f64], depth: usize) -> f64 {
    let a = feature_map_unitary(x, depth);
    let b = feature_map_unitary(x_prime, depth);
    let amp = (a.adjoint() * b)[(0, 0)];
    amp.norm_sqr()
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn jacobi_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut a = m.clone();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[(p, q)].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * a[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = cs * akp - sn * akq;
                    a[(k, q)] = sn * akp + cs * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = cs * apk - sn * aqk;
                    a[(q, k)] = sn * apk + cs * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// AUC by counting every (positive, negative) pair; ties count ½.
pub fn pairwise_auc(y: &[i8], s: &[f64]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for i in (0..y.len()).filter(|&i| y[i] == 1) {
        for j in (0..y.len()).filter(|&j| y[j] != 1) {
            pairs += 1.0;
            if s[i] > s[j] {
                wins += 1.0;
            } else if s[i] == s[j] {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

/// One-way ANOVA F for two groups from the textbook sums of squares.
pub fn anova_f_direct(a: &[f64], b: &[f64]) -> f64 {
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let all: Vec<f64> = a.iter().chain(b).copied().collect();
    let grand = mean(&all);
    let ssb =
        a.len() as f64 * (mean(a) - grand).powi(2) + b.len() as f64 * (mean(b) - grand).powi(2);
    let ssw: f64 = a.iter().map(|v| (v - mean(a)).powi(2)).sum::<f64>()
        + b.iter().map(|v| (v - mean(b)).powi(2)).sum::<f64>();
    (ssb / 1.0) / (ssw / (all.len() as f64 - 2.0))
}

pub fn dual_value(q: &DMatrix<f64>, alpha: &[f64]) -> f64 {
    let n = alpha.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += alpha[i] * alpha[j] * q[(i, j)];
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

/// Exact maximum of the SVC dual by enumerating which coefficients sit at 0,
/// at C, or strictly inside; each free block is solved from its KKT system.
/// Requires `k` positive definite.
pub fn dual_max_by_active_sets(k: &DMatrix<f64>, y: &[f64], c: f64) -> f64 {
    let n = y.len();
    let q = DMatrix::from_fn(n, n, |i, j| y[i] * y[j] * k[(i, j)]);
    let mut best = f64::NEG_INFINITY;
    let patterns = 3usize.pow(n as u32);
    for code in 0..patterns {
        let mut state = vec![0u8; n];
        let mut r = code;
        for s in state.iter_mut() {
            *s = (r % 3) as u8;
            r /= 3;
        }
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 2).collect();
        let mut alpha: Vec<f64> = state
            .iter()
            .map(|&s| if s == 1 { c } else { 0.0 })
            .collect();
        let fixed_sum: f64 = (0..n).filter(|&i| state[i] == 1).map(|i| y[i] * c).sum();
        if free.is_empty() {
            if fixed_sum.abs() > 1e-12 {
                continue;
            }
        } else {
            let m = free.len();
            let mut sys = DMatrix::zeros(m + 1, m + 1);
            let mut rhs = nalgebra::DVector::zeros(m + 1);
            for (a, &i) in free.iter().enumerate() {
                for (b, &j) in free.iter().enumerate() {
                    sys[(a, b)] = q[(i, j)];
                }
                sys[(a, m)] = y[i];
                sys[(m, a)] = y[i];
                let bound_term: f64 = (0..n)
                    .filter(|&j| state[j] == 1)
                    .map(|j| q[(i, j)] * c)
                    .sum();
                rhs[a] = 1.0 - bound_term;
            }
            rhs[m] = -fixed_sum;
            let Some(sol) = sys.lu().solve(&rhs) else {
                continue;
            };
            if free
                .iter()
                .enumerate()
                .any(|(a, _)| sol[a] < -1e-12 || sol[a] > c + 1e-12)
            {
                continue;
            }
            for (a, &i) in free.iter().enumerate() {
                alpha[i] = sol[a].clamp(0.0, c);
            }
        }
        best = best.max(dual_value(&q, &alpha));
    }
    best
}

/// Maximum of the dual over a uniform grid of `steps + 1` values per
/// coefficient; the last coefficient is fixed by the equality constraint.
pub fn dual_max_by_grid(k: &DMatrix<f64>, y: &[f64], c: f64, steps: usize) -> f64 {
    let n = y.len();
    let q = DMatrix::from_fn(n, n, |i, j| y[i] * y[j] * k[(i, j)]);
    let mut best = f64::NEG_INFINITY;
    let mut idx = vec![0usize; n - 1];
    loop {
        let mut alpha: Vec<f64> = idx.iter().map(|&s| c * s as f64 / steps as f64).collect();
        let last = -y[n - 1] * alpha.iter().zip(y).map(|(a, yi)| a * yi).sum::<f64>();
        if (-1e-12..=c + 1e-12).contains(&last) {
            alpha.push(last.clamp(0.0, c));
            best = best.max(dual_value(&q, &alpha));
        }
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                return best;
            }
            idx[pos] += 1;
            if idx[pos] <= steps {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// Writes a labeled dataset as CSV with columns id, f0.., label (1/0).
pub fn write_dataset_csv(ds: &qvscreen::dataset::LabeledDataset, path: &std::path::Path) {
    let mut w = csv::Writer::from_path(path).unwrap();
    let mut header = vec!["id".to_string()];
    header.extend(ds.feature_names.iter().cloned());
    header.push("label".into());
    w.write_record(&header).unwrap();
    for r in 0..ds.len() {
        let mut rec = vec![ds.ids[r].clone()];
        rec.extend((0..ds.n_features()).map(|c| format!("{:?}", ds.features[(r, c)])));
        rec.push(if ds.labels[r] == 1 {
            "1".into()
        } else {
            "0".into()
        });
        w.write_record(&rec).unwrap();
    }
    w.flush().unwrap();
}
