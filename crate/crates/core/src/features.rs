//! Descriptor preprocessing: standardization, PCA or ANOVA reduction to N
//! features, and the linear map of features onto rotation angles in [0, π].
//!
//! Every transformer is fitted on training rows only and is immutable
//! afterwards; `apply`/`transform` are pure.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SVD};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::{ACTIVE, INACTIVE};
use crate::error::{Error, Result};

fn check_cols(expected: usize, x: &DMatrix<f64>) -> Result<()> {
    if x.ncols() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            got: x.ncols(),
        });
    }
    Ok(())
}

fn column_means(x: &DMatrix<f64>) -> Vec<f64> {
    let n = x.nrows() as f64;
    x.column_iter().map(|c| c.iter().sum::<f64>() / n).collect()
}

/// Per-column mean and population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Scaler {
    /// Columns whose spread is numerically zero; they scale to 0.
    pub fn zero_variance(&self) -> Vec<bool> {
        self.means
            .iter()
            .zip(&self.stds)
            .map(|(m, s)| *s <= 1e-12 * (1.0 + m.abs()))
            .collect()
    }
}

pub fn standardize_fit(x: &DMatrix<f64>) -> Result<Scaler> {
    if x.nrows() == 0 || x.ncols() == 0 {
        return Err(Error::invalid("cannot fit a scaler on an empty matrix"));
    }
    let means = column_means(x);
    let n = x.nrows() as f64;
    let stds = x
        .column_iter()
        .zip(&means)
        .map(|(c, m)| (c.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n).sqrt())
        .collect();
    Ok(Scaler { means, stds })
}

pub fn standardize_apply(s: &Scaler, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_cols(s.means.len(), x)?;
    let zero = s.zero_variance();
    Ok(DMatrix::from_fn(x.nrows(), x.ncols(), |r, c| {
        if zero[c] {
            0.0
        } else {
            (x[(r, c)] - s.means[c]) / s.stds[c]
        }
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    /// One unit-norm component per row, `n x n_original`.
    pub components: DMatrix<f64>,
    /// Variance along each component (denominator rows - 1), non-increasing.
    pub explained_variance: Vec<f64>,
    pub means: Vec<f64>,
}

/// Principal axes from the SVD of the centered matrix. Each component is
/// flipped so that its largest-magnitude entry is positive.
pub fn pca_fit(x: &DMatrix<f64>, n: usize) -> Result<PcaModel> {
    let (rows, cols) = x.shape();
    if rows < 2 {
        return Err(Error::invalid("PCA needs at least two rows"));
    }
    let max = (rows - 1).min(cols);
    if n == 0 || n > max {
        return Err(Error::invalid(format!(
            "PCA with {n} components on a {rows}x{cols} matrix (max {max})"
        )));
    }
    let means = column_means(x);
    let centered = DMatrix::from_fn(rows, cols, |r, c| x[(r, c)] - means[c]);
    let svd = SVD::new(centered, false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .total_cmp(&svd.singular_values[a])
            .then(a.cmp(&b))
    });

    let mut components = DMatrix::zeros(n, cols);
    let mut explained_variance = Vec::with_capacity(n);
    for (k, &src) in order.iter().take(n).enumerate() {
        let row = v_t.row(src);
        let pivot = row
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()).then(b.0.cmp(&a.0)))
            .map(|(_, v)| *v)
            .unwrap_or(1.0);
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        for c in 0..cols {
            components[(k, c)] = sign * row[c];
        }
        let s = svd.singular_values[src];
        explained_variance.push(s * s / (rows - 1) as f64);
    }
    Ok(PcaModel {
        components,
        explained_variance,
        means,
    })
}

pub fn pca_transform(m: &PcaModel, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_cols(m.means.len(), x)?;
    let centered = DMatrix::from_fn(x.nrows(), x.ncols(), |r, c| x[(r, c)] - m.means[c]);
    Ok(centered * m.components.transpose())
}

/// Maps reduced coordinates back to the (centered) original space.
pub fn pca_inverse(m: &PcaModel, z: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_cols(m.components.nrows(), z)?;
    Ok(z * &m.components)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaSelection {
    /// Selected column indices, best first.
    pub selected: Vec<usize>,
    /// F statistic for every original column; `+inf` when the within-class
    /// variance vanishes but the class means differ.
    #[serde(with = "f64_with_inf")]
    pub f_scores: Vec<f64>,
}

/// One-way ANOVA F statistic of a single column split into two groups.
pub fn anova_f(group_a: &[f64], group_b: &[f64]) -> f64 {
    let n = (group_a.len() + group_b.len()) as f64;
    let mean = |g: &[f64]| g.iter().sum::<f64>() / g.len() as f64;
    let (ma, mb) = (mean(group_a), mean(group_b));
    let grand = (group_a.iter().sum::<f64>() + group_b.iter().sum::<f64>()) / n;
    let ssb =
        group_a.len() as f64 * (ma - grand).powi(2) + group_b.len() as f64 * (mb - grand).powi(2);
    let ssw: f64 = group_a.iter().map(|v| (v - ma).powi(2)).sum::<f64>()
        + group_b.iter().map(|v| (v - mb).powi(2)).sum::<f64>();
    let k = 2.0;
    if ssw == 0.0 {
        return if ssb > 0.0 { f64::INFINITY } else { 0.0 };
    }
    (ssb / (k - 1.0)) / (ssw / (n - k))
}

/// Ranks columns by ANOVA F between the two classes and keeps the top `n`
/// (ties go to the lower column index).
pub fn anova_select(x: &DMatrix<f64>, y: &[i8], n: usize) -> Result<AnovaSelection> {
    if x.nrows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            got: y.len(),
        });
    }
    if n == 0 || n > x.ncols() {
        return Err(Error::invalid(format!(
            "cannot select {n} of {} columns",
            x.ncols()
        )));
    }
    let a_rows: Vec<usize> = (0..y.len()).filter(|&i| y[i] == ACTIVE).collect();
    let i_rows: Vec<usize> = (0..y.len()).filter(|&i| y[i] == INACTIVE).collect();
    if a_rows.len() < 2 || i_rows.len() < 2 {
        return Err(Error::ClassTooSmall(format!(
            "ANOVA needs two members per class, got {} actives and {} inactives",
            a_rows.len(),
            i_rows.len()
        )));
    }
    let f_scores: Vec<f64> = x
        .column_iter()
        .map(|col| {
            let a: Vec<f64> = a_rows.iter().map(|&r| col[r]).collect();
            let b: Vec<f64> = i_rows.iter().map(|&r| col[r]).collect();
            anova_f(&a, &b)
        })
        .collect();
    let mut order: Vec<usize> = (0..f_scores.len()).collect();
    order.sort_by(|&a, &b| f_scores[b].total_cmp(&f_scores[a]).then(a.cmp(&b)));
    order.truncate(n);
    Ok(AnovaSelection {
        selected: order,
        f_scores,
    })
}

pub fn anova_apply(sel: &AnovaSelection, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_cols(sel.f_scores.len(), x)?;
    Ok(x.select_columns(&sel.selected))
}

/// Per-column training range mapped linearly onto [0, `upper`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleScaler {
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
    #[serde(default = "default_upper")]
    pub upper: f64,
}

fn default_upper() -> f64 {
    PI
}

/// Angle scaling onto [0, π].
pub fn angle_fit(x: &DMatrix<f64>) -> Result<AngleScaler> {
    angle_fit_range(x, PI)
}

pub fn angle_fit_range(x: &DMatrix<f64>, upper: f64) -> Result<AngleScaler> {
    if x.nrows() == 0 {
        return Err(Error::invalid("cannot fit angles on an empty matrix"));
    }
    if !(upper > 0.0 && upper.is_finite()) {
        return Err(Error::invalid(format!(
            "angle upper bound {upper} must be > 0"
        )));
    }
    let mins = x
        .column_iter()
        .map(|c| c.iter().copied().fold(f64::INFINITY, f64::min))
        .collect();
    let maxs = x
        .column_iter()
        .map(|c| c.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .collect();
    Ok(AngleScaler { mins, maxs, upper })
}

/// Values outside the training range are clipped; a constant training column
/// maps everything to the midpoint.
pub fn angle_apply(a: &AngleScaler, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_cols(a.mins.len(), x)?;
    Ok(DMatrix::from_fn(x.nrows(), x.ncols(), |r, c| {
        let (lo, hi) = (a.mins[c], a.maxs[c]);
        if hi > lo {
            (a.upper * (x[(r, c)] - lo) / (hi - lo)).clamp(0.0, a.upper)
        } else {
            a.upper / 2.0
        }
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Selector {
    Pca,
    Anova,
}

impl std::fmt::Display for Selector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Selector::Pca => "pca",
            Selector::Anova => "anova",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Reducer {
    Pca(PcaModel),
    Anova(AnovaSelection),
}

/// Which rows a pipeline was fitted on: count plus a digest of their ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub n_rows: usize,
    pub ids_sha256: String,
}

impl Provenance {
    pub fn of_ids<S: AsRef<str>>(ids: &[S]) -> Self {
        let mut h = Sha256::new();
        for id in ids {
            h.update(id.as_ref().as_bytes());
            h.update([0u8]);
        }
        Self {
            n_rows: ids.len(),
            ids_sha256: hex::encode(h.finalize()),
        }
    }
}

/// standardize -> (PCA | ANOVA) -> angle scaling, fitted on one training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pipeline {
    pub scaler: Scaler,
    pub reducer: Reducer,
    pub angles: AngleScaler,
    pub fitted_on: Provenance,
}

impl Pipeline {
    /// Fits with angles on [0, π].
    pub fn fit<S: AsRef<str>>(
        x: &DMatrix<f64>,
        y: &[i8],
        ids: &[S],
        selector: Selector,
        n: usize,
    ) -> Result<Pipeline> {
        Self::fit_with_angle_max(x, y, ids, selector, n, PI)
    }

    pub fn fit_with_angle_max<S: AsRef<str>>(
        x: &DMatrix<f64>,
        y: &[i8],
        ids: &[S],
        selector: Selector,
        n: usize,
        angle_max: f64,
    ) -> Result<Pipeline> {
        let scaler = standardize_fit(x)?;
        let z = standardize_apply(&scaler, x)?;
        let reducer = match selector {
            Selector::Pca => Reducer::Pca(pca_fit(&z, n)?),
            Selector::Anova => Reducer::Anova(anova_select(&z, y, n)?),
        };
        let reduced = Self::reduce_with(&reducer, &z)?;
        let angles = angle_fit_range(&reduced, angle_max)?;
        Ok(Pipeline {
            scaler,
            reducer,
            angles,
            fitted_on: Provenance::of_ids(ids),
        })
    }

    fn reduce_with(reducer: &Reducer, z: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        match reducer {
            Reducer::Pca(m) => pca_transform(m, z),
            Reducer::Anova(s) => anova_apply(s, z),
        }
    }

    pub fn n_outputs(&self) -> usize {
        self.angles.mins.len()
    }

    /// Standardized and reduced features (the classical SVC input).
    pub fn reduce(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let z = standardize_apply(&self.scaler, x)?;
        Self::reduce_with(&self.reducer, &z)
    }

    /// Rotation angles in [0, `angles.upper`] (the quantum feature-map input).
    pub fn angles(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        angle_apply(&self.angles, &self.reduce(x)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Pipeline> {
        Ok(serde_json::from_str(s)?)
    }
}

/// JSON has no infinity; encode it as the string "inf".
pub(crate) mod f64_with_inf {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let repr: Vec<Repr> = v
            .iter()
            .map(|&x| {
                if x.is_finite() {
                    Repr::Num(x)
                } else if x > 0.0 {
                    Repr::Text("inf".into())
                } else {
                    Repr::Text("-inf".into())
                }
            })
            .collect();
        repr.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<Repr>::deserialize(d)?
            .into_iter()
            .map(|r| match r {
                Repr::Num(x) => Ok(x),
                Repr::Text(t) if t == "inf" => Ok(f64::INFINITY),
                Repr::Text(t) if t == "-inf" => Ok(f64::NEG_INFINITY),
                Repr::Text(t) => Err(serde::de::Error::custom(format!("bad number `{t}`"))),
            })
            .collect()
    }
}
