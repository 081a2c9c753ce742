use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernels::{kernel_matrix, KernelSpec};
use super::model::decision_values;
use super::smo::{smo_train, SmoParams};
use crate::dataset::{kfold, LabeledDataset};
use crate::error::{Error, Result};
use crate::eval::roc_auc;

/// An RBF γ value, either fixed or `1 / n_features` of the training data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gamma {
    Value(f64),
    InverseFeatures,
}

impl Gamma {
    pub fn resolve(self, n_features: usize) -> f64 {
        match self {
            Gamma::Value(g) => g,
            Gamma::InverseFeatures => 1.0 / n_features.max(1) as f64,
        }
    }
}

impl Serialize for Gamma {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Gamma::Value(g) => s.serialize_f64(*g),
            Gamma::InverseFeatures => s.serialize_str("inverse_features"),
        }
    }
}

impl<'de> Deserialize<'de> for Gamma {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(g) => Ok(Gamma::Value(g)),
            Raw::Word(w) if w == "inverse_features" => Ok(Gamma::InverseFeatures),
            Raw::Word(w) => Err(serde::de::Error::custom(format!(
                "gamma must be a number or \"inverse_features\", got \"{w}\""
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KernelKind {
    Linear,
    Poly {
        degree: u32,
        #[serde(default = "default_offset")]
        offset: f64,
    },
    Rbf,
}

fn default_offset() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub c: Vec<f64>,
    pub gamma: Vec<Gamma>,
    pub kernels: Vec<KernelKind>,
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            c: vec![0.01, 0.1, 1.0, 10.0, 100.0, 1000.0],
            gamma: [1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0]
                .into_iter()
                .map(Gamma::Value)
                .chain([Gamma::InverseFeatures])
                .collect(),
            kernels: vec![
                KernelKind::Linear,
                KernelKind::Poly {
                    degree: 2,
                    offset: 1.0,
                },
                KernelKind::Poly {
                    degree: 3,
                    offset: 1.0,
                },
                KernelKind::Rbf,
            ],
        }
    }
}

impl Grid {
    /// A grid with exactly one cell.
    pub fn single(kernel: KernelSpec, c: f64) -> Result<Self> {
        let (kind, gamma) = match kernel {
            KernelSpec::Linear => (KernelKind::Linear, vec![]),
            KernelSpec::Polynomial { degree, offset } => {
                (KernelKind::Poly { degree, offset }, vec![])
            }
            KernelSpec::Rbf { gamma } => (KernelKind::Rbf, vec![Gamma::Value(gamma)]),
            other => return Err(Error::invalid(format!("{other} cannot be grid searched"))),
        };
        Ok(Self {
            c: vec![c],
            gamma,
            kernels: vec![kind],
        })
    }

    /// Concrete kernels, γ values resolved and de-duplicated.
    pub fn kernel_specs(&self, n_features: usize) -> Vec<KernelSpec> {
        let mut out: Vec<KernelSpec> = Vec::new();
        for kind in &self.kernels {
            match *kind {
                KernelKind::Linear => out.push(KernelSpec::Linear),
                KernelKind::Poly { degree, offset } => {
                    out.push(KernelSpec::Polynomial { degree, offset })
                }
                KernelKind::Rbf => {
                    for g in &self.gamma {
                        out.push(KernelSpec::Rbf {
                            gamma: g.resolve(n_features),
                        })
                    }
                }
            }
        }
        let mut unique = Vec::with_capacity(out.len());
        for s in out {
            if !unique.contains(&s) {
                unique.push(s);
            }
        }
        unique
    }

    pub fn validate(&self) -> Result<()> {
        if self.c.is_empty() || self.kernels.is_empty() {
            return Err(Error::invalid("grid needs at least one C and one kernel"));
        }
        if self.kernels.contains(&KernelKind::Rbf) && self.gamma.is_empty() {
            return Err(Error::invalid("rbf kernel in grid without gamma values"));
        }
        if let Some(c) = self.c.iter().find(|c| !(**c > 0.0 && c.is_finite())) {
            return Err(Error::invalid(format!("grid C value {c} must be > 0")));
        }
        for spec in self.kernel_specs(1) {
            spec.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub kernel: KernelSpec,
    pub c: f64,
    pub mean_auc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub kernel: KernelSpec,
    pub c: f64,
    pub mean_auc: f64,
    pub cells: Vec<GridCell>,
}

fn kind_rank(k: &KernelSpec) -> u8 {
    match k {
        KernelSpec::Rbf { .. } => 0,
        KernelSpec::Polynomial { .. } => 1,
        _ => 2,
    }
}

/// Ordering where `Less` means "preferred": higher AUC, then smaller C, then
/// rbf over poly over linear, then smaller γ (or degree).
fn preference(a: &GridCell, b: &GridCell) -> Ordering {
    let detail = |k: &KernelSpec| match *k {
        KernelSpec::Rbf { gamma } => (gamma, 0.0),
        KernelSpec::Polynomial { degree, offset } => (degree as f64, offset),
        _ => (0.0, 0.0),
    };
    let (da, db) = (detail(&a.kernel), detail(&b.kernel));
    b.mean_auc
        .total_cmp(&a.mean_auc)
        .then(a.c.total_cmp(&b.c))
        .then(kind_rank(&a.kernel).cmp(&kind_rank(&b.kernel)))
        .then(da.0.total_cmp(&db.0))
        .then(da.1.total_cmp(&db.1))
}

/// Cross-validated AUC-ROC over every (kernel, C) cell on stratified folds of
/// `train`; returns the preferred cell. Deterministic for a fixed seed.
pub fn grid_search(
    train: &LabeledDataset,
    grid: &Grid,
    folds: usize,
    seed: u64,
    params: &SmoParams,
) -> Result<GridResult> {
    grid.validate()?;
    let fold_idx = kfold(train, folds, seed)?;
    let y = train.labels_f64();
    let specs = grid.kernel_specs(train.n_features());

    let per_spec: Vec<Vec<GridCell>> = specs
        .par_iter()
        .map(|spec| {
            let k = kernel_matrix(spec, &train.features, None)?;
            let mut sums = vec![0.0; grid.c.len()];
            for (tr, va) in &fold_idx {
                let k_tr = k.select_rows(tr).select_columns(tr);
                let k_va = k.select_rows(va).select_columns(tr);
                let y_tr: Vec<f64> = tr.iter().map(|&i| y[i]).collect();
                let y_va: Vec<i8> = va.iter().map(|&i| train.labels[i]).collect();
                for (ci, &c) in grid.c.iter().enumerate() {
                    let sol = smo_train(&k_tr, &y_tr, c, params)?;
                    let scores = decision_values(&sol, &y_tr, &k_va)?;
                    sums[ci] += roc_auc(&y_va, &scores)?;
                }
            }
            Ok(grid
                .c
                .iter()
                .zip(sums)
                .map(|(&c, s)| GridCell {
                    kernel: *spec,
                    c,
                    mean_auc: s / fold_idx.len() as f64,
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    let cells: Vec<GridCell> = per_spec.into_iter().flatten().collect();
    let best = cells
        .iter()
        .min_by(|a, b| preference(a, b))
        .cloned()
        .ok_or_else(|| Error::invalid("empty grid"))?;
    Ok(GridResult {
        kernel: best.kernel,
        c: best.c,
        mean_auc: best.mean_auc,
        cells,
    })
}
