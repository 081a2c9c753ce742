use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::kernels::{kernel_matrix, KernelSpec};
use super::smo::{smo_train, DualSolution, SmoParams};
use crate::error::{Error, Result};
use crate::features::Pipeline;

/// A trained binary SVC. Training vectors are kept so kernels against new
/// rows can be recomputed; they are absent for precomputed kernels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedSvcModel {
    pub solution: DualSolution,
    pub labels: Vec<f64>,
    pub kernel: KernelSpec,
    pub train_vectors: Option<DMatrix<f64>>,
    pub pipeline: Option<Pipeline>,
}

impl TrainedSvcModel {
    /// Fits on a precomputed square kernel matrix.
    pub fn fit_precomputed(
        k: &DMatrix<f64>,
        y: &[f64],
        c: f64,
        params: &SmoParams,
    ) -> Result<Self> {
        Ok(Self {
            solution: smo_train(k, y, c, params)?,
            labels: y.to_vec(),
            kernel: KernelSpec::Precomputed,
            train_vectors: None,
            pipeline: None,
        })
    }

    /// Builds the kernel matrix for `x` and fits.
    pub fn fit(
        kernel: KernelSpec,
        x: &DMatrix<f64>,
        y: &[f64],
        c: f64,
        params: &SmoParams,
    ) -> Result<Self> {
        let k = kernel_matrix(&kernel, x, None)?;
        Ok(Self {
            solution: smo_train(&k, y, c, params)?,
            labels: y.to_vec(),
            kernel,
            train_vectors: Some(x.clone()),
            pipeline: None,
        })
    }

    pub fn with_pipeline(mut self, p: Pipeline) -> Self {
        self.pipeline = Some(p);
        self
    }

    pub fn n_train(&self) -> usize {
        self.labels.len()
    }

    /// Scores for rows of `x` (already in the model's input space).
    pub fn score(&self, x: &DMatrix<f64>) -> Result<Vec<f64>> {
        let train = self
            .train_vectors
            .as_ref()
            .ok_or_else(|| Error::invalid("model has no stored training vectors"))?;
        let k = kernel_matrix(&self.kernel, x, Some(train))?;
        decision_function(self, &k)
    }

    pub fn predict(&self, x: &DMatrix<f64>) -> Result<Vec<i8>> {
        Ok(self.score(x)?.into_iter().map(classify).collect())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// score = Σ αᵢ yᵢ K(xᵢ, x) + b for each row of `k_test` (rows are test points,
/// columns are training points).
pub fn decision_function(model: &TrainedSvcModel, k_test: &DMatrix<f64>) -> Result<Vec<f64>> {
    decision_values(&model.solution, &model.labels, k_test)
}

pub fn decision_values(sol: &DualSolution, y: &[f64], k_test: &DMatrix<f64>) -> Result<Vec<f64>> {
    if k_test.ncols() != sol.alpha.len() {
        return Err(Error::DimensionMismatch {
            expected: sol.alpha.len(),
            got: k_test.ncols(),
        });
    }
    Ok((0..k_test.nrows())
        .map(|r| {
            sol.support
                .iter()
                .map(|&i| sol.alpha[i] * y[i] * k_test[(r, i)])
                .sum::<f64>()
                + sol.b
        })
        .collect())
}

/// Sign of a score; ties go to the inactive class.
pub fn classify(score: f64) -> i8 {
    if score > 0.0 {
        1
    } else {
        -1
    }
}
