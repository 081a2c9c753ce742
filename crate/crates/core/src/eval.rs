//! AUC-ROC and the repeated train/test protocol comparing classical and
//! quantum-kernel SVCs.

use std::collections::HashSet;
use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::{
    balance, kfold, stratified_split_indices, BalancePolicy, LabeledDataset, ACTIVE,
};
use crate::error::{Error, Result};
use crate::features::{Pipeline, Provenance, Selector};
use crate::qkernel::{gram_matrix, FeatureMapSpec, KernelMode};
use crate::rng::mix64;
use crate::svm::{
    decision_values, grid_search, kernel_matrix, smo_train, Grid, KernelSpec, SmoParams,
};

/// Area under the ROC curve via the Mann–Whitney statistic with midranks, so
/// tied scores count ½. `y` uses `+1` for actives and anything else for
/// inactives.
pub fn roc_auc(y: &[i8], scores: &[f64]) -> Result<f64> {
    if y.len() != scores.len() {
        return Err(Error::DimensionMismatch {
            expected: y.len(),
            got: scores.len(),
        });
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::invalid("NaN score"));
    }
    let n_pos = y.iter().filter(|&&l| l == ACTIVE).count();
    let n_neg = y.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        let only = if n_pos == 0 { "inactives" } else { "actives" };
        return Err(Error::SingleClass(only.into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    let mut pos_rank_sum = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        // 1-based ranks start+1 ..= end share their mean
        let midrank = (start + 1 + end) as f64 / 2.0;
        let pos_in_run = order[start..end]
            .iter()
            .filter(|&&i| y[i] == ACTIVE)
            .count();
        pos_rank_sum += midrank * pos_in_run as f64;
        start = end;
    }
    let u = pos_rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

/// Arithmetic mean and sample (n−1) standard deviation. The std of a single
/// value is 0; an empty slice gives `None`.
pub fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    Some((mean, std))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// Classical SVC with grid-searched kernel, γ and C.
    Csvc,
    /// Quantum-kernel SVC at C = 1.
    QsvcDefaultC,
    /// Quantum-kernel SVC at the C chosen by the classical grid search.
    QsvcTunedC,
}

impl Branch {
    pub const ALL: [Branch; 3] = [Branch::Csvc, Branch::QsvcDefaultC, Branch::QsvcTunedC];

    pub fn name(self) -> &'static str {
        match self {
            Branch::Csvc => "csvc",
            Branch::QsvcDefaultC => "qsvc_default_c",
            Branch::QsvcTunedC => "qsvc_tuned_c",
        }
    }

    /// How C was chosen, as written to results tables.
    pub fn c_policy(self) -> &'static str {
        match self {
            Branch::Csvc => "grid",
            Branch::QsvcDefaultC => "default",
            Branch::QsvcTunedC => "csvc_tuned",
        }
    }

    fn needs_grid(self) -> bool {
        matches!(self, Branch::Csvc | Branch::QsvcTunedC)
    }

    fn is_quantum(self) -> bool {
        !matches!(self, Branch::Csvc)
    }
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// How each repeat is divided into training and test rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Protocol {
    /// One stratified split per repeat.
    Holdout { train_fraction: f64 },
    /// Stratified k-fold per repeat; the repeat's AUC is the mean over folds.
    KFold { k: usize },
}

impl Default for Protocol {
    fn default() -> Self {
        Protocol::Holdout {
            train_fraction: 0.8,
        }
    }
}

/// One (selector, feature count) cell of an experiment, all branches included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellConfig {
    pub selector: Selector,
    pub n_features: usize,
    #[serde(default = "all_branches")]
    pub branches: Vec<Branch>,
    #[serde(default = "exact")]
    pub mode: KernelMode,
    #[serde(default = "two")]
    pub depth: usize,
    #[serde(default = "ten")]
    pub repeats: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub grid: Grid,
    #[serde(default = "five")]
    pub cv_folds: usize,
    #[serde(default)]
    pub balance: BalancePolicy,
    #[serde(default)]
    pub protocol: Protocol,
    /// Balance only the training rows; test rows keep the source class ratio.
    #[serde(default)]
    pub balance_after_split: bool,
    /// Shift sampled training Grams with a negative eigenvalue back to PSD.
    #[serde(default = "yes")]
    pub psd_repair: bool,
    #[serde(default)]
    pub smo: SmoParams,
    /// Upper end of the angle interval fed to the feature map.
    #[serde(default = "pi")]
    pub angle_max: f64,
}

fn pi() -> f64 {
    std::f64::consts::PI
}
fn all_branches() -> Vec<Branch> {
    Branch::ALL.to_vec()
}
fn exact() -> KernelMode {
    KernelMode::Exact
}
fn two() -> usize {
    2
}
fn five() -> usize {
    5
}
fn ten() -> usize {
    10
}
fn yes() -> bool {
    true
}

impl CellConfig {
    pub fn new(selector: Selector, n_features: usize) -> Self {
        Self {
            selector,
            n_features,
            branches: all_branches(),
            mode: KernelMode::Exact,
            depth: 2,
            repeats: 10,
            master_seed: 0,
            grid: Grid::default(),
            cv_folds: 5,
            balance: BalancePolicy::default(),
            protocol: Protocol::default(),
            balance_after_split: false,
            psd_repair: true,
            smo: SmoParams::default(),
            angle_max: pi(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::invalid(m));
        if self.n_features == 0 {
            return bad("n_features must be >= 1".into());
        }
        if self.branches.is_empty() {
            return bad("no branches selected".into());
        }
        if self.repeats == 0 {
            return bad("repeats must be >= 1".into());
        }
        if self.depth == 0 {
            return bad("depth must be >= 1".into());
        }
        if !(self.angle_max > 0.0 && self.angle_max.is_finite()) {
            return bad(format!("angle_max {} must be > 0", self.angle_max));
        }
        if self.mode.shots() == Some(0) {
            return bad("shots must be >= 1".into());
        }
        if self.branches.iter().any(|b| b.needs_grid()) {
            if self.cv_folds < 2 {
                return bad("cv_folds must be >= 2".into());
            }
            self.grid.validate()?;
        }
        match self.protocol {
            Protocol::Holdout { train_fraction }
                if !(train_fraction > 0.0 && train_fraction < 1.0) =>
            {
                bad(format!("train_fraction {train_fraction} not in (0, 1)"))
            }
            Protocol::KFold { k } if k < 2 => bad("protocol k must be >= 2".into()),
            _ => Ok(()),
        }
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(json))
    }
}

/// What happened to one branch in one repeat.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatOutcome {
    /// 1-based repeat index.
    pub repeat: usize,
    pub seed: u64,
    pub auc: Option<f64>,
    /// Set when the repeat failed; such repeats are excluded from the summary.
    pub error: Option<String>,
    /// Classical kernel picked by the grid search (CSVC only).
    pub kernel: Option<KernelSpec>,
    /// C used for training, averaged over folds in k-fold mode.
    pub c: Option<f64>,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub branch: Branch,
    pub selector: Selector,
    pub n_features: usize,
    pub mode: KernelMode,
    /// AUCs of the successful repeats, in repeat order.
    pub per_repeat_auc: Vec<f64>,
    pub mean_auc: Option<f64>,
    pub std_auc: Option<f64>,
    pub n_failed: usize,
    pub config_fingerprint: String,
    pub repeats: Vec<RepeatOutcome>,
}

impl ExperimentSummary {
    fn from_outcomes(
        branch: Branch,
        cfg: &CellConfig,
        fingerprint: &str,
        repeats: Vec<RepeatOutcome>,
    ) -> Self {
        let per_repeat_auc: Vec<f64> = repeats.iter().filter_map(|r| r.auc).collect();
        let stats = mean_std(&per_repeat_auc);
        Self {
            branch,
            selector: cfg.selector,
            n_features: cfg.n_features,
            mode: cfg.mode,
            n_failed: repeats.len() - per_repeat_auc.len(),
            mean_auc: stats.map(|s| s.0),
            std_auc: stats.map(|s| s.1),
            per_repeat_auc,
            config_fingerprint: fingerprint.to_string(),
            repeats,
        }
    }

    pub fn completed(&self) -> bool {
        self.n_failed == 0
    }
}

/// Distinct seeds for the stages of one repeat.
#[derive(Debug, Clone, Copy)]
struct StageSeeds {
    balance: u64,
    split: u64,
    grid: u64,
    gram_train: u64,
    gram_test: u64,
}

impl StageSeeds {
    fn new(seed: u64) -> Self {
        let s = |tag: u64| mix64(seed ^ mix64(tag));
        Self {
            balance: seed,
            split: s(1),
            grid: s(2),
            gram_train: s(3),
            gram_test: s(4),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct BranchScore {
    auc: f64,
    c: f64,
    kernel: Option<KernelSpec>,
}

/// Runs every branch of `cfg` for `cfg.repeats` repeats. Repeat `r` (1-based)
/// uses seed `master_seed + r`. Returns one summary per branch in the order
/// given by `cfg.branches`.
pub fn run_experiment(ds: &LabeledDataset, cfg: &CellConfig) -> Result<Vec<ExperimentSummary>> {
    cfg.validate()?;
    if cfg.n_features > ds.n_features() {
        return Err(Error::invalid(format!(
            "{} features requested, dataset has {}",
            cfg.n_features,
            ds.n_features()
        )));
    }
    let fingerprint = cfg.fingerprint();
    let runs: Vec<(u64, f64, std::result::Result<Vec<BranchScore>, String>)> = (1..=cfg.repeats)
        .into_par_iter()
        .map(|r| {
            let seed = cfg.master_seed.wrapping_add(r as u64);
            let t0 = Instant::now();
            let res = run_repeat(ds, cfg, StageSeeds::new(seed)).map_err(|e| e.to_string());
            (seed, t0.elapsed().as_secs_f64(), res)
        })
        .collect();

    Ok(cfg
        .branches
        .iter()
        .enumerate()
        .map(|(bi, &branch)| {
            let outcomes = runs
                .iter()
                .enumerate()
                .map(|(i, (seed, secs, res))| {
                    let (auc, error, kernel, c) = match res {
                        Ok(scores) => (
                            Some(scores[bi].auc),
                            None,
                            scores[bi].kernel,
                            Some(scores[bi].c),
                        ),
                        Err(e) => (None, Some(e.clone()), None, None),
                    };
                    RepeatOutcome {
                        repeat: i + 1,
                        seed: *seed,
                        auc,
                        error,
                        kernel,
                        c,
                        wall_time_s: *secs,
                    }
                })
                .collect();
            ExperimentSummary::from_outcomes(branch, cfg, &fingerprint, outcomes)
        })
        .collect())
}

/// (train, test) row indices of every evaluation split in one repeat, both
/// relative to `ds`.
fn evaluation_splits(
    ds: &LabeledDataset,
    cfg: &CellConfig,
    seed: u64,
) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    match cfg.protocol {
        Protocol::Holdout { train_fraction } => {
            Ok(vec![stratified_split_indices(ds, train_fraction, seed)?])
        }
        Protocol::KFold { k } => kfold(ds, k, seed),
    }
}

fn run_repeat(
    ds: &LabeledDataset,
    cfg: &CellConfig,
    seeds: StageSeeds,
) -> Result<Vec<BranchScore>> {
    let policy = cfg.balance.with_seed(seeds.balance);
    let pool = if cfg.balance_after_split {
        ds.clone()
    } else {
        balance(ds, &policy)?
    };
    let splits = evaluation_splits(&pool, cfg, seeds.split)?;

    let mut sums = vec![(0.0, 0.0); cfg.branches.len()];
    let mut kernels: Vec<Option<KernelSpec>> = vec![None; cfg.branches.len()];
    for (fold, (train_idx, test_idx)) in splits.iter().enumerate() {
        let mut train = pool.select(train_idx);
        if cfg.balance_after_split {
            train = balance(&train, &policy)?;
        }
        let test = pool.select(test_idx);
        let fold_seeds = StageSeeds {
            grid: seeds.grid.wrapping_add(fold as u64),
            gram_train: seeds.gram_train.wrapping_add(fold as u64),
            gram_test: seeds.gram_test.wrapping_add(fold as u64),
            ..seeds
        };
        let scores = train_and_score(&train, &test, cfg, fold_seeds)?;
        for (i, s) in scores.iter().enumerate() {
            sums[i].0 += s.auc;
            sums[i].1 += s.c;
            kernels[i] = s.kernel;
        }
    }
    let n = splits.len() as f64;
    Ok(sums
        .into_iter()
        .zip(kernels)
        .map(|((auc, c), kernel)| BranchScore {
            auc: auc / n,
            c: c / n,
            kernel,
        })
        .collect())
}

fn train_and_score(
    train: &LabeledDataset,
    test: &LabeledDataset,
    cfg: &CellConfig,
    seeds: StageSeeds,
) -> Result<Vec<BranchScore>> {
    let train_ids: HashSet<&str> = train.ids.iter().map(String::as_str).collect();
    if test.ids.iter().any(|id| train_ids.contains(id.as_str())) {
        return Err(Error::invalid(
            "a test row also appears in the training rows",
        ));
    }
    let pipeline = Pipeline::fit_with_angle_max(
        &train.features,
        &train.labels,
        &train.ids,
        cfg.selector,
        cfg.n_features,
        cfg.angle_max,
    )?;
    if pipeline.fitted_on != Provenance::of_ids(&train.ids) {
        return Err(Error::invalid(
            "pipeline was not fitted on the training rows",
        ));
    }
    let y_train = train.labels_f64();

    let tuned = if cfg.branches.iter().any(|b| b.needs_grid()) {
        let reduced = train.with_features(
            feature_names(cfg.n_features),
            pipeline.reduce(&train.features)?,
        )?;
        Some(grid_search(
            &reduced,
            &cfg.grid,
            cfg.cv_folds,
            seeds.grid,
            &cfg.smo,
        )?)
    } else {
        None
    };

    let quantum = if cfg.branches.iter().any(|b| b.is_quantum()) {
        let fm = FeatureMapSpec::new(cfg.n_features, cfg.depth)?;
        let a_train = pipeline.angles(&train.features)?;
        let a_test = pipeline.angles(&test.features)?;
        let k_train = gram_matrix(
            &a_train,
            None,
            &fm,
            cfg.mode,
            seeds.gram_train,
            cfg.psd_repair,
        )?;
        let k_test = gram_matrix(
            &a_test,
            Some(&a_train),
            &fm,
            cfg.mode,
            seeds.gram_test,
            false,
        )?;
        Some((k_train.data, k_test.data))
    } else {
        None
    };

    let fit_score = |k_tr: &DMatrix<f64>, k_te: &DMatrix<f64>, c: f64| -> Result<f64> {
        let sol = smo_train(k_tr, &y_train, c, &cfg.smo)?;
        roc_auc(&test.labels, &decision_values(&sol, &y_train, k_te)?)
    };

    cfg.branches
        .iter()
        .map(|&branch| match branch {
            Branch::Csvc => {
                let g = tuned.as_ref().expect("grid ran");
                let x_tr = pipeline.reduce(&train.features)?;
                let x_te = pipeline.reduce(&test.features)?;
                let k_tr = kernel_matrix(&g.kernel, &x_tr, None)?;
                let k_te = kernel_matrix(&g.kernel, &x_te, Some(&x_tr))?;
                Ok(BranchScore {
                    auc: fit_score(&k_tr, &k_te, g.c)?,
                    c: g.c,
                    kernel: Some(g.kernel),
                })
            }
            Branch::QsvcDefaultC | Branch::QsvcTunedC => {
                let (k_tr, k_te) = quantum.as_ref().expect("grams built");
                let c = match branch {
                    Branch::QsvcDefaultC => 1.0,
                    _ => tuned.as_ref().expect("grid ran").c,
                };
                Ok(BranchScore {
                    auc: fit_score(k_tr, k_te, c)?,
                    c,
                    kernel: None,
                })
            }
        })
        .collect()
}

fn feature_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("component_{i}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::gaussian_blobs;
    use crate::svm::KernelKind;

    #[test]
    fn auc_examples() {
        assert_eq!(
            roc_auc(&[1, 1, -1, -1], &[0.9, 0.8, 0.3, 0.1]).unwrap(),
            1.0
        );
        assert_eq!(
            roc_auc(&[1, 1, -1, -1], &[0.9, 0.2, 0.8, 0.1]).unwrap(),
            0.75
        );
        assert_eq!(roc_auc(&[1, -1, 1, -1], &[0.4; 4]).unwrap(), 0.5);
        assert_eq!(roc_auc(&[1, -1], &[0.0, 1.0]).unwrap(), 0.0);
    }

    #[test]
    fn auc_errors() {
        assert!(matches!(
            roc_auc(&[1, 1], &[0.1, 0.2]),
            Err(Error::SingleClass(_))
        ));
        assert!(roc_auc(&[1, -1], &[0.1]).is_err());
        assert!(roc_auc(&[1, -1], &[f64::NAN, 0.2]).is_err());
    }

    #[test]
    fn mean_std_values() {
        assert_eq!(mean_std(&[]), None);
        assert_eq!(mean_std(&[0.7]), Some((0.7, 0.0)));
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    fn small_cfg() -> CellConfig {
        CellConfig {
            repeats: 2,
            grid: Grid {
                c: vec![1.0, 10.0],
                gamma: vec![crate::svm::Gamma::InverseFeatures],
                kernels: vec![KernelKind::Linear, KernelKind::Rbf],
            },
            cv_folds: 3,
            ..CellConfig::new(Selector::Pca, 2)
        }
    }

    #[test]
    fn separable_blobs_score_perfectly() {
        let ds = gaussian_blobs(30, 30, 4, 14.0, 9);
        // a narrow angle interval keeps the ZZ kernel smooth enough to generalize
        let cfg = CellConfig {
            repeats: 1,
            angle_max: std::f64::consts::FRAC_PI_4,
            ..small_cfg()
        };
        let out = run_experiment(&ds, &cfg).unwrap();
        assert_eq!(out.len(), 3);
        for s in &out {
            assert_eq!(s.per_repeat_auc, vec![1.0], "{}", s.branch);
            assert!(s.completed());
        }
        assert_eq!(out[1].repeats[0].c, Some(1.0));
        assert!(out[0].repeats[0].kernel.is_some());
    }

    #[test]
    fn deterministic_and_consistent() {
        let ds = gaussian_blobs(20, 40, 5, 2.0, 3);
        let cfg = small_cfg();
        let a = run_experiment(&ds, &cfg).unwrap();
        let b = run_experiment(&ds, &cfg).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.per_repeat_auc, y.per_repeat_auc);
            let (m, s) = mean_std(&x.per_repeat_auc).unwrap();
            assert_eq!(x.mean_auc, Some(m));
            assert_eq!(x.std_auc, Some(s));
            assert!(x.per_repeat_auc.iter().all(|v| (0.0..=1.0).contains(v)));
            assert_eq!(x.repeats[1].seed, 2);
        }
    }

    #[test]
    fn failed_repeats_are_flagged() {
        // 3 actives cannot fill 3 CV folds after the 80/20 split
        let ds = gaussian_blobs(3, 30, 3, 4.0, 1);
        let cfg = CellConfig {
            branches: vec![Branch::Csvc],
            ..small_cfg()
        };
        let out = run_experiment(&ds, &cfg).unwrap();
        assert_eq!(out[0].n_failed, 2);
        assert_eq!(out[0].mean_auc, None);
        assert!(out[0].repeats[0].error.is_some());
    }

    #[test]
    fn kfold_and_sampled_modes() {
        let ds = gaussian_blobs(15, 15, 3, 10.0, 4);
        let cfg = CellConfig {
            branches: vec![Branch::QsvcDefaultC],
            mode: KernelMode::Sampled { shots: 2048 },
            protocol: Protocol::KFold { k: 3 },
            repeats: 1,
            angle_max: std::f64::consts::FRAC_PI_4,
            ..small_cfg()
        };
        let out = run_experiment(&ds, &cfg).unwrap();
        assert!(out[0].per_repeat_auc[0] > 0.9);
    }

    #[test]
    fn config_checks() {
        let ds = gaussian_blobs(10, 10, 2, 1.0, 0);
        assert!(run_experiment(&ds, &CellConfig::new(Selector::Anova, 3)).is_err());
        let bad = CellConfig {
            mode: KernelMode::Sampled { shots: 0 },
            ..CellConfig::new(Selector::Pca, 1)
        };
        assert!(bad.validate().is_err());
        let cfg = CellConfig::new(Selector::Pca, 2);
        assert_eq!(cfg.fingerprint(), cfg.clone().fingerprint());
        assert_ne!(
            cfg.fingerprint(),
            CellConfig {
                repeats: 3,
                ..cfg.clone()
            }
            .fingerprint()
        );
        let json = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<CellConfig>(&json).unwrap(), cfg);
        let minimal: CellConfig =
            serde_json::from_str(r#"{"selector":"anova","n_features":4}"#).unwrap();
        assert_eq!(minimal, CellConfig::new(Selector::Anova, 4));
    }
}
