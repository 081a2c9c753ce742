//! Labeled molecule tables: CSV ingestion, class balancing and stratified
//! resampling.

use std::collections::HashSet;
use std::io::Read;
use std::path::Path;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::smiles::{self, DESCRIPTOR_NAMES};

pub const ACTIVE: i8 = 1;
pub const INACTIVE: i8 = -1;

/// Feature matrix (rows are molecules) with binary activity labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub ids: Vec<String>,
    pub feature_names: Vec<String>,
    pub features: DMatrix<f64>,
    /// `+1` active, `-1` inactive.
    pub labels: Vec<i8>,
    pub source: String,
}

impl LabeledDataset {
    pub fn new(
        ids: Vec<String>,
        feature_names: Vec<String>,
        features: DMatrix<f64>,
        labels: Vec<i8>,
        source: impl Into<String>,
    ) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: features.nrows(),
                got: labels.len(),
            });
        }
        if ids.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: labels.len(),
                got: ids.len(),
            });
        }
        if feature_names.len() != features.ncols() {
            return Err(Error::DimensionMismatch {
                expected: features.ncols(),
                got: feature_names.len(),
            });
        }
        if let Some(bad) = labels.iter().find(|&&l| l != ACTIVE && l != INACTIVE) {
            return Err(Error::invalid(format!("label {bad} is not +1 or -1")));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("feature matrix contains non-finite values"));
        }
        Ok(Self {
            ids,
            feature_names,
            features,
            labels,
            source: source.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn count(&self, label: i8) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    pub fn labels_f64(&self) -> Vec<f64> {
        self.labels.iter().map(|&l| l as f64).collect()
    }

    pub fn indices_of(&self, label: i8) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.labels[i] == label)
            .collect()
    }

    /// New dataset holding the given rows in the given order.
    pub fn select(&self, rows: &[usize]) -> LabeledDataset {
        LabeledDataset {
            ids: rows.iter().map(|&r| self.ids[r].clone()).collect(),
            feature_names: self.feature_names.clone(),
            features: self.features.select_rows(rows),
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
            source: self.source.clone(),
        }
    }

    /// Same rows, different feature matrix (e.g. after a transform).
    pub fn with_features(
        &self,
        names: Vec<String>,
        features: DMatrix<f64>,
    ) -> Result<LabeledDataset> {
        LabeledDataset::new(
            self.ids.clone(),
            names,
            features,
            self.labels.clone(),
            self.source.clone(),
        )
    }

    fn require_both_classes(&self) -> Result<()> {
        let a = self.count(ACTIVE);
        let i = self.count(INACTIVE);
        if a == 0 || i == 0 {
            let only = if a > 0 { "actives" } else { "inactives" };
            return Err(Error::SingleClass(only.into()));
        }
        Ok(())
    }
}

/// Which columns become features. Serialized as `"all"` or a list of names.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum FeatureColumns {
    /// Every column except the label, id and SMILES columns.
    #[default]
    All,
    Named(Vec<String>),
}

impl Serialize for FeatureColumns {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            FeatureColumns::All => s.serialize_str("all"),
            FeatureColumns::Named(names) => names.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for FeatureColumns {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Word(String),
            Names(Vec<String>),
        }
        match Raw::deserialize(d)? {
            Raw::Word(w) if w == "all" => Ok(FeatureColumns::All),
            Raw::Word(w) => Err(serde::de::Error::custom(format!(
                "expected \"all\" or a list of column names, got \"{w}\""
            ))),
            Raw::Names(n) => Ok(FeatureColumns::Named(n)),
        }
    }
}

/// Raw label strings mapped to `+1` and `-1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelMapping {
    pub active: Vec<String>,
    pub inactive: Vec<String>,
}

impl Default for LabelMapping {
    fn default() -> Self {
        Self {
            active: vec!["1".into()],
            inactive: vec!["0".into()],
        }
    }
}

impl LabelMapping {
    fn map(&self, raw: &str) -> Option<i8> {
        let raw = raw.trim();
        if self.active.iter().any(|a| a == raw) {
            Some(ACTIVE)
        } else if self.inactive.iter().any(|a| a == raw) {
            Some(INACTIVE)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadOptions {
    pub label_column: String,
    #[serde(default)]
    pub feature_columns: FeatureColumns,
    #[serde(default)]
    pub id_column: Option<String>,
    /// When set, the 16 native descriptors are computed from this column and
    /// appended to the features.
    #[serde(default)]
    pub smiles_column: Option<String>,
    #[serde(default)]
    pub labels: LabelMapping,
}

impl LoadOptions {
    pub fn new(label_column: impl Into<String>) -> Self {
        Self {
            label_column: label_column.into(),
            feature_columns: FeatureColumns::All,
            id_column: None,
            smiles_column: None,
            labels: LabelMapping::default(),
        }
    }
}

/// One rejected input row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectedRow {
    /// 1-based line number in the source file (header is line 1).
    pub line: u64,
    pub id: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LoadReport {
    pub rows_read: usize,
    pub rows_kept: usize,
    pub dropped_non_numeric: usize,
    pub dropped_non_finite: usize,
    pub dropped_smiles: usize,
    pub rejected: Vec<RejectedRow>,
}

impl LoadReport {
    pub fn dropped(&self) -> usize {
        self.dropped_non_numeric + self.dropped_non_finite + self.dropped_smiles
    }
}

pub fn load_csv(
    path: impl AsRef<Path>,
    opts: &LoadOptions,
) -> Result<(LabeledDataset, LoadReport)> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, &path.display().to_string(), opts)
}

/// Reads a labeled table from any reader; `source` is recorded as provenance.
pub fn read_csv<R: Read>(
    reader: R,
    source: &str,
    opts: &LoadOptions,
) -> Result<(LabeledDataset, LoadReport)> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };

    let label_idx = find(&opts.label_column)?;
    let id_idx = opts.id_column.as_deref().map(find).transpose()?;
    let smiles_idx = opts.smiles_column.as_deref().map(find).transpose()?;

    let feature_idx: Vec<usize> = match &opts.feature_columns {
        FeatureColumns::All => (0..headers.len())
            .filter(|&i| i != label_idx && Some(i) != id_idx && Some(i) != smiles_idx)
            .collect(),
        FeatureColumns::Named(names) => names.iter().map(|n| find(n)).collect::<Result<_>>()?,
    };
    let mut feature_names: Vec<String> = feature_idx.iter().map(|&i| headers[i].clone()).collect();
    if smiles_idx.is_some() {
        feature_names.extend(DESCRIPTOR_NAMES.iter().map(|s| s.to_string()));
    }
    let width = feature_names.len();

    let mut report = LoadReport::default();
    let mut ids = Vec::new();
    let mut labels = Vec::new();
    let mut values = Vec::new();
    let mut row_buf = Vec::with_capacity(width);

    for (n, rec) in rdr.records().enumerate() {
        let rec = rec?;
        report.rows_read += 1;
        let line = rec.position().map_or(n as u64 + 2, |p| p.line());
        let id = match id_idx {
            Some(i) => rec.get(i).unwrap_or_default().to_string(),
            None => format!("row{}", n + 1),
        };
        let raw_label = rec.get(label_idx).unwrap_or_default();
        let label = opts
            .labels
            .map(raw_label)
            .ok_or_else(|| Error::UnknownLabel {
                value: raw_label.to_string(),
                line,
            })?;

        row_buf.clear();
        let mut reject: Option<(String, &mut usize)> = None;
        for &i in &feature_idx {
            let cell = rec.get(i).unwrap_or_default();
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => row_buf.push(v),
                Ok(_) => {
                    reject = Some((
                        format!("non-finite value in `{}`", headers[i]),
                        &mut report.dropped_non_finite,
                    ));
                    break;
                }
                Err(_) => {
                    reject = Some((
                        format!("unparseable value `{cell}` in `{}`", headers[i]),
                        &mut report.dropped_non_numeric,
                    ));
                    break;
                }
            }
        }
        if reject.is_none() {
            if let Some(si) = smiles_idx {
                match smiles::descriptors_for(rec.get(si).unwrap_or_default()) {
                    Ok(d) => row_buf.extend_from_slice(&d.to_array()),
                    Err(e) => reject = Some((e.to_string(), &mut report.dropped_smiles)),
                }
            }
        }
        if let Some((reason, counter)) = reject {
            *counter += 1;
            report.rejected.push(RejectedRow { line, id, reason });
            continue;
        }

        ids.push(id);
        labels.push(label);
        values.extend_from_slice(&row_buf);
    }

    report.rows_kept = labels.len();
    let distinct: HashSet<i8> = labels.iter().copied().collect();
    if distinct.len() < 2 {
        let only = match distinct.iter().next() {
            Some(&ACTIVE) => "actives",
            Some(_) => "inactives",
            None => "no rows",
        };
        return Err(Error::SingleClass(only.into()));
    }

    let features = DMatrix::from_row_slice(labels.len(), width, &values);
    let ds = LabeledDataset::new(ids, feature_names, features, labels, source)?;
    Ok((ds, report))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BalanceMode {
    OneToOneDownsample,
    OneToSixPadding,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalancePolicy {
    /// Forces a mode; when absent the mode follows `active_threshold`.
    #[serde(default)]
    pub mode: Option<BalanceMode>,
    /// Targets with fewer actives than this are padded 1:6 instead of 1:1.
    #[serde(default = "default_threshold")]
    pub active_threshold: usize,
    #[serde(default = "default_padding_ratio")]
    pub padding_ratio: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_threshold() -> usize {
    30
}

fn default_padding_ratio() -> usize {
    6
}

impl Default for BalancePolicy {
    fn default() -> Self {
        Self {
            mode: None,
            active_threshold: default_threshold(),
            padding_ratio: default_padding_ratio(),
            seed: 0,
        }
    }
}

impl BalancePolicy {
    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    pub fn mode_for(&self, actives: usize) -> BalanceMode {
        self.mode.unwrap_or(if actives >= self.active_threshold {
            BalanceMode::OneToOneDownsample
        } else {
            BalanceMode::OneToSixPadding
        })
    }
}

/// Downsamples inactives to 1:1 (or 1:`padding_ratio` for targets under the
/// active threshold). Every active row is kept; output order is a seeded
/// shuffle.
pub fn balance(ds: &LabeledDataset, policy: &BalancePolicy) -> Result<LabeledDataset> {
    if policy.active_threshold == 0 {
        return Err(Error::invalid("active_threshold must be > 0"));
    }
    ds.require_both_classes()?;
    let actives = ds.indices_of(ACTIVE);
    let mut inactives = ds.indices_of(INACTIVE);
    let target = match policy.mode_for(actives.len()) {
        BalanceMode::OneToOneDownsample => actives.len(),
        BalanceMode::OneToSixPadding => actives.len() * policy.padding_ratio,
    };
    let mut rng = rng::seeded(policy.seed);
    inactives.shuffle(&mut rng);
    inactives.truncate(target);
    let mut rows: Vec<usize> = actives.into_iter().chain(inactives).collect();
    rows.shuffle(&mut rng);
    Ok(ds.select(&rows))
}

fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor() as usize
}

/// Per-class shuffled split; train takes `round(fraction * class size)` rows
/// of each class and the remainder goes to test.
pub fn stratified_split(
    ds: &LabeledDataset,
    train_fraction: f64,
    seed: u64,
) -> Result<(LabeledDataset, LabeledDataset)> {
    let (train, test) = stratified_split_indices(ds, train_fraction, seed)?;
    Ok((ds.select(&train), ds.select(&test)))
}

pub fn stratified_split_indices(
    ds: &LabeledDataset,
    train_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "train fraction {train_fraction} not in (0, 1)"
        )));
    }
    let mut rng = rng::seeded(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for label in [ACTIVE, INACTIVE] {
        let mut idx = ds.indices_of(label);
        let n_train = round_half_up(train_fraction * idx.len() as f64);
        if idx.len() < 2 || n_train == 0 || n_train == idx.len() {
            return Err(Error::ClassTooSmall(format!(
                "{} rows of class {label:+} cannot be split at fraction {train_fraction}",
                idx.len()
            )));
        }
        idx.shuffle(&mut rng);
        test.extend_from_slice(&idx[n_train..]);
        idx.truncate(n_train);
        train.extend(idx);
    }
    train.shuffle(&mut rng);
    test.shuffle(&mut rng);
    Ok((train, test))
}

/// A (train, validation) pair of row indices.
pub type Fold = (Vec<usize>, Vec<usize>);

/// Stratified k-fold: each class is shuffled and dealt round-robin into the
/// folds, so per-class fold sizes differ by at most one.
pub fn kfold(ds: &LabeledDataset, k: usize, seed: u64) -> Result<Vec<Fold>> {
    kfold_labels(&ds.labels, k, seed)
}

pub fn kfold_labels(labels: &[i8], k: usize, seed: u64) -> Result<Vec<Fold>> {
    if k < 2 {
        return Err(Error::invalid(format!("k = {k}, need at least 2 folds")));
    }
    let mut rng = rng::seeded(seed);
    let mut assignment = vec![0usize; labels.len()];
    for label in [ACTIVE, INACTIVE] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == label).collect();
        if idx.len() < k {
            return Err(Error::ClassTooSmall(format!(
                "{} rows of class {label:+} for {k} folds",
                idx.len()
            )));
        }
        idx.shuffle(&mut rng);
        for (pos, &row) in idx.iter().enumerate() {
            assignment[row] = pos % k;
        }
    }
    Ok((0..k)
        .map(|f| {
            let (val, train): (Vec<usize>, Vec<usize>) =
                (0..labels.len()).partition(|&i| assignment[i] == f);
            (train, val)
        })
        .collect())
}

/// Two isotropic Gaussian blobs in `dim` dimensions; the class means differ by
/// `separation` along a random unit direction. Used for synthetic checks.
pub fn gaussian_blobs(
    n_active: usize,
    n_inactive: usize,
    dim: usize,
    separation: f64,
    seed: u64,
) -> LabeledDataset {
    let mut rng = rng::seeded(seed);
    let mut dir: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
    let norm = dir
        .iter()
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt()
        .max(f64::MIN_POSITIVE);
    dir.iter_mut().for_each(|v| *v /= norm);

    let n = n_active + n_inactive;
    let mut values = Vec::with_capacity(n * dim);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let label = if i < n_active { ACTIVE } else { INACTIVE };
        let shift = 0.5 * separation * label as f64;
        for d in &dir {
            let z: f64 = StandardNormal.sample(&mut rng);
            values.push(z + shift * d);
        }
        labels.push(label);
    }
    let ids = (0..n).map(|i| format!("mol{i}")).collect();
    let names = (0..dim).map(|i| format!("f{i}")).collect();
    LabeledDataset::new(
        ids,
        names,
        DMatrix::from_row_slice(n, dim, &values),
        labels,
        format!("gaussian_blobs(seed={seed})"),
    )
    .expect("generated data is well formed")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(actives: usize, inactives: usize) -> LabeledDataset {
        let n = actives + inactives;
        let labels = (0..n)
            .map(|i| if i < actives { ACTIVE } else { INACTIVE })
            .collect();
        LabeledDataset::new(
            (0..n).map(|i| i.to_string()).collect(),
            vec!["x".into()],
            DMatrix::from_fn(n, 1, |r, _| r as f64),
            labels,
            "toy",
        )
        .unwrap()
    }

    fn read(text: &str) -> Result<(LabeledDataset, LoadReport)> {
        read_csv(text.as_bytes(), "inline", &LoadOptions::new("label"))
    }

    #[test]
    fn load_maps_labels() {
        let (ds, rep) = read("a,b,label\n1,2,1\n3,4,1\n5,6,0\n7,8,0\n").unwrap();
        assert_eq!(ds.len(), 4);
        assert_eq!(ds.labels, vec![1, 1, -1, -1]);
        assert_eq!(ds.feature_names, vec!["a", "b"]);
        assert_eq!(ds.features[(2, 1)], 6.0);
        assert_eq!(rep.dropped(), 0);
    }

    #[test]
    fn load_drops_nan_rows() {
        let (ds, rep) = read("a,label\n1,1\nNaN,1\n3,0\n4,0\n").unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(rep.dropped(), 1);
        assert_eq!(rep.dropped_non_finite, 1);
        assert_eq!(rep.rejected[0].line, 3);
        let (_, rep) = read("a,label\n1,1\nabc,1\n3,0\n,0\n").unwrap();
        assert_eq!(rep.dropped_non_numeric, 2);
    }

    #[test]
    fn load_rejects_single_class() {
        assert!(matches!(
            read("a,label\n1,1\n2,1\n"),
            Err(Error::SingleClass(_))
        ));
        assert!(matches!(read("a,label\n"), Err(Error::SingleClass(_))));
    }

    #[test]
    fn load_missing_column_and_bad_label() {
        let r = read_csv("a,y\n1,1\n".as_bytes(), "x", &LoadOptions::new("label"));
        assert!(matches!(r, Err(Error::MissingColumn(c)) if c == "label"));
        assert!(matches!(
            read("a,label\n1,1\n2,7\n"),
            Err(Error::UnknownLabel { line: 3, .. })
        ));
        let err = load_csv("/nonexistent/file.csv", &LoadOptions::new("label")).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn load_named_columns_ids_and_smiles() {
        let mut opts = LoadOptions::new("active");
        opts.id_column = Some("name".into());
        opts.smiles_column = Some("smiles".into());
        opts.feature_columns = FeatureColumns::Named(vec!["logp".into()]);
        opts.labels = LabelMapping {
            active: vec!["yes".into()],
            inactive: vec!["no".into()],
        };
        let text = "name,smiles,logp,junk,active\nm1,CCO,0.1,x,yes\nm2,C1CC,0.2,y,no\nm3,c1ccccc1,1.5,z,no\nm4,O=C=O,0.3,w,yes\n";
        let (ds, rep) = read_csv(text.as_bytes(), "t", &opts).unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.n_features(), 17);
        assert_eq!(ds.ids, vec!["m1", "m3", "m4"]);
        assert_eq!(ds.feature_names[1], "count_C");
        assert_eq!(ds.features[(0, 1)], 2.0);
        assert_eq!(rep.dropped_smiles, 1);
        assert!(rep.rejected[0].reason.contains("position 1"));
    }

    #[test]
    fn balance_one_to_one() {
        let out = balance(&toy(100, 5000), &BalancePolicy::default()).unwrap();
        assert_eq!(out.count(ACTIVE), 100);
        assert_eq!(out.count(INACTIVE), 100);
    }

    #[test]
    fn balance_padding() {
        let out = balance(&toy(17, 5000), &BalancePolicy::default()).unwrap();
        assert_eq!(out.count(ACTIVE), 17);
        assert_eq!(out.count(INACTIVE), 102);
        let out = balance(&toy(10, 40), &BalancePolicy::default()).unwrap();
        assert_eq!(out.count(ACTIVE), 10);
        assert_eq!(out.count(INACTIVE), 40);
    }

    #[test]
    fn balance_keeps_every_active_and_is_seeded() {
        let ds = toy(40, 300);
        let p = BalancePolicy::default().with_seed(3);
        let a = balance(&ds, &p).unwrap();
        let b = balance(&ds, &p).unwrap();
        assert_eq!(a, b);
        let mut active_ids: Vec<_> = a
            .ids
            .iter()
            .filter(|id| id.parse::<usize>().unwrap() < 40)
            .collect();
        active_ids.sort();
        active_ids.dedup();
        assert_eq!(active_ids.len(), 40);
        let c = balance(&ds, &p.with_seed(4)).unwrap();
        assert_ne!(a.ids, c.ids);
        assert!(balance(&toy(0, 5), &p).is_err());
    }

    #[test]
    fn split_counts() {
        let (tr, te) = stratified_split(&toy(10, 10), 0.8, 7).unwrap();
        assert_eq!((tr.count(ACTIVE), tr.count(INACTIVE)), (8, 8));
        assert_eq!((te.count(ACTIVE), te.count(INACTIVE)), (2, 2));
        let (tr2, te2) = stratified_split(&toy(10, 10), 0.8, 7).unwrap();
        assert_eq!(tr.ids, tr2.ids);
        assert_eq!(te.ids, te2.ids);
        let (tr, te) = stratified_split(&toy(4, 4), 0.5, 1).unwrap();
        assert_eq!((tr.count(ACTIVE), tr.count(INACTIVE)), (2, 2));
        assert_eq!((te.count(ACTIVE), te.count(INACTIVE)), (2, 2));
        // round half up: 0.5 * 5 = 2.5 -> 3 train
        let (tr, _) = stratified_split(&toy(5, 6), 0.5, 1).unwrap();
        assert_eq!(tr.count(ACTIVE), 3);
    }

    #[test]
    fn split_disjoint() {
        let ds = toy(13, 29);
        let (tr, te) = stratified_split_indices(&ds, 0.8, 11).unwrap();
        let a: HashSet<_> = tr.iter().collect();
        assert!(te.iter().all(|i| !a.contains(i)));
        assert_eq!(tr.len() + te.len(), ds.len());
    }

    #[test]
    fn split_too_small() {
        assert!(matches!(
            stratified_split(&toy(1, 10), 0.8, 0),
            Err(Error::ClassTooSmall(_))
        ));
        assert!(matches!(
            stratified_split(&toy(2, 10), 0.8, 0),
            Err(Error::ClassTooSmall(_))
        ));
        assert!(stratified_split(&toy(5, 10), 1.0, 0).is_err());
    }

    #[test]
    fn kfold_partitions() {
        let ds = toy(10, 10);
        let folds = kfold(&ds, 10, 3).unwrap();
        assert_eq!(folds.len(), 10);
        let mut all: Vec<usize> = Vec::new();
        for (train, val) in &folds {
            assert_eq!(val.len(), 2);
            assert_eq!(val.iter().filter(|&&i| ds.labels[i] == ACTIVE).count(), 1);
            assert_eq!(train.len() + val.len(), 20);
            all.extend(val);
        }
        all.sort();
        assert_eq!(all, (0..20).collect::<Vec<_>>());
        assert!(kfold(&toy(2, 2), 3, 0).is_err());
        assert!(kfold(&toy(5, 5), 1, 0).is_err());
    }

    #[test]
    fn kfold_uneven_sizes() {
        let ds = toy(7, 12);
        let folds = kfold(&ds, 3, 9).unwrap();
        for label in [ACTIVE, INACTIVE] {
            let sizes: Vec<usize> = folds
                .iter()
                .map(|(_, v)| v.iter().filter(|&&i| ds.labels[i] == label).count())
                .collect();
            let (mn, mx) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
            assert!(mx - mn <= 1);
        }
        assert_eq!(kfold(&ds, 3, 9).unwrap(), folds);
    }

    #[test]
    fn blobs_shape() {
        let ds = gaussian_blobs(100, 100, 6, 4.0, 1);
        assert_eq!(ds.len(), 200);
        assert_eq!(ds.n_features(), 6);
        assert_eq!(ds.count(ACTIVE), 100);
    }
}
