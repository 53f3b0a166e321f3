//! Labeled samples, CSV ingestion, z-score standardization, discretization
//! and stratified fold splitting.

use std::fmt;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::seed;

/// Binary class label, serialized as the integers `-1` and `1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    /// `-1`; in transient stability data this is the unstable class.
    Negative,
    /// `+1`; stable.
    Positive,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::Negative, Label::Positive];

    pub fn from_i64(v: i64) -> Option<Label> {
        match v {
            -1 => Some(Label::Negative),
            1 => Some(Label::Positive),
            _ => None,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Label::Negative => -1,
            Label::Positive => 1,
        }
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.as_i8())
    }

    pub fn other(self) -> Label {
        match self {
            Label::Negative => Label::Positive,
            Label::Positive => Label::Negative,
        }
    }

    /// Sign rule shared by every scorer: positive scores map to `+1`, ties and
    /// negative scores to `-1`.
    pub fn from_score(score: f64) -> Label {
        if score > 0.0 {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    pub(crate) fn index(self) -> usize {
        match self {
            Label::Negative => 0,
            Label::Positive => 1,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Negative => f.write_str("-1"),
            Label::Positive => f.write_str("+1"),
        }
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_i8(self.as_i8())
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = i64::deserialize(d)?;
        Label::from_i64(v).ok_or_else(|| serde::de::Error::custom(format!("label {v} is not -1 or 1")))
    }
}

/// Majority class of a label multiset; ties resolve to `-1`.
pub fn majority(counts: [usize; 2]) -> Label {
    if counts[1] > counts[0] {
        Label::Positive
    } else {
        Label::Negative
    }
}

pub fn class_counts<'a>(labels: impl IntoIterator<Item = &'a Label>) -> [usize; 2] {
    let mut c = [0usize; 2];
    for l in labels {
        c[l.index()] += 1;
    }
    c
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    pub index: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    /// Interior cut points, strictly ascending; empty until discretized.
    #[serde(default)]
    pub bin_edges: Vec<f64>,
}

impl FeatureSpec {
    fn from_column(name: String, index: usize, column: impl Iterator<Item = f64> + Clone) -> Self {
        let mut n = 0usize;
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        let mut sum = 0.0;
        for v in column.clone() {
            n += 1;
            min = min.min(v);
            max = max.max(v);
            sum += v;
        }
        let mean = sum / n as f64;
        let var = column.map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        FeatureSpec {
            name,
            index,
            min,
            max,
            mean,
            std: var.sqrt(),
            bin_edges: Vec::new(),
        }
    }

    pub fn n_bins(&self) -> usize {
        self.bin_edges.len() + 1
    }
}

/// Continuous samples with binary labels. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    specs: Vec<FeatureSpec>,
    rows: Vec<Vec<f64>>,
    labels: Vec<Label>,
}

impl Dataset {
    pub fn new(names: Vec<String>, rows: Vec<Vec<f64>>, labels: Vec<Label>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidConfig("dataset needs at least one row".into()));
        }
        if rows.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: rows.len(),
                found: labels.len(),
            });
        }
        let n = names.len();
        for r in &rows {
            if r.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: r.len(),
                });
            }
            if r.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("dataset row"));
            }
        }
        let specs = names
            .into_iter()
            .enumerate()
            .map(|(i, name)| FeatureSpec::from_column(name, i, rows.iter().map(move |r| r[i])))
            .collect();
        Ok(Dataset { specs, rows, labels })
    }

    pub fn specs(&self) -> &[FeatureSpec] {
        &self.specs
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn n_samples(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.specs.len()
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.specs.iter().map(|s| s.name.clone()).collect()
    }

    pub fn column(&self, i: usize) -> impl Iterator<Item = f64> + Clone + '_ {
        self.rows.iter().map(move |r| r[i])
    }

    pub fn class_counts(&self) -> [usize; 2] {
        class_counts(&self.labels)
    }

    /// Rows at `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        let rows = indices.iter().map(|&i| self.rows[i].clone()).collect();
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        Dataset::new(self.feature_names(), rows, labels)
    }

    /// Same rows with different labels.
    pub fn relabel(&self, labels: Vec<Label>) -> Result<Dataset> {
        Dataset::new(self.feature_names(), self.rows.clone(), labels)
    }

    /// Projects onto the named features, in the given order.
    pub fn select_features(&self, names: &[String]) -> Result<Dataset> {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| {
                self.specs
                    .iter()
                    .position(|s| &s.name == n)
                    .ok_or_else(|| Error::MissingColumn(n.clone()))
            })
            .collect::<Result<_>>()?;
        let rows = self
            .rows
            .iter()
            .map(|r| idx.iter().map(|&i| r[i]).collect())
            .collect();
        Dataset::new(names.to_vec(), rows, self.labels.clone())
    }

    /// Drops zero-variance features, returning the reduced dataset and the
    /// names that were removed.
    pub fn drop_constant_features(&self) -> Result<(Dataset, Vec<String>)> {
        let (keep, drop): (Vec<_>, Vec<_>) = self.specs.iter().partition(|s| s.std > 0.0);
        let keep: Vec<String> = keep.into_iter().map(|s| s.name.clone()).collect();
        let drop = drop.into_iter().map(|s| s.name.clone()).collect();
        Ok((self.select_features(&keep)?, drop))
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)?;
        Self::read_csv(file, path)
    }

    pub fn read_csv<R: std::io::Read>(reader: R, path: &Path) -> Result<Dataset> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_reader(reader);
        let headers = match rdr.headers() {
            Ok(h) if !h.is_empty() && !(h.len() == 1 && h[0].trim().is_empty()) => h.clone(),
            _ => {
                return Err(Error::EmptyFile {
                    path: path.to_path_buf(),
                })
            }
        };
        let width = headers.len();
        if headers[width - 1].trim() != "label" {
            return Err(Error::MissingColumn("label".into()));
        }
        let names: Vec<String> = headers
            .iter()
            .take(width - 1)
            .map(|s| s.trim().to_string())
            .collect();
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let line = rec.position().map_or(0, |p| p.line());
            if rec.len() != width {
                return Err(Error::RaggedRow {
                    line,
                    expected: width,
                    found: rec.len(),
                });
            }
            let mut row = Vec::with_capacity(width - 1);
            for (col, cell) in rec.iter().take(width - 1).enumerate() {
                let v: f64 = cell.trim().parse().map_err(|_| Error::NonNumeric {
                    line,
                    column: names[col].clone(),
                    value: cell.to_string(),
                })?;
                if !v.is_finite() {
                    return Err(Error::NonNumeric {
                        line,
                        column: names[col].clone(),
                        value: cell.to_string(),
                    });
                }
                row.push(v);
            }
            let raw = rec[width - 1].trim();
            let label = raw
                .parse::<i64>()
                .ok()
                .and_then(Label::from_i64)
                .ok_or_else(|| Error::InvalidLabel {
                    line,
                    value: raw.to_string(),
                })?;
            rows.push(row);
            labels.push(label);
        }
        if rows.is_empty() {
            return Err(Error::EmptyFile {
                path: path.to_path_buf(),
            });
        }
        Dataset::new(names, rows, labels)
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = self.feature_names();
        header.push("label".into());
        w.write_record(&header)?;
        for (row, label) in self.rows.iter().zip(&self.labels) {
            let mut rec: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            rec.push(label.as_i8().to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

/// Fitted z-score parameters, `f' = (f - mean) / std`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub feature_names: Vec<String>,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Standardizer {
    pub fn fit(ds: &Dataset) -> Result<Self> {
        if let Some(s) = ds.specs().iter().find(|s| s.std <= 0.0) {
            return Err(Error::ConstantFeature {
                name: s.name.clone(),
            });
        }
        Ok(Standardizer {
            feature_names: ds.feature_names(),
            means: ds.specs().iter().map(|s| s.mean).collect(),
            stds: ds.specs().iter().map(|s| s.std).collect(),
        })
    }

    pub fn apply_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    pub fn invert_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .enumerate()
            .map(|(i, &z)| self.invert(i, z))
            .collect()
    }

    pub fn invert(&self, feature: usize, z: f64) -> f64 {
        z * self.stds[feature] + self.means[feature]
    }

    /// Standardizes `ds`; its features are matched by name, so `ds` may carry
    /// extra columns.
    pub fn apply(&self, ds: &Dataset) -> Result<Dataset> {
        let ds = if ds.feature_names() == self.feature_names {
            ds.clone()
        } else {
            ds.select_features(&self.feature_names)?
        };
        let rows = ds.rows().iter().map(|r| self.apply_row(r)).collect();
        Dataset::new(self.feature_names.clone(), rows, ds.labels().to_vec())
    }
}

/// Fits z-score parameters on `ds` and returns the standardized copy.
pub fn zscore_fit_apply(ds: &Dataset) -> Result<(Dataset, Standardizer)> {
    let st = Standardizer::fit(ds)?;
    let out = st.apply(ds)?;
    Ok((out, st))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscretizeStrategy {
    #[default]
    EqualFrequency,
    EqualWidth,
}

/// Per-feature cut points. A value `v` falls in bin `#{edges <= v}`, so values
/// outside the fitted range clamp to the boundary bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discretizer {
    pub feature_names: Vec<String>,
    pub edges: Vec<Vec<f64>>,
}

impl Discretizer {
    pub fn fit(ds: &Dataset, bins_per_feature: usize, strategy: DiscretizeStrategy) -> Result<Self> {
        if bins_per_feature < 2 {
            return Err(Error::InvalidConfig(format!(
                "bins_per_feature must be >= 2, got {bins_per_feature}"
            )));
        }
        let edges = (0..ds.n_features())
            .map(|i| {
                let col: Vec<f64> = ds.column(i).collect();
                match strategy {
                    DiscretizeStrategy::EqualFrequency => equal_frequency_edges(&col, bins_per_feature),
                    DiscretizeStrategy::EqualWidth => equal_width_edges(&col, bins_per_feature),
                }
            })
            .collect();
        Ok(Discretizer {
            feature_names: ds.feature_names(),
            edges,
        })
    }

    pub fn n_bins(&self) -> Vec<usize> {
        self.edges.iter().map(|e| e.len() + 1).collect()
    }

    pub fn bin_value(&self, feature: usize, v: f64) -> u16 {
        self.edges[feature].partition_point(|&e| e <= v) as u16
    }

    pub fn bin_row(&self, row: &[f64]) -> Vec<u16> {
        row.iter()
            .enumerate()
            .map(|(i, &v)| self.bin_value(i, v))
            .collect()
    }

    pub fn transform(&self, ds: &Dataset) -> Result<DiscretizedDataset> {
        if ds.n_features() != self.edges.len() {
            return Err(Error::DimensionMismatch {
                expected: self.edges.len(),
                found: ds.n_features(),
            });
        }
        let specs = ds
            .specs()
            .iter()
            .zip(&self.edges)
            .map(|(s, e)| FeatureSpec {
                bin_edges: e.clone(),
                ..s.clone()
            })
            .collect();
        Ok(DiscretizedDataset {
            specs,
            bins: ds.rows().iter().map(|r| self.bin_row(r)).collect(),
            b: self.n_bins(),
            labels: ds.labels().to_vec(),
        })
    }
}

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

fn midpoint(a: f64, b: f64) -> f64 {
    a + (b - a) / 2.0
}

fn dedup_edges(mut edges: Vec<f64>) -> Vec<f64> {
    edges.dedup();
    edges
}

fn equal_frequency_edges(values: &[f64], bins: usize) -> Vec<f64> {
    let s = sorted(values);
    let n = s.len();
    // positions p with s[p-1] < s[p]
    let boundaries: Vec<usize> = (1..n).filter(|&p| s[p - 1] < s[p]).collect();
    if boundaries.len() < bins {
        return boundaries.iter().map(|&p| midpoint(s[p - 1], s[p])).collect();
    }
    let mut edges = Vec::with_capacity(bins - 1);
    for q in 1..bins {
        let target = q * n / bins;
        let j = boundaries.partition_point(|&p| p < target);
        let p = match (j.checked_sub(1).map(|i| boundaries[i]), boundaries.get(j)) {
            (Some(lo), Some(&hi)) => {
                if target - lo <= hi - target {
                    lo
                } else {
                    hi
                }
            }
            (Some(lo), None) => lo,
            (None, Some(&hi)) => hi,
            (None, None) => unreachable!("boundaries is nonempty"),
        };
        edges.push(midpoint(s[p - 1], s[p]));
    }
    dedup_edges(edges)
}

fn equal_width_edges(values: &[f64], bins: usize) -> Vec<f64> {
    let s = sorted(values);
    let (lo, hi) = (s[0], s[s.len() - 1]);
    if hi <= lo {
        return Vec::new();
    }
    let width = (hi - lo) / bins as f64;
    dedup_edges((1..bins).map(|q| lo + width * q as f64).collect())
}

/// Fits a discretizer on `ds` and applies it.
pub fn discretize(
    ds: &Dataset,
    bins_per_feature: usize,
    strategy: DiscretizeStrategy,
) -> Result<DiscretizedDataset> {
    Discretizer::fit(ds, bins_per_feature, strategy)?.transform(ds)
}

/// Nominal counterpart of a [`Dataset`]: one bin index per attribute.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedDataset {
    pub specs: Vec<FeatureSpec>,
    pub bins: Vec<Vec<u16>>,
    pub b: Vec<usize>,
    pub labels: Vec<Label>,
}

impl DiscretizedDataset {
    /// Builds a nominal dataset directly from bin indices.
    pub fn from_bins(
        names: Vec<String>,
        b: Vec<usize>,
        bins: Vec<Vec<u16>>,
        labels: Vec<Label>,
    ) -> Result<Self> {
        if bins.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: bins.len(),
                found: labels.len(),
            });
        }
        for row in &bins {
            if row.len() != b.len() {
                return Err(Error::DimensionMismatch {
                    expected: b.len(),
                    found: row.len(),
                });
            }
            if row.iter().zip(&b).any(|(&v, &bi)| usize::from(v) >= bi) {
                return Err(Error::InvalidConfig("bin index out of range".into()));
            }
        }
        let specs = names
            .into_iter()
            .enumerate()
            .map(|(i, name)| FeatureSpec {
                name,
                index: i,
                min: 0.0,
                max: (b[i] - 1) as f64,
                mean: 0.0,
                std: 0.0,
                bin_edges: (1..b[i]).map(|e| e as f64 - 0.5).collect(),
            })
            .collect();
        Ok(DiscretizedDataset {
            specs,
            bins,
            b,
            labels,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.bins.len()
    }

    pub fn n_attributes(&self) -> usize {
        self.b.len()
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.specs.iter().map(|s| s.name.clone()).collect()
    }

    pub fn subset(&self, indices: &[usize]) -> DiscretizedDataset {
        DiscretizedDataset {
            specs: self.specs.clone(),
            bins: indices.iter().map(|&i| self.bins[i].clone()).collect(),
            b: self.b.clone(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

/// Standardizer plus discretizer, serialized as the JSON sidecar next to
/// models and rule lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preprocessing {
    pub feature_names: Vec<String>,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    /// Cut points in standardized units, one list per feature.
    pub bin_edges: Vec<Vec<f64>>,
}

impl Preprocessing {
    pub fn new(standardizer: &Standardizer, discretizer: &Discretizer) -> Self {
        Preprocessing {
            feature_names: standardizer.feature_names.clone(),
            means: standardizer.means.clone(),
            stds: standardizer.stds.clone(),
            bin_edges: discretizer.edges.clone(),
        }
    }

    pub fn standardizer(&self) -> Standardizer {
        Standardizer {
            feature_names: self.feature_names.clone(),
            means: self.means.clone(),
            stds: self.stds.clone(),
        }
    }

    pub fn discretizer(&self) -> Discretizer {
        Discretizer {
            feature_names: self.feature_names.clone(),
            edges: self.bin_edges.clone(),
        }
    }
}

/// One cross-validation split; both index lists are ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
}

/// Stratified `k`-fold split of `labels`. Deterministic given `seed`.
pub fn stratified_kfold(labels: &[Label], k: usize, seed: u64) -> Result<Vec<Fold>> {
    if k < 2 {
        return Err(Error::BadFoldSpec(format!("k must be >= 2, got {k}")));
    }
    let mut rng = seed::rng(seed);
    let mut assignment = vec![0usize; labels.len()];
    let mut offset = 0usize;
    for class in Label::ALL {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.is_empty() {
            continue;
        }
        if members.len() < k {
            return Err(Error::BadFoldSpec(format!(
                "class {class} has {} members, fewer than k = {k}",
                members.len()
            )));
        }
        members.shuffle(&mut rng);
        for (pos, &i) in members.iter().enumerate() {
            assignment[i] = (offset + pos) % k;
        }
        offset = (offset + members.len()) % k;
    }
    Ok((0..k)
        .map(|f| {
            let (validation, train): (Vec<usize>, Vec<usize>) =
                (0..labels.len()).partition(|&i| assignment[i] == f);
            Fold { train, validation }
        })
        .collect())
}

/// Convenience wrapper over [`stratified_kfold`] for a dataset.
pub fn stratified_kfold_dataset(ds: &Dataset, k: usize, seed: u64) -> Result<Vec<Fold>> {
    stratified_kfold(ds.labels(), k, seed)
}
