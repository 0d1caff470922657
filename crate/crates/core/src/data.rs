//! Dataset ingestion, validation, train/test splitting, and construction of
//! the centroid target matrix.
//!
//! Matrices are stored features x samples (d x n): each column is one sample.
//! CSV files are assumed to hold one sample per row by default; `transpose`
//! flips that before any other interpretation happens.

use std::path::Path;

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Which CSV column holds the class labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Name(String),
    Index(usize),
    Last,
}

impl LabelColumn {
    /// Parses "last", a non-negative integer, or a column name.
    pub fn parse(s: &str) -> LabelColumn {
        if s.eq_ignore_ascii_case("last") {
            LabelColumn::Last
        } else if let Ok(i) = s.parse::<usize>() {
            LabelColumn::Index(i)
        } else {
            LabelColumn::Name(s.to_string())
        }
    }
}

/// A validated column-major sample matrix with integer class labels.
#[derive(Debug, Clone)]
pub struct Dataset {
    features: Array2<f64>,
    labels: Vec<usize>,
    n_classes: usize,
    feature_names: Option<Vec<String>>,
    class_names: Option<Vec<String>>,
}

impl Dataset {
    /// Validates and wraps a d x n feature matrix with labels in 0..M-1.
    /// Every class must occur at least once and d >= 1, n >= M >= 2.
    pub fn new(
        features: Array2<f64>,
        labels: Vec<usize>,
        feature_names: Option<Vec<String>>,
        class_names: Option<Vec<String>>,
    ) -> Result<Self> {
        let (d, n) = features.dim();
        if labels.len() != n {
            return Err(Error::Dim(format!(
                "{} labels for {} samples",
                labels.len(),
                n
            )));
        }
        let n_classes = labels.iter().max().map_or(0, |m| m + 1);
        let ds = Dataset {
            features,
            labels,
            n_classes,
            feature_names,
            class_names,
        };
        ds.validate(d, n)?;
        Ok(ds)
    }

    /// Same as [`Dataset::new`] but with a caller-supplied class count, so a
    /// partition of a larger dataset may leave some classes empty.
    fn from_parent(parent: &Dataset, indices: &[usize]) -> Dataset {
        Dataset {
            features: parent.features.select(Axis(1), indices),
            labels: indices.iter().map(|&i| parent.labels[i]).collect(),
            n_classes: parent.n_classes,
            feature_names: parent.feature_names.clone(),
            class_names: parent.class_names.clone(),
        }
    }

    fn validate(&self, d: usize, n: usize) -> Result<()> {
        if d < 1 {
            return Err(Error::Config("dataset needs at least one feature".into()));
        }
        if self.n_classes < 2 {
            return Err(Error::Config("dataset needs at least two classes".into()));
        }
        if n < self.n_classes {
            return Err(Error::Config(format!(
                "{} samples for {} classes",
                n, self.n_classes
            )));
        }
        let mut seen = vec![false; self.n_classes];
        for &l in &self.labels {
            seen[l] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::EmptyClass(missing));
        }
        if let Some(names) = &self.feature_names {
            if names.len() != d {
                return Err(Error::Dim(format!(
                    "{} feature names for {} features",
                    names.len(),
                    d
                )));
            }
        }
        for ((r, c), v) in self.features.indexed_iter() {
            if !v.is_finite() {
                return Err(Error::NonFinite { row: r + 1, col: c + 1 });
            }
        }
        Ok(())
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn n_features(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_samples(&self) -> usize {
        self.features.ncols()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    pub fn class_names(&self) -> Option<&[String]> {
        self.class_names.as_deref()
    }

    /// Sample counts per class.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.n_classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// New dataset keeping only the given sample columns, in the given
    /// order. The class count is inherited, so a partition may leave some
    /// classes empty.
    pub fn restrict_samples(&self, indices: &[usize]) -> Result<Dataset> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.n_samples()) {
            return Err(Error::Dim(format!(
                "sample index {} out of range for n={}",
                bad,
                self.n_samples()
            )));
        }
        Ok(Dataset::from_parent(self, indices))
    }

    /// New dataset keeping only the given feature rows, in the given order.
    pub fn restrict_features(&self, indices: &[usize]) -> Result<Dataset> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.n_features()) {
            return Err(Error::Dim(format!(
                "feature index {} out of range for d={}",
                bad,
                self.n_features()
            )));
        }
        Ok(Dataset {
            features: self.features.select(Axis(0), indices),
            labels: self.labels.clone(),
            n_classes: self.n_classes,
            feature_names: self
                .feature_names
                .as_ref()
                .map(|names| indices.iter().map(|&i| names[i].clone()).collect()),
            class_names: self.class_names.clone(),
        })
    }

    /// Replaces the feature matrix, keeping labels and names (used after
    /// standardization). Dimensions must match.
    pub fn with_features(&self, features: Array2<f64>) -> Result<Dataset> {
        if features.dim() != self.features.dim() {
            return Err(Error::Dim(format!(
                "replacement matrix {:?} vs {:?}",
                features.dim(),
                self.features.dim()
            )));
        }
        Ok(Dataset {
            features,
            labels: self.labels.clone(),
            n_classes: self.n_classes,
            feature_names: self.feature_names.clone(),
            class_names: self.class_names.clone(),
        })
    }
}

/// Per-class centroids and the d x n matrix whose i-th column is the
/// centroid of sample i's class.
#[derive(Debug, Clone)]
pub struct CentroidTarget {
    pub targets: Array2<f64>,
    pub centroids: Array2<f64>,
}

/// Builds the centroid target matrix: centroid j is the arithmetic mean of
/// all sample columns with label j, and target column i is a copy of
/// centroid labels[i].
pub fn build_centroid_target(ds: &Dataset) -> CentroidTarget {
    let d = ds.n_features();
    let n = ds.n_samples();
    let m = ds.n_classes();
    let counts = ds.class_counts();

    let mut centroids = Array2::<f64>::zeros((d, m));
    for (i, &label) in ds.labels().iter().enumerate() {
        let col = ds.features().column(i);
        let mut target = centroids.column_mut(label);
        target += &col;
    }
    for (j, &count) in counts.iter().enumerate() {
        let mut col = centroids.column_mut(j);
        col /= count as f64;
    }

    let mut targets = Array2::<f64>::zeros((d, n));
    for (i, &label) in ds.labels().iter().enumerate() {
        targets.column_mut(i).assign(&centroids.column(label));
    }
    CentroidTarget { targets, centroids }
}

/// Train/test split request.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
    pub stratified: bool,
}

impl SplitSpec {
    pub fn new(train_fraction: f64, seed: u64) -> Self {
        SplitSpec {
            train_fraction,
            seed,
            stratified: true,
        }
    }
}

/// Deterministic index partition: (train, test), both sorted ascending.
///
/// Stratified mode shuffles within each class and keeps per-class
/// proportions within rounding, with at least one train and one test sample
/// per class; classes with fewer than two samples are an error.
pub fn split_indices(ds: &Dataset, spec: &SplitSpec) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::Config(format!(
            "train_fraction must be in (0,1), got {}",
            spec.train_fraction
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut train = Vec::new();
    let mut test = Vec::new();

    if spec.stratified {
        for class in 0..ds.n_classes() {
            let mut members: Vec<usize> = ds
                .labels()
                .iter()
                .enumerate()
                .filter(|(_, &l)| l == class)
                .map(|(i, _)| i)
                .collect();
            if members.len() < 2 {
                return Err(Error::ClassTooSmall {
                    class,
                    size: members.len(),
                    fraction: spec.train_fraction,
                });
            }
            members.shuffle(&mut rng);
            let want = (members.len() as f64 * spec.train_fraction).round() as usize;
            let take = want.clamp(1, members.len() - 1);
            train.extend_from_slice(&members[..take]);
            test.extend_from_slice(&members[take..]);
        }
    } else {
        let n = ds.n_samples();
        let mut all: Vec<usize> = (0..n).collect();
        all.shuffle(&mut rng);
        let want = (n as f64 * spec.train_fraction).round() as usize;
        let take = want.clamp(1, n - 1);
        train.extend_from_slice(&all[..take]);
        test.extend_from_slice(&all[take..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Splits the dataset into disjoint train/test partitions covering all
/// samples. Deterministic given the seed.
pub fn split(ds: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    let (train_idx, test_idx) = split_indices(ds, spec)?;
    Ok((
        Dataset::from_parent(ds, &train_idx),
        Dataset::from_parent(ds, &test_idx),
    ))
}

/// Per-feature z-scoring with statistics taken from one (training) matrix.
#[derive(Debug, Clone)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    /// Computes per-feature mean and population standard deviation.
    /// Constant features get std 1 so they pass through centered.
    pub fn fit(features: &Array2<f64>) -> Standardizer {
        let n = features.ncols() as f64;
        let mut mean = Vec::with_capacity(features.nrows());
        let mut std = Vec::with_capacity(features.nrows());
        for row in features.rows() {
            let mu = row.sum() / n;
            let var = row.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / n;
            let sigma = var.sqrt();
            mean.push(mu);
            std.push(if sigma > 0.0 { sigma } else { 1.0 });
        }
        Standardizer { mean, std }
    }

    pub fn transform(&self, features: &Array2<f64>) -> Result<Array2<f64>> {
        if features.nrows() != self.mean.len() {
            return Err(Error::Dim(format!(
                "standardizer fitted on {} features, got {}",
                self.mean.len(),
                features.nrows()
            )));
        }
        let mut out = features.clone();
        for (j, mut row) in out.rows_mut().into_iter().enumerate() {
            row.mapv_inplace(|v| (v - self.mean[j]) / self.std[j]);
        }
        Ok(out)
    }
}

/// Loads a CSV file into a validated [`Dataset`].
///
/// The file is read as a samples x columns table (set `transpose` when it is
/// stored the other way around). A header row is required when the label
/// column is selected by name, and is otherwise auto-detected: if any
/// non-label cell of the first row fails to parse as a number the row is
/// treated as a header.
///
/// Labels that already are the integers 0..M-1 are used as-is; any other
/// label values (strings, or non-contiguous integers) are mapped to 0..M-1
/// in order of first appearance.
pub fn load_csv(path: &Path, label_column: &LabelColumn, transpose: bool) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::Io {
                path: path.to_path_buf(),
                source: std::io::Error::new(std::io::ErrorKind::NotFound, e.to_string()),
            },
            _ => Error::Csv(e.to_string()),
        })?;

    let mut grid: Vec<Vec<String>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Csv(e.to_string()))?;
        grid.push(record.iter().map(|s| s.to_string()).collect());
    }
    if grid.is_empty() {
        return Err(Error::Csv(format!("{}: file has no rows", path.display())));
    }
    if transpose {
        let rows = grid.len();
        let cols = grid[0].len();
        let mut t = vec![vec![String::new(); rows]; cols];
        for (r, row) in grid.iter().enumerate() {
            for (c, cell) in row.iter().enumerate() {
                t[c][r] = cell.clone();
            }
        }
        grid = t;
    }

    let n_cols = grid[0].len();
    if n_cols < 2 {
        return Err(Error::Csv(
            "need at least one feature column and one label column".into(),
        ));
    }

    // Resolve the label column and decide whether row 0 is a header.
    let (label_idx, has_header) = match label_column {
        LabelColumn::Name(name) => {
            let idx = grid[0]
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::LabelColumnNotFound(name.clone()))?;
            (idx, true)
        }
        LabelColumn::Index(i) => {
            if *i >= n_cols {
                return Err(Error::LabelColumnNotFound(i.to_string()));
            }
            (*i, looks_like_header(&grid[0], *i))
        }
        LabelColumn::Last => {
            let idx = n_cols - 1;
            (idx, looks_like_header(&grid[0], idx))
        }
    };

    let feature_names: Option<Vec<String>> = if has_header {
        Some(
            grid[0]
                .iter()
                .enumerate()
                .filter(|(c, _)| *c != label_idx)
                .map(|(_, name)| name.clone())
                .collect(),
        )
    } else {
        None
    };
    let data_rows = if has_header { &grid[1..] } else { &grid[..] };
    if data_rows.is_empty() {
        return Err(Error::Csv(format!(
            "{}: no data rows after header",
            path.display()
        )));
    }

    let n = data_rows.len();
    let d = n_cols - 1;
    let row_offset = if has_header { 2 } else { 1 };

    let mut features = Array2::<f64>::zeros((d, n));
    let mut raw_labels = Vec::with_capacity(n);
    for (i, row) in data_rows.iter().enumerate() {
        if row.len() != n_cols {
            return Err(Error::Csv(format!(
                "row {} has {} columns, expected {}",
                i + row_offset,
                row.len(),
                n_cols
            )));
        }
        let mut f = 0;
        for (c, cell) in row.iter().enumerate() {
            if c == label_idx {
                raw_labels.push(cell.clone());
                continue;
            }
            let value: f64 = cell.parse().map_err(|_| Error::NonNumeric {
                row: i + row_offset,
                col: c + 1,
                value: cell.clone(),
            })?;
            if !value.is_finite() {
                return Err(Error::NonFinite {
                    row: i + row_offset,
                    col: c + 1,
                });
            }
            features[(f, i)] = value;
            f += 1;
        }
    }

    let (labels, class_names) = map_labels(&raw_labels);
    Dataset::new(features, labels, feature_names, Some(class_names))
}

/// Heuristic header check: any non-label cell that is not a number means the
/// first row is a header.
fn looks_like_header(row: &[String], label_idx: usize) -> bool {
    row.iter()
        .enumerate()
        .filter(|(c, _)| *c != label_idx)
        .any(|(_, cell)| cell.parse::<f64>().is_err())
}

/// Integer labels that already form 0..M-1 pass through unchanged; anything
/// else is mapped by first appearance.
fn map_labels(raw: &[String]) -> (Vec<usize>, Vec<String>) {
    if let Some(ints) = raw
        .iter()
        .map(|s| s.parse::<usize>().ok())
        .collect::<Option<Vec<usize>>>()
    {
        let mut distinct: Vec<usize> = ints.clone();
        distinct.sort_unstable();
        distinct.dedup();
        let compact = distinct
            .iter()
            .enumerate()
            .all(|(rank, &value)| rank == value);
        if compact {
            let names = distinct.iter().map(|v| v.to_string()).collect();
            return (ints, names);
        }
    }
    let mut names: Vec<String> = Vec::new();
    let labels = raw
        .iter()
        .map(|s| {
            if let Some(idx) = names.iter().position(|n| n == s) {
                idx
            } else {
                names.push(s.clone());
                names.len() - 1
            }
        })
        .collect();
    (labels, names)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use std::io::Write;

    fn toy() -> Dataset {
        // 2 features, 5 samples, labels as in the worked two-class example.
        let x = array![
            [1.0, 2.0, 3.0, 4.0, 5.0],
            [0.0, 1.0, 0.0, 1.0, 0.0],
        ];
        Dataset::new(x, vec![0, 1, 0, 1, 0], None, None).unwrap()
    }

    fn write_csv(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn centroid_target_columns_follow_labels() {
        let ds = toy();
        let ct = build_centroid_target(&ds);
        // class 0 = samples {0,2,4}, class 1 = samples {1,3}
        let c0 = ct.centroids.column(0).to_owned();
        let c1 = ct.centroids.column(1).to_owned();
        assert_eq!(c0, array![3.0, 0.0]);
        assert_eq!(c1, array![3.0, 1.0]);
        for (i, &label) in ds.labels().iter().enumerate() {
            assert_eq!(
                ct.targets.column(i),
                ct.centroids.column(label),
                "target column {i} must be an exact centroid copy"
            );
        }
    }

    #[test]
    fn one_sample_per_class_targets_equal_features() {
        let x = array![[1.0, 4.0], [2.0, 5.0]];
        let ds = Dataset::new(x.clone(), vec![0, 1], None, None).unwrap();
        let ct = build_centroid_target(&ds);
        assert_eq!(ct.targets, x);
    }

    #[test]
    fn two_point_mean() {
        let x = array![[1.0, 3.0], [0.0, 0.0]];
        // Both label 0 is not a valid dataset (needs two classes); check the
        // centroid arithmetic through a 3-sample variant instead.
        let x3 = array![[1.0, 3.0, 7.0], [0.0, 0.0, 2.0]];
        let ds = Dataset::new(x3, vec![0, 0, 1], None, None).unwrap();
        let ct = build_centroid_target(&ds);
        assert_eq!(ct.targets.column(0).to_owned(), array![2.0, 0.0]);
        assert_eq!(ct.targets.column(1).to_owned(), array![2.0, 0.0]);
        let _ = x;
    }

    #[test]
    fn class_means_idempotent() {
        let ds = toy();
        let ct = build_centroid_target(&ds);
        // Averaging target columns per class reproduces the centroids.
        let counts = ds.class_counts();
        let mut sums = Array2::<f64>::zeros((ds.n_features(), ds.n_classes()));
        for (i, &l) in ds.labels().iter().enumerate() {
            let mut col = sums.column_mut(l);
            col += &ct.targets.column(i);
        }
        for (j, &count) in counts.iter().enumerate() {
            let mean = sums.column(j).to_owned() / count as f64;
            for (a, b) in mean.iter().zip(ct.centroids.column(j)) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn reordering_commutes_with_centroid_target() {
        let ds = toy();
        let perm = [4usize, 2, 0, 3, 1];
        let reordered = Dataset::new(
            ds.features().select(Axis(1), &perm),
            perm.iter().map(|&i| ds.labels()[i]).collect(),
            None,
            None,
        )
        .unwrap();
        let ct = build_centroid_target(&ds);
        let ct_perm = build_centroid_target(&reordered);
        for (new_pos, &old_pos) in perm.iter().enumerate() {
            assert_eq!(ct_perm.targets.column(new_pos), ct.targets.column(old_pos));
        }
    }

    #[test]
    fn split_partitions_indices() {
        let ds = toy();
        let spec = SplitSpec::new(0.5, 42);
        let (train, test) = split_indices(&ds, &spec).unwrap();
        let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn split_is_deterministic() {
        let ds = toy();
        let spec = SplitSpec::new(0.5, 7);
        assert_eq!(
            split_indices(&ds, &spec).unwrap(),
            split_indices(&ds, &spec).unwrap()
        );
    }

    #[test]
    fn stratified_50_50_is_exact() {
        let x = Array2::from_shape_fn((3, 100), |(r, c)| (r * 100 + c) as f64);
        let labels: Vec<usize> = (0..100).map(|i| i / 50).collect();
        let ds = Dataset::new(x, labels, None, None).unwrap();
        let (train, test) = split(&ds, &SplitSpec::new(0.5, 0)).unwrap();
        assert_eq!(train.class_counts(), vec![25, 25]);
        assert_eq!(test.class_counts(), vec![25, 25]);
    }

    #[test]
    fn singleton_class_fails_stratified() {
        let x = Array2::from_shape_fn((2, 10), |(r, c)| (r + c) as f64);
        let mut labels = vec![0usize; 10];
        labels[9] = 1;
        let ds = Dataset::new(x, labels, None, None).unwrap();
        let err = split(&ds, &SplitSpec::new(0.5, 0)).unwrap_err();
        assert!(matches!(err, Error::ClassTooSmall { class: 1, .. }));
    }

    #[test]
    fn load_csv_maps_string_labels_by_first_appearance() {
        let f = write_csv("1.0,2.0,a\n3.0,4.0,b\n5.0,6.0,a\n");
        let ds = load_csv(f.path(), &LabelColumn::Last, false).unwrap();
        assert_eq!(ds.n_classes(), 2);
        assert_eq!(ds.labels(), &[0, 1, 0]);
        assert_eq!(ds.n_features(), 2);
        assert_eq!(ds.n_samples(), 3);
        assert_eq!(ds.class_names().unwrap(), ["a", "b"]);
    }

    #[test]
    fn load_csv_keeps_compact_integer_labels() {
        let f = write_csv("1.0,2.0,1\n3.0,4.0,0\n5.0,6.0,1\n");
        let ds = load_csv(f.path(), &LabelColumn::Last, false).unwrap();
        assert_eq!(ds.labels(), &[1, 0, 1]);
    }

    #[test]
    fn load_csv_remaps_non_compact_integer_labels() {
        let f = write_csv("1.0,2.0,5\n3.0,4.0,7\n5.0,6.0,5\n");
        let ds = load_csv(f.path(), &LabelColumn::Last, false).unwrap();
        assert_eq!(ds.labels(), &[0, 1, 0]);
    }

    #[test]
    fn load_csv_rejects_nan_cell() {
        let f = write_csv("1.0,NaN,a\n3.0,4.0,b\n");
        let err = load_csv(f.path(), &LabelColumn::Last, false).unwrap_err();
        match err {
            Error::NonFinite { row: 1, col: 2 } => {}
            other => panic!("expected NonFinite at (1,2), got {other:?}"),
        }
    }

    #[test]
    fn load_csv_rejects_non_numeric_cell() {
        // The bad cell sits past the first row; a non-numeric first row
        // would be read as a header.
        let f = write_csv("1.0,2.0,a\n3.0,oops,b\n");
        assert!(matches!(
            load_csv(f.path(), &LabelColumn::Last, false),
            Err(Error::NonNumeric { row: 2, col: 2, .. })
        ));
    }

    #[test]
    fn load_csv_missing_file() {
        let err = load_csv(
            Path::new("/nonexistent/data.csv"),
            &LabelColumn::Last,
            false,
        )
        .unwrap_err();
        assert!(err.to_string().contains("/nonexistent/data.csv"));
    }

    #[test]
    fn load_csv_header_by_name() {
        let f = write_csv("g1,g2,y\n1.0,2.0,a\n3.0,4.0,b\n");
        let ds = load_csv(f.path(), &LabelColumn::Name("y".into()), false).unwrap();
        assert_eq!(ds.feature_names().unwrap(), ["g1", "g2"]);
        assert_eq!(ds.n_samples(), 2);
    }

    #[test]
    fn load_csv_autodetects_header_without_name() {
        let f = write_csv("g1,g2,y\n1.0,2.0,a\n3.0,4.0,b\n");
        let ds = load_csv(f.path(), &LabelColumn::Last, false).unwrap();
        assert_eq!(ds.n_samples(), 2);
        assert!(ds.feature_names().is_some());
    }

    #[test]
    fn load_csv_transpose() {
        // Stored features-as-rows: 2 features x 3 samples, labels in the
        // last row become the last column after transposing.
        let f = write_csv("1.0,3.0,5.0\n2.0,4.0,6.0\na,b,a\n");
        let ds = load_csv(f.path(), &LabelColumn::Last, true).unwrap();
        assert_eq!(ds.n_features(), 2);
        assert_eq!(ds.n_samples(), 3);
        assert_eq!(ds.labels(), &[0, 1, 0]);
        assert_eq!(ds.features()[(0, 1)], 3.0);
    }

    #[test]
    fn standardizer_uses_train_statistics_only() {
        let train = array![[0.0, 2.0], [10.0, 10.0]];
        let test = array![[4.0], [10.0]];
        let s = Standardizer::fit(&train);
        assert_eq!(s.mean, vec![1.0, 10.0]);
        // Constant feature keeps std 1.
        assert_eq!(s.std[1], 1.0);
        let t = s.transform(&test).unwrap();
        assert_eq!(t[(0, 0)], 3.0); // (4 - 1) / 1
        assert_eq!(t[(1, 0)], 0.0);
    }

    #[test]
    fn dataset_rejects_gapped_labels() {
        let x = array![[1.0, 2.0, 3.0]];
        let err = Dataset::new(x, vec![0, 2, 0], None, None).unwrap_err();
        assert!(matches!(err, Error::EmptyClass(1)));
    }

    #[test]
    fn dataset_rejects_non_finite() {
        let x = array![[1.0, f64::INFINITY], [0.0, 1.0]];
        assert!(Dataset::new(x, vec![0, 1], None, None).is_err());
    }
}
