use super::table::{Column, Table};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Real;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Numeric,
    Categorical,
}

/// Text label to integer code mapping, code = position in `labels`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CategoryCodec {
    labels: Vec<String>,
}

impl CategoryCodec {
    pub fn from_labels(labels: Vec<String>) -> Self {
        Self { labels }
    }

    /// Codes assigned in order of first appearance.
    fn first_appearance<'a>(values: impl Iterator<Item = &'a str>) -> Self {
        let mut labels: Vec<String> = Vec::new();
        let mut seen = HashMap::new();
        for v in values {
            if !seen.contains_key(v) {
                seen.insert(v.to_owned(), labels.len());
                labels.push(v.to_owned());
            }
        }
        Self { labels }
    }

    pub fn encode(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn decode(&self, code: usize) -> Option<&str> {
        self.labels.get(code).map(String::as_str)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Numeric form of a table: features `x`, binary target `y`, group ids `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedDataset<T> {
    x: Matrix<T>,
    y: Vec<u8>,
    g: Vec<usize>,
    feature_names: Vec<String>,
    feature_kinds: Vec<FeatureKind>,
    group_labels: Vec<String>,
    target_labels: [String; 2],
    encodings: BTreeMap<String, CategoryCodec>,
    imputed: Vec<usize>,
    row_ids: Vec<usize>,
    dropped_rows: usize,
}

impl<T: Real> EncodedDataset<T> {
    /// Validated construction from already-numeric parts. All features are
    /// treated as numeric; groups are labelled by their id.
    pub fn new(
        x: Matrix<T>,
        y: Vec<u8>,
        g: Vec<usize>,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        let n_groups = g.iter().copied().max().map_or(0, |m| m + 1);
        let ds = Self {
            feature_kinds: vec![FeatureKind::Numeric; x.ncols()],
            imputed: vec![0; x.ncols()],
            row_ids: (0..x.nrows()).collect(),
            x,
            y,
            g,
            feature_names,
            group_labels: (0..n_groups).map(|i| i.to_string()).collect(),
            target_labels: ["0".into(), "1".into()],
            encodings: BTreeMap::new(),
            dropped_rows: 0,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn with_feature_kinds(mut self, kinds: Vec<FeatureKind>) -> Result<Self> {
        if kinds.len() != self.n_features() {
            return Err(Error::LengthMismatch(format!(
                "{} feature kinds for {} features",
                kinds.len(),
                self.n_features()
            )));
        }
        self.feature_kinds = kinds;
        Ok(self)
    }

    pub fn with_group_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.group_labels.len() {
            return Err(Error::LengthMismatch(format!(
                "{} group labels for {} groups",
                labels.len(),
                self.group_labels.len()
            )));
        }
        self.group_labels = labels;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        let n = self.x.nrows();
        if self.y.len() != n || self.g.len() != n {
            return Err(Error::LengthMismatch(format!(
                "x has {n} rows, y {} and g {}",
                self.y.len(),
                self.g.len()
            )));
        }
        if self.feature_names.len() != self.x.ncols() {
            return Err(Error::LengthMismatch(format!(
                "{} names for {} features",
                self.feature_names.len(),
                self.x.ncols()
            )));
        }
        if n == 0 {
            return Err(Error::EmptyTable);
        }
        if let Some(&bad) = self.y.iter().find(|&&v| v > 1) {
            return Err(Error::TargetNotBinary {
                column: format!("y (value {bad})"),
                distinct: 0,
            });
        }
        let [n0, n1] = self.class_counts();
        if n0 == 0 || n1 == 0 {
            return Err(Error::TargetNotBinary {
                column: "y".into(),
                distinct: 1,
            });
        }
        if (0..n).any(|r| self.x.row(r).iter().any(|v| !v.is_finite())) {
            return Err(Error::NonFinite);
        }
        let present = self.group_sizes().iter().filter(|&&c| c > 0).count();
        if present < 2 {
            return Err(Error::ProtectedConstant("g".into()));
        }
        Ok(())
    }
}

impl<T: Copy> EncodedDataset<T> {
    pub fn x(&self) -> &Matrix<T> {
        &self.x
    }

    pub fn y(&self) -> &[u8] {
        &self.y
    }

    pub fn g(&self) -> &[usize] {
        &self.g
    }

    pub fn n_rows(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.x.ncols()
    }

    pub fn n_groups(&self) -> usize {
        self.group_labels.len()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn feature_kinds(&self) -> &[FeatureKind] {
        &self.feature_kinds
    }

    pub fn group_labels(&self) -> &[String] {
        &self.group_labels
    }

    pub fn target_labels(&self) -> &[String; 2] {
        &self.target_labels
    }

    /// Per categorical feature column, the label codec.
    pub fn encodings(&self) -> &BTreeMap<String, CategoryCodec> {
        &self.encodings
    }

    /// Count of imputed cells per feature.
    pub fn imputed(&self) -> &[usize] {
        &self.imputed
    }

    /// Source row index (in the parsed table) of every row.
    pub fn row_ids(&self) -> &[usize] {
        &self.row_ids
    }

    /// Rows removed because the target or protected value was missing.
    pub fn dropped_rows(&self) -> usize {
        self.dropped_rows
    }

    pub fn class_counts(&self) -> [usize; 2] {
        let n1 = self.y.iter().filter(|&&v| v == 1).count();
        [self.y.len() - n1, n1]
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.group_labels.len()];
        for &g in &self.g {
            sizes[g] += 1;
        }
        sizes
    }

    pub fn group_id(&self, label: &str) -> Option<usize> {
        self.group_labels.iter().position(|l| l == label)
    }

    /// Row subset without re-validation; group and class coverage may be partial.
    pub fn subset(&self, rows: &[usize]) -> Self {
        Self {
            x: self.x.select_rows(rows),
            y: rows.iter().map(|&r| self.y[r]).collect(),
            g: rows.iter().map(|&r| self.g[r]).collect(),
            feature_names: self.feature_names.clone(),
            feature_kinds: self.feature_kinds.clone(),
            group_labels: self.group_labels.clone(),
            target_labels: self.target_labels.clone(),
            encodings: self.encodings.clone(),
            imputed: self.imputed.clone(),
            row_ids: rows.iter().map(|&r| self.row_ids[r]).collect(),
            dropped_rows: self.dropped_rows,
        }
    }

    /// Column subset in the given order.
    pub fn select_features(&self, features: &[usize]) -> Self {
        let rows: Vec<usize> = (0..self.n_rows()).collect();
        Self {
            x: self.x.select(&rows, features),
            feature_names: features.iter().map(|&f| self.feature_names[f].clone()).collect(),
            feature_kinds: features.iter().map(|&f| self.feature_kinds[f]).collect(),
            imputed: features.iter().map(|&f| self.imputed[f]).collect(),
            ..self.clone()
        }
    }
}

/// A single-group slice of a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSubset<T> {
    pub group: usize,
    pub label: String,
    pub data: EncodedDataset<T>,
    /// Set when either class has fewer than 2 rows.
    pub degenerate: bool,
}

/// Sorted distinct labels of a label column and each row's label index.
/// Numeric columns order numerically, text columns lexicographically.
fn label_column(column: &Column, rows: &[usize]) -> (Vec<String>, Vec<usize>) {
    match column {
        Column::Numeric(v) => {
            let mut distinct: Vec<f64> = rows.iter().filter_map(|&r| v[r]).collect();
            distinct.sort_by(f64::total_cmp);
            distinct.dedup();
            let ids = rows
                .iter()
                .map(|&r| {
                    let x = v[r].expect("missing rows removed");
                    distinct.partition_point(|d| d.total_cmp(&x) == Ordering::Less)
                })
                .collect();
            (distinct.iter().map(|d| d.to_string()).collect(), ids)
        }
        Column::Categorical(v) => {
            let mut distinct: Vec<&str> = rows.iter().filter_map(|&r| v[r].as_deref()).collect();
            distinct.sort_unstable();
            distinct.dedup();
            let ids = rows
                .iter()
                .map(|&r| {
                    let x = v[r].as_deref().expect("missing rows removed");
                    distinct.binary_search(&x).expect("label present")
                })
                .collect();
            (distinct.into_iter().map(str::to_owned).collect(), ids)
        }
    }
}

/// Encodes a parsed table. Rows with a missing target or protected value are
/// dropped; categorical features are coded by first appearance; missing
/// numeric cells take the column mean and missing categorical cells the
/// most frequent code.
pub fn encode<T: Real>(table: &Table, target: &str, protected: &str) -> Result<EncodedDataset<T>> {
    let t_idx = table
        .index_of(target)
        .ok_or_else(|| Error::MissingColumn(target.to_owned()))?;
    let p_idx = table
        .index_of(protected)
        .ok_or_else(|| Error::MissingColumn(protected.to_owned()))?;
    let (t_col, p_col) = (&table.columns()[t_idx], &table.columns()[p_idx]);

    let kept: Vec<usize> = (0..table.n_rows())
        .filter(|&r| !t_col.is_missing(r) && !p_col.is_missing(r))
        .collect();
    let dropped_rows = table.n_rows() - kept.len();

    let (target_labels, y_ids) = label_column(t_col, &kept);
    if target_labels.len() != 2 {
        return Err(Error::TargetNotBinary {
            column: target.to_owned(),
            distinct: target_labels.len(),
        });
    }
    let (group_labels, g) = label_column(p_col, &kept);
    if group_labels.len() < 2 {
        return Err(Error::ProtectedConstant(protected.to_owned()));
    }
    let y: Vec<u8> = y_ids.into_iter().map(|v| v as u8).collect();

    let mut feature_names = Vec::new();
    let mut feature_kinds = Vec::new();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut imputed = Vec::new();
    let mut encodings = BTreeMap::new();
    for (c, (name, column)) in table.column_names().iter().zip(table.columns()).enumerate() {
        if c == t_idx || c == p_idx {
            continue;
        }
        let (values, n_imputed, kind) = match column {
            Column::Numeric(v) => {
                let present: Vec<f64> = kept.iter().filter_map(|&r| v[r]).collect();
                let mean = if present.is_empty() {
                    0.0
                } else {
                    present.iter().sum::<f64>() / present.len() as f64
                };
                let values: Vec<f64> = kept.iter().map(|&r| v[r].unwrap_or(mean)).collect();
                (values, kept.len() - present.len(), FeatureKind::Numeric)
            }
            Column::Categorical(v) => {
                let codec =
                    CategoryCodec::first_appearance(kept.iter().filter_map(|&r| v[r].as_deref()));
                let codes: Vec<Option<usize>> = kept
                    .iter()
                    .map(|&r| v[r].as_deref().and_then(|s| codec.encode(s)))
                    .collect();
                let mut freq = vec![0usize; codec.len().max(1)];
                for code in codes.iter().flatten() {
                    freq[*code] += 1;
                }
                // most frequent, lowest code on ties
                let mode = (0..freq.len()).fold(0, |best, i| if freq[i] > freq[best] { i } else { best });
                let n_missing = codes.iter().filter(|c| c.is_none()).count();
                let values = codes.iter().map(|c| c.unwrap_or(mode) as f64).collect();
                encodings.insert(name.clone(), codec);
                (values, n_missing, FeatureKind::Categorical)
            }
        };
        feature_names.push(name.clone());
        feature_kinds.push(kind);
        imputed.push(n_imputed);
        columns.push(values);
    }

    let x = Matrix::from_columns(&columns)?.map(T::lit);
    // from_columns with zero columns loses the row count
    let x = if columns.is_empty() {
        Matrix::from_vec(kept.len(), 0, Vec::new())?
    } else {
        x
    };

    Ok(EncodedDataset {
        x,
        y,
        g,
        feature_names,
        feature_kinds,
        group_labels,
        target_labels: [target_labels[0].clone(), target_labels[1].clone()],
        encodings,
        imputed,
        row_ids: kept,
        dropped_rows,
    })
}

/// Splits a dataset into one subset per group id, in id order.
pub fn split_by_group<T: Copy>(ds: &EncodedDataset<T>) -> Result<Vec<GroupSubset<T>>> {
    let sizes = ds.group_sizes();
    if sizes.iter().filter(|&&s| s > 0).count() < 2 {
        return Err(Error::ProtectedConstant(
            ds.group_labels.first().cloned().unwrap_or_default(),
        ));
    }
    Ok((0..ds.n_groups())
        .map(|group| {
            let rows: Vec<usize> = (0..ds.n_rows()).filter(|&r| ds.g[r] == group).collect();
            let data = ds.subset(&rows);
            let [n0, n1] = data.class_counts();
            GroupSubset {
                group,
                label: ds.group_labels[group].clone(),
                degenerate: n0 < 2 || n1 < 2,
                data,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabular_data::{read_csv, ColumnRoles};

    fn table(text: &str, target: &str, protected: &str) -> Table {
        read_csv(text.as_bytes(), &ColumnRoles::new(target, protected)).unwrap()
    }

    #[test]
    fn categorical_first_appearance() {
        let t = table("c,t,g\nred,a,m\nblue,b,f\nred,a,f\n", "t", "g");
        let ds: EncodedDataset<f64> = encode(&t, "t", "g").unwrap();
        assert_eq!(ds.x().column(0), vec![0.0, 1.0, 0.0]);
        let codec = &ds.encodings()["c"];
        assert_eq!(codec.decode(0), Some("red"));
        assert_eq!(codec.encode("blue"), Some(1));
    }

    #[test]
    fn target_lexicographic() {
        let t = table("x,t,g\n1,yes,m\n2,no,f\n3,yes,f\n", "t", "g");
        let ds: EncodedDataset<f64> = encode(&t, "t", "g").unwrap();
        assert_eq!(ds.y(), &[1, 0, 1]);
        assert_eq!(ds.target_labels(), &["no".to_string(), "yes".to_string()]);
        assert_eq!(ds.g(), &[1, 0, 0]);
        assert_eq!(ds.group_labels(), ["f", "m"]);
    }

    #[test]
    fn mean_imputation() {
        let t = table("x,t,g\n2.0,1,m\n,0,f\n4.0,1,f\n", "t", "g");
        let ds: EncodedDataset<f64> = encode(&t, "t", "g").unwrap();
        assert_eq!(ds.x().column(0), vec![2.0, 3.0, 4.0]);
        assert_eq!(ds.imputed(), &[1]);
    }

    #[test]
    fn categorical_missing_takes_mode() {
        let t = table("c,t,g\nb,1,m\na,0,f\na,1,f\nNA,0,m\n", "t", "g");
        let ds: EncodedDataset<f64> = encode(&t, "t", "g").unwrap();
        assert_eq!(ds.x().column(0), vec![0.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn numeric_labels_order_numerically() {
        let t = table("x,t,g\n1,10,0\n2,9,1\n", "t", "g");
        let ds: EncodedDataset<f64> = encode(&t, "t", "g").unwrap();
        assert_eq!(ds.y(), &[1, 0]);
        assert_eq!(ds.target_labels(), &["9".to_string(), "10".to_string()]);
    }

    #[test]
    fn drops_rows_missing_labels() {
        let t = table("x,t,g\n1,1,m\n2,,f\n3,0,NA\n4,0,f\n5,1,f\n", "t", "g");
        let ds: EncodedDataset<f64> = encode(&t, "t", "g").unwrap();
        assert_eq!(ds.n_rows(), 3);
        assert_eq!(ds.dropped_rows(), 2);
        assert_eq!(ds.row_ids(), &[0, 3, 4]);
    }

    #[test]
    fn encode_errors() {
        let t = table("x,t,g\n1,a,m\n2,b,f\n3,c,f\n", "t", "g");
        assert!(matches!(
            encode::<f64>(&t, "t", "g"),
            Err(Error::TargetNotBinary { distinct: 3, .. })
        ));
        let t = table("x,t,g\n1,a,m\n2,b,m\n", "t", "g");
        assert!(matches!(encode::<f64>(&t, "t", "g"), Err(Error::ProtectedConstant(_))));
    }

    #[test]
    fn split_two_groups() {
        let x = Matrix::from_rows(&[vec![1.0], vec![2.0], vec![3.0], vec![4.0]]).unwrap();
        let ds = EncodedDataset::new(x, vec![0, 1, 1, 0], vec![0, 1, 0, 1], vec!["f".into()]).unwrap();
        let parts = split_by_group(&ds).unwrap();
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[0].data.row_ids(), &[0, 2]);
        assert_eq!(parts[1].data.row_ids(), &[1, 3]);
        assert!(parts.iter().all(|p| p.degenerate));
        assert_eq!(parts[0].data.feature_names(), ds.feature_names());
    }

    #[test]
    fn single_group_rejected() {
        let x = Matrix::from_rows(&[vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        let err = EncodedDataset::new(x, vec![0, 1, 0], vec![0, 0, 0], vec!["f".into()]).unwrap_err();
        assert!(matches!(err, Error::ProtectedConstant(_)));
    }

    #[test]
    fn encode_leaves_numeric_tables_alone() {
        let t = table("a,b,t,g\n1.5,-2,1,0\n2.5,7,0,1\n3.5,0.25,1,1\n", "t", "g");
        let ds: EncodedDataset<f64> = encode(&t, "t", "g").unwrap();
        assert_eq!(ds.x().column(0), vec![1.5, 2.5, 3.5]);
        assert_eq!(ds.x().column(1), vec![-2.0, 7.0, 0.25]);
        assert!(ds.feature_kinds().iter().all(|k| *k == FeatureKind::Numeric));
    }
}
