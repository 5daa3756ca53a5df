//! Tabular observations, variable groupings, and the rank transform.

use crate::error::{Error, Result};

/// A raw n-by-d table of finite numeric observations with named columns.
///
/// Missing values are not representable; ingestion layers must drop
/// incomplete rows before constructing a table.
#[derive(Debug, Clone, PartialEq)]
pub struct DataTable {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
    n_rows: usize,
}

impl DataTable {
    /// Builds a table from `(name, values)` columns, validating that all
    /// columns share one length `n >= 3`, every value is finite, and column
    /// names are unique.
    pub fn new(columns: Vec<(String, Vec<f64>)>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::InvalidTable("table has no columns".into()));
        }
        let n_rows = columns[0].1.len();
        if n_rows < 3 {
            return Err(Error::InvalidTable(format!(
                "table has {} rows, need at least 3",
                n_rows
            )));
        }
        let mut names = Vec::with_capacity(columns.len());
        let mut values = Vec::with_capacity(columns.len());
        for (name, col) in columns {
            if col.len() != n_rows {
                return Err(Error::InvalidTable(format!(
                    "column '{}' has {} rows, expected {}",
                    name,
                    col.len(),
                    n_rows
                )));
            }
            if let Some(bad) = col.iter().find(|v| !v.is_finite()) {
                return Err(Error::InvalidTable(format!(
                    "column '{}' contains non-finite value {}",
                    name, bad
                )));
            }
            if names.contains(&name) {
                return Err(Error::InvalidTable(format!(
                    "duplicate column name '{}'",
                    name
                )));
            }
            names.push(name);
            values.push(col);
        }
        Ok(Self {
            names,
            columns: values,
            n_rows,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, idx: usize) -> &[f64] {
        &self.columns[idx]
    }

    pub fn column_names(&self) -> &[String] {
        &self.names
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// A partition of `k >= 2` disjoint, non-empty sets of column indices.
///
///// The grouping defines what "independence" means for the null model: the
/// null joint density is the product of the per-group marginal densities.
/// Columns not referenced by any group are ignored by the estimators.
#[derive(Debug, Clone, PartialEq)]
pub struct VariableGrouping {
    groups: Vec<Vec<usize>>,
}

impl VariableGrouping {
    /// Validates disjointness, non-emptiness, and `k >= 2`, deduplicating
    /// and sorting indices within each group. Group order is preserved for
    /// display; estimation results are invariant to it.
    pub fn new(groups: Vec<Vec<usize>>) -> Result<Self> {
        if groups.len() < 2 {
            return Err(Error::InvalidGrouping(format!(
                "need at least 2 groups, got {}",
                groups.len()
            )));
        }
        let mut seen = std::collections::BTreeSet::new();
        let mut sorted_groups = Vec::with_capacity(groups.len());
        for (gi, group) in groups.into_iter().enumerate() {
            let mut g: Vec<usize> = group;
            g.sort_unstable();
            g.dedup();
            if g.is_empty() {
                return Err(Error::InvalidGrouping(format!("group {} is empty", gi)));
            }
            for &idx in &g {
                if !seen.insert(idx) {
                    return Err(Error::InvalidGrouping(format!(
                        "column index {} appears in more than one group",
                        idx
                    )));
                }
            }
            sorted_groups.push(g);
        }
        Ok(Self {
            groups: sorted_groups,
        })
    }

    /// Convenience constructor for the common two-group case.
    pub fn pair(first: Vec<usize>, second: Vec<usize>) -> Result<Self> {
        Self::new(vec![first, second])
    }

    pub fn k(&self) -> usize {
        self.groups.len()
    }

    /// Groups in the order they were supplied.
    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    /// Group indices reordered canonically (by smallest column index).
    /// Internal evaluation iterates in this order so that results are
    /// bit-identical under any permutation of the supplied group order.
    pub(crate) fn canonical_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.groups.len()).collect();
        order.sort_by_key(|&g| self.groups[g][0]);
        order
    }

    /// All grouped column indices, ascending.
    pub fn all_columns(&self) -> Vec<usize> {
        let mut cols: Vec<usize> = self.groups.iter().flatten().copied().collect();
        cols.sort_unstable();
        cols
    }

    /// Checks that every referenced index is a valid column of a table with
    /// `n_cols` columns.
    pub fn validate_for(&self, n_cols: usize) -> Result<()> {
        for group in &self.groups {
            for &idx in group {
                if idx >= n_cols {
                    return Err(Error::InvalidGrouping(format!(
                        "column index {} out of range for table with {} columns",
                        idx, n_cols
                    )));
                }
            }
        }
        Ok(())
    }

    /// Resolves group indices to column names for reporting.
    pub fn describe(&self, table: &DataTable) -> Vec<Vec<String>> {
        self.groups
            .iter()
            .map(|g| {
                g.iter()
                    .map(|&idx| table.column_names()[idx].clone())
                    .collect()
            })
            .collect()
    }
}

/// A table whose columns hold midranks scaled into `(0, 1]`.
///
/// Tied raw values receive the average of their tied ranks; the scaled rank
/// of an untied value is `rank / n`. Strictly increasing transforms of a raw
/// column leave its ranked column bit-identical.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedTable {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
    n_rows: usize,
}

impl RankedTable {
    /// Builds a table directly from already-scaled rank columns. Test-only:
    /// lets unit tests pin densities at hand-chosen rank values (including
    /// row counts below the public minimum).
    #[cfg(test)]
    pub(crate) fn from_scaled_ranks(names: Vec<String>, columns: Vec<Vec<f64>>) -> Self {
        assert!(!columns.is_empty());
        let n_rows = columns[0].len();
        assert!(columns.iter().all(|c| c.len() == n_rows));
        assert!(columns
            .iter()
            .all(|c| c.iter().all(|&v| v > 0.0 && v <= 1.0)));
        Self {
            names,
            columns,
            n_rows,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, idx: usize) -> &[f64] {
        &self.columns[idx]
    }

    pub fn column_names(&self) -> &[String] {
        &self.names
    }
}

/// Replaces each column with scaled midranks. The input table is unchanged.
pub fn rank_transform(table: &DataTable) -> RankedTable {
    let n = table.n_rows();
    let columns = (0..table.n_cols())
        .map(|c| scaled_midranks(table.column(c), n))
        .collect();
    RankedTable {
        names: table.column_names().to_vec(),
        columns,
        n_rows: n,
    }
}

fn scaled_midranks(values: &[f64], n: usize) -> Vec<f64> {
    let mut order: Vec<usize> = (0..n).collect();
    // Finite values admit a total order.
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let mut ranks = vec![0.0; n];
    let scale = 1.0 / n as f64;
    let mut start = 0;
    while start < n {
        let mut end = start;
        while end + 1 < n && values[order[end + 1]] == values[order[start]] {
            end += 1;
        }
        // 1-based ranks start+1 ..= end+1 average to (start + end + 2) / 2.
        let midrank = (start + end + 2) as f64 / 2.0;
        for &i in &order[start..=end] {
            ranks[i] = midrank * scale;
        }
        start = end + 1;
    }
    ranks
}
