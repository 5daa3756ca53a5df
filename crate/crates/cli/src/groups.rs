//! Parsing of the column-grouping expression.
//!
//! Groups are pipe-separated lists of comma-separated column names:
//! `"x1,x2|y"` groups columns x1 and x2 against column y. Names must exist
//! in the table header and may not repeat.

use ascore_core::{DataTable, VariableGrouping};

use crate::CliError;

/// Resolves a grouping expression against the table's header.
pub fn parse_grouping(expr: &str, table: &DataTable) -> Result<VariableGrouping, CliError> {
    let groups = parse_name_groups(expr, table)?;
    VariableGrouping::new(groups).map_err(CliError::from)
}

/// Resolves the pipe-separated groups to column-index lists without
/// imposing the two-group minimum (the semipartial command needs three
/// role-ordered sets).
pub fn parse_name_groups(expr: &str, table: &DataTable) -> Result<Vec<Vec<usize>>, CliError> {
    expr.split('|')
        .map(|group| {
            group
                .split(',')
                .map(|name| {
                    let name = name.trim();
                    if name.is_empty() {
                        return Err(CliError::BadGrouping {
                            expr: expr.to_string(),
                            reason: "empty column name".into(),
                        });
                    }
                    table
                        .column_index(name)
                        .ok_or_else(|| CliError::BadGrouping {
                            expr: expr.to_string(),
                            reason: format!("no column named {:?} in the input", name),
                        })
                })
                .collect()
        })
        .collect()
}
