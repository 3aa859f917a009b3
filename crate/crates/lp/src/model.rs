use std::collections::HashSet;
use std::fmt;

use crate::error::ModelError;

/// Constraint sense of a row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub cost: f64,
    pub lower: f64,
    pub upper: f64,
    pub integer: bool,
}

impl Column {
    pub fn is_binary(&self) -> bool {
        self.integer && self.lower == 0.0 && self.upper == 1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    /// Sparse coefficients as `(column, value)`, no explicit zeros.
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// A minimisation problem `min c'x  s.t.  rows, lower <= x <= upper`, with
/// an integrality flag per column.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearModel {
    columns: Vec<Column>,
    rows: Vec<Row>,
}

impl LinearModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_column(
        &mut self,
        name: impl Into<String>,
        cost: f64,
        lower: f64,
        upper: f64,
        integer: bool,
    ) -> usize {
        self.columns.push(Column {
            name: name.into(),
            cost,
            lower,
            upper,
            integer,
        });
        self.columns.len() - 1
    }

    pub fn add_binary(&mut self, name: impl Into<String>, cost: f64) -> usize {
        self.add_column(name, cost, 0.0, 1.0, true)
    }

    /// Adds a row. Zero coefficients are dropped and repeated columns are
    /// merged, so the stored row is canonical.
    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        coeffs: impl IntoIterator<Item = (usize, f64)>,
        sense: Sense,
        rhs: f64,
    ) -> usize {
        let mut merged: Vec<(usize, f64)> = Vec::new();
        for (col, val) in coeffs {
            match merged.iter_mut().find(|(c, _)| *c == col) {
                Some(entry) => entry.1 += val,
                None => merged.push((col, val)),
            }
        }
        merged.retain(|&(_, v)| v != 0.0);
        self.rows.push(Row {
            name: name.into(),
            coeffs: merged,
            sense,
            rhs,
        });
        self.rows.len() - 1
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn column(&self, idx: usize) -> &Column {
        &self.columns[idx]
    }

    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn set_bounds(&mut self, col: usize, lower: f64, upper: f64) {
        self.columns[col].lower = lower;
        self.columns[col].upper = upper;
    }

    pub fn set_integer(&mut self, col: usize, integer: bool) {
        self.columns[col].integer = integer;
    }

    pub fn set_cost(&mut self, col: usize, cost: f64) {
        self.columns[col].cost = cost;
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn num_nonzeros(&self) -> usize {
        self.rows.iter().map(|r| r.coeffs.len()).sum()
    }

    /// Objective value of an assignment.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.columns.iter().zip(x).map(|(c, v)| c.cost * v).sum()
    }

    /// Largest violation of any row or bound by `x` (0 when feasible).
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (c, &v) in self.columns.iter().zip(x) {
            worst = worst.max(c.lower - v).max(v - c.upper);
        }
        for row in &self.rows {
            let lhs: f64 = row.coeffs.iter().map(|&(j, a)| a * x[j]).sum();
            let viol = match row.sense {
                Sense::Le => lhs - row.rhs,
                Sense::Ge => row.rhs - lhs,
                Sense::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        worst
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let mut names = HashSet::new();
        for c in &self.columns {
            if !is_identifier(&c.name) {
                return Err(ModelError::BadName(c.name.clone()));
            }
            if !names.insert(c.name.as_str()) {
                return Err(ModelError::DuplicateName(c.name.clone()));
            }
            if !c.cost.is_finite() {
                return Err(ModelError::NonFinite(format!("cost of {}", c.name)));
            }
            if c.lower.is_nan() || c.upper.is_nan() || c.lower > c.upper {
                return Err(ModelError::BadBounds(c.name.clone()));
            }
            if c.lower == f64::INFINITY || c.upper == f64::NEG_INFINITY {
                return Err(ModelError::BadBounds(c.name.clone()));
            }
        }
        let mut row_names = HashSet::new();
        for r in &self.rows {
            if !is_identifier(&r.name) {
                return Err(ModelError::BadName(r.name.clone()));
            }
            if !row_names.insert(r.name.as_str()) {
                return Err(ModelError::DuplicateName(r.name.clone()));
            }
            if !r.rhs.is_finite() {
                return Err(ModelError::NonFinite(format!("rhs of {}", r.name)));
            }
            for &(j, a) in &r.coeffs {
                if j >= self.columns.len() {
                    return Err(ModelError::UnknownColumn {
                        row: r.name.clone(),
                        column: j,
                    });
                }
                if !a.is_finite() {
                    return Err(ModelError::NonFinite(format!(
                        "coefficient of {} in {}",
                        self.columns[j].name, r.name
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Names usable in LP files: a letter or underscore followed by
/// alphanumerics, `_` or `.`.
pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
}
