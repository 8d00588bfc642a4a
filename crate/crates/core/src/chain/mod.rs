//! Validated finite irreducible transition matrices.

mod scc;

use std::collections::HashSet;

use num_traits::{One, Signed, Zero};
use serde::Deserialize;
use serde_json::Value;
use thiserror::Error;

use crate::exactalg::{format_rational, parse_rational, Rational};
use crate::matrix::Matrix;

pub use scc::strongly_connected_components;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChainError {
    #[error("row {row} sums to {sum}, not 1")]
    NotStochastic { row: usize, sum: String },
    #[error("negative entry {value} at row {row}, column {col}")]
    NegativeEntry { row: usize, col: usize, value: String },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("duplicate state label {0:?}")]
    DuplicateStateLabel(String),
    #[error("chain is not irreducible; strongly connected components: {}", format_partition(.components))]
    NotIrreducible { components: Vec<Vec<String>> },
    #[error("unknown state {0:?}")]
    UnknownState(String),
    #[error("invalid entry {text:?} at row {row}, column {col}")]
    BadEntry { row: usize, col: usize, text: String },
    #[error("JSON error at line {line}, column {column}: {message}")]
    Json { line: usize, column: usize, message: String },
    #[error("CSV error at line {line}: {message}")]
    Csv { line: usize, message: String },
}

fn format_partition(components: &[Vec<String>]) -> String {
    components
        .iter()
        .map(|c| format!("{{{}}}", c.join(",")))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Input document formats accepted by [`Chain::parse`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Json,
    Csv,
}

/// Row-stochastic, irreducible transition matrix over labelled states.
///
/// State order is the order in the input document; every derived vector and
/// matrix uses it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chain {
    states: Vec<String>,
    matrix: Matrix<Rational>,
}

#[derive(Deserialize)]
struct ChainDoc {
    #[serde(default)]
    states: Option<Vec<String>>,
    matrix: Vec<Vec<Value>>,
}

impl Chain {
    /// Validates dimensions, labels, nonnegativity, exact unit row sums and
    /// irreducibility.
    pub fn new(states: Vec<String>, rows: Vec<Vec<Rational>>) -> Result<Self, ChainError> {
        let d = rows.len();
        if d < 2 {
            return Err(ChainError::DimensionMismatch(format!(
                "a chain needs at least 2 states, got {d}"
            )));
        }
        if states.len() != d {
            return Err(ChainError::DimensionMismatch(format!(
                "{} state labels for a {d}-row matrix",
                states.len()
            )));
        }
        let mut seen = HashSet::new();
        for s in &states {
            if !seen.insert(s.as_str()) {
                return Err(ChainError::DuplicateStateLabel(s.clone()));
            }
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(ChainError::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {d}",
                    row.len()
                )));
            }
            for (j, x) in row.iter().enumerate() {
                if x.is_negative() {
                    return Err(ChainError::NegativeEntry {
                        row: i,
                        col: j,
                        value: format_rational(x),
                    });
                }
            }
            let sum: Rational = row.iter().sum();
            if !sum.is_one() {
                return Err(ChainError::NotStochastic {
                    row: i,
                    sum: format_rational(&sum),
                });
            }
        }
        let chain = Self {
            states,
            matrix: Matrix::from_rows(rows),
        };
        chain.check_irreducible()?;
        Ok(chain)
    }

    /// Builds a chain with states labelled `s0 .. s{d-1}`.
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self, ChainError> {
        let states = (0..rows.len()).map(|i| format!("s{i}")).collect();
        Self::new(states, rows)
    }

    pub fn parse(document: &str, format: InputFormat) -> Result<Self, ChainError> {
        match format {
            InputFormat::Json => Self::from_json_str(document),
            InputFormat::Csv => Self::from_csv_str(document),
        }
    }

    /// `{"states": [...], "matrix": [[...], ...]}` with entries given as
    /// rational strings (`"5/12"`, `"0.25"`) or JSON numbers.
    pub fn from_json_str(document: &str) -> Result<Self, ChainError> {
        let doc: ChainDoc = serde_json::from_str(document).map_err(|e| ChainError::Json {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let rows = doc
            .matrix
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, v)| {
                        let text = match v {
                            Value::String(s) => s.clone(),
                            Value::Number(n) => n.to_string(),
                            other => other.to_string(),
                        };
                        parse_rational(&text).map_err(|_| ChainError::BadEntry { row: i, col: j, text })
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        match doc.states {
            Some(states) => Self::new(states, rows),
            None => Self::from_rows(rows),
        }
    }

    /// Square comma-separated grid; blank lines and `#` comments are skipped.
    pub fn from_csv_str(document: &str) -> Result<Self, ChainError> {
        let mut rows = Vec::new();
        for (lineno, line) in document.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row = line
                .split(',')
                .enumerate()
                .map(|(j, field)| {
                    parse_rational(field).map_err(|_| ChainError::Csv {
                        line: lineno + 1,
                        message: format!("field {} ({:?}) is not a rational number", j + 1, field.trim()),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        Self::from_rows(rows)
    }

    /// Echo in the JSON input schema, entries as exact rational strings.
    pub fn to_json(&self) -> Value {
        serde_json::json!({
            "states": self.states,
            "matrix": self
                .matrix
                .to_rows()
                .iter()
                .map(|r| r.iter().map(format_rational).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        })
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn matrix(&self) -> &Matrix<Rational> {
        &self.matrix
    }

    pub fn entry(&self, from: usize, to: usize) -> &Rational {
        &self.matrix[(from, to)]
    }

    pub fn state_index(&self, label: &str) -> Result<usize, ChainError> {
        self.states
            .iter()
            .position(|s| s == label)
            .ok_or_else(|| ChainError::UnknownState(label.to_string()))
    }

    fn checked(&self, v: usize) -> Result<(), ChainError> {
        if v < self.dim() {
            Ok(())
        } else {
            Err(ChainError::UnknownState(format!("#{v}")))
        }
    }

    /// Successor lists of the positive-entry digraph.
    pub fn transition_graph(&self) -> Vec<Vec<usize>> {
        (0..self.dim())
            .map(|i| {
                (0..self.dim())
                    .filter(|&j| !self.matrix[(i, j)].is_zero())
                    .collect()
            })
            .collect()
    }

    /// Succeeds iff the positive-entry digraph is strongly connected.
    pub fn check_irreducible(&self) -> Result<(), ChainError> {
        let comps = strongly_connected_components(&self.transition_graph());
        if comps.len() == 1 {
            return Ok(());
        }
        Err(ChainError::NotIrreducible {
            components: comps
                .into_iter()
                .map(|c| c.into_iter().map(|i| self.states[i].clone()).collect())
                .collect(),
        })
    }

    /// `M` with row and column `v` removed; the remaining order is kept.
    pub fn delete_state(&self, v: usize) -> Result<Matrix<Rational>, ChainError> {
        self.checked(v)?;
        Ok(self.matrix.minor(v, v))
    }

    /// `M` with column `v` replaced by zeros (the taboo matrix for `v`).
    pub fn zero_column(&self, v: usize) -> Result<Matrix<Rational>, ChainError> {
        self.checked(v)?;
        let mut m = self.matrix.clone();
        for i in 0..self.dim() {
            m[(i, v)] = Rational::zero();
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::rat;

    fn twelfths(rows: &[[i64; 4]]) -> Vec<Vec<Rational>> {
        rows.iter()
            .map(|r| r.iter().map(|&n| rat(n, 12)).collect())
            .collect()
    }

    fn example4() -> Chain {
        let rows = twelfths(&[[5, 2, 4, 1], [1, 3, 3, 5], [1, 6, 4, 1], [2, 1, 6, 3]]);
        Chain::new(vec!["1".into(), "2".into(), "3".into(), "4".into()], rows).unwrap()
    }

    #[test]
    fn parses_rational_strings_and_decimals() {
        let c = Chain::from_json_str(
            r#"{"states":["a","b"],"matrix":[["1/2","0.5"],[0.25,"3/4"]]}"#,
        )
        .unwrap();
        assert_eq!(c.dim(), 2);
        assert_eq!(c.entry(1, 0), &rat(1, 4));
    }

    #[test]
    fn uniform_two_state() {
        let c = Chain::from_json_str(r#"{"states":["a","b"],"matrix":[["1/2","1/2"],["1/2","1/2"]]}"#);
        assert!(c.is_ok());
    }

    #[test]
    fn identity_is_reducible() {
        let err = Chain::from_json_str(r#"{"states":["a","b"],"matrix":[["1","0"],["0","1"]]}"#)
            .unwrap_err();
        assert_eq!(
            err,
            ChainError::NotIrreducible {
                components: vec![vec!["a".into()], vec!["b".into()]]
            }
        );
    }

    #[test]
    fn two_swap_pairs_are_reported() {
        let z = rat(0, 1);
        let o = rat(1, 1);
        let rows = vec![
            vec![z.clone(), o.clone(), z.clone(), z.clone()],
            vec![o.clone(), z.clone(), z.clone(), z.clone()],
            vec![z.clone(), z.clone(), z.clone(), o.clone()],
            vec![z.clone(), z.clone(), o.clone(), z.clone()],
        ];
        let err = Chain::from_rows(rows).unwrap_err();
        assert_eq!(
            err,
            ChainError::NotIrreducible {
                components: vec![vec!["s0".into(), "s1".into()], vec!["s2".into(), "s3".into()]]
            }
        );
        assert!(err.to_string().contains("{s0,s1} {s2,s3}"));
    }

    #[test]
    fn swap_chain_is_irreducible() {
        assert!(Chain::from_csv_str("0,1\n1,0\n").is_ok());
    }

    #[test]
    fn validation_errors() {
        let e = Chain::from_csv_str("1/2,1/3\n1/2,1/2").unwrap_err();
        assert_eq!(e, ChainError::NotStochastic { row: 0, sum: "5/6".into() });
        let e = Chain::from_csv_str("3/2,-1/2\n1/2,1/2").unwrap_err();
        assert!(matches!(e, ChainError::NegativeEntry { row: 0, col: 1, .. }));
        let e = Chain::from_csv_str("1/2,1/2\n1").unwrap_err();
        assert!(matches!(e, ChainError::DimensionMismatch(_)));
        let e = Chain::from_json_str(r#"{"states":["a","a"],"matrix":[["0","1"],["1","0"]]}"#)
            .unwrap_err();
        assert_eq!(e, ChainError::DuplicateStateLabel("a".into()));
        let e = Chain::from_csv_str("1").unwrap_err();
        assert!(matches!(e, ChainError::DimensionMismatch(_)));
        let e = Chain::from_csv_str("0,1\n1,zero\n").unwrap_err();
        assert!(matches!(e, ChainError::Csv { line: 2, .. }));
        let e = Chain::from_json_str("{\"matrix\": [[\"0\", \"1\"],\n [\"1\", \"x\"]]}").unwrap_err();
        assert!(matches!(e, ChainError::BadEntry { row: 1, col: 1, .. }));
        let e = Chain::from_json_str("{\"matrix\": [[\"0\", \"1\"],\n [\"1\" \"0\"]]}").unwrap_err();
        assert!(matches!(e, ChainError::Json { line: 2, .. }));
    }

    #[test]
    fn delete_state_keeps_order() {
        let c = example4();
        let m = c.delete_state(0).unwrap();
        let expected = twelfths(&[[3, 3, 5, 0], [6, 4, 1, 0], [1, 6, 3, 0]])
            .into_iter()
            .map(|r| r[..3].to_vec())
            .collect::<Vec<_>>();
        assert_eq!(m.to_rows(), expected);
        // Deleting twice composes down to (d-2) x (d-2).
        assert_eq!(m.minor(0, 0).rows(), 2);
        assert!(matches!(c.delete_state(4), Err(ChainError::UnknownState(_))));
    }

    #[test]
    fn zero_column_removes_column_mass() {
        let c = example4();
        for v in 0..4 {
            let z = c.zero_column(v).unwrap();
            for i in 0..4 {
                assert!(z[(i, v)].is_zero());
                let s: Rational = z.row(i).iter().sum();
                assert_eq!(s, Rational::one() - c.entry(i, v));
                for j in (0..4).filter(|&j| j != v) {
                    assert_eq!(&z[(i, j)], c.entry(i, j));
                }
            }
            // Deleting v equals zeroing column v then dropping row and column v.
            assert_eq!(z.minor(v, v), c.delete_state(v).unwrap());
        }
        let swap = Chain::from_csv_str("0,1\n1,0").unwrap();
        assert_eq!(
            swap.zero_column(1).unwrap().to_rows(),
            vec![vec![rat(0, 1), rat(0, 1)], vec![rat(1, 1), rat(0, 1)]]
        );
        assert_eq!(swap.delete_state(0).unwrap().to_rows(), vec![vec![rat(0, 1)]]);
    }

    #[test]
    fn json_round_trip() {
        let c = example4();
        let again = Chain::from_json_str(&c.to_json().to_string()).unwrap();
        assert_eq!(c, again);
    }
}
