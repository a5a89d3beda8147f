//! Transcribed decision tables, one tab-separated file per agent.
//!
//! Layout: optional `# key: value` comment lines (`agent`, `partial`), a header
//! row whose columns follow [`FIXTURE_HEADER`], then one row per month.
//! Cells keep the published spelling (`5,000`, `-` for zero, `- 20,000`).

use std::path::{Path, PathBuf};

use thiserror::Error;

use retail_sim_core::market::MONTH_NAMES;
use retail_sim_core::{DecisionVector, MONTHS};

use crate::agents::parse::FIELD_HEADERS;
use crate::format::{format_cell, parse_amount};

pub const MONTH_COLUMN: &str = "Current year";

/// Names of the fixtures compiled into the binary.
pub const BUILTIN: [&str; 6] = ["chatgpt", "gemini-flash", "gemini-pro", "grok", "meta", "mistral"];

fn builtin_text(name: &str) -> Option<&'static str> {
    Some(match name {
        "chatgpt" => include_str!("../assets/fixtures/chatgpt.tsv"),
        "gemini-flash" => include_str!("../assets/fixtures/gemini-flash.tsv"),
        "gemini-pro" => include_str!("../assets/fixtures/gemini-pro.tsv"),
        "grok" => include_str!("../assets/fixtures/grok.tsv"),
        "meta" => include_str!("../assets/fixtures/meta.tsv"),
        "mistral" => include_str!("../assets/fixtures/mistral.tsv"),
        _ => return None,
    })
}

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("reading fixture {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("unknown built-in fixture {0:?}")]
    UnknownBuiltin(String),
    #[error("fixture has no header row")]
    MissingHeader,
    #[error("header column {index} is {found:?}, expected {expected:?}")]
    Header { index: usize, found: String, expected: String },
    #[error("row {row} has {found} cells, expected {expected}")]
    RowWidth { row: usize, found: usize, expected: usize },
    #[error("row {row}, column {column:?}: {message}")]
    Cell { row: usize, column: String, message: String },
    #[error("fixture {agent:?} is partial: {reason}")]
    Partial { agent: String, reason: String },
    #[error("fixture {agent:?} has {rows} rows, a full session needs {expected}")]
    Incomplete { agent: String, rows: usize, expected: usize },
}

pub fn header() -> Vec<&'static str> {
    let mut h = vec![MONTH_COLUMN];
    h.extend(FIELD_HEADERS.iter().map(|(_, name)| *name));
    h
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixtureRow {
    pub label: String,
    pub cells: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fixture {
    pub agent: String,
    /// Reason the table is incomplete, if it is.
    pub partial: Option<String>,
    pub rows: Vec<FixtureRow>,
}

impl Fixture {
    pub fn parse(text: &str) -> Result<Fixture, FixtureError> {
        let mut agent = String::new();
        let mut partial = None;
        let mut lines = text.lines().filter(|l| !l.trim().is_empty()).peekable();
        while let Some(line) = lines.peek() {
            let Some(comment) = line.strip_prefix('#') else { break };
            if let Some((key, value)) = comment.split_once(':') {
                match key.trim() {
                    "agent" => agent = value.trim().to_string(),
                    "partial" => partial = Some(value.trim().to_string()),
                    _ => {}
                }
            }
            lines.next();
        }
        let head: Vec<&str> = lines.next().ok_or(FixtureError::MissingHeader)?.split('\t').map(str::trim).collect();
        let expected = header();
        if head.len() != expected.len() {
            return Err(FixtureError::RowWidth { row: 0, found: head.len(), expected: expected.len() });
        }
        for (index, (found, want)) in head.iter().zip(&expected).enumerate() {
            if found != want {
                return Err(FixtureError::Header { index, found: found.to_string(), expected: want.to_string() });
            }
        }
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let cells: Vec<String> = line.split('\t').map(|c| c.trim().to_string()).collect();
            if cells.len() != expected.len() {
                return Err(FixtureError::RowWidth { row: i + 1, found: cells.len(), expected: expected.len() });
            }
            let mut cells = cells.into_iter();
            let label = cells.next().unwrap_or_default();
            rows.push(FixtureRow { label, cells: cells.collect() });
        }
        Ok(Fixture { agent, partial, rows })
    }

    pub fn load(path: &Path) -> Result<Fixture, FixtureError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| FixtureError::Io { path: path.to_path_buf(), source })?;
        Fixture::parse(&text)
    }

    pub fn builtin(name: &str) -> Result<Fixture, FixtureError> {
        let text = builtin_text(name).ok_or_else(|| FixtureError::UnknownBuiltin(name.to_string()))?;
        Fixture::parse(text)
    }

    /// A built-in name or a path on disk.
    pub fn resolve(spec: &str) -> Result<Fixture, FixtureError> {
        if builtin_text(spec).is_some() {
            Fixture::builtin(spec)
        } else {
            Fixture::load(Path::new(spec))
        }
    }

    pub fn is_complete(&self) -> bool {
        self.partial.is_none() && self.rows.len() == MONTHS
    }

    pub fn decisions(&self) -> Result<Vec<DecisionVector>, FixtureError> {
        if let Some(reason) = &self.partial {
            return Err(FixtureError::Partial { agent: self.agent.clone(), reason: reason.clone() });
        }
        if self.rows.len() != MONTHS {
            return Err(FixtureError::Incomplete {
                agent: self.agent.clone(),
                rows: self.rows.len(),
                expected: MONTHS,
            });
        }
        self.rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let mut d = DecisionVector::default();
                for ((field, column), cell) in FIELD_HEADERS.iter().zip(&row.cells) {
                    let value = parse_amount(cell).map_err(|message| FixtureError::Cell {
                        row: i + 1,
                        column: column.to_string(),
                        message,
                    })?;
                    d.set(*field, value);
                }
                Ok(d)
            })
            .collect()
    }

    /// Table in the published cell style, one row per decision.
    pub fn from_decisions(agent: &str, decisions: &[DecisionVector]) -> Fixture {
        let rows = decisions
            .iter()
            .enumerate()
            .map(|(i, d)| FixtureRow {
                label: MONTH_NAMES.get(i).copied().unwrap_or("?").to_string(),
                cells: FIELD_HEADERS.iter().map(|(field, _)| format_cell(d.get(*field))).collect(),
            })
            .collect();
        Fixture { agent: agent.to_string(), partial: None, rows }
    }

    pub fn to_tsv(&self) -> String {
        let mut out = format!("# agent: {}\n", self.agent);
        if let Some(reason) = &self.partial {
            out.push_str(&format!("# partial: {reason}\n"));
        }
        out.push_str(&header().join("\t"));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.label);
            for cell in &row.cells {
                out.push('\t');
                out.push_str(cell);
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use retail_sim_core::DecisionField;

    #[test]
    fn builtins_load() {
        for name in BUILTIN {
            let f = Fixture::builtin(name).unwrap();
            assert!(!f.agent.is_empty());
            assert_eq!(f.is_complete(), name != "gemini-pro", "{name}");
        }
    }

    #[test]
    fn chatgpt_january() {
        let d = Fixture::builtin("chatgpt").unwrap().decisions().unwrap();
        let jan = &d[0];
        assert_eq!(jan.order_units, 5_000.0);
        assert_eq!(jan.price, 105.0);
        assert_eq!(jan.workers_hired, 2.0);
        assert_eq!(jan.marketing_expense, 20_000.0);
        assert_eq!(jan.training_expense, 10_000.0);
        assert_eq!(jan.rnd_expense, 10_000.0);
        assert_eq!(jan.sales_forecast_next, 8_000.0);
        assert_eq!(jan.net_income_forecast, 25_000.0);
        assert_eq!(d[2].get(DecisionField::NetIncomeForecast), -20_000.0);
    }

    #[test]
    fn gemini_flash_july() {
        let d = Fixture::builtin("gemini-flash").unwrap().decisions().unwrap();
        assert_eq!(d[6].order_units, 0.0);
        assert_eq!(d[6].price, 110.0);
    }

    #[test]
    fn partial_fixture_refuses_replay() {
        let f = Fixture::builtin("gemini-pro").unwrap();
        assert!(matches!(f.decisions(), Err(FixtureError::Partial { .. })));
    }

    #[test]
    fn every_cell_survives_reformatting() {
        for name in BUILTIN.iter().filter(|n| **n != "gemini-pro") {
            let f = Fixture::builtin(name).unwrap();
            let again = Fixture::from_decisions(&f.agent, &f.decisions().unwrap());
            assert_eq!(again, f, "{name}");
            assert_eq!(Fixture::parse(&f.to_tsv()).unwrap(), f);
        }
    }

    #[test]
    fn header_mismatch_is_reported() {
        let text = "Current year\tOrder\n";
        assert!(matches!(Fixture::parse(text), Err(FixtureError::RowWidth { row: 0, .. })));
    }
}
