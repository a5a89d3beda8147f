//! Structured (JSON) and tabular (CSV) exports.

use std::path::{Path, PathBuf};

use thiserror::Error;

use retail_sim_core::analytics::LeaderboardRow;
use retail_sim_core::market::MONTH_NAMES;

use super::SessionLog;
use crate::agents::parse::FIELD_HEADERS;
use crate::fixtures::{header, Fixture, FixtureRow};
use crate::format::format_cell;

pub const REVENUE_HEADER: &str = "Revenue $";
pub const NET_INCOME_HEADER: &str = "Net income $";

pub const LEADERBOARD_HEADER: [&str; 11] = [
    "rank",
    "agent",
    "session_id",
    "revenue",
    "net_income",
    "net_profit_margin_pct",
    "final_market_share_pct",
    "collapse_month",
    "sales_forecast_error_pct",
    "profit_forecast_error_pct",
    "carbon_tons",
];

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("session log JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("CSV header does not match the decision table layout")]
    Header,
}

pub fn to_json(log: &SessionLog) -> Result<String, ExportError> {
    let mut s = serde_json::to_string_pretty(log)?;
    s.push('\n');
    Ok(s)
}

pub fn from_json(text: &str) -> Result<SessionLog, ExportError> {
    Ok(serde_json::from_str(text)?)
}

fn csv_string(build: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> Result<(), csv::Error>) -> Result<String, ExportError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    build(&mut w)?;
    let bytes = w.into_inner().map_err(|e| ExportError::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("CSV of UTF-8 cells is UTF-8"))
}

/// Month rows: the decision columns in the published cell style, then
/// revenue and net income.
pub fn decisions_csv(log: &SessionLog) -> Result<String, ExportError> {
    csv_string(|w| {
        let mut head = header();
        head.extend([REVENUE_HEADER, NET_INCOME_HEADER]);
        w.write_record(&head)?;
        for m in &log.months {
            let mut row = vec![MONTH_NAMES[m.month as usize - 1].to_string()];
            row.extend(FIELD_HEADERS.iter().map(|(f, _)| format_cell(m.submitted.get(*f))));
            row.push(format_cell(m.report.flows.revenue.to_f64()));
            row.push(format_cell(m.report.flows.net_income.to_f64()));
            w.write_record(&row)?;
        }
        Ok(())
    })
}

/// Reads the decision columns of [`decisions_csv`] back as a fixture table.
pub fn decisions_from_csv(agent: &str, text: &str) -> Result<Fixture, ExportError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let head = r.headers()?.clone();
    let expected = header();
    if head.len() < expected.len() || head.iter().zip(&expected).any(|(a, b)| a != *b) {
        return Err(ExportError::Header);
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let cells: Vec<String> = rec.iter().take(expected.len()).map(str::to_string).collect();
        rows.push(FixtureRow { label: cells[0].clone(), cells: cells[1..].to_vec() });
    }
    Ok(Fixture { agent: agent.to_string(), partial: None, rows })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn leaderboard_csv(rows: &[LeaderboardRow]) -> Result<String, ExportError> {
    csv_string(|w| {
        w.write_record(LEADERBOARD_HEADER)?;
        for (i, r) in rows.iter().enumerate() {
            w.write_record([
                (i + 1).to_string(),
                r.agent.clone(),
                r.session_id.clone(),
                r.revenue.to_string(),
                r.net_income.to_string(),
                opt(r.net_profit_margin_pct),
                r.final_market_share_pct.to_string(),
                r.collapse_month.map(|m| m.to_string()).unwrap_or_default(),
                r.sales_forecast_error_pct.to_string(),
                r.profit_forecast_error_pct.to_string(),
                r.carbon_tons.to_string(),
            ])?;
        }
        Ok(())
    })
}

fn write(path: &Path, text: &str) -> Result<(), ExportError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|source| ExportError::Io { path: parent.to_path_buf(), source })?;
    }
    std::fs::write(path, text).map_err(|source| ExportError::Io { path: path.to_path_buf(), source })
}

/// Writes `<session>.json` and `<session>.csv` into `dir`; returns both paths.
pub fn export_session(log: &SessionLog, dir: &Path) -> Result<(PathBuf, PathBuf), ExportError> {
    let json = dir.join(format!("{}.json", log.session_id));
    let csv = dir.join(format!("{}.csv", log.session_id));
    write(&json, &to_json(log)?)?;
    write(&csv, &decisions_csv(log)?)?;
    Ok((json, csv))
}

pub fn export_leaderboard(rows: &[LeaderboardRow], dir: &Path) -> Result<(PathBuf, PathBuf), ExportError> {
    let json = dir.join("leaderboard.json");
    let csv = dir.join("leaderboard.csv");
    let mut text = serde_json::to_string_pretty(rows)?;
    text.push('\n');
    write(&json, &text)?;
    write(&csv, &leaderboard_csv(rows)?)?;
    Ok((json, csv))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_leaderboard_is_header_only() {
        let text = leaderboard_csv(&[]).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.starts_with("rank,agent,session_id"));
    }
}
