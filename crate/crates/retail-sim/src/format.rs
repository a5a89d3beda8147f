//! Number formats used by decision tables, prompts and exports.

use std::fmt::Write;

use retail_sim_core::market::MONTH_NAMES;
use retail_sim_core::{Money, MonthlyReport};

fn group_digits(digits: &str) -> String {
    let mut out = String::with_capacity(digits.len() + digits.len() / 3);
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(ch);
    }
    out
}

/// Decision-table cell: `-` for zero, thousands separators, `- 20,000` for negatives.
pub fn format_cell(value: f64) -> String {
    if value == 0.0 {
        return "-".to_string();
    }
    let plain = format!("{}", value.abs());
    let (int, frac) = match plain.split_once('.') {
        Some((i, f)) => (i.to_string(), Some(f.to_string())),
        None => (plain, None),
    };
    let mut out = group_digits(&int);
    if let Some(f) = frac {
        out.push('.');
        out.push_str(&f);
    }
    if value < 0.0 {
        format!("- {out}")
    } else {
        out
    }
}

/// Reads a number written the way people and models write money: `$5,000`,
/// `- 20,000`, `(1,500)`, `12.5k`, `40%`. A lone dash or an empty cell is zero.
pub fn parse_amount(raw: &str) -> Result<f64, String> {
    let mut s = raw.trim().replace(['\u{2014}', '\u{2013}', '\u{2212}'], "-");
    for junk in ["**", "`", "$", "USD", "usd"] {
        s = s.replace(junk, "");
    }
    let s = s.trim();
    let lowered = s.to_ascii_lowercase();
    if s.is_empty() || s.chars().all(|c| c == '-') || matches!(lowered.as_str(), "none" | "n/a" | "na" | "nil" | "zero")
    {
        return Ok(0.0);
    }
    let (negative, body) = if let Some(rest) = s.strip_prefix('-') {
        (true, rest.trim_start())
    } else if let Some(rest) = s.strip_prefix('(').and_then(|r| r.split_once(')')) {
        (true, rest.0.trim())
    } else {
        (false, s)
    };
    let body = body.trim_start_matches('$').trim_start();
    let end = body.find(|c: char| !(c.is_ascii_digit() || c == ',' || c == '.')).unwrap_or(body.len());
    let number = &body[..end];
    if number.is_empty() || !number.starts_with(|c: char| c.is_ascii_digit()) {
        return Err(format!("no number in {raw:?}"));
    }
    let cleaned: String = number.trim_end_matches('.').chars().filter(|c| *c != ',').collect();
    let mut value: f64 = cleaned.parse().map_err(|_| format!("malformed number in {raw:?}"))?;
    let suffix = body[end..].trim_start().to_ascii_lowercase();
    let word_end = suffix.chars().nth(1).is_none_or(|c| !c.is_ascii_alphabetic());
    if suffix.starts_with("million") || (suffix.starts_with('m') && word_end) {
        value *= 1_000_000.0;
    } else if suffix.starts_with("thousand") || (suffix.starts_with('k') && word_end) {
        value *= 1_000.0;
    } else if suffix.starts_with('%') {
        value /= 100.0;
    }
    Ok(if negative { -value } else { value })
}

fn money_cell(m: Money) -> String {
    m.grouped().to_string()
}

fn opt_cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.2}")).unwrap_or_else(|| "n/a".to_string())
}

type Row<'a> = (&'a str, &'a dyn Fn(&MonthlyReport) -> String);

fn table(title: &str, reports: &[MonthlyReport], rows: &[Row<'_>]) -> String {
    let label_width = rows.iter().map(|(l, _)| l.len()).max().unwrap_or(0).max(title.len());
    let cells: Vec<Vec<String>> = rows.iter().map(|(_, f)| reports.iter().map(f).collect()).collect();
    let headers: Vec<&str> = reports.iter().map(|r| MONTH_NAMES[r.month as usize - 1]).collect();
    let widths: Vec<usize> = (0..reports.len())
        .map(|c| cells.iter().map(|row| row[c].len()).chain([headers[c].len()]).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    let _ = write!(out, "{title:<label_width$}");
    for (h, w) in headers.iter().zip(&widths) {
        let _ = write!(out, "  {h:>w$}");
    }
    out.push('\n');
    for ((label, _), row) in rows.iter().zip(&cells) {
        let _ = write!(out, "{label:<label_width$}");
        for (cell, w) in row.iter().zip(&widths) {
            let _ = write!(out, "  {cell:>w$}");
        }
        out.push('\n');
    }
    out
}

/// Income statement, balance sheet and cash flow, one column per month.
pub fn render_statements(reports: &[MonthlyReport]) -> String {
    let m = |f: fn(&MonthlyReport) -> Money| move |r: &MonthlyReport| money_cell(f(r));
    let income = table(
        "INCOME STATEMENT",
        reports,
        &[
            ("Revenue", &m(|r| r.statements.income.revenue)),
            ("Materials expense", &m(|r| r.statements.income.materials_expense)),
            ("Staff costs", &m(|r| r.statements.income.staff_costs)),
            ("Depreciation expense", &m(|r| r.statements.income.depreciation)),
            ("Other operating expenses", &m(|r| r.statements.income.other_opex)),
            ("Total costs and expenses", &m(|r| r.statements.income.total_costs)),
            ("Operating income", &m(|r| r.statements.income.operating_income)),
            ("Interest expense", &m(|r| r.statements.income.interest)),
            ("Profit before tax", &m(|r| r.statements.income.profit_before_tax)),
            ("Income tax expense", &m(|r| r.statements.income.tax)),
            ("Net income", &m(|r| r.statements.income.net_income)),
        ],
    );
    let balance = table(
        "BALANCE SHEET",
        reports,
        &[
            ("Cash (overdraft if negative)", &m(|r| r.statements.balance.cash)),
            ("Accounts receivable", &m(|r| r.statements.balance.receivables)),
            ("Inventory", &m(|r| r.statements.balance.inventory_value)),
            ("Total current assets", &m(|r| r.statements.balance.total_current_assets)),
            ("Buildings", &m(|r| r.statements.balance.buildings_gross)),
            ("  Accumulated depreciation", &m(|r| r.statements.balance.buildings_accumulated_depr)),
            ("Equipment", &m(|r| r.statements.balance.equipment_gross)),
            ("  Accumulated depreciation", &m(|r| r.statements.balance.equipment_accumulated_depr)),
            ("Intangible assets", &m(|r| r.statements.balance.intangibles)),
            ("TOTAL ASSETS", &m(|r| r.statements.balance.total_assets)),
            ("Accounts payable", &m(|r| r.statements.balance.accounts_payable)),
            ("Long-term debt", &m(|r| r.statements.balance.long_term_debt)),
            ("Provisions", &m(|r| r.statements.balance.provisions)),
            ("Paid-in capital", &m(|r| r.statements.balance.paid_in_capital)),
            ("Retained earnings", &m(|r| r.statements.balance.retained_earnings)),
            ("Total equity", &m(|r| r.statements.balance.total_equity)),
            ("TOTAL EQUITY AND LIABILITIES", &m(|r| r.statements.balance.total_liabilities_and_equity)),
        ],
    );
    let cash = table(
        "STATEMENT OF CASH FLOW",
        reports,
        &[
            ("Net income", &m(|r| r.statements.cash_flow.net_income)),
            ("Depreciation", &m(|r| r.statements.cash_flow.depreciation_addback)),
            ("Changes in inventory", &m(|r| r.statements.cash_flow.inventory_change)),
            ("Changes in provisions", &m(|r| r.statements.cash_flow.provisions_change)),
            ("Changes in receivables", &m(|r| r.statements.cash_flow.receivables_change)),
            ("Loans", &m(|r| r.statements.cash_flow.loans)),
            ("Dividends", &m(|r| r.statements.cash_flow.dividends)),
            ("Net increase (decrease) in cash", &m(|r| r.statements.cash_flow.net_cash_change)),
            ("Cash at beginning of period", &m(|r| r.statements.cash_flow.cash_begin)),
            ("Cash at end of period", &m(|r| r.statements.cash_flow.cash_end)),
        ],
    );
    format!("{income}\n{balance}\n{cash}")
}

/// KPI rows, one column per month.
pub fn render_kpis(reports: &[MonthlyReport]) -> String {
    table(
        "KEY INDICATORS",
        reports,
        &[
            ("ROI %", &|r| opt_cell(r.kpis.roi_pct)),
            ("ROA %", &|r| opt_cell(r.kpis.roa_pct)),
            ("Leverage %", &|r| opt_cell(r.kpis.leverage_pct)),
            ("Gross profit margin", &|r| opt_cell(r.kpis.gross_margin_pct)),
            ("Share price", &|r| money_cell(r.kpis.share_price)),
            ("Market capitalization", &|r| money_cell(r.kpis.market_cap)),
            ("Sales forecast error %", &|r| format!("{:.2}", r.kpis.sales_forecast_error_pct)),
            ("Profit forecast error %", &|r| format!("{:.2}", r.kpis.profit_forecast_error_pct)),
            ("Market share %", &|r| format!("{:.2}", r.kpis.market_share_pct)),
            ("Units sold", &|r| r.flows.units_sold.to_string()),
            ("Units demanded", &|r| r.flows.units_demanded.to_string()),
            ("Closing inventory (units)", &|r| r.flows.closing_inventory_units.to_string()),
            ("Units arriving", &|r| r.flows.units_received.to_string()),
            ("Total staff", &|r| format!("{:.2}", r.kpis.workers)),
            ("Productivity (units/hour)", &|r| format!("{:.2}", r.kpis.max_productivity_hourly)),
            ("Capacity utilization %", &|r| opt_cell(r.kpis.capacity_utilization_pct)),
            ("Carbon footprint (t CO2)", &|r| format!("{:.2}", r.kpis.carbon_tons)),
            ("Environmental index", &|r| format!("{:.2}", r.kpis.env_index)),
            ("Fill rate %", &|r| opt_cell(r.kpis.fill_rate_pct)),
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure_cells() {
        assert_eq!(format_cell(0.0), "-");
        assert_eq!(format_cell(5_000.0), "5,000");
        assert_eq!(format_cell(105.0), "105");
        assert_eq!(format_cell(-20_000.0), "- 20,000");
        assert_eq!(format_cell(1_000_000.0), "1,000,000");
        assert_eq!(format_cell(2.5), "2.5");
    }

    #[test]
    fn amounts() {
        assert_eq!(parse_amount("5,000"), Ok(5_000.0));
        assert_eq!(parse_amount("-"), Ok(0.0));
        assert_eq!(parse_amount("—"), Ok(0.0));
        assert_eq!(parse_amount(""), Ok(0.0));
        assert_eq!(parse_amount("- 20,000"), Ok(-20_000.0));
        assert_eq!(parse_amount("$1,250.50"), Ok(1_250.5));
        assert_eq!(parse_amount("(1,500)"), Ok(-1_500.0));
        assert_eq!(parse_amount("**$12k**"), Ok(12_000.0));
        assert_eq!(parse_amount("40%"), Ok(0.4));
        assert_eq!(parse_amount("5000 units"), Ok(5_000.0));
        assert_eq!(parse_amount("1.5 million"), Ok(1_500_000.0));
        assert_eq!(parse_amount("300 more"), Ok(300.0));
        assert!(parse_amount("about right").is_err());
    }

    proptest::proptest! {
        #[test]
        fn cells_round_trip(v in -1e9f64..1e9) {
            let v = (v * 100.0).round() / 100.0;
            proptest::prop_assert_eq!(parse_amount(&format_cell(v)).unwrap(), v);
        }
    }
}
