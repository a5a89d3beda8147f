//! Extracts a decision vector from free-form model output.
//!
//! Two layouts are recognised: a table (tab- or pipe-separated, with or
//! without a header row) and labelled `key: value` pairs separated by
//! newlines, ` / ` or `;`.

use serde::{Deserialize, Serialize};

use retail_sim_core::{DecisionField, DecisionVector};

use crate::format::parse_amount;

/// Column headers of the decision table, in column order.
pub const FIELD_HEADERS: [(DecisionField, &str); 10] = [
    (DecisionField::OrderUnits, "Your order in units (required)"),
    (DecisionField::Price, "Price $ (required)"),
    (DecisionField::WorkersHired, "Workers hired"),
    (DecisionField::WorkersDismissed, "Workers dismissed"),
    (DecisionField::MarketingExpense, "Marketing expense $"),
    (DecisionField::Loans, "Loans $"),
    (DecisionField::TrainingExpense, "Training expense $"),
    (DecisionField::RndExpense, "R&D expense $"),
    (DecisionField::SalesForecastNext, "Sales forecast next period $"),
    (DecisionField::NetIncomeForecast, "Net income forecast $"),
];

pub const DIVIDEND_HEADER: &str = "Dividend rate (fraction of profit)";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseDiagnostic {
    pub field: Option<DecisionField>,
    pub problem: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionParseResult {
    pub decision: Option<DecisionVector>,
    pub diagnostics: Vec<ParseDiagnostic>,
    pub raw_text: String,
    pub attempts: u32,
}

/// Maps a free-text label onto a decision field.
pub fn match_label(label: &str) -> Option<DecisionField> {
    let l = label.to_ascii_lowercase();
    let has = |k: &str| l.contains(k);
    if has("forecast") || has("projection") || has("expected") {
        if has("income") || has("profit") {
            return Some(DecisionField::NetIncomeForecast);
        }
        if has("sales") || has("revenue") {
            return Some(DecisionField::SalesForecastNext);
        }
        return None;
    }
    if has("dividend") {
        Some(DecisionField::DividendRate)
    } else if has("dismiss") || has("redundan") || has("fire") || has("layoff") || has("lay off") {
        Some(DecisionField::WorkersDismissed)
    } else if has("hire") || has("hiring") || has("recruit") {
        Some(DecisionField::WorkersHired)
    } else if has("training") {
        Some(DecisionField::TrainingExpense)
    } else if has("r&d") || has("research") || has("rnd") || has("r & d") {
        Some(DecisionField::RndExpense)
    } else if has("marketing") || has("promotion") || has("advertis") {
        Some(DecisionField::MarketingExpense)
    } else if has("loan") || has("borrow") {
        Some(DecisionField::Loans)
    } else if has("price") {
        Some(DecisionField::Price)
    } else if has("order") || has("units") || has("purchase") {
        Some(DecisionField::OrderUnits)
    } else {
        None
    }
}

fn clean_label(raw: &str) -> &str {
    raw.trim()
        .trim_start_matches(|c: char| c == '-' || c == '*' || c == '#' || c == '>' || c.is_whitespace())
        .trim_start_matches(|c: char| c.is_ascii_digit() || c == '.' || c == ')')
        .trim()
}

fn split_row(line: &str) -> Option<Vec<String>> {
    let cells: Vec<String> = if line.contains('\t') {
        line.split('\t').map(|c| c.trim().to_string()).collect()
    } else if line.matches('|').count() >= 2 {
        let trimmed = line.trim().trim_start_matches('|').trim_end_matches('|');
        trimmed.split('|').map(|c| c.trim().to_string()).collect()
    } else {
        return None;
    };
    Some(cells)
}

fn is_separator(cells: &[String]) -> bool {
    cells.iter().all(|c| !c.is_empty() && c.chars().all(|ch| matches!(ch, '-' | ':' | ' ' | '=')))
        && cells.iter().any(|c| c.contains("--"))
}

#[derive(Default)]
struct Collected {
    values: Vec<(DecisionField, f64)>,
    diagnostics: Vec<ParseDiagnostic>,
}

impl Collected {
    fn put(&mut self, field: DecisionField, raw: &str) {
        if self.values.iter().any(|(f, _)| *f == field) {
            return;
        }
        match parse_amount(raw) {
            Ok(v) => {
                let v = if field == DecisionField::DividendRate && v > 1.0 { v / 100.0 } else { v };
                self.values.push((field, v));
            }
            Err(problem) => self.diagnostics.push(ParseDiagnostic { field: Some(field), problem }),
        }
    }
}

fn from_table(lines: &[&str]) -> Option<Collected> {
    let rows: Vec<Vec<String>> = lines.iter().filter_map(|l| split_row(l)).filter(|c| !is_separator(c)).collect();
    if rows.is_empty() {
        return None;
    }
    let header_at = rows.iter().position(|cells| cells.iter().filter(|c| match_label(c).is_some()).count() >= 2);
    let mut out = Collected::default();
    match header_at {
        Some(h) => {
            let header: Vec<Option<DecisionField>> = rows[h].iter().map(|c| match_label(c)).collect();
            let data = rows[h + 1..]
                .iter()
                .find(|r| r.iter().any(|c| parse_amount(c).is_ok() && c.chars().any(|ch| ch.is_ascii_digit())))?;
            for (field, cell) in header.iter().zip(data) {
                if let Some(f) = field {
                    out.put(*f, cell);
                }
            }
        }
        None => {
            let data = rows.iter().find(|r| r.len() >= 10)?;
            let cells: Vec<&String> = if data.len() > 10 && parse_amount(&data[0]).is_err() {
                data[1..].iter().collect()
            } else {
                data.iter().collect()
            };
            for ((field, _), cell) in FIELD_HEADERS.iter().zip(cells.iter()) {
                out.put(*field, cell);
            }
            if let Some(cell) = cells.get(10) {
                out.put(DecisionField::DividendRate, cell);
            }
        }
    }
    Some(out)
}

fn from_pairs(lines: &[&str]) -> Collected {
    let mut out = Collected::default();
    for line in lines {
        for segment in line.split(" / ").flat_map(|s| s.split(';')) {
            let Some((label, value)) = segment.split_once(':').or_else(|| segment.split_once('=')) else {
                continue;
            };
            if let Some(field) = match_label(clean_label(label)) {
                out.put(field, value);
            }
        }
    }
    out
}

pub fn parse_decision_block(text: &str) -> DecisionParseResult {
    let normalized = text.replace('\r', "");
    let lines: Vec<&str> = normalized.lines().collect();
    let mut collected = from_table(&lines).filter(|c| !c.values.is_empty()).unwrap_or_default();
    if collected.values.is_empty() {
        collected = from_pairs(&lines);
    }

    let mut decision = DecisionVector::default();
    for (field, value) in &collected.values {
        decision.set(*field, *value);
    }
    let mut diagnostics = collected.diagnostics;
    for field in [DecisionField::OrderUnits, DecisionField::Price] {
        let present = collected.values.iter().any(|(f, _)| *f == field);
        let already = diagnostics.iter().any(|d| d.field == Some(field));
        if !present && !already {
            diagnostics.push(ParseDiagnostic { field: Some(field), problem: "required field missing".into() });
        }
    }
    let usable = diagnostics.iter().all(|d| !d.field.is_some_and(|f| f.is_required()));
    if usable {
        // An unreadable optional field stays at zero.
        diagnostics.clear();
    }
    DecisionParseResult {
        decision: if usable { Some(decision) } else { None },
        diagnostics,
        raw_text: text.to_string(),
        attempts: 1,
    }
}

/// Labelled block that `parse_decision_block` reads back to the same vector.
pub fn render_decision_block(d: &DecisionVector) -> String {
    let mut out = String::new();
    for (field, header) in FIELD_HEADERS {
        out.push_str(&format!("{header}: {}\n", d.get(field)));
    }
    out.push_str(&format!("{DIVIDEND_HEADER}: {}\n", d.dividend_rate));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slash_separated_pairs() {
        let text = "Your order in units: 5,000 / Price $: 105 / Workers hired: 2 / Workers dismissed: - / \
                    Marketing expense $: 20,000 / Loans $: - / Training expense $: 10,000 / R&D expense $: 10,000 / \
                    Sales forecast next period $: 8,000 / Net income forecast $: 25,000";
        let r = parse_decision_block(text);
        let d = r.decision.unwrap();
        assert_eq!(d.order_units, 5_000.0);
        assert_eq!(d.price, 105.0);
        assert_eq!(d.workers_hired, 2.0);
        assert_eq!(d.workers_dismissed, 0.0);
        assert_eq!(d.marketing_expense, 20_000.0);
        assert_eq!(d.net_income_forecast, 25_000.0);
    }

    #[test]
    fn dash_row_with_header() {
        let text = "Current year\tYour order in units (required)\tPrice $ (required)\tWorkers hired\tWorkers dismissed\t\
                    Marketing expense $\tLoans $\tTraining expense $\tR&D expense $\tSales forecast next period $\tNet income forecast $\n\
                    March\t3,000\t95\t-\t-\t15,000\t-\t5,000\t-\t120,000\t- 20,000\n";
        let d = parse_decision_block(text).decision.unwrap();
        assert_eq!(d.order_units, 3_000.0);
        assert_eq!(d.workers_hired, 0.0);
        assert_eq!(d.loans, 0.0);
        assert_eq!(d.rnd_expense, 0.0);
        assert_eq!(d.net_income_forecast, -20_000.0);
    }

    #[test]
    fn markdown_table() {
        let text = "Here is my plan:\n\n| Order | Price | Hired | Dismissed | Marketing | Loans | Training | R&D | Sales forecast | Income forecast |\n\
                    |---|---|---|---|---|---|---|---|---|---|\n| 4,000 | $110 | 1 | 0 | $5,000 | 0 | $2,000 | $1,000 | $400,000 | $20,000 |\n";
        let d = parse_decision_block(text).decision.unwrap();
        assert_eq!(d.order_units, 4_000.0);
        assert_eq!(d.price, 110.0);
        assert_eq!(d.sales_forecast_next, 400_000.0);
    }

    #[test]
    fn headerless_row() {
        let text = "January\t5,000\t110\t1\t-\t10,000\t-\t5,000\t5,000\t350,000\t10,000";
        let d = parse_decision_block(text).decision.unwrap();
        assert_eq!(d.order_units, 5_000.0);
        assert_eq!(d.rnd_expense, 5_000.0);
    }

    #[test]
    fn bulleted_markdown_pairs() {
        let text = "**Decisions for February**\n- **Order (units):** 2,000\n- **Price:** $108\n- Hire: 1 worker\n\
                    - Marketing: $4k\n- Dividends: 10%";
        let d = parse_decision_block(text).decision.unwrap();
        assert_eq!(d.order_units, 2_000.0);
        assert_eq!(d.price, 108.0);
        assert_eq!(d.workers_hired, 1.0);
        assert_eq!(d.marketing_expense, 4_000.0);
        assert_eq!(d.dividend_rate, 0.1);
    }

    #[test]
    fn garbage_lists_both_required_fields() {
        let r = parse_decision_block("I think we should be careful this month.");
        assert!(r.decision.is_none());
        let fields: Vec<_> = r.diagnostics.iter().filter_map(|d| d.field).collect();
        assert_eq!(fields, [DecisionField::OrderUnits, DecisionField::Price]);
    }

    #[test]
    fn unreadable_required_value_is_fatal() {
        let r = parse_decision_block("Order: a lot\nPrice: 110");
        assert!(r.decision.is_none());
        assert_eq!(r.diagnostics[0].field, Some(DecisionField::OrderUnits));
    }

    proptest::proptest! {
        #[test]
        fn idempotent_on_own_rendering(
            order in 0.0f64..1e6, price in 0.0f64..1e3, hired in 0.0f64..50.0, dismissed in 0.0f64..50.0,
            mkt in 0.0f64..1e6, loans in 0.0f64..1e7, training in 0.0f64..1e5, rnd in 0.0f64..1e5,
            sf in -1e7f64..1e7, nf in -1e7f64..1e7, div in 0.0f64..1.0,
        ) {
            let d = DecisionVector {
                order_units: order, price, workers_hired: hired, workers_dismissed: dismissed,
                marketing_expense: mkt, loans, training_expense: training, rnd_expense: rnd,
                sales_forecast_next: sf, net_income_forecast: nf, dividend_rate: div,
            };
            let text = render_decision_block(&d);
            let back = parse_decision_block(&text).decision.unwrap();
            proptest::prop_assert_eq!(&back, &d);
            proptest::prop_assert_eq!(render_decision_block(&back), text);
        }
    }
}
