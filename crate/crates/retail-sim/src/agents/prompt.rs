//! Prompt rendering from the versioned templates in `assets/prompts`.

use std::slice;

use retail_sim_core::market::MONTH_NAMES;
use retail_sim_core::{MonthlyReport, Scenario, SimParams, MONTHS};

use super::parse::{DIVIDEND_HEADER, FIELD_HEADERS};
use crate::format::{format_cell, render_kpis, render_statements};

pub const TEMPLATE_VERSION: &str = "v1";

const INITIAL: &str = include_str!("../../assets/prompts/initial_v1.txt");
const FOLLOWUP: &str = include_str!("../../assets/prompts/followup_v1.txt");
const DECISION_REQUEST: &str = include_str!("../../assets/prompts/decision_request_v1.txt");

/// Sent after an unparseable reply.
pub const FORMAT_REMINDER: &str = "I could not read your decisions. Reply again with only the ten lines, \
each as `Field: value` with the field names exactly as listed, and plain numbers.";

/// Replaces every `{{key}}`. Panics on a placeholder without a value, which
/// can only come from a broken template asset.
fn fill(template: &str, values: &[(&str, String)]) -> String {
    let mut out = template.to_string();
    for (key, value) in values {
        out = out.replace(&format!("{{{{{key}}}}}"), value);
    }
    if let Some(at) = out.find("{{") {
        let rest = &out[at..];
        let end = rest.find("}}").map_or(rest.len(), |e| e + 2);
        panic!("prompt template left placeholder {}", &rest[..end]);
    }
    out
}

fn number(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format_cell(x)
    }
}

fn percent(fraction: f64) -> String {
    let pct = (fraction * 10_000.0).round() / 100.0;
    format!("{pct}%")
}

fn month_name(month: u32) -> &'static str {
    MONTH_NAMES.get(month as usize - 1).copied().unwrap_or("?")
}

pub fn params_table(p: &SimParams) -> String {
    let rows: Vec<(&str, String)> = vec![
        ("Wholesale price per unit ($)", number(p.wholesale_price)),
        ("Order setup cost ($ per order)", number(p.order_setup_cost)),
        ("Freight ($ per unit ordered)", number(p.freight_var_cost)),
        ("Delivery lead time (months)", p.lead_time.to_string()),
        ("Handling ($ per unit sold)", number(p.maintenance_per_unit)),
        ("Storage ($ per unit held)", number(p.storage_cost_per_unit)),
        ("Lost-sale penalty ($ per unit)", number(p.stockout_penalty)),
        ("Fixed overhead ($ per month)", number(p.fixed_overhead)),
        ("Monthly wage per worker ($)", number(p.monthly_wage)),
        ("Sales and administration (share of wages)", percent(p.sa_wage_ratio)),
        ("Hiring cost ($ per worker)", number(p.hiring_cost)),
        ("Dismissal cost ($ per worker)", number(p.dismissal_cost)),
        ("Pension provision (share of wages)", percent(p.pension_reserve_rate)),
        ("Hours per worker per month", number(p.hours_per_worker)),
        ("Absenteeism", percent(p.absenteeism)),
        ("Maximum productivity (units per hour)", number(p.max_productivity)),
        ("Interest on debt (per month)", percent(p.interest_rate)),
        ("Income tax rate", percent(p.tax_rate)),
        ("CO2 per unit sold (t)", number(p.co2_per_unit)),
        ("Fixed CO2 per month (t)", number(p.co2_fixed)),
        ("Shares outstanding", number(p.shares_outstanding as f64)),
    ];
    let width = rows.iter().map(|(l, _)| l.len()).max().unwrap_or(0);
    rows.iter().map(|(label, value)| format!("{label:<width$}  {value}\n")).collect()
}

pub fn decision_request(decision_month: u32) -> String {
    let mut lines: String = FIELD_HEADERS.iter().map(|(_, h)| format!("{h}: ...\n")).collect();
    lines.push_str(&format!("{DIVIDEND_HEADER}: ..."));
    fill(
        DECISION_REQUEST,
        &[
            ("decision_month_name", month_name(decision_month).to_string()),
            ("decision_month", decision_month.to_string()),
            ("months", MONTHS.to_string()),
            ("field_lines", lines),
        ],
    )
}

pub fn render_initial_prompt(sc: &Scenario, year0: &[MonthlyReport]) -> String {
    let p = &sc.params;
    let gdp: Vec<String> = sc.calendar.gdp_path.iter().map(|g| format!("{g}")).collect();
    fill(
        INITIAL,
        &[
            ("months", MONTHS.to_string()),
            ("reference_price", number(year0.first().map_or(p.initial_price, |r| r.applied.price.to_f64()))),
            ("gdp_outlook", gdp.join(", ")),
            ("stockout_penalty", number(p.stockout_penalty)),
            ("interest_rate", percent(p.interest_rate)),
            ("tax_rate", percent(p.tax_rate)),
            ("fixed_overhead", number(p.fixed_overhead)),
            ("wholesale_price", number(p.wholesale_price)),
            ("lead_time", p.lead_time.to_string()),
            ("order_setup_cost", number(p.order_setup_cost)),
            ("freight_var_cost", number(p.freight_var_cost)),
            ("maintenance_per_unit", number(p.maintenance_per_unit)),
            ("monthly_wage", number(p.monthly_wage)),
            ("sa_wage_ratio", percent(p.sa_wage_ratio)),
            ("hiring_cost", number(p.hiring_cost)),
            ("dismissal_cost", number(p.dismissal_cost)),
            ("pension_reserve_rate", percent(p.pension_reserve_rate)),
            ("hours_per_worker", number(p.hours_per_worker)),
            ("absenteeism", percent(p.absenteeism)),
            ("max_productivity", number(p.max_productivity)),
            ("co2_fixed", number(p.co2_fixed)),
            ("co2_per_unit", number(p.co2_per_unit)),
            ("initial_env_index", number(p.initial_env_index)),
            ("shares_outstanding", number(p.shares_outstanding as f64)),
            ("params_table", params_table(p)),
            ("year0_statements", render_statements(year0)),
            ("year0_kpis", render_kpis(year0)),
            ("decision_request", decision_request(1)),
        ],
    )
}

/// Results of `report.month` followed by the request for the next month.
pub fn render_followup_prompt(report: &MonthlyReport) -> String {
    let next = report.month + 1;
    let notes = if report.applied.notes.is_empty() {
        String::new()
    } else {
        let mut s = String::from("ADJUSTMENTS TO YOUR DECISIONS\n");
        for n in &report.applied.notes {
            s.push_str(&format!("- {n}\n"));
        }
        s
    };
    let final_note = if next as usize == MONTHS {
        format!("This is the final month of the game: {} decisions close the year.\n\n", month_name(next))
    } else {
        String::new()
    };
    fill(
        FOLLOWUP,
        &[
            ("month_name", month_name(report.month).to_string()),
            ("month", report.month.to_string()),
            ("months", MONTHS.to_string()),
            ("statements", render_statements(slice::from_ref(report))),
            ("kpis", render_kpis(slice::from_ref(report))),
            ("notes", notes),
            ("final_note", final_note),
            ("decision_request", decision_request(next)),
        ],
    )
}
