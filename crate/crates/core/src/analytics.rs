//! Session-level analytics: collapse detection, decision coherence, annual
//! summaries and the leaderboard.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::kpi::{net_profit_margin, round_to};
use crate::ledger::{BalanceSheet, CashFlowStatement, IncomeStatement};
use crate::money::Money;
use crate::report::MonthlyReport;
use crate::year0;

/// Default collapse threshold: 1% of the reference year's mean monthly revenue.
pub fn default_collapse_threshold() -> Money {
    Money::from_f64(0.01 * year0::mean_monthly_revenue())
}

/// Smallest month `m` such that every revenue from `m` to the end is below
/// `threshold`.
pub fn detect_collapse(revenues: &[Money], threshold: Money) -> Option<u32> {
    let mut start = None;
    for (i, r) in revenues.iter().enumerate().rev() {
        if *r < threshold {
            start = Some(i as u32 + 1);
        } else {
            break;
        }
    }
    start
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Coherence {
    pub price_volatility: f64,
    pub order_volatility: f64,
    pub reversals: u32,
}

const REVERSAL_THRESHOLD: f64 = 0.2;

fn relative_changes(series: &[f64]) -> Vec<f64> {
    series
        .windows(2)
        .map(|w| {
            let (prev, cur) = (w[0], w[1]);
            if prev == 0.0 {
                if cur == 0.0 {
                    0.0
                } else {
                    cur.signum()
                }
            } else {
                (cur - prev) / prev.abs()
            }
        })
        .collect()
}

/// Population standard deviation of month-over-month relative changes.
pub fn volatility(series: &[f64]) -> f64 {
    let r = relative_changes(series);
    if r.is_empty() {
        return 0.0;
    }
    let n = r.len() as f64;
    let mean = r.iter().sum::<f64>() / n;
    libm::sqrt(r.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n)
}

/// Changes larger than 20% whose direction flips relative to the previous change.
pub fn reversals(series: &[f64]) -> u32 {
    let r = relative_changes(series);
    r.windows(2).filter(|w| w[1].abs() > REVERSAL_THRESHOLD && w[0] != 0.0 && w[0].signum() != w[1].signum()).count()
        as u32
}

pub fn coherence(prices: &[f64], orders: &[f64]) -> Coherence {
    Coherence {
        price_volatility: volatility(prices),
        order_volatility: volatility(orders),
        reversals: reversals(prices) + reversals(orders),
    }
}

pub fn coherence_of(reports: &[MonthlyReport]) -> Coherence {
    let prices: Vec<f64> = reports.iter().map(|r| r.submitted.price).collect();
    let orders: Vec<f64> = reports.iter().map(|r| r.submitted.order_units).collect();
    coherence(&prices, &orders)
}

/// Annual statements: income statement summed over the months, balance sheet
/// and cash flow averaged over them.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AnnualStatements {
    pub months: u32,
    pub income: IncomeStatement,
    pub balance_avg: BalanceSheet,
    pub cash_flow_avg: CashFlowStatement,
}

fn mean_money(values: impl Iterator<Item = Money>, n: u32) -> Money {
    let total: i128 = values.map(|m| m.cents() as i128).sum();
    let n = n.max(1) as i128;
    let q = total / n;
    let r = total % n;
    let rounded = if 2 * r.abs() >= n { q + r.signum() } else { q };
    Money::from_cents(rounded as i64)
}

pub fn annual_statements(reports: &[MonthlyReport]) -> AnnualStatements {
    let n = reports.len() as u32;
    let inc = |f: fn(&IncomeStatement) -> Money| reports.iter().map(|r| f(&r.statements.income)).sum::<Money>();
    let bal = |f: fn(&BalanceSheet) -> Money| mean_money(reports.iter().map(|r| f(&r.statements.balance)), n);
    let cf = |f: fn(&CashFlowStatement) -> Money| mean_money(reports.iter().map(|r| f(&r.statements.cash_flow)), n);
    let avg_units = if n == 0 {
        0
    } else {
        libm::round(reports.iter().map(|r| r.statements.balance.inventory_units as f64).sum::<f64>() / n as f64) as u64
    };
    AnnualStatements {
        months: n,
        income: IncomeStatement {
            revenue: inc(|i| i.revenue),
            materials_expense: inc(|i| i.materials_expense),
            staff_costs: inc(|i| i.staff_costs),
            depreciation: inc(|i| i.depreciation),
            other_opex: inc(|i| i.other_opex),
            total_costs: inc(|i| i.total_costs),
            operating_income: inc(|i| i.operating_income),
            interest: inc(|i| i.interest),
            profit_before_tax: inc(|i| i.profit_before_tax),
            tax: inc(|i| i.tax),
            net_income: inc(|i| i.net_income),
        },
        balance_avg: BalanceSheet {
            cash: bal(|b| b.cash),
            receivables: bal(|b| b.receivables),
            inventory_units: avg_units,
            inventory_unit_cost: reports.first().map(|r| r.statements.balance.inventory_unit_cost).unwrap_or_default(),
            inventory_value: bal(|b| b.inventory_value),
            total_current_assets: bal(|b| b.total_current_assets),
            buildings_gross: bal(|b| b.buildings_gross),
            buildings_accumulated_depr: bal(|b| b.buildings_accumulated_depr),
            equipment_gross: bal(|b| b.equipment_gross),
            equipment_accumulated_depr: bal(|b| b.equipment_accumulated_depr),
            intangibles: bal(|b| b.intangibles),
            total_assets: bal(|b| b.total_assets),
            accounts_payable: bal(|b| b.accounts_payable),
            long_term_debt: bal(|b| b.long_term_debt),
            provisions: bal(|b| b.provisions),
            total_liabilities: bal(|b| b.total_liabilities),
            paid_in_capital: bal(|b| b.paid_in_capital),
            retained_earnings: bal(|b| b.retained_earnings),
            total_equity: bal(|b| b.total_equity),
            total_liabilities_and_equity: bal(|b| b.total_liabilities_and_equity),
        },
        cash_flow_avg: CashFlowStatement {
            net_income: cf(|c| c.net_income),
            depreciation_addback: cf(|c| c.depreciation_addback),
            inventory_change: cf(|c| c.inventory_change),
            provisions_change: cf(|c| c.provisions_change),
            receivables_change: cf(|c| c.receivables_change),
            payables_change: cf(|c| c.payables_change),
            loans: cf(|c| c.loans),
            investing: cf(|c| c.investing),
            dividends: cf(|c| c.dividends),
            net_cash_change: cf(|c| c.net_cash_change),
            cash_begin: cf(|c| c.cash_begin),
            cash_end: cf(|c| c.cash_end),
        },
    }
}

/// Session KPIs laid out like the financial/forecasting and the
/// HR/environment/logistics summary tables.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SessionKpis {
    pub roi_pct: Option<f64>,
    pub roa_pct: Option<f64>,
    pub leverage_pct: Option<f64>,
    pub gross_margin_pct: Option<f64>,
    pub net_profit_margin_pct: Option<f64>,
    pub share_price: Money,
    pub market_cap: Money,
    pub sales_forecast_error_pct: f64,
    pub profit_forecast_error_pct: f64,
    pub market_share_pct: f64,
    pub final_market_share_pct: f64,
    pub hiring: u32,
    pub redundancy: u32,
    pub hiring_dismissal_cost: Money,
    pub worker_wages: Money,
    pub sa_wages: Money,
    pub training_expense: Money,
    pub productivity_hourly: f64,
    pub capacity_utilization_pct: Option<f64>,
    pub carbon_tons: f64,
    pub avg_inventory_units: f64,
    pub env_index: f64,
    pub storage_material_cost: Money,
    pub freight_cost: Money,
    pub fill_rate_pct: Option<f64>,
}

fn mean_defined(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let (sum, n) = values.flatten().fold((0.0, 0u32), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        None
    } else {
        Some(round_to(sum / n as f64, 2))
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    mean_defined(values.map(Some)).unwrap_or(0.0)
}

pub fn session_kpis(reports: &[MonthlyReport]) -> SessionKpis {
    let k = |r: &MonthlyReport| r.kpis.clone();
    let last = reports.last().map(k);
    let revenue: Money = reports.iter().map(|r| r.flows.revenue).sum();
    let net_income: Money = reports.iter().map(|r| r.flows.net_income).sum();
    let sold: u64 = reports.iter().map(|r| r.flows.units_sold).sum();
    let demanded: u64 = reports.iter().map(|r| r.flows.units_demanded).sum();
    SessionKpis {
        roi_pct: mean_defined(reports.iter().map(|r| r.kpis.roi_pct)),
        roa_pct: mean_defined(reports.iter().map(|r| r.kpis.roa_pct)),
        leverage_pct: mean_defined(reports.iter().map(|r| r.kpis.leverage_pct)),
        gross_margin_pct: mean_defined(reports.iter().map(|r| r.kpis.gross_margin_pct)),
        net_profit_margin_pct: net_profit_margin(net_income, revenue),
        share_price: last.as_ref().map(|l| l.share_price).unwrap_or_default(),
        market_cap: last.as_ref().map(|l| l.market_cap).unwrap_or_default(),
        sales_forecast_error_pct: mean(reports.iter().map(|r| r.kpis.sales_forecast_error_pct)),
        profit_forecast_error_pct: mean(reports.iter().map(|r| r.kpis.profit_forecast_error_pct)),
        market_share_pct: mean(reports.iter().map(|r| r.kpis.market_share_pct)),
        final_market_share_pct: last.as_ref().map(|l| l.market_share_pct).unwrap_or_default(),
        hiring: reports.iter().map(|r| r.kpis.hiring).sum(),
        redundancy: reports.iter().map(|r| r.kpis.redundancy).sum(),
        hiring_dismissal_cost: reports.iter().map(|r| r.kpis.hiring_dismissal_cost).sum(),
        worker_wages: reports.iter().map(|r| r.kpis.worker_wages).sum(),
        sa_wages: reports.iter().map(|r| r.kpis.sa_wages).sum(),
        training_expense: reports.iter().map(|r| r.kpis.training_expense).sum(),
        productivity_hourly: mean(reports.iter().map(|r| r.kpis.productivity_hourly)),
        capacity_utilization_pct: mean_defined(reports.iter().map(|r| r.kpis.capacity_utilization_pct)),
        carbon_tons: round_to(reports.iter().map(|r| r.flows.carbon_tons).sum(), 2),
        avg_inventory_units: mean(reports.iter().map(|r| r.flows.avg_inventory_units)),
        env_index: last.as_ref().map(|l| l.env_index).unwrap_or_default(),
        storage_material_cost: reports.iter().map(|r| r.kpis.storage_material_cost).sum(),
        freight_cost: reports.iter().map(|r| r.kpis.freight_cost).sum(),
        fill_rate_pct: if demanded == 0 { None } else { Some(round_to(100.0 * sold as f64 / demanded as f64, 2)) },
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardRow {
    pub agent: String,
    pub session_id: String,
    pub revenue: Money,
    pub net_income: Money,
    pub net_profit_margin_pct: Option<f64>,
    pub final_market_share_pct: f64,
    pub collapse_month: Option<u32>,
    pub sales_forecast_error_pct: f64,
    pub profit_forecast_error_pct: f64,
    pub carbon_tons: f64,
}

impl LeaderboardRow {
    pub fn from_reports(agent: &str, session_id: &str, reports: &[MonthlyReport], collapse_threshold: Money) -> Self {
        let kpis = session_kpis(reports);
        let revenues: Vec<Money> = reports.iter().map(|r| r.flows.revenue).collect();
        LeaderboardRow {
            agent: String::from(agent),
            session_id: String::from(session_id),
            revenue: revenues.iter().sum(),
            net_income: reports.iter().map(|r| r.flows.net_income).sum(),
            net_profit_margin_pct: kpis.net_profit_margin_pct,
            final_market_share_pct: kpis.final_market_share_pct,
            collapse_month: detect_collapse(&revenues, collapse_threshold),
            sales_forecast_error_pct: kpis.sales_forecast_error_pct,
            profit_forecast_error_pct: kpis.profit_forecast_error_pct,
            carbon_tons: kpis.carbon_tons,
        }
    }
}

/// Net profit margin descending (undefined margins last), then net income
/// descending, then agent name and session id for a total order.
pub fn rank_rows(rows: &mut [LeaderboardRow]) {
    rows.sort_by(|a, b| {
        let margin = match (a.net_profit_margin_pct, b.net_profit_margin_pct) {
            (Some(x), Some(y)) => y.partial_cmp(&x).unwrap_or(Ordering::Equal),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => Ordering::Equal,
        };
        margin
            .then_with(|| b.net_income.cmp(&a.net_income))
            .then_with(|| a.agent.cmp(&b.agent))
            .then_with(|| a.session_id.cmp(&b.session_id))
    });
}
