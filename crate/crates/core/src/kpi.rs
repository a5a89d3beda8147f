//! Financial ratios, shareholder value, forecast accuracy and operating metrics.

use serde::{Deserialize, Serialize};

use crate::engine::EconomicFlows;
use crate::ledger::Statements;
use crate::money::Money;
use crate::params::SimParams;
use crate::state::CompanyState;

/// Rounds to `digits` decimals, ties away from zero.
pub fn round_to(x: f64, digits: i32) -> f64 {
    let scale = libm::pow(10.0, digits as f64);
    libm::round(x * scale) / scale
}

fn pct(x: f64) -> f64 {
    round_to(x, 2)
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    if den == 0.0 || !den.is_finite() {
        None
    } else {
        Some(num / den)
    }
}

/// Net income over revenue, in percent. `None` when revenue is zero.
pub fn net_profit_margin(net_income: Money, revenue: Money) -> Option<f64> {
    ratio(100.0 * net_income.to_f64(), revenue.to_f64()).map(pct)
}

/// Percent error of a forecast; 0 when both are zero, 100 when only the actual is.
pub fn forecast_error(forecast: Money, actual: Money) -> f64 {
    if actual.is_zero() {
        if forecast.is_zero() {
            0.0
        } else {
            100.0
        }
    } else {
        ((forecast - actual).abs().cents() as f64 / actual.abs().cents() as f64) * 100.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinancialRatios {
    pub roi_pct: Option<f64>,
    pub roa_pct: Option<f64>,
    pub leverage_pct: Option<f64>,
    /// (revenue − materials − staff − other opex) / revenue, as a fraction.
    pub gross_margin: Option<f64>,
}

/// Statement totals the ratios are computed from.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RatioInputs {
    pub revenue: Money,
    pub materials_expense: Money,
    pub staff_costs: Money,
    pub other_opex: Money,
    pub net_income: Money,
    pub equity_open: Money,
    pub equity_close: Money,
    pub assets_open: Money,
    pub assets_close: Money,
    pub liabilities_close: Money,
}

/// Unrounded ratios. Return on equity and assets use the average of opening
/// and closing balances; leverage is closing liabilities over average equity.
pub fn ratios_from_totals(x: &RatioInputs) -> FinancialRatios {
    let ni = x.net_income.to_f64();
    let avg_equity = (x.equity_open + x.equity_close).to_f64() / 2.0;
    let avg_assets = (x.assets_open + x.assets_close).to_f64() / 2.0;
    let positive = |d: f64| if d > 0.0 { Some(d) } else { None };
    FinancialRatios {
        roi_pct: positive(avg_equity).map(|d| 100.0 * ni / d),
        roa_pct: positive(avg_assets).map(|d| 100.0 * ni / d),
        leverage_pct: positive(avg_equity).map(|d| 100.0 * x.liabilities_close.to_f64() / d),
        gross_margin: ratio(
            (x.revenue - x.materials_expense - x.staff_costs - x.other_opex).to_f64(),
            x.revenue.to_f64(),
        ),
    }
}

pub fn financial_ratios_raw(opening: &CompanyState, st: &Statements, p: &SimParams) -> FinancialRatios {
    let i = &st.income;
    let b = &st.balance;
    ratios_from_totals(&RatioInputs {
        revenue: i.revenue,
        materials_expense: i.materials_expense,
        staff_costs: i.staff_costs,
        other_opex: i.other_opex,
        net_income: i.net_income,
        equity_open: opening.total_equity(p),
        equity_close: b.total_equity,
        assets_open: opening.total_assets(p),
        assets_close: b.total_assets,
        liabilities_close: b.total_liabilities,
    })
}

/// Ratios rounded for reporting: percentages to two decimals, gross margin
/// (a fraction) to four.
pub fn round_ratios(raw: FinancialRatios) -> FinancialRatios {
    FinancialRatios {
        roi_pct: raw.roi_pct.map(pct),
        roa_pct: raw.roa_pct.map(pct),
        leverage_pct: raw.leverage_pct.map(pct),
        gross_margin: raw.gross_margin.map(|g| round_to(g, 4)),
    }
}

pub fn financial_ratios(opening: &CompanyState, st: &Statements, p: &SimParams) -> FinancialRatios {
    round_ratios(financial_ratios_raw(opening, st, p))
}

/// Inputs of the share-price composite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShareDrivers {
    pub total_equity: Money,
    pub roi_pct: f64,
    pub env_index: f64,
    pub gdp_pct: f64,
    pub revenue_growth: f64,
}

/// Book value per share scaled by ROI, environmental, GDP and growth factors,
/// floored at 1. Market cap is the rounded price times shares outstanding.
pub fn share_price(drivers: &ShareDrivers, p: &SimParams) -> (Money, Money) {
    let m = &p.model;
    let shares = p.shares_outstanding.max(1);
    let bvps = drivers.total_equity.to_f64() / shares as f64;
    let factors = [
        1.0 + m.share_price_roi_weight * drivers.roi_pct / 100.0,
        1.0 + m.share_price_env_weight * (drivers.env_index - 100.0) / 100.0,
        1.0 + m.share_price_gdp_weight * drivers.gdp_pct / 100.0,
        1.0 + m.share_price_growth_weight * drivers.revenue_growth,
    ];
    let composite: f64 = factors.iter().map(|f| f.max(0.0)).product();
    let price = Money::from_f64((bvps * composite).max(1.0)).max(Money::from_units(1));
    (price, price.times_units(shares))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KpiBlock {
    pub roi_pct: Option<f64>,
    pub roa_pct: Option<f64>,
    pub leverage_pct: Option<f64>,
    /// Stored as a fraction of revenue (0.06 means six cents per dollar).
    pub gross_margin_pct: Option<f64>,
    pub net_profit_margin_pct: Option<f64>,
    pub share_price: Money,
    pub market_cap: Money,
    pub sales_forecast_error_pct: f64,
    pub profit_forecast_error_pct: f64,
    pub market_share_pct: f64,
    pub hiring: u32,
    pub redundancy: u32,
    pub workers: f64,
    pub hiring_dismissal_cost: Money,
    pub worker_wages: Money,
    pub sa_wages: Money,
    pub training_expense: Money,
    /// Units per hour a worker can handle (the capped productivity state).
    pub max_productivity_hourly: f64,
    /// Units sold per worker-hour actually worked.
    pub productivity_hourly: f64,
    pub capacity_utilization_pct: Option<f64>,
    pub carbon_tons: f64,
    pub avg_inventory_units: f64,
    pub env_index: f64,
    pub storage_material_cost: Money,
    pub freight_cost: Money,
    pub fill_rate_pct: Option<f64>,
}

/// Month-level inputs that live outside the company's own books.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonthContext {
    pub gdp_pct: f64,
    pub market_share: f64,
}

pub fn compute_kpis(
    opening: &CompanyState,
    closing: &CompanyState,
    flows: &EconomicFlows,
    st: &Statements,
    ctx: MonthContext,
    p: &SimParams,
) -> KpiBlock {
    let raw = financial_ratios_raw(opening, st, p);
    let rounded = round_ratios(raw);
    let revenue_growth = if opening.last_revenue.is_zero() {
        0.0
    } else {
        (flows.revenue - opening.last_revenue).to_f64() / opening.last_revenue.to_f64()
    };
    let (price, cap) = share_price(
        &ShareDrivers {
            total_equity: st.balance.total_equity,
            roi_pct: raw.roi_pct.unwrap_or(0.0),
            env_index: closing.env_index,
            gdp_pct: ctx.gdp_pct,
            revenue_growth,
        },
        p,
    );
    let hours_worked = flows.workers * p.hours_per_worker * (1.0 - p.absenteeism);
    KpiBlock {
        roi_pct: rounded.roi_pct,
        roa_pct: rounded.roa_pct,
        leverage_pct: rounded.leverage_pct,
        gross_margin_pct: rounded.gross_margin,
        net_profit_margin_pct: net_profit_margin(flows.net_income, flows.revenue),
        share_price: price,
        market_cap: cap,
        sales_forecast_error_pct: pct(forecast_error(opening.forecasts_pending.sales, flows.revenue)),
        profit_forecast_error_pct: pct(forecast_error(opening.forecasts_pending.net_income, flows.net_income)),
        market_share_pct: pct(100.0 * ctx.market_share),
        hiring: flows.workers_hired,
        redundancy: flows.workers_dismissed,
        workers: round_to(flows.workers, 2),
        hiring_dismissal_cost: flows.hiring_dismissal_cost,
        worker_wages: flows.worker_wages,
        sa_wages: flows.sa_wages,
        training_expense: flows.training_expense,
        max_productivity_hourly: round_to(flows.productivity, 2),
        productivity_hourly: if hours_worked > 0.0 { pct(flows.units_sold as f64 / hours_worked) } else { 0.0 },
        capacity_utilization_pct: ratio(100.0 * flows.units_sold as f64, flows.nominal_capacity).map(pct),
        carbon_tons: pct(flows.carbon_tons),
        avg_inventory_units: pct(flows.avg_inventory_units),
        env_index: pct(closing.env_index),
        storage_material_cost: flows.storage_cost + flows.maintenance_cost,
        freight_cost: flows.setup_cost + flows.freight_cost,
        fill_rate_pct: ratio(100.0 * flows.units_sold as f64, flows.units_demanded as f64).map(pct),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn margin_examples() {
        assert_eq!(net_profit_margin(Money::from_cents(743_776), Money::from_units(355_080)), Some(2.09));
        assert_eq!(net_profit_margin(Money::from_units(-104_179), Money::from_units(5_444_246)), Some(-1.91));
        assert_eq!(net_profit_margin(Money::from_units(5), Money::ZERO), None);
    }

    #[test]
    fn forecast_error_examples() {
        assert_eq!(forecast_error(Money::ZERO, Money::from_units(355_080)), 100.0);
        assert_eq!(forecast_error(Money::from_units(7), Money::from_units(7)), 0.0);
        assert_eq!(forecast_error(Money::from_units(200), Money::from_units(100)), 100.0);
        assert_eq!(forecast_error(Money::from_units(500), Money::from_units(100)), 400.0);
        assert_eq!(forecast_error(Money::ZERO, Money::ZERO), 0.0);
        assert_eq!(forecast_error(Money::from_units(1), Money::ZERO), 100.0);
    }

    fn drivers(equity: i64) -> ShareDrivers {
        ShareDrivers {
            total_equity: Money::from_units(equity),
            roi_pct: 0.0,
            env_index: 100.0,
            gdp_pct: 0.0,
            revenue_growth: 0.0,
        }
    }

    #[test]
    fn neutral_share_price_is_book_value() {
        let p = SimParams::default();
        let (price, cap) = share_price(&drivers(2_648_000), &p);
        assert_eq!(price, Money::from_units(100));
        assert_eq!(cap, Money::from_units(2_648_000));
        let (price, _) = share_price(&ShareDrivers { total_equity: Money::from_cents(285_543_776), ..drivers(0) }, &p);
        assert_eq!(price, Money::from_cents(10_783));
    }

    #[test]
    fn share_price_floors_at_one() {
        let p = SimParams::default();
        assert_eq!(share_price(&drivers(-5_000_000), &p).0, Money::from_units(1));
        let crash = ShareDrivers { roi_pct: -50.0, revenue_growth: -3.0, ..drivers(2_648_000) };
        assert_eq!(share_price(&crash, &p).0, Money::from_units(1));
    }

    proptest::proptest! {
        #[test]
        fn market_cap_is_price_times_shares(equity in -1_000_000_000i64..1_000_000_000, roi in -100.0f64..100.0,
                                            env in 90.0f64..110.0, gdp in -10.0f64..10.0, growth in -1.0f64..5.0) {
            let p = SimParams::default();
            let d = ShareDrivers { total_equity: Money::from_cents(equity), roi_pct: roi, env_index: env, gdp_pct: gdp, revenue_growth: growth };
            let (price, cap) = share_price(&d, &p);
            proptest::prop_assert_eq!(cap, price.times_units(p.shares_outstanding));
            proptest::prop_assert!(price >= Money::from_units(1));
        }

        #[test]
        fn zero_forecast_is_full_miss(magnitude in 1i64..1 << 50, negative: bool) {
            let actual = if negative { -magnitude } else { magnitude };
            proptest::prop_assert_eq!(forecast_error(Money::ZERO, Money::from_cents(actual)), 100.0);
        }
    }
}
