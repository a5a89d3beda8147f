//! The month-step function.

use serde::{Deserialize, Serialize};

use crate::decision::ValidatedDecisions;
use crate::money::Money;
use crate::params::SimParams;
use crate::state::{CompanyState, Forecasts, PipelineOrder};

/// Everything that happened inside one month, in units and booked currency.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EconomicFlows {
    pub month: u32,
    pub units_received: u64,
    pub units_ordered: u64,
    pub units_demanded: u64,
    pub units_sold: u64,
    pub units_unmet: u64,
    pub opening_inventory_units: u64,
    pub closing_inventory_units: u64,
    pub workers: f64,
    pub productivity: f64,
    /// Worker-hours × productivity, absenteeism excluded.
    pub nominal_capacity: f64,
    /// Units the workforce could actually sell this month.
    pub capacity_units: u64,
    pub workers_hired: u32,
    pub workers_dismissed: u32,
    pub price: Money,
    pub revenue: Money,
    pub cost_of_goods: Money,
    pub setup_cost: Money,
    pub materials_expense: Money,
    pub worker_wages: Money,
    pub sa_wages: Money,
    pub hiring_dismissal_cost: Money,
    pub staff_costs: Money,
    pub depreciation_buildings: Money,
    pub depreciation_equipment: Money,
    pub depreciation: Money,
    pub fixed_overhead: Money,
    pub pension_accrual: Money,
    pub freight_cost: Money,
    pub maintenance_cost: Money,
    pub storage_cost: Money,
    pub stockout_cost: Money,
    pub marketing_expense: Money,
    pub training_expense: Money,
    pub rnd_expense: Money,
    pub other_opex: Money,
    pub total_costs: Money,
    pub operating_income: Money,
    pub interest: Money,
    pub profit_before_tax: Money,
    pub tax: Money,
    pub net_income: Money,
    pub dividends: Money,
    pub loan_inflow: Money,
    pub carbon_tons: f64,
    pub avg_inventory_units: f64,
}

/// Monthly attrition given this month's training spend.
pub fn attrition_rate(training: f64, p: &SimParams) -> f64 {
    let m = &p.model;
    p.base_attrition + m.untrained_attrition_extra / (1.0 + training.max(0.0) / m.attrition_training_half)
}

pub fn update_workforce(workers: f64, hired: u32, dismissed: u32, training: f64, p: &SimParams) -> f64 {
    let kept = workers * (1.0 - attrition_rate(training, p));
    (kept + hired as f64 - dismissed as f64).max(0.0)
}

pub fn update_productivity(prod: f64, training: f64, rnd: f64, p: &SimParams) -> f64 {
    let m = &p.model;
    let t = training.max(0.0);
    let r = rnd.max(0.0);
    let factor = 1.0 - m.productivity_decay
        + m.training_productivity_gain * t / (t + m.training_productivity_scale)
        + m.rnd_productivity_gain * r / (r + m.rnd_productivity_scale);
    (prod * factor).min(p.max_productivity)
}

pub fn carbon_footprint(units_sold: u64, p: &SimParams) -> f64 {
    p.co2_per_unit * units_sold as f64 + p.co2_fixed
}

pub fn env_index_update(index: f64, carbon_tons: f64, p: &SimParams) -> f64 {
    let m = &p.model;
    let step = m.env_speed * (m.env_reference_tons - carbon_tons) / m.env_reference_tons;
    index + step.clamp(-m.env_max_step, m.env_max_step)
}

/// Applies one month of validated decisions against `own_demand`.
pub fn step_month(
    s: &CompanyState,
    d: &ValidatedDecisions,
    own_demand: u64,
    p: &SimParams,
) -> (CompanyState, EconomicFlows) {
    let month = s.month_index + 1;

    // (1) arrivals
    let mut pipeline = s.pipeline.clone();
    let units_received: u64 = pipeline.iter().filter(|o| o.arrival_month <= month).map(|o| o.units).sum();
    pipeline.retain(|o| o.arrival_month > month);
    let available = s.inventory_units + units_received;

    // (2) workforce, (3) productivity
    let workers = update_workforce(s.workers, d.workers_hired, d.workers_dismissed, d.training_expense.to_f64(), p);
    let productivity = update_productivity(s.productivity, d.training_expense.to_f64(), d.rnd_expense.to_f64(), p);

    // (4) sales
    let hours = workers * p.hours_per_worker;
    let nominal_capacity = hours * productivity;
    let capacity_units = libm::floor(nominal_capacity * (1.0 - p.absenteeism)).max(0.0) as u64;
    let units_sold = own_demand.min(available).min(capacity_units);
    let units_unmet = own_demand - units_sold;
    let closing_units = available - units_sold;

    // (5) expenses
    let revenue = d.price.times_units(units_sold);
    let wholesale = Money::from_f64(p.wholesale_price);
    let cost_of_goods = wholesale.times_units(units_sold);
    let setup_cost = if d.order_units > 0 { Money::from_f64(p.order_setup_cost) } else { Money::ZERO };
    let materials_expense = cost_of_goods + setup_cost;

    let worker_wages = Money::from_f64(workers * p.monthly_wage);
    let sa_wages = worker_wages.scale(p.sa_wage_ratio);
    let hiring_dismissal_cost =
        Money::from_f64(p.hiring_cost * d.workers_hired as f64 + p.dismissal_cost * d.workers_dismissed as f64);
    let staff_costs = worker_wages + sa_wages + hiring_dismissal_cost;

    let depreciation_buildings = Money::from_f64(p.buildings_value * p.buildings_depr_rate);
    let depreciation_equipment = Money::from_f64(p.equipment_value * p.equipment_depr_rate);
    let depreciation = depreciation_buildings + depreciation_equipment;

    let avg_inventory_units = (s.inventory_units + closing_units) as f64 / 2.0;
    let fixed_overhead = Money::from_f64(p.fixed_overhead);
    let pension_accrual = worker_wages.scale(p.pension_reserve_rate);
    let freight_cost = Money::from_f64(p.freight_var_cost * d.order_units as f64);
    let maintenance_cost = Money::from_f64(p.maintenance_per_unit * units_sold as f64);
    let storage_cost = Money::from_f64(p.storage_cost_per_unit * avg_inventory_units);
    let stockout_cost = Money::from_f64(p.stockout_penalty * units_unmet as f64);
    let other_opex = fixed_overhead
        + pension_accrual
        + freight_cost
        + maintenance_cost
        + storage_cost
        + stockout_cost
        + d.marketing_expense
        + d.training_expense
        + d.rnd_expense;

    let total_costs = materials_expense + staff_costs + depreciation + other_opex;
    let operating_income = revenue - total_costs;
    let long_term_debt = s.long_term_debt + d.loans;
    let interest = long_term_debt.scale(p.interest_rate);
    let profit_before_tax = operating_income - interest;

    // (6) tax, (7) dividends
    let tax = profit_before_tax.max(Money::ZERO).scale(p.tax_rate);
    let net_income = profit_before_tax - tax;
    let dividends = net_income.max(Money::ZERO).scale(d.dividend_rate);

    // (8) cash, indirect method
    let inventory_change = wholesale.times_units(closing_units) - wholesale.times_units(s.inventory_units);
    let receivables = if p.receivable_lag > 0 { revenue } else { Money::ZERO };
    let receivables_change = receivables - s.receivables;
    let net_cash_change =
        net_income + depreciation - inventory_change + pension_accrual - receivables_change + d.loans - dividends;

    // (9) new order
    if d.order_units > 0 {
        pipeline.push(PipelineOrder { arrival_month: month + p.lead_time, units: d.order_units });
    }

    let carbon_tons = carbon_footprint(units_sold, p);
    let next = CompanyState {
        month_index: month,
        inventory_units: closing_units,
        pipeline,
        cash: s.cash + net_cash_change,
        receivables,
        long_term_debt,
        provisions: s.provisions + pension_accrual,
        accumulated_depr_buildings: s.accumulated_depr_buildings + depreciation_buildings,
        accumulated_depr_equipment: s.accumulated_depr_equipment + depreciation_equipment,
        retained_earnings: s.retained_earnings + net_income - dividends,
        workers,
        productivity,
        env_index: env_index_update(s.env_index, carbon_tons, p),
        last_price: d.price,
        last_revenue: revenue,
        // (10) forecasts are scored against next month's actuals
        forecasts_pending: Forecasts { sales: d.sales_forecast_next, net_income: d.net_income_forecast },
    };

    let flows = EconomicFlows {
        month,
        units_received,
        units_ordered: d.order_units,
        units_demanded: own_demand,
        units_sold,
        units_unmet,
        opening_inventory_units: s.inventory_units,
        closing_inventory_units: closing_units,
        workers,
        productivity,
        nominal_capacity,
        capacity_units,
        workers_hired: d.workers_hired,
        workers_dismissed: d.workers_dismissed,
        price: d.price,
        revenue,
        cost_of_goods,
        setup_cost,
        materials_expense,
        worker_wages,
        sa_wages,
        hiring_dismissal_cost,
        staff_costs,
        depreciation_buildings,
        depreciation_equipment,
        depreciation,
        fixed_overhead,
        pension_accrual,
        freight_cost,
        maintenance_cost,
        storage_cost,
        stockout_cost,
        marketing_expense: d.marketing_expense,
        training_expense: d.training_expense,
        rnd_expense: d.rnd_expense,
        other_opex,
        total_costs,
        operating_income,
        interest,
        profit_before_tax,
        tax,
        net_income,
        dividends,
        loan_inflow: d.loans,
        carbon_tons,
        avg_inventory_units,
    };
    (next, flows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decision::{validate_decisions, DecisionVector};

    fn approx(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn workforce_examples() {
        let p = SimParams::default();
        assert!(approx(update_workforce(10.0, 0, 0, 0.0, &p), 9.40, 1e-12));
        assert!(approx(update_workforce(9.40, 0, 0, 0.0, &p), 8.836, 1e-12));
        assert!(approx(update_workforce(10.0, 2, 1, 0.0, &p), 10.40, 1e-12));
        assert_eq!(update_workforce(1.0, 0, 5, 0.0, &p), 0.0);
    }

    #[test]
    fn training_pulls_attrition_toward_base() {
        let p = SimParams::default();
        assert!(approx(attrition_rate(0.0, &p), 0.06, 1e-12));
        assert!(approx(attrition_rate(5_000.0, &p), 0.045, 1e-12));
        assert!(attrition_rate(1e12, &p) - 0.03 < 1e-6);
    }

    #[test]
    fn productivity_examples() {
        let p = SimParams::default();
        assert!(approx(update_productivity(10.0, 0.0, 0.0, &p), 9.90, 1e-12));
        assert!(approx(update_productivity(9.90, 0.0, 0.0, &p), 9.801, 1e-12));
        let capped = update_productivity(9.90, 1e15, 1e15, &p);
        assert!(capped <= 10.0 && capped > 9.998);
    }

    #[test]
    fn carbon_and_env() {
        let p = SimParams::default();
        assert!(approx(carbon_footprint(3_228, &p), 42.28, 1e-9));
        assert!(approx(carbon_footprint(146, &p), 11.46, 1e-9));
        assert_eq!(carbon_footprint(0, &p), 10.0);
        assert_eq!(env_index_update(100.0, 45.0, &p), 100.0);
        let mut low = 100.0;
        let mut high = 100.0;
        for _ in 0..12 {
            low = env_index_update(low, 20.0, &p);
            high = env_index_update(high, 50.0, &p);
        }
        assert!(approx(low, 101.0, 0.05));
        assert!((99.5..=100.0).contains(&high));
    }

    fn january() -> (CompanyState, EconomicFlows) {
        let p = SimParams::default();
        let s = CompanyState::opening(&p);
        let d = DecisionVector { order_units: 4_000.0, price: 110.0, ..Default::default() };
        let v = validate_decisions(&d, &s, &p).unwrap();
        step_month(&s, &v, 3_228, &p)
    }

    #[test]
    fn reference_january_flows() {
        let (next, f) = january();
        assert_eq!(f.revenue, Money::from_units(355_080));
        assert_eq!(f.materials_expense, Money::from_units(250_960));
        assert_eq!(f.staff_costs, Money::from_units(22_560));
        assert_eq!(f.other_opex, Money::from_cents(6_026_280));
        assert_eq!(f.depreciation, Money::from_units(7_000));
        assert_eq!(f.interest, Money::from_units(5_000));
        assert_eq!(f.tax, Money::from_cents(185_944));
        assert_eq!(f.net_income, Money::from_cents(743_776));
        assert_eq!(next.cash, Money::from_cents(88_725_776));
        assert_eq!(next.inventory_units, 1_772);
        assert_eq!(next.pipeline, [PipelineOrder { arrival_month: 3, units: 4_000 }]);
        assert!(approx(100.0 * 3_228.0 / f.nominal_capacity, 24.78, 0.005));
    }

    #[test]
    fn zero_demand_books_setup_only_when_ordering() {
        let p = SimParams::default();
        let s = CompanyState::opening(&p);
        for (order, setup) in [(0.0, 0), (100.0, 25_000)] {
            let d = DecisionVector { order_units: order, price: 110.0, ..Default::default() };
            let v = validate_decisions(&d, &s, &p).unwrap();
            let (_, f) = step_month(&s, &v, 0, &p);
            assert_eq!(f.units_sold, 0);
            assert_eq!(f.revenue, Money::ZERO);
            assert_eq!(f.materials_expense, Money::from_units(setup));
        }
    }

    #[test]
    fn quiescent_month_cost_drivers() {
        let p = SimParams::default();
        let s = CompanyState::opening(&p);
        let d = DecisionVector { price: 110.0, ..Default::default() };
        let v = validate_decisions(&d, &s, &p).unwrap();
        let (_, f) = step_month(&s, &v, 0, &p);
        assert_eq!(f.materials_expense, Money::ZERO);
        assert_eq!(f.staff_costs, Money::from_units(22_560));
        assert_eq!(f.other_opex, Money::from_units(51_000) + f.pension_accrual);
        assert_eq!(f.total_costs, Money::from_units(22_560 + 7_000 + 51_000) + f.pension_accrual);
    }
}
