use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::money::Money;
use crate::params::SimParams;

/// A supplier order in transit. Goods belong to the supplier until they arrive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineOrder {
    pub arrival_month: u32,
    pub units: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Forecasts {
    pub sales: Money,
    pub net_income: Money,
}

/// Company position at the end of `month_index` (0 = opening position).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompanyState {
    pub month_index: u32,
    pub inventory_units: u64,
    pub pipeline: Vec<PipelineOrder>,
    pub cash: Money,
    pub receivables: Money,
    pub long_term_debt: Money,
    pub provisions: Money,
    pub accumulated_depr_buildings: Money,
    pub accumulated_depr_equipment: Money,
    pub retained_earnings: Money,
    pub workers: f64,
    pub productivity: f64,
    pub env_index: f64,
    pub last_price: Money,
    pub last_revenue: Money,
    /// Forecasts submitted last month, scored against this month's actuals.
    pub forecasts_pending: Forecasts,
}

impl CompanyState {
    pub fn opening(p: &SimParams) -> Self {
        CompanyState {
            month_index: 0,
            inventory_units: p.initial_inventory_units,
            pipeline: Vec::new(),
            cash: Money::from_f64(p.initial_cash),
            receivables: Money::ZERO,
            long_term_debt: Money::from_f64(p.initial_long_term_debt),
            provisions: Money::from_f64(p.initial_provisions),
            accumulated_depr_buildings: Money::ZERO,
            accumulated_depr_equipment: Money::ZERO,
            retained_earnings: Money::ZERO,
            workers: p.initial_workers,
            productivity: p.max_productivity,
            env_index: p.initial_env_index,
            last_price: Money::from_f64(p.initial_price),
            last_revenue: Money::ZERO,
            forecasts_pending: Forecasts::default(),
        }
    }

    pub fn inventory_value(&self, p: &SimParams) -> Money {
        Money::from_f64(p.wholesale_price).times_units(self.inventory_units)
    }

    pub fn units_in_transit(&self) -> u64 {
        self.pipeline.iter().map(|o| o.units).sum()
    }

    /// On-hand plus in-transit units.
    pub fn inventory_position(&self) -> u64 {
        self.inventory_units + self.units_in_transit()
    }

    pub fn total_assets(&self, p: &SimParams) -> Money {
        self.cash + self.receivables + self.inventory_value(p) + Money::from_f64(p.buildings_value)
            - self.accumulated_depr_buildings
            + Money::from_f64(p.equipment_value)
            - self.accumulated_depr_equipment
            + Money::from_f64(p.intangibles)
    }

    pub fn total_equity(&self, p: &SimParams) -> Money {
        Money::from_f64(p.paid_in_capital) + self.retained_earnings
    }

    pub fn total_liabilities(&self, p: &SimParams) -> Money {
        Money::from_f64(p.accounts_payable) + self.long_term_debt + self.provisions
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn opening_position_balances() {
        let p = SimParams::default();
        let s = CompanyState::opening(&p);
        assert_eq!(s.total_assets(&p), Money::from_units(2_951_000));
        assert_eq!(s.total_assets(&p), s.total_liabilities(&p) + s.total_equity(&p));
        assert_eq!(s.inventory_value(&p), Money::from_units(350_000));
    }
}
