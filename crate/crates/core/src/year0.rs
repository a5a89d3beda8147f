//! The reference year the company has just closed, and the built-in scenarios
//! derived from it.

use alloc::string::String;
use alloc::vec::Vec;

use crate::calibrate::calibrate_calendar;
use crate::decision::DecisionVector;
use crate::market::{CompetitorScript, MarketCalendar, MONTHS};
use crate::params::SimParams;
use crate::sim::{Scenario, SCHEMA_VERSION};

/// Units sold per month (revenue at a selling price of 110).
pub const UNITS: [u64; MONTHS] = [3228, 146, 3247, 3245, 3774, 3431, 3292, 4817, 2217, 2849, 6022, 4732];

pub const GDP_PCT: [f64; MONTHS] = [-3.0, -1.0, 0.0, 1.0, 2.0, 2.0, 0.0, 3.0, 4.0, 5.0, 4.0, -5.0];

/// Supplier orders placed each month.
pub const ORDERS: [u64; MONTHS] = [4000, 4000, 4000, 4000, 4000, 4000, 3000, 3000, 3000, 3000, 3000, 3000];

pub const PRICE: f64 = 110.0;

/// Month of the one-off institutional purchase.
pub const BULK_MONTH: u32 = 5;

/// GDP growth expected for the coming year, flat.
pub const OUTLOOK_GDP_PCT: f64 = 1.0;

pub fn revenue(month: u32) -> f64 {
    UNITS[month as usize - 1] as f64 * PRICE
}

pub fn mean_monthly_units() -> f64 {
    UNITS.iter().sum::<u64>() as f64 / MONTHS as f64
}

pub fn mean_monthly_revenue() -> f64 {
    mean_monthly_units() * PRICE
}

/// Decisions that reproduce the reference year.
pub fn decisions() -> Vec<DecisionVector> {
    ORDERS.iter().map(|&q| DecisionVector { order_units: q as f64, price: PRICE, ..Default::default() }).collect()
}

pub fn competitor_script() -> CompetitorScript {
    CompetitorScript { months: decisions() }
}

/// Calendar of the reference year: calibrated baselines, its GDP path and the bulk purchase.
pub fn calendar(p: &SimParams) -> MarketCalendar {
    calibrate_calendar(p).calendar
}

pub fn scenario() -> Scenario {
    let params = SimParams { initial_price: PRICE, ..SimParams::default() };
    Scenario {
        id: String::from("year0"),
        schema_version: SCHEMA_VERSION,
        description: String::from("Replay of the reference year with its own GDP path and May bulk purchase"),
        calendar: calendar(&params),
        competitor: competitor_script(),
        params,
    }
}

/// The year to be played: same baselines, flat GDP outlook, no bulk purchase.
pub fn default_scenario() -> Scenario {
    let params = SimParams::default();
    let mut calendar = calendar(&params);
    calendar.gdp_path = alloc::vec![OUTLOOK_GDP_PCT; MONTHS];
    calendar.bulk_event = None;
    Scenario {
        id: String::from("default"),
        schema_version: SCHEMA_VERSION,
        description: String::from("Coming year: calibrated seasonality, 1% GDP growth, scripted competitor"),
        calendar,
        competitor: competitor_script(),
        params,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_series_totals() {
        assert_eq!(UNITS.iter().sum::<u64>(), 41_000);
        assert_eq!(revenue(12), 520_520.0);
        assert_eq!(revenue(1), 355_080.0);
    }

    #[test]
    fn order_stream_balances_inventory() {
        // 5,000 opening + orders arriving two months later − sales leaves nothing in December.
        let mut inv = 5_000i64;
        for m in 0..MONTHS {
            if m >= 2 {
                inv += ORDERS[m - 2] as i64;
            }
            inv -= UNITS[m] as i64;
            assert!(inv >= 0);
        }
        assert_eq!(inv, 0);
    }

    #[test]
    fn builtin_scenarios_validate() {
        scenario().validate().unwrap();
        default_scenario().validate().unwrap();
    }
}
