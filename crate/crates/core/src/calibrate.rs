//! Fits the monthly industry baselines to the reference-year unit series.
//!
//! With both firms at the reference price and no marketing, own demand is
//! `round(round(base × gdp_mult) / 2)`. Each month's base is the integer
//! closest to `2u / gdp_mult` whose round trip reproduces `u`. The bulk month
//! takes the mean of its neighbours' baselines and the remainder becomes the
//! one-off event.

use alloc::vec::Vec;

use libm::round;

use crate::market::{gdp_multiplier, month_demand, BulkEvent, MarketCalendar, Offer, MONTHS};
use crate::params::SimParams;
use crate::year0::{BULK_MONTH, GDP_PCT, PRICE, UNITS};

#[derive(Clone, Debug, PartialEq)]
pub struct Calibration {
    pub calendar: MarketCalendar,
    /// Own demand the fitted calendar produces in a reference-year replay.
    pub fitted_units: [u64; MONTHS],
    /// `(fitted − target) / target` per month; `None` for the bulk month.
    pub residuals: [Option<f64>; MONTHS],
}

impl Calibration {
    pub fn max_abs_residual(&self) -> f64 {
        self.residuals.iter().flatten().fold(0.0, |acc: f64, r| acc.max(r.abs()))
    }
}

fn reference_offer() -> Offer {
    Offer { price: PRICE, marketing: 0.0, env_index: 100.0 }
}

fn own_units(cal: &MarketCalendar, month: u32, p: &SimParams) -> u64 {
    let o = reference_offer();
    month_demand(month, cal, &o, &o, p).map(|d| d.own_demand).unwrap_or(0)
}

fn draft_calendar(base_units: Vec<f64>) -> MarketCalendar {
    MarketCalendar {
        base_units,
        gdp_path: GDP_PCT.to_vec(),
        school_start_month: Some(9),
        holiday_months: alloc::vec![11, 12],
        bulk_event: None,
    }
}

pub fn calibrate_calendar(p: &SimParams) -> Calibration {
    let bulk_slot = BULK_MONTH as usize - 1;
    let mut bases = Vec::with_capacity(MONTHS);
    for (slot, &u) in UNITS.iter().enumerate() {
        let ideal = 2.0 * u as f64 / gdp_multiplier(GDP_PCT[slot], p);
        bases.push(round(ideal).max(1.0));
    }
    // Nudge each base by at most a few units until the rounding chain lands on target.
    for slot in 0..MONTHS {
        if slot == bulk_slot {
            continue;
        }
        let month = slot as u32 + 1;
        let start = bases[slot];
        for delta in [0.0, -1.0, 1.0, -2.0, 2.0, -3.0, 3.0] {
            let candidate = (start + delta).max(1.0);
            let mut trial = draft_calendar(bases.clone());
            trial.base_units[slot] = candidate;
            if own_units(&trial, month, p) == UNITS[slot] {
                bases[slot] = candidate;
                break;
            }
        }
    }
    bases[bulk_slot] = round((bases[bulk_slot - 1] + bases[bulk_slot + 1]) / 2.0);

    let mut calendar = draft_calendar(bases);
    let organic = own_units(&calendar, BULK_MONTH, p);
    let target = UNITS[bulk_slot];
    if target > organic {
        calendar.bulk_event = Some(BulkEvent { month: BULK_MONTH, units: target - organic });
    }

    let mut fitted_units = [0u64; MONTHS];
    let mut residuals = [None; MONTHS];
    for slot in 0..MONTHS {
        let fitted = own_units(&calendar, slot as u32 + 1, p);
        fitted_units[slot] = fitted;
        if slot != bulk_slot {
            residuals[slot] = Some((fitted as f64 - UNITS[slot] as f64) / UNITS[slot] as f64);
        }
    }
    Calibration { calendar, fitted_units, residuals }
}
