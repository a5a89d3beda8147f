//! The ten monthly decisions and their validation against the company state.

use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::money::Money;
use crate::params::SimParams;
use crate::state::CompanyState;

/// Decisions as submitted by an agent or a human. Values are unconstrained
/// here; `validate_decisions` turns them into something the engine accepts.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecisionVector {
    pub order_units: f64,
    pub price: f64,
    pub workers_hired: f64,
    pub workers_dismissed: f64,
    pub marketing_expense: f64,
    pub loans: f64,
    pub training_expense: f64,
    pub rnd_expense: f64,
    pub sales_forecast_next: f64,
    pub net_income_forecast: f64,
    #[serde(default)]
    pub dividend_rate: f64,
}

/// Identifies one decision field in diagnostics and adjustment notes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecisionField {
    OrderUnits,
    Price,
    WorkersHired,
    WorkersDismissed,
    MarketingExpense,
    Loans,
    TrainingExpense,
    RndExpense,
    SalesForecastNext,
    NetIncomeForecast,
    DividendRate,
}

impl DecisionField {
    pub const ALL: [DecisionField; 11] = [
        DecisionField::OrderUnits,
        DecisionField::Price,
        DecisionField::WorkersHired,
        DecisionField::WorkersDismissed,
        DecisionField::MarketingExpense,
        DecisionField::Loans,
        DecisionField::TrainingExpense,
        DecisionField::RndExpense,
        DecisionField::SalesForecastNext,
        DecisionField::NetIncomeForecast,
        DecisionField::DividendRate,
    ];

    pub const fn name(self) -> &'static str {
        match self {
            DecisionField::OrderUnits => "order_units",
            DecisionField::Price => "price",
            DecisionField::WorkersHired => "workers_hired",
            DecisionField::WorkersDismissed => "workers_dismissed",
            DecisionField::MarketingExpense => "marketing_expense",
            DecisionField::Loans => "loans",
            DecisionField::TrainingExpense => "training_expense",
            DecisionField::RndExpense => "rnd_expense",
            DecisionField::SalesForecastNext => "sales_forecast_next",
            DecisionField::NetIncomeForecast => "net_income_forecast",
            DecisionField::DividendRate => "dividend_rate",
        }
    }

    pub const fn is_required(self) -> bool {
        matches!(self, DecisionField::OrderUnits | DecisionField::Price)
    }
}

impl fmt::Display for DecisionField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl DecisionVector {
    pub fn get(&self, field: DecisionField) -> f64 {
        match field {
            DecisionField::OrderUnits => self.order_units,
            DecisionField::Price => self.price,
            DecisionField::WorkersHired => self.workers_hired,
            DecisionField::WorkersDismissed => self.workers_dismissed,
            DecisionField::MarketingExpense => self.marketing_expense,
            DecisionField::Loans => self.loans,
            DecisionField::TrainingExpense => self.training_expense,
            DecisionField::RndExpense => self.rnd_expense,
            DecisionField::SalesForecastNext => self.sales_forecast_next,
            DecisionField::NetIncomeForecast => self.net_income_forecast,
            DecisionField::DividendRate => self.dividend_rate,
        }
    }

    pub fn set(&mut self, field: DecisionField, value: f64) {
        let slot = match field {
            DecisionField::OrderUnits => &mut self.order_units,
            DecisionField::Price => &mut self.price,
            DecisionField::WorkersHired => &mut self.workers_hired,
            DecisionField::WorkersDismissed => &mut self.workers_dismissed,
            DecisionField::MarketingExpense => &mut self.marketing_expense,
            DecisionField::Loans => &mut self.loans,
            DecisionField::TrainingExpense => &mut self.training_expense,
            DecisionField::RndExpense => &mut self.rnd_expense,
            DecisionField::SalesForecastNext => &mut self.sales_forecast_next,
            DecisionField::NetIncomeForecast => &mut self.net_income_forecast,
            DecisionField::DividendRate => &mut self.dividend_rate,
        };
        *slot = value;
    }
}

/// Machine-readable reason for each change `validate_decisions` made.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AdjustmentNote {
    NegativeClamped { field: DecisionField, requested: f64 },
    Truncated { field: DecisionField, requested: f64, granted: f64 },
    CappedToLimit { field: DecisionField, requested: f64, granted: f64 },
    PriceFloored { requested: f64, granted: f64 },
    DismissalsClamped { requested: u32, granted: u32 },
    OrderReducedForCash { requested: u64, granted: u64 },
    DividendRateClamped { requested: f64, granted: f64 },
}

impl fmt::Display for AdjustmentNote {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdjustmentNote::NegativeClamped { field, requested } => {
                write!(f, "{field} {requested} is negative, set to 0")
            }
            AdjustmentNote::Truncated { field, requested, granted } => {
                write!(f, "{field} {requested} truncated to whole {granted}")
            }
            AdjustmentNote::CappedToLimit { field, requested, granted } => {
                write!(f, "{field} {requested} capped to {granted}")
            }
            AdjustmentNote::PriceFloored { requested, granted } => {
                write!(f, "price {requested} raised to the minimum {granted}")
            }
            AdjustmentNote::DismissalsClamped { requested, granted } => {
                write!(f, "dismissals reduced from {requested} to {granted} (current staff)")
            }
            AdjustmentNote::OrderReducedForCash { requested, granted } => {
                write!(f, "order reduced to {granted} (requested {requested}, not enough cash)")
            }
            AdjustmentNote::DividendRateClamped { requested, granted } => {
                write!(f, "dividend rate {requested} clamped to {granted}")
            }
        }
    }
}

/// Decisions the engine will apply, with the notes explaining every change.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidatedDecisions {
    pub order_units: u64,
    pub price: Money,
    pub workers_hired: u32,
    pub workers_dismissed: u32,
    pub marketing_expense: Money,
    pub loans: Money,
    pub training_expense: Money,
    pub rnd_expense: Money,
    pub sales_forecast_next: Money,
    pub net_income_forecast: Money,
    pub dividend_rate: f64,
    pub notes: Vec<AdjustmentNote>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DecisionError {
    #[error("decision field `{0}` is not a finite number")]
    NonFinite(DecisionField),
}

pub const MIN_PRICE: f64 = 0.01;
/// Ceiling on any single currency decision; keeps cent arithmetic far from overflow.
pub const MAX_AMOUNT: f64 = 1.0e12;
pub const MAX_HEADCOUNT_CHANGE: f64 = 100_000.0;

fn non_negative(value: f64, field: DecisionField, notes: &mut Vec<AdjustmentNote>) -> f64 {
    if value < 0.0 {
        notes.push(AdjustmentNote::NegativeClamped { field, requested: value });
        0.0
    } else {
        value
    }
}

fn capped(value: f64, limit: f64, field: DecisionField, notes: &mut Vec<AdjustmentNote>) -> f64 {
    if value > limit {
        notes.push(AdjustmentNote::CappedToLimit { field, requested: value, granted: limit });
        limit
    } else {
        value
    }
}

fn whole(value: f64, field: DecisionField, notes: &mut Vec<AdjustmentNote>) -> f64 {
    let floored = libm::floor(value);
    if floored != value {
        notes.push(AdjustmentNote::Truncated { field, requested: value, granted: floored });
    }
    floored
}

fn amount(value: f64, field: DecisionField, notes: &mut Vec<AdjustmentNote>) -> Money {
    let v = non_negative(value, field, notes);
    Money::from_f64(capped(v, MAX_AMOUNT, field, notes))
}

/// Largest order `q` with `q × wholesale + setup·[q > 0] ≤ max(0, cash)`.
pub fn affordable_order(requested: u64, cash: Money, p: &SimParams) -> u64 {
    if requested == 0 {
        return 0;
    }
    let unit = Money::from_f64(p.wholesale_price).cents();
    let setup = Money::from_f64(p.order_setup_cost).cents();
    let budget = cash.cents().max(0);
    if unit == 0 {
        return if setup <= budget { requested } else { 0 };
    }
    let fits = |q: u64| (q as i128) * (unit as i128) + setup as i128 <= budget as i128;
    if fits(requested) {
        requested
    } else if budget < setup {
        0
    } else {
        ((budget - setup) / unit) as u64
    }
}

pub fn validate_decisions(
    d: &DecisionVector,
    s: &CompanyState,
    p: &SimParams,
) -> Result<ValidatedDecisions, DecisionError> {
    for field in DecisionField::ALL {
        if !d.get(field).is_finite() {
            return Err(DecisionError::NonFinite(field));
        }
    }
    let mut notes = Vec::new();

    let order = non_negative(d.order_units, DecisionField::OrderUnits, &mut notes);
    let order = whole(order, DecisionField::OrderUnits, &mut notes);
    let order = capped(order, 1.0e12, DecisionField::OrderUnits, &mut notes) as u64;
    let granted = affordable_order(order, s.cash, p);
    if granted < order {
        notes.push(AdjustmentNote::OrderReducedForCash { requested: order, granted });
    }

    let price = if d.price < MIN_PRICE {
        notes.push(AdjustmentNote::PriceFloored { requested: d.price, granted: MIN_PRICE });
        MIN_PRICE
    } else {
        capped(d.price, MAX_AMOUNT, DecisionField::Price, &mut notes)
    };
    let price = Money::from_f64(price).max(Money::from_cents(1));

    let hired = non_negative(d.workers_hired, DecisionField::WorkersHired, &mut notes);
    let hired = whole(hired, DecisionField::WorkersHired, &mut notes);
    let hired = capped(hired, MAX_HEADCOUNT_CHANGE, DecisionField::WorkersHired, &mut notes) as u32;

    let dismissed = non_negative(d.workers_dismissed, DecisionField::WorkersDismissed, &mut notes);
    let dismissed = whole(dismissed, DecisionField::WorkersDismissed, &mut notes);
    let dismissed = capped(dismissed, MAX_HEADCOUNT_CHANGE, DecisionField::WorkersDismissed, &mut notes) as u32;
    let staff = libm::floor(s.workers.max(0.0)) as u32;
    let dismissed = if dismissed > staff {
        notes.push(AdjustmentNote::DismissalsClamped { requested: dismissed, granted: staff });
        staff
    } else {
        dismissed
    };

    let marketing_expense = amount(d.marketing_expense, DecisionField::MarketingExpense, &mut notes);
    let loans = amount(d.loans, DecisionField::Loans, &mut notes);
    let training_expense = amount(d.training_expense, DecisionField::TrainingExpense, &mut notes);
    let rnd_expense = amount(d.rnd_expense, DecisionField::RndExpense, &mut notes);

    let forecast = |v: f64, field, notes: &mut Vec<AdjustmentNote>| {
        let v = capped(v, MAX_AMOUNT, field, notes);
        if v < -MAX_AMOUNT {
            notes.push(AdjustmentNote::CappedToLimit { field, requested: v, granted: -MAX_AMOUNT });
            Money::from_f64(-MAX_AMOUNT)
        } else {
            Money::from_f64(v)
        }
    };
    let sales_forecast_next = forecast(d.sales_forecast_next, DecisionField::SalesForecastNext, &mut notes);
    let net_income_forecast = forecast(d.net_income_forecast, DecisionField::NetIncomeForecast, &mut notes);

    let dividend_rate = d.dividend_rate.clamp(0.0, 1.0);
    if dividend_rate != d.dividend_rate {
        notes.push(AdjustmentNote::DividendRateClamped { requested: d.dividend_rate, granted: dividend_rate });
    }

    Ok(ValidatedDecisions {
        order_units: granted,
        price,
        workers_hired: hired,
        workers_dismissed: dismissed,
        marketing_expense,
        loans,
        training_expense,
        rnd_expense,
        sales_forecast_next,
        net_income_forecast,
        dividend_rate,
        notes,
    })
}
