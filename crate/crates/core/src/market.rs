//! Industry demand, the two-firm logit split and sales realization.
//!
//! Industry demand for month `m` is
//!
//! ```text
//! D = base_units[m] × (1 + γ·(gdp − g_ref)/100) × (1 + α·ln(1 + marketing/M0))
//! ```
//!
//! rounded half-up to whole units. Each firm's pull is
//! `u = −λ·price + μ·ln(1 + marketing/M0) + ν·(env − 100)/100` and the own share
//! is `1 / (1 + exp(u_comp − u_own))`.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decision::DecisionVector;
use crate::params::SimParams;

pub const MONTHS: usize = 12;

pub const MONTH_NAMES: [&str; MONTHS] = [
    "January",
    "February",
    "March",
    "April",
    "May",
    "June",
    "July",
    "August",
    "September",
    "October",
    "November",
    "December",
];

/// One-off institutional purchase from Retailer One, added to its own demand.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BulkEvent {
    pub month: u32,
    pub units: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketCalendar {
    /// Industry units per month at neutral GDP and zero marketing.
    pub base_units: Vec<f64>,
    /// GDP growth, percent, per month.
    pub gdp_path: Vec<f64>,
    #[serde(default = "default_school_start")]
    pub school_start_month: Option<u32>,
    #[serde(default = "default_holiday_months")]
    pub holiday_months: Vec<u32>,
    #[serde(default)]
    pub bulk_event: Option<BulkEvent>,
}

fn default_school_start() -> Option<u32> {
    Some(9)
}

fn default_holiday_months() -> Vec<u32> {
    alloc::vec![11, 12]
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum MarketError {
    #[error("month {0} is outside 1..=12")]
    UnknownMonth(u32),
    #[error("calendar field `{field}` must have 12 entries, found {found}")]
    CalendarLength { field: &'static str, found: usize },
    #[error("calendar base_units[{month}] must be a positive finite number")]
    NonPositiveBase { month: u32 },
    #[error("calendar gdp_path[{month}] is not finite")]
    NonFiniteGdp { month: u32 },
    #[error("competitor script must have 12 rows, found {0}")]
    ScriptLength(usize),
}

pub fn month_slot(month: u32) -> Result<usize, MarketError> {
    if (1..=MONTHS as u32).contains(&month) {
        Ok(month as usize - 1)
    } else {
        Err(MarketError::UnknownMonth(month))
    }
}

impl MarketCalendar {
    pub fn validate(&self) -> Result<(), MarketError> {
        if self.base_units.len() != MONTHS {
            return Err(MarketError::CalendarLength { field: "base_units", found: self.base_units.len() });
        }
        if self.gdp_path.len() != MONTHS {
            return Err(MarketError::CalendarLength { field: "gdp_path", found: self.gdp_path.len() });
        }
        for (i, b) in self.base_units.iter().enumerate() {
            if !(b.is_finite() && *b > 0.0) {
                return Err(MarketError::NonPositiveBase { month: i as u32 + 1 });
            }
        }
        for (i, g) in self.gdp_path.iter().enumerate() {
            if !g.is_finite() {
                return Err(MarketError::NonFiniteGdp { month: i as u32 + 1 });
            }
        }
        if let Some(bulk) = self.bulk_event {
            month_slot(bulk.month)?;
        }
        Ok(())
    }

    pub fn gdp(&self, month: u32) -> Result<f64, MarketError> {
        Ok(self.gdp_path[month_slot(month)?])
    }

    pub fn bulk_units(&self, month: u32) -> u64 {
        match self.bulk_event {
            Some(b) if b.month == month => b.units,
            _ => 0,
        }
    }
}

pub fn round_half_up(x: f64) -> u64 {
    if x <= 0.0 || !x.is_finite() {
        0
    } else {
        libm::floor(x + 0.5) as u64
    }
}

pub fn gdp_multiplier(gdp_pct: f64, p: &SimParams) -> f64 {
    1.0 + p.model.gdp_elasticity * (gdp_pct - p.model.gdp_reference) / 100.0
}

pub fn marketing_multiplier(total_marketing: f64, p: &SimParams) -> f64 {
    1.0 + p.model.marketing_effect * libm::log(1.0 + total_marketing.max(0.0) / p.model.marketing_scale)
}

/// Unrounded industry demand; `industry_demand` rounds this.
pub fn industry_demand_raw(
    month: u32,
    gdp_pct: f64,
    total_marketing: f64,
    cal: &MarketCalendar,
    p: &SimParams,
) -> Result<f64, MarketError> {
    let base = cal.base_units[month_slot(month)?];
    Ok((base * gdp_multiplier(gdp_pct, p) * marketing_multiplier(total_marketing, p)).max(0.0))
}

pub fn industry_demand(
    month: u32,
    gdp_pct: f64,
    total_marketing: f64,
    cal: &MarketCalendar,
    p: &SimParams,
) -> Result<u64, MarketError> {
    industry_demand_raw(month, gdp_pct, total_marketing, cal, p).map(round_half_up)
}

/// Observable attributes a firm competes on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Offer {
    pub price: f64,
    pub marketing: f64,
    pub env_index: f64,
}

fn pull(o: &Offer, p: &SimParams) -> f64 {
    let m = &p.model;
    -m.price_sensitivity * o.price
        + m.marketing_pull * libm::log(1.0 + o.marketing.max(0.0) / m.marketing_scale)
        + m.env_pull * (o.env_index - 100.0) / 100.0
}

/// Own share of the industry under the logit split.
pub fn own_share(own: &Offer, comp: &Offer, p: &SimParams) -> f64 {
    let share = 1.0 / (1.0 + libm::exp(pull(comp, p) - pull(own, p)));
    if share.is_nan() {
        0.5
    } else {
        share
    }
}

/// Splits industry demand into (own, competitor), both real-valued.
pub fn split_demand(industry: f64, own: &Offer, comp: &Offer, p: &SimParams) -> (f64, f64) {
    let share = own_share(own, comp, p);
    let own_units = industry * share;
    (own_units, industry * (1.0 - share))
}

/// `sold = min(demand, inventory, capacity)`; unmet demand is lost.
pub fn realize_sales(demand: u64, inventory: u64, capacity: u64) -> (u64, u64) {
    let sold = demand.min(inventory).min(capacity);
    (sold, demand - sold)
}

/// Scripted decisions of Retailer Two, one row per month.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompetitorScript {
    pub months: Vec<DecisionVector>,
}

impl CompetitorScript {
    pub fn validate(&self) -> Result<(), MarketError> {
        if self.months.len() != MONTHS {
            return Err(MarketError::ScriptLength(self.months.len()));
        }
        Ok(())
    }
}

pub fn competitor_policy(month: u32, script: &CompetitorScript) -> Result<DecisionVector, MarketError> {
    let slot = month_slot(month)?;
    script.months.get(slot).cloned().ok_or(MarketError::UnknownMonth(month))
}

/// Demand and sales for both firms in one month.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarketOutcome {
    pub industry_demand: u64,
    pub own_demand: u64,
    pub comp_demand: u64,
    pub own_sold: u64,
    pub comp_sold: u64,
    pub own_unmet: u64,
    /// `own_sold / (own_sold + comp_sold)`, 0 when neither firm sold.
    pub market_share: f64,
}

/// Demand each firm faces this month, before sales are realized.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DemandOutcome {
    pub industry_demand: u64,
    pub own_demand: u64,
    pub comp_demand: u64,
}

/// Industry demand plus split. The own share is rounded half-up and the
/// competitor receives the remainder; a bulk event is added to own demand.
pub fn month_demand(
    month: u32,
    cal: &MarketCalendar,
    own: &Offer,
    comp: &Offer,
    p: &SimParams,
) -> Result<DemandOutcome, MarketError> {
    let gdp = cal.gdp(month)?;
    let industry = industry_demand(month, gdp, own.marketing + comp.marketing, cal, p)?;
    let (own_raw, _) = split_demand(industry as f64, own, comp, p);
    let own_units = round_half_up(own_raw).min(industry);
    let comp_units = industry - own_units;
    let bulk = cal.bulk_units(month);
    Ok(DemandOutcome { industry_demand: industry + bulk, own_demand: own_units + bulk, comp_demand: comp_units })
}

pub fn market_share(own_sold: u64, comp_sold: u64) -> f64 {
    let total = own_sold + comp_sold;
    if total == 0 {
        0.0
    } else {
        own_sold as f64 / total as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn flat_calendar(base: f64) -> MarketCalendar {
        MarketCalendar {
            base_units: vec![base; 12],
            gdp_path: vec![4.0; 12],
            school_start_month: Some(9),
            holiday_months: vec![11, 12],
            bulk_event: None,
        }
    }

    fn offer(price: f64) -> Offer {
        Offer { price, marketing: 0.0, env_index: 100.0 }
    }

    #[test]
    fn neutral_multipliers_return_base() {
        let p = SimParams::default();
        let cal = flat_calendar(6_456.0);
        assert_eq!(industry_demand(3, 4.0, 0.0, &cal, &p).unwrap(), 6_456);
    }

    #[test]
    fn marketing_ratio_matches_log_response() {
        let p = SimParams::default();
        let cal = flat_calendar(10_000.0);
        let with = industry_demand_raw(1, 4.0, 10_000.0, &cal, &p).unwrap();
        let without = industry_demand_raw(1, 4.0, 0.0, &cal, &p).unwrap();
        // 1 + 0.05·ln 2
        assert!((with / without - 1.034_657_359_0).abs() < 1e-9);
    }

    #[test]
    fn symmetric_split_is_even() {
        let p = SimParams::default();
        let (own, comp) = split_demand(6_456.0, &offer(110.0), &offer(110.0), &p);
        assert_eq!(own, 3_228.0);
        assert_eq!(comp, 3_228.0);
    }

    #[test]
    fn cheaper_firm_share_matches_hand_logit() {
        // 1/(1 + e^(−0.05·10)) = 0.622459...
        let p = SimParams::default();
        let s = own_share(&offer(100.0), &offer(110.0), &p);
        assert!((s - 0.622_459_331_2).abs() < 1e-9);
    }

    #[test]
    fn extreme_price_drives_share_to_zero() {
        let p = SimParams::default();
        assert!(own_share(&offer(1e9), &offer(110.0), &p) < 1e-12);
        assert_eq!(own_share(&offer(f64::MAX), &offer(110.0), &p), 0.0);
    }

    #[test]
    fn realize_sales_cases() {
        assert_eq!(realize_sales(5_000, 3_000, 10_000), (3_000, 2_000));
        assert_eq!(realize_sales(5_000, 10_000, 4_200), (4_200, 800));
        assert_eq!(realize_sales(0, 10_000, 10_000), (0, 0));
    }

    #[test]
    fn competitor_script_lookup() {
        let row = DecisionVector { price: 110.0, ..Default::default() };
        let mut script = CompetitorScript { months: vec![row; 12] };
        assert_eq!(competitor_policy(3, &script).unwrap().price, 110.0);
        script.months[4].price = 90.0;
        assert_eq!(competitor_policy(5, &script).unwrap().price, 90.0);
        assert_eq!(competitor_policy(13, &script), Err(MarketError::UnknownMonth(13)));
        assert_eq!(competitor_policy(0, &script), Err(MarketError::UnknownMonth(0)));
    }

    #[test]
    fn month_demand_conserves_units() {
        let p = SimParams::default();
        let cal = flat_calendar(7_001.0);
        let d = month_demand(1, &cal, &offer(104.0), &offer(110.0), &p).unwrap();
        assert_eq!(d.own_demand + d.comp_demand, d.industry_demand);
    }

    #[test]
    fn share_defined_zero_without_sales() {
        assert_eq!(market_share(0, 0), 0.0);
        assert_eq!(market_share(10, 30), 0.25);
    }

    proptest::proptest! {
        #[test]
        fn split_is_scale_consistent(industry in 0.0f64..1e7, pa in 1.0f64..500.0, pb in 1.0f64..500.0,
                                     ma in 0.0f64..1e6, mb in 0.0f64..1e6) {
            let p = SimParams::default();
            let a = Offer { price: pa, marketing: ma, env_index: 100.0 };
            let b = Offer { price: pb, marketing: mb, env_index: 100.0 };
            let (o1, c1) = split_demand(industry, &a, &b, &p);
            let (o2, c2) = split_demand(2.0 * industry, &a, &b, &p);
            proptest::prop_assert_eq!(o2, 2.0 * o1);
            proptest::prop_assert_eq!(c2, 2.0 * c1);
        }

        #[test]
        fn own_demand_non_increasing_in_price(p1 in 1.0f64..500.0, dp in 0.0f64..500.0, comp in 1.0f64..500.0) {
            let p = SimParams::default();
            let lo = own_share(&offer(p1), &offer(comp), &p);
            let hi = own_share(&offer(p1 + dp), &offer(comp), &p);
            proptest::prop_assert!(hi <= lo);
        }

        #[test]
        fn own_demand_non_decreasing_in_marketing(m1 in 0.0f64..1e6, dm in 0.0f64..1e6) {
            let p = SimParams::default();
            let a = Offer { price: 110.0, marketing: m1, env_index: 100.0 };
            let b = Offer { price: 110.0, marketing: m1 + dm, env_index: 100.0 };
            let comp = offer(110.0);
            proptest::prop_assert!(own_share(&b, &comp, &p) >= own_share(&a, &comp, &p));
        }

        #[test]
        fn share_bounded(own_sold in 0u64..1_000_000, comp_sold in 0u64..1_000_000) {
            let s = market_share(own_sold, comp_sold);
            proptest::prop_assert!((0.0..=1.0).contains(&s));
        }
    }
}
