//! Baseline policy: order-up-to stocking against the scenario's own demand
//! outlook, constant reference price, modest marketing and training.

use retail_sim_core::engine::attrition_rate;
use retail_sim_core::market::{competitor_policy, month_demand, Offer};
use retail_sim_core::year0;
use retail_sim_core::{DecisionVector, MonthlyReport, Scenario, SimState, MONTHS};

use super::{Agent, AgentError, AgentReply, DecisionContext};

pub const PRICE: f64 = 110.0;
pub const SAFETY_FACTOR: f64 = 1.2;
pub const MARKETING_SHARE: f64 = 0.02;
pub const TRAINING: f64 = 5_000.0;
const LOT: f64 = 100.0;

fn round_up_to_lot(x: f64) -> f64 {
    (x / LOT).ceil() * LOT
}

/// Month-1 order: the reference year's mean monthly volume, to the nearest lot.
pub fn opening_order() -> f64 {
    (year0::mean_monthly_units() / LOT).round() * LOT
}

/// Own demand in `month` if both firms follow their plans; 0 outside the year.
pub fn expected_demand(month: u32, marketing: f64, sc: &Scenario, state: &SimState) -> f64 {
    if month == 0 || month as usize > MONTHS {
        return 0.0;
    }
    let Ok(rival) = competitor_policy(month, &sc.competitor) else { return 0.0 };
    let own = Offer { price: PRICE, marketing, env_index: state.own.env_index };
    let comp = Offer { price: rival.price, marketing: rival.marketing_expense, env_index: state.rival.env_index };
    month_demand(month, &sc.calendar, &own, &comp, &sc.params).map(|d| d.own_demand as f64).unwrap_or(0.0)
}

fn trailing(history: &[MonthlyReport], f: impl Fn(&MonthlyReport) -> f64) -> f64 {
    history.last().or(year0_last()).map(f).unwrap_or(0.0)
}

fn year0_last() -> Option<&'static MonthlyReport> {
    super::year0_block().last()
}

/// The policy as a pure function of what the agent is shown.
pub fn heuristic_decision(ctx: &DecisionContext<'_>) -> DecisionVector {
    let sc = ctx.scenario;
    let p = &sc.params;
    let s = &ctx.state.own;
    let t = ctx.month;
    let marketing = MARKETING_SHARE * trailing(ctx.history, |r| r.flows.revenue.to_f64());

    let order_units = if t == 1 {
        opening_order()
    } else if t + p.lead_time > MONTHS as u32 {
        0.0
    } else {
        let cover: f64 = (t..=t + p.lead_time).map(|m| expected_demand(m, marketing, sc, ctx.state)).sum();
        let gap = SAFETY_FACTOR * cover - s.inventory_position() as f64;
        if gap > 0.0 {
            round_up_to_lot(gap)
        } else {
            0.0
        }
    };

    let per_worker = p.hours_per_worker * (1.0 - p.absenteeism) * s.productivity;
    let needed = (SAFETY_FACTOR * expected_demand(t, marketing, sc, ctx.state) / per_worker).ceil();
    let remaining = s.workers * (1.0 - attrition_rate(TRAINING, p));
    let workers_hired = (needed - remaining).ceil().max(0.0);

    let next = if (t as usize) < MONTHS { t + 1 } else { t };
    DecisionVector {
        order_units,
        price: PRICE,
        workers_hired,
        workers_dismissed: 0.0,
        marketing_expense: marketing,
        loans: 0.0,
        training_expense: TRAINING,
        rnd_expense: 0.0,
        sales_forecast_next: expected_demand(next, marketing, sc, ctx.state) * PRICE,
        net_income_forecast: trailing(ctx.history, |r| r.flows.net_income.to_f64()),
        dividend_rate: 0.0,
    }
}

pub struct HeuristicAgent {
    name: String,
}

impl HeuristicAgent {
    pub fn new(name: &str) -> Self {
        HeuristicAgent { name: name.to_string() }
    }
}

impl Agent for HeuristicAgent {
    fn name(&self) -> &str {
        &self.name
    }

    fn decide(&mut self, ctx: &DecisionContext<'_>) -> Result<AgentReply, AgentError> {
        Ok(AgentReply::decided(heuristic_decision(ctx)))
    }
}
