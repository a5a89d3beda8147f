//! Scenario definition and the two-firm monthly loop.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decision::{validate_decisions, DecisionError, DecisionVector};
use crate::engine::step_month;
use crate::kpi::{compute_kpis, MonthContext};
use crate::ledger::{build_statements, LedgerError};
use crate::market::{
    competitor_policy, market_share, month_demand, CompetitorScript, MarketCalendar, MarketError, MarketOutcome, Offer,
    MONTHS,
};
use crate::params::{ParamViolation, SimParams};
use crate::report::MonthlyReport;
use crate::state::CompanyState;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: String,
    pub schema_version: u32,
    #[serde(default)]
    pub description: String,
    pub params: SimParams,
    pub calendar: MarketCalendar,
    pub competitor: CompetitorScript,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum SimError {
    #[error("unsupported scenario schema_version {found} (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },
    #[error("invalid parameters: {0:?}")]
    Params(Vec<ParamViolation>),
    #[error(transparent)]
    Market(#[from] MarketError),
    #[error(transparent)]
    Decision(#[from] DecisionError),
    #[error("competitor decision for month {month}: {source}")]
    Competitor { month: u32, source: DecisionError },
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error("session already completed all {0} months")]
    Completed(u32),
}

impl Scenario {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(SimError::SchemaVersion { found: self.schema_version, expected: SCHEMA_VERSION });
        }
        let violations = self.params.violations();
        if !violations.is_empty() {
            return Err(SimError::Params(violations));
        }
        self.calendar.validate()?;
        self.competitor.validate()?;
        Ok(())
    }
}

/// Both firms' books at a month boundary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub own: CompanyState,
    pub rival: CompanyState,
}

impl SimState {
    pub fn opening(p: &SimParams) -> Self {
        let own = CompanyState::opening(p);
        SimState { rival: own.clone(), own }
    }

    /// Month the next step will simulate.
    pub fn next_month(&self) -> u32 {
        self.own.month_index + 1
    }

    pub fn is_complete(&self) -> bool {
        self.own.month_index as usize >= MONTHS
    }
}

/// Advances both firms by one month. Pure: the input state is untouched.
pub fn step(
    state: &SimState,
    submitted: &DecisionVector,
    sc: &Scenario,
) -> Result<(SimState, MonthlyReport), SimError> {
    if state.is_complete() {
        return Err(SimError::Completed(MONTHS as u32));
    }
    let p = &sc.params;
    let month = state.next_month();
    let applied = validate_decisions(submitted, &state.own, p)?;
    let competitor = competitor_policy(month, &sc.competitor)?;
    let rival_applied =
        validate_decisions(&competitor, &state.rival, p).map_err(|source| SimError::Competitor { month, source })?;

    let own_offer = Offer {
        price: applied.price.to_f64(),
        marketing: applied.marketing_expense.to_f64(),
        env_index: state.own.env_index,
    };
    let rival_offer = Offer {
        price: rival_applied.price.to_f64(),
        marketing: rival_applied.marketing_expense.to_f64(),
        env_index: state.rival.env_index,
    };
    let demand = month_demand(month, &sc.calendar, &own_offer, &rival_offer, p)?;

    let (own_next, flows) = step_month(&state.own, &applied, demand.own_demand, p);
    let (rival_next, rival_flows) = step_month(&state.rival, &rival_applied, demand.comp_demand, p);
    let statements = build_statements(&state.own, &flows, p)?;

    let share = market_share(flows.units_sold, rival_flows.units_sold);
    let market = MarketOutcome {
        industry_demand: demand.industry_demand,
        own_demand: demand.own_demand,
        comp_demand: demand.comp_demand,
        own_sold: flows.units_sold,
        comp_sold: rival_flows.units_sold,
        own_unmet: flows.units_unmet,
        market_share: share,
    };
    let ctx = MonthContext { gdp_pct: sc.calendar.gdp(month)?, market_share: share };
    let kpis = compute_kpis(&state.own, &own_next, &flows, &statements, ctx, p);

    let report =
        MonthlyReport { month, submitted: submitted.clone(), applied, competitor, market, flows, statements, kpis };
    Ok((SimState { own: own_next, rival: rival_next }, report))
}

/// Convenience owner of a scenario and its running state.
#[derive(Clone, Debug)]
pub struct Simulation {
    scenario: Scenario,
    state: SimState,
}

impl Simulation {
    pub fn new(scenario: Scenario) -> Result<Self, SimError> {
        scenario.validate()?;
        let state = SimState::opening(&scenario.params);
        Ok(Simulation { scenario, state })
    }

    pub fn resume(scenario: Scenario, state: SimState) -> Result<Self, SimError> {
        scenario.validate()?;
        Ok(Simulation { scenario, state })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    pub fn next_month(&self) -> u32 {
        self.state.next_month()
    }

    pub fn is_complete(&self) -> bool {
        self.state.is_complete()
    }

    pub fn step(&mut self, d: &DecisionVector) -> Result<MonthlyReport, SimError> {
        let (next, report) = step(&self.state, d, &self.scenario)?;
        self.state = next;
        Ok(report)
    }

    /// Runs the remaining months with a fixed open-loop decision sequence.
    pub fn run_open_loop(&mut self, decisions: &[DecisionVector]) -> Result<Vec<MonthlyReport>, SimError> {
        let mut out = Vec::new();
        for d in decisions {
            if self.is_complete() {
                break;
            }
            out.push(self.step(d)?);
        }
        Ok(out)
    }
}
