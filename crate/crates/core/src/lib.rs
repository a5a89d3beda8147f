//! Deterministic month-stepped simulation of a single-product retailer
//! competing against a scripted rival, with a three-statement ledger and KPIs.
//!
//! The crate is `no_std` (with `alloc`) so the engine can be embedded anywhere;
//! file formats, networking and the CLI live in the `retail-sim` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod analytics;
pub mod calibrate;
pub mod decision;
pub mod engine;
pub mod kpi;
pub mod ledger;
pub mod market;
pub mod money;
pub mod params;
pub mod report;
pub mod sim;
pub mod state;
pub mod year0;

pub use decision::{
    validate_decisions, AdjustmentNote, DecisionError, DecisionField, DecisionVector, ValidatedDecisions,
};
pub use engine::{step_month, EconomicFlows};
pub use kpi::KpiBlock;
pub use ledger::{build_statements, check_identities, IdentityViolation, Statements};
pub use market::{CompetitorScript, MarketCalendar, MarketOutcome, MONTHS};
pub use money::Money;
pub use params::SimParams;
pub use report::MonthlyReport;
pub use sim::{Scenario, SimError, SimState, Simulation};
pub use state::CompanyState;
