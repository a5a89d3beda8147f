use serde::{Deserialize, Serialize};

use crate::decision::{DecisionVector, ValidatedDecisions};
use crate::engine::EconomicFlows;
use crate::kpi::KpiBlock;
use crate::ledger::Statements;
use crate::market::MarketOutcome;

/// Everything produced by one simulated month for Retailer One.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonthlyReport {
    pub month: u32,
    pub submitted: DecisionVector,
    pub applied: ValidatedDecisions,
    pub competitor: DecisionVector,
    pub market: MarketOutcome,
    pub flows: EconomicFlows,
    pub statements: Statements,
    pub kpis: KpiBlock,
}
