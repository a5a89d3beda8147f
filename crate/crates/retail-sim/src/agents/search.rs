//! Simulator-in-the-loop hill climbing over the whole year's decisions.
//!
//! Starts from the heuristic's trajectory, perturbs one (month, field) cell at
//! a time and keeps the change when cumulative net income improves.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use retail_sim_core::sim::step;
use retail_sim_core::{DecisionField, DecisionVector, Money, MonthlyReport, Scenario, SimState, MONTHS};

use super::heuristic::heuristic_decision;
use super::{year0_block, Agent, AgentError, AgentReply, DecisionContext};

/// Fields the search may move. Forecasts do not affect profit.
const SEARCH_FIELDS: [DecisionField; 8] = [
    DecisionField::OrderUnits,
    DecisionField::Price,
    DecisionField::WorkersHired,
    DecisionField::WorkersDismissed,
    DecisionField::MarketingExpense,
    DecisionField::Loans,
    DecisionField::TrainingExpense,
    DecisionField::RndExpense,
];

/// Scale of an additive step for a field currently at zero.
fn zero_step(field: DecisionField) -> f64 {
    match field {
        DecisionField::OrderUnits => 1_000.0,
        DecisionField::Price => 10.0,
        DecisionField::WorkersHired | DecisionField::WorkersDismissed => 2.0,
        _ => 10_000.0,
    }
}

fn is_count(field: DecisionField) -> bool {
    matches!(field, DecisionField::OrderUnits | DecisionField::WorkersHired | DecisionField::WorkersDismissed)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchResult {
    pub decisions: Vec<DecisionVector>,
    /// Cumulative net income of `decisions`.
    pub score: Money,
    /// Best score after each evaluation; never decreases.
    pub curve: Vec<Money>,
}

/// Runs the heuristic closed loop and returns its decisions.
pub fn heuristic_plan(sc: &Scenario) -> Result<Vec<DecisionVector>, AgentError> {
    let mut state = SimState::opening(&sc.params);
    let mut history: Vec<MonthlyReport> = Vec::new();
    let mut plan = Vec::with_capacity(MONTHS);
    for month in 1..=MONTHS as u32 {
        let ctx = DecisionContext { month, scenario: sc, year0: year0_block(), history: &history, state: &state };
        let d = heuristic_decision(&ctx);
        let (next, report) = step(&state, &d, sc).map_err(|e| AgentError::Search(e.to_string()))?;
        plan.push(d);
        history.push(report);
        state = next;
    }
    Ok(plan)
}

/// Cumulative net income of an open-loop plan; `None` if the engine rejects it.
pub fn evaluate(plan: &[DecisionVector], sc: &Scenario) -> Option<Money> {
    let mut state = SimState::opening(&sc.params);
    let mut total = Money::ZERO;
    for d in plan {
        let (next, report) = step(&state, d, sc).ok()?;
        total += report.flows.net_income;
        state = next;
    }
    Some(total)
}

pub fn search_policy(sc: &Scenario, seed_plan: Vec<DecisionVector>, budget: u32, seed: u64) -> SearchResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = seed_plan;
    let mut score = evaluate(&best, sc).unwrap_or(Money::from_cents(i64::MIN / 2));
    let mut curve = vec![score];
    for _ in 1..budget {
        let month = rng.random_range(0..best.len());
        let field = SEARCH_FIELDS[rng.random_range(0..SEARCH_FIELDS.len())];
        let current = best[month].get(field);
        let mut proposal = if current == 0.0 || rng.random_bool(0.2) {
            current + rng.random_range(-1.0..1.0) * zero_step(field)
        } else {
            current * (1.0 + rng.random_range(-0.5..0.5))
        };
        proposal = proposal.max(0.0);
        if is_count(field) {
            proposal = proposal.round();
        } else {
            proposal = (proposal * 100.0).round() / 100.0;
        }
        if proposal != current {
            let mut candidate = best.clone();
            candidate[month].set(field, proposal);
            if let Some(s) = evaluate(&candidate, sc) {
                if s > score {
                    best = candidate;
                    score = s;
                }
            }
        }
        curve.push(score);
    }
    SearchResult { decisions: best, score, curve }
}

/// Plays the plan found by [`search_policy`], computed when the agent is built.
pub struct SearchAgent {
    name: String,
    result: SearchResult,
}

impl SearchAgent {
    pub fn new(name: &str, sc: &Scenario, budget: u32, seed: u64) -> Result<Self, AgentError> {
        let plan = heuristic_plan(sc)?;
        Ok(SearchAgent { name: name.to_string(), result: search_policy(sc, plan, budget, seed) })
    }

    pub fn result(&self) -> &SearchResult {
        &self.result
    }
}

impl Agent for SearchAgent {
    fn name(&self) -> &str {
        &self.name
    }

    fn decide(&mut self, ctx: &DecisionContext<'_>) -> Result<AgentReply, AgentError> {
        let d = self.result.decisions.get(ctx.month as usize - 1).cloned();
        Ok(AgentReply { decision: d, attempts: 1, ..Default::default() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use retail_sim_core::year0;

    #[test]
    fn budget_one_is_the_seed() {
        let sc = year0::default_scenario();
        let plan = heuristic_plan(&sc).unwrap();
        let r = search_policy(&sc, plan.clone(), 1, 7);
        assert_eq!(r.decisions, plan);
        assert_eq!(r.curve.len(), 1);
    }

    #[test]
    fn climbs_and_repeats() {
        let sc = year0::default_scenario();
        let plan = heuristic_plan(&sc).unwrap();
        let base = evaluate(&plan, &sc).unwrap();
        let a = search_policy(&sc, plan.clone(), 300, 11);
        let b = search_policy(&sc, plan, 300, 11);
        assert_eq!(a, b);
        assert!(a.score >= base);
        assert_eq!(a.curve.len(), 300);
        assert!(a.curve.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(evaluate(&a.decisions, &sc), Some(a.score));
    }
}
