//! Plays back a transcribed decision table.

use retail_sim_core::DecisionVector;

use super::{Agent, AgentError, AgentReply, DecisionContext};
use crate::fixtures::Fixture;

pub struct ReplayAgent {
    name: String,
    decisions: Vec<DecisionVector>,
}

impl ReplayAgent {
    pub fn new(name: &str, fixture: &Fixture) -> Result<Self, AgentError> {
        Ok(ReplayAgent { name: name.to_string(), decisions: fixture.decisions()? })
    }

    pub fn from_decisions(name: &str, decisions: Vec<DecisionVector>) -> Self {
        ReplayAgent { name: name.to_string(), decisions }
    }
}

impl Agent for ReplayAgent {
    fn name(&self) -> &str {
        &self.name
    }

    fn decide(&mut self, ctx: &DecisionContext<'_>) -> Result<AgentReply, AgentError> {
        let row = self.decisions.get(ctx.month as usize - 1).cloned();
        Ok(match row {
            Some(d) => AgentReply::decided(d),
            None => AgentReply { decision: None, attempts: 1, ..Default::default() },
        })
    }
}
