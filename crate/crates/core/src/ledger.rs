//! Monthly income statement, balance sheet and indirect-method cash flow.

use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::EconomicFlows;
use crate::money::Money;
use crate::params::SimParams;
use crate::state::CompanyState;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IncomeStatement {
    pub revenue: Money,
    pub materials_expense: Money,
    pub staff_costs: Money,
    pub depreciation: Money,
    pub other_opex: Money,
    pub total_costs: Money,
    pub operating_income: Money,
    pub interest: Money,
    pub profit_before_tax: Money,
    pub tax: Money,
    pub net_income: Money,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BalanceSheet {
    pub cash: Money,
    pub receivables: Money,
    pub inventory_units: u64,
    pub inventory_unit_cost: Money,
    pub inventory_value: Money,
    pub total_current_assets: Money,
    pub buildings_gross: Money,
    pub buildings_accumulated_depr: Money,
    pub equipment_gross: Money,
    pub equipment_accumulated_depr: Money,
    pub intangibles: Money,
    pub total_assets: Money,
    pub accounts_payable: Money,
    pub long_term_debt: Money,
    pub provisions: Money,
    pub total_liabilities: Money,
    pub paid_in_capital: Money,
    pub retained_earnings: Money,
    pub total_equity: Money,
    pub total_liabilities_and_equity: Money,
}

/// Working-capital lines carry their cash effect: a falling inventory shows
/// as a positive `inventory_change`, rising receivables as a negative
/// `receivables_change`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CashFlowStatement {
    pub net_income: Money,
    pub depreciation_addback: Money,
    pub inventory_change: Money,
    pub provisions_change: Money,
    pub receivables_change: Money,
    pub payables_change: Money,
    pub loans: Money,
    pub investing: Money,
    pub dividends: Money,
    pub net_cash_change: Money,
    pub cash_begin: Money,
    pub cash_end: Money,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetainedEarningsRoll {
    pub begin: Money,
    pub net_income: Money,
    pub dividends: Money,
    pub end: Money,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Statements {
    pub income: IncomeStatement,
    pub balance: BalanceSheet,
    pub cash_flow: CashFlowStatement,
    pub retained_earnings: RetainedEarningsRoll,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Identity {
    IncomeStatement,
    BalanceSheet,
    CashTieOut,
    RetainedEarnings,
    InventoryValuation,
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Identity::IncomeStatement => "income statement arithmetic",
            Identity::BalanceSheet => "balance sheet",
            Identity::CashTieOut => "cash tie-out",
            Identity::RetainedEarnings => "retained earnings roll-forward",
            Identity::InventoryValuation => "inventory valuation",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityViolation {
    pub identity: Identity,
    pub magnitude: Money,
}

impl fmt::Display for IdentityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} off by {}", self.identity, self.magnitude)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum LedgerError {
    #[error("month {month}: accounting identities violated: {violations:?}")]
    IdentityViolated { month: u32, violations: Vec<IdentityViolation> },
}

/// Identity tolerance: one cent.
pub const TOLERANCE: Money = Money::from_cents(1);

pub fn build_statements(prev: &CompanyState, flows: &EconomicFlows, p: &SimParams) -> Result<Statements, LedgerError> {
    let income = IncomeStatement {
        revenue: flows.revenue,
        materials_expense: flows.materials_expense,
        staff_costs: flows.staff_costs,
        depreciation: flows.depreciation,
        other_opex: flows.other_opex,
        total_costs: flows.total_costs,
        operating_income: flows.operating_income,
        interest: flows.interest,
        profit_before_tax: flows.profit_before_tax,
        tax: flows.tax,
        net_income: flows.net_income,
    };

    let unit_cost = Money::from_f64(p.wholesale_price);
    let inventory_begin = unit_cost.times_units(prev.inventory_units);
    let inventory_value = unit_cost.times_units(flows.closing_inventory_units);
    let receivables = if p.receivable_lag > 0 { flows.revenue } else { Money::ZERO };

    let cf_inventory = inventory_begin - inventory_value;
    let cf_receivables = prev.receivables - receivables;
    let net_cash_change = flows.net_income
        + flows.depreciation
        + cf_inventory
        + flows.pension_accrual
        + cf_receivables
        + flows.loan_inflow
        - flows.dividends;
    let cash_end = prev.cash + net_cash_change;
    let cash_flow = CashFlowStatement {
        net_income: flows.net_income,
        depreciation_addback: flows.depreciation,
        inventory_change: cf_inventory,
        provisions_change: flows.pension_accrual,
        receivables_change: cf_receivables,
        payables_change: Money::ZERO,
        loans: flows.loan_inflow,
        investing: Money::ZERO,
        dividends: flows.dividends,
        net_cash_change,
        cash_begin: prev.cash,
        cash_end,
    };

    let retained = RetainedEarningsRoll {
        begin: prev.retained_earnings,
        net_income: flows.net_income,
        dividends: flows.dividends,
        end: prev.retained_earnings + flows.net_income - flows.dividends,
    };

    let mut balance = BalanceSheet {
        cash: cash_end,
        receivables,
        inventory_units: flows.closing_inventory_units,
        inventory_unit_cost: unit_cost,
        inventory_value,
        buildings_gross: Money::from_f64(p.buildings_value),
        buildings_accumulated_depr: prev.accumulated_depr_buildings + flows.depreciation_buildings,
        equipment_gross: Money::from_f64(p.equipment_value),
        equipment_accumulated_depr: prev.accumulated_depr_equipment + flows.depreciation_equipment,
        intangibles: Money::from_f64(p.intangibles),
        accounts_payable: Money::from_f64(p.accounts_payable),
        long_term_debt: prev.long_term_debt + flows.loan_inflow,
        provisions: prev.provisions + flows.pension_accrual,
        paid_in_capital: Money::from_f64(p.paid_in_capital),
        retained_earnings: retained.end,
        ..BalanceSheet::default()
    };
    balance.total_current_assets = current_assets(&balance);
    balance.total_assets = assets(&balance);
    balance.total_liabilities = liabilities(&balance);
    balance.total_equity = balance.paid_in_capital + balance.retained_earnings;
    balance.total_liabilities_and_equity = balance.total_liabilities + balance.total_equity;

    let statements = Statements { income, balance, cash_flow, retained_earnings: retained };
    let violations = check_identities(&statements);
    if violations.is_empty() {
        Ok(statements)
    } else {
        Err(LedgerError::IdentityViolated { month: flows.month, violations })
    }
}

fn current_assets(b: &BalanceSheet) -> Money {
    b.cash + b.receivables + b.inventory_value
}

fn assets(b: &BalanceSheet) -> Money {
    current_assets(b) + b.buildings_gross - b.buildings_accumulated_depr + b.equipment_gross
        - b.equipment_accumulated_depr
        + b.intangibles
}

fn liabilities(b: &BalanceSheet) -> Money {
    b.accounts_payable + b.long_term_debt + b.provisions
}

fn worst(diffs: &[Money]) -> Money {
    diffs.iter().map(|d| d.abs()).max().unwrap_or(Money::ZERO)
}

/// Re-derives every total and tie-out from the component lines. Returns one
/// entry per broken identity with the largest discrepancy found for it.
pub fn check_identities(st: &Statements) -> Vec<IdentityViolation> {
    let i = &st.income;
    let b = &st.balance;
    let c = &st.cash_flow;
    let r = &st.retained_earnings;

    let checks = [
        (
            Identity::IncomeStatement,
            worst(&[
                i.total_costs - (i.materials_expense + i.staff_costs + i.depreciation + i.other_opex),
                i.operating_income - (i.revenue - i.total_costs),
                i.profit_before_tax - (i.operating_income - i.interest),
                i.net_income - (i.profit_before_tax - i.tax),
            ]),
        ),
        (
            Identity::BalanceSheet,
            worst(&[
                b.total_current_assets - current_assets(b),
                b.total_assets - assets(b),
                b.total_liabilities - liabilities(b),
                b.total_equity - (b.paid_in_capital + b.retained_earnings),
                b.total_liabilities_and_equity - (b.total_liabilities + b.total_equity),
                b.total_assets - b.total_liabilities_and_equity,
            ]),
        ),
        (
            Identity::CashTieOut,
            worst(&[
                c.net_cash_change
                    - (c.net_income
                        + c.depreciation_addback
                        + c.inventory_change
                        + c.provisions_change
                        + c.receivables_change
                        + c.payables_change
                        + c.loans
                        + c.investing
                        - c.dividends),
                c.cash_end - (c.cash_begin + c.net_cash_change),
                c.cash_end - b.cash,
            ]),
        ),
        (
            Identity::RetainedEarnings,
            worst(&[r.end - (r.begin + r.net_income - r.dividends), r.end - b.retained_earnings]),
        ),
        (
            Identity::InventoryValuation,
            worst(&[b.inventory_value - b.inventory_unit_cost.times_units(b.inventory_units)]),
        ),
    ];
    checks
        .into_iter()
        .filter(|(_, magnitude)| *magnitude >= TOLERANCE)
        .map(|(identity, magnitude)| IdentityViolation { identity, magnitude })
        .collect()
}
