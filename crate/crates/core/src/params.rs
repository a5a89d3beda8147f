//! Economic constants and model coefficients.
//!
//! Defaults are the retailer's starting parameters; model coefficients for the
//! demand, workforce, environment and share-price rules are calibrated so that
//! a replay of the reference year reproduces its published statements.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimParams {
    pub wholesale_price: f64,
    pub initial_price: f64,
    pub monthly_wage: f64,
    pub sa_wage_ratio: f64,
    pub absenteeism: f64,
    pub base_attrition: f64,
    pub hiring_cost: f64,
    pub dismissal_cost: f64,
    pub pension_reserve_rate: f64,
    pub buildings_value: f64,
    pub buildings_depr_rate: f64,
    pub equipment_value: f64,
    pub equipment_depr_rate: f64,
    pub order_setup_cost: f64,
    pub freight_var_cost: f64,
    pub maintenance_per_unit: f64,
    pub interest_rate: f64,
    pub tax_rate: f64,
    pub dividend_default_rate: f64,
    pub co2_per_unit: f64,
    pub co2_fixed: f64,
    pub shares_outstanding: u64,
    pub share_face_value: f64,
    pub initial_workers: f64,
    pub hours_per_worker: f64,
    pub max_productivity: f64,
    pub lead_time: u32,
    pub stockout_penalty: f64,
    pub fixed_overhead: f64,
    pub storage_cost_per_unit: f64,
    pub intangibles: f64,
    pub initial_long_term_debt: f64,
    pub receivable_lag: u32,
    pub initial_cash: f64,
    pub initial_inventory_units: u64,
    pub initial_provisions: f64,
    pub paid_in_capital: f64,
    pub accounts_payable: f64,
    pub initial_env_index: f64,
    pub model: ModelCoefficients,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            wholesale_price: 70.0,
            initial_price: 100.0,
            monthly_wage: 2000.0,
            sa_wage_ratio: 0.20,
            absenteeism: 0.02,
            base_attrition: 0.03,
            hiring_cost: 2000.0,
            dismissal_cost: 4000.0,
            pension_reserve_rate: 0.05,
            buildings_value: 1_000_000.0,
            buildings_depr_rate: 0.002,
            equipment_value: 500_000.0,
            equipment_depr_rate: 0.01,
            order_setup_cost: 25_000.0,
            freight_var_cost: 2.0,
            maintenance_per_unit: 0.1,
            interest_rate: 0.05,
            tax_rate: 0.20,
            dividend_default_rate: 0.40,
            co2_per_unit: 0.01,
            co2_fixed: 10.0,
            shares_outstanding: 26_480,
            share_face_value: 100.0,
            initial_workers: 10.0,
            hours_per_worker: 140.0,
            max_productivity: 10.0,
            lead_time: 2,
            stockout_penalty: 5.0,
            fixed_overhead: 51_000.0,
            storage_cost_per_unit: 0.0,
            intangibles: 100_000.0,
            initial_long_term_debt: 100_000.0,
            receivable_lag: 1,
            initial_cash: 1_001_000.0,
            initial_inventory_units: 5_000,
            initial_provisions: 1_000.0,
            paid_in_capital: 2_848_000.0,
            accounts_payable: 2_000.0,
            initial_env_index: 100.0,
            model: ModelCoefficients::default(),
        }
    }
}

/// Coefficients of the behavioural rules that are not directly observable in
/// the published statements.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelCoefficients {
    /// Extra monthly attrition of an untrained workforce on top of `base_attrition`.
    pub untrained_attrition_extra: f64,
    /// Training spend that halves the extra attrition.
    pub attrition_training_half: f64,
    /// Monthly productivity drift without investment.
    pub productivity_decay: f64,
    pub training_productivity_gain: f64,
    pub training_productivity_scale: f64,
    pub rnd_productivity_gain: f64,
    pub rnd_productivity_scale: f64,
    /// Demand elasticity to GDP growth (γ).
    pub gdp_elasticity: f64,
    /// GDP growth (percent) at which the GDP multiplier is neutral.
    pub gdp_reference: f64,
    /// Industry demand response to total marketing (α).
    pub marketing_effect: f64,
    /// Marketing spend scale (M0).
    pub marketing_scale: f64,
    /// Logit price sensitivity (λ).
    pub price_sensitivity: f64,
    /// Logit marketing pull (μ).
    pub marketing_pull: f64,
    /// Logit environmental-index pull (ν).
    pub env_pull: f64,
    /// Environmental-index speed (κ).
    pub env_speed: f64,
    /// Carbon tons per month at which the index is stationary.
    pub env_reference_tons: f64,
    /// Largest monthly move of the index.
    pub env_max_step: f64,
    pub share_price_roi_weight: f64,
    pub share_price_env_weight: f64,
    pub share_price_gdp_weight: f64,
    pub share_price_growth_weight: f64,
}

impl Default for ModelCoefficients {
    fn default() -> Self {
        ModelCoefficients {
            untrained_attrition_extra: 0.03,
            attrition_training_half: 5_000.0,
            productivity_decay: 0.01,
            training_productivity_gain: 0.015,
            training_productivity_scale: 5_000.0,
            rnd_productivity_gain: 0.005,
            rnd_productivity_scale: 5_000.0,
            gdp_elasticity: 2.0,
            gdp_reference: 4.0,
            marketing_effect: 0.05,
            marketing_scale: 10_000.0,
            price_sensitivity: 0.05,
            marketing_pull: 0.15,
            env_pull: 0.1,
            env_speed: 0.15,
            env_reference_tons: 45.0,
            env_max_step: 0.25,
            share_price_roi_weight: 4.0,
            share_price_env_weight: 1.0,
            share_price_gdp_weight: 1.0,
            share_price_growth_weight: 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParamViolation {
    pub field: &'static str,
    pub problem: String,
}

impl SimParams {
    /// Units per month the initial workforce could handle at full productivity.
    pub fn max_capacity(&self) -> f64 {
        self.initial_workers * self.hours_per_worker * self.max_productivity
    }

    /// Checks every documented domain constraint; an empty list means the
    /// parameter set is legal.
    pub fn violations(&self) -> Vec<ParamViolation> {
        use alloc::format;
        let mut out = Vec::new();
        let currency: [(&'static str, f64); 21] = [
            ("wholesale_price", self.wholesale_price),
            ("initial_price", self.initial_price),
            ("monthly_wage", self.monthly_wage),
            ("hiring_cost", self.hiring_cost),
            ("dismissal_cost", self.dismissal_cost),
            ("buildings_value", self.buildings_value),
            ("equipment_value", self.equipment_value),
            ("order_setup_cost", self.order_setup_cost),
            ("freight_var_cost", self.freight_var_cost),
            ("maintenance_per_unit", self.maintenance_per_unit),
            ("share_face_value", self.share_face_value),
            ("stockout_penalty", self.stockout_penalty),
            ("fixed_overhead", self.fixed_overhead),
            ("storage_cost_per_unit", self.storage_cost_per_unit),
            ("intangibles", self.intangibles),
            ("initial_long_term_debt", self.initial_long_term_debt),
            ("initial_provisions", self.initial_provisions),
            ("paid_in_capital", self.paid_in_capital),
            ("accounts_payable", self.accounts_payable),
            ("co2_per_unit", self.co2_per_unit),
            ("co2_fixed", self.co2_fixed),
        ];
        for (field, value) in currency {
            if !value.is_finite() || value < 0.0 {
                out.push(ParamViolation { field, problem: format!("must be finite and >= 0, got {value}") });
            }
        }
        let rates: [(&'static str, f64); 9] = [
            ("sa_wage_ratio", self.sa_wage_ratio),
            ("absenteeism", self.absenteeism),
            ("base_attrition", self.base_attrition),
            ("pension_reserve_rate", self.pension_reserve_rate),
            ("buildings_depr_rate", self.buildings_depr_rate),
            ("equipment_depr_rate", self.equipment_depr_rate),
            ("interest_rate", self.interest_rate),
            ("tax_rate", self.tax_rate),
            ("dividend_default_rate", self.dividend_default_rate),
        ];
        for (field, value) in rates {
            if !(0.0..=1.0).contains(&value) {
                out.push(ParamViolation { field, problem: format!("rate must lie in [0, 1], got {value}") });
            }
        }
        if self.base_attrition + self.model.untrained_attrition_extra > 1.0 {
            out.push(ParamViolation {
                field: "model.untrained_attrition_extra",
                problem: "attrition at zero training exceeds 1".into(),
            });
        }
        if self.lead_time < 1 {
            out.push(ParamViolation { field: "lead_time", problem: "must be >= 1".into() });
        }
        if self.max_productivity.is_nan() || self.max_productivity <= 0.0 {
            out.push(ParamViolation { field: "max_productivity", problem: "must be > 0".into() });
        }
        if self.hours_per_worker.is_nan()
            || self.hours_per_worker < 0.0
            || self.initial_workers.is_nan()
            || self.initial_workers < 0.0
        {
            out.push(ParamViolation { field: "hours_per_worker", problem: "workforce figures must be >= 0".into() });
        }
        if self.receivable_lag > 1 {
            out.push(ParamViolation {
                field: "receivable_lag",
                problem: "only 0 or 1 month of credit is modelled".into(),
            });
        }
        if self.shares_outstanding == 0 {
            out.push(ParamViolation { field: "shares_outstanding", problem: "must be > 0".into() });
        }
        if !self.initial_cash.is_finite() {
            out.push(ParamViolation { field: "initial_cash", problem: "must be finite".into() });
        }
        let m = &self.model;
        let positive: [(&'static str, f64); 6] = [
            ("model.attrition_training_half", m.attrition_training_half),
            ("model.training_productivity_scale", m.training_productivity_scale),
            ("model.rnd_productivity_scale", m.rnd_productivity_scale),
            ("model.marketing_scale", m.marketing_scale),
            ("model.env_reference_tons", m.env_reference_tons),
            ("initial_env_index", self.initial_env_index),
        ];
        for (field, value) in positive {
            if value <= 0.0 || !value.is_finite() {
                out.push(ParamViolation { field, problem: format!("must be > 0, got {value}") });
            }
        }
        out
    }
}
