//! RICE/DICE-style climate-economy dynamics: production, damages, abatement,
//! emissions, carbon cycle, temperature, exogenous trends, trade and per-step
//! welfare.
//!
//! Every function here is a pure map from inputs to outputs; the harness owns
//! sequencing. Economic flows are per-period quantities, capital stocks are
//! levels, and all growth/depreciation rates are annual and scaled by the
//! step length where the recursions call for it.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::state::{RegionParams, ATMOSPHERE};

/// Floor applied when a consumption value would otherwise be non-positive
/// before entering the utility function.
pub const CONSUMPTION_FLOOR: f64 = 1e-6;

/// Global dynamics constants. Defaults follow a DICE-2016-style
/// parameterization on a 5-year step; everything is overridable via config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DynamicsParams {
    /// Cobb-Douglas capital elasticity (gamma).
    pub capital_elasticity: f64,
    /// Capital depreciation per year.
    pub capital_depreciation: f64,
    /// Quadratic damage coefficient per degree C squared (a2).
    pub damage_coeff: f64,
    /// Abatement cost exponent (theta2).
    pub abatement_exponent: f64,
    /// Carbon transfer matrix, `transfer[to][from]`; each column sums to 1 so
    /// mass is conserved under zero emissions.
    pub carbon_transfer: [[f64; 3]; 3],
    /// Preindustrial atmospheric carbon, GtC.
    pub preindustrial_carbon: f64,
    /// Radiative forcing per CO2 doubling, W/m^2 (eta).
    pub forcing_per_doubling: f64,
    /// Climate feedback, W/m^2 per degree C (lambda).
    pub climate_feedback: f64,
    /// Atmospheric box adjustment speed (xi1).
    pub temp_coeff_atmosphere: f64,
    /// Atmosphere-ocean exchange coefficient (xi2).
    pub temp_coeff_exchange: f64,
    /// Deep-ocean uptake coefficient (xi3).
    pub temp_coeff_ocean: f64,
    /// Exogenous (non-CO2) forcing ramp: start level, end level, and the
    /// number of steps over which it ramps linearly before holding.
    pub forcing_exogenous_initial: f64,
    pub forcing_exogenous_final: f64,
    pub forcing_exogenous_ramp_steps: u32,
    /// Land-use emissions, GtC per period, decaying geometrically.
    pub land_emissions_initial: f64,
    pub land_emissions_decline: f64,
    /// Elasticity of marginal utility of consumption (alpha).
    pub utility_elasticity: f64,
}

impl Default for DynamicsParams {
    fn default() -> Self {
        let b12 = 0.12;
        let b23 = 0.007;
        let b21 = b12 * 588.0 / 360.0;
        let b32 = b23 * 360.0 / 1720.0;
        DynamicsParams {
            capital_elasticity: 0.3,
            capital_depreciation: 0.1,
            damage_coeff: 0.00236,
            abatement_exponent: 2.6,
            carbon_transfer: [
                [1.0 - b12, b21, 0.0],
                [b12, 1.0 - b21 - b23, b32],
                [0.0, b23, 1.0 - b32],
            ],
            preindustrial_carbon: 588.0,
            forcing_per_doubling: 3.6813,
            climate_feedback: 1.1875,
            temp_coeff_atmosphere: 0.1005,
            temp_coeff_exchange: 0.088,
            temp_coeff_ocean: 0.025,
            forcing_exogenous_initial: 0.5,
            forcing_exogenous_final: 1.0,
            forcing_exogenous_ramp_steps: 17,
            land_emissions_initial: 3.55,
            land_emissions_decline: 0.115,
            utility_elasticity: 1.45,
        }
    }
}

impl DynamicsParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.capital_elasticity && self.capital_elasticity < 1.0) {
            return Err(SimError::Config(format!(
                "capital_elasticity = {} must lie in (0, 1)",
                self.capital_elasticity
            )));
        }
        if self.climate_feedback <= 0.0 {
            return Err(SimError::Config("climate_feedback must be positive".into()));
        }
        if self.abatement_exponent <= 1.0 {
            return Err(SimError::Config("abatement_exponent must exceed 1".into()));
        }
        if self.preindustrial_carbon <= 0.0 {
            return Err(SimError::Config("preindustrial_carbon must be positive".into()));
        }
        if self.utility_elasticity == 1.0 {
            return Err(SimError::Config("utility_elasticity must not equal 1".into()));
        }
        validate_transfer(&self.carbon_transfer)?;
        Ok(())
    }

    /// Exogenous forcing at step `t`: linear ramp, then constant.
    pub fn exogenous_forcing(&self, step: usize) -> f64 {
        let ramp = self.forcing_exogenous_ramp_steps.max(1) as f64;
        let frac = (step as f64 / ramp).min(1.0);
        self.forcing_exogenous_initial
            + (self.forcing_exogenous_final - self.forcing_exogenous_initial) * frac
    }

    /// Land-use emissions at step `t`, GtC per period.
    pub fn land_emissions(&self, step: usize) -> f64 {
        self.land_emissions_initial * (1.0 - self.land_emissions_decline).powi(step as i32)
    }
}

fn validate_transfer(transfer: &[[f64; 3]; 3]) -> Result<()> {
    for col in 0..3 {
        let sum: f64 = (0..3).map(|row| transfer[row][col]).sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(SimError::TransferMatrix { column: col, sum });
        }
    }
    Ok(())
}

/// Cobb-Douglas gross output Y = A * K^gamma * L^(1-gamma).
pub fn gross_output(tfp: f64, capital: f64, labor: f64, elasticity: f64) -> f64 {
    tfp * capital.powf(elasticity) * labor.powf(1.0 - elasticity)
}

/// Net output after climate damages and abatement spending:
/// Q = Y * (1 - a2 * T^2) * (1 - theta1 * mu^theta2).
///
/// The damage fraction is clamped to [0, 1], so negative temperatures cause
/// no damage and Q never leaves [0, Y].
pub fn net_output(
    gross: f64,
    temp_atmosphere: f64,
    mitigation: f64,
    damage_coeff: f64,
    abatement_cost_coeff: f64,
    abatement_exponent: f64,
) -> f64 {
    let damage = if temp_atmosphere <= 0.0 {
        0.0
    } else {
        (damage_coeff * temp_atmosphere * temp_atmosphere).clamp(0.0, 1.0)
    };
    let abatement = abatement_cost_coeff * mitigation.powf(abatement_exponent);
    gross * (1.0 - damage) * (1.0 - abatement)
}

/// Industrial emissions E = sigma * (1 - mu) * Y, GtC per period.
pub fn emissions(carbon_intensity: f64, mitigation: f64, gross: f64) -> f64 {
    carbon_intensity * (1.0 - mitigation) * gross
}

/// One carbon-cycle step: M' = Phi * M with injected emissions added to the
/// atmospheric reservoir. Rejects transfer matrices whose columns do not sum
/// to 1 within 1e-12, which is what guarantees mass conservation.
pub fn carbon_cycle_step(
    masses: [f64; 3],
    injected: f64,
    transfer: &[[f64; 3]; 3],
) -> Result<[f64; 3]> {
    validate_transfer(transfer)?;
    let mut next = [0.0; 3];
    for (row, out) in next.iter_mut().enumerate() {
        *out = (0..3).map(|col| transfer[row][col] * masses[col]).sum();
    }
    next[ATMOSPHERE] += injected;
    Ok(next)
}

/// One 2-box temperature step.
///
/// F = eta * log2(M_AT / M_pre) + F_ex(t)
/// T_AT' = T_AT + xi1 * (F - lambda * T_AT - xi2 * (T_AT - T_LO))
/// T_LO' = T_LO + xi3 * (T_AT - T_LO)
///
/// The fixed point sits at F = lambda * T_AT with T_AT = T_LO.
pub fn temperature_step(
    temp_atmosphere: f64,
    temp_ocean: f64,
    atmospheric_carbon: f64,
    params: &DynamicsParams,
    step: usize,
) -> (f64, f64) {
    let forcing = params.forcing_per_doubling
        * (atmospheric_carbon / params.preindustrial_carbon).log2()
        + params.exogenous_forcing(step);
    let next_at = temp_atmosphere
        + params.temp_coeff_atmosphere
            * (forcing
                - params.climate_feedback * temp_atmosphere
                - params.temp_coeff_exchange * (temp_atmosphere - temp_ocean));
    let next_lo = temp_ocean + params.temp_coeff_ocean * (temp_atmosphere - temp_ocean);
    (next_at, next_lo)
}

/// Exogenous trends over one step: productivity growth with declining rate,
/// geometric carbon-intensity decline, and labor converging to its asymptote.
///
/// A' = A * exp(g_A * delta), g_A = g0 * exp(-d_g * years_elapsed)
/// sigma' = sigma * exp(g_sigma * delta)
/// L' = L * (L_inf / L)^convergence
pub fn exogenous_step(
    tfp: f64,
    carbon_intensity: f64,
    labor: f64,
    params: &RegionParams,
    years_elapsed: f64,
    years_per_step: f64,
) -> (f64, f64, f64) {
    let growth =
        params.tfp_growth_initial * (-params.tfp_growth_decline * years_elapsed).exp();
    let next_tfp = tfp * (growth * years_per_step).exp();
    let next_intensity =
        carbon_intensity * (params.carbon_intensity_decline * years_per_step).exp();
    let next_labor = labor * (params.labor_asymptote / labor).powf(params.labor_convergence);
    (next_tfp, next_intensity, next_labor)
}

/// Capital recursion K' = K * (1 - delta_K)^delta + delta * s * Q.
pub fn capital_step(
    capital: f64,
    saving_rate: f64,
    net: f64,
    depreciation_per_year: f64,
    years_per_step: f64,
) -> f64 {
    capital * (1.0 - depreciation_per_year).powf(years_per_step)
        + years_per_step * saving_rate * net
}

/// Goods shipped, tariff revenue collected and post-tariff imports for one
/// settled trading round.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeOutcome {
    /// `flows[i][j]`: goods shipped from exporter j to importer i.
    pub flows: Vec<Vec<f64>>,
    /// Tariff revenue collected by each importer.
    pub tariff_revenue: Vec<f64>,
    /// Post-tariff goods received by each importer.
    pub effective_imports: Vec<f64>,
    /// Goods shipped out by each exporter.
    pub shipped: Vec<f64>,
}

/// Settles all bilateral trade for a step.
///
/// Each exporter j can ship at most its export budget `x_j * Q_j`. When bids
/// on an exporter exceed the budget, every bid is scaled down by the same
/// factor; infeasible bids are never rejected outright. Of each shipped flow,
/// the importer receives `(1 - tau)` as goods and collects `tau` as tariff
/// revenue.
pub fn settle_trade(
    net_outputs: &[f64],
    export_caps: &[f64],
    import_bids: &[Vec<f64>],
    tariffs: &[Vec<f64>],
) -> TradeOutcome {
    let n = net_outputs.len();
    let mut flows = vec![vec![0.0; n]; n];
    let mut shipped = vec![0.0; n];
    for exporter in 0..n {
        let budget = export_caps[exporter] * net_outputs[exporter];
        let total_bids: f64 = (0..n)
            .filter(|&i| i != exporter)
            .map(|i| import_bids[i][exporter])
            .sum();
        if total_bids <= 0.0 || budget <= 0.0 {
            continue;
        }
        let scale = if total_bids > budget { budget / total_bids } else { 1.0 };
        // Sequential trim against the remaining headroom, with the running
        // total clamped at the budget: the scaling alone can land an ulp
        // above the budget after rounding, and the bound is exact, not
        // approximate.
        let mut acc: f64 = 0.0;
        for importer in 0..n {
            if importer == exporter {
                continue;
            }
            let headroom = (budget - acc).max(0.0);
            let flow = (import_bids[importer][exporter] * scale).min(headroom);
            flows[importer][exporter] = flow;
            acc = (acc + flow).min(budget);
        }
        shipped[exporter] = acc;
    }

    let mut tariff_revenue = vec![0.0; n];
    let mut effective_imports = vec![0.0; n];
    for importer in 0..n {
        for exporter in 0..n {
            let flow = flows[importer][exporter];
            if flow == 0.0 {
                continue;
            }
            let tau = tariffs[importer][exporter];
            tariff_revenue[importer] += tau * flow;
            effective_imports[importer] += (1.0 - tau) * flow;
        }
    }
    TradeOutcome {
        flows,
        tariff_revenue,
        effective_imports,
        shipped,
    }
}

/// Isoelastic per-step welfare U = L * ((C/L)^(1-alpha) - 1) / (1-alpha).
///
/// Non-positive consumption is clamped to [`CONSUMPTION_FLOOR`]; the returned
/// flag reports whether the clamp fired so the harness can record it.
pub fn step_reward(consumption: f64, labor: f64, elasticity: f64) -> (f64, bool) {
    let clamped = consumption <= 0.0;
    let c = if clamped { CONSUMPTION_FLOOR } else { consumption };
    let per_capita = c / labor;
    let u = labor * (per_capita.powf(1.0 - elasticity) - 1.0) / (1.0 - elasticity);
    (u, clamped)
}
