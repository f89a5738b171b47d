//! Shared domain types and the world-state container threaded through every
//! simulation step.
//!
//! `WorldState` is a plain value: cloning a snapshot is cheap at the scales
//! this simulator targets (tens of regions, tens of steps), and episodes own
//! their state exclusively, so there is no shared mutation anywhere.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

/// Per-region calibration: everything that stays fixed over an episode.
///
/// Growth and decline rates are annual; the step function applies them over
/// `years_per_step`. `labor_convergence` is the per-step exponent of the
/// logistic-style labor update and `emissions_initial` is only used for
/// ranking regions, never in the dynamics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionParams {
    pub name: String,
    pub tfp_initial: f64,
    pub tfp_growth_initial: f64,
    pub tfp_growth_decline: f64,
    pub capital_initial: f64,
    pub labor_initial: f64,
    pub labor_asymptote: f64,
    pub labor_convergence: f64,
    pub carbon_intensity_initial: f64,
    pub carbon_intensity_decline: f64,
    pub abatement_cost_coeff: f64,
    pub emissions_initial: f64,
}

impl RegionParams {
    /// Checks every calibration invariant, naming the offending field.
    pub fn validate(&self, region: usize) -> Result<()> {
        let nonneg: [(&'static str, f64); 8] = [
            ("tfp_initial", self.tfp_initial),
            ("tfp_growth_initial", self.tfp_growth_initial),
            ("tfp_growth_decline", self.tfp_growth_decline),
            ("capital_initial", self.capital_initial),
            ("labor_asymptote", self.labor_asymptote),
            ("labor_convergence", self.labor_convergence),
            ("carbon_intensity_initial", self.carbon_intensity_initial),
            ("emissions_initial", self.emissions_initial),
        ];
        for (field, value) in nonneg {
            if !value.is_finite() || value < 0.0 {
                return Err(self.param_error(region, field, value));
            }
        }
        if !self.labor_initial.is_finite() || self.labor_initial <= 0.0 {
            return Err(self.param_error(region, "labor_initial", self.labor_initial));
        }
        if !self.carbon_intensity_decline.is_finite() || self.carbon_intensity_decline > 0.0 {
            return Err(self.param_error(
                region,
                "carbon_intensity_decline",
                self.carbon_intensity_decline,
            ));
        }
        if !self.abatement_cost_coeff.is_finite()
            || !(0.0..=1.0).contains(&self.abatement_cost_coeff)
        {
            return Err(self.param_error(
                region,
                "abatement_cost_coeff",
                self.abatement_cost_coeff,
            ));
        }
        Ok(())
    }

    fn param_error(&self, region: usize, field: &'static str, value: f64) -> SimError {
        SimError::RegionParam {
            region,
            name: self.name.clone(),
            field,
            value,
        }
    }
}

/// Evolving per-region economic and policy variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionState {
    /// Capital stock, trillion USD.
    pub capital: f64,
    /// Labor, millions of people.
    pub labor: f64,
    /// Total factor productivity.
    pub tfp: f64,
    /// Emissions per unit of gross output absent mitigation, GtC per period.
    pub carbon_intensity: f64,
    pub saving_rate: f64,
    pub mitigation_rate: f64,
    pub export_cap: f64,
    /// 0 means "in no group".
    pub group_id: u32,
    /// Base tariff charged on imports from each partner; own entry unused.
    pub base_tariffs: Vec<f64>,
}

impl RegionState {
    fn from_params(params: &RegionParams, n: usize) -> Self {
        RegionState {
            capital: params.capital_initial,
            labor: params.labor_initial,
            tfp: params.tfp_initial,
            carbon_intensity: params.carbon_intensity_initial,
            saving_rate: 0.0,
            mitigation_rate: 0.0,
            export_cap: 0.0,
            group_id: 0,
            base_tariffs: vec![0.0; n],
        }
    }

    pub fn validate(&self, region: usize, max_group: u32) -> Result<()> {
        let err = |msg: String| Err(SimError::State(format!("region {region}: {msg}")));
        if !self.capital.is_finite() || self.capital < 0.0 {
            return err(format!("capital = {}", self.capital));
        }
        if !self.labor.is_finite() || self.labor <= 0.0 {
            return err(format!("labor = {}", self.labor));
        }
        if !self.tfp.is_finite() || self.tfp < 0.0 {
            return err(format!("tfp = {}", self.tfp));
        }
        if !self.carbon_intensity.is_finite() || self.carbon_intensity < 0.0 {
            return err(format!("carbon_intensity = {}", self.carbon_intensity));
        }
        for (field, v) in [
            ("saving_rate", self.saving_rate),
            ("mitigation_rate", self.mitigation_rate),
            ("export_cap", self.export_cap),
        ] {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return err(format!("{field} = {v} out of [0, 1]"));
            }
        }
        if self.group_id > max_group {
            return err(format!("group_id = {} out of [0, {max_group}]", self.group_id));
        }
        for (j, &t) in self.base_tariffs.iter().enumerate() {
            if !t.is_finite() || !(0.0..=1.0).contains(&t) {
                return err(format!("base_tariffs[{j}] = {t} out of [0, 1]"));
            }
        }
        Ok(())
    }
}

/// Global 3-reservoir carbon masses and 2-box temperatures.
///
/// Reservoir order is atmosphere, upper ocean, deep ocean; temperatures are
/// degrees C above preindustrial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClimateState {
    pub carbon_masses: [f64; 3],
    pub temp_atmosphere: f64,
    pub temp_ocean: f64,
}

pub const ATMOSPHERE: usize = 0;
pub const UPPER_OCEAN: usize = 1;
pub const DEEP_OCEAN: usize = 2;

impl ClimateState {
    /// 2015-style starting point used by the bundled calibration.
    pub fn default_start() -> Self {
        ClimateState {
            carbon_masses: [851.0, 460.0, 1740.0],
            temp_atmosphere: 0.85,
            temp_ocean: 0.0068,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (i, &m) in self.carbon_masses.iter().enumerate() {
            if !m.is_finite() || m <= 0.0 {
                return Err(SimError::Climate(format!("carbon mass {i} = {m}")));
            }
        }
        if !self.temp_atmosphere.is_finite() {
            return Err(SimError::Climate("atmospheric temperature not finite".into()));
        }
        if !self.temp_ocean.is_finite() {
            return Err(SimError::Climate("ocean temperature not finite".into()));
        }
        Ok(())
    }
}

/// Group membership plus the per-pair consecutive-co-membership counters that
/// drive member tariff decay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClubState {
    /// Group id per agent; 0 means no group.
    pub membership: Vec<u32>,
    /// `co_membership_steps[i][j]` counts consecutive completed steps during
    /// which i and j shared a nonzero group. Symmetric, diagonal unused and
    /// kept at 0, reset on any break in co-membership.
    pub co_membership_steps: Vec<Vec<u32>>,
}

impl ClubState {
    pub fn new(n: usize) -> Self {
        ClubState {
            membership: vec![0; n],
            co_membership_steps: vec![vec![0; n]; n],
        }
    }

    pub fn co_members(&self, agent: usize) -> Vec<usize> {
        let g = self.membership[agent];
        if g == 0 {
            return Vec::new();
        }
        self.membership
            .iter()
            .enumerate()
            .filter(|&(j, &gj)| j != agent && gj == g)
            .map(|(j, _)| j)
            .collect()
    }

    pub fn validate(&self, max_group: u32) -> Result<()> {
        let n = self.membership.len();
        if self.co_membership_steps.len() != n
            || self.co_membership_steps.iter().any(|row| row.len() != n)
        {
            return Err(SimError::State("co-membership matrix shape mismatch".into()));
        }
        for (i, &g) in self.membership.iter().enumerate() {
            if g > max_group {
                return Err(SimError::State(format!(
                    "membership[{i}] = {g} out of [0, {max_group}]"
                )));
            }
        }
        for i in 0..n {
            if self.co_membership_steps[i][i] != 0 {
                return Err(SimError::State(format!("co-membership diagonal set at {i}")));
            }
            for j in (i + 1)..n {
                let a = self.co_membership_steps[i][j];
                if a != self.co_membership_steps[j][i] {
                    return Err(SimError::State(format!(
                        "co-membership asymmetric at ({i}, {j})"
                    )));
                }
                // A positive counter implies the pair is co-members right now:
                // counters advance only while co-membership persists and reset
                // to zero the moment it breaks.
                let co_now =
                    self.membership[i] != 0 && self.membership[i] == self.membership[j];
                if a > 0 && !co_now {
                    return Err(SimError::State(format!(
                        "stale co-membership counter at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// One agent's full decision bundle for a step, as recorded in a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentAction {
    pub group_choice: u32,
    /// Requested mitigation rate per recipient.
    pub proposals: Vec<(usize, f64)>,
    /// Accept/reject per incoming proposal, keyed by proposer.
    pub evaluations: Vec<(usize, bool)>,
    pub saving_rate: f64,
    pub mitigation_rate: f64,
    pub export_cap: f64,
    pub base_tariffs: Vec<f64>,
}

/// Complete state of the simulated world between steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    /// Number of completed steps.
    pub step: usize,
    pub regions: Vec<RegionState>,
    pub climate: ClimateState,
    pub clubs: ClubState,
}

impl WorldState {
    pub fn region_count(&self) -> usize {
        self.regions.len()
    }

    /// Largest admissible group id: with N agents there can never be more
    /// than N nonempty groups, so ids live in `[0, N]`.
    pub fn max_group_id(&self) -> u32 {
        self.regions.len() as u32
    }

    /// Checks every type invariant on the snapshot.
    pub fn validate(&self) -> Result<()> {
        let max_group = self.max_group_id();
        for (i, r) in self.regions.iter().enumerate() {
            r.validate(i, max_group)?;
            if r.base_tariffs.len() != self.regions.len() {
                return Err(SimError::State(format!(
                    "region {i}: tariff vector length {} != {}",
                    r.base_tariffs.len(),
                    self.regions.len()
                )));
            }
        }
        self.climate.validate()?;
        self.clubs.validate(max_group)?;
        if self.clubs.membership.len() != self.regions.len() {
            return Err(SimError::State("membership length mismatch".into()));
        }
        for (i, r) in self.regions.iter().enumerate() {
            if r.group_id != self.clubs.membership[i] {
                return Err(SimError::State(format!(
                    "region {i} group_id {} disagrees with membership {}",
                    r.group_id, self.clubs.membership[i]
                )));
            }
        }
        Ok(())
    }
}

/// Builds the initial world from validated calibration data.
///
/// All regions start out of any group with zeroed policy variables; scenario
/// initializers overwrite the group assignment afterwards. Invalid
/// calibration values are rejected with the offending region and field named.
pub fn new_world(params: &[RegionParams], climate_init: ClimateState) -> Result<WorldState> {
    if params.is_empty() {
        return Err(SimError::Config("at least one region is required".into()));
    }
    for (i, p) in params.iter().enumerate() {
        p.validate(i)?;
    }
    climate_init.validate()?;
    let n = params.len();
    let world = WorldState {
        step: 0,
        regions: params.iter().map(|p| RegionState::from_params(p, n)).collect(),
        climate: climate_init,
        clubs: ClubState::new(n),
    };
    world.validate()?;
    Ok(world)
}
