//! Episode orchestration: the fixed per-step stage pipeline, seeded episode
//! runs, and batch experiments over (scenario, seed) pairs.
//!
//! A single episode is strictly sequential; batches are embarrassingly
//! parallel and run on rayon when the `parallel` feature (default) is on.
//! All per-agent loops iterate in ascending agent id, which together with the
//! seed derivation makes every output a pure function of (config, seed).

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::club::{
    apply_evaluations, collect_proposals, effective_tariff, resolve_group_choices,
    update_co_membership, ClubEvent,
};
use crate::config::{Scenario, SimConfig};
use crate::dynamics::{
    capital_step, carbon_cycle_step, emissions, exogenous_step, gross_output, net_output,
    settle_trade, step_reward, temperature_step,
};
use crate::error::{Result, SimError};
use crate::metrics::{metrics_row, MetricsRow};
use crate::policies::{clamp_action, Observation, Policy};
use crate::scenarios::{
    default_calibration, init_hc, init_hc_lc, load_calibration, rank_regions, ranked_ids,
};
use crate::state::{new_world, AgentAction, ClimateState, RegionParams, WorldState};

/// A protocol event annotated with when it happened.
#[derive(Debug, Clone, PartialEq)]
pub struct StampedDiagnostic {
    pub step: usize,
    pub stage: &'static str,
    pub message: String,
}

/// Everything produced while executing one step.
pub struct StepRecord {
    pub actions: Vec<AgentAction>,
    pub mitigation_floors: Vec<f64>,
    pub rewards: Vec<f64>,
    pub consumption: Vec<f64>,
    pub emissions_injected: f64,
    pub effective_tariffs: Vec<Vec<f64>>,
    pub diagnostics: Vec<StampedDiagnostic>,
}

/// Full record of one seeded run.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeTrajectory {
    pub scenario: Scenario,
    pub seed: u64,
    /// World snapshots, step 0 through the final step (steps + 1 entries).
    pub snapshots: Vec<WorldState>,
    pub metrics: Vec<MetricsRow>,
    pub actions: Vec<Vec<AgentAction>>,
    pub mitigation_floors: Vec<Vec<f64>>,
    pub rewards: Vec<Vec<f64>>,
    pub consumption: Vec<Vec<f64>>,
    pub emissions_injected: Vec<f64>,
    pub effective_tariffs: Vec<Vec<Vec<f64>>>,
    pub diagnostics: Vec<StampedDiagnostic>,
    pub policy_archetypes: Vec<&'static str>,
}

impl EpisodeTrajectory {
    pub fn final_groups(&self) -> &[u32] {
        &self.snapshots.last().unwrap().clubs.membership
    }

    pub fn final_temp_rise(&self) -> f64 {
        self.metrics.last().unwrap().temp_rise
    }

    /// Gross output summed over the executed steps (the final snapshot's
    /// capacity is never produced, so it is excluded).
    pub fn cumulative_gross_output(&self) -> f64 {
        let steps = self.metrics.len() - 1;
        self.metrics[..steps].iter().map(|m| m.total_gross_output).sum()
    }
}

/// Sub-seeds derived from the episode master seed: one for the scenario
/// initializer, one for the policy-map draw, one per agent.
fn derive_seeds(seed: u64, n: usize) -> (u64, u64, Vec<u64>) {
    let mut root = ChaCha8Rng::seed_from_u64(seed);
    let scenario_seed = root.next_u64();
    let assignment_seed = root.next_u64();
    let agent_seeds = (0..n).map(|_| root.next_u64()).collect();
    (scenario_seed, assignment_seed, agent_seeds)
}

fn stamp(step: usize, stage: &'static str, events: Vec<ClubEvent>) -> Vec<StampedDiagnostic> {
    events
        .into_iter()
        .map(|e| StampedDiagnostic { step, stage, message: e.to_string() })
        .collect()
}

/// Executes one step of the fixed stage pipeline:
/// group resolution, proposal collection, evaluation, clamped economic
/// actions with tariff composition, trade settlement, economy and climate
/// advancement, and co-membership counter update.
pub fn step_episode(
    world: &mut WorldState,
    policies: &mut [Box<dyn Policy>],
    region_params: &[RegionParams],
    cfg: &SimConfig,
) -> Result<StepRecord> {
    let n = world.region_count();
    let t = world.step;
    let max_group = world.max_group_id();
    let years_per_step = cfg.years_per_step as f64;
    let dyn_p = &cfg.dynamics;
    let mut diagnostics = Vec::new();

    // stage 1: group choices, resolved simultaneously
    let mut choices = vec![0u32; n];
    for (i, policy) in policies.iter_mut().enumerate() {
        let co = world.clubs.co_members(i);
        let obs = Observation {
            agent: i,
            step: t,
            region: &world.regions[i],
            membership: &world.clubs.membership,
            co_members: &co,
            bounds: &cfg.bounds,
            max_group_id: max_group,
        };
        choices[i] = policy.choose_group(&obs);
    }
    let (membership, events) = resolve_group_choices(&world.clubs.membership, &choices, max_group);
    diagnostics.extend(stamp(t, "resolve_groups", events));
    world.clubs.membership = membership;
    for (i, region) in world.regions.iter_mut().enumerate() {
        region.group_id = world.clubs.membership[i];
    }

    // stage 2: proposals under the resolved membership
    let mut raw_proposals: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
    for (i, policy) in policies.iter_mut().enumerate() {
        let co = world.clubs.co_members(i);
        let obs = Observation {
            agent: i,
            step: t,
            region: &world.regions[i],
            membership: &world.clubs.membership,
            co_members: &co,
            bounds: &cfg.bounds,
            max_group_id: max_group,
        };
        raw_proposals.push(policy.propose(&obs));
    }
    let (proposals, events) = collect_proposals(&world.clubs.membership, &raw_proposals);
    diagnostics.extend(stamp(t, "collect_proposals", events));

    // stage 3: evaluations become mitigation floors
    let mut evaluations: Vec<Vec<(usize, bool)>> = Vec::with_capacity(n);
    for (i, policy) in policies.iter_mut().enumerate() {
        let incoming: Vec<_> = proposals.iter().filter(|p| p.recipient == i).cloned().collect();
        let co = world.clubs.co_members(i);
        let obs = Observation {
            agent: i,
            step: t,
            region: &world.regions[i],
            membership: &world.clubs.membership,
            co_members: &co,
            bounds: &cfg.bounds,
            max_group_id: max_group,
        };
        evaluations.push(policy.evaluate(&obs, &incoming));
    }
    let (floors, events) = apply_evaluations(&proposals, &evaluations, n);
    diagnostics.extend(stamp(t, "apply_evaluations", events));

    // stage 4: clamped economic actions; floors bind realized mitigation
    let mut actions: Vec<AgentAction> = Vec::with_capacity(n);
    for (i, policy) in policies.iter_mut().enumerate() {
        let co = world.clubs.co_members(i);
        let obs = Observation {
            agent: i,
            step: t,
            region: &world.regions[i],
            membership: &world.clubs.membership,
            co_members: &co,
            bounds: &cfg.bounds,
            max_group_id: max_group,
        };
        let econ = policy.economic(&obs);
        let raw = AgentAction {
            group_choice: choices[i],
            proposals: raw_proposals[i].clone(),
            evaluations: evaluations[i].clone(),
            saving_rate: econ.saving_rate,
            mitigation_rate: econ.mitigation_rate,
            export_cap: econ.export_cap,
            base_tariffs: econ.base_tariffs,
        };
        actions.push(clamp_action(raw, &cfg.bounds));
    }
    for (i, action) in actions.iter().enumerate() {
        let region = &mut world.regions[i];
        region.saving_rate = action.saving_rate;
        region.mitigation_rate = action.mitigation_rate.max(floors[i]);
        region.export_cap = action.export_cap;
        region.base_tariffs = action.base_tariffs.clone();
    }

    // effective tariffs composed from club state; counters still reflect
    // completed steps, so fresh co-members start at the full member tariff
    let tariffs: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        0.0
                    } else {
                        effective_tariff(
                            i,
                            j,
                            world.regions[i].base_tariffs[j],
                            &world.clubs.membership,
                            &world.clubs.co_membership_steps,
                            &cfg.club,
                        )
                    }
                })
                .collect()
        })
        .collect();

    // stage 5: production and trade
    let elasticity = dyn_p.capital_elasticity;
    let gross: Vec<f64> = world
        .regions
        .iter()
        .map(|r| gross_output(r.tfp, r.capital, r.labor, elasticity))
        .collect();
    let net: Vec<f64> = world
        .regions
        .iter()
        .enumerate()
        .map(|(i, r)| {
            net_output(
                gross[i],
                world.climate.temp_atmosphere,
                r.mitigation_rate,
                dyn_p.damage_coeff,
                region_params[i].abatement_cost_coeff,
                dyn_p.abatement_exponent,
            )
        })
        .collect();
    let caps: Vec<f64> = world.regions.iter().map(|r| r.export_cap).collect();
    let budgets: Vec<f64> = (0..n).map(|j| caps[j] * net[j]).collect();
    let bids: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let demand = cfg.import_demand_share * net[i];
            let partner_total: f64 =
                (0..n).filter(|&k| k != i).map(|k| budgets[k]).sum();
            (0..n)
                .map(|j| {
                    if j == i || partner_total <= 0.0 {
                        0.0
                    } else {
                        demand * budgets[j] / partner_total
                    }
                })
                .collect()
        })
        .collect();
    let trade = settle_trade(&net, &caps, &bids, &tariffs);

    let mut rewards = Vec::with_capacity(n);
    let mut consumption = Vec::with_capacity(n);
    for i in 0..n {
        let region = &world.regions[i];
        let paid: f64 = trade.flows[i].iter().sum();
        let payments = trade.shipped[i];
        let c = net[i] - region.saving_rate * net[i] - trade.shipped[i] + payments - paid
            + trade.effective_imports[i]
            + trade.tariff_revenue[i];
        let (reward, clamped) = step_reward(c, region.labor, dyn_p.utility_elasticity);
        if clamped {
            diagnostics.push(StampedDiagnostic {
                step: t,
                stage: "reward",
                message: format!("agent {i}: consumption {c} clamped to floor"),
            });
        }
        consumption.push(c);
        rewards.push(reward);
    }

    // stage 6: climate and economy advance
    let industrial: f64 = (0..n)
        .map(|i| {
            emissions(
                world.regions[i].carbon_intensity,
                world.regions[i].mitigation_rate,
                gross[i],
            )
        })
        .sum();
    let injected = industrial + dyn_p.land_emissions(t);
    world.climate.carbon_masses =
        carbon_cycle_step(world.climate.carbon_masses, injected, &dyn_p.carbon_transfer)
            .map_err(|e| SimError::Stage { step: t, stage: "carbon_cycle", source: Box::new(e) })?;
    let (temp_at, temp_lo) = temperature_step(
        world.climate.temp_atmosphere,
        world.climate.temp_ocean,
        world.climate.carbon_masses[crate::state::ATMOSPHERE],
        dyn_p,
        t,
    );
    world.climate.temp_atmosphere = temp_at;
    world.climate.temp_ocean = temp_lo;
    let years_elapsed = t as f64 * years_per_step;
    for (i, region) in world.regions.iter_mut().enumerate() {
        region.capital = capital_step(
            region.capital,
            region.saving_rate,
            net[i],
            dyn_p.capital_depreciation,
            years_per_step,
        );
        let (tfp, intensity, labor) = exogenous_step(
            region.tfp,
            region.carbon_intensity,
            region.labor,
            &region_params[i],
            years_elapsed,
            years_per_step,
        );
        region.tfp = tfp;
        region.carbon_intensity = intensity;
        region.labor = labor;
    }

    // stage 7: co-membership counters advance over the completed step
    world.clubs.co_membership_steps =
        update_co_membership(&world.clubs.co_membership_steps, &world.clubs.membership);
    world.step += 1;
    world
        .validate()
        .map_err(|e| SimError::Stage { step: t, stage: "post_step_validate", source: Box::new(e) })?;

    Ok(StepRecord {
        actions,
        mitigation_floors: floors,
        rewards,
        consumption,
        emissions_injected: injected,
        effective_tariffs: tariffs,
        diagnostics,
    })
}

fn apply_scenario(
    world: &mut WorldState,
    scenario: Scenario,
    ranked: &[usize],
    scenario_seed: u64,
) -> Result<()> {
    let assignment = match scenario {
        Scenario::Hc => init_hc(ranked, scenario_seed)?,
        Scenario::HcLc => init_hc_lc(ranked)?,
        Scenario::None => vec![0; ranked.len()],
    };
    world.clubs.membership = assignment;
    for (i, region) in world.regions.iter_mut().enumerate() {
        region.group_id = world.clubs.membership[i];
    }
    Ok(())
}

/// Loads the calibration named by the config, or the bundled default.
pub fn load_configured_calibration(cfg: &SimConfig) -> Result<Vec<RegionParams>> {
    match &cfg.calibration {
        Some(path) => load_calibration(path),
        None => Ok(default_calibration()),
    }
}

/// Runs one seeded episode under the config's scenario.
pub fn run_episode(cfg: &SimConfig, seed: u64) -> Result<EpisodeTrajectory> {
    cfg.validate()?;
    let params = load_configured_calibration(cfg)?;
    run_episode_with(cfg, &params, cfg.scenario, seed)
}

/// Episode runner against preloaded calibration data; used by batches so the
/// file is read once.
pub fn run_episode_with(
    cfg: &SimConfig,
    params: &[RegionParams],
    scenario: Scenario,
    seed: u64,
) -> Result<EpisodeTrajectory> {
    let wrap = |e: SimError| SimError::Episode { scenario, seed, source: Box::new(e) };
    let n = params.len();
    let ranking = rank_regions(params, cfg.dynamics.capital_elasticity);
    let ranked = ranked_ids(&ranking);
    let top5: Vec<usize> = ranked.iter().take(5.min(n)).cloned().collect();

    let (scenario_seed, assignment_seed, agent_seeds) = derive_seeds(seed, n);
    let specs = cfg.policies.resolve(&ranked, n, assignment_seed).map_err(wrap)?;
    let mut policies: Vec<Box<dyn Policy>> = specs
        .iter()
        .zip(&agent_seeds)
        .map(|(spec, &s)| spec.build(s))
        .collect();

    let mut world = new_world(params, ClimateState::default_start()).map_err(wrap)?;
    apply_scenario(&mut world, scenario, &ranked, scenario_seed).map_err(wrap)?;
    world.validate().map_err(wrap)?;

    let initial_temp = world.climate.temp_atmosphere;
    let steps = cfg.steps as usize;
    let mut trajectory = EpisodeTrajectory {
        scenario,
        seed,
        snapshots: Vec::with_capacity(steps + 1),
        metrics: Vec::with_capacity(steps + 1),
        actions: Vec::with_capacity(steps),
        mitigation_floors: Vec::with_capacity(steps),
        rewards: Vec::with_capacity(steps),
        consumption: Vec::with_capacity(steps),
        emissions_injected: Vec::with_capacity(steps),
        effective_tariffs: Vec::with_capacity(steps),
        diagnostics: Vec::new(),
        policy_archetypes: specs.iter().map(|s| s.archetype_name()).collect(),
    };
    trajectory.snapshots.push(world.clone());
    trajectory.metrics.push(metrics_row(
        &world,
        cfg.dynamics.capital_elasticity,
        initial_temp,
        &top5,
        cfg.years_per_step,
    ));

    for _ in 0..steps {
        let record = step_episode(&mut world, &mut policies, params, cfg).map_err(wrap)?;
        trajectory.snapshots.push(world.clone());
        trajectory.metrics.push(metrics_row(
            &world,
            cfg.dynamics.capital_elasticity,
            initial_temp,
            &top5,
            cfg.years_per_step,
        ));
        trajectory.actions.push(record.actions);
        trajectory.mitigation_floors.push(record.mitigation_floors);
        trajectory.rewards.push(record.rewards);
        trajectory.consumption.push(record.consumption);
        trajectory.emissions_injected.push(record.emissions_injected);
        trajectory.effective_tariffs.push(record.effective_tariffs);
        trajectory.diagnostics.extend(record.diagnostics);
    }
    Ok(trajectory)
}

/// Runs the jobs one after another on the calling thread.
pub fn run_batch_sequential(
    cfg: &SimConfig,
    params: &[RegionParams],
    jobs: &[(Scenario, u64)],
) -> Result<Vec<EpisodeTrajectory>> {
    jobs.iter()
        .map(|&(scenario, seed)| run_episode_with(cfg, params, scenario, seed))
        .collect()
}

/// Runs the jobs across the rayon pool when the `parallel` feature is
/// enabled, sequentially otherwise. Job order is preserved either way, and a
/// failing episode aborts the batch carrying its (scenario, seed).
#[cfg(feature = "parallel")]
pub fn run_batch(
    cfg: &SimConfig,
    params: &[RegionParams],
    jobs: &[(Scenario, u64)],
) -> Result<Vec<EpisodeTrajectory>> {
    use rayon::prelude::*;
    jobs.par_iter()
        .map(|&(scenario, seed)| run_episode_with(cfg, params, scenario, seed))
        .collect()
}

#[cfg(not(feature = "parallel"))]
pub fn run_batch(
    cfg: &SimConfig,
    params: &[RegionParams],
    jobs: &[(Scenario, u64)],
) -> Result<Vec<EpisodeTrajectory>> {
    run_batch_sequential(cfg, params, jobs)
}

/// One run's headline numbers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub scenario: String,
    pub seed: u64,
    pub final_temp_rise: f64,
    pub cumulative_gross_output: f64,
    pub final_group_count: usize,
    pub final_largest_group: usize,
    pub final_top5_in_largest: usize,
    pub diagnostics: usize,
}

impl RunSummary {
    fn from_trajectory(t: &EpisodeTrajectory) -> Self {
        let last = t.metrics.last().unwrap();
        RunSummary {
            scenario: t.scenario.to_string(),
            seed: t.seed,
            final_temp_rise: last.temp_rise,
            cumulative_gross_output: t.cumulative_gross_output(),
            final_group_count: last.group_count,
            final_largest_group: last.largest_group_size,
            final_top5_in_largest: last.top5_in_largest,
            diagnostics: t.diagnostics.len(),
        }
    }
}

/// Per-seed comparison of the two scenarios.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairedDelta {
    pub seed: u64,
    pub temp_rise_hc: f64,
    pub temp_rise_hc_lc: f64,
    /// Positive when hc warms more than hc_lc.
    pub temp_gap: f64,
    pub cumulative_output_hc: f64,
    pub cumulative_output_hc_lc: f64,
    /// |hc - hc_lc| / hc.
    pub output_rel_diff: f64,
    pub largest_group_hc: usize,
    pub largest_group_hc_lc: usize,
    pub top5_in_largest_hc: usize,
    pub top5_in_largest_hc_lc: usize,
}

/// Per-scenario aggregates over seeds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioAggregate {
    pub scenario: String,
    pub mean_final_temp_rise: f64,
    pub mean_cumulative_gross_output: f64,
    pub mean_final_largest_group: f64,
    pub mean_final_top5_in_largest: f64,
    /// Mean over seeds of the per-step mean mitigation rate.
    pub mean_mitigation_by_step: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSummary {
    pub seeds: Vec<u64>,
    pub runs: Vec<RunSummary>,
    pub aggregates: Vec<ScenarioAggregate>,
    pub paired: Vec<PairedDelta>,
}

/// Everything a scenario-comparison experiment produces.
pub struct ExperimentOutcome {
    pub summary: ExperimentSummary,
    pub trajectories: Vec<EpisodeTrajectory>,
}

fn aggregate(scenario: Scenario, runs: &[&EpisodeTrajectory]) -> ScenarioAggregate {
    let count = runs.len() as f64;
    let rows = runs[0].metrics.len();
    let mean_mitigation_by_step = (0..rows)
        .map(|t| runs.iter().map(|r| r.metrics[t].mean_mitigation).sum::<f64>() / count)
        .collect();
    ScenarioAggregate {
        scenario: scenario.to_string(),
        mean_final_temp_rise: runs.iter().map(|r| r.final_temp_rise()).sum::<f64>() / count,
        mean_cumulative_gross_output: runs
            .iter()
            .map(|r| r.cumulative_gross_output())
            .sum::<f64>()
            / count,
        mean_final_largest_group: runs
            .iter()
            .map(|r| r.metrics.last().unwrap().largest_group_size as f64)
            .sum::<f64>()
            / count,
        mean_final_top5_in_largest: runs
            .iter()
            .map(|r| r.metrics.last().unwrap().top5_in_largest as f64)
            .sum::<f64>()
            / count,
        mean_mitigation_by_step,
    }
}

/// Runs both scenario initializations over every configured seed and builds
/// the paired comparison. The config's own `scenario` field is ignored here;
/// policies, seeds and dynamics are shared across the pair.
pub fn run_experiment(cfg: &SimConfig) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let params = load_configured_calibration(cfg)?;
    let mut jobs: Vec<(Scenario, u64)> = Vec::new();
    for &scenario in &[Scenario::Hc, Scenario::HcLc] {
        for &seed in &cfg.seeds {
            jobs.push((scenario, seed));
        }
    }
    let trajectories = run_batch(cfg, &params, &jobs)?;

    let half = cfg.seeds.len();
    let hc_runs: Vec<&EpisodeTrajectory> = trajectories[..half].iter().collect();
    let lc_runs: Vec<&EpisodeTrajectory> = trajectories[half..].iter().collect();
    let paired = cfg
        .seeds
        .iter()
        .enumerate()
        .map(|(k, &seed)| {
            let hc = hc_runs[k];
            let lc = lc_runs[k];
            let hc_last = hc.metrics.last().unwrap();
            let lc_last = lc.metrics.last().unwrap();
            let out_hc = hc.cumulative_gross_output();
            let out_lc = lc.cumulative_gross_output();
            PairedDelta {
                seed,
                temp_rise_hc: hc.final_temp_rise(),
                temp_rise_hc_lc: lc.final_temp_rise(),
                temp_gap: hc.final_temp_rise() - lc.final_temp_rise(),
                cumulative_output_hc: out_hc,
                cumulative_output_hc_lc: out_lc,
                output_rel_diff: (out_hc - out_lc).abs() / out_hc,
                largest_group_hc: hc_last.largest_group_size,
                largest_group_hc_lc: lc_last.largest_group_size,
                top5_in_largest_hc: hc_last.top5_in_largest,
                top5_in_largest_hc_lc: lc_last.top5_in_largest,
            }
        })
        .collect();

    let summary = ExperimentSummary {
        seeds: cfg.seeds.clone(),
        runs: trajectories.iter().map(RunSummary::from_trajectory).collect(),
        aggregates: vec![
            aggregate(Scenario::Hc, &hc_runs),
            aggregate(Scenario::HcLc, &lc_runs),
        ],
        paired,
    };
    Ok(ExperimentOutcome { summary, trajectories })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policies::{PolicyMapConfig, PolicyMode, PolicySpec};

    fn quick_cfg() -> SimConfig {
        SimConfig { steps: 5, seeds: vec![3], ..SimConfig::default() }
    }

    fn uniform_cfg(spec: PolicySpec) -> SimConfig {
        SimConfig {
            policies: PolicyMapConfig {
                mode: PolicyMode::Uniform,
                uniform: spec,
                ..PolicyMapConfig::default()
            },
            ..SimConfig::default()
        }
    }

    #[test]
    fn trajectory_has_steps_plus_one_snapshots() {
        let cfg = quick_cfg();
        let t = run_episode(&cfg, 3).unwrap();
        assert_eq!(t.snapshots.len(), 6);
        assert_eq!(t.metrics.len(), 6);
        assert_eq!(t.actions.len(), 5);
        for snap in &t.snapshots {
            snap.validate().unwrap();
        }
    }

    #[test]
    fn same_seed_reproduces_the_trajectory_exactly() {
        let cfg = quick_cfg();
        let a = run_episode(&cfg, 3).unwrap();
        let b = run_episode(&cfg, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn different_seeds_diverge() {
        let cfg = quick_cfg();
        let a = run_episode(&cfg, 3).unwrap();
        let b = run_episode(&cfg, 4).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn scenario_none_starts_everyone_groupless() {
        let cfg = SimConfig {
            scenario: Scenario::None,
            ..uniform_cfg(PolicySpec::freerider(0.5))
        };
        let t = run_episode(&cfg, 1).unwrap();
        assert!(t.snapshots[0].clubs.membership.iter().all(|&g| g == 0));
        assert!(t.final_groups().iter().all(|&g| g == 0));
    }

    #[test]
    fn final_year_matches_steps_times_years() {
        let cfg = SimConfig { steps: 20, ..quick_cfg() };
        let t = run_episode(&cfg, 9).unwrap();
        assert_eq!(t.metrics.last().unwrap().year, 100);
    }

    #[test]
    fn realized_mitigation_never_undercuts_the_floor() {
        let cfg = SimConfig { steps: 10, ..uniform_cfg(PolicySpec::Random) };
        let t = run_episode(&cfg, 42).unwrap();
        for (step, floors) in t.mitigation_floors.iter().enumerate() {
            let snapshot = &t.snapshots[step + 1];
            for (agent, &floor) in floors.iter().enumerate() {
                assert!(
                    snapshot.regions[agent].mitigation_rate >= floor,
                    "step {step}, agent {agent}"
                );
            }
        }
    }

    #[test]
    fn fresh_co_members_trade_at_the_initial_member_tariff() {
        // two agents preassigned to group 1 keep it under the cooperative
        // policy; at counter 0 the member tariff applies in both directions
        let cfg = uniform_cfg(PolicySpec::cooperative());
        let params = load_configured_calibration(&cfg).unwrap();
        let mut world = new_world(&params, ClimateState::default_start()).unwrap();
        world.clubs.membership[0] = 1;
        world.clubs.membership[1] = 1;
        world.regions[0].group_id = 1;
        world.regions[1].group_id = 1;
        let ranked: Vec<usize> = (0..params.len()).collect();
        let specs = cfg.policies.resolve(&ranked, params.len(), 0).unwrap();
        let mut policies: Vec<Box<dyn Policy>> =
            specs.iter().enumerate().map(|(i, s)| s.build(i as u64)).collect();
        let record = step_episode(&mut world, &mut policies, &params, &cfg).unwrap();
        assert_eq!(record.effective_tariffs[0][1], cfg.club.member_tariff_initial);
        assert_eq!(record.effective_tariffs[1][0], cfg.club.member_tariff_initial);
        assert_eq!(world.clubs.co_membership_steps[0][1], 1);
    }

    #[test]
    fn consumption_accounting_closes_globally() {
        let cfg = SimConfig { steps: 8, ..uniform_cfg(PolicySpec::Random) };
        let t = run_episode(&cfg, 17).unwrap();
        for (step, consumption) in t.consumption.iter().enumerate() {
            let snapshot = &t.snapshots[step + 1];
            let elasticity = cfg.dynamics.capital_elasticity;
            // recompute the step's net outputs from the pre-step snapshot
            let pre = &t.snapshots[step];
            let total_net: f64 = (0..27)
                .map(|i| {
                    let gross = crate::dynamics::gross_output(
                        pre.regions[i].tfp,
                        pre.regions[i].capital,
                        pre.regions[i].labor,
                        elasticity,
                    );
                    let params = load_configured_calibration(&cfg).unwrap();
                    crate::dynamics::net_output(
                        gross,
                        pre.climate.temp_atmosphere,
                        snapshot.regions[i].mitigation_rate,
                        cfg.dynamics.damage_coeff,
                        params[i].abatement_cost_coeff,
                        cfg.dynamics.abatement_exponent,
                    ) * (1.0 - snapshot.regions[i].saving_rate)
                })
                .sum();
            let total_consumption: f64 = consumption.iter().sum();
            assert!(
                (total_consumption - total_net).abs() / total_net < 1e-9,
                "step {step}: consumption {total_consumption} vs net {total_net}"
            );
        }
    }

    #[test]
    fn clubless_run_reduces_to_plain_dynamics() {
        // no groups, zero surcharge, freeriders everywhere: the temperature
        // path must match a direct iteration of the dynamics primitives
        let mut cfg = SimConfig {
            scenario: Scenario::None,
            steps: 10,
            ..uniform_cfg(PolicySpec::freerider(1.0))
        };
        cfg.club.surcharge = 0.0;
        let t = run_episode(&cfg, 5).unwrap();

        let params = load_configured_calibration(&cfg).unwrap();
        let d = &cfg.dynamics;
        let mut regions: Vec<(f64, f64, f64, f64)> = params
            .iter()
            .map(|p| (p.tfp_initial, p.capital_initial, p.labor_initial, p.carbon_intensity_initial))
            .collect();
        let mut climate = ClimateState::default_start();
        for step in 0..10usize {
            let mut injected = d.land_emissions(step);
            let mut nets = Vec::new();
            for (i, &(a, k, l, sig)) in regions.iter().enumerate() {
                let y = gross_output(a, k, l, d.capital_elasticity);
                injected += emissions(sig, 0.0, y);
                nets.push(net_output(
                    y,
                    climate.temp_atmosphere,
                    0.0,
                    d.damage_coeff,
                    params[i].abatement_cost_coeff,
                    d.abatement_exponent,
                ));
            }
            climate.carbon_masses =
                carbon_cycle_step(climate.carbon_masses, injected, &d.carbon_transfer).unwrap();
            let (at, lo) = temperature_step(
                climate.temp_atmosphere,
                climate.temp_ocean,
                climate.carbon_masses[crate::state::ATMOSPHERE],
                d,
                step,
            );
            climate.temp_atmosphere = at;
            climate.temp_ocean = lo;
            for (i, r) in regions.iter_mut().enumerate() {
                r.1 = capital_step(r.1, 0.25, nets[i], d.capital_depreciation, 5.0);
                let (a, s, l) =
                    exogenous_step(r.0, r.3, r.2, &params[i], step as f64 * 5.0, 5.0);
                r.0 = a;
                r.3 = s;
                r.2 = l;
            }
            let snap = &t.snapshots[step + 1];
            assert_eq!(snap.climate.temp_atmosphere, climate.temp_atmosphere);
            assert_eq!(snap.climate.carbon_masses, climate.carbon_masses);
        }
    }

    #[test]
    fn experiment_pairs_scenarios_over_shared_seeds() {
        let cfg = SimConfig { steps: 5, seeds: vec![1, 2], ..SimConfig::default() };
        let outcome = run_experiment(&cfg).unwrap();
        assert_eq!(outcome.trajectories.len(), 4);
        assert_eq!(outcome.summary.paired.len(), 2);
        assert_eq!(outcome.summary.aggregates.len(), 2);
        // the policy archetype map is identical across the pair of scenarios
        let hc = &outcome.trajectories[0];
        let lc = &outcome.trajectories[2];
        assert_eq!(hc.seed, lc.seed);
        assert_eq!(hc.policy_archetypes, lc.policy_archetypes);
    }

    #[test]
    fn batch_failure_names_scenario_and_seed() {
        // an 8-region calibration cannot seed the hc scenario, and the
        // failure surfaces with its (scenario, seed) attached
        use std::io::Write;
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(
            f,
            "region,tfp_initial,tfp_growth_initial,tfp_growth_decline,capital_initial,labor_initial,labor_asymptote,labor_convergence,carbon_intensity_initial,carbon_intensity_decline,abatement_cost_coeff,emissions_initial"
        )
        .unwrap();
        for i in 0..8 {
            writeln!(f, "r{i},1.0,0.01,0.005,2.0,10.0,12.0,0.1,0.2,-0.01,0.05,0.4").unwrap();
        }
        let cfg = SimConfig {
            steps: 5,
            calibration: Some(f.path().to_path_buf()),
            ..SimConfig::default()
        };
        let err = run_episode(&cfg, 7).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("seed 7") && msg.contains("hc"), "{msg}");
    }

    #[test]
    fn sequential_and_parallel_batches_agree() {
        let cfg = SimConfig { steps: 4, seeds: vec![1, 2, 3], ..SimConfig::default() };
        let params = load_configured_calibration(&cfg).unwrap();
        let jobs: Vec<(Scenario, u64)> =
            cfg.seeds.iter().map(|&s| (Scenario::Hc, s)).collect();
        let seq = run_batch_sequential(&cfg, &params, &jobs).unwrap();
        let par = run_batch(&cfg, &params, &jobs).unwrap();
        assert_eq!(seq, par);
    }
}
