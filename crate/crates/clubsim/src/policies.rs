//! Scripted agent policies and the action-clamping layer.
//!
//! Policies stand in for learned agents: they map observations to the
//! per-step decision bundle through four staged hooks (group choice,
//! proposals, evaluations, economic action) that the harness calls in fixed
//! order. Every archetype is a deterministic function of its parameters and
//! its seed, so replays match bit for bit.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::club::Proposal;
use crate::error::{Result, SimError};
use crate::state::{AgentAction, RegionState};

/// Bounds on the continuous action fields. Saving and export limits default
/// to values in the neighbourhood of long-run global averages (gross saving
/// around a quarter of output, exports capped below a third).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ActionBounds {
    pub saving_min: f64,
    pub saving_max: f64,
    pub export_cap_max: f64,
    pub tariff_max: f64,
    pub mitigation_min: f64,
    pub mitigation_max: f64,
}

impl Default for ActionBounds {
    fn default() -> Self {
        ActionBounds {
            saving_min: 0.15,
            saving_max: 0.35,
            export_cap_max: 0.30,
            tariff_max: 1.0,
            mitigation_min: 0.0,
            mitigation_max: 1.0,
        }
    }
}

impl ActionBounds {
    pub fn validate(&self) -> Result<()> {
        let pairs = [
            ("saving", self.saving_min, self.saving_max),
            ("mitigation", self.mitigation_min, self.mitigation_max),
            ("export_cap", 0.0, self.export_cap_max),
            ("tariff", 0.0, self.tariff_max),
        ];
        for (name, lo, hi) in pairs {
            if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
                return Err(SimError::Config(format!(
                    "{name} bounds [{lo}, {hi}] violate 0 <= min <= max <= 1"
                )));
            }
        }
        Ok(())
    }
}

/// What a policy gets to see when deciding.
pub struct Observation<'a> {
    pub agent: usize,
    /// Step index about to be executed, starting at 0.
    pub step: usize,
    pub region: &'a RegionState,
    /// Group id per agent at the current stage of the step.
    pub membership: &'a [u32],
    /// Agents sharing this agent's nonzero group; empty when groupless.
    pub co_members: &'a [usize],
    pub bounds: &'a ActionBounds,
    pub max_group_id: u32,
}

/// The economic slice of an action, before clamping.
#[derive(Debug, Clone, PartialEq)]
pub struct EconomicAction {
    pub saving_rate: f64,
    pub mitigation_rate: f64,
    pub export_cap: f64,
    pub base_tariffs: Vec<f64>,
}

/// Staged decision interface. The harness calls the hooks in order within a
/// step: group choice before membership resolution, proposals after it,
/// evaluations once incoming proposals are known, then the economic action.
pub trait Policy {
    fn choose_group(&mut self, obs: &Observation) -> u32;
    fn propose(&mut self, obs: &Observation) -> Vec<(usize, f64)>;
    fn evaluate(&mut self, obs: &Observation, incoming: &[Proposal]) -> Vec<(usize, bool)>;
    fn economic(&mut self, obs: &Observation) -> EconomicAction;
}

/// Projects every scalar field of an action into its bound interval.
/// Group choice and evaluations pass through untouched.
pub fn clamp_action(raw: AgentAction, bounds: &ActionBounds) -> AgentAction {
    AgentAction {
        group_choice: raw.group_choice,
        proposals: raw
            .proposals
            .into_iter()
            .map(|(to, rate)| (to, rate.clamp(0.0, 1.0)))
            .collect(),
        evaluations: raw.evaluations,
        saving_rate: raw.saving_rate.clamp(bounds.saving_min, bounds.saving_max),
        mitigation_rate: raw
            .mitigation_rate
            .clamp(bounds.mitigation_min, bounds.mitigation_max),
        export_cap: raw.export_cap.clamp(0.0, bounds.export_cap_max),
        base_tariffs: raw
            .base_tariffs
            .into_iter()
            .map(|t| t.clamp(0.0, bounds.tariff_max))
            .collect(),
    }
}

/// Cooperative archetype: stays in (or herds towards) a club, proposes a
/// mitigation ramp to every co-member, accepts requests up to a margin above
/// its own target and mitigates at the target itself.
///
/// The leader preset ramps from 0.1; the follower preset ramps from 0.0 and
/// moves to the largest visible club each step, which is how scenario
/// structure reaches the mass of agents.
pub struct CooperativePolicy {
    pub ramp_start: f64,
    pub ramp_slope: f64,
    pub accept_margin: f64,
    pub join_largest: bool,
}

impl CooperativePolicy {
    pub fn leader() -> Self {
        CooperativePolicy {
            ramp_start: 0.1,
            ramp_slope: 0.05,
            accept_margin: 0.1,
            join_largest: false,
        }
    }

    pub fn follower() -> Self {
        CooperativePolicy {
            ramp_start: 0.0,
            ramp_slope: 0.05,
            accept_margin: 0.1,
            join_largest: true,
        }
    }

    fn target(&self, step: usize) -> f64 {
        (self.ramp_start + self.ramp_slope * step as f64).min(1.0)
    }
}

/// Largest nonzero group in `membership`, ties broken by lowest id.
fn largest_group(membership: &[u32]) -> Option<u32> {
    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    for &g in membership {
        if g != 0 {
            *counts.entry(g).or_insert(0) += 1;
        }
    }
    counts
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
        .map(|(g, _)| g)
}

impl Policy for CooperativePolicy {
    fn choose_group(&mut self, obs: &Observation) -> u32 {
        let current = obs.membership[obs.agent];
        if self.join_largest {
            largest_group(obs.membership).unwrap_or(current)
        } else {
            current
        }
    }

    fn propose(&mut self, obs: &Observation) -> Vec<(usize, f64)> {
        let target = self.target(obs.step);
        obs.co_members.iter().map(|&j| (j, target)).collect()
    }

    fn evaluate(&mut self, obs: &Observation, incoming: &[Proposal]) -> Vec<(usize, bool)> {
        let threshold = self.target(obs.step) + self.accept_margin;
        incoming
            .iter()
            .map(|p| (p.proposer, p.requested_mitigation <= threshold))
            .collect()
    }

    fn economic(&mut self, obs: &Observation) -> EconomicAction {
        EconomicAction {
            saving_rate: 0.25,
            mitigation_rate: self.target(obs.step),
            export_cap: obs.bounds.export_cap_max,
            base_tariffs: vec![0.05; obs.membership.len()],
        }
    }
}

/// Free-riding archetype: drifts out of any group, rejects every request,
/// mitigates at the lower bound and charges no tariffs.
pub struct FreeriderPolicy {
    pub p_exit: f64,
    rng: ChaCha8Rng,
}

impl FreeriderPolicy {
    pub fn new(p_exit: f64, seed: u64) -> Self {
        FreeriderPolicy {
            p_exit,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Policy for FreeriderPolicy {
    fn choose_group(&mut self, obs: &Observation) -> u32 {
        let exit = self.rng.gen_bool(self.p_exit);
        if exit {
            0
        } else {
            obs.membership[obs.agent]
        }
    }

    fn propose(&mut self, _obs: &Observation) -> Vec<(usize, f64)> {
        Vec::new()
    }

    fn evaluate(&mut self, _obs: &Observation, incoming: &[Proposal]) -> Vec<(usize, bool)> {
        incoming.iter().map(|p| (p.proposer, false)).collect()
    }

    fn economic(&mut self, obs: &Observation) -> EconomicAction {
        EconomicAction {
            saving_rate: 0.25,
            mitigation_rate: obs.bounds.mitigation_min,
            export_cap: obs.bounds.export_cap_max,
            base_tariffs: vec![0.0; obs.membership.len()],
        }
    }
}

/// Baseline/fuzzing archetype: every field uniform over its clamped range,
/// group choice uniform over [0, N].
pub struct RandomPolicy {
    rng: ChaCha8Rng,
}

impl RandomPolicy {
    pub fn new(seed: u64) -> Self {
        RandomPolicy {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        if lo == hi {
            lo
        } else {
            self.rng.gen_range(lo..=hi)
        }
    }
}

impl Policy for RandomPolicy {
    fn choose_group(&mut self, obs: &Observation) -> u32 {
        self.rng.gen_range(0..=obs.max_group_id)
    }

    fn propose(&mut self, obs: &Observation) -> Vec<(usize, f64)> {
        let (lo, hi) = (obs.bounds.mitigation_min, obs.bounds.mitigation_max);
        obs.co_members
            .iter()
            .map(|&j| {
                let rate = self.uniform(lo, hi);
                (j, rate)
            })
            .collect()
    }

    fn evaluate(&mut self, _obs: &Observation, incoming: &[Proposal]) -> Vec<(usize, bool)> {
        incoming
            .iter()
            .map(|p| (p.proposer, self.rng.gen_bool(0.5)))
            .collect()
    }

    fn economic(&mut self, obs: &Observation) -> EconomicAction {
        let b = obs.bounds;
        let saving_rate = self.uniform(b.saving_min, b.saving_max);
        let mitigation_rate = self.uniform(b.mitigation_min, b.mitigation_max);
        let export_cap = self.uniform(0.0, b.export_cap_max);
        let base_tariffs = (0..obs.membership.len())
            .map(|_| self.uniform(0.0, b.tariff_max))
            .collect();
        EconomicAction {
            saving_rate,
            mitigation_rate,
            export_cap,
            base_tariffs,
        }
    }
}

fn default_ramp_start_leader() -> f64 {
    0.1
}
fn default_ramp_start_follower() -> f64 {
    0.0
}
fn default_ramp_slope() -> f64 {
    0.05
}
fn default_accept_margin() -> f64 {
    0.1
}
fn default_p_exit() -> f64 {
    0.5
}

/// Archetype name plus parameters, as written in run configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "archetype", rename_all = "snake_case")]
pub enum PolicySpec {
    Cooperative {
        #[serde(default = "default_ramp_start_leader")]
        ramp_start: f64,
        #[serde(default = "default_ramp_slope")]
        ramp_slope: f64,
        #[serde(default = "default_accept_margin")]
        accept_margin: f64,
    },
    Follower {
        #[serde(default = "default_ramp_start_follower")]
        ramp_start: f64,
        #[serde(default = "default_ramp_slope")]
        ramp_slope: f64,
        #[serde(default = "default_accept_margin")]
        accept_margin: f64,
    },
    Freerider {
        #[serde(default = "default_p_exit")]
        p_exit: f64,
    },
    Random,
}

impl PolicySpec {
    pub fn cooperative() -> Self {
        PolicySpec::Cooperative {
            ramp_start: default_ramp_start_leader(),
            ramp_slope: default_ramp_slope(),
            accept_margin: default_accept_margin(),
        }
    }

    pub fn follower() -> Self {
        PolicySpec::Follower {
            ramp_start: default_ramp_start_follower(),
            ramp_slope: default_ramp_slope(),
            accept_margin: default_accept_margin(),
        }
    }

    pub fn freerider(p_exit: f64) -> Self {
        PolicySpec::Freerider { p_exit }
    }

    pub fn archetype_name(&self) -> &'static str {
        match self {
            PolicySpec::Cooperative { .. } => "cooperative",
            PolicySpec::Follower { .. } => "follower",
            PolicySpec::Freerider { .. } => "freerider",
            PolicySpec::Random => "random",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PolicySpec::Cooperative { ramp_start, ramp_slope, accept_margin }
            | PolicySpec::Follower { ramp_start, ramp_slope, accept_margin } => {
                for (name, v) in [
                    ("ramp_start", *ramp_start),
                    ("ramp_slope", *ramp_slope),
                    ("accept_margin", *accept_margin),
                ] {
                    if !v.is_finite() || v < 0.0 {
                        return Err(SimError::Config(format!("policy {name} = {v} invalid")));
                    }
                }
                Ok(())
            }
            PolicySpec::Freerider { p_exit } => {
                if !(0.0..=1.0).contains(p_exit) {
                    return Err(SimError::Config(format!("p_exit = {p_exit} out of [0, 1]")));
                }
                Ok(())
            }
            PolicySpec::Random => Ok(()),
        }
    }

    /// Instantiates the archetype; `seed` feeds the stochastic ones.
    pub fn build(&self, seed: u64) -> Box<dyn Policy> {
        match *self {
            PolicySpec::Cooperative { ramp_start, ramp_slope, accept_margin } => {
                Box::new(CooperativePolicy {
                    ramp_start,
                    ramp_slope,
                    accept_margin,
                    join_largest: false,
                })
            }
            PolicySpec::Follower { ramp_start, ramp_slope, accept_margin } => {
                Box::new(CooperativePolicy {
                    ramp_start,
                    ramp_slope,
                    accept_margin,
                    join_largest: true,
                })
            }
            PolicySpec::Freerider { p_exit } => Box::new(FreeriderPolicy::new(p_exit, seed)),
            PolicySpec::Random => Box::new(RandomPolicy::new(seed)),
        }
    }
}

/// How the per-agent archetype map is put together for a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PolicyMapConfig {
    pub mode: PolicyMode,
    /// Archetype used for every agent in `uniform` mode.
    pub uniform: PolicySpec,
    /// In `mixed` mode, the number of top-ranked regions assigned the
    /// cooperative leader archetype.
    pub leader_count: usize,
    /// In `mixed` mode, each remaining agent independently becomes a
    /// freerider with this probability (drawn from the episode seed).
    pub freerider_fraction: f64,
    pub freerider_p_exit: f64,
    /// Per-agent overrides applied last, keyed by agent index.
    pub overrides: BTreeMap<String, PolicySpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyMode {
    /// Leaders on top-ranked regions, followers elsewhere, a seeded fraction
    /// of the followers replaced by freeriders.
    Mixed,
    /// One archetype for everyone.
    Uniform,
}

impl Default for PolicyMapConfig {
    fn default() -> Self {
        PolicyMapConfig {
            mode: PolicyMode::Mixed,
            uniform: PolicySpec::freerider(0.5),
            leader_count: 5,
            freerider_fraction: 0.25,
            freerider_p_exit: 0.5,
            overrides: BTreeMap::new(),
        }
    }
}

impl PolicyMapConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.freerider_fraction) {
            return Err(SimError::Config(format!(
                "freerider_fraction = {} out of [0, 1]",
                self.freerider_fraction
            )));
        }
        if !(0.0..=1.0).contains(&self.freerider_p_exit) {
            return Err(SimError::Config(format!(
                "freerider_p_exit = {} out of [0, 1]",
                self.freerider_p_exit
            )));
        }
        self.uniform.validate()?;
        for (key, spec) in &self.overrides {
            key.parse::<usize>().map_err(|_| {
                SimError::Config(format!("policy override key {key:?} is not an agent index"))
            })?;
            spec.validate()?;
        }
        Ok(())
    }

    /// Resolves the archetype per agent. The freerider draw consumes one
    /// Bernoulli sample per non-leader agent in ascending id order, so the
    /// assignment is a pure function of (config, ranking, seed) and is shared
    /// by every scenario run under the same seed.
    pub fn resolve(
        &self,
        ranked: &[usize],
        n: usize,
        assignment_seed: u64,
    ) -> Result<Vec<PolicySpec>> {
        self.validate()?;
        let mut specs: Vec<PolicySpec> = match self.mode {
            PolicyMode::Uniform => vec![self.uniform.clone(); n],
            PolicyMode::Mixed => {
                let leaders: std::collections::BTreeSet<usize> =
                    ranked.iter().take(self.leader_count).cloned().collect();
                let mut rng = ChaCha8Rng::seed_from_u64(assignment_seed);
                (0..n)
                    .map(|agent| {
                        if leaders.contains(&agent) {
                            PolicySpec::cooperative()
                        } else if rng.gen_bool(self.freerider_fraction) {
                            PolicySpec::freerider(self.freerider_p_exit)
                        } else {
                            PolicySpec::follower()
                        }
                    })
                    .collect()
            }
        };
        for (key, spec) in &self.overrides {
            let idx: usize = key.parse().unwrap();
            if idx >= n {
                return Err(SimError::Config(format!(
                    "policy override for agent {idx} out of range (N = {n})"
                )));
            }
            specs[idx] = spec.clone();
        }
        Ok(specs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn region(n: usize) -> RegionState {
        RegionState {
            capital: 10.0,
            labor: 100.0,
            tfp: 1.0,
            carbon_intensity: 0.3,
            saving_rate: 0.25,
            mitigation_rate: 0.0,
            export_cap: 0.3,
            group_id: 0,
            base_tariffs: vec![0.0; n],
        }
    }

    fn obs<'a>(
        agent: usize,
        step: usize,
        region: &'a RegionState,
        membership: &'a [u32],
        co_members: &'a [usize],
        bounds: &'a ActionBounds,
    ) -> Observation<'a> {
        Observation {
            agent,
            step,
            region,
            membership,
            co_members,
            bounds,
            max_group_id: membership.len() as u32,
        }
    }

    #[test]
    fn clamp_action_projects_each_field() {
        let bounds = ActionBounds::default();
        let raw = AgentAction {
            group_choice: 3,
            proposals: vec![(1, 1.4), (2, -0.2)],
            evaluations: vec![(0, true)],
            saving_rate: 0.9,
            mitigation_rate: 0.5,
            export_cap: -0.1,
            base_tariffs: vec![1.5, -0.5],
        };
        let clamped = clamp_action(raw, &bounds);
        assert_eq!(clamped.saving_rate, 0.35);
        assert_eq!(clamped.mitigation_rate, 0.5);
        assert_eq!(clamped.export_cap, 0.0);
        assert_eq!(clamped.base_tariffs, vec![1.0, 0.0]);
        assert_eq!(clamped.proposals, vec![(1, 1.0), (2, 0.0)]);
        assert_eq!(clamped.group_choice, 3);
        assert_eq!(clamped.evaluations, vec![(0, true)]);
    }

    #[test]
    fn clamp_keeps_interior_points() {
        let bounds = ActionBounds::default();
        let raw = AgentAction {
            group_choice: 0,
            proposals: vec![],
            evaluations: vec![],
            saving_rate: 0.25,
            mitigation_rate: 0.4,
            export_cap: 0.2,
            base_tariffs: vec![0.05],
        };
        let clamped = clamp_action(raw.clone(), &bounds);
        assert_eq!(clamped, raw);
    }

    #[test]
    fn cooperative_proposes_ramp_to_co_members() {
        let bounds = ActionBounds::default();
        let r = region(3);
        let membership = [1, 1, 1];
        let co = [1, 2];
        let mut p = CooperativePolicy::leader();
        let proposals = p.propose(&obs(0, 0, &r, &membership, &co, &bounds));
        assert_eq!(proposals, vec![(1, 0.1), (2, 0.1)]);
        let later = p.propose(&obs(0, 4, &r, &membership, &co, &bounds));
        assert!(later.iter().all(|&(_, v)| (v - 0.3).abs() < 1e-15));
        // the ramp saturates at 1
        let capped = p.propose(&obs(0, 50, &r, &membership, &co, &bounds));
        assert!(capped.iter().all(|&(_, v)| v == 1.0));
    }

    #[test]
    fn cooperative_accepts_within_margin() {
        let bounds = ActionBounds::default();
        let r = region(2);
        let membership = [1, 1];
        let co = [1];
        let mut p = CooperativePolicy::leader();
        let incoming = [
            Proposal { proposer: 1, recipient: 0, requested_mitigation: 0.15 },
            Proposal { proposer: 1, recipient: 0, requested_mitigation: 0.25 },
        ];
        let evals = p.evaluate(&obs(0, 0, &r, &membership, &co, &bounds), &incoming);
        assert_eq!(evals, vec![(1, true), (1, false)]);
    }

    #[test]
    fn groupless_cooperative_emits_no_proposals() {
        let bounds = ActionBounds::default();
        let r = region(2);
        let membership = [0, 1];
        let mut p = CooperativePolicy::leader();
        assert!(p.propose(&obs(0, 0, &r, &membership, &[], &bounds)).is_empty());
    }

    #[test]
    fn cooperative_keeps_group_and_sets_ramp_mitigation() {
        let bounds = ActionBounds::default();
        let mut r = region(2);
        r.group_id = 2;
        let membership = [2, 1];
        let mut p = CooperativePolicy::leader();
        assert_eq!(p.choose_group(&obs(0, 3, &r, &membership, &[], &bounds)), 2);
        let econ = p.economic(&obs(0, 3, &r, &membership, &[], &bounds));
        assert!((econ.mitigation_rate - 0.25).abs() < 1e-15);
        assert_eq!(econ.saving_rate, 0.25);
        assert_eq!(econ.export_cap, bounds.export_cap_max);
        assert!(econ.base_tariffs.iter().all(|&t| t == 0.05));
    }

    #[test]
    fn follower_joins_largest_group_lowest_id_on_ties() {
        let bounds = ActionBounds::default();
        let r = region(5);
        let mut p = CooperativePolicy::follower();
        // group 3 has two members, group 1 has one
        let membership = [0, 3, 3, 1, 0];
        assert_eq!(p.choose_group(&obs(0, 0, &r, &membership, &[], &bounds)), 3);
        // tie between groups 2 and 4: lowest id wins
        let tied = [2, 2, 4, 4, 0];
        assert_eq!(p.choose_group(&obs(4, 0, &r, &tied, &[], &bounds)), 2);
        // no nonzero groups anywhere: stay put
        let none = [0, 0, 0, 0, 0];
        assert_eq!(p.choose_group(&obs(0, 0, &r, &none, &[], &bounds)), 0);
    }

    #[test]
    fn freerider_with_certain_exit_always_leaves() {
        let bounds = ActionBounds::default();
        let mut r = region(2);
        r.group_id = 1;
        let membership = [1, 1];
        let mut p = FreeriderPolicy::new(1.0, 9);
        for step in 0..10 {
            assert_eq!(p.choose_group(&obs(0, step, &r, &membership, &[1], &bounds)), 0);
        }
    }

    #[test]
    fn freerider_rejects_everything_and_sets_minimum_mitigation() {
        let bounds = ActionBounds::default();
        let r = region(2);
        let membership = [1, 1];
        let mut p = FreeriderPolicy::new(0.5, 9);
        let incoming = [Proposal { proposer: 1, recipient: 0, requested_mitigation: 0.05 }];
        let evals = p.evaluate(&obs(0, 0, &r, &membership, &[1], &bounds), &incoming);
        assert_eq!(evals, vec![(1, false)]);
        assert!(p.propose(&obs(0, 0, &r, &membership, &[1], &bounds)).is_empty());
        let econ = p.economic(&obs(0, 0, &r, &membership, &[1], &bounds));
        assert_eq!(econ.mitigation_rate, bounds.mitigation_min);
        assert!(econ.base_tariffs.iter().all(|&t| t == 0.0));
    }

    #[test]
    fn freerider_never_rejoins_after_exit() {
        let bounds = ActionBounds::default();
        let r = region(2);
        let membership = [0, 1];
        let mut p = FreeriderPolicy::new(0.5, 11);
        for step in 0..50 {
            assert_eq!(p.choose_group(&obs(0, step, &r, &membership, &[], &bounds)), 0);
        }
    }

    #[test]
    fn random_policy_stays_within_bounds() {
        let bounds = ActionBounds::default();
        let r = region(4);
        let membership = [1, 1, 2, 0];
        let co = [1];
        let mut p = RandomPolicy::new(77);
        for step in 0..10_000 {
            let o = obs(0, step % 20, &r, &membership, &co, &bounds);
            let g = p.choose_group(&o);
            assert!(g <= o.max_group_id);
            let econ = p.economic(&o);
            assert!((bounds.saving_min..=bounds.saving_max).contains(&econ.saving_rate));
            assert!((0.0..=bounds.export_cap_max).contains(&econ.export_cap));
            assert!(
                (bounds.mitigation_min..=bounds.mitigation_max).contains(&econ.mitigation_rate)
            );
            assert!(econ
                .base_tariffs
                .iter()
                .all(|t| (0.0..=bounds.tariff_max).contains(t)));
            for (_, rate) in p.propose(&o) {
                assert!((0.0..=1.0).contains(&rate));
            }
        }
    }

    #[test]
    fn random_policy_replays_identically_per_seed() {
        let bounds = ActionBounds::default();
        let r = region(3);
        let membership = [1, 1, 2];
        let co = [1];
        let mut a = RandomPolicy::new(123);
        let mut b = RandomPolicy::new(123);
        for step in 0..200 {
            let o = obs(0, step, &r, &membership, &co, &bounds);
            assert_eq!(a.choose_group(&o), b.choose_group(&o));
            assert_eq!(a.propose(&o), b.propose(&o));
            assert_eq!(a.economic(&o).saving_rate, b.economic(&o).saving_rate);
        }
    }

    #[test]
    fn random_saving_mean_matches_uniform_midpoint() {
        let bounds = ActionBounds::default();
        let r = region(1);
        let membership = [0];
        let mut p = RandomPolicy::new(2024);
        let draws = 100_000;
        let mut sum = 0.0;
        for step in 0..draws {
            let o = obs(0, step, &r, &membership, &[], &bounds);
            sum += p.economic(&o).saving_rate;
        }
        let mean = sum / draws as f64;
        assert!((mean - 0.25).abs() < 0.005, "mean saving = {mean}");
    }

    #[test]
    fn random_fuzz_through_clamp_respects_bounds() {
        let bounds = ActionBounds::default();
        let r = region(3);
        let membership = [1, 1, 2];
        let co = [1];
        let mut p = RandomPolicy::new(5);
        for step in 0..2000 {
            let o = obs(0, step, &r, &membership, &co, &bounds);
            let raw = AgentAction {
                group_choice: p.choose_group(&o),
                proposals: p.propose(&o),
                evaluations: vec![],
                saving_rate: p.economic(&o).saving_rate * 3.0 - 0.5,
                mitigation_rate: p.economic(&o).mitigation_rate * 2.0,
                export_cap: p.economic(&o).export_cap * 4.0 - 0.3,
                base_tariffs: vec![2.0, -1.0, 0.5],
            };
            let c = clamp_action(raw, &bounds);
            assert!((bounds.saving_min..=bounds.saving_max).contains(&c.saving_rate));
            assert!(
                (bounds.mitigation_min..=bounds.mitigation_max).contains(&c.mitigation_rate)
            );
            assert!((0.0..=bounds.export_cap_max).contains(&c.export_cap));
            assert!(c.base_tariffs.iter().all(|t| (0.0..=bounds.tariff_max).contains(t)));
        }
    }

    #[test]
    fn mixed_assignment_is_seed_stable_and_leader_aware() {
        let cfg = PolicyMapConfig::default();
        let ranked: Vec<usize> = (0..27).collect();
        let a = cfg.resolve(&ranked, 27, 99).unwrap();
        let b = cfg.resolve(&ranked, 27, 99).unwrap();
        assert_eq!(a, b);
        for agent in 0..5 {
            assert_eq!(a[agent].archetype_name(), "cooperative");
        }
        let freeriders = a.iter().filter(|s| s.archetype_name() == "freerider").count();
        let followers = a.iter().filter(|s| s.archetype_name() == "follower").count();
        assert_eq!(freeriders + followers, 22);
    }

    #[test]
    fn overrides_replace_resolved_archetypes() {
        let mut cfg = PolicyMapConfig::default();
        cfg.overrides.insert("0".into(), PolicySpec::Random);
        let ranked: Vec<usize> = (0..27).collect();
        let specs = cfg.resolve(&ranked, 27, 1).unwrap();
        assert_eq!(specs[0].archetype_name(), "random");
        cfg.overrides.insert("40".into(), PolicySpec::Random);
        assert!(cfg.resolve(&ranked, 27, 1).is_err());
    }

    #[test]
    fn bounds_validation_rejects_inverted_pairs() {
        ActionBounds::default().validate().unwrap();
        let bad = ActionBounds {
            saving_min: 0.5,
            saving_max: 0.2,
            ..ActionBounds::default()
        };
        assert!(bad.validate().is_err());
    }
}
