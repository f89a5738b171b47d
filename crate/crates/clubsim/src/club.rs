//! Club protocol: group-state resolution, within-club mitigation negotiation,
//! tariff surcharges on non-members and tariff decay between members.
//!
//! Groups are identified by a plain integer per agent, re-chosen freely every
//! step: 0 means "in no group", picking an id someone else holds joins that
//! group, and picking an unused id founds a new one. Negotiation — proposing
//! a mitigation rate and accepting or rejecting incoming requests — only
//! happens between members of the same group.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

/// Club rule constants: the surcharge added to non-member tariffs, the
/// starting tariff between fresh co-members, and how many consecutive
/// co-membership steps it takes for the member tariff to reach zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClubParams {
    pub surcharge: f64,
    pub member_tariff_initial: f64,
    pub decay_horizon: u32,
}

impl Default for ClubParams {
    fn default() -> Self {
        ClubParams {
            surcharge: 0.10,
            member_tariff_initial: 0.05,
            decay_horizon: 3,
        }
    }
}

impl ClubParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.surcharge) {
            return Err(SimError::Config(format!(
                "club surcharge = {} out of [0, 1]",
                self.surcharge
            )));
        }
        if !(0.0..=1.0).contains(&self.member_tariff_initial) {
            return Err(SimError::Config(format!(
                "member_tariff_initial = {} out of [0, 1]",
                self.member_tariff_initial
            )));
        }
        if self.decay_horizon < 1 {
            return Err(SimError::Config("decay_horizon must be at least 1".into()));
        }
        Ok(())
    }
}

/// A request that a co-member adopt at least the given mitigation rate this
/// step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proposal {
    pub proposer: usize,
    pub recipient: usize,
    pub requested_mitigation: f64,
}

/// Protocol events worth surfacing in trajectory diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub enum ClubEvent {
    GroupChoiceClamped { agent: usize, chosen: u32 },
    ProposalDropped { proposer: usize, recipient: usize, reason: &'static str },
    EvaluationIgnored { evaluator: usize, proposer: usize },
}

impl std::fmt::Display for ClubEvent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ClubEvent::GroupChoiceClamped { agent, chosen } => {
                write!(f, "agent {agent}: group choice {chosen} out of range, clamped to 0")
            }
            ClubEvent::ProposalDropped { proposer, recipient, reason } => {
                write!(f, "proposal {proposer} -> {recipient} dropped: {reason}")
            }
            ClubEvent::EvaluationIgnored { evaluator, proposer } => {
                write!(f, "agent {evaluator}: evaluation of nonexistent proposal from {proposer} ignored")
            }
        }
    }
}

/// Applies every agent's group choice verbatim. Two agents are co-members
/// afterwards iff they chose the same nonzero id; out-of-range choices are
/// clamped to 0 (no group) and reported.
pub fn resolve_group_choices(
    _prev_membership: &[u32],
    choices: &[u32],
    max_group_id: u32,
) -> (Vec<u32>, Vec<ClubEvent>) {
    let mut events = Vec::new();
    let membership = choices
        .iter()
        .enumerate()
        .map(|(agent, &chosen)| {
            if chosen > max_group_id {
                events.push(ClubEvent::GroupChoiceClamped { agent, chosen });
                0
            } else {
                chosen
            }
        })
        .collect();
    (membership, events)
}

/// Advances the consecutive-co-membership counters after a completed step:
/// +1 for every pair sharing a nonzero group, reset to 0 otherwise.
pub fn update_co_membership(counters: &[Vec<u32>], membership: &[u32]) -> Vec<Vec<u32>> {
    let n = membership.len();
    let mut next = vec![vec![0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            if membership[i] != 0 && membership[i] == membership[j] {
                let v = counters[i][j] + 1;
                next[i][j] = v;
                next[j][i] = v;
            }
        }
    }
    next
}

/// Tariff actually charged by importer `i` on goods from exporter `j`.
///
/// Co-members pay the decaying member tariff `tau0 * max(0, 1 - k/D)` in
/// place of the base tariff; a grouped importer adds the surcharge on top of
/// its base tariff for any non-co-member; an importer in no group charges its
/// base tariff unchanged.
pub fn effective_tariff(
    importer: usize,
    exporter: usize,
    base: f64,
    membership: &[u32],
    counters: &[Vec<u32>],
    params: &ClubParams,
) -> f64 {
    let gi = membership[importer];
    if gi == 0 {
        return base;
    }
    if gi == membership[exporter] && importer != exporter {
        let k = counters[importer][exporter] as f64;
        let d = params.decay_horizon as f64;
        return params.member_tariff_initial * (1.0 - k / d).max(0.0);
    }
    (base + params.surcharge).min(1.0)
}

/// Filters raw proposals down to the ones the protocol admits: proposer and
/// recipient must share a nonzero group and differ. Everything else is
/// dropped with a diagnostic rather than failing the step. Requested rates
/// are projected into [0, 1].
pub fn collect_proposals(
    membership: &[u32],
    raw_proposals: &[Vec<(usize, f64)>],
) -> (Vec<Proposal>, Vec<ClubEvent>) {
    let n = membership.len();
    let mut kept = Vec::new();
    let mut events = Vec::new();
    for (proposer, list) in raw_proposals.iter().enumerate() {
        for &(recipient, rate) in list {
            let mut drop = |reason| {
                events.push(ClubEvent::ProposalDropped { proposer, recipient, reason });
            };
            if recipient >= n {
                drop("recipient out of range");
                continue;
            }
            if recipient == proposer {
                drop("self-proposal");
                continue;
            }
            if membership[proposer] == 0 {
                drop("proposer in no group");
                continue;
            }
            if membership[recipient] != membership[proposer] {
                drop("recipient not a co-member");
                continue;
            }
            kept.push(Proposal {
                proposer,
                recipient,
                requested_mitigation: rate.clamp(0.0, 1.0),
            });
        }
    }
    (kept, events)
}

/// Turns accept/reject decisions into per-agent mitigation floors.
///
/// An agent's floor is the maximum requested rate over the proposals it
/// accepted, 0 if it accepted none. Evaluations referencing a proposal that
/// was never delivered are ignored with a diagnostic. The caller enforces
/// the floor as `realized = max(chosen, floor)`.
pub fn apply_evaluations(
    proposals: &[Proposal],
    evaluations: &[Vec<(usize, bool)>],
    n: usize,
) -> (Vec<f64>, Vec<ClubEvent>) {
    let mut floors = vec![0.0; n];
    let mut events = Vec::new();
    for (evaluator, list) in evaluations.iter().enumerate() {
        for &(proposer, accept) in list {
            let matched: Vec<&Proposal> = proposals
                .iter()
                .filter(|p| p.proposer == proposer && p.recipient == evaluator)
                .collect();
            if matched.is_empty() {
                events.push(ClubEvent::EvaluationIgnored { evaluator, proposer });
                continue;
            }
            if accept {
                for p in matched {
                    if p.requested_mitigation > floors[evaluator] {
                        floors[evaluator] = p.requested_mitigation;
                    }
                }
            }
        }
    }
    (floors, events)
}
