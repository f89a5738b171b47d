//! Deterministic, seedable agent-based simulator of international climate
//! negotiations built around "climate clubs".
//!
//! Regional agents evolve under RICE/DICE-style climate-economy dynamics
//! while freely forming, joining and leaving groups. Within a group they
//! negotiate mitigation-rate floors; imports from outside the group carry a
//! tariff surcharge, while tariffs between long-standing co-members decay to
//! zero. The harness compares two initial group configurations — the top
//! emitters clustered together (`hc`) versus spread across mixed groups
//! (`hc_lc`) — over batches of seeded episodes.
//!
//! Batches run data-parallel over (scenario, seed) jobs via rayon when the
//! default `parallel` feature is enabled; disable it for a fully sequential
//! build. A single episode is always sequential and every output is a pure
//! function of (config, seed).

pub mod club;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod export;
pub mod harness;
pub mod metrics;
pub mod policies;
pub mod scenarios;
pub mod state;

pub use club::{ClubParams, Proposal};
pub use config::{Scenario, SimConfig};
pub use dynamics::{DynamicsParams, TradeOutcome};
pub use error::{Result, SimError};
pub use export::{export_experiment, export_run};
pub use harness::{
    run_batch, run_batch_sequential, run_episode, run_experiment, EpisodeTrajectory,
    ExperimentOutcome, ExperimentSummary,
};
pub use metrics::MetricsRow;
pub use policies::{ActionBounds, Policy, PolicyMapConfig, PolicySpec};
pub use scenarios::{default_calibration, init_hc, init_hc_lc, load_calibration, rank_regions};
pub use state::{new_world, AgentAction, ClimateState, ClubState, RegionParams, RegionState, WorldState};
