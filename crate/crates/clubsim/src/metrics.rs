//! Per-step derived metrics recorded alongside every snapshot.

use serde::{Deserialize, Serialize};

use crate::dynamics::gross_output;
use crate::state::WorldState;

/// One row of the metrics table emitted for every snapshot, including the
/// initial one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub step: usize,
    pub year: u32,
    /// Degrees C above the episode's initial atmospheric temperature.
    pub temp_rise: f64,
    pub total_gross_output: f64,
    /// Unweighted mean of realized mitigation rates over agents.
    pub mean_mitigation: f64,
    pub group_count: usize,
    pub largest_group_size: usize,
    /// Top-5 ranked agents sitting in the largest group (lowest group id on
    /// ties).
    pub top5_in_largest: usize,
}

pub const METRICS_HEADER: &str =
    "step,year,temp_rise,total_gross_output,mean_mitigation,group_count,largest_group_size,top5_in_largest";

impl MetricsRow {
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.step,
            self.year,
            self.temp_rise,
            self.total_gross_output,
            self.mean_mitigation,
            self.group_count,
            self.largest_group_size,
            self.top5_in_largest
        )
    }
}

/// Largest nonzero group and its size; ties break toward the lowest id.
/// Returns (0, 0) when nobody is grouped.
pub fn largest_group(membership: &[u32]) -> (u32, usize) {
    let mut counts: std::collections::BTreeMap<u32, usize> = std::collections::BTreeMap::new();
    for &g in membership {
        if g != 0 {
            *counts.entry(g).or_insert(0) += 1;
        }
    }
    counts
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
        .unwrap_or((0, 0))
}

/// Derives the metrics row for a snapshot. Everything is recomputed from the
/// raw state so the emitted table always agrees with the trajectory.
pub fn metrics_row(
    world: &WorldState,
    capital_elasticity: f64,
    initial_temp: f64,
    top5: &[usize],
    years_per_step: u32,
) -> MetricsRow {
    let total_gross_output: f64 = world
        .regions
        .iter()
        .map(|r| gross_output(r.tfp, r.capital, r.labor, capital_elasticity))
        .sum();
    let mean_mitigation = world
        .regions
        .iter()
        .map(|r| r.mitigation_rate)
        .sum::<f64>()
        / world.regions.len() as f64;
    let membership = &world.clubs.membership;
    let group_count = {
        let mut ids: Vec<u32> = membership.iter().cloned().filter(|&g| g != 0).collect();
        ids.sort_unstable();
        ids.dedup();
        ids.len()
    };
    let (largest_id, largest_group_size) = largest_group(membership);
    let top5_in_largest = if largest_id == 0 {
        0
    } else {
        top5.iter().filter(|&&a| membership[a] == largest_id).count()
    };
    MetricsRow {
        step: world.step,
        year: world.step as u32 * years_per_step,
        temp_rise: world.climate.temp_atmosphere - initial_temp,
        total_gross_output,
        mean_mitigation,
        group_count,
        largest_group_size,
        top5_in_largest,
    }
}
