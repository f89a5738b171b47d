//! Plot-ready result files: per-run metrics and group tables, run summaries,
//! and the experiment comparison set. All writers are deterministic, so a
//! rerun with the same config and seeds reproduces every file byte for byte.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::SimConfig;
use crate::error::{Result, SimError};
use crate::harness::{EpisodeTrajectory, ExperimentOutcome, RunSummary};
use crate::metrics::METRICS_HEADER;

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| SimError::io(path, e))
}

fn run_stem(t: &EpisodeTrajectory) -> String {
    format!("{}_seed{}", t.scenario, t.seed)
}

#[derive(Serialize)]
struct RunSummaryFile<'a> {
    scenario: String,
    seed: u64,
    final_temp_rise: f64,
    cumulative_gross_output: f64,
    final_group_count: usize,
    final_largest_group: usize,
    final_top5_in_largest: usize,
    diagnostics: usize,
    policy_archetypes: &'a [&'static str],
    config: &'a SimConfig,
}

/// Writes the metrics table, the final group assignment and the run summary
/// for one trajectory. Returns the paths written.
pub fn export_run(
    trajectory: &EpisodeTrajectory,
    cfg: &SimConfig,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| SimError::io(out_dir, e))?;
    let stem = run_stem(trajectory);
    let mut written = Vec::new();

    let mut metrics = String::from(METRICS_HEADER);
    metrics.push('\n');
    for row in &trajectory.metrics {
        metrics.push_str(&row.to_csv_line());
        metrics.push('\n');
    }
    let metrics_path = out_dir.join(format!("{stem}_metrics.csv"));
    write_file(&metrics_path, &metrics)?;
    written.push(metrics_path);

    let mut groups = String::from("agent_id,group_id\n");
    for (agent, &group) in trajectory.final_groups().iter().enumerate() {
        let _ = writeln!(groups, "{agent},{group}");
    }
    let groups_path = out_dir.join(format!("{stem}_groups.csv"));
    write_file(&groups_path, &groups)?;
    written.push(groups_path);

    let last = trajectory.metrics.last().unwrap();
    let summary = RunSummaryFile {
        scenario: trajectory.scenario.to_string(),
        seed: trajectory.seed,
        final_temp_rise: last.temp_rise,
        cumulative_gross_output: trajectory.cumulative_gross_output(),
        final_group_count: last.group_count,
        final_largest_group: last.largest_group_size,
        final_top5_in_largest: last.top5_in_largest,
        diagnostics: trajectory.diagnostics.len(),
        policy_archetypes: &trajectory.policy_archetypes,
        config: cfg,
    };
    let text = toml::to_string(&summary)
        .map_err(|e| SimError::Config(format!("summary serialization failed: {e}")))?;
    let summary_path = out_dir.join(format!("{stem}_summary.toml"));
    write_file(&summary_path, &text)?;
    written.push(summary_path);

    Ok(written)
}

#[derive(Serialize)]
struct ExperimentSummaryFile<'a> {
    seeds: &'a [u64],
    runs: &'a [RunSummary],
    aggregates: &'a [crate::harness::ScenarioAggregate],
    paired: &'a [crate::harness::PairedDelta],
    config: &'a SimConfig,
}

/// Writes every run's files plus the experiment-level comparison tables.
pub fn export_experiment(
    outcome: &ExperimentOutcome,
    cfg: &SimConfig,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| SimError::io(out_dir, e))?;
    let mut written = Vec::new();
    for trajectory in &outcome.trajectories {
        written.extend(export_run(trajectory, cfg, out_dir)?);
    }

    let mut comparison = String::from(
        "scenario,seed,final_temp_rise,cumulative_gross_output,final_group_count,final_largest_group,final_top5_in_largest\n",
    );
    for run in &outcome.summary.runs {
        let _ = writeln!(
            comparison,
            "{},{},{},{},{},{},{}",
            run.scenario,
            run.seed,
            run.final_temp_rise,
            run.cumulative_gross_output,
            run.final_group_count,
            run.final_largest_group,
            run.final_top5_in_largest
        );
    }
    let comparison_path = out_dir.join("comparison.csv");
    write_file(&comparison_path, &comparison)?;
    written.push(comparison_path);

    let mut paired = String::from(
        "seed,temp_rise_hc,temp_rise_hc_lc,temp_gap,cumulative_output_hc,cumulative_output_hc_lc,output_rel_diff,largest_group_hc,largest_group_hc_lc,top5_in_largest_hc,top5_in_largest_hc_lc\n",
    );
    for d in &outcome.summary.paired {
        let _ = writeln!(
            paired,
            "{},{},{},{},{},{},{},{},{},{},{}",
            d.seed,
            d.temp_rise_hc,
            d.temp_rise_hc_lc,
            d.temp_gap,
            d.cumulative_output_hc,
            d.cumulative_output_hc_lc,
            d.output_rel_diff,
            d.largest_group_hc,
            d.largest_group_hc_lc,
            d.top5_in_largest_hc,
            d.top5_in_largest_hc_lc
        );
    }
    let paired_path = out_dir.join("paired_deltas.csv");
    write_file(&paired_path, &paired)?;
    written.push(paired_path);

    let hc = &outcome.summary.aggregates[0];
    let lc = &outcome.summary.aggregates[1];
    let mut series = String::from("step,year,mean_mitigation_hc,mean_mitigation_hc_lc\n");
    for (step, (a, b)) in hc
        .mean_mitigation_by_step
        .iter()
        .zip(&lc.mean_mitigation_by_step)
        .enumerate()
    {
        let _ = writeln!(series, "{},{},{},{}", step, step as u32 * cfg.years_per_step, a, b);
    }
    let series_path = out_dir.join("mean_mitigation_series.csv");
    write_file(&series_path, &series)?;
    written.push(series_path);

    let file = ExperimentSummaryFile {
        seeds: &outcome.summary.seeds,
        runs: &outcome.summary.runs,
        aggregates: &outcome.summary.aggregates,
        paired: &outcome.summary.paired,
        config: cfg,
    };
    let text = toml::to_string(&file)
        .map_err(|e| SimError::Config(format!("summary serialization failed: {e}")))?;
    let summary_path = out_dir.join("experiment_summary.toml");
    write_file(&summary_path, &text)?;
    written.push(summary_path);

    Ok(written)
}
