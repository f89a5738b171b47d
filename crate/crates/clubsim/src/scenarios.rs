//! Region calibration loading, emissions/production ranking and the two
//! initial group configurations compared by the experiment harness.
//!
//! `hc` puts the five highest-ranked regions into one group and scatters the
//! rest over four more; `hc_lc` seeds five groups with one top region each
//! and fills them round-robin in rank order.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, SimError};
use crate::state::RegionParams;

/// The bundled 27-region calibration. Synthetic data: regional gross output,
/// emissions and population are set to 2015-era aggregates with DICE-style
/// growth and decline rates, normalized so the world totals are realistic.
/// See the data README for construction details.
const DEFAULT_CALIBRATION: &str = include_str!("../data/calibration_27.csv");

const COLUMNS: [&str; 12] = [
    "region",
    "tfp_initial",
    "tfp_growth_initial",
    "tfp_growth_decline",
    "capital_initial",
    "labor_initial",
    "labor_asymptote",
    "labor_convergence",
    "carbon_intensity_initial",
    "carbon_intensity_decline",
    "abatement_cost_coeff",
    "emissions_initial",
];

/// One region's position in the emissions/production ranking.
#[derive(Debug, Clone, PartialEq)]
pub struct RankingScore {
    pub agent: usize,
    pub emissions_initial: f64,
    pub output_initial: f64,
    /// Equal-weight sum of min-max normalized emissions and output.
    pub composite_score: f64,
}

/// Loads and validates a calibration file. Row order defines agent ids.
pub fn load_calibration(path: &Path) -> Result<Vec<RegionParams>> {
    let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
    parse_calibration(&text, &path.display().to_string())
}

/// The calibration compiled into the binary; used when no file is given.
pub fn default_calibration() -> Vec<RegionParams> {
    parse_calibration(DEFAULT_CALIBRATION, "<bundled>")
        .expect("bundled calibration must parse")
}

fn parse_calibration(text: &str, path: &str) -> Result<Vec<RegionParams>> {
    let cal_err = |row: usize, column: &str, message: String| SimError::Calibration {
        path: path.to_string(),
        row,
        column: column.to_string(),
        message,
    };

    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let headers = reader
        .headers()
        .map_err(|e| cal_err(0, "<header>", e.to_string()))?
        .clone();
    for expected in COLUMNS {
        if !headers.iter().any(|h| h == expected) {
            return Err(cal_err(0, expected, "missing column".into()));
        }
    }
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();

    let mut params = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for (idx, record) in reader.records().enumerate() {
        let row = idx + 1; // 1-based data rows, header is row 0
        let record = record.map_err(|e| cal_err(row, "<row>", e.to_string()))?;
        let field = |name: &str| -> Result<f64> {
            let raw = record
                .get(col(name))
                .ok_or_else(|| cal_err(row, name, "missing cell".into()))?;
            if raw.is_empty() {
                return Err(cal_err(row, name, "empty cell".into()));
            }
            raw.parse::<f64>()
                .map_err(|_| cal_err(row, name, format!("non-numeric value {raw:?}")))
        };
        let name = record
            .get(col("region"))
            .ok_or_else(|| cal_err(row, "region", "missing cell".into()))?
            .to_string();
        if name.is_empty() {
            return Err(cal_err(row, "region", "empty region name".into()));
        }
        if !seen.insert(name.clone()) {
            return Err(cal_err(row, "region", format!("duplicate region name {name:?}")));
        }
        let p = RegionParams {
            name,
            tfp_initial: field("tfp_initial")?,
            tfp_growth_initial: field("tfp_growth_initial")?,
            tfp_growth_decline: field("tfp_growth_decline")?,
            capital_initial: field("capital_initial")?,
            labor_initial: field("labor_initial")?,
            labor_asymptote: field("labor_asymptote")?,
            labor_convergence: field("labor_convergence")?,
            carbon_intensity_initial: field("carbon_intensity_initial")?,
            carbon_intensity_decline: field("carbon_intensity_decline")?,
            abatement_cost_coeff: field("abatement_cost_coeff")?,
            emissions_initial: field("emissions_initial")?,
        };
        p.validate(idx)?;
        params.push(p);
    }
    if params.is_empty() {
        return Err(cal_err(1, "<file>", "no data rows".into()));
    }
    Ok(params)
}

fn min_max_normalize(values: &[f64]) -> Vec<f64> {
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == min {
        return vec![0.5; values.len()];
    }
    values.iter().map(|v| (v - min) / (max - min)).collect()
}

/// Ranks regions by the equal-weight composite of min-max normalized initial
/// emissions and initial gross output, descending; ties break by ascending
/// agent id. The result is a permutation of `0..N`.
pub fn rank_regions(params: &[RegionParams], capital_elasticity: f64) -> Vec<RankingScore> {
    let emissions: Vec<f64> = params.iter().map(|p| p.emissions_initial).collect();
    let outputs: Vec<f64> = params
        .iter()
        .map(|p| {
            crate::dynamics::gross_output(
                p.tfp_initial,
                p.capital_initial,
                p.labor_initial,
                capital_elasticity,
            )
        })
        .collect();
    let norm_e = min_max_normalize(&emissions);
    let norm_o = min_max_normalize(&outputs);
    let mut scores: Vec<RankingScore> = (0..params.len())
        .map(|i| RankingScore {
            agent: i,
            emissions_initial: emissions[i],
            output_initial: outputs[i],
            composite_score: 0.5 * norm_e[i] + 0.5 * norm_o[i],
        })
        .collect();
    scores.sort_by(|a, b| {
        b.composite_score
            .partial_cmp(&a.composite_score)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.agent.cmp(&b.agent))
    });
    scores
}

/// Agent ids in rank order, highest first.
pub fn ranked_ids(ranking: &[RankingScore]) -> Vec<usize> {
    ranking.iter().map(|r| r.agent).collect()
}

/// "High carbon together": the top five ranked agents share group 1, every
/// remaining agent draws a uniform group from {2, 3, 4, 5} using the seeded
/// generator. Remaining agents consume draws in ascending agent id order, so
/// the assignment is a pure function of (ranking, seed).
pub fn init_hc(ranked: &[usize], seed: u64) -> Result<Vec<u32>> {
    let n = ranked.len();
    if n < 9 {
        return Err(SimError::Scenario(format!(
            "hc needs at least 9 agents (5 leaders plus 4 groups), got {n}"
        )));
    }
    let top5: std::collections::BTreeSet<usize> = ranked[..5].iter().cloned().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0u32; n];
    for agent in 0..n {
        assignment[agent] = if top5.contains(&agent) {
            1
        } else {
            rng.gen_range(2..=5)
        };
    }
    Ok(assignment)
}

/// "High carbon spread over low carbon": ranked agent r (1-based) goes to
/// group ((r - 1) mod 5) + 1, so the top five seed five distinct groups and
/// the rest fill them round-robin in rank order. Fully deterministic.
pub fn init_hc_lc(ranked: &[usize]) -> Result<Vec<u32>> {
    let n = ranked.len();
    if n < 5 {
        return Err(SimError::Scenario(format!(
            "hc_lc needs at least 5 agents, got {n}"
        )));
    }
    let mut assignment = vec![0u32; n];
    for (pos, &agent) in ranked.iter().enumerate() {
        assignment[agent] = (pos % 5) as u32 + 1;
    }
    Ok(assignment)
}
