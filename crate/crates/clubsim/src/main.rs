use std::error::Error as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use clubsim::config::{Scenario, SimConfig};
use clubsim::error::Result;
use clubsim::export::{export_experiment, export_run};
use clubsim::harness::{load_configured_calibration, run_episode, run_experiment};
use clubsim::scenarios::{rank_regions, ranked_ids};
use clubsim::state::{new_world, ClimateState};

/// Climate-club negotiation simulator.
#[derive(Parser)]
#[command(name = "clubsim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one seeded episode and export its metrics, groups and summary.
    Run(CommonArgs),
    /// Run the hc vs hc_lc comparison over every configured seed.
    Experiment(CommonArgs),
    /// Check the config and calibration without running anything.
    Validate(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// TOML config file; unset fields fall back to defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Initial group configuration: hc, hc_lc or none.
    #[arg(long)]
    scenario: Option<String>,
    /// Comma-separated list of episode seeds.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Number of simulation steps.
    #[arg(long)]
    steps: Option<u32>,
    /// Output directory for result files.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Region calibration CSV; bundled 27-region data when unset.
    #[arg(long)]
    calibration: Option<PathBuf>,
}

impl CommonArgs {
    fn build_config(&self) -> Result<SimConfig> {
        let mut cfg = match &self.config {
            Some(path) => SimConfig::from_file(path)?,
            None => SimConfig::default(),
        };
        if let Some(s) = &self.scenario {
            cfg.scenario = s.parse::<Scenario>()?;
        }
        if let Some(seeds) = &self.seeds {
            cfg.seeds = seeds.clone();
        }
        if let Some(steps) = self.steps {
            cfg.steps = steps;
        }
        if let Some(out) = &self.out {
            cfg.out_dir = out.clone();
        }
        if let Some(cal) = &self.calibration {
            cfg.calibration = Some(cal.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => {
            let cfg = args.build_config()?;
            let seed = cfg.seeds[0];
            let trajectory = run_episode(&cfg, seed)?;
            let paths = export_run(&trajectory, &cfg, &cfg.out_dir)?;
            let last = trajectory.metrics.last().unwrap();
            println!(
                "run complete: scenario {} seed {} | year {} temp rise {:.3} C | mean mitigation {:.3} | largest group {}",
                trajectory.scenario,
                seed,
                last.year,
                last.temp_rise,
                last.mean_mitigation,
                last.largest_group_size
            );
            for p in paths {
                println!("wrote {}", p.display());
            }
            Ok(())
        }
        Command::Experiment(args) => {
            let cfg = args.build_config()?;
            let outcome = run_experiment(&cfg)?;
            let paths = export_experiment(&outcome, &cfg, &cfg.out_dir)?;
            for agg in &outcome.summary.aggregates {
                println!(
                    "{}: mean final temp rise {:.3} C | mean cumulative output {:.1} | mean largest group {:.2} | mean top5 in largest {:.2}",
                    agg.scenario,
                    agg.mean_final_temp_rise,
                    agg.mean_cumulative_gross_output,
                    agg.mean_final_largest_group,
                    agg.mean_final_top5_in_largest
                );
            }
            let cooler = outcome
                .summary
                .paired
                .iter()
                .filter(|d| d.temp_rise_hc_lc < d.temp_rise_hc)
                .count();
            println!(
                "hc_lc cooler than hc in {}/{} seeds",
                cooler,
                outcome.summary.paired.len()
            );
            for p in paths {
                println!("wrote {}", p.display());
            }
            Ok(())
        }
        Command::Validate(args) => {
            let cfg = args.build_config()?;
            let params = load_configured_calibration(&cfg)?;
            let world = new_world(&params, ClimateState::default_start())?;
            world.validate()?;
            let ranking = rank_regions(&params, cfg.dynamics.capital_elasticity);
            let ranked = ranked_ids(&ranking);
            let top: Vec<&str> = ranked
                .iter()
                .take(5)
                .map(|&i| params[i].name.as_str())
                .collect();
            println!(
                "configuration ok: {} regions, scenario {}, {} steps x {} years, {} seed(s)",
                params.len(),
                cfg.scenario,
                cfg.steps,
                cfg.years_per_step,
                cfg.seeds.len()
            );
            println!("top-ranked regions: {}", top.join(", "));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are not errors
            if e.use_stderr() {
                let _ = e.print();
                return ExitCode::from(1);
            }
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = e.source();
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
