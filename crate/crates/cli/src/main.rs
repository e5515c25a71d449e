use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use dqpe_core::estimation::{
    effective_fi, effective_fi_crb, fisher_matrix, fit_fringe, min_outcome_probability,
    theoretical_limits,
};
use dqpe_core::evolution::{apply_phases, PhaseVector};
use dqpe_core::goldens::{refresh_manifest, verify_goldens, Manifest, MANIFEST_PATH};
use dqpe_core::harness::output::{read_fringe_csv, render, write_artifacts, RenderOptions};
use dqpe_core::harness::{reproduce, run, HarnessError, OutputFormat, RunReport, ScenarioConfig};
use dqpe_core::probes::weights;

#[derive(Parser)]
#[command(name = "dqpe", version, about = "Distributed GHZ phase-estimation scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct OutputArgs {
    /// Replace the scenario's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for output files.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Also write SVG plots.
    #[arg(long)]
    svg: bool,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the phase sweep of a scenario file (TOML, or a JSON run report).
    Simulate {
        config: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Print the Fisher matrix and limits at the scenario's fixed phases.
    Fisher { config: PathBuf },
    /// Fit a fringe CSV with theta_hat, p_plus_sampled and p_minus_sampled columns.
    Fit {
        csv: PathBuf,
        /// Fringe phase per unit of theta_hat.
        #[arg(long)]
        multiplier: f64,
    },
    /// Run the repeated-estimation study of a scenario file.
    Estimate {
        config: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the bundled presets behind a figure: fig3, fig4, fig5 or ext1.
    Reproduce {
        figure: String,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Re-run every preset and compare against the golden manifest.
    VerifyGoldens {
        #[arg(long)]
        seed: Option<u64>,
        /// Rewrite the manifest digests instead of checking them.
        #[arg(long)]
        update: bool,
    },
}

fn options(cfg: &ScenarioConfig, args: &OutputArgs) -> RenderOptions {
    RenderOptions {
        format: match args.format {
            Some(Format::Csv) => OutputFormat::Csv,
            Some(Format::Json) => OutputFormat::Json,
            None => cfg.output.format,
        },
        svg: args.svg || cfg.output.svg,
    }
}

fn out_dir(cfg: &ScenarioConfig, args: &OutputArgs, fallback: &str) -> PathBuf {
    args.out_dir
        .clone()
        .or_else(|| cfg.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(fallback))
}

fn emit(report: &RunReport, dir: &Path, opts: RenderOptions) -> Result<(), HarnessError> {
    for path in write_artifacts(dir, &render(report, opts)?)? {
        println!("wrote {}", path.display());
    }
    if let Some(s) = &report.sweep {
        for f in &s.fringes {
            println!(
                "{} group {}: c = {}, V = ({:.4}, {:.4}), FI peak {:.3} [{:.3}, {:.3}], {:+.2} dB vs {}",
                report.config.name,
                f.group,
                f.multiplier,
                f.fit.v_plus,
                f.fit.v_minus,
                f.fi_peak_fit,
                f.fi_peak_lo90,
                f.fi_peak_hi90,
                f.db_vs_snl,
                f.snl_fi
            );
        }
        println!(
            "{}: total FI peak {:.3} (model {:.3}), {:+.2} dB vs {}",
            report.config.name, s.fi_peak_fit, s.fi_peak_model, s.db_vs_snl, s.snl_fi
        );
    }
    if let Some(e) = &report.estimation {
        for p in &e.points {
            let r = &p.result;
            println!(
                "{}: theta {:.5} -> {:.5}, std {:.5} ± {:.5}, crb {:.5}",
                report.config.name, r.theta_true, r.theta_hat, r.std_dev, r.std_dev_error, r.crb
            );
        }
    }
    Ok(())
}

fn load(path: &Path, seed: Option<u64>) -> Result<ScenarioConfig, HarnessError> {
    let mut cfg = ScenarioConfig::load(path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn print_json(value: &serde_json::Value) -> Result<(), HarnessError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| HarnessError::Io(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn fisher(path: &Path) -> Result<(), HarnessError> {
    let scenario = load(path, None)?.validate()?;
    let theta = PhaseVector::new(scenario.theta_fixed.clone())?;
    let alpha = weights(&scenario.layout);
    let evolved = apply_phases(&scenario.probe, &theta)?;
    let f = fisher_matrix(&scenario.probe, &scenario.layout, &theta)?;
    let crb_form = effective_fi_crb(&f, &alpha);
    let limit = theoretical_limits(scenario.config.strategy, &scenario.layout).ok();
    print_json(&json!({
        "theta": theta.values(),
        "alpha": alpha,
        "fisher": f,
        "effective_fi": effective_fi(&f, &alpha),
        "effective_fi_crb": crb_form.as_ref().ok(),
        "effective_fi_crb_error": crb_form.as_ref().err().map(|e| e.to_string()),
        "min_outcome_probability": min_outcome_probability(&evolved),
        "limit": limit,
    }))
}

fn goldens(seed: Option<u64>, update: bool) -> Result<bool, HarnessError> {
    let manifest = Manifest::bundled()?;
    if update {
        let text = refresh_manifest(&manifest)?.to_toml()?;
        std::fs::write(MANIFEST_PATH, text).map_err(|e| HarnessError::Io(format!("{MANIFEST_PATH}: {e}")))?;
        println!("updated {MANIFEST_PATH}");
        return Ok(true);
    }
    let outcomes = verify_goldens(&manifest, seed)?;
    for o in &outcomes {
        println!("{o}");
    }
    Ok(outcomes.iter().all(|o| o.passed()))
}

fn execute(cli: Cli) -> Result<bool, HarnessError> {
    match cli.command {
        Command::Simulate { config, output } => {
            let mut cfg = load(&config, output.seed)?;
            if cfg.sweep.is_none() {
                return Err(HarnessError::Config("sweep: simulate needs a [sweep] table".into()));
            }
            cfg.estimation = None;
            let report = run(&cfg.validate()?)?;
            emit(&report, &out_dir(&cfg, &output, "out"), options(&cfg, &output))?;
        }
        Command::Estimate { config, output } => {
            let mut cfg = load(&config, output.seed)?;
            if cfg.estimation.is_none() {
                return Err(HarnessError::Config(
                    "estimation: estimate needs an [estimation] table".into(),
                ));
            }
            cfg.sweep = None;
            let report = run(&cfg.validate()?)?;
            emit(&report, &out_dir(&cfg, &output, "out"), options(&cfg, &output))?;
        }
        Command::Fisher { config } => fisher(&config)?,
        Command::Fit { csv, multiplier } => {
            let fit = fit_fringe(&read_fringe_csv(&csv)?, multiplier)?;
            print_json(&json!({ "fit": fit, "visibility": fit.visibility() }))?;
        }
        Command::Reproduce { figure, output } => {
            let fallback = format!("out/{figure}");
            for report in reproduce(&figure, output.seed)? {
                let dir = out_dir(&report.config, &output, &fallback);
                emit(&report, &dir, options(&report.config, &output))?;
            }
        }
        Command::VerifyGoldens { seed, update } => return goldens(seed, update),
    }
    Ok(true)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
