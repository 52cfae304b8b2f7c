use std::path::{Path, PathBuf};
use std::process::ExitCode;

use amrtriad::Regime;
use amrtriad_cli::config::{self, ScenarioConfig, from_flat, parse_flat, to_flat};
use amrtriad_cli::runner::{RunReport, sweep_label, threshold_rows};
use amrtriad_cli::{preset, run_scenario, validate};
use anyhow::{Context, Result, bail};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "amrtriad", version, about = "Simulate the resistance-reversal model")]
struct Cli {
    /// Scenario document (flat `key = value` lines).
    #[arg(long, global = true, env = "AMRTRIAD_CONFIG")]
    config: Option<PathBuf>,
    /// Directory for CSV, SVG and report files.
    #[arg(long, global = true, env = "AMRTRIAD_OUT", default_value = "out")]
    out: PathBuf,
    /// Overrides `seed` and `ensemble.base_seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for sweep cells and ensemble paths.
    #[arg(long, global = true, env = "AMRTRIAD_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print thresholds and equilibria (the thresholds-table preset by default).
    Thresholds,
    /// Run every cell of a scenario.
    Simulate,
    /// Run a scenario that has an ensemble section.
    Ensemble,
    /// Run a published figure setup.
    Figure {
        /// figure1..figure5 or thresholds-table
        preset: String,
    },
    /// Check the library against independent oracles.
    Validate,
}

/// Environment overrides, then `--seed`, on top of a parsed document.
fn finish(mut map: std::collections::BTreeMap<String, toml::Value>, seed: Option<u64>) -> Result<ScenarioConfig> {
    config::apply_env(&mut map, std::env::vars())?;
    if let Some(s) = seed {
        map.insert("seed".into(), config::seed_value(s));
        if map.keys().any(|k| k.starts_with("ensemble.")) {
            map.insert("ensemble.base_seed".into(), config::seed_value(s));
        }
    }
    Ok(from_flat(map)?)
}

fn load_file(path: &Path, seed: Option<u64>) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    finish(parse_flat(&text)?, seed).with_context(|| format!("in {}", path.display()))
}

fn load_preset(name: &str, seed: Option<u64>) -> Result<Vec<ScenarioConfig>> {
    preset(name)?
        .iter()
        .map(|cfg| finish(to_flat(cfg), seed))
        .collect()
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into())
}

fn regime(r: Regime) -> &'static str {
    match r {
        Regime::Extinction => "extinction",
        Regime::Persistence => "persistence",
        Regime::Indeterminate => "boundary",
    }
}

fn print_thresholds(cfg: &ScenarioConfig) -> Result<()> {
    let param = cfg.sweep.as_ref().map(|s| s.parameter.name()).unwrap_or("-");
    println!(
        "{param:>8} {:>10} {:>10} {:>10} {:>14} {:>14}  regimes d/s/f",
        "K0d", "K0s", "K0f", "xi_d", "xi_s"
    );
    for row in threshold_rows(cfg)? {
        let t = &row.thresholds;
        println!(
            "{:>8} {:>10.6} {:>10.6} {:>10.6} {:>14} {:>14}  {}/{}/{}",
            opt(row.sweep_value),
            t.k0_d,
            t.k0_s,
            t.k0_f,
            opt(t.xi_d),
            opt(t.xi_s),
            regime(t.regime_d),
            regime(t.regime_s),
            regime(t.regime_f)
        );
    }
    Ok(())
}

fn summarize(report: &RunReport, out: &Path) {
    println!("{}: {} cell(s)", report.name, report.cells.len());
    for c in &report.cells {
        let sweep = c.sweep_value.map(|v| format!(" {}", sweep_label(v))).unwrap_or_default();
        println!(
            "  {}{sweep}: {:?} (threshold predicts {}), R(end)={:.6e} -> {}",
            c.engine.name(),
            c.outcome.kind,
            regime(c.outcome.expected),
            c.outcome.terminal_value,
            c.csv
        );
        if let Some(e) = &c.ensemble {
            println!(
                "    {} paths, post-burn-in mean {:.1}, histogram {}",
                e.n_paths, e.post_burn_in_mean, e.histogram_csv
            );
        }
        for note in &c.annotations {
            println!("    note: {note}");
        }
    }
    for f in &report.figures {
        println!("  figure {}", out.join(f).display());
    }
    println!("  report {}", out.join(report.config["output.report"].as_str().unwrap_or_default()).display());
}

fn run(cli: Cli) -> Result<bool> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match cli.command {
        Command::Thresholds => {
            let cfgs = match &cli.config {
                Some(path) => vec![load_file(path, cli.seed)?],
                None => load_preset("thresholds-table", cli.seed)?,
            };
            for cfg in &cfgs {
                print_thresholds(cfg)?;
            }
        }
        Command::Simulate | Command::Ensemble => {
            let Some(path) = &cli.config else {
                bail!("--config PATH is required");
            };
            let cfg = load_file(path, cli.seed)?;
            if matches!(cli.command, Command::Ensemble) && cfg.ensemble.is_none() {
                bail!("ensemble: {} has no ensemble.* keys", path.display());
            }
            let report = run_scenario(&cfg, &cli.out)?;
            summarize(&report, &cli.out);
        }
        Command::Figure { preset } => {
            for cfg in load_preset(&preset, cli.seed)? {
                let report = run_scenario(&cfg, &cli.out)?;
                summarize(&report, &cli.out);
            }
        }
        Command::Validate => {
            let checks = validate::run_all();
            for c in &checks {
                println!("{} {} {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            return Ok(checks.iter().all(|c| c.pass));
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
