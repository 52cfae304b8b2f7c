//! Runs every (sweep value, engine) cell of a scenario and writes its files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use amrtriad::analysis::{post_burn_in_mean, stationary_histogram};
use amrtriad::fde::CaputoProblem;
use amrtriad::sde::{GENERATOR_ID, NoisePlan, simulate_ensemble};
use amrtriad::{
    Engine, Execution, Histogram, ModelParams, Outcome, OutcomeKind, Regime, ThresholdReport,
    Trajectory, classify_outcome, compute_thresholds, integrate_caputo, integrate_ode,
    simulate_path,
};
use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::{ScenarioConfig, SweepParameter, to_flat};
use crate::output::{Series, Written, histogram_csv, histogram_plot, line_plot, trajectory_csv};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cell {
    pub engine: Engine,
    /// The swept value, or `None` for an engine the sweep does not touch.
    pub sweep_value: Option<f64>,
    pub params: ModelParams,
}

/// Compact rendering of a swept value for labels and file names.
pub fn sweep_label(v: f64) -> String {
    if v != 0.0 && v.abs() < 1e-3 {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

impl Cell {
    fn label(&self, sweep: Option<SweepParameter>) -> String {
        match (sweep, self.sweep_value) {
            (Some(p), Some(v)) => format!("{}={}", p.name(), sweep_label(v)),
            _ => self.engine.name().to_string(),
        }
    }

    fn file_stem(&self, stem: &str, sweep: Option<SweepParameter>) -> String {
        match (sweep, self.sweep_value) {
            (Some(p), Some(v)) => {
                format!("{stem}_{}_{}{}", self.engine.name(), p.name(), sweep_label(v))
            }
            _ => format!("{stem}_{}", self.engine.name()),
        }
    }
}

/// The cells in run order: engines outermost, then sweep values. An engine
/// the swept parameter does not affect runs once.
pub fn plan(cfg: &ScenarioConfig) -> Vec<Cell> {
    let mut cells = Vec::new();
    for &engine in &cfg.engines {
        match &cfg.sweep {
            Some(s) if s.parameter.affects(engine) => {
                for &v in &s.values {
                    cells.push(Cell {
                        engine,
                        sweep_value: Some(v),
                        params: s.parameter.apply(cfg.params, v),
                    });
                }
            }
            _ => cells.push(Cell {
                engine,
                sweep_value: None,
                params: cfg.params,
            }),
        }
    }
    cells
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct OutcomeCounts {
    pub extinct: usize,
    pub persistent: usize,
    pub indeterminate: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnsembleSummary {
    pub n_paths: usize,
    pub base_seed: u64,
    pub post_burn_in_mean: f64,
    pub histogram_mean: f64,
    pub path_outcomes: OutcomeCounts,
    pub histogram_csv: String,
    pub histogram_svg: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CellReport {
    pub engine: Engine,
    pub sweep_value: Option<f64>,
    pub params: ModelParams,
    pub thresholds: ThresholdReport,
    /// For an ensemble: the outcome of the per-time mean path.
    pub outcome: Outcome,
    pub clamp_events: u64,
    pub csv: String,
    pub ensemble: Option<EnsembleSummary>,
    pub annotations: Vec<String>,
    pub runtime_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ThresholdRow {
    pub sweep_value: Option<f64>,
    pub params: ModelParams,
    pub thresholds: ThresholdReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct Runtime {
    pub total_ms: f64,
    pub threads: usize,
    pub parallel: bool,
    pub generator: &'static str,
    pub version: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub name: String,
    /// Every key with its effective value.
    pub config: BTreeMap<String, toml::Value>,
    pub horizon_note: String,
    pub thresholds: Vec<ThresholdRow>,
    pub cells: Vec<CellReport>,
    pub figures: Vec<String>,
    pub runtime: Runtime,
}

impl RunReport {
    pub fn all_as_expected(&self) -> bool {
        self.cells.iter().all(|c| matches_expectation(&c.outcome))
    }
}

fn matches_expectation(o: &Outcome) -> bool {
    matches!(
        (o.expected, o.kind),
        (Regime::Extinction, OutcomeKind::Extinct)
            | (Regime::Persistence, OutcomeKind::Persistent)
            | (Regime::Indeterminate, _)
    )
}

/// Threshold reports for each sweep value (or the base parameters).
pub fn threshold_rows(cfg: &ScenarioConfig) -> Result<Vec<ThresholdRow>> {
    let points: Vec<(Option<f64>, ModelParams)> = match &cfg.sweep {
        Some(s) => s
            .values
            .iter()
            .map(|&v| (Some(v), s.parameter.apply(cfg.params, v)))
            .collect(),
        None => vec![(None, cfg.params)],
    };
    points
        .into_iter()
        .map(|(sweep_value, params)| {
            Ok(ThresholdRow {
                sweep_value,
                params,
                thresholds: compute_thresholds(&params)?,
            })
        })
        .collect()
}

fn annotations(cell: &Cell, r0: f64, th: &ThresholdReport) -> Vec<String> {
    let mut notes = Vec::new();
    match cell.engine {
        Engine::Sde => {
            if th.regime_s == Regime::Extinction && !th.noise_bound_holds {
                notes.push(
                    "outside theorem hypothesis: sigma^2 N > beta, almost-sure extinction is not guaranteed"
                        .to_string(),
                );
            }
            if th.regime_d == Regime::Persistence && th.regime_s != Regime::Persistence {
                notes.push(format!(
                    "outside theorem hypothesis: K0s = {:.6} <= 1, persistence in mean is not guaranteed",
                    th.k0_s
                ));
            }
        }
        Engine::Fde => {
            if r0 >= th.k0_f {
                notes.push(format!(
                    "R0 = {r0} lies outside the stated invariance interval (0, K0f = {:.6})",
                    th.k0_f
                ));
            }
            if th.regime_f == Regime::Persistence && !th.fractional_side_condition {
                notes.push("fractional persistence side condition does not hold".to_string());
            }
        }
        Engine::Ode => {}
    }
    notes
}

struct CellRun {
    report: CellReport,
    /// Curve for the combined plot.
    curve: Vec<(f64, f64)>,
    histogram: Option<Histogram>,
    csv_text: String,
}

fn count_outcomes(paths: &[Trajectory], p: &ModelParams) -> OutcomeCounts {
    let mut c = OutcomeCounts {
        extinct: 0,
        persistent: 0,
        indeterminate: 0,
    };
    for path in paths {
        match classify_outcome(path, p).kind {
            OutcomeKind::Extinct => c.extinct += 1,
            OutcomeKind::Persistent => c.persistent += 1,
            OutcomeKind::Indeterminate => c.indeterminate += 1,
        }
    }
    c
}

fn run_cell(cfg: &ScenarioConfig, cell: &Cell) -> Result<CellRun> {
    let start = Instant::now();
    let sweep = cfg.sweep.as_ref().map(|s| s.parameter);
    let stem = cell.file_stem(&cfg.outputs.csv, sweep);
    let csv_name = format!("{stem}.csv");
    let thresholds = compute_thresholds(&cell.params)?;
    let p = &cell.params;

    let (outcome, clamp_events, csv_text, curve, histogram, ensemble) = match (cell.engine, &cfg.ensemble) {
        (Engine::Sde, Some(spec)) => {
            let ens = simulate_ensemble(p, cfg.r0, &cfg.grid, spec.n_paths, spec.base_seed)?;
            let mean_path = Trajectory {
                times: ens.paths[0].times.clone(),
                values: ens.per_time_mean.clone(),
                params: *p,
                engine: Engine::Sde,
                seed: None,
                clamp_events: 0,
            };
            let hist = stationary_histogram(&ens, spec.burn_in, spec.n_bins)?;
            let hist_stem = sweep
                .zip(cell.sweep_value)
                .map(|(s, v)| format!("{}_{}{}", cfg.outputs.svg, s.name(), sweep_label(v)))
                .unwrap_or_else(|| cfg.outputs.svg.clone());
            let summary = EnsembleSummary {
                n_paths: ens.n_paths,
                base_seed: ens.base_seed,
                post_burn_in_mean: post_burn_in_mean(&ens, spec.burn_in)?,
                histogram_mean: hist.mean(),
                path_outcomes: count_outcomes(&ens.paths, p),
                histogram_csv: format!("{hist_stem}_histogram.csv"),
                histogram_svg: format!("{hist_stem}_histogram.svg"),
            };
            let shown = ens.paths.iter().take(spec.paths_in_csv).enumerate();
            let text = trajectory_csv(shown)?;
            (
                classify_outcome(&mean_path, p),
                ens.clamp_events(),
                text,
                mean_path.points().collect(),
                Some(hist),
                Some(summary),
            )
        }
        (engine, _) => {
            let traj = match engine {
                Engine::Ode => integrate_ode(p, cfg.r0, &cfg.grid)?,
                Engine::Sde => simulate_path(p, cfg.r0, &cfg.grid, &NoisePlan::new(cfg.seed))?,
                Engine::Fde => integrate_caputo(&CaputoProblem::new(*p, cfg.r0, cfg.grid))?,
            };
            let text = trajectory_csv([(0, &traj)])?;
            (
                classify_outcome(&traj, p),
                traj.clamp_events,
                text,
                traj.points().collect(),
                None,
                None,
            )
        }
    };

    Ok(CellRun {
        report: CellReport {
            engine: cell.engine,
            sweep_value: cell.sweep_value,
            params: *p,
            thresholds,
            outcome,
            clamp_events,
            csv: csv_name,
            ensemble,
            annotations: annotations(cell, cfg.r0, &thresholds),
            runtime_ms: start.elapsed().as_secs_f64() * 1e3,
        },
        curve,
        histogram,
        csv_text,
    })
}

fn cell_coordinates(cfg: &ScenarioConfig, cell: &Cell) -> String {
    let sweep = cfg.sweep.as_ref().map(|s| s.parameter);
    match (sweep, cell.sweep_value) {
        (Some(s), Some(v)) => {
            format!("cell engine={} {}={}", cell.engine.name(), s.name(), sweep_label(v))
        }
        _ => format!("cell engine={}", cell.engine.name()),
    }
}

/// One plot per engine the sweep affects; unaffected engines are drawn as
/// dashed reference curves in each of them.
fn figures(cfg: &ScenarioConfig, cells: &[Cell], runs: &[CellRun]) -> Vec<(String, String)> {
    let sweep = cfg.sweep.as_ref().map(|s| s.parameter);
    let swept: Vec<Engine> = cfg
        .engines
        .iter()
        .copied()
        .filter(|&e| cells.iter().any(|c| c.engine == e && c.sweep_value.is_some()))
        .collect();
    let reference: Vec<Series> = cells
        .iter()
        .zip(runs)
        .filter(|(c, _)| sweep.is_some() && c.sweep_value.is_none())
        .map(|(c, r)| Series {
            label: c.engine.name().to_string(),
            points: r.curve.clone(),
            dashed: true,
        })
        .collect();
    let groups: Vec<Option<Engine>> = if swept.is_empty() {
        vec![None]
    } else {
        swept.into_iter().map(Some).collect()
    };
    let mut out = Vec::new();
    for group in groups {
        let mut series: Vec<Series> = cells
            .iter()
            .zip(runs)
            .filter(|(c, _)| match group {
                Some(e) => c.engine == e && c.sweep_value.is_some(),
                None => true,
            })
            .map(|(c, r)| Series {
                label: if group.is_some() {
                    c.label(sweep)
                } else {
                    c.engine.name().to_string()
                },
                points: r.curve.clone(),
                dashed: false,
            })
            .collect();
        if series.is_empty() {
            continue;
        }
        let (file, title) = match group {
            Some(e) => {
                series.extend(reference.iter().map(|s| Series {
                    label: s.label.clone(),
                    points: s.points.clone(),
                    dashed: true,
                }));
                let mean = if cfg.ensemble.is_some() { " (ensemble mean)" } else { "" };
                (
                    format!("{}_{}.svg", cfg.outputs.svg, e.name()),
                    format!("{}: {}{mean}", cfg.name, e.name()),
                )
            }
            None => (format!("{}.svg", cfg.outputs.svg), cfg.name.clone()),
        };
        out.push((file, line_plot(&title, &series)));
    }
    out
}

fn horizon_note(cfg: &ScenarioConfig) -> String {
    format!(
        "horizon t in [{}, {}] with dt = {}, every {} step(s) stored; chosen by this tool, not taken from the source figures",
        cfg.grid.t0, cfg.grid.t_end, cfg.grid.dt, cfg.grid.stride
    )
}

/// Runs all cells, writes CSVs, plots and the JSON report into `out_dir`.
/// On any failure every file this run wrote is removed again.
pub fn run_scenario(cfg: &ScenarioConfig, out_dir: &Path) -> Result<RunReport> {
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;
    let mut written = Written::default();
    let result = run_inner(cfg, out_dir, &mut written);
    if result.is_err() {
        written.remove_all();
    }
    result
}

fn run_inner(cfg: &ScenarioConfig, out_dir: &Path, written: &mut Written) -> Result<RunReport> {
    let start = Instant::now();
    let path = |name: &str| -> PathBuf { out_dir.join(name) };
    let cells = plan(cfg);
    let runs = Execution::Parallel.try_map(cells.len(), |i| {
        run_cell(cfg, &cells[i]).with_context(|| cell_coordinates(cfg, &cells[i]))
    })?;

    for run in &runs {
        written.write(path(&run.report.csv), &run.csv_text)?;
        if let (Some(h), Some(e)) = (&run.histogram, &run.report.ensemble) {
            written.write(path(&e.histogram_csv), &histogram_csv(h)?)?;
            let title = format!(
                "{}: {} (mean {:.0})",
                cfg.name,
                e.histogram_csv.trim_end_matches("_histogram.csv"),
                h.sample_mean
            );
            written.write(path(&e.histogram_svg), &histogram_plot(&title, h))?;
        }
    }
    let mut figure_files = Vec::new();
    if !cells.is_empty() {
        for (file, svg) in figures(cfg, &cells, &runs) {
            written.write(path(&file), &svg)?;
            figure_files.push(file);
        }
    }

    let report = RunReport {
        name: cfg.name.clone(),
        config: to_flat(cfg),
        horizon_note: horizon_note(cfg),
        thresholds: threshold_rows(cfg)?,
        cells: runs.into_iter().map(|r| r.report).collect(),
        figures: figure_files,
        runtime: Runtime {
            total_ms: start.elapsed().as_secs_f64() * 1e3,
            threads: rayon::current_num_threads(),
            parallel: Execution::Parallel.is_parallel(),
            generator: GENERATOR_ID,
            version: env!("CARGO_PKG_VERSION"),
        },
    };
    let json = serde_json::to_string_pretty(&report)? + "\n";
    written.write(path(&cfg.outputs.report), &json)?;
    Ok(report)
}
