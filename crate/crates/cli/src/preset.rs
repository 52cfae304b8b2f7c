//! The published figure setups as ready-made scenarios.

use amrtriad::{Engine, ModelParams, TimeGrid};
use thiserror::Error;

use crate::config::{EnsembleSpec, Outputs, ScenarioConfig, Sweep, SweepParameter, DEFAULT_SEED};

pub const PRESETS: &[&str] = &[
    "figure1",
    "figure2",
    "figure3",
    "figure4",
    "figure5",
    "thresholds-table",
];

pub const EXTINCTION_HORIZON: f64 = 50.0;
pub const PERSISTENCE_HORIZON: f64 = 200.0;
pub const ENSEMBLE_HORIZON: f64 = 300.0;

const N: f64 = 1e6;

#[derive(Debug, Error, PartialEq)]
#[error("unknown preset `{0}` (expected one of figure1..figure5, thresholds-table)")]
pub struct UnknownPreset(pub String);

fn grid(t_end: f64, dt: f64, stride: usize) -> TimeGrid {
    TimeGrid::span(t_end, dt).unwrap().with_stride(stride).unwrap()
}

fn scenario(
    name: &str,
    engines: &[Engine],
    params: ModelParams,
    r0: f64,
    grid: TimeGrid,
    sweep: Option<Sweep>,
) -> ScenarioConfig {
    ScenarioConfig {
        name: name.into(),
        engines: engines.to_vec(),
        seed: DEFAULT_SEED,
        params,
        r0,
        grid,
        sweep,
        ensemble: None,
        outputs: Outputs {
            csv: name.into(),
            svg: name.into(),
            report: format!("{name}.report.json"),
        },
    }
}

fn sweep(parameter: SweepParameter, values: &[f64]) -> Option<Sweep> {
    Some(Sweep {
        parameter,
        values: values.to_vec(),
    })
}

const ALL: &[Engine] = &[Engine::Ode, Engine::Sde, Engine::Fde];
const GAMMA_EXTINCTION: &[f64] = &[1.0, 1.25, 1.5, 1.75, 2.0];
const GAMMA_PERSISTENCE: &[f64] = &[0.0, 0.1, 0.2, 0.3, 0.4];

/// The panels of a preset. Figures 3 and 4 have an extinction and a
/// persistence panel; the rest have one.
pub fn preset(name: &str) -> Result<Vec<ScenarioConfig>, UnknownPreset> {
    let panels = match name {
        "figure1" => vec![scenario(
            "figure1",
            ALL,
            ModelParams::table(GAMMA_EXTINCTION[0], 1e-6, 0.7),
            N - 1.0,
            grid(EXTINCTION_HORIZON, 0.01, 10),
            sweep(SweepParameter::Gamma, GAMMA_EXTINCTION),
        )],
        "figure2" => vec![scenario(
            "figure2",
            ALL,
            ModelParams::table(GAMMA_PERSISTENCE[0], 1e-6, 0.7),
            1.0,
            grid(PERSISTENCE_HORIZON, 0.01, 100),
            sweep(SweepParameter::Gamma, GAMMA_PERSISTENCE),
        )],
        "figure3" => {
            let sigmas = [1e-6, 2e-6, 3e-6, 4e-6, 5e-6];
            vec![
                scenario(
                    "figure3-extinction",
                    &[Engine::Ode, Engine::Sde],
                    ModelParams::table(2.0, sigmas[0], 1.0),
                    N - 1.0,
                    grid(EXTINCTION_HORIZON, 1e-3, 100),
                    sweep(SweepParameter::Sigma, &sigmas),
                ),
                scenario(
                    "figure3-persistence",
                    &[Engine::Ode, Engine::Sde],
                    ModelParams::table(0.0, sigmas[0], 1.0),
                    1.0,
                    grid(PERSISTENCE_HORIZON, 1e-3, 1000),
                    sweep(SweepParameter::Sigma, &sigmas),
                ),
            ]
        }
        "figure4" => {
            let alphas = [0.5, 0.6, 0.7, 0.8];
            vec![
                scenario(
                    "figure4-extinction",
                    &[Engine::Fde],
                    ModelParams::table(1.5, 0.0, alphas[0]),
                    N - 1.0,
                    grid(EXTINCTION_HORIZON, 0.01, 10),
                    sweep(SweepParameter::Alpha, &alphas),
                ),
                scenario(
                    "figure4-persistence",
                    &[Engine::Fde],
                    ModelParams::table(0.2, 0.0, alphas[0]),
                    1.0,
                    grid(PERSISTENCE_HORIZON, 0.01, 100),
                    sweep(SweepParameter::Alpha, &alphas),
                ),
            ]
        }
        "figure5" => {
            let mut cfg = scenario(
                "figure5",
                &[Engine::Sde],
                ModelParams::table(GAMMA_PERSISTENCE[0], 1e-7, 1.0),
                N - 1.0,
                grid(ENSEMBLE_HORIZON, 0.01, 10),
                sweep(SweepParameter::Gamma, GAMMA_PERSISTENCE),
            );
            cfg.ensemble = Some(EnsembleSpec {
                n_paths: 200,
                base_seed: DEFAULT_SEED,
                burn_in: amrtriad::analysis::DEFAULT_BURN_IN,
                n_bins: amrtriad::analysis::DEFAULT_BINS,
                paths_in_csv: 5,
            });
            vec![cfg]
        }
        "thresholds-table" => {
            let gammas: Vec<f64> = (0..=20).map(|i| f64::from(i) / 10.0).collect();
            vec![scenario(
                "thresholds-table",
                &[],
                ModelParams::table(0.0, 1e-7, 0.7),
                N - 1.0,
                grid(EXTINCTION_HORIZON, 0.01, 1),
                sweep(SweepParameter::Gamma, &gammas),
            )]
        }
        other => return Err(UnknownPreset(other.into())),
    };
    Ok(panels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_name_resolves() {
        for name in PRESETS {
            let panels = preset(name).unwrap();
            assert!(!panels.is_empty());
            for p in &panels {
                p.params.validate().unwrap();
            }
        }
        assert_eq!(preset("figure6"), Err(UnknownPreset("figure6".into())));
    }

    #[test]
    fn figure_setups() {
        let f2 = &preset("figure2").unwrap()[0];
        assert_eq!(f2.sweep.as_ref().unwrap().values, [0.0, 0.1, 0.2, 0.3, 0.4]);
        assert_eq!(f2.r0, 1.0);
        let f4 = preset("figure4").unwrap();
        assert_eq!(f4.len(), 2);
        assert_eq!(f4[0].sweep.as_ref().unwrap().values, [0.5, 0.6, 0.7, 0.8]);
        assert_eq!(f4[0].params.plasmid_loss, 1.5);
        assert_eq!(f4[1].params.plasmid_loss, 0.2);
        let f5 = &preset("figure5").unwrap()[0];
        assert_eq!(f5.params.noise, 1e-7);
        assert_eq!(f5.r0, 1e6 - 1.0);
        assert!(f5.ensemble.is_some());
    }
}
