use amrtriad_cli::config::{KEYS, parse_config, parse_flat, serialize};
use amrtriad_cli::preset::{PRESETS, preset};
use proptest::prelude::*;

#[test]
fn presets_round_trip() {
    for name in PRESETS {
        for cfg in preset(name).unwrap() {
            let text = serialize(&cfg);
            assert_eq!(parse_config(&text).unwrap(), cfg, "{name}:\n{text}");
        }
    }
}

#[test]
fn serialized_documents_use_only_known_keys() {
    for name in PRESETS {
        for cfg in preset(name).unwrap() {
            let flat = parse_flat(&serialize(&cfg)).unwrap();
            assert!(flat.keys().all(|k| KEYS.contains(&k.as_str())));
        }
    }
}

fn engine() -> impl Strategy<Value = &'static str> {
    prop_oneof![Just("\"ode\""), Just("\"fde\""), Just("\"all\""), Just("[\"sde\", \"ode\"]")]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn documents_round_trip(
        engine in engine(),
        gamma in 0.0f64..2.0,
        sigma in 0.0f64..5e-6,
        alpha in 0.05f64..=1.0,
        r0 in 1e-3f64..999_999.0,
        dt in prop::sample::select(vec![1e-3, 0.01, 0.05, 0.1, 0.5]),
        stride in 1usize..20,
        blocks in 1usize..200,
        seed in any::<u64>(),
        sweep in prop::option::of(prop::collection::vec(0.0f64..2.0, 1..6)),
    ) {
        let t_end = (blocks * stride) as f64 * dt;
        let mut text = format!(
            "engine = {engine}\nseed = \"{seed}\"\nmodel.gamma = {gamma:?}\nmodel.sigma = {sigma:?}\n\
             model.alpha = {alpha:?}\ninitial.R0 = {r0:?}\ngrid.t_end = {t_end:?}\ngrid.dt = {dt:?}\n\
             grid.stride = {stride}\n"
        );
        if let Some(values) = &sweep {
            text.push_str(&format!("sweep.parameter = \"gamma\"\nsweep.values = {values:?}\n"));
        }
        let cfg = parse_config(&text).unwrap();
        let again = parse_config(&serialize(&cfg)).unwrap();
        prop_assert_eq!(again, cfg);
    }

    #[test]
    fn ensembles_round_trip(
        n_paths in 1usize..1000,
        base_seed in any::<u64>(),
        burn_in in 0.0f64..0.99,
        n_bins in 2usize..500,
    ) {
        let text = format!(
            "engine = \"sde\"\nmodel.gamma = 0.1\nmodel.sigma = 1e-7\ninitial.R0 = 1\n\
             ensemble.n_paths = {n_paths}\nensemble.base_seed = \"{base_seed}\"\n\
             ensemble.burn_in = {burn_in:?}\nensemble.n_bins = {n_bins}\n"
        );
        let cfg = parse_config(&text).unwrap();
        prop_assert_eq!(parse_config(&serialize(&cfg)).unwrap(), cfg);
    }
}
